#include "lindelab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lindelab {

namespace {
constexpr double kMassTol = 1e-12;
constexpr double kMeanTol = 1e-12;
}  // namespace

DiscreteDistribution make_discrete(std::vector<Atom> raw_atoms) {
  if (raw_atoms.empty()) throw EmptyAtomList();
  for (const auto& a : raw_atoms) {
    if (!std::isfinite(a.value)) throw DistributionError("atom value must be finite");
    if (!(a.prob > 0.0) || !std::isfinite(a.prob))
      throw DistributionError("atom probability must be positive and finite");
  }
  std::stable_sort(raw_atoms.begin(), raw_atoms.end(),
                   [](const Atom& x, const Atom& y) { return x.value < y.value; });

  std::vector<Atom> atoms;
  atoms.reserve(raw_atoms.size());
  for (const auto& a : raw_atoms) {
    if (!atoms.empty() && atoms.back().value == a.value)
      atoms.back().prob += a.prob;
    else
      atoms.push_back(a);
  }

  double mass = 0.0, mean = 0.0, abs_first = 0.0, variance = 0.0;
  for (const auto& a : atoms) {
    mass += a.prob;
    mean += a.value * a.prob;
    abs_first += std::fabs(a.value) * a.prob;
    variance += a.value * a.value * a.prob;
  }
  if (std::fabs(mass - 1.0) > kMassTol) {
    std::ostringstream os;
    os << "atom probabilities sum to " << mass << ", not 1";
    throw NonUnitMass(os.str());
  }
  if (std::fabs(mean) > kMeanTol * abs_first) {
    std::ostringstream os;
    os << "mean is " << mean << ", not 0";
    throw NonZeroMean(os.str());
  }
  return DiscreteDistribution(std::move(atoms), variance);
}

double DiscreteDistribution::truncated_second(double z) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    if (std::fabs(a.value) >= z) s += a.value * a.value * a.prob;
  return s;
}

double DiscreteDistribution::truncated_third_alg(double z) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    if (std::fabs(a.value) < z) s += a.value * a.value * a.value * a.prob;
  return s;
}

double DiscreteDistribution::truncated_third_abs(double z) const {
  double s = 0.0;
  for (const auto& a : atoms_) {
    double m = std::fabs(a.value);
    if (m < z) s += m * m * m * a.prob;
  }
  return s;
}

double DiscreteDistribution::moment_g(const GFunction& g) const {
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.value == 0.0) continue;  // v^2 kills the term; keeps g off z = 0
    s += a.value * a.value * g.eval(std::fabs(a.value)) * a.prob;
  }
  return s;
}

bool DiscreteDistribution::is_point_mass_at_zero() const {
  return atoms_.size() == 1 && atoms_[0].value == 0.0;
}

bool DiscreteDistribution::is_symmetric() const {
  size_t i = 0, j = atoms_.size();
  while (i < j) {
    --j;
    if (i == j) return atoms_[i].value == 0.0;
    if (atoms_[i].value != -atoms_[j].value || atoms_[i].prob != atoms_[j].prob) return false;
    ++i;
  }
  return true;
}

std::string DiscreteDistribution::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << "{";
  for (size_t i = 0; i < atoms_.size(); ++i) {
    if (i) os << ", ";
    os << "(" << atoms_[i].value << ", " << atoms_[i].prob << ")";
  }
  os << "}";
  return os.str();
}

DiscreteDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DistributionError("cannot open distribution file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DistributionError("bad JSON in " + path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array())
    throw DistributionError(path + ": expected {\"atoms\": [[value, prob], ...]}");
  auto num = [&](const nlohmann::json& v) -> double {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        size_t pos = 0;
        double d = std::stod(v.get<std::string>(), &pos);
        if (pos != v.get<std::string>().size()) throw std::invalid_argument("trailing");
        return d;
      } catch (const std::exception&) {
        throw DistributionError(path + ": cannot parse numeric string " + v.dump());
      }
    }
    throw DistributionError(path + ": atom entries must be numbers or decimal strings");
  };
  std::vector<Atom> atoms;
  for (const auto& item : j["atoms"]) {
    if (!item.is_array() || item.size() != 2)
      throw DistributionError(path + ": atoms must be [value, prob] pairs");
    atoms.push_back({num(item[0]), num(item[1])});
  }
  return make_discrete(std::move(atoms));
}

}  // namespace lindelab
