#include "lindelab/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace lindelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelSlack = 1e-12;

double parse_number(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw GSpecError(std::string("trailing characters in ") + what + ": " + s);
    return v;
  } catch (const GSpecError&) {
    throw;
  } catch (const std::exception&) {
    throw GSpecError(std::string("cannot parse ") + what + ": " + s);
  }
}

}  // namespace

GFunction GFunction::identity() {
  GFunction g;
  g.kind_ = Kind::identity;
  return g;
}

GFunction GFunction::constant_one() {
  GFunction g;
  g.kind_ = Kind::constant_one;
  return g;
}

GFunction GFunction::power(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw GSpecError("power exponent must lie in [0,1]");
  GFunction g;
  g.kind_ = Kind::power;
  g.param_ = delta;
  return g;
}

GFunction GFunction::clip_above(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw GSpecError("clip point must be positive and finite");
  GFunction g;
  g.kind_ = Kind::clip_above;
  g.param_ = a;
  return g;
}

GFunction GFunction::clip_below(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw GSpecError("clip point must be positive and finite");
  GFunction g;
  g.kind_ = Kind::clip_below;
  g.param_ = a;
  return g;
}

GFunction GFunction::scaled(double c, GFunction inner) {
  if (!(c > 0.0) || !std::isfinite(c)) throw GSpecError("scale factor must be positive and finite");
  GFunction g;
  g.kind_ = Kind::scaled;
  g.param_ = c;
  g.inner_ = std::make_shared<GFunction>(std::move(inner));
  return g;
}

GFunction GFunction::tabulated(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) throw GSpecError("tabulated g needs at least two knots");
  for (size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].first > 0.0) || !std::isfinite(knots[i].first) ||
        !(knots[i].second > 0.0) || !std::isfinite(knots[i].second))
      throw GSpecError("tabulated knots must have positive finite coordinates");
    if (i > 0 && !(knots[i].first > knots[i - 1].first))
      throw GSpecError("tabulated knot abscissae must be strictly increasing");
  }
  GFunction g;
  g.kind_ = Kind::tabulated;
  g.knots_ = std::move(knots);
  return g;
}

double GFunction::eval(double z) const {
  if (!(z > 0.0)) throw GDomainError("g is only defined for z > 0");
  switch (kind_) {
    case Kind::identity:
      return z;
    case Kind::constant_one:
      return 1.0;
    case Kind::power:
      if (param_ == 1.0) return z;
      if (param_ == 0.0) return 1.0;
      return std::pow(z, param_);
    case Kind::clip_above:
      return std::min(z, param_);
    case Kind::clip_below:
      return std::max(z, param_);
    case Kind::scaled:
      return param_ * inner_->eval(z);
    case Kind::tabulated: {
      // Segment lines extend with constant slope below the first and above the
      // last knot.
      size_t hi = knots_.size() - 1;
      size_t seg;
      if (z <= knots_.front().first) {
        seg = 0;
      } else if (z >= knots_[hi].first) {
        seg = hi - 1;
      } else {
        seg = 0;
        while (seg + 1 < hi && z > knots_[seg + 1].first) ++seg;
      }
      double z0 = knots_[seg].first, g0 = knots_[seg].second;
      double z1 = knots_[seg + 1].first, g1 = knots_[seg + 1].second;
      double slope = (g1 - g0) / (z1 - z0);
      double v = g0 + slope * (z - z0);
      if (!(v > 0.0)) throw GDomainError("tabulated g is not positive at z=" + std::to_string(z));
      return v;
    }
  }
  throw GDomainError("unreachable g kind");
}

std::vector<GPiece> GFunction::normalized_pieces(double anchor) const {
  if (!(anchor > 0.0)) throw GDomainError("anchor must be positive");
  std::vector<GPiece> out;
  auto power_piece = [](double lo, double hi, double q, double delta) {
    GPiece p;
    p.lo = lo;
    p.hi = hi;
    p.affine = false;
    p.q = q;
    p.delta = delta;
    return p;
  };
  switch (kind_) {
    case Kind::identity:
      out.push_back(power_piece(0.0, kInf, 1.0 / anchor, 1.0));
      break;
    case Kind::constant_one:
      out.push_back(power_piece(0.0, kInf, 1.0, 0.0));
      break;
    case Kind::power: {
      double ga = (param_ == 1.0) ? anchor : (param_ == 0.0 ? 1.0 : std::pow(anchor, param_));
      out.push_back(power_piece(0.0, kInf, 1.0 / ga, param_));
      break;
    }
    case Kind::clip_above: {
      double ga = std::min(anchor, param_);
      out.push_back(power_piece(0.0, param_, 1.0 / ga, 1.0));
      out.push_back(power_piece(param_, kInf, param_ / ga, 0.0));
      break;
    }
    case Kind::clip_below: {
      double ga = std::max(anchor, param_);
      out.push_back(power_piece(0.0, param_, param_ / ga, 0.0));
      out.push_back(power_piece(param_, kInf, 1.0 / ga, 1.0));
      break;
    }
    case Kind::scaled:
      // The scale factor cancels in g(w)/g(anchor); delegating keeps the
      // invariance exact instead of within rounding.
      return inner_->normalized_pieces(anchor);
    case Kind::tabulated: {
      double ga = eval(anchor);
      size_t nseg = knots_.size() - 1;
      for (size_t i = 0; i < nseg; ++i) {
        double z0 = knots_[i].first, g0 = knots_[i].second;
        double z1 = knots_[i + 1].first, g1 = knots_[i + 1].second;
        double slope = (g1 - g0) / (z1 - z0);
        GPiece p;
        p.lo = (i == 0) ? 0.0 : z0;
        p.hi = (i + 1 == nseg) ? kInf : z1;
        p.affine = true;
        p.a = slope / ga;
        p.b = (g0 - slope * z0) / ga;
        out.push_back(p);
      }
      break;
    }
  }
  return out;
}

std::string GFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::identity:
      return "identity";
    case Kind::constant_one:
      return "const";
    case Kind::power:
      os << "power:" << param_;
      return os.str();
    case Kind::clip_above:
      os << "clip-above:" << param_;
      return os.str();
    case Kind::clip_below:
      os << "clip-below:" << param_;
      return os.str();
    case Kind::scaled:
      os << "scaled:" << param_ << ":" << inner_->describe();
      return os.str();
    case Kind::tabulated: {
      os << "tabulated:[";
      for (size_t i = 0; i < knots_.size(); ++i) {
        if (i) os << ",";
        os << "(" << knots_[i].first << "," << knots_[i].second << ")";
      }
      os << "]";
      return os.str();
    }
  }
  return "?";
}

bool validate_gclass(const GFunction& g, std::span<const double> grid, std::string* why) {
  if (grid.size() < 2) throw GSpecError("validation grid needs at least two points");
  auto fail = [&](size_t i, const char* what) {
    if (why) {
      std::ostringstream os;
      os << what << " between z=" << grid[i] << " and z=" << grid[i + 1];
      *why = os.str();
    }
    return false;
  };
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !(grid[i + 1] > grid[i]))
      throw GSpecError("validation grid must be positive and strictly increasing");
    double g0, g1;
    try {
      g0 = g.eval(grid[i]);
      g1 = g.eval(grid[i + 1]);
    } catch (const GDomainError&) {
      return fail(i, "g not positive");
    }
    if (g1 < g0 - kRelSlack * std::max(g0, g1)) return fail(i, "g decreasing");
    double r0 = grid[i] / g0;
    double r1 = grid[i + 1] / g1;
    if (r1 < r0 - kRelSlack * std::max(r0, r1)) return fail(i, "z/g(z) decreasing");
  }
  return true;
}

bool envelope_check(const GFunction& g, double a, double z) {
  if (!(a > 0.0) || !(z > 0.0)) throw GDomainError("envelope_check needs a, z > 0");
  double ratio = g.eval(z) / g.eval(a);
  double lo = std::min(z / a, 1.0);
  double hi = std::max(z / a, 1.0);
  return ratio >= lo * (1.0 - kRelSlack) && ratio <= hi * (1.0 + kRelSlack);
}

namespace {

std::vector<std::pair<double, double>> load_knots(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GSpecError("cannot open tabulated knot file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw GSpecError("bad JSON in " + path + ": " + e.what());
  }
  if (!j.is_array()) throw GSpecError("knot file must hold a JSON array of [z,g] pairs");
  std::vector<std::pair<double, double>> knots;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2)
      throw GSpecError("knot entries must be [z, g] pairs");
    auto num = [](const nlohmann::json& v) -> double {
      if (v.is_number()) return v.get<double>();
      if (v.is_string()) return parse_number(v.get<std::string>(), "knot coordinate");
      throw GSpecError("knot coordinates must be numbers or decimal strings");
    };
    knots.emplace_back(num(item[0]), num(item[1]));
  }
  return knots;
}

double resolve_clip_point(const std::string& token, std::optional<double> scale) {
  if (token == "B") {
    if (!scale) throw GSpecError("g-spec uses 'B' but no context scale is available");
    return *scale;
  }
  return parse_number(token, "clip point");
}

}  // namespace

GFunction parse_gfunction(const std::string& spec, std::optional<double> context_scale) {
  if (spec == "identity") return GFunction::identity();
  if (spec == "const") return GFunction::constant_one();
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
  std::string rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (head == "power") {
    if (rest.empty()) throw GSpecError("power needs an exponent: power:<d>");
    return GFunction::power(parse_number(rest, "power exponent"));
  }
  if (head == "clip-above") {
    if (rest.empty()) throw GSpecError("clip-above needs a point: clip-above:<a|B>");
    return GFunction::clip_above(resolve_clip_point(rest, context_scale));
  }
  if (head == "clip-below") {
    if (rest.empty()) throw GSpecError("clip-below needs a point: clip-below:<a|B>");
    return GFunction::clip_below(resolve_clip_point(rest, context_scale));
  }
  if (head == "scaled") {
    auto colon2 = rest.find(':');
    if (colon2 == std::string::npos)
      throw GSpecError("scaled needs a factor and inner spec: scaled:<c>:<inner>");
    double c = parse_number(rest.substr(0, colon2), "scale factor");
    return GFunction::scaled(c, parse_gfunction(rest.substr(colon2 + 1), context_scale));
  }
  if (head == "tabulated") {
    if (rest.size() < 2 || rest[0] != '@')
      throw GSpecError("tabulated needs a knot file: tabulated:@file.json");
    return GFunction::tabulated(load_knots(rest.substr(1)));
  }
  throw GSpecError("unknown g-spec: " + spec);
}

}  // namespace lindelab
