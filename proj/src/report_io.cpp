#include "lindelab/report_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lindelab {

namespace {

nlohmann::json number_or_tag(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double from_number_or_tag(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
  }
  return j.get<double>();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

nlohmann::json report_to_json(const BoundReport& r) {
  nlohmann::json j;
  j["inequality"] = r.inequality;
  j["ctx"] = r.ctx;
  j["g"] = r.g;
  j["eps"] = number_or_tag(r.eps);
  j["gamma"] = number_or_tag(r.gamma);
  j["fraction"] = r.fraction_value;
  j["constant"] = r.constant_used;
  j["constant_source"] = r.constant_source;
  j["delta"] = r.delta_n;
  j["uncertainty"] = r.delta_uncertainty;
  j["ratio"] = r.ratio;
  j["pass"] = r.pass;
  return j;
}

BoundReport report_from_json(const nlohmann::json& j) {
  BoundReport r;
  r.inequality = j.at("inequality").get<std::string>();
  r.ctx = j.at("ctx").get<std::string>();
  r.g = j.at("g").get<std::string>();
  r.eps = from_number_or_tag(j.at("eps"));
  r.gamma = from_number_or_tag(j.at("gamma"));
  r.fraction_value = j.at("fraction").get<double>();
  r.constant_used = j.at("constant").get<double>();
  r.constant_source = j.at("constant_source").get<std::string>();
  r.delta_n = j.at("delta").get<double>();
  r.delta_uncertainty = j.at("uncertainty").get<double>();
  r.ratio = j.at("ratio").get<double>();
  r.pass = j.at("pass").get<bool>();
  return r;
}

nlohmann::json corpus_result_to_json(const CorpusResult& result) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : result.reports) reports.push_back(report_to_json(r));
  nlohmann::json max_ratio = nlohmann::json::object();
  for (const auto& [id, ratio] : result.summary.max_ratio) max_ratio[id] = ratio;
  return nlohmann::json{{"reports", reports},
                        {"summary",
                         {{"total", result.summary.total},
                          {"failures", result.summary.failures},
                          {"max_ratio", max_ratio}}}};
}

std::string reports_to_csv(const std::vector<BoundReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "inequality,ctx,g,eps,gamma,fraction,constant,constant_source,delta,uncertainty,"
        "ratio,pass\n";
  for (const auto& r : reports) {
    os << csv_escape(r.inequality) << ',' << csv_escape(r.ctx) << ',' << csv_escape(r.g) << ','
       << r.eps << ',' << r.gamma << ',' << r.fraction_value << ',' << r.constant_used << ','
       << csv_escape(r.constant_source) << ',' << r.delta_n << ',' << r.delta_uncertainty << ','
       << r.ratio << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace lindelab
