#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lindelab/corpus.hpp"

namespace lindelab {

/// Non-finite eps/gamma serialize as the strings "inf"/"nan" (JSON has no
/// literals for them); from_json reverses the mapping, so reports round-trip.
nlohmann::json report_to_json(const BoundReport& r);
BoundReport report_from_json(const nlohmann::json& j);

nlohmann::json corpus_result_to_json(const CorpusResult& result);

/// One row per report. Header:
/// inequality,ctx,g,eps,gamma,fraction,constant,constant_source,delta,uncertainty,ratio,pass
std::string reports_to_csv(const std::vector<BoundReport>& reports);

}  // namespace lindelab
