#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "propgen/metrics.hpp"
#include "propgen/selection.hpp"
#include "propgen/similarity.hpp"
#include "propgen/split.hpp"
#include "propgen/study.hpp"

namespace propgen {

using Json = nlohmann::json;

// All result files go through one dump routine (sorted keys, two-space
// indent, trailing newline) so reruns are byte-identical.
std::string canonical_dump(const Json& j);

std::string read_text_file(const std::string& path);  // ParseError when unreadable
void write_text_file(const std::string& path, const std::string& text);

std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);
std::string iso8601_utc_now();

// Metric config: {"iou_thresholds": [...], "max_detections": n, "k_values": [...]}.
Json metric_config_to_json(const MetricConfig& config);
MetricConfig metric_config_from_json(const Json& j, const MetricConfig& defaults = {});

Json ar_table_to_json(const ArTable& table);
std::string ar_table_to_csv(const ArTable& table);

Json ap_table_to_json(const ApTable& table);          // undefined entries: null
std::string ap_table_to_csv(const ApTable& table);    // undefined entries: empty

Json similarity_to_json(const SimilarityMatrix& sim);
std::string similarity_to_csv(const SimilarityMatrix& sim);
SimilarityMatrix similarity_from_json(const Json& j);

Json sufficiency_to_json(const SufficiencyCurve& curve);
std::string sufficiency_to_csv(const SufficiencyCurve& curve);

Json necessity_to_json(const NecessityResult& result);
std::string necessity_to_csv(const NecessityResult& result);

Json granularity_to_json(const GranularityReport& report);
std::string granularity_to_csv(const GranularityReport& report);
std::string granularity_to_markdown(const GranularityReport& report);

Json pseudo_gt_to_json(const PseudoGtResult& result, const ProposalSet& proposals);

Json budget_report_to_json(const BudgetedDataset& result, const BudgetConfig& config);

struct TreeValidation;
Json validation_report_to_json(const std::vector<std::string>& violations);

}  // namespace propgen
