#include "propgen/serialize.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "propgen/errors.hpp"
#include "propgen/rng.hpp"

namespace propgen {

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string hash_file(const std::string& path) { return fnv1a64_hex(read_text_file(path)); }

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json metric_config_to_json(const MetricConfig& config) {
  return Json{{"iou_thresholds", config.iou_thresholds},
              {"max_detections", config.max_detections_per_image},
              {"k_values", config.ar_k_values}};
}

MetricConfig metric_config_from_json(const Json& j, const MetricConfig& defaults) {
  MetricConfig config = defaults;
  try {
    if (j.contains("iou_thresholds"))
      config.iou_thresholds = j["iou_thresholds"].get<std::vector<double>>();
    if (j.contains("max_detections"))
      config.max_detections_per_image = j["max_detections"].get<int>();
    if (j.contains("k_values")) config.ar_k_values = j["k_values"].get<std::vector<int>>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("metric config: ") + e.what());
  }
  config.validate();
  return config;
}

Json ar_table_to_json(const ArTable& table) {
  Json j;
  j["k_values"] = table.ks;
  j["iou_thresholds"] = table.thresholds;
  j["total_gt"] = table.total_gt;
  j["recall"] = table.recall;
  j["ar"] = Json::object();
  for (size_t i = 0; i < table.ks.size(); ++i)
    j["ar"][std::to_string(table.ks[i])] = table.ar[i];
  j["headline"] = "pooled";
  Json per_class = Json::object();
  for (size_t c = 0; c < table.class_names.size(); ++c) {
    Json entry;
    entry["gt_count"] = table.class_gt_counts[c];
    for (size_t i = 0; i < table.ks.size(); ++i)
      entry["ar"][std::to_string(table.ks[i])] = table.class_ar[c][i];
    per_class[table.class_names[c]] = std::move(entry);
  }
  j["per_class"] = std::move(per_class);
  Json class_mean = Json::object();
  for (size_t i = 0; i < table.ks.size(); ++i)
    class_mean[std::to_string(table.ks[i])] = table.class_mean_ar[i];
  j["class_mean_ar"] = std::move(class_mean);
  return j;
}

std::string ar_table_to_csv(const ArTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "scope,k,ar\n";
  for (size_t i = 0; i < table.ks.size(); ++i)
    out << "pooled," << table.ks[i] << "," << table.ar[i] << "\n";
  for (size_t i = 0; i < table.ks.size(); ++i)
    out << "class_mean," << table.ks[i] << "," << table.class_mean_ar[i] << "\n";
  for (size_t c = 0; c < table.class_names.size(); ++c)
    for (size_t i = 0; i < table.ks.size(); ++i)
      out << table.class_names[c] << "," << table.ks[i] << "," << table.class_ar[c][i] << "\n";
  return out.str();
}

Json ap_table_to_json(const ApTable& table) {
  Json j;
  j["classes"] = table.classes;
  Json rows = Json::array();
  const size_t n = table.size();
  for (size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (size_t k = 0; k < n; ++k) {
      const auto v = table.at(i, k);
      if (v.has_value())
        row.push_back(*v);
      else
        row.push_back(nullptr);
    }
    rows.push_back(std::move(row));
  }
  j["ap"] = std::move(rows);
  j["config"] = metric_config_to_json(table.config);
  return j;
}

std::string ap_table_to_csv(const ApTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "det_class";
  for (const std::string& c : table.classes) out << "," << c;
  out << "\n";
  const size_t n = table.size();
  for (size_t i = 0; i < n; ++i) {
    out << table.classes[i];
    for (size_t k = 0; k < n; ++k) {
      out << ",";
      const auto v = table.at(i, k);
      if (v.has_value()) out << *v;  // undefined stays empty
    }
    out << "\n";
  }
  return out.str();
}

Json similarity_to_json(const SimilarityMatrix& sim) {
  Json j;
  j["classes"] = sim.classes;
  const size_t n = sim.size();
  auto matrix = [&](const std::vector<double>& values) {
    Json rows = Json::array();
    for (size_t i = 0; i < n; ++i) {
      Json row = Json::array();
      for (size_t k = 0; k < n; ++k) row.push_back(values[i * n + k]);
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["similarity"] = matrix(sim.values);
  j["raw"] = matrix(sim.raw);
  Json defined = Json::array();
  for (size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (size_t k = 0; k < n; ++k) row.push_back(sim.input_defined[i * n + k] != 0);
    defined.push_back(std::move(row));
  }
  j["input_defined"] = std::move(defined);
  j["ap_table_hash"] = sim.ap_table_hash;
  return j;
}

std::string similarity_to_csv(const SimilarityMatrix& sim) {
  std::ostringstream out;
  out.precision(17);
  out << "class";
  for (const std::string& c : sim.classes) out << "," << c;
  out << "\n";
  const size_t n = sim.size();
  for (size_t i = 0; i < n; ++i) {
    out << sim.classes[i];
    for (size_t k = 0; k < n; ++k) out << "," << sim.at(i, k);
    out << "\n";
  }
  return out.str();
}

SimilarityMatrix similarity_from_json(const Json& j) {
  SimilarityMatrix sim;
  try {
    sim.classes = j.at("classes").get<std::vector<std::string>>();
    const size_t n = sim.classes.size();
    sim.values.reserve(n * n);
    sim.raw.reserve(n * n);
    sim.input_defined.reserve(n * n);
    for (const Json& row : j.at("similarity"))
      for (const Json& v : row) sim.values.push_back(v.get<double>());
    for (const Json& row : j.at("raw"))
      for (const Json& v : row) sim.raw.push_back(v.get<double>());
    for (const Json& row : j.at("input_defined"))
      for (const Json& v : row) sim.input_defined.push_back(v.get<bool>() ? 1 : 0);
    if (j.contains("ap_table_hash")) sim.ap_table_hash = j["ap_table_hash"].get<std::string>();
    if (sim.values.size() != n * n || sim.raw.size() != n * n ||
        sim.input_defined.size() != n * n)
      throw ParseError("similarity file: matrix extent does not match class list");
  } catch (const Json::exception& e) {
    throw ParseError(std::string("similarity file: ") + e.what());
  }
  return sim;
}

Json sufficiency_to_json(const SufficiencyCurve& curve) {
  Json j;
  j["k_values"] = curve.ks;
  j["has_baseline"] = curve.has_baseline;
  if (curve.has_baseline) {
    Json baseline = Json::object();
    for (size_t i = 0; i < curve.ks.size(); ++i)
      baseline[std::to_string(curve.ks[i])] = curve.baseline_ar[i];
    j["baseline_ar"] = std::move(baseline);
  }
  Json rows = Json::array();
  for (const SufficiencyRow& row : curve.rows) {
    Json rj{{"method", row.method}, {"p", row.p}};
    for (size_t i = 0; i < curve.ks.size(); ++i) {
      rj["ar"][std::to_string(curve.ks[i])] = row.ar[i];
      if (!row.drop.empty()) rj["drop"][std::to_string(curve.ks[i])] = row.drop[i];
    }
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string sufficiency_to_csv(const SufficiencyCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "method,p";
  for (int k : curve.ks) out << ",ar@" << k;
  if (curve.has_baseline)
    for (int k : curve.ks) out << ",drop@" << k;
  out << "\n";
  for (const SufficiencyRow& row : curve.rows) {
    out << row.method << "," << row.p;
    for (size_t i = 0; i < curve.ks.size(); ++i) out << "," << row.ar[i];
    if (curve.has_baseline)
      for (size_t i = 0; i < curve.ks.size(); ++i) out << "," << row.drop[i];
    out << "\n";
  }
  return out.str();
}

Json necessity_to_json(const NecessityResult& result) {
  Json j;
  j["k_values"] = result.ks;
  Json mean = Json::object();
  for (size_t i = 0; i < result.ks.size(); ++i)
    mean[std::to_string(result.ks[i])] = result.mean_rel_change[i];
  j["mean_rel_change"] = std::move(mean);
  j["excluded_classes"] = result.excluded_classes;
  Json rows = Json::array();
  for (const NecessityClassRow& row : result.per_class) {
    Json rj{{"target_class", row.target_class},
            {"removed_class", row.removed_class},
            {"excluded", row.excluded}};
    for (size_t i = 0; i < result.ks.size(); ++i) {
      const std::string k = std::to_string(result.ks[i]);
      rj["ar_before"][k] = row.ar_before[i];
      rj["ar_after"][k] = row.ar_after[i];
      rj["rel_change"][k] = row.rel_change[i];
    }
    rows.push_back(std::move(rj));
  }
  j["per_class"] = std::move(rows);
  return j;
}

std::string necessity_to_csv(const NecessityResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "target_class,removed_class,excluded";
  for (int k : result.ks) out << ",ar_before@" << k << ",ar_after@" << k << ",rel_change@" << k;
  out << "\n";
  for (const NecessityClassRow& row : result.per_class) {
    out << row.target_class << "," << row.removed_class << "," << (row.excluded ? 1 : 0);
    for (size_t i = 0; i < result.ks.size(); ++i)
      out << "," << row.ar_before[i] << "," << row.ar_after[i] << "," << row.rel_change[i];
    out << "\n";
  }
  out << "mean,,";
  for (size_t i = 0; i < result.ks.size(); ++i) out << ",,," << result.mean_rel_change[i];
  out << "\n";
  return out.str();
}

Json granularity_to_json(const GranularityReport& report) {
  Json j;
  j["k_values"] = report.ks;
  Json rows = Json::array();
  for (const GranularityRow& row : report.rows) {
    Json rj{{"level", row.level},
            {"class_count", row.class_count},
            {"has_proposals", row.has_proposals}};
    if (row.has_proposals)
      for (size_t i = 0; i < report.ks.size(); ++i)
        rj["ar"][std::to_string(report.ks[i])] = row.ar[i];
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string granularity_to_csv(const GranularityReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "level,class_count,present";
  for (int k : report.ks) out << ",ar@" << k;
  out << "\n";
  for (const GranularityRow& row : report.rows) {
    out << row.level << "," << row.class_count << "," << (row.has_proposals ? 1 : 0);
    for (size_t i = 0; i < report.ks.size(); ++i) {
      out << ",";
      if (row.has_proposals) out << row.ar[i];
    }
    out << "\n";
  }
  return out.str();
}

std::string granularity_to_markdown(const GranularityReport& report) {
  std::ostringstream out;
  out << "| level | classes in use |";
  for (int k : report.ks) out << " AR@" << k << " |";
  out << "\n|---|---|";
  for (size_t i = 0; i < report.ks.size(); ++i) out << "---|";
  out << "\n";
  out.precision(4);
  out.setf(std::ios::fixed);
  for (const GranularityRow& row : report.rows) {
    out << "| L" << row.level << " | " << row.class_count << " |";
    for (size_t i = 0; i < report.ks.size(); ++i) {
      if (row.has_proposals)
        out << " " << row.ar[i] << " |";
      else
        out << " absent |";
    }
    out << "\n";
  }
  return out.str();
}

namespace {

const char* role_name(ProposalRole role) {
  switch (role) {
    case ProposalRole::kAnchor: return "anchor";
    case ProposalRole::kPositive: return "positive";
    case ProposalRole::kIgnored: return "ignored";
    default: return "negative";
  }
}

}  // namespace

Json pseudo_gt_to_json(const PseudoGtResult& result, const ProposalSet& proposals) {
  Json j;
  Json entries = Json::array();
  for (const PseudoGtEntry& entry : result.entries) {
    const auto& list = proposals.images().at(entry.image_id);
    const auto bb = box_to_xywh(list.at(entry.anchor_index).box);
    Json ej{{"image_id", entry.image_id},
            {"class", entry.class_name},
            {"anchor_index", entry.anchor_index},
            {"anchor_bbox", Json::array({bb[0], bb[1], bb[2], bb[3]})}};
    Json roles = Json::array();
    for (ProposalRole role : entry.roles) roles.push_back(role_name(role));
    ej["roles"] = std::move(roles);
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  j["warnings"] = result.warnings;
  return j;
}

Json budget_report_to_json(const BudgetedDataset& result, const BudgetConfig& config) {
  return Json{{"image_budget", config.image_budget},
              {"box_budget", config.box_budget},
              {"seed", config.seed},
              {"eligible_images", result.eligible_images},
              {"eligible_boxes", result.eligible_boxes},
              {"kept_images", static_cast<int64_t>(result.dataset.images().size())},
              {"kept_boxes", static_cast<int64_t>(result.dataset.annotations().size())},
              {"under_budget_images", result.under_budget_images},
              {"under_budget_boxes", result.under_budget_boxes}};
}

Json validation_report_to_json(const std::vector<std::string>& violations) {
  return Json{{"violations", violations}, {"pass", violations.empty()}};
}

}  // namespace propgen
