#include "propgen/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "propgen/dataset.hpp"
#include "propgen/errors.hpp"
#include "propgen/fusion.hpp"
#include "propgen/metrics.hpp"
#include "propgen/selection.hpp"
#include "propgen/serialize.hpp"
#include "propgen/similarity.hpp"
#include "propgen/simulator.hpp"
#include "propgen/split.hpp"
#include "propgen/study.hpp"
#include "propgen/tree.hpp"
#include "propgen/version.hpp"

namespace propgen {
namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string run_root;
};

// One holder for every subcommand's flags; only the bound subset is ever read.
struct Options {
  CommonArgs common;
  std::optional<std::string> dataset, hierarchy, detections, proposals, similarity, selection,
      labels, source, target, baseline, method, mode, placement;
  std::string run_dir;
  std::optional<int> p, level, num_targets, cap, max_dets, pool, images;
  std::optional<int64_t> image_budget, box_budget;
  std::optional<uint64_t> seed;
  std::optional<double> nms_t, score_t, positive_iou, ignore_iou;
  std::vector<int> ks;
  std::vector<double> thresholds;
  std::vector<std::string> classes, targets, train;
};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

Json parse_json_file(const std::string& path, const char* what) {
  Json j = Json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(std::string(what) + " is not valid JSON: " + path);
  return j;
}

Json base_config(const CommonArgs& common) {
  if (common.config_path.empty()) return Json::object();
  std::string text;
  try {
    text = read_text_file(common.config_path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + common.config_path);
  if (!j.is_object()) throw ConfigError("config file must hold an object: " + common.config_path);
  return j;
}

template <typename T>
void override_key(Json& cfg, const char* key, const std::optional<T>& value) {
  if (value.has_value()) cfg[key] = *value;
}

std::string require_string(const Json& cfg, const char* key, const char* what) {
  if (!cfg.contains(key) || !cfg[key].is_string())
    throw ConfigError(std::string(what) + " requires '" + key + "' (flag or config key)");
  return cfg[key].get<std::string>();
}

int require_int(const Json& cfg, const char* key, const char* what) {
  if (!cfg.contains(key) || !cfg[key].is_number_integer())
    throw ConfigError(std::string(what) + " requires integer '" + key + "' (flag or config key)");
  return cfg[key].get<int>();
}

struct RunContext {
  std::string subcommand;
  Json config;
  std::string config_hash;
  fs::path dir;
  Json inputs = Json::object();
  Json seeds = Json::object();
  std::vector<std::string> outputs;
};

std::string resolve_run_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PROPGEN_RUN_ROOT"); env != nullptr && *env != '\0')
    return env;
  return "runs";
}

RunContext open_run(const std::string& subcommand, const CommonArgs& common, Json config) {
  RunContext ctx;
  ctx.subcommand = subcommand;
  ctx.config = std::move(config);
  ctx.config_hash = fnv1a64_hex(canonical_dump(ctx.config));
  ctx.dir = fs::path(resolve_run_root(common.run_root)) /
            (subcommand + "-" + ctx.config_hash.substr(0, 12));
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec)
    throw ConfigError("cannot create run directory " + ctx.dir.string() + ": " + ec.message());
  return ctx;
}

void note_input(RunContext& ctx, const std::string& path) { ctx.inputs[path] = hash_file(path); }

void write_result(RunContext& ctx, const std::string& name, const std::string& text) {
  write_text_file((ctx.dir / name).string(), text);
  ctx.outputs.push_back(name);
}

// The manifest is the only file carrying a timestamp; everything else is
// byte-stable across reruns of the same config.
void finish_run(RunContext& ctx) {
  std::sort(ctx.outputs.begin(), ctx.outputs.end());
  Json manifest{{"subcommand", ctx.subcommand}, {"tool", "propgen"},
                {"version", kVersion},         {"timestamp", iso8601_utc_now()},
                {"config", ctx.config},        {"config_hash", ctx.config_hash},
                {"inputs", ctx.inputs},        {"outputs", ctx.outputs},
                {"seeds", ctx.seeds}};
  write_text_file((ctx.dir / "manifest.json").string(), canonical_dump(manifest));
  std::cout << "run: " << ctx.dir.string() << "\n";
}

Dataset load_dataset_input(RunContext& ctx, const std::string& path) {
  note_input(ctx, path);
  return load_dataset(path);
}

SemanticTree load_hierarchy_input(RunContext& ctx, const std::string& path) {
  note_input(ctx, path);
  return load_hierarchy(path);
}

ProposalSet load_proposals_input(RunContext& ctx, const std::string& path) {
  note_input(ctx, path);
  return load_proposals(path);
}

std::vector<Detection> load_detections_input(RunContext& ctx, const std::string& path,
                                             const Dataset& data) {
  note_input(ctx, path);
  return load_detections(path, data);
}

SimilarityMatrix load_similarity_input(RunContext& ctx, const std::string& path) {
  note_input(ctx, path);
  return similarity_from_json(parse_json_file(path, "similarity file"));
}

ProtoSelection load_selection_input(RunContext& ctx, const std::string& path) {
  note_input(ctx, path);
  return load_selection(path);
}

MetricConfig metrics_from_cfg(const Json& cfg) {
  return metric_config_from_json(cfg.value("metrics", Json::object()));
}

void apply_metric_flags(Json& cfg, const Options& opt) {
  if (opt.max_dets.has_value()) cfg["metrics"]["max_detections"] = *opt.max_dets;
  if (!opt.ks.empty()) cfg["metrics"]["k_values"] = opt.ks;
}

NmsMode mode_from_string(const std::string& s) {
  if (s == "per-class") return NmsMode::kPerClass;
  if (s == "cross-class") return NmsMode::kCrossClass;
  throw ConfigError("unknown NMS mode '" + s + "' (expected per-class or cross-class)");
}

FusionConfig fusion_from_cfg(const Json& cfg) {
  FusionConfig fc;
  const Json j = cfg.value("fusion", Json::object());
  try {
    fc.nms_threshold = j.value("nms_threshold", fc.nms_threshold);
    fc.score_threshold = j.value("score_threshold", fc.score_threshold);
    fc.per_image_cap = j.value("per_image_cap", fc.per_image_cap);
    if (j.contains("mode")) fc.mode = mode_from_string(j["mode"].get<std::string>());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("fusion config: ") + e.what());
  }
  fc.validate();
  return fc;
}

void apply_fusion_flags(Json& cfg, const Options& opt) {
  if (opt.nms_t.has_value()) cfg["fusion"]["nms_threshold"] = *opt.nms_t;
  if (opt.score_t.has_value()) cfg["fusion"]["score_threshold"] = *opt.score_t;
  if (opt.cap.has_value()) cfg["fusion"]["per_image_cap"] = *opt.cap;
  if (opt.mode.has_value()) cfg["fusion"]["mode"] = *opt.mode;
}

SimConfig sim_from_cfg(const Json& cfg) {
  SimConfig sc;
  const Json j = cfg.value("world", Json::object());
  try {
    sc.num_blocks = j.value("num_blocks", sc.num_blocks);
    sc.leaves_per_block = j.value("leaves_per_block", sc.leaves_per_block);
    sc.num_images = j.value("num_images", sc.num_images);
    sc.min_boxes_per_image = j.value("min_boxes_per_image", sc.min_boxes_per_image);
    sc.max_boxes_per_image = j.value("max_boxes_per_image", sc.max_boxes_per_image);
    sc.image_width = j.value("image_width", sc.image_width);
    sc.image_height = j.value("image_height", sc.image_height);
    sc.embed_dim = j.value("embed_dim", sc.embed_dim);
    sc.within_block_noise = j.value("within_block_noise", sc.within_block_noise);
    sc.box_min_frac = j.value("box_min_frac", sc.box_min_frac);
    sc.box_max_frac = j.value("box_max_frac", sc.box_max_frac);
    sc.placement = j.value("placement", sc.placement);
    sc.cluster_centers = j.value("cluster_centers", sc.cluster_centers);
    sc.cluster_spread = j.value("cluster_spread", sc.cluster_spread);
    sc.class_weight_decay = j.value("class_weight_decay", sc.class_weight_decay);
    sc.seed = j.value("seed", sc.seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("world config: ") + e.what());
  }
  sc.validate();
  return sc;
}

DetectorModelConfig detector_from_cfg(const Json& cfg) {
  DetectorModelConfig dm;
  const Json j = cfg.value("detector", Json::object());
  try {
    if (j.contains("training_classes"))
      dm.training_classes = j["training_classes"].get<std::vector<std::string>>();
    dm.jitter_scale = j.value("jitter_scale", dm.jitter_scale);
    dm.miss_base = j.value("miss_base", dm.miss_base);
    dm.label_noise = j.value("label_noise", dm.label_noise);
    dm.score_noise = j.value("score_noise", dm.score_noise);
    dm.fp_rate = j.value("fp_rate", dm.fp_rate);
    dm.fp_score_max = j.value("fp_score_max", dm.fp_score_max);
    dm.emit_per_class = j.value("emit_per_class", dm.emit_per_class);
    dm.emit_min_kappa = j.value("emit_min_kappa", dm.emit_min_kappa);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("detector config: ") + e.what());
  }
  dm.validate();
  return dm;
}

FrequencyMap dataset_frequencies(const Dataset& data) {
  FrequencyMap freqs;
  for (const ClassInfo& c : data.classes()) freqs[c.name] = 0;
  for (const auto& [name, count] : data.annotation_counts()) freqs[name] = count;
  return freqs;
}

std::vector<std::string> split_violation_message(const std::string& text) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    const size_t next = text.find("; ", pos);
    if (next == std::string::npos) {
      parts.push_back(text.substr(pos));
      break;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 2;
  }
  return parts;
}

// Result-file printers shared by the producing subcommand and `report`.

void print_ar_summary(std::ostream& out, const Json& ar) {
  for (const Json& k : ar.at("k_values")) {
    const std::string key = std::to_string(k.get<int>());
    out << "AR@" << key << " = " << fixed4(ar.at("ar").at(key).get<double>()) << "\n";
  }
  out << "ground-truth boxes: " << ar.at("total_gt").get<int64_t>() << "\n";
}

void print_ap_summary(std::ostream& out, const Json& ap) {
  const Json& classes = ap.at("classes");
  const Json& rows = ap.at("ap");
  double sum = 0.0;
  int defined = 0;
  for (size_t i = 0; i < classes.size(); ++i) {
    const Json& v = rows.at(i).at(i);
    if (!v.is_null()) {
      sum += v.get<double>();
      ++defined;
    }
  }
  out << "classes: " << classes.size() << "\n";
  if (defined > 0)
    out << "mean diagonal AP over " << defined << " defined classes = " << fixed4(sum / defined)
        << "\n";
  else
    out << "no class has a defined AP\n";
}

void print_similarity_summary(std::ostream& out, const Json& sim) {
  const std::vector<std::string> classes = sim.at("classes").get<std::vector<std::string>>();
  const Json& values = sim.at("similarity");
  const Json& defined = sim.at("input_defined");
  struct Pair {
    double value;
    std::string a, b;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < classes.size(); ++i)
    for (size_t j = i + 1; j < classes.size(); ++j)
      if (defined.at(i).at(j).get<bool>())
        pairs.push_back({values.at(i).at(j).get<double>(), classes[i], classes[j]});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.value != y.value) return x.value > y.value;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  out << "classes: " << classes.size() << "\n";
  const size_t top = std::min<size_t>(pairs.size(), 5);
  for (size_t i = 0; i < top; ++i)
    out << "s(" << pairs[i].a << ", " << pairs[i].b << ") = " << fixed4(pairs[i].value) << "\n";
}

void print_sweep_summary(std::ostream& out, const Json& sweep) {
  for (const Json& row : sweep.at("rows")) {
    out << "threshold " << fixed4(row.at("threshold").get<double>())
        << ": proposals=" << row.at("proposals").get<int64_t>();
    for (const Json& k : sweep.at("k_values")) {
      const std::string key = std::to_string(k.get<int>());
      out << " AR@" << key << "=" << fixed4(row.at("ar").at(key).get<double>());
    }
    out << "\n";
  }
}

void print_selection_summary(std::ostream& out, const Json& sel) {
  const std::vector<std::string> classes = sel.at("classes").get<std::vector<std::string>>();
  out << "method " << sel.at("method").get<std::string>() << ", P = " << sel.at("p").get<int>()
      << ", " << classes.size() << " classes\n";
  const size_t shown = std::min<size_t>(classes.size(), 12);
  for (size_t i = 0; i < shown; ++i) out << "  " << classes[i] << "\n";
  if (classes.size() > shown) out << "  ... (" << classes.size() - shown << " more)\n";
}

void print_budget_summary(std::ostream& out, const Json& budget) {
  out << "kept " << budget.at("kept_images").get<int64_t>() << " of "
      << budget.at("eligible_images").get<int64_t>() << " eligible images (budget "
      << budget.at("image_budget").get<int64_t>() << ")\n";
  out << "kept " << budget.at("kept_boxes").get<int64_t>() << " of "
      << budget.at("eligible_boxes").get<int64_t>() << " eligible boxes (budget "
      << budget.at("box_budget").get<int64_t>() << ")\n";
  if (budget.at("under_budget_images").get<bool>()) out << "note: image budget not reachable\n";
  if (budget.at("under_budget_boxes").get<bool>()) out << "note: box budget not reachable\n";
}

void print_relabel_summary(std::ostream& out, const Json& r) {
  out << "level " << r.at("level").get<int>() << ": " << r.at("class_count").get<int>()
      << " classes in use over " << r.at("box_count").get<int64_t>() << " boxes\n";
}

void print_split_summary(std::ostream& out, const Json& s) {
  out << "source classes: " << s.at("source_classes").size()
      << ", target classes: " << s.at("target_classes").size() << "\n";
  out << "source images: " << s.at("source_images").size()
      << ", target images: " << s.at("target_images").size() << "\n";
}

void print_sufficiency_summary(std::ostream& out, const Json& curve) {
  const Json& ks = curve.at("k_values");
  if (curve.at("has_baseline").get<bool>()) {
    out << "baseline:";
    for (const Json& k : ks) {
      const std::string key = std::to_string(k.get<int>());
      out << " AR@" << key << "=" << fixed4(curve.at("baseline_ar").at(key).get<double>());
    }
    out << "\n";
  }
  for (const Json& row : curve.at("rows")) {
    out << row.at("method").get<std::string>() << " P=" << row.at("p").get<int>() << ":";
    for (const Json& k : ks) {
      const std::string key = std::to_string(k.get<int>());
      out << " AR@" << key << "=" << fixed4(row.at("ar").at(key).get<double>());
    }
    out << "\n";
  }
}

void print_necessity_summary(std::ostream& out, const Json& res) {
  out << "mean relative AR change after removing the most similar class:\n";
  for (const Json& k : res.at("k_values")) {
    const std::string key = std::to_string(k.get<int>());
    out << "  @" << key << ": " << fixed4(res.at("mean_rel_change").at(key).get<double>())
        << "\n";
  }
  const Json& excluded = res.at("excluded_classes");
  out << "excluded classes (zero baseline recall): " << excluded.size() << "\n";
}

void print_pseudo_gt_summary(std::ostream& out, const Json& res) {
  out << "pseudo ground-truth entries: " << res.at("entries").size() << "\n";
  for (const Json& w : res.at("warnings")) out << "warning: " << w.get<std::string>() << "\n";
}

void print_validation_summary(std::ostream& out, const Json& rep) {
  if (rep.at("pass").get<bool>()) {
    out << "validation: pass\n";
    return;
  }
  for (const Json& v : rep.at("violations")) out << "violation: " << v.get<std::string>() << "\n";
}

void print_proposal_file_summary(std::ostream& out, const Json& proposals) {
  std::vector<int64_t> images;
  for (const Json& p : proposals) images.push_back(p.at("image_id").get<int64_t>());
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());
  out << "proposals: " << proposals.size() << " over " << images.size() << " images\n";
}

void print_world_summary(std::ostream& out, const Json& world) {
  const Json& blocks = world.at("blocks");
  int max_block = -1;
  for (const Json& b : blocks) max_block = std::max(max_block, b.get<int>());
  out << "world: " << world.at("classes").size() << " classes in " << (max_block + 1)
      << " blocks\n";
}

// Subcommand bodies. Each resolves flags over the config file, records inputs
// and outputs in the run directory, and prints a short deterministic summary.

int cmd_validate(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "hierarchy", opt.hierarchy);
  if (!cfg.contains("dataset") && !cfg.contains("hierarchy"))
    throw ConfigError("validate needs --dataset and/or --hierarchy");
  RunContext ctx = open_run("validate", opt.common, cfg);

  std::vector<std::string> violations;
  std::optional<Dataset> data;
  if (cfg.contains("dataset")) {
    const std::string path = require_string(cfg, "dataset", "validate");
    note_input(ctx, path);
    try {
      data = load_dataset(path);
    } catch (const ValidationError& e) {
      for (std::string& part : split_violation_message(e.what()))
        violations.push_back("dataset: " + part);
    }
  }
  std::optional<SemanticTree> tree;
  if (cfg.contains("hierarchy")) {
    tree = load_hierarchy_input(ctx, require_string(cfg, "hierarchy", "validate"));
    for (const std::string& v : validate_tree(*tree).violations)
      violations.push_back("hierarchy: " + v);
  }
  if (data.has_value() && tree.has_value())
    for (const ClassInfo& c : data->classes())
      if (tree->node_index(c.name) < 0)
        violations.push_back("link: dataset class '" + c.name + "' is not in the hierarchy");

  const Json report = validation_report_to_json(violations);
  write_result(ctx, "validation.json", canonical_dump(report));
  print_validation_summary(std::cout, report);
  finish_run(ctx);
  return violations.empty() ? kExitOk : kExitData;
}

int cmd_eval_ar(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "proposals", opt.proposals);
  apply_metric_flags(cfg, opt);
  const MetricConfig mc = metrics_from_cfg(cfg);
  RunContext ctx = open_run("eval-ar", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "eval-ar"));
  const ProposalSet props =
      load_proposals_input(ctx, require_string(cfg, "proposals", "eval-ar"));
  const ArTable table = average_recall(data, props.for_evaluation(), mc);
  const Json j = ar_table_to_json(table);
  write_result(ctx, "ar.json", canonical_dump(j));
  write_result(ctx, "ar.csv", ar_table_to_csv(table));
  print_ar_summary(std::cout, j);
  finish_run(ctx);
  return kExitOk;
}

int cmd_eval_ap(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "detections", opt.detections);
  apply_metric_flags(cfg, opt);
  const MetricConfig mc = metrics_from_cfg(cfg);
  RunContext ctx = open_run("eval-ap", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "eval-ap"));
  const std::vector<Detection> dets =
      load_detections_input(ctx, require_string(cfg, "detections", "eval-ap"), data);
  const ApTable table = compute_ap_table(data, dets, mc);
  const Json j = ap_table_to_json(table);
  write_result(ctx, "ap.json", canonical_dump(j));
  write_result(ctx, "ap.csv", ap_table_to_csv(table));
  print_ap_summary(std::cout, j);
  finish_run(ctx);
  return kExitOk;
}

int cmd_fuse(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "detections", opt.detections);
  apply_fusion_flags(cfg, opt);
  const FusionConfig fc = fusion_from_cfg(cfg);
  RunContext ctx = open_run("fuse", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "fuse"));
  const std::vector<Detection> dets =
      load_detections_input(ctx, require_string(cfg, "detections", "fuse"), data);
  const ProposalSet set = fuse_detections_to_proposals(data, dets, fc);
  const std::string text = proposals_to_json(set);
  write_result(ctx, "proposals.json", text);
  print_proposal_file_summary(std::cout, Json::parse(text));
  finish_run(ctx);
  return kExitOk;
}

int cmd_nms_sweep(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "detections", opt.detections);
  if (!opt.thresholds.empty()) cfg["thresholds"] = opt.thresholds;
  apply_fusion_flags(cfg, opt);
  apply_metric_flags(cfg, opt);
  const FusionConfig base = fusion_from_cfg(cfg);
  const MetricConfig mc = metrics_from_cfg(cfg);
  std::vector<double> thresholds = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  if (cfg.contains("thresholds")) {
    try {
      thresholds = cfg["thresholds"].get<std::vector<double>>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("thresholds: ") + e.what());
    }
  }
  RunContext ctx = open_run("nms-sweep", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "nms-sweep"));
  const std::vector<Detection> dets =
      load_detections_input(ctx, require_string(cfg, "detections", "nms-sweep"), data);

  Json sweep;
  sweep["thresholds"] = thresholds;
  Json rows = Json::array();
  std::ostringstream csv;
  csv.precision(17);
  bool header_done = false;
  for (const auto& [threshold, set] : nms_sweep(data, dets, thresholds, base)) {
    const ArTable table = average_recall(data, set.for_evaluation(), mc);
    if (!header_done) {
      sweep["k_values"] = table.ks;
      csv << "threshold,proposals";
      for (int k : table.ks) csv << ",ar@" << k;
      csv << "\n";
      header_done = true;
    }
    Json row{{"threshold", threshold}, {"proposals", set.total_count()}};
    csv << threshold << "," << set.total_count();
    for (size_t i = 0; i < table.ks.size(); ++i) {
      row["ar"][std::to_string(table.ks[i])] = table.ar[i];
      csv << "," << table.ar[i];
    }
    csv << "\n";
    rows.push_back(std::move(row));
  }
  sweep["rows"] = std::move(rows);
  write_result(ctx, "sweep.json", canonical_dump(sweep));
  write_result(ctx, "sweep.csv", csv.str());
  print_sweep_summary(std::cout, sweep);
  finish_run(ctx);
  return kExitOk;
}

int cmd_similarity(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "detections", opt.detections);
  apply_metric_flags(cfg, opt);
  const MetricConfig mc = metrics_from_cfg(cfg);
  RunContext ctx = open_run("similarity", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "similarity"));
  const std::vector<Detection> dets =
      load_detections_input(ctx, require_string(cfg, "detections", "similarity"), data);
  const ApTable table = compute_ap_table(data, dets, mc);
  const SimilarityMatrix sim = similarity_matrix(table);
  const Json j = similarity_to_json(sim);
  write_result(ctx, "ap.json", canonical_dump(ap_table_to_json(table)));
  write_result(ctx, "similarity.json", canonical_dump(j));
  write_result(ctx, "similarity.csv", similarity_to_csv(sim));
  print_similarity_summary(std::cout, j);
  finish_run(ctx);
  return kExitOk;
}

int cmd_select(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "method", opt.method);
  override_key(cfg, "p", opt.p);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "hierarchy", opt.hierarchy);
  override_key(cfg, "similarity", opt.similarity);
  override_key(cfg, "seed", opt.seed);
  const std::string method = require_string(cfg, "method", "select");
  const int p = require_int(cfg, "p", "select");
  RunContext ctx = open_run("select", opt.common, cfg);

  std::optional<Dataset> data;
  if (cfg.contains("dataset"))
    data = load_dataset_input(ctx, require_string(cfg, "dataset", "select"));

  ProtoSelection sel;
  if (method == "oracle-visual") {
    const SimilarityMatrix sim =
        load_similarity_input(ctx, require_string(cfg, "similarity", "oracle-visual selection"));
    const FrequencyMap freqs = data.has_value() ? dataset_frequencies(*data) : FrequencyMap{};
    sel = oracle_visual_clustering(sim, freqs, p);
  } else if (method == "semantic-frequency") {
    const SemanticTree tree = load_hierarchy_input(
        ctx, require_string(cfg, "hierarchy", "semantic-frequency selection"));
    if (!data.has_value())
      throw ConfigError("semantic-frequency selection requires 'dataset' for frequencies");
    sel = semantic_frequency_clustering(tree, class_frequencies(*data, tree), p);
  } else if (method == "most-frequent") {
    if (!data.has_value()) throw ConfigError("most-frequent selection requires 'dataset'");
    sel = most_frequent_subset(dataset_frequencies(*data), p);
  } else if (method == "random") {
    std::vector<std::string> universe;
    if (data.has_value()) {
      for (const ClassInfo& c : data->classes()) universe.push_back(c.name);
    } else if (cfg.contains("hierarchy")) {
      universe =
          load_hierarchy_input(ctx, require_string(cfg, "hierarchy", "select")).leaf_names();
    } else if (cfg.contains("similarity")) {
      universe = load_similarity_input(ctx, require_string(cfg, "similarity", "select")).classes;
    } else {
      throw ConfigError("random selection needs a class universe (dataset, hierarchy, or similarity)");
    }
    uint64_t seed = 0;
    try {
      seed = cfg.value("seed", seed);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("seed: ") + e.what());
    }
    sel = random_subset(universe, p, seed);
    ctx.seeds["selection"] = seed;
  } else {
    throw ConfigError("unknown selection method '" + method + "'");
  }

  const std::string text = selection_to_json(sel);
  write_result(ctx, "selection.json", text);
  print_selection_summary(std::cout, Json::parse(text));
  finish_run(ctx);
  return kExitOk;
}

int cmd_build_dataset(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "selection", opt.selection);
  if (!opt.classes.empty()) cfg["classes"] = opt.classes;
  override_key(cfg, "image_budget", opt.image_budget);
  override_key(cfg, "box_budget", opt.box_budget);
  override_key(cfg, "seed", opt.seed);
  BudgetConfig bc;
  try {
    if (!cfg.contains("image_budget") || !cfg.contains("box_budget"))
      throw ConfigError("build-dataset requires 'image_budget' and 'box_budget'");
    bc.image_budget = cfg["image_budget"].get<int64_t>();
    bc.box_budget = cfg["box_budget"].get<int64_t>();
    bc.seed = cfg.value("seed", bc.seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("budget config: ") + e.what());
  }
  bc.validate();
  RunContext ctx = open_run("build-dataset", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "build-dataset"));

  std::vector<std::string> selection;
  if (cfg.contains("selection"))
    selection = load_selection_input(ctx, require_string(cfg, "selection", "build-dataset")).classes;
  else if (cfg.contains("classes"))
    try {
      selection = cfg["classes"].get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("classes: ") + e.what());
    }
  else
    throw ConfigError("build-dataset requires 'selection' (file) or 'classes' (list)");

  const BudgetedDataset out = build_budgeted_dataset(data, selection, bc);
  ctx.seeds["budget"] = bc.seed;
  const Json budget = budget_report_to_json(out, bc);
  write_result(ctx, "dataset.json", dataset_to_json(out.dataset));
  write_result(ctx, "budget.json", canonical_dump(budget));
  print_budget_summary(std::cout, budget);
  finish_run(ctx);
  return kExitOk;
}

int cmd_relabel(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "hierarchy", opt.hierarchy);
  override_key(cfg, "level", opt.level);
  const int level = require_int(cfg, "level", "relabel");
  RunContext ctx = open_run("relabel", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "relabel"));
  const SemanticTree tree =
      load_hierarchy_input(ctx, require_string(cfg, "hierarchy", "relabel"));
  const RelabelResult result = relabel_to_level(data, tree, level);
  const Json summary{{"level", level},
                     {"class_count", result.class_count},
                     {"box_count", static_cast<int64_t>(result.dataset.annotations().size())},
                     {"image_count", static_cast<int64_t>(result.dataset.images().size())}};
  write_result(ctx, "dataset.json", dataset_to_json(result.dataset));
  write_result(ctx, "relabel.json", canonical_dump(summary));
  print_relabel_summary(std::cout, summary);
  finish_run(ctx);
  return kExitOk;
}

int cmd_split(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "hierarchy", opt.hierarchy);
  if (!opt.targets.empty()) cfg["targets"] = opt.targets;
  override_key(cfg, "num_targets", opt.num_targets);
  override_key(cfg, "seed", opt.seed);
  uint64_t seed = 0;
  try {
    seed = cfg.value("seed", seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("seed: ") + e.what());
  }
  RunContext ctx = open_run("split", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "split"));
  const SemanticTree tree = load_hierarchy_input(ctx, require_string(cfg, "hierarchy", "split"));

  std::vector<std::string> targets;
  if (cfg.contains("targets"))
    try {
      targets = cfg["targets"].get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("targets: ") + e.what());
    }
  else if (cfg.contains("num_targets"))
    targets = sample_target_classes(tree, require_int(cfg, "num_targets", "split"), seed);
  else
    throw ConfigError("split requires 'targets' (list) or 'num_targets'");

  const DatasetSplit split = build_source_target_split(data, tree, targets, seed);
  ctx.seeds["split"] = seed;
  const std::string text = split_to_json(split);
  write_result(ctx, "split.json", text);
  print_split_summary(std::cout, Json::parse(text));
  finish_run(ctx);
  return kExitOk;
}

int cmd_sufficiency(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "baseline", opt.baseline);
  apply_metric_flags(cfg, opt);
  const MetricConfig mc = metrics_from_cfg(cfg);
  if (!cfg.contains("conditions") || !cfg["conditions"].is_array() || cfg["conditions"].empty())
    throw ConfigError("sufficiency requires a config file with a non-empty 'conditions' list");
  RunContext ctx = open_run("sufficiency", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "sufficiency"));

  std::deque<ProposalSet> storage;
  std::vector<SufficiencyCondition> conditions;
  for (const Json& c : cfg["conditions"]) {
    SufficiencyCondition cond;
    try {
      cond.method = c.value("method", std::string("condition"));
      cond.p = c.value("p", 0);
      storage.push_back(load_proposals_input(ctx, c.at("proposals").get<std::string>()));
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("conditions: ") + e.what());
    }
    cond.proposals = &storage.back();
    conditions.push_back(std::move(cond));
  }
  const ProposalSet* baseline = nullptr;
  if (cfg.contains("baseline")) {
    storage.push_back(load_proposals_input(ctx, require_string(cfg, "baseline", "sufficiency")));
    baseline = &storage.back();
  }

  const SufficiencyCurve curve = sufficiency_eval(conditions, data, mc, baseline);
  const Json j = sufficiency_to_json(curve);
  write_result(ctx, "sufficiency.json", canonical_dump(j));
  write_result(ctx, "sufficiency.csv", sufficiency_to_csv(curve));
  print_sufficiency_summary(std::cout, j);
  finish_run(ctx);
  return kExitOk;
}

int cmd_necessity(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "dataset", opt.dataset);
  override_key(cfg, "proposals", opt.proposals);
  override_key(cfg, "similarity", opt.similarity);
  override_key(cfg, "selection", opt.selection);
  apply_metric_flags(cfg, opt);
  const MetricConfig mc = metrics_from_cfg(cfg);
  RunContext ctx = open_run("necessity", opt.common, cfg);
  const Dataset data = load_dataset_input(ctx, require_string(cfg, "dataset", "necessity"));
  const ProposalSet props =
      load_proposals_input(ctx, require_string(cfg, "proposals", "necessity"));
  const SimilarityMatrix sim =
      load_similarity_input(ctx, require_string(cfg, "similarity", "necessity"));
  const ProtoSelection sel =
      load_selection_input(ctx, require_string(cfg, "selection", "necessity"));
  const NecessityResult result = necessity_eval(props, data, sim, sel, mc);
  const Json j = necessity_to_json(result);
  write_result(ctx, "necessity.json", canonical_dump(j));
  write_result(ctx, "necessity.csv", necessity_to_csv(result));
  print_necessity_summary(std::cout, j);
  finish_run(ctx);
  return kExitOk;
}

int cmd_granularity(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "source", opt.source);
  override_key(cfg, "target", opt.target);
  override_key(cfg, "hierarchy", opt.hierarchy);
  apply_metric_flags(cfg, opt);
  const MetricConfig mc = metrics_from_cfg(cfg);
  if (!cfg.contains("levels") || !cfg["levels"].is_array() || cfg["levels"].empty())
    throw ConfigError("granularity requires a config file with a non-empty 'levels' list");
  RunContext ctx = open_run("granularity", opt.common, cfg);
  const Dataset source = load_dataset_input(ctx, require_string(cfg, "source", "granularity"));
  const Dataset target = load_dataset_input(ctx, require_string(cfg, "target", "granularity"));
  const SemanticTree tree =
      load_hierarchy_input(ctx, require_string(cfg, "hierarchy", "granularity"));

  std::vector<int> levels;
  std::map<int, ProposalSet> storage;
  for (const Json& entry : cfg["levels"]) {
    try {
      const int level = entry.at("level").get<int>();
      levels.push_back(level);
      if (entry.contains("proposals"))
        storage.emplace(level,
                        load_proposals_input(ctx, entry["proposals"].get<std::string>()));
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("levels: ") + e.what());
    }
  }
  std::map<int, const ProposalSet*> by_level;
  for (const auto& [level, set] : storage) by_level[level] = &set;

  const GranularityReport report = granularity_study(source, tree, levels, by_level, target, mc);
  const std::string markdown = granularity_to_markdown(report);
  write_result(ctx, "granularity.json", canonical_dump(granularity_to_json(report)));
  write_result(ctx, "granularity.csv", granularity_to_csv(report));
  write_result(ctx, "granularity.md", markdown);
  std::cout << markdown;
  finish_run(ctx);
  return kExitOk;
}

int cmd_pseudo_gt(const Options& opt) {
  Json cfg = base_config(opt.common);
  override_key(cfg, "proposals", opt.proposals);
  override_key(cfg, "labels", opt.labels);
  if (opt.pool.has_value()) cfg["weak"]["candidate_pool"] = *opt.pool;
  if (opt.positive_iou.has_value()) cfg["weak"]["positive_iou"] = *opt.positive_iou;
  if (opt.ignore_iou.has_value()) cfg["weak"]["ignore_iou_low"] = *opt.ignore_iou;
  WeakLabelConfig wc;
  {
    const Json j = cfg.value("weak", Json::object());
    try {
      wc.candidate_pool = j.value("candidate_pool", wc.candidate_pool);
      wc.positive_iou = j.value("positive_iou", wc.positive_iou);
      wc.ignore_iou_low = j.value("ignore_iou_low", wc.ignore_iou_low);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("weak label config: ") + e.what());
    }
  }
  wc.validate();
  RunContext ctx = open_run("pseudo-gt", opt.common, cfg);
  const ProposalSet props =
      load_proposals_input(ctx, require_string(cfg, "proposals", "pseudo-gt"));

  const std::string labels_path = require_string(cfg, "labels", "pseudo-gt");
  note_input(ctx, labels_path);
  const Json labels_json = parse_json_file(labels_path, "weak label file");
  if (!labels_json.is_array())
    throw ParseError("weak label file must hold a list: " + labels_path);
  std::map<int64_t, std::vector<std::string>> weak;
  for (const Json& entry : labels_json) {
    try {
      auto& slot = weak[entry.at("image_id").get<int64_t>()];
      for (const Json& c : entry.at("classes")) slot.push_back(c.get<std::string>());
    } catch (const Json::exception& e) {
      throw ParseError(std::string("weak label file: ") + e.what());
    }
  }

  const PseudoGtResult result = pseudo_ground_truth(props, weak, wc);
  const Json j = pseudo_gt_to_json(result, props);
  write_result(ctx, "pseudo_gt.json", canonical_dump(j));
  print_pseudo_gt_summary(std::cout, j);
  finish_run(ctx);
  return kExitOk;
}

int cmd_simulate(const Options& opt) {
  Json cfg = base_config(opt.common);
  if (opt.seed.has_value()) cfg["world"]["seed"] = *opt.seed;
  if (opt.images.has_value()) cfg["world"]["num_images"] = *opt.images;
  if (opt.placement.has_value()) cfg["world"]["placement"] = *opt.placement;
  if (!opt.train.empty()) cfg["detector"]["training_classes"] = opt.train;
  const SimConfig sc = sim_from_cfg(cfg);
  RunContext ctx = open_run("simulate", opt.common, cfg);
  const SimWorld world = generate_world(sc);
  ctx.seeds["world"] = sc.seed;

  const Json world_json{{"classes", world.class_names}, {"blocks", world.block_of}};
  write_result(ctx, "hierarchy.json", hierarchy_to_json(world.tree));
  write_result(ctx, "dataset.json", dataset_to_json(world.dataset));
  write_result(ctx, "world.json", canonical_dump(world_json));
  print_world_summary(std::cout, world_json);
  std::cout << "images: " << world.dataset.images().size()
            << ", boxes: " << world.dataset.annotations().size() << "\n";

  if (cfg.contains("detector")) {
    const DetectorModelConfig dm = detector_from_cfg(cfg);
    const std::vector<Detection> dets = simulate_detections(world, dm);
    write_result(ctx, "detections.json", detections_to_json(dets, world.dataset));
    std::cout << "detections: " << dets.size() << "\n";
  }
  finish_run(ctx);
  return kExitOk;
}

int cmd_report(const Options& opt) {
  const fs::path dir(opt.run_dir);
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw ValidationError("no manifest.json under " + dir.string());
  const Json manifest = parse_json_file(manifest_path.string(), "manifest");

  std::ostringstream out;
  try {
    out << "subcommand: " << manifest.at("subcommand").get<std::string>() << "\n";
    out << "tool: " << manifest.at("tool").get<std::string>() << " "
        << manifest.at("version").get<std::string>() << "\n";
    out << "config hash: " << manifest.at("config_hash").get<std::string>() << "\n";
    if (!manifest.at("inputs").empty()) {
      out << "inputs:\n";
      for (const auto& [path, hash] : manifest.at("inputs").items())
        out << "  " << path << " (" << hash.get<std::string>() << ")\n";
    }
    if (!manifest.at("outputs").empty()) {
      out << "outputs:\n";
      for (const Json& name : manifest.at("outputs")) out << "  " << name.get<std::string>() << "\n";
    }
    std::cout << out.str();

    const auto read_json = [&dir](const char* name) {
      return parse_json_file((dir / name).string(), name);
    };
    const std::string sub = manifest.at("subcommand").get<std::string>();
    if (sub == "validate") print_validation_summary(std::cout, read_json("validation.json"));
    if (sub == "eval-ar") print_ar_summary(std::cout, read_json("ar.json"));
    if (sub == "eval-ap") print_ap_summary(std::cout, read_json("ap.json"));
    if (sub == "fuse") print_proposal_file_summary(std::cout, read_json("proposals.json"));
    if (sub == "nms-sweep") print_sweep_summary(std::cout, read_json("sweep.json"));
    if (sub == "similarity") print_similarity_summary(std::cout, read_json("similarity.json"));
    if (sub == "select") print_selection_summary(std::cout, read_json("selection.json"));
    if (sub == "build-dataset") print_budget_summary(std::cout, read_json("budget.json"));
    if (sub == "relabel") print_relabel_summary(std::cout, read_json("relabel.json"));
    if (sub == "split") print_split_summary(std::cout, read_json("split.json"));
    if (sub == "sufficiency") print_sufficiency_summary(std::cout, read_json("sufficiency.json"));
    if (sub == "necessity") print_necessity_summary(std::cout, read_json("necessity.json"));
    if (sub == "granularity") std::cout << read_text_file((dir / "granularity.md").string());
    if (sub == "pseudo-gt") print_pseudo_gt_summary(std::cout, read_json("pseudo_gt.json"));
    if (sub == "simulate") print_world_summary(std::cout, read_json("world.json"));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("report: malformed result file: ") + e.what());
  }
  return kExitOk;
}

void add_common(CLI::App* sub, CommonArgs& common) {
  sub->add_option("-c,--config", common.config_path, "JSON config file; flags override its keys");
  sub->add_option("--run-root", common.run_root,
                  "output root (default $PROPGEN_RUN_ROOT, then ./runs)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"proposal generalization analysis toolkit"};
  app.set_version_flag("--version", std::string("propgen ") + kVersion);
  app.require_subcommand(1);
  auto opt = std::make_shared<Options>();
  std::function<int(const Options&)> action;

  const auto bind = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&action, fn] { action = fn; });
    add_common(sub, opt->common);
    return sub;
  };

  CLI::App* sub = bind("validate", "check dataset and hierarchy invariants", cmd_validate);
  sub->add_option("--dataset", opt->dataset, "ground-truth dataset JSON");
  sub->add_option("--hierarchy", opt->hierarchy, "class hierarchy JSON");

  sub = bind("eval-ar", "average recall of proposals against ground truth", cmd_eval_ar);
  sub->add_option("--dataset", opt->dataset, "ground-truth dataset JSON");
  sub->add_option("--proposals", opt->proposals, "proposal JSON");
  sub->add_option("--max-dets", opt->max_dets, "per-image/per-class AP cap");
  sub->add_option("--k", opt->ks, "proposal budgets, comma separated")->delimiter(',');

  sub = bind("eval-ap", "cross-class AP table of detections", cmd_eval_ap);
  sub->add_option("--dataset", opt->dataset, "ground-truth dataset JSON");
  sub->add_option("--detections", opt->detections, "detection JSON");
  sub->add_option("--max-dets", opt->max_dets, "per-image/per-class AP cap");

  sub = bind("fuse", "fuse detections into class-agnostic proposals", cmd_fuse);
  sub->add_option("--dataset", opt->dataset, "dataset JSON supplying the class table");
  sub->add_option("--detections", opt->detections, "detection JSON");
  sub->add_option("--nms", opt->nms_t, "NMS IoU threshold");
  sub->add_option("--score-thresh", opt->score_t, "minimum detection score");
  sub->add_option("--cap", opt->cap, "per-image proposal cap");
  sub->add_option("--mode", opt->mode, "per-class or cross-class");

  sub = bind("nms-sweep", "AR across a grid of NMS thresholds", cmd_nms_sweep);
  sub->add_option("--dataset", opt->dataset, "ground-truth dataset JSON");
  sub->add_option("--detections", opt->detections, "detection JSON");
  sub->add_option("--thresholds", opt->thresholds, "NMS thresholds, comma separated")
      ->delimiter(',');
  sub->add_option("--score-thresh", opt->score_t, "minimum detection score");
  sub->add_option("--cap", opt->cap, "per-image proposal cap");
  sub->add_option("--mode", opt->mode, "per-class or cross-class");
  sub->add_option("--k", opt->ks, "proposal budgets, comma separated")->delimiter(',');

  sub = bind("similarity", "class replaceability from cross-class AP ratios", cmd_similarity);
  sub->add_option("--dataset", opt->dataset, "ground-truth dataset JSON");
  sub->add_option("--detections", opt->detections, "detection JSON");
  sub->add_option("--max-dets", opt->max_dets, "per-image/per-class AP cap");

  sub = bind("select", "prototypical class selection", cmd_select);
  sub->add_option("--method", opt->method,
                  "oracle-visual, semantic-frequency, most-frequent, or random");
  sub->add_option("--p", opt->p, "number of classes to keep");
  sub->add_option("--dataset", opt->dataset, "dataset JSON for class frequencies");
  sub->add_option("--hierarchy", opt->hierarchy, "class hierarchy JSON");
  sub->add_option("--similarity", opt->similarity, "similarity matrix JSON");
  sub->add_option("--seed", opt->seed, "seed for the random method");

  sub = bind("build-dataset", "budgeted training set from a class selection", cmd_build_dataset);
  sub->add_option("--dataset", opt->dataset, "source dataset JSON");
  sub->add_option("--selection", opt->selection, "selection JSON from `select`");
  sub->add_option("--classes", opt->classes, "class names, comma separated")->delimiter(',');
  sub->add_option("--image-budget", opt->image_budget, "images to keep");
  sub->add_option("--box-budget", opt->box_budget, "boxes to keep");
  sub->add_option("--seed", opt->seed, "subsampling seed");

  sub = bind("relabel", "move labels to one hierarchy level", cmd_relabel);
  sub->add_option("--dataset", opt->dataset, "dataset JSON");
  sub->add_option("--hierarchy", opt->hierarchy, "class hierarchy JSON");
  sub->add_option("--level", opt->level, "target level (0 = root)");

  sub = bind("split", "source/target class and image split", cmd_split);
  sub->add_option("--dataset", opt->dataset, "dataset JSON");
  sub->add_option("--hierarchy", opt->hierarchy, "class hierarchy JSON");
  sub->add_option("--targets", opt->targets, "target leaf classes, comma separated")
      ->delimiter(',');
  sub->add_option("--num-targets", opt->num_targets, "sample this many target leaves");
  sub->add_option("--seed", opt->seed, "sampling seed");

  sub = bind("sufficiency", "AR of selection-restricted proposals on target data",
             cmd_sufficiency);
  sub->add_option("--dataset", opt->dataset, "target ground-truth dataset JSON");
  sub->add_option("--baseline", opt->baseline, "all-classes proposal JSON");

  sub = bind("necessity", "AR change when the most similar class is removed", cmd_necessity);
  sub->add_option("--dataset", opt->dataset, "target ground-truth dataset JSON");
  sub->add_option("--proposals", opt->proposals, "proposal JSON with source provenance");
  sub->add_option("--similarity", opt->similarity, "similarity matrix JSON");
  sub->add_option("--selection", opt->selection, "selection JSON from `select`");

  sub = bind("granularity", "AR and class counts across label granularities", cmd_granularity);
  sub->add_option("--source", opt->source, "source dataset JSON (leaf labels)");
  sub->add_option("--target", opt->target, "target ground-truth dataset JSON");
  sub->add_option("--hierarchy", opt->hierarchy, "class hierarchy JSON");

  sub = bind("pseudo-gt", "pseudo ground truth from weak image labels", cmd_pseudo_gt);
  sub->add_option("--proposals", opt->proposals, "proposal JSON");
  sub->add_option("--labels", opt->labels, "weak label JSON: [{image_id, classes}]");
  sub->add_option("--pool", opt->pool, "anchor candidate pool size");
  sub->add_option("--positive-iou", opt->positive_iou, "positive threshold");
  sub->add_option("--ignore-iou", opt->ignore_iou, "lower ignore threshold");

  sub = bind("simulate", "synthetic world and detector stand-in", cmd_simulate);
  sub->add_option("--seed", opt->seed, "world seed");
  sub->add_option("--images", opt->images, "number of images");
  sub->add_option("--placement", opt->placement, "uniform or clustered");
  sub->add_option("--train", opt->train, "detector training classes, comma separated")
      ->delimiter(',');

  sub = bind("report", "render the results of a finished run", cmd_report);
  sub->add_option("run", opt->run_dir, "run directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    return action(*opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace propgen
