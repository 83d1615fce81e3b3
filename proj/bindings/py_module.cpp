// Python bindings for the core pipeline: geometry, datasets, the evaluation
// metrics, fusion, similarity, selection, budgeted construction, relabeling,
// and the synthetic world. File formats and the CLI stay on the C++ side;
// here a box is a Box object and per-image proposals are plain dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "propgen/clustering.hpp"
#include "propgen/dataset.hpp"
#include "propgen/errors.hpp"
#include "propgen/fusion.hpp"
#include "propgen/geometry.hpp"
#include "propgen/metrics.hpp"
#include "propgen/selection.hpp"
#include "propgen/similarity.hpp"
#include "propgen/simulator.hpp"
#include "propgen/study.hpp"
#include "propgen/tree.hpp"

namespace py = pybind11;
using namespace propgen;

PYBIND11_MODULE(_core, m) {
  m.doc() = "object proposal generalization toolkit";

  py::class_<Box>(m, "Box")
      .def(py::init<>())
      .def(py::init([](double x1, double y1, double x2, double y2) {
             return Box{x1, y1, x2, y2};
           }),
           py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"))
      .def_readwrite("x1", &Box::x1)
      .def_readwrite("y1", &Box::y1)
      .def_readwrite("x2", &Box::x2)
      .def_readwrite("y2", &Box::y2)
      .def("width", &Box::width)
      .def("height", &Box::height)
      .def("area", &Box::area)
      .def("valid", &Box::valid)
      .def("__repr__", [](const Box& b) {
        return "Box(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " +
               std::to_string(b.x2) + ", " + std::to_string(b.y2) + ")";
      });
  m.def("box_from_xywh", &box_from_xywh, py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"));
  m.def("iou", &iou, py::arg("a"), py::arg("b"), "intersection over union, 0 for disjoint boxes");

  py::class_<ScoredBox>(m, "ScoredBox")
      .def(py::init([](const Box& b, double score) { return ScoredBox{b, score}; }),
           py::arg("box"), py::arg("score"))
      .def(py::init([](double x1, double y1, double x2, double y2, double score) {
             return ScoredBox{Box{x1, y1, x2, y2}, score};
           }),
           py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"), py::arg("score"))
      .def_readwrite("box", &ScoredBox::box)
      .def_readwrite("score", &ScoredBox::score);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](int64_t image_id, const Box& b, double score, int class_idx) {
             return Detection{image_id, class_idx, b, score};
           }),
           py::arg("image_id"), py::arg("box"), py::arg("score"), py::arg("class_idx") = -1)
      .def_readwrite("image_id", &Detection::image_id)
      .def_readwrite("class_idx", &Detection::class_idx)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score);

  py::class_<GtInstance>(m, "GtInstance")
      .def(py::init([](int64_t image_id, const Box& b) { return GtInstance{image_id, b}; }),
           py::arg("image_id"), py::arg("box"))
      .def_readwrite("image_id", &GtInstance::image_id)
      .def_readwrite("box", &GtInstance::box);

  py::class_<Dataset>(m, "Dataset")
      .def_static("from_json", &dataset_from_json, py::arg("text"))
      .def_static("load", &load_dataset, py::arg("path"))
      .def("to_json", &dataset_to_json)
      .def_property_readonly("num_images",
                             [](const Dataset& d) { return d.images().size(); })
      .def_property_readonly("num_annotations",
                             [](const Dataset& d) { return d.annotations().size(); })
      .def_property_readonly("class_names",
                             [](const Dataset& d) {
                               std::vector<std::string> out;
                               for (const ClassInfo& c : d.classes()) out.push_back(c.name);
                               return out;
                             })
      .def("image_ids", &Dataset::image_ids)
      .def("annotation_counts", &Dataset::annotation_counts)
      .def("class_index", &Dataset::class_index, py::arg("name"));

  py::class_<MetricConfig>(m, "MetricConfig")
      .def(py::init<>())
      .def_readwrite("iou_thresholds", &MetricConfig::iou_thresholds)
      .def_readwrite("max_detections_per_image", &MetricConfig::max_detections_per_image)
      .def_readwrite("ar_k_values", &MetricConfig::ar_k_values);

  m.def("average_precision", &average_precision, py::arg("gts"), py::arg("detections"),
        py::arg("config") = MetricConfig{},
        "detection AP for one class; None without ground truth");

  py::class_<ArTable>(m, "ArTable")
      .def_readonly("ks", &ArTable::ks)
      .def_readonly("thresholds", &ArTable::thresholds)
      .def_readonly("ar", &ArTable::ar)
      .def_readonly("total_gt", &ArTable::total_gt)
      .def_readonly("class_names", &ArTable::class_names)
      .def_readonly("class_mean_ar", &ArTable::class_mean_ar)
      .def("ar_at", &ArTable::ar_at, py::arg("k"));
  m.def("average_recall", &average_recall, py::arg("gt"), py::arg("proposals"),
        py::arg("config") = MetricConfig{},
        "AR@k of per-image scored boxes against a ground-truth dataset");

  py::class_<ApTable>(m, "ApTable")
      .def_readonly("classes", &ApTable::classes)
      .def("size", &ApTable::size)
      .def("at", &ApTable::at, py::arg("det_class"), py::arg("gt_class"));
  m.def("compute_ap_table", &compute_ap_table, py::arg("gt"), py::arg("detections"),
        py::arg("config") = MetricConfig{},
        "cross-class AP table: detections of class i against ground truth of class j");

  py::enum_<NmsMode>(m, "NmsMode")
      .value("per_class", NmsMode::kPerClass)
      .value("cross_class", NmsMode::kCrossClass);

  py::class_<FusionConfig>(m, "FusionConfig")
      .def(py::init<>())
      .def_readwrite("nms_threshold", &FusionConfig::nms_threshold)
      .def_readwrite("score_threshold", &FusionConfig::score_threshold)
      .def_readwrite("per_image_cap", &FusionConfig::per_image_cap)
      .def_readwrite("mode", &FusionConfig::mode);

  m.def("nms", &nms, py::arg("boxes"), py::arg("threshold"),
        "greedy NMS; kept input indices in descending score order");

  py::class_<Proposal>(m, "Proposal")
      .def_readonly("box", &Proposal::box)
      .def_readonly("score", &Proposal::score)
      .def_readonly("source", &Proposal::source);

  py::class_<ProposalSet>(m, "ProposalSet")
      .def_static("from_json", &proposals_from_json, py::arg("text"))
      .def_static("load", &load_proposals, py::arg("path"))
      .def("to_json", &proposals_to_json)
      .def("total_count", &ProposalSet::total_count)
      .def_property_readonly("source_classes", &ProposalSet::source_classes)
      .def("for_evaluation", &ProposalSet::for_evaluation,
           "per-image scored boxes, ready for average_recall")
      .def("image_ids", [](const ProposalSet& s) {
        std::vector<int64_t> out;
        for (const auto& [id, list] : s.images()) out.push_back(id);
        return out;
      });
  m.def("fuse_detections_to_proposals", &fuse_detections_to_proposals, py::arg("classes_from"),
        py::arg("detections"), py::arg("config") = FusionConfig{},
        "score filter, NMS, pool, sort, cap: detections become class-agnostic proposals");
  m.def("remove_by_source", &remove_by_source, py::arg("proposals"), py::arg("source_class"));

  py::class_<SimilarityMatrix>(m, "SimilarityMatrix")
      .def_readonly("classes", &SimilarityMatrix::classes)
      .def("size", &SimilarityMatrix::size)
      .def("at", &SimilarityMatrix::at, py::arg("i"), py::arg("j"))
      .def("raw_at", &SimilarityMatrix::raw_at, py::arg("i"), py::arg("j"))
      .def("defined_at", &SimilarityMatrix::defined_at, py::arg("i"), py::arg("j"))
      .def("class_index", &SimilarityMatrix::class_index, py::arg("name"));
  m.def("similarity_matrix", &similarity_matrix, py::arg("ap_table"),
        "symmetric replaceability similarity from a cross-class AP table");

  py::class_<ProtoSelection>(m, "ProtoSelection")
      .def_readonly("method", &ProtoSelection::method)
      .def_readonly("p", &ProtoSelection::p)
      .def_readonly("seed", &ProtoSelection::seed)
      .def_readonly("classes", &ProtoSelection::classes)
      .def_readonly("clusters", &ProtoSelection::clusters);
  m.def("oracle_visual_clustering", &oracle_visual_clustering, py::arg("similarity"),
        py::arg("frequencies"), py::arg("p"));
  m.def("semantic_frequency_clustering", &semantic_frequency_clustering, py::arg("tree"),
        py::arg("frequencies"), py::arg("p"));
  m.def("most_frequent_subset", &most_frequent_subset, py::arg("frequencies"), py::arg("p"));
  m.def("random_subset", &random_subset, py::arg("classes"), py::arg("p"), py::arg("seed"));
  m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("a"), py::arg("b"));

  py::class_<SemanticTree>(m, "SemanticTree")
      .def_static("from_json", &hierarchy_from_json, py::arg("text"))
      .def_static("load", &load_hierarchy, py::arg("path"))
      .def("to_json", &hierarchy_to_json);
  py::class_<RelabelResult>(m, "RelabelResult")
      .def_readonly("dataset", &RelabelResult::dataset)
      .def_readonly("class_count", &RelabelResult::class_count);
  m.def("relabel_to_level", &relabel_to_level, py::arg("dataset"), py::arg("tree"),
        py::arg("level"), "rewrite every box label to its depth-level ancestor");
  m.def("class_frequencies", &class_frequencies, py::arg("dataset"), py::arg("tree"));

  py::class_<BudgetConfig>(m, "BudgetConfig")
      .def(py::init([](int64_t image_budget, int64_t box_budget, uint64_t seed) {
             return BudgetConfig{image_budget, box_budget, seed};
           }),
           py::arg("image_budget"), py::arg("box_budget"), py::arg("seed") = 0)
      .def_readwrite("image_budget", &BudgetConfig::image_budget)
      .def_readwrite("box_budget", &BudgetConfig::box_budget)
      .def_readwrite("seed", &BudgetConfig::seed);
  py::class_<BudgetedDataset>(m, "BudgetedDataset")
      .def_readonly("dataset", &BudgetedDataset::dataset)
      .def_readonly("eligible_images", &BudgetedDataset::eligible_images)
      .def_readonly("eligible_boxes", &BudgetedDataset::eligible_boxes)
      .def_readonly("under_budget_images", &BudgetedDataset::under_budget_images)
      .def_readonly("under_budget_boxes", &BudgetedDataset::under_budget_boxes);
  m.def("build_budgeted_dataset", &build_budgeted_dataset, py::arg("dataset"),
        py::arg("selection"), py::arg("config"),
        "keep selected-class boxes under exact image and box budgets");

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("num_blocks", &SimConfig::num_blocks)
      .def_readwrite("leaves_per_block", &SimConfig::leaves_per_block)
      .def_readwrite("num_images", &SimConfig::num_images)
      .def_readwrite("min_boxes_per_image", &SimConfig::min_boxes_per_image)
      .def_readwrite("max_boxes_per_image", &SimConfig::max_boxes_per_image)
      .def_readwrite("image_width", &SimConfig::image_width)
      .def_readwrite("image_height", &SimConfig::image_height)
      .def_readwrite("embed_dim", &SimConfig::embed_dim)
      .def_readwrite("within_block_noise", &SimConfig::within_block_noise)
      .def_readwrite("box_min_frac", &SimConfig::box_min_frac)
      .def_readwrite("box_max_frac", &SimConfig::box_max_frac)
      .def_readwrite("placement", &SimConfig::placement)
      .def_readwrite("cluster_centers", &SimConfig::cluster_centers)
      .def_readwrite("cluster_spread", &SimConfig::cluster_spread)
      .def_readwrite("class_weight_decay", &SimConfig::class_weight_decay)
      .def_readwrite("seed", &SimConfig::seed);
  py::class_<DetectorModelConfig>(m, "DetectorModelConfig")
      .def(py::init<>())
      .def_readwrite("training_classes", &DetectorModelConfig::training_classes)
      .def_readwrite("jitter_scale", &DetectorModelConfig::jitter_scale)
      .def_readwrite("miss_base", &DetectorModelConfig::miss_base)
      .def_readwrite("label_noise", &DetectorModelConfig::label_noise)
      .def_readwrite("score_noise", &DetectorModelConfig::score_noise)
      .def_readwrite("fp_rate", &DetectorModelConfig::fp_rate)
      .def_readwrite("fp_score_max", &DetectorModelConfig::fp_score_max)
      .def_readwrite("emit_per_class", &DetectorModelConfig::emit_per_class)
      .def_readwrite("emit_min_kappa", &DetectorModelConfig::emit_min_kappa);
  py::class_<SimWorld>(m, "SimWorld")
      .def_readonly("config", &SimWorld::config)
      .def_readonly("tree", &SimWorld::tree)
      .def_readonly("dataset", &SimWorld::dataset)
      .def_readonly("class_names", &SimWorld::class_names)
      .def_readonly("block_of", &SimWorld::block_of);
  m.def("generate_world", &generate_world, py::arg("config"));
  m.def("simulate_detections", &simulate_detections, py::arg("world"), py::arg("model"),
        "deterministic detector stand-in driven by class-kernel similarity");

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
}
