#include "propgen/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "propgen/errors.hpp"

namespace propgen {

using Json = nlohmann::json;

const std::vector<int> Dataset::kNoAnnotations{};

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream out;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) out << "; ";
    out << issues[i];
  }
  return out.str();
}

}  // namespace

Dataset::Dataset(std::vector<ImageRecord> images, std::vector<ClassInfo> classes,
                 std::vector<Annotation> annotations)
    : images_(std::move(images)), classes_(std::move(classes)), annotations_(std::move(annotations)) {
  std::vector<std::string> issues;

  std::sort(images_.begin(), images_.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
  for (size_t i = 0; i < images_.size(); ++i) {
    const ImageRecord& im = images_[i];
    if (im.width <= 0 || im.height <= 0)
      issues.push_back("image " + std::to_string(im.id) + " has non-positive extent");
    if (!image_by_id_.emplace(im.id, static_cast<int>(i)).second)
      issues.push_back("duplicate image id " + std::to_string(im.id));
  }

  if (!std::is_sorted(classes_.begin(), classes_.end(),
                      [](const ClassInfo& a, const ClassInfo& b) { return a.name < b.name; }))
    issues.push_back("class table is not sorted by name");
  std::set<int64_t> coco_ids;
  for (size_t i = 0; i < classes_.size(); ++i) {
    if (!class_by_name_.emplace(classes_[i].name, static_cast<int>(i)).second)
      issues.push_back("duplicate class name '" + classes_[i].name + "'");
    if (!coco_ids.insert(classes_[i].coco_id).second)
      issues.push_back("duplicate category id " + std::to_string(classes_[i].coco_id));
  }

  std::set<int64_t> ann_ids;
  for (size_t i = 0; i < annotations_.size(); ++i) {
    const Annotation& a = annotations_[i];
    if (!ann_ids.insert(a.id).second)
      issues.push_back("duplicate annotation id " + std::to_string(a.id));
    if (a.class_idx < 0 || a.class_idx >= static_cast<int>(classes_.size()))
      issues.push_back("annotation index " + std::to_string(i) + " references unknown class");
    if (!image_by_id_.count(a.image_id))
      issues.push_back("annotation index " + std::to_string(i) + " references missing image " +
                       std::to_string(a.image_id));
    if (!a.box.valid())
      issues.push_back("degenerate box at index " + std::to_string(i));
  }

  if (!issues.empty()) throw ValidationError(join_issues(issues));

  for (size_t i = 0; i < annotations_.size(); ++i)
    annotations_by_image_[annotations_[i].image_id].push_back(static_cast<int>(i));
}

int Dataset::class_index(const std::string& name) const {
  auto it = class_by_name_.find(name);
  return it == class_by_name_.end() ? -1 : it->second;
}

const ImageRecord& Dataset::image(int64_t id) const {
  auto it = image_by_id_.find(id);
  if (it == image_by_id_.end())
    throw ValidationError("unknown image id " + std::to_string(id));
  return images_[it->second];
}

std::vector<int64_t> Dataset::image_ids() const {
  std::vector<int64_t> ids;
  ids.reserve(images_.size());
  for (const ImageRecord& im : images_) ids.push_back(im.id);
  return ids;
}

const std::vector<int>& Dataset::annotations_of(int64_t image_id) const {
  auto it = annotations_by_image_.find(image_id);
  return it == annotations_by_image_.end() ? kNoAnnotations : it->second;
}

std::map<std::string, int64_t> Dataset::annotation_counts() const {
  std::map<std::string, int64_t> counts;
  for (const Annotation& a : annotations_) ++counts[classes_[a.class_idx].name];
  return counts;
}

namespace {

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

double require_number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ParseError(where + ": missing or non-numeric '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

Dataset dataset_from_json(const std::string& text) {
  const Json j = parse_json_text(text);
  if (!j.is_object() || !j.contains("images") || !j.contains("annotations") ||
      !j.contains("categories"))
    throw ParseError("dataset file must be an object with images, annotations and categories");

  std::vector<ImageRecord> images;
  for (const Json& im : j["images"]) {
    ImageRecord rec;
    rec.id = static_cast<int64_t>(require_number(im, "id", "image"));
    rec.width = static_cast<int>(require_number(im, "width", "image"));
    rec.height = static_cast<int>(require_number(im, "height", "image"));
    images.push_back(rec);
  }

  std::vector<ClassInfo> classes;
  for (const Json& cat : j["categories"]) {
    ClassInfo info;
    info.coco_id = static_cast<int64_t>(require_number(cat, "id", "category"));
    if (!cat.contains("name") || !cat["name"].is_string())
      throw ParseError("category " + std::to_string(info.coco_id) + " has no name");
    info.name = cat["name"].get<std::string>();
    classes.push_back(info);
  }
  std::sort(classes.begin(), classes.end(),
            [](const ClassInfo& a, const ClassInfo& b) { return a.name < b.name; });
  std::map<int64_t, int> by_coco;
  for (size_t i = 0; i < classes.size(); ++i) by_coco[classes[i].coco_id] = static_cast<int>(i);

  std::vector<Annotation> annotations;
  std::vector<std::string> issues;
  const Json& anns = j["annotations"];
  for (size_t i = 0; i < anns.size(); ++i) {
    const Json& an = anns[i];
    Annotation a;
    a.id = static_cast<int64_t>(require_number(an, "id", "annotation"));
    a.image_id = static_cast<int64_t>(require_number(an, "image_id", "annotation"));
    const int64_t cat = static_cast<int64_t>(require_number(an, "category_id", "annotation"));
    auto it = by_coco.find(cat);
    if (it == by_coco.end()) {
      issues.push_back("unknown category_id " + std::to_string(cat) + " at annotation index " +
                       std::to_string(i));
      a.class_idx = -1;
    } else {
      a.class_idx = it->second;
    }
    if (!an.contains("bbox") || !an["bbox"].is_array() || an["bbox"].size() != 4)
      throw ParseError("annotation index " + std::to_string(i) + " has no 4-element bbox");
    const Json& bb = an["bbox"];
    a.box = box_from_xywh(bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                          bb[3].get<double>());
    if (!a.box.valid()) issues.push_back("degenerate box at index " + std::to_string(i));
    annotations.push_back(a);
  }
  if (!issues.empty()) throw ValidationError(join_issues(issues));

  return Dataset(std::move(images), std::move(classes), std::move(annotations));
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return dataset_from_json(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string dataset_to_json(const Dataset& data) {
  Json j;
  j["images"] = Json::array();
  for (const ImageRecord& im : data.images())
    j["images"].push_back(Json{{"id", im.id}, {"width", im.width}, {"height", im.height}});

  std::vector<ClassInfo> cats = data.classes();
  std::sort(cats.begin(), cats.end(),
            [](const ClassInfo& a, const ClassInfo& b) { return a.coco_id < b.coco_id; });
  j["categories"] = Json::array();
  for (const ClassInfo& c : cats)
    j["categories"].push_back(Json{{"id", c.coco_id}, {"name", c.name}});

  std::vector<Annotation> anns = data.annotations();
  std::sort(anns.begin(), anns.end(),
            [](const Annotation& a, const Annotation& b) { return a.id < b.id; });
  j["annotations"] = Json::array();
  for (const Annotation& a : anns) {
    const auto bb = box_to_xywh(a.box);
    j["annotations"].push_back(Json{{"id", a.id},
                                    {"image_id", a.image_id},
                                    {"category_id", data.classes()[a.class_idx].coco_id},
                                    {"bbox", Json::array({bb[0], bb[1], bb[2], bb[3]})}});
  }
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write dataset file: " + path);
  out << dataset_to_json(data);
}

Dataset subset_by_images(const Dataset& data, const std::vector<int64_t>& image_ids) {
  std::set<int64_t> wanted;
  for (int64_t id : image_ids) {
    if (!data.has_image(id))
      throw ValidationError("subset references unknown image id " + std::to_string(id));
    wanted.insert(id);
  }
  std::vector<ImageRecord> images;
  for (const ImageRecord& im : data.images())
    if (wanted.count(im.id)) images.push_back(im);
  std::vector<Annotation> anns;
  for (const Annotation& a : data.annotations())
    if (wanted.count(a.image_id)) anns.push_back(a);
  return Dataset(std::move(images), data.classes(), std::move(anns));
}

}  // namespace propgen
