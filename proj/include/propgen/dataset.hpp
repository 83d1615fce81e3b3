#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "propgen/geometry.hpp"

namespace propgen {

struct ImageRecord {
  int64_t id = 0;
  int width = 0;
  int height = 0;
};

struct ClassInfo {
  int64_t coco_id = 0;   // numeric category id used in files
  std::string name;      // canonical identifier everywhere else
};

struct Annotation {
  int64_t id = 0;
  int64_t image_id = 0;
  int class_idx = -1;  // index into Dataset::classes()
  Box box;
};

// Ground-truth container. Immutable after construction. The class table is
// kept sorted by name so every lexicographic tie-break downstream is a plain
// index comparison; numeric category ids survive only for file round-trips.
class Dataset {
 public:
  Dataset() = default;

  // Validates invariants (unique ids, known classes, valid boxes, annotations
  // pointing at present images) and builds lookup indexes. class_idx fields
  // must already refer to `classes` sorted by name.
  Dataset(std::vector<ImageRecord> images, std::vector<ClassInfo> classes,
          std::vector<Annotation> annotations);

  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<ClassInfo>& classes() const { return classes_; }
  const std::vector<Annotation>& annotations() const { return annotations_; }

  int class_index(const std::string& name) const;  // -1 when absent
  const std::string& class_name(int idx) const { return classes_.at(idx).name; }

  bool has_image(int64_t id) const { return image_by_id_.count(id) > 0; }
  const ImageRecord& image(int64_t id) const;
  std::vector<int64_t> image_ids() const;  // ascending

  // Indices into annotations() for one image; empty vector for images
  // without boxes.
  const std::vector<int>& annotations_of(int64_t image_id) const;

  // Annotation counts keyed by class name (only classes that occur).
  std::map<std::string, int64_t> annotation_counts() const;

 private:
  std::vector<ImageRecord> images_;
  std::vector<ClassInfo> classes_;
  std::vector<Annotation> annotations_;
  std::map<int64_t, int> image_by_id_;
  std::map<std::string, int> class_by_name_;
  std::map<int64_t, std::vector<int>> annotations_by_image_;
  static const std::vector<int> kNoAnnotations;
};

// COCO-style JSON: {"images": [{id, width, height}], "categories":
// [{id, name}], "annotations": [{id, image_id, category_id, bbox: [x,y,w,h]}]}.
// Parse failures raise ParseError naming the byte offset; invariant failures
// raise ValidationError listing every offender with its array index.
Dataset dataset_from_json(const std::string& text);
Dataset load_dataset(const std::string& path);

// Canonical serialization: sorted keys, images/annotations by id, categories
// by numeric id, boxes back in [x, y, w, h]. Loading a canonical file and
// serializing again is byte-identical.
std::string dataset_to_json(const Dataset& data);
void save_dataset(const Dataset& data, const std::string& path);

// New dataset restricted to the given image ids (annotations follow their
// images; class table unchanged). Unknown ids raise ValidationError.
Dataset subset_by_images(const Dataset& data, const std::vector<int64_t>& image_ids);

}  // namespace propgen
