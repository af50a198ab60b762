#include "aok/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "aok/builtin_vocabulary.hpp"

namespace aok {

OcclusionLabel parse_label(std::string_view text) {
  if (auto label = enum_from_string<OcclusionLabel>(text)) return *label;
  throw ParseError("unknown occlusion label '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// ConditionVocabulary
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

ConditionVocabulary ConditionVocabulary::parse(std::string_view text) {
  ConditionVocabulary vocab;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (!text.empty()) {
    auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw ParseError("vocabulary line is not 'body_system,condition'", line_no);
    std::string system(trim(line.substr(0, comma)));
    std::string condition(trim(line.substr(comma + 1)));
    if (system.empty() || condition.empty())
      throw ParseError("vocabulary line has an empty field", line_no);
    if (!seen.insert(condition).second)
      throw ParseError("duplicate condition '" + condition + "'", line_no);
    vocab.entries_.push_back({std::move(system), std::move(condition)});
  }
  return vocab;
}

ConditionVocabulary ConditionVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open vocabulary file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const ConditionVocabulary& ConditionVocabulary::builtin() {
  static const ConditionVocabulary vocab = parse(detail::kBuiltinConditionsCsv);
  return vocab;
}

bool ConditionVocabulary::contains(std::string_view condition) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.condition == condition; });
}

std::vector<std::string> ConditionVocabulary::conditions() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.condition);
  return out;
}

std::vector<std::string> ConditionVocabulary::body_systems() const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (std::find(out.begin(), out.end(), e.body_system) == out.end()) out.push_back(e.body_system);
  return out;
}

// ---------------------------------------------------------------------------
// Record validation
// ---------------------------------------------------------------------------

std::vector<Violation> validate_record(const ClinicalRecord& rec, const ConditionVocabulary& vocab) {
  std::vector<Violation> out;
  auto bad = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };
  auto finite_positive = [&](const char* field, const std::optional<double>& v) {
    if (v && !(std::isfinite(*v) && *v > 0.0)) bad(field, "must be a positive finite number");
  };

  if (rec.case_id.empty()) bad("case_id", "must not be empty");
  if (rec.age && !(std::isfinite(*rec.age) && *rec.age >= 0.0 && *rec.age <= 130.0))
    bad("age", "out of range [0, 130]");
  finite_positive("height_cm", rec.height_cm);
  finite_positive("weight_kg", rec.weight_kg);
  if (rec.race && rec.race->empty()) bad("race", "present but empty");
  if (rec.hunt_hess && (*rec.hunt_hess < 0 || *rec.hunt_hess > 5)) bad("hunt_hess", "out of range [0, 5]");
  if (rec.nihss && *rec.nihss < 0) bad("nihss", "must be >= 0");
  if (rec.mrs && (*rec.mrs < 0 || *rec.mrs > 6)) bad("mrs", "out of range [0, 6]");
  for (const auto& c : rec.conditions)
    if (!vocab.contains(c)) bad("conditions", "unknown condition '" + c + "'");
  for (const auto& a : rec.allergies)
    if (a.empty()) bad("allergies", "empty code");
  for (const auto& m : rec.medications)
    if (m.empty()) bad("medications", "empty code");
  return out;
}

std::vector<Violation> validate_cohort(const Cohort& cohort, const ConditionVocabulary& vocab) {
  std::vector<Violation> out;
  std::unordered_set<std::string> ids;
  for (const auto& entry : cohort) {
    for (auto& v : validate_record(entry.record, vocab)) {
      v.field = entry.record.case_id + "." + v.field;
      out.push_back(std::move(v));
    }
    if (!ids.insert(entry.record.case_id).second)
      out.push_back({"case_id", "duplicate case_id '" + entry.record.case_id + "'"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geometry carriers
// ---------------------------------------------------------------------------

double Segment2::length() const { return std::hypot(b.x - a.x, b.y - a.y); }

std::vector<Violation> validate(const Measurement2D& m) {
  std::vector<Violation> out;
  auto check = [&](const char* field, const std::optional<double>& v) {
    if (v && !(std::isfinite(*v) && *v > 0.0)) out.push_back({field, "must be > 0"});
  };
  check("height_mm", m.height_mm);
  check("width_mm", m.width_mm);
  check("dome_mm", m.dome_mm);
  check("neck_mm", m.neck_mm);
  return out;
}

std::vector<Violation> validate(const VesselAnnotation& v) {
  std::vector<Violation> out;
  auto seg = [&](const char* field, const Segment2& s) {
    double len = s.length();
    if (!(std::isfinite(len) && len > 0.0)) out.push_back({field, "segment has zero length"});
  };
  auto diam = [&](const char* field, const std::optional<double>& d) {
    if (d && !(std::isfinite(*d) && *d > 0.0)) out.push_back({field, "must be > 0"});
  };
  seg("parent_seg", v.parent);
  seg("left_seg", v.left);
  seg("right_seg", v.right);
  diam("parent_diam_mm", v.parent_diam_mm);
  diam("left_diam_mm", v.left_diam_mm);
  diam("right_diam_mm", v.right_diam_mm);
  return out;
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  if (std::max(p1.x, p2.x) < std::min(q1.x, q2.x) || std::max(q1.x, q2.x) < std::min(p1.x, p2.x) ||
      std::max(p1.y, p2.y) < std::min(q1.y, q2.y) || std::max(q1.y, q2.y) < std::min(p1.y, p2.y))
    return false;
  int d1 = sign(cross(q1, q2, p1));
  int d2 = sign(cross(q1, q2, p2));
  int d3 = sign(cross(p1, p2, q1));
  int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

}  // namespace

bool is_simple_polygon(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  for (const auto& p : pts)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    const Point2& c = pts[(i + 2) % n];
    if (a == b) return false;
    // Adjacent edges may only share their common vertex.
    if (cross(a, b, c) == 0.0 && ((a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y)) > 0.0)
      return false;
  }
  if (n == 3) return cross(pts[0], pts[1], pts[2]) != 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p1 = pts[i];
    const Point2& p2 = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_touch(p1, p2, pts[j], pts[(j + 1) % n])) return false;
    }
  }
  return true;
}

Contour2D::Contour2D(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() < 3)
    throw ValidationError("contour needs at least 3 points, got " + std::to_string(points_.size()));
  if (!is_simple_polygon(points_)) throw ValidationError("contour is not a simple polygon");
}

ContourStack3D::ContourStack3D(std::vector<Slice> slices) : slices_(std::move(slices)) {
  if (slices_.size() < 2)
    throw ValidationError("contour stack needs at least 2 slices, got " + std::to_string(slices_.size()));
  for (std::size_t i = 0; i < slices_.size(); ++i) {
    if (!std::isfinite(slices_[i].z_mm)) throw ValidationError("slice z is not finite");
    if (i > 0 && !(slices_[i].z_mm > slices_[i - 1].z_mm))
      throw ValidationError("z not strictly increasing at slice " + std::to_string(i));
  }
}

template <std::size_t Rank>
Mask<Rank>::Mask(Dims dims, SpacingArray spacing_mm, std::vector<std::uint8_t> voxels)
    : dims_(dims), spacing_(spacing_mm), voxels_(std::move(voxels)) {
  std::size_t expected = 1;
  for (std::size_t d = 0; d < Rank; ++d) {
    if (dims_[d] == 0) throw ValidationError("mask dimension must be positive");
    if (!(std::isfinite(spacing_[d]) && spacing_[d] > 0.0))
      throw ValidationError("mask spacing must be positive");
    expected *= dims_[d];
  }
  if (voxels_.size() != expected)
    throw ValidationError("mask payload has " + std::to_string(voxels_.size()) + " voxels, dims imply " +
                          std::to_string(expected));
  for (auto& v : voxels_) v = v ? 1 : 0;
}

template <std::size_t Rank>
Mask<Rank>::Mask(Dims dims, SpacingArray spacing_mm)
    : Mask(dims, spacing_mm,
           std::vector<std::uint8_t>(std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                                     std::multiplies<>{}),
                                     0)) {}

template class Mask<2>;
template class Mask<3>;

// ---------------------------------------------------------------------------
// FeatureMatrix
// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(std::vector<ColumnInfo> columns, std::vector<std::string> case_ids,
                             std::vector<std::vector<Cell>> column_values, std::vector<OcclusionLabel> labels)
    : columns_(std::move(columns)),
      case_ids_(std::move(case_ids)),
      values_(std::move(column_values)),
      labels_(std::move(labels)) {
  if (values_.size() != columns_.size())
    throw ValidationError("feature matrix: column metadata and value count differ");
  if (labels_.size() != case_ids_.size()) throw ValidationError("feature matrix: one label per row required");
  std::unordered_set<std::string> names;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (!names.insert(columns_[j].name).second)
      throw ValidationError("feature matrix: duplicate column '" + columns_[j].name + "'");
    if (values_[j].size() != case_ids_.size())
      throw ValidationError("feature matrix: column '" + columns_[j].name + "' has wrong length");
    for (const auto& c : values_[j])
      if (c && !std::isfinite(*c))
        throw ValidationError("feature matrix: non-finite value in column '" + columns_[j].name + "'");
  }
}

std::optional<std::size_t> FeatureMatrix::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return j;
  return std::nullopt;
}

std::vector<std::string> FeatureMatrix::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<ColumnInfo> cols;
  std::vector<std::vector<Cell>> vals;
  for (const auto& n : names) {
    auto j = index_of(n);
    if (!j) throw ValidationError("feature matrix has no column '" + n + "'");
    cols.push_back(columns_[*j]);
    vals.push_back(values_[*j]);
  }
  return FeatureMatrix(std::move(cols), case_ids_, std::move(vals), labels_);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<OcclusionLabel> labels;
  std::vector<std::vector<Cell>> vals(columns_.size());
  for (auto r : rows) {
    if (r >= this->rows()) throw ValidationError("feature matrix row index out of range");
    ids.push_back(case_ids_[r]);
    labels.push_back(labels_[r]);
    for (std::size_t j = 0; j < columns_.size(); ++j) vals[j].push_back(values_[j][r]);
  }
  return FeatureMatrix(columns_, std::move(ids), std::move(vals), std::move(labels));
}

FeatureMatrix FeatureMatrix::with_labels(std::vector<OcclusionLabel> labels) const {
  return FeatureMatrix(columns_, case_ids_, values_, std::move(labels));
}

FeatureMatrix FeatureMatrix::with_column(ColumnInfo info, std::vector<Cell> values) const {
  auto cols = columns_;
  auto vals = values_;
  cols.push_back(std::move(info));
  vals.push_back(std::move(values));
  return FeatureMatrix(std::move(cols), case_ids_, std::move(vals), labels_);
}

std::size_t FeatureMatrix::count(OcclusionLabel label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

}  // namespace aok
