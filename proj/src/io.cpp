#include "aok/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "csv.hpp"
#include "json.hpp"

namespace aok::io {

using nlohmann::json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for " + path.string());
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    auto semi = s.find(';');
    std::string_view item = s.substr(0, semi);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (semi == std::string_view::npos) break;
    s.remove_prefix(semi + 1);
  }
  return out;
}

std::string join_list(const auto& items) {
  std::string out;
  for (const auto& it : items) {
    if (!out.empty()) out.push_back(';');
    out += it;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cohort
// ---------------------------------------------------------------------------

const std::vector<std::string>& cohort_columns() {
  static const std::vector<std::string> cols = {
      "case_id",       "label",          "age",         "gender",          "height_cm",
      "weight_kg",     "race",           "aneurysm_location", "side",      "rupture_status",
      "detection",     "hunt_hess",      "nihss",       "mrs",             "smoking_history",
      "substance_abuse", "conditions",   "allergies",   "medications"};
  return cols;
}

Cohort parse_cohort(std::string_view text, const CohortReadOptions& options) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("cohort file has no header row", 1);
  const auto& header = rows.front().fields;
  const auto& known = cohort_columns();

  std::vector<int> field_of(header.size(), -1);
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!seen.insert(header[c]).second) throw ParseError("duplicate column '" + header[c] + "'", rows.front().line);
    auto it = std::find(known.begin(), known.end(), header[c]);
    if (it == known.end()) {
      if (!options.allow_extra_columns) throw ParseError("unknown column '" + header[c] + "'", rows.front().line);
      continue;
    }
    field_of[c] = static_cast<int>(it - known.begin());
  }
  if (!seen.contains("case_id") || !seen.contains("label"))
    throw ParseError("cohort header must contain case_id and label", rows.front().line);

  Cohort cohort;
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size())
      throw ParseError("row has " + std::to_string(row.fields.size()) + " fields, header has " +
                           std::to_string(header.size()),
                       row.line);
    CohortEntry entry{{}, OcclusionLabel::CompleteOcclusion};
    ClinicalRecord& rec = entry.record;
    bool have_label = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (field_of[c] < 0) continue;
      const std::string& col = header[c];
      const std::string& v = row.fields[c];
      auto fail = [&](const std::string& why) -> ParseError {
        return ParseError("column '" + col + "': " + why, row.line);
      };
      auto number = [&]() -> std::optional<double> {
        if (v.empty()) return std::nullopt;
        auto d = parse_double(v);
        if (!d) throw fail("not a number: '" + v + "'");
        return d;
      };
      auto integer = [&]() -> std::optional<int> {
        if (v.empty()) return std::nullopt;
        auto i = parse_int(v);
        if (!i) throw fail("not an integer: '" + v + "'");
        return i;
      };
      auto boolean = [&]() -> std::optional<bool> {
        if (v.empty()) return std::nullopt;
        if (v == "true") return true;
        if (v == "false") return false;
        throw fail("expected true/false, got '" + v + "'");
      };
      auto enumerated = [&]<class E>(std::optional<E>& out) {
        if (v.empty()) return;
        auto e = enum_from_string<E>(v);
        if (!e) throw fail("unknown value '" + v + "'");
        out = e;
      };

      if (col == "case_id") {
        if (v.empty()) throw fail("case_id is empty");
        rec.case_id = v;
      } else if (col == "label") {
        auto label = enum_from_string<OcclusionLabel>(v);
        if (!label) throw fail("unknown label '" + v + "'");
        entry.label = *label;
        have_label = true;
      } else if (col == "age") {
        rec.age = number();
      } else if (col == "gender") {
        enumerated(rec.gender);
      } else if (col == "height_cm") {
        rec.height_cm = number();
      } else if (col == "weight_kg") {
        rec.weight_kg = number();
      } else if (col == "race") {
        if (!v.empty()) rec.race = v;
      } else if (col == "aneurysm_location") {
        enumerated(rec.aneurysm_location);
      } else if (col == "side") {
        enumerated(rec.side);
      } else if (col == "rupture_status") {
        enumerated(rec.rupture_status);
      } else if (col == "detection") {
        enumerated(rec.detection);
      } else if (col == "hunt_hess") {
        rec.hunt_hess = integer();
      } else if (col == "nihss") {
        rec.nihss = integer();
      } else if (col == "mrs") {
        rec.mrs = integer();
      } else if (col == "smoking_history") {
        rec.smoking_history = boolean();
      } else if (col == "substance_abuse") {
        rec.substance_abuse = boolean();
      } else if (col == "conditions") {
        for (auto& c : split_list(v)) rec.conditions.insert(std::move(c));
      } else if (col == "allergies") {
        rec.allergies = split_list(v);
      } else if (col == "medications") {
        rec.medications = split_list(v);
      }
    }
    if (!have_label) throw ParseError("row has no label", row.line);
    if (!ids.insert(rec.case_id).second) throw ParseError("duplicate case_id '" + rec.case_id + "'", row.line);
    cohort.push_back(std::move(entry));
  }
  return cohort;
}

Cohort read_cohort(const fs::path& path, const CohortReadOptions& options) {
  try {
    return parse_cohort(read_text(path), options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_cohort(const Cohort& cohort) {
  std::string out = csv::join(cohort_columns()) + "\n";
  auto opt_num = [](const auto& v) { return v ? format_number(static_cast<double>(*v)) : std::string(); };
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  auto opt_bool = [](const std::optional<bool>& v) { return v ? std::string(*v ? "true" : "false") : std::string(); };
  auto opt_enum = [](const auto& v) { return v ? std::string(to_string(*v)) : std::string(); };
  for (const auto& e : cohort) {
    const auto& r = e.record;
    std::vector<std::string> f = {r.case_id,
                                  std::string(to_string(e.label)),
                                  opt_num(r.age),
                                  opt_enum(r.gender),
                                  opt_num(r.height_cm),
                                  opt_num(r.weight_kg),
                                  r.race.value_or(""),
                                  opt_enum(r.aneurysm_location),
                                  opt_enum(r.side),
                                  opt_enum(r.rupture_status),
                                  opt_enum(r.detection),
                                  opt_int(r.hunt_hess),
                                  opt_int(r.nihss),
                                  opt_int(r.mrs),
                                  opt_bool(r.smoking_history),
                                  opt_bool(r.substance_abuse),
                                  join_list(r.conditions),
                                  join_list(r.allergies),
                                  join_list(r.medications)};
    out += csv::join(f);
    out.push_back('\n');
  }
  return out;
}

void write_cohort(const fs::path& path, const Cohort& cohort) { write_text(path, format_cohort(cohort)); }

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

namespace {

Point2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("point must be an array [x, y] of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Point2> points_from(const json& j) {
  if (!j.is_array()) throw ParseError("points must be an array of [x, y]");
  std::vector<Point2> out;
  out.reserve(j.size());
  for (const auto& p : j) out.push_back(point_from(p));
  return out;
}

json points_to(const std::vector<Point2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::optional<double> opt_number(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ParseError(std::string("'") + key + "' must be a number");
  return it->get<double>();
}

template <std::size_t N>
std::array<double, N> spacing_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N) throw ParseError(std::string(what) + ": spacing_mm must have " + std::to_string(N) + " entries");
  std::array<double, N> s{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw ParseError(std::string(what) + ": spacing_mm entries must be numbers");
    s[i] = j[i].get<double>();
    if (!(std::isfinite(s[i]) && s[i] > 0.0)) throw ValidationError(std::string(what) + ": spacing must be > 0");
  }
  return s;
}

Segment2 segment_from(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("vessel.") + key + " is required");
  if (!it->is_array() || it->size() != 2) throw ParseError(std::string("vessel.") + key + " must be two points");
  return {point_from((*it)[0]), point_from((*it)[1])};
}

json segment_to(const Segment2& s) { return json::array({{s.a.x, s.a.y}, {s.b.x, s.b.y}}); }

void put_opt(json& obj, const char* key, const std::optional<double>& v) {
  if (v) obj[key] = *v;
}

}  // namespace

AnnotationBundle parse_annotation(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("annotation is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("annotation must be a JSON object");

  AnnotationBundle b;
  try {
    auto id = doc.find("case_id");
    if (id == doc.end() || !id->is_string() || id->get<std::string>().empty())
      throw ParseError("annotation needs a non-empty string case_id");
    b.case_id = id->get<std::string>();

    if (auto m = doc.find("measurements_2d"); m != doc.end() && !m->is_null()) {
      if (!m->is_object()) throw ParseError("measurements_2d must be an object");
      for (auto& [key, val] : m->items()) {
        auto view = enum_from_string<View>(key);
        if (!view) throw ParseError("measurements_2d: unknown view '" + key + "'");
        if (!val.is_object()) throw ParseError("measurements_2d." + key + " must be an object");
        Measurement2D meas;
        meas.view = *view;
        meas.height_mm = opt_number(val, "height_mm");
        meas.width_mm = opt_number(val, "width_mm");
        meas.dome_mm = opt_number(val, "dome_mm");
        meas.neck_mm = opt_number(val, "neck_mm");
        if (auto v = validate(meas); !v.empty())
          throw ValidationError("measurements_2d." + key + "." + v.front().field + ": " + v.front().message);
        (*view == View::AP ? b.ap : b.lateral) = meas;
      }
    }

    if (auto v = doc.find("vessel"); v != doc.end() && !v->is_null()) {
      if (!v->is_object()) throw ParseError("vessel must be an object");
      VesselAnnotation ves;
      ves.parent = segment_from(*v, "parent_seg");
      ves.left = segment_from(*v, "left_seg");
      ves.right = segment_from(*v, "right_seg");
      ves.parent_diam_mm = opt_number(*v, "parent_diam_mm");
      ves.left_diam_mm = opt_number(*v, "left_diam_mm");
      ves.right_diam_mm = opt_number(*v, "right_diam_mm");
      if (auto viol = validate(ves); !viol.empty())
        throw ValidationError("vessel." + viol.front().field + ": " + viol.front().message);
      b.vessel = ves;
    }

    if (auto c = doc.find("contours_2d"); c != doc.end() && !c->is_null()) {
      if (!c->is_object()) throw ParseError("contours_2d must be an object");
      for (auto& [key, val] : c->items()) {
        auto view = enum_from_string<View>(key);
        if (!view) throw ParseError("contours_2d: unknown view '" + key + "'");
        if (!val.is_object() || !val.contains("points") || !val.contains("spacing_mm"))
          throw ParseError("contours_2d." + key + " needs points and spacing_mm");
        const auto sp = spacing_from<2>(val["spacing_mm"], "contours_2d");
        ContourAnnotation ca{Contour2D(points_from(val["points"])), {sp[0], sp[1]}};
        (*view == View::AP ? b.contour_ap : b.contour_lateral) = std::move(ca);
      }
    }

    if (auto s = doc.find("contour_stack_3d"); s != doc.end() && !s->is_null()) {
      if (!s->is_object() || !s->contains("slices") || !(*s)["slices"].is_array())
        throw ParseError("contour_stack_3d needs a slices array");
      std::array<double, 2> sp{1.0, 1.0};
      if (s->contains("spacing_mm")) sp = spacing_from<2>((*s)["spacing_mm"], "contour_stack_3d");
      std::vector<ContourStack3D::Slice> slices;
      for (const auto& sl : (*s)["slices"]) {
        if (!sl.is_object() || !sl.contains("z_mm") || !sl["z_mm"].is_number() || !sl.contains("points"))
          throw ParseError("contour_stack_3d slice needs z_mm and points");
        auto pts = points_from(sl["points"]);
        for (auto& p : pts) p = {p.x * sp[0], p.y * sp[1]};
        slices.push_back({sl["z_mm"].get<double>(), Contour2D(std::move(pts))});
      }
      b.stack = ContourStack3D(std::move(slices));
    }

    if (auto d = doc.find("device_model"); d != doc.end() && !d->is_null()) {
      if (!d->is_string()) throw ParseError("device_model must be a string");
      b.device_model = d->get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("annotation has an unexpected shape: ") + e.what());
  }
  return b;
}

AnnotationBundle read_annotation(const fs::path& path) {
  try {
    return parse_annotation(read_text(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_annotation(const AnnotationBundle& b) {
  json doc;
  doc["case_id"] = b.case_id;
  if (b.ap || b.lateral) {
    json m = json::object();
    for (const auto* meas : {&b.ap, &b.lateral}) {
      if (!*meas) continue;
      json o = json::object();
      put_opt(o, "height_mm", (*meas)->height_mm);
      put_opt(o, "width_mm", (*meas)->width_mm);
      put_opt(o, "dome_mm", (*meas)->dome_mm);
      put_opt(o, "neck_mm", (*meas)->neck_mm);
      m[std::string(to_string((*meas)->view))] = o;
    }
    doc["measurements_2d"] = m;
  }
  if (b.vessel) {
    json v;
    v["parent_seg"] = segment_to(b.vessel->parent);
    v["left_seg"] = segment_to(b.vessel->left);
    v["right_seg"] = segment_to(b.vessel->right);
    put_opt(v, "parent_diam_mm", b.vessel->parent_diam_mm);
    put_opt(v, "left_diam_mm", b.vessel->left_diam_mm);
    put_opt(v, "right_diam_mm", b.vessel->right_diam_mm);
    doc["vessel"] = v;
  }
  if (b.contour_ap || b.contour_lateral) {
    json c = json::object();
    for (View view : {View::AP, View::Lateral}) {
      const auto& ca = b.contour(view);
      if (!ca) continue;
      c[std::string(to_string(view))] = {{"spacing_mm", {ca->spacing.sx, ca->spacing.sy}},
                                         {"points", points_to(ca->contour.points())}};
    }
    doc["contours_2d"] = c;
  }
  if (b.stack) {
    json slices = json::array();
    for (const auto& sl : b.stack->slices())
      slices.push_back({{"z_mm", sl.z_mm}, {"points", points_to(sl.contour.points())}});
    doc["contour_stack_3d"] = {{"slices", slices}};
  }
  if (b.device_model) doc["device_model"] = *b.device_model;
  return doc.dump(1) + "\n";
}

void write_annotation(const fs::path& path, const AnnotationBundle& bundle) {
  write_text(path, format_annotation(bundle));
}

std::map<std::string, AnnotationBundle> read_annotation_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("annotation directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, AnnotationBundle> out;
  for (const auto& f : files) {
    auto b = read_annotation(f);
    std::string id = b.case_id;
    if (!out.emplace(id, std::move(b)).second)
      throw ValidationError("duplicate annotation for case '" + id + "' in " + f.string());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Masks and images
// ---------------------------------------------------------------------------

fs::path sidecar_path(const fs::path& payload) {
  fs::path p = payload;
  p.replace_extension(".json");
  return p;
}

namespace {

json read_sidecar(const fs::path& payload) {
  const fs::path side = sidecar_path(payload);
  if (!fs::exists(side)) throw ParseError("missing sidecar " + side.string());
  try {
    return json::parse(read_text(side));
  } catch (const json::parse_error& e) {
    throw ParseError("sidecar " + side.string() + " is not valid JSON: " + e.what());
  }
}

struct PgmData {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;
};

PgmData parse_pgm(const std::string& bytes, const fs::path& where) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) { return ParseError(where.string() + ": " + why); };
  auto skip_ws_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_ws_comments();
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw fail("malformed PGM header");
    std::size_t v = 0;
    std::from_chars(bytes.data() + start, bytes.data() + pos, v);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw fail("not a binary PGM (P5)");
  pos = 2;
  PgmData d;
  d.width = read_uint();
  d.height = read_uint();
  const std::size_t maxval = read_uint();
  if (maxval != 255) throw fail("unsupported PGM maxval " + std::to_string(maxval) + " (only 255)");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) throw fail("malformed PGM header");
  ++pos;
  const std::size_t payload = bytes.size() - pos;
  if (d.width == 0 || d.height == 0) throw fail("PGM has zero size");
  if (payload != d.width * d.height)
    throw fail("PGM payload has " + std::to_string(payload) + " bytes, header implies " +
               std::to_string(d.width * d.height));
  d.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return d;
}

std::string pgm_bytes(std::size_t w, std::size_t h, std::span<const std::uint8_t> pixels) {
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

std::array<std::size_t, 3> dims_from(const json& j, const fs::path& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where.string() + ": sidecar dims must have 3 entries");
  std::array<std::size_t, 3> d{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() <= 0)
      throw ParseError(where.string() + ": sidecar dims must be positive integers");
    d[i] = j[i].get<std::size_t>();
  }
  return d;
}

GrayImage2D read_pgm_with_sidecar(const fs::path& pgm) {
  const json side = read_sidecar(pgm);
  if (!side.contains("spacing_mm")) throw ParseError(sidecar_path(pgm).string() + ": spacing_mm missing");
  const auto sp = spacing_from<2>(side["spacing_mm"], sidecar_path(pgm).string().c_str());
  auto data = parse_pgm(read_text(pgm), pgm);
  return {{data.width, data.height}, sp, std::move(data.pixels)};
}

GrayImage3D read_raw_with_sidecar(const fs::path& raw) {
  const json side = read_sidecar(raw);
  if (!side.contains("dims") || !side.contains("spacing_mm"))
    throw ParseError(sidecar_path(raw).string() + ": dims and spacing_mm required");
  const auto dims = dims_from(side["dims"], sidecar_path(raw));
  const auto sp = spacing_from<3>(side["spacing_mm"], sidecar_path(raw).string().c_str());
  std::string bytes = read_text(raw);
  const std::size_t expected = dims[0] * dims[1] * dims[2];
  if (bytes.size() != expected)
    throw ParseError(raw.string() + ": payload has " + std::to_string(bytes.size()) + " bytes, dims imply " +
                     std::to_string(expected));
  return {dims, sp, std::vector<std::uint8_t>(bytes.begin(), bytes.end())};
}

void write_pgm_with_sidecar(const fs::path& pgm, const std::array<std::size_t, 2>& dims,
                            const std::array<double, 2>& spacing, std::span<const std::uint8_t> pixels) {
  write_text(pgm, pgm_bytes(dims[0], dims[1], pixels));
  json side = {{"spacing_mm", {spacing[0], spacing[1]}}};
  write_text(sidecar_path(pgm), side.dump() + "\n");
}

void write_raw_with_sidecar(const fs::path& raw, const std::array<std::size_t, 3>& dims,
                            const std::array<double, 3>& spacing, std::span<const std::uint8_t> bytes) {
  write_text(raw, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  json side = {{"dims", {dims[0], dims[1], dims[2]}}, {"spacing_mm", {spacing[0], spacing[1], spacing[2]}}};
  write_text(sidecar_path(raw), side.dump() + "\n");
}

}  // namespace

Mask2D read_mask2d(const fs::path& pgm) {
  auto img = read_pgm_with_sidecar(pgm);
  return Mask2D(img.dims, img.spacing, std::move(img.pixels));
}

void write_mask2d(const fs::path& pgm, const Mask2D& mask) {
  std::vector<std::uint8_t> px(mask.voxels().begin(), mask.voxels().end());
  for (auto& v : px) v = v ? 255 : 0;
  write_pgm_with_sidecar(pgm, mask.dims(), mask.spacing(), px);
}

Mask3D read_mask3d(const fs::path& raw) {
  auto img = read_raw_with_sidecar(raw);
  return Mask3D(img.dims, img.spacing, std::move(img.pixels));
}

void write_mask3d(const fs::path& raw, const Mask3D& mask) {
  std::vector<std::uint8_t> px(mask.voxels().begin(), mask.voxels().end());
  for (auto& v : px) v = v ? 255 : 0;
  write_raw_with_sidecar(raw, mask.dims(), mask.spacing(), px);
}

GrayImage2D read_image2d(const fs::path& pgm) { return read_pgm_with_sidecar(pgm); }

void write_image2d(const fs::path& pgm, const GrayImage2D& image) {
  if (image.pixels.size() != image.dims[0] * image.dims[1]) throw ValidationError("image payload does not match dims");
  write_pgm_with_sidecar(pgm, image.dims, image.spacing, image.pixels);
}

GrayImage3D read_image3d(const fs::path& raw) { return read_raw_with_sidecar(raw); }

void write_image3d(const fs::path& raw, const GrayImage3D& image) {
  if (image.pixels.size() != image.dims[0] * image.dims[1] * image.dims[2])
    throw ValidationError("image payload does not match dims");
  write_raw_with_sidecar(raw, image.dims, image.spacing, image.pixels);
}

// ---------------------------------------------------------------------------
// Manifest and device catalog
// ---------------------------------------------------------------------------

SegManifest read_manifest(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array())
    throw ParseError(path.string() + ": manifest needs a cases array");

  SegManifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (const auto& c : doc["cases"]) {
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
      if (!c.contains(key) || c[key].is_null()) {
        if (required) throw ParseError(path.string() + ": manifest case missing '" + key + "'");
        return std::nullopt;
      }
      if (!c[key].is_string()) throw ParseError(path.string() + ": manifest field '" + key + "' must be a string");
      return c[key].get<std::string>();
    };
    SegCase sc;
    sc.case_id = *str("case_id", true);
    sc.image = *str("image", true);
    sc.mask_gt = *str("mask_gt", true);
    if (auto p = str("mask_pred", false)) sc.mask_pred = fs::path(*p);
    sc.split = str("split", false).value_or("");
    for (const fs::path* p : {&sc.image, &sc.mask_gt}) {
      if (!fs::exists(m.resolve(*p)))
        throw ConfigError(path.string() + ": case '" + sc.case_id + "' references missing file " + m.resolve(*p).string());
    }
    if (sc.mask_pred && !fs::exists(m.resolve(*sc.mask_pred)))
      throw ConfigError(path.string() + ": case '" + sc.case_id + "' references missing file " +
                        m.resolve(*sc.mask_pred).string());
    m.cases.push_back(std::move(sc));
  }
  return m;
}

void write_manifest(const fs::path& path, const SegManifest& manifest) {
  json cases = json::array();
  for (const auto& c : manifest.cases) {
    json o = {{"case_id", c.case_id}, {"image", c.image.generic_string()}, {"mask_gt", c.mask_gt.generic_string()},
              {"split", c.split}};
    if (c.mask_pred) o["mask_pred"] = c.mask_pred->generic_string();
    cases.push_back(o);
  }
  write_text(path, json{{"cases", cases}}.dump(1) + "\n");
}

std::optional<double> DeviceCatalog::volume_of(const std::string& model) const {
  auto it = expanded_volume_cm3.find(model);
  if (it == expanded_volume_cm3.end()) return std::nullopt;
  return it->second;
}

DeviceCatalog read_device_catalog(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("devices") || !doc["devices"].is_array())
    throw ParseError(path.string() + ": device catalog needs a devices array");
  DeviceCatalog cat;
  for (const auto& d : doc["devices"]) {
    if (!d.is_object() || !d.contains("model") || !d["model"].is_string() || !d.contains("expanded_volume_cm3") ||
        !d["expanded_volume_cm3"].is_number())
      throw ParseError(path.string() + ": device entries need model and expanded_volume_cm3");
    const double vol = d["expanded_volume_cm3"].get<double>();
    if (!(vol > 0.0)) throw ValidationError(path.string() + ": expanded_volume_cm3 must be > 0");
    if (!cat.expanded_volume_cm3.emplace(d["model"].get<std::string>(), vol).second)
      throw ValidationError(path.string() + ": duplicate device model '" + d["model"].get<std::string>() + "'");
  }
  return cat;
}

void write_device_catalog(const fs::path& path, const DeviceCatalog& catalog) {
  json devices = json::array();
  for (const auto& [model, vol] : catalog.expanded_volume_cm3)
    devices.push_back({{"model", model}, {"expanded_volume_cm3", vol}});
  write_text(path, json{{"devices", devices}}.dump(1) + "\n");
}

}  // namespace aok::io
