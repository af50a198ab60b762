#include "aok/features.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "csv.hpp"

namespace aok::features {

std::optional<double> aggregate(std::optional<double> ap, std::optional<double> lat) {
  if (ap && lat) return (*ap + *lat) / 2.0;
  if (ap) return ap;
  return lat;
}

std::optional<double> sum3(const Measurement2D& m) {
  if (!m.height_mm || !m.width_mm || !m.dome_mm) return std::nullopt;
  return *m.height_mm + *m.width_mm + *m.dome_mm;
}

CaseMasks load_case_masks(const std::filesystem::path& masks_dir, const std::string& case_id) {
  CaseMasks m;
  const auto ap = masks_dir / (case_id + "_AP.pgm");
  const auto lat = masks_dir / (case_id + "_Lateral.pgm");
  const auto sac = masks_dir / (case_id + "_sac.raw");
  if (std::filesystem::exists(ap)) m.ap = io::read_mask2d(ap);
  if (std::filesystem::exists(lat)) m.lateral = io::read_mask2d(lat);
  if (std::filesystem::exists(sac)) m.sac = io::read_mask3d(sac);
  return m;
}

CaseGeometry compute_case_geometry(const io::AnnotationBundle* annotation, const CaseMasks& masks,
                                   const io::DeviceCatalog* devices, const GeometryOptions& options) {
  CaseGeometry g;
  if (annotation) g.case_id = annotation->case_id;

  auto attempt = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      g.warnings.push_back(std::string(what) + ": " + e.what());
    }
  };

  if (annotation) {
    if (annotation->contour_ap)
      attempt("area_ap", [&] { g.area_ap_mm2 = geometry::polygon_area(annotation->contour_ap->contour, annotation->contour_ap->spacing); });
    if (annotation->contour_lateral)
      attempt("area_lat", [&] {
        g.area_lat_mm2 = geometry::polygon_area(annotation->contour_lateral->contour, annotation->contour_lateral->spacing);
      });
    if (annotation->vessel) {
      attempt("vessel_angles", [&] { g.angles = geometry::vessel_angles(*annotation->vessel, options.snap_radius_mm); });
      g.ratios = geometry::vessel_ratios(*annotation->vessel);
    }
    if (annotation->stack)
      attempt("shape", [&] { g.shape = geometry::mesh_metrics(geometry::loft_mesh(*annotation->stack, options.ring_samples)); });
    if (annotation->device_model && devices) {
      g.device_volume_cm3 = devices->volume_of(*annotation->device_model);
      if (!g.device_volume_cm3) g.warnings.push_back("device: model '" + *annotation->device_model + "' not in catalog");
    }
  }
  if (masks.ap) attempt("area_ap_auto", [&] { g.area_ap_auto_mm2 = geometry::mask_area(*masks.ap); });
  if (masks.lateral) attempt("area_lat_auto", [&] { g.area_lat_auto_mm2 = geometry::mask_area(*masks.lateral); });
  if (masks.sac)
    attempt("shape_auto", [&] {
      g.shape_auto = geometry::mesh_metrics(
          geometry::loft_mesh(geometry::mask_to_stack(*masks.sac, options.mask_to_stack), options.ring_samples));
    });
  return g;
}

const std::vector<std::string>& automatic_columns() {
  static const std::vector<std::string> cols = {"area_ap_mm2", "area_lat_mm2", "agg_area_mm2",
                                                "volume_cm3",  "surface_cm2",  "ipr"};
  return cols;
}

const std::vector<std::string>& imaging3d_columns() {
  static const std::vector<std::string> cols = {"volume_cm3", "surface_cm2", "nsi", "ipr"};
  return cols;
}

namespace {

struct ColumnBuilder {
  std::vector<ColumnInfo> infos;
  std::vector<std::vector<Cell>> values;
  AuditMap audit;

  void add(std::string name, ColumnKind kind, Provenance prov, Source src, std::vector<Cell> v, std::string how) {
    audit[name] = std::move(how);
    infos.push_back({std::move(name), kind, prov, src});
    values.push_back(std::move(v));
  }
};

std::optional<double> as_cell(std::optional<int> v) {
  if (!v) return std::nullopt;
  return static_cast<double>(*v);
}

template <class E>
void add_one_hot(ColumnBuilder& b, const std::vector<const ClinicalRecord*>& rows, const std::string& field,
                 std::optional<E> ClinicalRecord::*member) {
  for (std::size_t k = 0; k < enum_count<E>(); ++k) {
    const E level = static_cast<E>(k);
    std::vector<Cell> col;
    col.reserve(rows.size());
    for (const auto* r : rows) {
      const auto& v = r->*member;
      col.push_back(v ? Cell(*v == level ? 1.0 : 0.0) : Cell());
    }
    b.add(field + "=" + std::string(to_string(level)), ColumnKind::Categorical, Provenance::Clinical, Source::Manual,
          std::move(col), "one-hot of cohort." + field);
  }
}

void add_clinical(ColumnBuilder& b, const std::vector<const ClinicalRecord*>& rows) {
  auto numeric = [&](const std::string& name, auto getter) {
    std::vector<Cell> col;
    for (const auto* r : rows) col.push_back(getter(*r));
    b.add(name, ColumnKind::Numeric, Provenance::Clinical, Source::Manual, std::move(col), "cohort." + name);
  };
  auto flag = [&](const std::string& name, std::optional<bool> ClinicalRecord::*member) {
    std::vector<Cell> col;
    for (const auto* r : rows) {
      const auto& v = r->*member;
      col.push_back(v ? Cell(*v ? 1.0 : 0.0) : Cell());
    }
    b.add(name, ColumnKind::Categorical, Provenance::Clinical, Source::Manual, std::move(col), "cohort." + name);
  };
  numeric("age", [](const ClinicalRecord& r) { return r.age; });
  add_one_hot(b, rows, "gender", &ClinicalRecord::gender);
  numeric("height_cm", [](const ClinicalRecord& r) { return r.height_cm; });
  numeric("weight_kg", [](const ClinicalRecord& r) { return r.weight_kg; });

  // Race is free text; its levels are the values observed in the cohort.
  std::set<std::string> races;
  for (const auto* r : rows)
    if (r->race) races.insert(*r->race);
  for (const auto& level : races) {
    std::vector<Cell> col;
    for (const auto* r : rows) col.push_back(r->race ? Cell(*r->race == level ? 1.0 : 0.0) : Cell());
    b.add("race=" + level, ColumnKind::Categorical, Provenance::Clinical, Source::Manual, std::move(col),
          "one-hot of cohort.race");
  }

  add_one_hot(b, rows, "aneurysm_location", &ClinicalRecord::aneurysm_location);
  add_one_hot(b, rows, "side", &ClinicalRecord::side);
  add_one_hot(b, rows, "rupture_status", &ClinicalRecord::rupture_status);
  add_one_hot(b, rows, "detection", &ClinicalRecord::detection);
  numeric("hunt_hess", [](const ClinicalRecord& r) { return as_cell(r.hunt_hess); });
  numeric("nihss", [](const ClinicalRecord& r) { return as_cell(r.nihss); });
  numeric("mrs", [](const ClinicalRecord& r) { return as_cell(r.mrs); });
  flag("smoking_history", &ClinicalRecord::smoking_history);
  flag("substance_abuse", &ClinicalRecord::substance_abuse);

  // Set-valued fields: absence from the set is a real "no", never missing.
  auto set_field = [&](const std::string& prefix, const std::string& field, auto contains, auto collect) {
    std::set<std::string> seen;
    for (const auto* r : rows) collect(*r, seen);
    for (const auto& level : seen) {
      std::vector<Cell> col;
      for (const auto* r : rows) col.push_back(contains(*r, level) ? 1.0 : 0.0);
      b.add(prefix + "=" + level, ColumnKind::Categorical, Provenance::Clinical, Source::Manual, std::move(col),
            "membership in cohort." + field);
    }
  };
  set_field(
      "condition", "conditions", [](const ClinicalRecord& r, const std::string& c) { return r.conditions.contains(c); },
      [](const ClinicalRecord& r, std::set<std::string>& s) { s.insert(r.conditions.begin(), r.conditions.end()); });
  auto in_list = [](const std::vector<std::string>& v, const std::string& c) {
    return std::find(v.begin(), v.end(), c) != v.end();
  };
  set_field(
      "allergy", "allergies", [&](const ClinicalRecord& r, const std::string& c) { return in_list(r.allergies, c); },
      [](const ClinicalRecord& r, std::set<std::string>& s) { s.insert(r.allergies.begin(), r.allergies.end()); });
  set_field(
      "medication", "medications", [&](const ClinicalRecord& r, const std::string& c) { return in_list(r.medications, c); },
      [](const ClinicalRecord& r, std::set<std::string>& s) { s.insert(r.medications.begin(), r.medications.end()); });
}

struct CaseInputs {
  const io::AnnotationBundle* annotation = nullptr;
  const CaseGeometry* geometry = nullptr;
};

void add_imaging(ColumnBuilder& b, const std::vector<CaseInputs>& rows, Source area_source, Source shape_source) {
  auto col_of = [&](auto getter) {
    std::vector<Cell> col;
    col.reserve(rows.size());
    for (const auto& in : rows) col.push_back(getter(in));
    return col;
  };
  auto meas = [](const CaseInputs& in, View v) -> const std::optional<Measurement2D>* {
    return in.annotation ? &in.annotation->measurement(v) : nullptr;
  };
  using Field = std::optional<double> Measurement2D::*;
  const std::pair<const char*, Field> dims[] = {{"height", &Measurement2D::height_mm},
                                                {"width", &Measurement2D::width_mm},
                                                {"dome", &Measurement2D::dome_mm},
                                                {"neck", &Measurement2D::neck_mm}};
  auto view_value = [&](const CaseInputs& in, View v, Field f) -> Cell {
    const auto* m = meas(in, v);
    return (m && *m) ? (**m).*f : Cell();
  };

  for (View v : {View::AP, View::Lateral}) {
    const std::string prefix = v == View::AP ? "ap_" : "lat_";
    for (const auto& [name, f] : dims) {
      b.add(prefix + name + "_mm", ColumnKind::Numeric, Provenance::Imaging2D, Source::Manual,
            col_of([&](const CaseInputs& in) { return view_value(in, v, f); }),
            "annotation.measurements_2d." + std::string(to_string(v)) + "." + name + "_mm");
    }
  }
  for (View v : {View::AP, View::Lateral}) {
    const std::string name = v == View::AP ? "sum3_ap_mm" : "sum3_lat_mm";
    b.add(name, ColumnKind::Numeric, Provenance::Imaging2D, Source::Manual, col_of([&](const CaseInputs& in) -> Cell {
            const auto* m = meas(in, v);
            return (m && *m) ? sum3(**m) : Cell();
          }),
          "height+width+dome of the " + std::string(to_string(v)) + " view");
  }
  for (const auto& [name, f] : dims) {
    b.add(std::string("agg_") + name + "_mm", ColumnKind::Numeric, Provenance::Imaging2D, Source::Manual,
          col_of([&](const CaseInputs& in) { return aggregate(view_value(in, View::AP, f), view_value(in, View::Lateral, f)); }),
          std::string("aggregate(ap_") + name + "_mm, lat_" + name + "_mm)");
  }

  const bool auto_area = area_source == Source::Automatic;
  auto area = [&](const CaseInputs& in, View v) -> Cell {
    if (!in.geometry) return std::nullopt;
    if (auto_area) return v == View::AP ? in.geometry->area_ap_auto_mm2 : in.geometry->area_lat_auto_mm2;
    return v == View::AP ? in.geometry->area_ap_mm2 : in.geometry->area_lat_mm2;
  };
  const std::string area_how = auto_area ? "mask_area(segmentation mask, " : "polygon_area(annotation.contours_2d.";
  b.add("area_ap_mm2", ColumnKind::Numeric, Provenance::Imaging2D, area_source,
        col_of([&](const CaseInputs& in) { return area(in, View::AP); }), area_how + "AP)");
  b.add("area_lat_mm2", ColumnKind::Numeric, Provenance::Imaging2D, area_source,
        col_of([&](const CaseInputs& in) { return area(in, View::Lateral); }), area_how + "Lateral)");
  b.add("agg_area_mm2", ColumnKind::Numeric, Provenance::Imaging2D, area_source,
        col_of([&](const CaseInputs& in) { return aggregate(area(in, View::AP), area(in, View::Lateral)); }),
        "aggregate(area_ap_mm2, area_lat_mm2)");

  auto vessel = [&](const std::string& name, auto getter, const std::string& how) {
    b.add(name, ColumnKind::Numeric, Provenance::Imaging2D, Source::Manual, col_of([&](const CaseInputs& in) -> Cell {
            return in.geometry ? getter(*in.geometry) : Cell();
          }),
          how);
  };
  auto angle = [](auto f) {
    return [f](const CaseGeometry& g) -> Cell { return g.angles ? Cell(f(*g.angles)) : Cell(); };
  };
  auto ratio = [](std::optional<double> geometry::VesselRatios::*f) {
    return [f](const CaseGeometry& g) -> Cell { return g.ratios ? (*g.ratios).*f : Cell(); };
  };
  vessel("vessel_left_angle_deg", angle([](const geometry::AngleMeasure& a) { return a.left_angle_deg; }),
         "vessel_angles(annotation.vessel).left");
  vessel("vessel_right_angle_deg", angle([](const geometry::AngleMeasure& a) { return a.right_angle_deg; }),
         "vessel_angles(annotation.vessel).right");
  vessel("vessel_norm_left_angle", angle([](const geometry::AngleMeasure& a) { return a.normalized_left; }),
         "left angle / 180");
  vessel("vessel_norm_right_angle", angle([](const geometry::AngleMeasure& a) { return a.normalized_right; }),
         "right angle / 180");

  auto diam = [&](const std::string& name, std::optional<double> VesselAnnotation::*f) {
    b.add(name, ColumnKind::Numeric, Provenance::Imaging2D, Source::Manual, col_of([&](const CaseInputs& in) -> Cell {
            return (in.annotation && in.annotation->vessel) ? (*in.annotation->vessel).*f : Cell();
          }),
          "annotation.vessel." + name);
  };
  diam("parent_diam_mm", &VesselAnnotation::parent_diam_mm);
  diam("left_diam_mm", &VesselAnnotation::left_diam_mm);
  diam("right_diam_mm", &VesselAnnotation::right_diam_mm);
  vessel("larger_daughter_diam_mm", ratio(&geometry::VesselRatios::larger_daughter_mm), "max(left, right) diameter");
  vessel("ratio_left_parent", ratio(&geometry::VesselRatios::left_over_parent), "left / parent diameter");
  vessel("ratio_right_parent", ratio(&geometry::VesselRatios::right_over_parent), "right / parent diameter");
  vessel("ratio_larger_parent", ratio(&geometry::VesselRatios::larger_over_parent), "larger daughter / parent diameter");
  vessel("ratio_left_right", ratio(&geometry::VesselRatios::left_over_right), "left / right diameter");

  auto shape_col = [&](const std::string& name, Source src, auto getter) {
    const bool use_auto = src == Source::Automatic;
    b.add(name, ColumnKind::Numeric, Provenance::Imaging3D, src, col_of([&](const CaseInputs& in) -> Cell {
            if (!in.geometry) return std::nullopt;
            const auto& s = use_auto ? in.geometry->shape_auto : in.geometry->shape;
            return s ? Cell(getter(*s)) : Cell();
          }),
          use_auto ? "mesh_metrics(loft_mesh(mask_to_stack(sac mask)))." + name
                   : "mesh_metrics(loft_mesh(annotation.contour_stack_3d))." + name);
  };
  shape_col("volume_cm3", shape_source, [](const geometry::ShapeMetrics3D& s) { return s.volume_cm3; });
  shape_col("surface_cm2", shape_source, [](const geometry::ShapeMetrics3D& s) { return s.surface_cm2; });
  shape_col("nsi", Source::Manual, [](const geometry::ShapeMetrics3D& s) { return s.nsi; });
  shape_col("ipr", shape_source, [](const geometry::ShapeMetrics3D& s) { return s.ipr; });
}

BuiltMatrix assemble(const Dataset& data, Source automatic) {
  std::vector<const CohortEntry*> entries;
  for (const auto& e : data.cohort) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(),
            [](const CohortEntry* a, const CohortEntry* b) { return a->record.case_id < b->record.case_id; });

  std::vector<const ClinicalRecord*> records;
  std::vector<CaseInputs> inputs;
  std::vector<std::string> ids;
  std::vector<OcclusionLabel> labels;
  for (const auto* e : entries) {
    const auto& id = e->record.case_id;
    records.push_back(&e->record);
    CaseInputs in;
    if (auto it = data.annotations.find(id); it != data.annotations.end()) in.annotation = &it->second;
    if (auto it = data.geometry.find(id); it != data.geometry.end()) in.geometry = &it->second;
    inputs.push_back(in);
    ids.push_back(id);
    labels.push_back(e->label);
  }

  ColumnBuilder b;
  add_clinical(b, records);
  add_imaging(b, inputs, automatic, automatic);
  return {FeatureMatrix(std::move(b.infos), std::move(ids), std::move(b.values), std::move(labels)), std::move(b.audit)};
}

}  // namespace

BuiltMatrix full_matrix(const Dataset& data) { return assemble(data, Source::Manual); }

BuiltMatrix full_matrix_automatic(const Dataset& data) {
  auto built = assemble(data, Source::Automatic);
  bool any = false;
  for (const auto& name : automatic_columns()) {
    const auto col = built.matrix.column(*built.matrix.index_of(name));
    any = any || std::any_of(col.begin(), col.end(), [](const Cell& c) { return c.has_value(); });
  }
  if (!any) throw ValidationError("no case has automatically measured area, volume, surface or IPR");
  return built;
}

BuiltMatrix build_matrix(const Dataset& data, FeatureSetId set, const FeatureSelectionLists& selected) {
  const BuiltMatrix manual = full_matrix(data);
  const FeatureMatrix& m = manual.matrix;

  auto info_of = [&](const std::string& name) -> const ColumnInfo& {
    auto idx = m.index_of(name);
    if (!idx) throw ValidationError("unknown feature '" + name + "'");
    return m.columns()[*idx];
  };

  std::vector<std::string> names;
  auto push_unique = [&](const std::string& n) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  };

  if (set == FeatureSetId::A) {
    for (const auto& c : m.columns())
      if (c.provenance != Provenance::Imaging3D) names.push_back(c.name);
  } else {
    for (const auto& n : selected.clinical) {
      if (info_of(n).provenance != Provenance::Clinical)
        throw ValidationError("'" + n + "' is not a clinical feature");
      push_unique(n);
    }
    if (set != FeatureSetId::B) {
      for (const auto& n : selected.imaging) {
        if (info_of(n).provenance != Provenance::Imaging2D)
          throw ValidationError("'" + n + "' is not a 2D imaging feature");
        push_unique(n);
      }
    }
    if (set != FeatureSetId::B && set != FeatureSetId::C)
      for (const auto& n : imaging3d_columns()) push_unique(n);
    if (set == FeatureSetId::F || set == FeatureSetId::G)
      std::erase_if(names, [&](const std::string& n) { return info_of(n).provenance == Provenance::Clinical; });
  }

  BuiltMatrix out{m.select_columns(names), {}};
  for (const auto& n : names) out.audit[n] = manual.audit.at(n);

  if (set == FeatureSetId::E || set == FeatureSetId::G) {
    const BuiltMatrix automatic = full_matrix_automatic(data);
    std::vector<ColumnInfo> cols;
    std::vector<std::vector<Cell>> values;
    for (std::size_t j = 0; j < out.matrix.cols(); ++j) {
      const auto& name = out.matrix.columns()[j].name;
      const bool swap = std::find(automatic_columns().begin(), automatic_columns().end(), name) != automatic_columns().end();
      const FeatureMatrix& src = swap ? automatic.matrix : out.matrix;
      const std::size_t k = swap ? *automatic.matrix.index_of(name) : j;
      cols.push_back(src.columns()[k]);
      auto col = src.column(k);
      values.emplace_back(col.begin(), col.end());
      if (swap) out.audit[name] = automatic.audit.at(name);
    }
    out.matrix = FeatureMatrix(std::move(cols), out.matrix.case_ids(), std::move(values), out.matrix.labels());
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

std::string format_matrix_csv(const FeatureMatrix& matrix) {
  std::vector<std::string> header = {"case_id", "label"};
  std::vector<std::string> meta = {"#meta", ""};
  for (const auto& c : matrix.columns()) {
    header.push_back(c.name);
    meta.push_back(std::string(to_string(c.kind)) + "/" + std::string(to_string(c.provenance)) + "/" +
                   std::string(to_string(c.source)));
  }
  std::string out = csv::join(header) + "\n" + csv::join(meta) + "\n";
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::vector<std::string> row = {matrix.case_ids()[r], std::string(to_string(matrix.labels()[r]))};
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      const Cell& v = matrix.cell(r, c);
      if (!v) {
        row.emplace_back();
        continue;
      }
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, *v);
      row.emplace_back(buf, res.ptr);
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

FeatureMatrix parse_matrix_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.size() < 2) throw ParseError("feature matrix CSV needs a header and a #meta row");
  const auto& header = rows[0].fields;
  const auto& meta = rows[1].fields;
  if (header.size() < 2 || header[0] != "case_id" || header[1] != "label")
    throw ParseError("feature matrix header must start with case_id,label", rows[0].line);
  if (meta.size() != header.size() || meta[0] != "#meta") throw ParseError("malformed #meta row", rows[1].line);

  std::vector<ColumnInfo> cols;
  for (std::size_t c = 2; c < header.size(); ++c) {
    const std::string& m = meta[c];
    const auto s1 = m.find('/');
    const auto s2 = m.find('/', s1 == std::string::npos ? s1 : s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos) throw ParseError("malformed column metadata '" + m + "'", rows[1].line);
    auto kind = enum_from_string<ColumnKind>(m.substr(0, s1));
    auto prov = enum_from_string<Provenance>(m.substr(s1 + 1, s2 - s1 - 1));
    auto src = enum_from_string<Source>(m.substr(s2 + 1));
    if (!kind || !prov || !src) throw ParseError("unknown column metadata '" + m + "'", rows[1].line);
    cols.push_back({header[c], *kind, *prov, *src});
  }

  std::vector<std::string> ids;
  std::vector<OcclusionLabel> labels;
  std::vector<std::vector<Cell>> values(cols.size());
  for (std::size_t r = 2; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != header.size()) throw ParseError("wrong number of fields", rows[r].line);
    ids.push_back(f[0]);
    auto label = enum_from_string<OcclusionLabel>(f[1]);
    if (!label) throw ParseError("unknown label '" + f[1] + "'", rows[r].line);
    labels.push_back(*label);
    for (std::size_t c = 2; c < f.size(); ++c) {
      if (f[c].empty()) {
        values[c - 2].emplace_back();
        continue;
      }
      double v = 0.0;
      auto res = std::from_chars(f[c].data(), f[c].data() + f[c].size(), v);
      if (res.ec != std::errc{} || res.ptr != f[c].data() + f[c].size())
        throw ParseError("not a number: '" + f[c] + "'", rows[r].line);
      values[c - 2].push_back(v);
    }
  }
  return FeatureMatrix(std::move(cols), std::move(ids), std::move(values), std::move(labels));
}

}  // namespace aok::features
