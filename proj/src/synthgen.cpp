#include "aok/synthgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "aok/learners.hpp"
#include "json.hpp"

namespace aok::synthgen {

namespace fs = std::filesystem;
using nlohmann::json;
using Rng = std::mt19937_64;

namespace {

constexpr double kPi = std::numbers::pi;

struct Trait {
  const char* name;
  double mean;
  double sd;
  double lo;  // clamp range keeps every draw physically valid
  double hi;
};

// clang-format off
constexpr Trait kTraits[] = {
    {"age",              58.0, 12.0, 18.0,  95.0},
    {"height_cm",       167.0,  9.0, 130.0, 210.0},
    {"weight_kg",        77.0, 15.0, 35.0, 180.0},
    {"sac_width_mm",      6.5,  1.6,  2.0,  20.0},
    {"sac_elongation",    1.15, 0.15, 0.6,   2.5},
    {"sac_lobulation",    0.10, 0.05, 0.0,   0.35},
    {"neck_mm",           4.0,  1.0,  1.0,  12.0},
    {"parent_diam_mm",    3.0,  0.4,  1.0,   6.0},
    {"daughter_diam_mm",  2.2,  0.35, 0.8,   5.0},
    {"left_angle_deg",  115.0, 20.0, 40.0, 178.0},
    {"right_angle_deg", 115.0, 20.0, 40.0, 178.0},
};
// clang-format on

const std::map<std::string, std::pair<double, double>>& default_prevalences() {
  static const std::map<std::string, std::pair<double, double>> m = {
      {"Hypertension", {0.55, 0.55}},
      {"Coronary Artery Disease", {0.12, 0.12}},
      {"Arrhythmia", {0.10, 0.10}},
      {"Migraines", {0.30, 0.30}},
  };
  return m;
}

template <class T>
const T& pick(Rng& rng, std::span<const T> items, std::span<const double> weights) {
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return items[d(rng)];
}

bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

double normal(Rng& rng, double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); }

// Runs fn(i) for i in [0, n) on a few threads; callers write only slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  if (workers == 1 || n < 8) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Sac model: ellipsoid with semi-axes (a, b, c) whose horizontal cross
// sections carry `lobes` radial lobes of relative depth `lobulation`.
// ---------------------------------------------------------------------------

struct Sac {
  double a, b, c;
  double lobulation;
  int lobes = 5;

  double ring_radius(double z, double theta) const {
    const double s2 = 1.0 - (z / c) * (z / c);
    if (s2 <= 0.0) return 0.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double re = a * b / std::sqrt(b * b * ct * ct + a * a * st * st);
    return std::sqrt(s2) * re * (1.0 + lobulation * std::cos(lobes * theta));
  }
  bool inside(double x, double y, double z) const {
    if (std::abs(z) >= c) return false;
    return std::hypot(x, y) <= ring_radius(z, std::atan2(y, x));
  }
};

std::vector<Point2> ellipse_points(double rx, double ry, int n, double cx = 0.0, double cy = 0.0) {
  std::vector<Point2> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    pts[static_cast<std::size_t>(i)] = {cx + rx * std::cos(t), cy + ry * std::sin(t)};
  }
  return pts;
}

// Cell-centred slices over (-c, c).
ContourStack3D sac_stack(const Sac& sac, int samples) {
  const int n = std::max(8, static_cast<int>(std::lround(2.0 * sac.c / 0.5)));
  std::vector<ContourStack3D::Slice> slices;
  for (int i = 0; i < n; ++i) {
    const double z = -sac.c + (i + 0.5) * 2.0 * sac.c / n;
    std::vector<Point2> pts(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * kPi * k / samples;
      const double r = sac.ring_radius(z, t);
      pts[static_cast<std::size_t>(k)] = {r * std::cos(t), r * std::sin(t)};
    }
    slices.push_back({z, Contour2D(std::move(pts))});
  }
  return ContourStack3D(std::move(slices));
}

std::size_t grid_cells(double extent, double spacing, int margin) {
  return static_cast<std::size_t>(std::ceil(extent / spacing - 1e-9)) + 2 * static_cast<std::size_t>(margin);
}

double cell_centre(std::size_t i, std::size_t n, double s) {
  return (static_cast<double>(i) + 0.5) * s - static_cast<double>(n) * s / 2.0;
}

template <class Inside>
Mask3D rasterize3d(std::array<double, 3> extent, double s, int margin, Inside inside) {
  const std::array<std::size_t, 3> dims = {grid_cells(extent[0], s, margin), grid_cells(extent[1], s, margin),
                                           grid_cells(extent[2], s, margin)};
  std::vector<std::uint8_t> vox(dims[0] * dims[1] * dims[2], 0);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dims[2]; ++k)
    for (std::size_t j = 0; j < dims[1]; ++j)
      for (std::size_t i = 0; i < dims[0]; ++i, ++idx)
        vox[idx] = inside(cell_centre(i, dims[0], s), cell_centre(j, dims[1], s), cell_centre(k, dims[2], s)) ? 1 : 0;
  return Mask3D(dims, {s, s, s}, std::move(vox));
}

template <class Inside>
Mask2D rasterize2d(std::array<double, 2> extent, double s, int margin, Inside inside) {
  const std::array<std::size_t, 2> dims = {grid_cells(extent[0], s, margin), grid_cells(extent[1], s, margin)};
  std::vector<std::uint8_t> px(dims[0] * dims[1], 0);
  std::size_t idx = 0;
  for (std::size_t j = 0; j < dims[1]; ++j)
    for (std::size_t i = 0; i < dims[0]; ++i, ++idx)
      px[idx] = inside(cell_centre(i, dims[0], s), cell_centre(j, dims[1], s)) ? 1 : 0;
  return Mask2D(dims, {s, s}, std::move(px));
}

Mask2D ellipse_mask(double rx, double ry, double s) {
  return rasterize2d({2 * rx, 2 * ry}, s, 2,
                     [&](double x, double y) { return (x / rx) * (x / rx) + (y / ry) * (y / ry) <= 1.0; });
}

// ---------------------------------------------------------------------------
// Devices: a grid of barrel sizes; volume of an ellipsoidal barrel.
// ---------------------------------------------------------------------------

io::DeviceCatalog device_catalog() {
  io::DeviceCatalog cat;
  for (int d = 4; d <= 11; ++d)
    for (int h = 3; h < d; ++h) {
      char name[32];
      std::snprintf(name, sizeof name, "WEB %dx%d", d, h);
      cat.expanded_volume_cm3[name] = ellipsoid_volume(d / 2.0, d / 2.0, h / 2.0) / 1000.0;
    }
  return cat;
}

std::string nearest_device(const io::DeviceCatalog& cat, double volume_cm3) {
  std::string best;
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& [name, v] : cat.expanded_volume_cm3)
    if (std::abs(v - volume_cm3) < gap) gap = std::abs(v - volume_cm3), best = name;
  return best;
}

struct CaseOut {
  CohortEntry entry;
  io::AnnotationBundle bundle;
  features::CaseMasks masks;
};

// Cohort-level draws with exact counts, fixed before the per-case streams.
struct Assignment {
  std::set<std::string> conditions;
  bool has_stack = false;
  bool lateral = true;
};

// round(p * n) of `idx`, chosen uniformly at random.
std::vector<std::size_t> choose(Rng& rng, std::vector<std::size_t> idx, double p) {
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(std::lround(p * static_cast<double>(idx.size()))));
  return idx;
}

std::vector<Assignment> assign(const CohortSpec& spec, const std::map<std::string, std::pair<double, double>>& prevalences,
                               const std::vector<OcclusionLabel>& labels, Rng& rng) {
  std::vector<Assignment> out(labels.size());
  std::vector<std::size_t> all(labels.size()), co, po;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    all[i] = i;
    (labels[i] == OcclusionLabel::CompleteOcclusion ? co : po).push_back(i);
  }
  for (const auto& [cond, p] : prevalences) {
    for (auto i : choose(rng, co, p.first)) out[i].conditions.insert(cond);
    for (auto i : choose(rng, po, p.second)) out[i].conditions.insert(cond);
  }
  for (auto i : choose(rng, all, spec.stack_fraction)) out[i].has_stack = true;
  for (auto i : choose(rng, all, spec.lateral_missing_fraction)) out[i].lateral = false;
  return out;
}

CaseOut gen_case(const CohortSpec& spec, const Assignment& assigned, const io::DeviceCatalog& devices,
                 const std::string& id, OcclusionLabel label, std::uint64_t seed) {
  Rng rng(seed);
  const bool co = label == OcclusionLabel::CompleteOcclusion;
  auto drop = [&] { return spec.missing_rate > 0.0 && chance(rng, spec.missing_rate); };
  auto keep = [&](auto value) -> std::optional<decltype(value)> {
    if (drop()) return std::nullopt;
    return value;
  };

  std::map<std::string, double> t;
  for (const auto& tr : kTraits) {
    auto it = spec.effect_sizes.find(tr.name);
    const double d = it == spec.effect_sizes.end() ? 0.0 : it->second;
    const double shift = (co ? 0.5 : -0.5) * d * tr.sd;
    t[tr.name] = std::clamp(normal(rng, tr.mean + shift, tr.sd), tr.lo, tr.hi);
  }

  CaseOut out;
  auto& r = out.entry.record;
  r.case_id = id;
  out.entry.label = label;

  static constexpr std::array<Gender, 2> genders = {Gender::Male, Gender::Female};
  static constexpr std::array<double, 2> gender_w = {0.3, 0.7};
  static const std::array<std::string, 4> races = {"White", "Black", "Asian", "Other"};
  static constexpr std::array<double, 4> race_w = {0.70, 0.15, 0.10, 0.05};
  static constexpr std::array<AneurysmLocation, 4> locations = {AneurysmLocation::ACommA, AneurysmLocation::Basilar,
                                                                AneurysmLocation::ICATerminus,
                                                                AneurysmLocation::MCABifurcation};
  static constexpr std::array<double, 4> location_w = {0.35, 0.20, 0.15, 0.30};

  const auto location = pick<AneurysmLocation>(rng, locations, location_w);
  const Side side = (location == AneurysmLocation::ACommA || location == AneurysmLocation::Basilar)
                        ? Side::Midline
                        : (chance(rng, 0.5) ? Side::Left : Side::Right);
  const bool ruptured = chance(rng, 0.1);
  r.age = keep(std::round(t["age"]));
  r.gender = keep(pick<Gender>(rng, genders, gender_w));
  r.height_cm = keep(std::round(t["height_cm"] * 10.0) / 10.0);
  r.weight_kg = keep(std::round(t["weight_kg"] * 10.0) / 10.0);
  r.race = keep(pick<std::string>(rng, races, race_w));
  r.aneurysm_location = keep(location);
  r.side = keep(side);
  r.rupture_status = keep(ruptured ? RuptureStatus::Ruptured : RuptureStatus::Unruptured);
  r.detection = keep(chance(rng, 0.6) ? Detection::Incidental : Detection::Symptomatic);
  r.hunt_hess = keep(ruptured ? std::uniform_int_distribution<int>(1, 4)(rng) : 0);
  r.nihss = keep(std::poisson_distribution<int>(0.3)(rng));
  r.mrs = keep(std::uniform_int_distribution<int>(0, 2)(rng));
  r.smoking_history = keep(chance(rng, 0.4));
  r.substance_abuse = keep(chance(rng, 0.1));
  r.conditions = assigned.conditions;
  for (const char* a : {"Penicillin", "Sulfa", "Iodine contrast"})
    if (chance(rng, 0.15)) r.allergies.emplace_back(a);
  for (const char* m : {"Aspirin", "Statin", "Lisinopril"})
    if (chance(rng, 0.3)) r.medications.emplace_back(m);

  // Sac geometry.
  Sac sac;
  sac.a = t["sac_width_mm"] / 2.0;
  sac.b = sac.a * std::clamp(normal(rng, 1.0, 0.08), 0.75, 1.25);
  sac.c = sac.a * t["sac_elongation"];
  sac.lobulation = t["sac_lobulation"];

  auto& bundle = out.bundle;
  bundle.case_id = id;
  auto noisy = [&](double v) { return std::max(0.1, v * (1.0 + normal(rng, 0.0, 0.03))); };
  const double neck = std::min(t["neck_mm"], 1.8 * std::min(sac.a, sac.b));
  Measurement2D ap{View::AP, keep(noisy(2 * sac.c)), keep(noisy(2 * sac.a)), keep(noisy(1.7 * sac.a)),
                   keep(noisy(neck))};
  bundle.ap = ap;
  const bool lateral = assigned.lateral;
  if (lateral)
    bundle.lateral = Measurement2D{View::Lateral, keep(noisy(2 * sac.c)), keep(noisy(2 * sac.b)),
                                   keep(noisy(1.7 * sac.b)), keep(noisy(neck))};

  // Vessels: bifurcation near the origin, parent running down the y axis,
  // daughters rotated by their angle from the parent direction.
  const double la = t["left_angle_deg"] * kPi / 180.0, ra = t["right_angle_deg"] * kPi / 180.0;
  auto jitter = [&] { return Point2{normal(rng, 0.0, 0.3), normal(rng, 0.0, 0.3)}; };
  VesselAnnotation v;
  v.parent = {jitter(), {0.0, -12.0}};
  v.left = {jitter(), {-10.0 * std::sin(la), -10.0 * std::cos(la)}};
  v.right = {jitter(), {10.0 * std::sin(ra), -10.0 * std::cos(ra)}};
  v.parent_diam_mm = keep(t["parent_diam_mm"]);
  v.left_diam_mm = keep(t["daughter_diam_mm"] * std::clamp(normal(rng, 1.0, 0.1), 0.6, 1.4));
  v.right_diam_mm = keep(t["daughter_diam_mm"] * std::clamp(normal(rng, 1.0, 0.1), 0.6, 1.4));
  bundle.vessel = v;

  // 2D contours in pixels of 0.2 mm.
  constexpr double px = 0.2;
  if (!drop()) bundle.contour_ap = io::ContourAnnotation{Contour2D(ellipse_points(sac.a / px, sac.c / px, 48)), {px, px}};
  if (lateral && !drop())
    bundle.contour_lateral = io::ContourAnnotation{Contour2D(ellipse_points(sac.b / px, sac.c / px, 48)), {px, px}};

  const bool has_stack = assigned.has_stack;
  if (has_stack) bundle.stack = sac_stack(sac, 48);

  const double sac_volume_cm3 = ellipsoid_volume(sac.a, sac.b, sac.c) / 1000.0;
  bundle.device_model = nearest_device(devices, sac_volume_cm3 * std::uniform_real_distribution<double>(0.7, 1.1)(rng));

  if (spec.with_masks) {
    const double s = spec.mask_spacing_mm;
    out.masks.ap = ellipse_mask(sac.a, sac.c, s);
    if (lateral) out.masks.lateral = ellipse_mask(sac.b, sac.c, s);
    if (has_stack) {
      const double rx = sac.a * (1.0 + sac.lobulation), ry = sac.b * (1.0 + sac.lobulation);
      out.masks.sac = rasterize3d({2 * rx, 2 * ry, 2 * sac.c}, s, 2,
                                  [&](double x, double y, double z) { return sac.inside(x, y, z); });
    }
  }
  return out;
}

std::string case_id(std::size_t i, std::size_t n) {
  const int width = std::max(3, static_cast<int>(std::to_string(n).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, i + 1);
  return buf;
}

}  // namespace

const std::vector<std::string>& trait_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& t : kTraits) v.emplace_back(t.name);
    return v;
  }();
  return names;
}

void validate(const CohortSpec& spec) {
  if (spec.n_co < 1 || spec.n_po < 1) throw ValidationError("cohort spec: n_co and n_po must be >= 1");
  auto rate = [](const char* what, double v) {
    if (!(v >= 0.0 && v < 1.0)) throw ValidationError(std::string("cohort spec: ") + what + " must lie in [0, 1)");
  };
  rate("missing_rate", spec.missing_rate);
  rate("lateral_missing_fraction", spec.lateral_missing_fraction);
  if (!(spec.stack_fraction >= 0.0 && spec.stack_fraction <= 1.0))
    throw ValidationError("cohort spec: stack_fraction must lie in [0, 1]");
  for (const auto& [name, d] : spec.effect_sizes) {
    if (std::find(trait_names().begin(), trait_names().end(), name) == trait_names().end())
      throw ValidationError("cohort spec: unknown trait '" + name + "' in effect_sizes");
    if (!std::isfinite(d)) throw ValidationError("cohort spec: effect size of '" + name + "' is not finite");
  }
  for (const auto& [cond, p] : spec.condition_prevalences) {
    if (!ConditionVocabulary::builtin().contains(cond))
      throw ValidationError("cohort spec: unknown condition '" + cond + "'");
    if (!(p.first >= 0.0 && p.first <= 1.0 && p.second >= 0.0 && p.second <= 1.0))
      throw ValidationError("cohort spec: prevalence of '" + cond + "' outside [0, 1]");
  }
  if (spec.with_masks && !(spec.mask_spacing_mm > 0.0))
    throw ValidationError("cohort spec: mask_spacing_mm must be > 0");
}

CohortSpec parse_cohort_spec(std::string_view text) {
  static const std::set<std::string> known = {"n_co",           "n_po",
                                              "effect_sizes",   "missing_rate",
                                              "condition_prevalences", "seed",
                                              "stack_fraction", "lateral_missing_fraction",
                                              "with_masks",     "mask_spacing_mm"};
  CohortSpec spec;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw ParseError("cohort spec: expected a JSON object");
    for (const auto& [key, _] : doc.items())
      if (!known.contains(key)) throw ParseError("cohort spec: unknown key '" + key + "'");
    spec.n_co = doc.value("n_co", spec.n_co);
    spec.n_po = doc.value("n_po", spec.n_po);
    if (doc.contains("effect_sizes")) spec.effect_sizes = doc.at("effect_sizes").get<std::map<std::string, double>>();
    spec.missing_rate = doc.value("missing_rate", spec.missing_rate);
    if (doc.contains("condition_prevalences"))
      for (const auto& [cond, p] : doc.at("condition_prevalences").items()) {
        const auto v = p.get<std::vector<double>>();
        if (v.size() != 2) throw ParseError("cohort spec: prevalence of '" + cond + "' must be [p_co, p_po]");
        spec.condition_prevalences[cond] = {v[0], v[1]};
      }
    spec.seed = doc.value("seed", spec.seed);
    spec.stack_fraction = doc.value("stack_fraction", spec.stack_fraction);
    spec.lateral_missing_fraction = doc.value("lateral_missing_fraction", spec.lateral_missing_fraction);
    spec.with_masks = doc.value("with_masks", spec.with_masks);
    spec.mask_spacing_mm = doc.value("mask_spacing_mm", spec.mask_spacing_mm);
  } catch (const json::exception& e) {
    throw ParseError(std::string("cohort spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::string format_cohort_spec(const CohortSpec& spec) {
  json prev = json::object();
  for (const auto& [c, p] : spec.condition_prevalences) prev[c] = {p.first, p.second};
  json doc = {{"n_co", spec.n_co},
              {"n_po", spec.n_po},
              {"effect_sizes", spec.effect_sizes},
              {"missing_rate", spec.missing_rate},
              {"condition_prevalences", prev},
              {"seed", spec.seed},
              {"stack_fraction", spec.stack_fraction},
              {"lateral_missing_fraction", spec.lateral_missing_fraction},
              {"with_masks", spec.with_masks},
              {"mask_spacing_mm", spec.mask_spacing_mm}};
  return doc.dump(2) + "\n";
}

SyntheticCohort gen_cohort(const CohortSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n_co + spec.n_po;
  std::vector<OcclusionLabel> labels(spec.n_co, OcclusionLabel::CompleteOcclusion);
  labels.resize(n, OcclusionLabel::PartialOcclusion);
  Rng master(spec.seed);
  std::shuffle(labels.begin(), labels.end(), master);

  SyntheticCohort out;
  out.devices = device_catalog();
  for (const auto& name : trait_names()) {
    auto it = spec.effect_sizes.find(name);
    out.effects[name] = it == spec.effect_sizes.end() ? 0.0 : it->second;
  }
  const auto& prevalences = spec.condition_prevalences.empty() ? default_prevalences() : spec.condition_prevalences;
  const auto assigned = assign(spec, prevalences, labels, master);

  std::vector<CaseOut> cases(n);
  parallel_for(n, [&](std::size_t i) {
    cases[i] = gen_case(spec, assigned[i], out.devices, case_id(i, n), labels[i], learners::derive_seed(spec.seed, i + 1));
  });
  for (auto& c : cases) {
    const std::string id = c.entry.record.case_id;
    out.cohort.push_back(std::move(c.entry));
    out.annotations.emplace(id, std::move(c.bundle));
    if (spec.with_masks) out.masks.emplace(id, std::move(c.masks));
  }
  return out;
}

void write_dataset(const fs::path& dir, const SyntheticCohort& data, const CohortSpec& spec) {
  fs::create_directories(dir);
  io::write_cohort(dir / "cohort.csv", data.cohort);
  for (const auto& [id, bundle] : data.annotations) io::write_annotation(dir / "annotations" / (id + ".json"), bundle);
  if (spec.with_masks) {
    fs::create_directories(dir / "masks");
    for (const auto& [id, m] : data.masks) {
      if (m.ap) io::write_mask2d(dir / "masks" / (id + "_AP.pgm"), *m.ap);
      if (m.lateral) io::write_mask2d(dir / "masks" / (id + "_Lateral.pgm"), *m.lateral);
      if (m.sac) io::write_mask3d(dir / "masks" / (id + "_sac.raw"), *m.sac);
    }
  }
  io::write_device_catalog(dir / "devices.json", data.devices);
  io::write_text(dir / "truth.json", json{{"effects", data.effects}}.dump(2) + "\n");
  io::write_text(dir / "spec.json", format_cohort_spec(spec));

  std::vector<std::string> sets = {"A", "B", "C", "D", "F"};
  if (spec.with_masks) sets = {"A", "B", "C", "D", "E", "F", "G"};
  json run = {{"cohort", "cohort.csv"},
              {"annotations", "annotations"},
              {"devices", "devices.json"},
              {"sets", sets},
              {"seed", spec.seed},
              {"out", "out"}};
  if (spec.with_masks) run["masks"] = "masks";
  io::write_text(dir / "run.json", run.dump(2) + "\n");
}

Cohort prevalence_fixture() {
  Cohort cohort;
  for (std::size_t i = 0; i < 81; ++i) {
    CohortEntry e;
    e.record.case_id = case_id(i, 81);
    const bool co = i < 49;
    e.label = co ? OcclusionLabel::CompleteOcclusion : OcclusionLabel::PartialOcclusion;
    const std::size_t k = co ? i : i - 49;  // index within the class
    if (k < (co ? 28u : 19u)) e.record.conditions.insert("Hypertension");
    // Migraines on the last cases of each class so the two overlap only partly.
    const std::size_t class_n = co ? 49 : 32;
    if (k >= class_n - (co ? 28u : 14u)) e.record.conditions.insert("Migraines");
    cohort.push_back(std::move(e));
  }
  return cohort;
}

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

double ellipsoid_volume(double a, double b, double c) { return 4.0 / 3.0 * kPi * a * b * c; }

double ellipsoid_surface_thomsen(double a, double b, double c) {
  constexpr double p = 1.6075;
  const double ap = std::pow(a, p), bp = std::pow(b, p), cp = std::pow(c, p);
  return 4.0 * kPi * std::pow((ap * bp + ap * cp + bp * cp) / 3.0, 1.0 / p);
}

namespace {

// Sphere of radius r whose radius along unit direction u is scaled by
// 1 + amplitude * g(u), g a normalized sum of three random plane waves.
struct Blob {
  double r;
  double amplitude;
  std::array<std::array<double, 3>, 3> dirs{};
  std::array<double, 3> freq{}, phase{}, weight{};

  Blob(double radius, double amp, std::uint64_t seed) : r(radius), amplitude(amp) {
    Rng rng(seed);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> uf(1.5, 3.0), uphase(0.0, 2.0 * kPi), uw(0.5, 1.0);
    double wsum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      double x = n01(rng), y = n01(rng), z = n01(rng);
      const double len = std::sqrt(x * x + y * y + z * z);
      dirs[k] = {x / len, y / len, z / len};
      freq[k] = uf(rng);
      phase[k] = uphase(rng);
      weight[k] = uw(rng);
      wsum += weight[k];
    }
    for (auto& w : weight) w /= wsum;
  }

  double radius_along(double ux, double uy, double uz) const {
    double g = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
      g += weight[k] * std::sin(freq[k] * (ux * dirs[k][0] + uy * dirs[k][1] + uz * dirs[k][2]) + phase[k]);
    return r * (1.0 + amplitude * g);
  }
  bool inside(double x, double y, double z) const {
    const double d = std::sqrt(x * x + y * y + z * z);
    if (d == 0.0) return true;
    return d <= radius_along(x / d, y / d, z / d);
  }
  double outer() const { return r * (1.0 + amplitude); }
};

// Boundary along a ray from (cx, cy, z) by bisection; assumes the start is inside.
double ray_boundary(const Blob& blob, double z, double dx, double dy) {
  double lo = 0.0, hi = blob.outer() * 1.01;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (blob.inside(mid * dx, mid * dy, z) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<Point2> rectangle(double sx, double sy) {
  return {{-sx / 2, -sy / 2}, {sx / 2, -sy / 2}, {sx / 2, sy / 2}, {-sx / 2, sy / 2}};
}

}  // namespace

GeneratedShape gen_shape(ShapeKind kind, const ShapeParams& params, ShapeOutput output, const ShapeResolution& res) {
  std::array<double, 3> semi{};  // half extents
  switch (kind) {
    case ShapeKind::Sphere:
    case ShapeKind::Blob: semi = {params.size[0], params.size[0], params.size[0]}; break;
    case ShapeKind::Ellipsoid: semi = params.size; break;
    case ShapeKind::Prism: semi = {params.size[0] / 2, params.size[1] / 2, params.size[2] / 2}; break;
  }
  for (double v : semi)
    if (!(std::isfinite(v) && v > 0.0)) throw ValidationError("gen_shape: dimensions must be positive");
  if (kind == ShapeKind::Blob && !(params.blob_amplitude >= 0.0 && params.blob_amplitude < 0.5))
    throw ValidationError("gen_shape: blob amplitude must lie in [0, 0.5)");

  // Smallest radius; for a prism the smallest edge is what must be resolved.
  double r_min = std::min({semi[0], semi[1], semi[2]});
  if (kind == ShapeKind::Prism) r_min *= 2.0;
  if (kind == ShapeKind::Blob) r_min *= 1.0 - params.blob_amplitude;

  GeneratedShape out;
  switch (kind) {
    case ShapeKind::Sphere:
      out.truth.volume_mm3 = 4.0 / 3.0 * kPi * std::pow(semi[0], 3);
      out.truth.surface_mm2 = 4.0 * kPi * semi[0] * semi[0];
      break;
    case ShapeKind::Ellipsoid:
      out.truth.volume_mm3 = ellipsoid_volume(semi[0], semi[1], semi[2]);
      out.truth.surface_mm2 = ellipsoid_surface_thomsen(semi[0], semi[1], semi[2]);
      out.truth.surface_approximate = !(semi[0] == semi[1] && semi[1] == semi[2]);
      break;
    case ShapeKind::Prism: {
      const auto& e = params.size;
      out.truth.volume_mm3 = e[0] * e[1] * e[2];
      out.truth.surface_mm2 = 2.0 * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2]);
      break;
    }
    case ShapeKind::Blob: break;
  }

  const Blob blob(semi[0], params.blob_amplitude, params.seed);
  auto inside = [&](double x, double y, double z) {
    switch (kind) {
      case ShapeKind::Sphere:
      case ShapeKind::Ellipsoid:
        return (x / semi[0]) * (x / semi[0]) + (y / semi[1]) * (y / semi[1]) + (z / semi[2]) * (z / semi[2]) <= 1.0;
      case ShapeKind::Prism: return std::abs(x) <= semi[0] && std::abs(y) <= semi[1] && std::abs(z) <= semi[2];
      case ShapeKind::Blob: return blob.inside(x, y, z);
    }
    return false;
  };
  // Blob extent is bounded by its outer radius.
  std::array<double, 3> extent = {2 * semi[0], 2 * semi[1], 2 * semi[2]};
  if (kind == ShapeKind::Blob) extent.fill(2 * blob.outer());

  switch (output) {
    case ShapeOutput::Stack: {
      if (res.ring_samples < 8) throw ValidationError("gen_shape: need at least 8 ring samples");
      std::vector<ContourStack3D::Slice> slices;
      if (kind == ShapeKind::Prism) {
        if (res.slices < 2) throw ValidationError("gen_shape: a prism stack needs at least 2 slices");
        for (int i = 0; i < res.slices; ++i)
          slices.push_back({-semi[2] + 2.0 * semi[2] * i / (res.slices - 1),
                            Contour2D(rectangle(params.size[0], params.size[1]))});
      } else {
        const double z_half = extent[2] / 2.0;
        if (res.slices * r_min / (2.0 * z_half) < 8.0)
          throw ValidationError("gen_shape: fewer than 8 slices across the smallest radius");
        for (int i = 0; i < res.slices; ++i) {
          const double z = -z_half + (i + 0.5) * 2.0 * z_half / res.slices;
          std::vector<Point2> pts;
          if (kind == ShapeKind::Blob) {
            if (!blob.inside(0.0, 0.0, z)) continue;
            for (int k = 0; k < res.ring_samples; ++k) {
              const double t = 2.0 * kPi * k / res.ring_samples;
              const double rho = ray_boundary(blob, z, std::cos(t), std::sin(t));
              pts.push_back({rho * std::cos(t), rho * std::sin(t)});
            }
          } else {
            const double s = std::sqrt(std::max(0.0, 1.0 - (z / semi[2]) * (z / semi[2])));
            pts = ellipse_points(semi[0] * s, semi[1] * s, res.ring_samples);
          }
          slices.push_back({z, Contour2D(std::move(pts))});
        }
      }
      out.stack = ContourStack3D(std::move(slices));
      break;
    }
    case ShapeOutput::Mask3D:
    case ShapeOutput::Mask2D: {
      if (!(res.spacing_mm > 0.0)) throw ValidationError("gen_shape: spacing must be > 0");
      if (r_min / res.spacing_mm < 8.0)
        throw ValidationError("gen_shape: fewer than 8 voxels across the smallest radius");
      if (output == ShapeOutput::Mask3D)
        out.mask3d = rasterize3d(extent, res.spacing_mm, res.margin, inside);
      else
        out.mask2d = rasterize2d({extent[0], extent[1]}, res.spacing_mm, res.margin,
                                 [&](double x, double y) { return inside(x, y, 0.0); });
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation corpus
// ---------------------------------------------------------------------------

namespace {

// Separable Gaussian blur of a float volume in place; dims of size 1 are skipped.
void gaussian_blur(std::vector<double>& v, const std::array<std::size_t, 3>& dims, double sigma) {
  if (!(sigma > 0.0)) return;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i)
    ksum += kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& k : kernel) k /= ksum;

  const std::array<std::size_t, 3> stride = {1, dims[0], dims[0] * dims[1]};
  std::vector<double> tmp(v.size());
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (dims[axis] == 1) continue;
    const auto n = static_cast<long>(dims[axis]);
    for (std::size_t idx = 0; idx < v.size(); ++idx) {
      const auto pos = static_cast<long>((idx / stride[axis]) % dims[axis]);
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const long q = std::clamp(pos + k, 0L, n - 1);  // edge replicate
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               v[idx + static_cast<std::size_t>(q - pos) * stride[axis]];
      }
      tmp[idx] = acc;
    }
    v.swap(tmp);
  }
}

}  // namespace

io::SegManifest gen_seg_corpus(const fs::path& dir, const SegCorpusSpec& spec) {
  if (spec.n_cases < 1 || spec.size < 16 || spec.folds < 1 || !(spec.spacing_mm > 0.0))
    throw ValidationError("seg corpus: need n_cases >= 1, size >= 16, folds >= 1 and positive spacing");
  const bool three_d = spec.task == SegTask::Seg3D;
  const std::array<std::size_t, 3> dims = {spec.size, spec.size, three_d ? spec.size : 1};
  const std::size_t total = dims[0] * dims[1] * dims[2];
  const double s = spec.spacing_mm;
  const double half = static_cast<double>(spec.size) * s / 2.0;

  io::SegManifest manifest;
  manifest.base_dir = dir;
  manifest.cases.resize(spec.n_cases);
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  parallel_for(spec.n_cases, [&](std::size_t i) {
    Rng rng(learners::derive_seed(spec.seed, i + 1));
    std::uniform_real_distribution<double> ur(0.18 * half * 2, 0.30 * half * 2), uc(-0.1 * half, 0.1 * half);
    const double radius = ur(rng);
    const Blob blob(radius, 0.2, rng());
    const double cx = uc(rng), cy = uc(rng), cz = three_d ? uc(rng) : 0.0;
    const bool empty = spec.include_empty && i == 0;

    std::vector<std::uint8_t> mask(total, 0);
    std::vector<double> image(total);
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims[2]; ++k)
      for (std::size_t j = 0; j < dims[1]; ++j)
        for (std::size_t x = 0; x < dims[0]; ++x, ++idx) {
          const double px = cell_centre(x, dims[0], s) - cx, py = cell_centre(j, dims[1], s) - cy;
          const double pz = three_d ? cell_centre(k, dims[2], s) - cz : 0.0;
          mask[idx] = !empty && blob.inside(px, py, pz) ? 1 : 0;
          image[idx] = 40.0 + 160.0 * mask[idx];
        }
    gaussian_blur(image, dims, spec.blur_sigma_px);
    std::normal_distribution<double> noise(0.0, spec.noise_sd);
    std::vector<std::uint8_t> pixels(total);
    for (std::size_t p = 0; p < total; ++p)
      pixels[p] = static_cast<std::uint8_t>(std::clamp(std::lround(image[p] + noise(rng)), 0L, 255L));

    char id[32];
    std::snprintf(id, sizeof id, "blob%03zu", i + 1);
    auto& c = manifest.cases[i];
    c.case_id = id;
    c.split = "fold-" + std::to_string(i % static_cast<std::size_t>(spec.folds));
    if (three_d) {
      c.image = fs::path("images") / (c.case_id + ".raw");
      c.mask_gt = fs::path("masks") / (c.case_id + ".raw");
      io::write_image3d(dir / c.image, io::GrayImage3D{dims, {s, s, s}, pixels});
      io::write_mask3d(dir / c.mask_gt, Mask3D(dims, {s, s, s}, mask));
    } else {
      c.image = fs::path("images") / (c.case_id + ".pgm");
      c.mask_gt = fs::path("masks") / (c.case_id + ".pgm");
      io::write_image2d(dir / c.image, io::GrayImage2D{{dims[0], dims[1]}, {s, s}, pixels});
      io::write_mask2d(dir / c.mask_gt, Mask2D({dims[0], dims[1]}, {s, s}, mask));
    }
  });
  io::write_manifest(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace aok::synthgen
