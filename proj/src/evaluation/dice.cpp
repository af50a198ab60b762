#include <algorithm>
#include <cmath>

#include "aok/evaluation.hpp"
#include "aok/simd/kernels.hpp"

namespace aok::evaluation {

namespace {

template <std::size_t Rank>
double dice_impl(const Mask<Rank>& a, const Mask<Rank>& b, const DiceOptions& opt) {
  if (a.dims() != b.dims()) throw ValidationError("dice: mask dimensions differ");
  if (a.spacing() != b.spacing()) throw ValidationError("dice: mask spacings differ");
  const auto na = simd::count_nonzero(a.voxels());
  const auto nb = simd::count_nonzero(b.voxels());
  if (na + nb == 0) return opt.both_empty;
  const auto both = simd::count_overlap(a.voxels(), b.voxels());
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

}  // namespace

double dice(const Mask2D& a, const Mask2D& b, const DiceOptions& opt) { return dice_impl(a, b, opt); }
double dice(const Mask3D& a, const Mask3D& b, const DiceOptions& opt) { return dice_impl(a, b, opt); }

DiceResult dice_summary(std::span<const double> per_case) {
  if (per_case.empty()) throw ValidationError("dice_summary: no cases");
  DiceResult r;
  r.per_case.assign(per_case.begin(), per_case.end());
  const auto s = summarize(per_case);
  r.mean = s.mean;
  r.sd = s.sd;
  const double half = 1.96 * s.sd / std::sqrt(static_cast<double>(s.n));
  r.ci_low = std::clamp(s.mean - half, 0.0, 1.0);
  r.ci_high = std::clamp(s.mean + half, 0.0, 1.0);
  return r;
}

}  // namespace aok::evaluation
