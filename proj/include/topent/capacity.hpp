#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "topent/errors.hpp"
#include "topent/estimate.hpp"
#include "topent/finite_system.hpp"
#include "topent/sft.hpp"
#include "topent/solvers.hpp"

namespace topent {

struct SeparationCertificate {
  enum class Kind { separated, spanning };
  Kind kind = Kind::separated;
  std::vector<int> points;  // ascending point indices
  int order = 1;
  double radius = 0.0;
  bool optimal = false;  // true only when produced by an exact solver
};

// Pairwise d_n > eps.
inline bool check_separated(const FiniteSystem& sys, const std::vector<int>& pts, int n,
                            double eps) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (bowen_within(sys, pts[i], pts[j], n, eps, /*closed=*/true)) return false;
  return true;
}

// Every member of z within closed d_n-distance eps of some listed point.
inline bool check_spanning(const SubsetRef& z, const std::vector<int>& pts, int n, double eps) {
  for (int x : z.members()) {
    bool covered = false;
    for (int y : pts)
      if (bowen_within(z.system(), y, x, n, eps, /*closed=*/true)) {
        covered = true;
        break;
      }
    if (covered) continue;
    return false;
  }
  return true;
}

// Maximal (not maximum) separated set in deterministic ascending-index order.
// By maximality the result is simultaneously an (n, eps)-spanning set of z.
inline SeparationCertificate greedy_separated(const SubsetRef& z, int n, double eps) {
  if (z.empty()) throw std::invalid_argument("greedy_separated needs a nonempty subset");
  if (n < 1) throw std::invalid_argument("order must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("radius must be positive");
  const FiniteSystem& sys = z.system();
  std::vector<int> kept;
  for (int x : z.members()) {
    bool clash = false;
    for (int y : kept)
      if (bowen_within(sys, x, y, n, eps, /*closed=*/true)) {
        clash = true;
        break;
      }
    if (!clash) kept.push_back(x);
  }
  return SeparationCertificate{SeparationCertificate::Kind::separated, std::move(kept), n, eps,
                               false};
}

// r_n(z, eps): maximum independent set of the graph joining pairs at
// d_n <= eps. Branch and bound with a greedy seed and clique-cover bound;
// ties break to the lexicographically smallest certificate.
inline SeparationCertificate max_separated_exact(const SubsetRef& z, int n, double eps,
                                                 int cap = 64) {
  if (z.empty()) throw std::invalid_argument("max_separated_exact needs a nonempty subset");
  if (n < 1) throw std::invalid_argument("order must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("radius must be positive");
  if (z.size() > cap) {
    std::ostringstream os;
    os << "subset of size " << z.size() << " exceeds the exact separated-set cap " << cap
       << "; use greedy_separated bounds instead";
    throw resource_error(os.str());
  }
  const FiniteSystem& sys = z.system();
  const auto& pts = z.members();
  const int v = static_cast<int>(pts.size());
  std::vector<detail::Bits> conflict(static_cast<std::size_t>(v), detail::Bits(v));
  for (int i = 0; i < v; ++i)
    for (int j = i + 1; j < v; ++j)
      if (bowen_within(sys, pts[i], pts[j], n, eps, /*closed=*/true)) {
        conflict[i].set(j);
        conflict[j].set(i);
      }
  const detail::MisResult mis = detail::max_independent_set(conflict);
  std::vector<int> chosen;
  chosen.reserve(mis.chosen.size());
  for (int i : mis.chosen) chosen.push_back(pts[i]);
  return SeparationCertificate{SeparationCertificate::Kind::separated, std::move(chosen), n, eps,
                               true};
}

// r~_n(z, eps): minimum set of centers (anywhere in the system) whose closed
// d_n balls cover z. Exact unit-weight set cover by branch and bound.
inline SeparationCertificate min_spanning_exact(const SubsetRef& z, int n, double eps,
                                                int cap = 64) {
  if (z.empty()) throw std::invalid_argument("min_spanning_exact needs a nonempty subset");
  if (n < 1) throw std::invalid_argument("order must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("radius must be positive");
  const FiniteSystem& sys = z.system();
  if (sys.size() > cap) {
    std::ostringstream os;
    os << "system of size " << sys.size() << " exceeds the exact spanning cap " << cap
       << "; use greedy_separated bounds instead";
    throw resource_error(os.str());
  }
  const auto& pts = z.members();
  const int u = static_cast<int>(pts.size());

  std::vector<detail::FamilyCandidate> cands;
  std::vector<detail::Bits> seen_footprints;
  for (int c = 0; c < sys.size(); ++c) {
    detail::Bits cover(u);
    for (int e = 0; e < u; ++e)
      if (bowen_within(sys, c, pts[e], n, eps, /*closed=*/true)) cover.set(e);
    if (!cover.any()) continue;
    bool dup = false;
    for (const auto& f : seen_footprints)
      if (f == cover) {
        dup = true;
        break;
      }
    if (dup) continue;  // identical coverage: keep the smallest center
    seen_footprints.push_back(cover);
    cands.push_back(detail::FamilyCandidate{std::move(cover), 1.0, n, c});
  }
  const detail::FamilyResult res = detail::min_weight_cover(u, cands);
  if (!res.feasible)
    throw contract_error("spanning candidates failed to cover the subset (unreachable)");
  std::vector<int> centers;
  centers.reserve(res.chosen.size());
  for (int i : res.chosen) centers.push_back(cands[static_cast<std::size_t>(i)].center);
  std::sort(centers.begin(), centers.end());
  return SeparationCertificate{SeparationCertificate::Kind::spanning, std::move(centers), n, eps,
                               true};
}

namespace detail_cap {

struct CountBracket {
  double log_lower = 0.0;
  double log_upper = 0.0;
  double count_lower = 0.0;
  double count_upper = 0.0;
  bool exact = false;
  double spanning = 0.0;
};

// Certified bracket on r_n(z, eps): exact below the caps, otherwise a greedy
// separated set from below and a greedy (n, eps/2)-spanning set from above.
inline CountBracket separated_bracket(const SubsetRef& z, int n, double eps,
                                      const ScaleSchedule& sched) {
  CountBracket out;
  if (z.size() <= sched.exact_cap && z.system().size() <= sched.exact_cap) {
    const auto sep = max_separated_exact(z, n, eps, sched.exact_cap);
    const auto span = min_spanning_exact(z, n, eps, sched.exact_cap);
    const double c = static_cast<double>(sep.points.size());
    out.count_lower = out.count_upper = c;
    out.log_lower = out.log_upper = std::log(c);
    out.exact = true;
    out.spanning = static_cast<double>(span.points.size());
    return out;
  }
  const auto lower = greedy_separated(z, n, eps);
  const auto upper = greedy_separated(z, n, eps / 2.0);
  out.count_lower = static_cast<double>(lower.points.size());
  out.count_upper = static_cast<double>(upper.points.size());
  out.log_lower = std::log(out.count_lower);
  out.log_upper = std::log(out.count_upper);
  out.exact = false;
  out.spanning = static_cast<double>(lower.points.size());  // maximal separated spans at eps
  return out;
}

inline double clamp_entropy(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace detail_cap

// Upper-capacity entropy estimate on a finite system: per radius, the
// least-squares slope of log r_n against n; the reported value is the slope
// at the smallest radius and the bracket spans the lower/upper count fits.
inline EntropyEstimate capacity_entropy_estimate(const SubsetRef& z, const ScaleSchedule& sched) {
  sched.validate_for_capacity();
  if (z.empty()) throw std::invalid_argument("capacity_entropy_estimate needs a nonempty subset");

  EntropyEstimate est;
  double final_lo = 0.0, final_hi = 0.0;
  bool any_inexact = false;
  for (double eps : sched.epsilons) {
    std::vector<double> xs, ylo, yhi;
    for (int n = sched.n_min; n <= sched.n_max; ++n) {
      const auto b = detail_cap::separated_bracket(z, n, eps, sched);
      xs.push_back(static_cast<double>(n));
      ylo.push_back(b.log_lower);
      yhi.push_back(b.log_upper);
      any_inexact = any_inexact || !b.exact;
      est.scale_points.push_back(
          ScalePoint{eps, n, b.log_lower, b.log_upper, b.count_lower, b.count_upper, b.exact,
                     b.spanning});
    }
    bool degenerate = false;
    const double slope_lo = fit_slope(xs, ylo, &degenerate);
    const double slope_hi = fit_slope(xs, yhi);
    if (degenerate) est.note("degenerate_fit");
    est.per_epsilon.emplace_back(eps, slope_lo);
    final_lo = std::min(slope_lo, slope_hi);
    final_hi = std::max(slope_lo, slope_hi);
  }
  est.value = detail_cap::clamp_entropy(est.per_epsilon.back().second);
  est.lower = detail_cap::clamp_entropy(std::min(final_lo, est.value));
  est.upper = std::max(detail_cap::clamp_entropy(final_hi), est.value);
  if (any_inexact) est.note("bracketed_by_greedy_bounds");
  return est;
}

// Symbolic track: exact separated counts via the cylinder correspondence.
inline EntropyEstimate capacity_entropy_estimate(const SftSpec& sft, const SymbolicSubset& z,
                                                 const ScaleSchedule& sched) {
  sched.validate_for_capacity();
  EntropyEstimate est;
  double slope_min = std::numeric_limits<double>::infinity();
  double slope_max = -std::numeric_limits<double>::infinity();
  for (double eps : sched.epsilons) {
    const SymbolicScale scale = SymbolicScale::from_epsilon(eps);
    std::vector<double> xs, ys;
    for (int n = sched.n_min; n <= sched.n_max; ++n) {
      const SymbolicCounts c = symbolic_separated_count(sft, z, n, scale);
      const double lg = log_big(c.separated);
      xs.push_back(static_cast<double>(n));
      ys.push_back(lg);
      const double cd = c.separated.convert_to<double>();
      est.scale_points.push_back(ScalePoint{eps, n, lg, lg, cd, cd, true, cd});
    }
    bool degenerate = false;
    const double slope = fit_slope(xs, ys, &degenerate);
    if (degenerate) est.note("degenerate_fit");
    est.per_epsilon.emplace_back(eps, slope);
    slope_min = std::min(slope_min, slope);
    slope_max = std::max(slope_max, slope);
  }
  est.value = detail_cap::clamp_entropy(est.per_epsilon.back().second);
  est.lower = detail_cap::clamp_entropy(std::min(slope_min, est.value));
  est.upper = std::max(detail_cap::clamp_entropy(slope_max), est.value);
  return est;
}

}  // namespace topent
