#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "topent/errors.hpp"

namespace topent {

// The (n, epsilon, s) grid an estimator sweeps, plus solver size limits.
struct ScaleSchedule {
  int n_min = 1;                     // minimal ball order N
  int n_max = 8;                     // maximal ball order
  std::vector<double> epsilons;      // strictly decreasing radii
  double s_lo = 0.0;                 // exponent search range
  double s_hi = 4.0;
  double tol = 1e-9;                 // bisection tolerance
  int exact_cap = 64;                // max universe size for exact solvers
  std::size_t candidate_cap = 4096;  // max ball-family size for exact solvers

  void validate() const {
    if (n_min < 1 || n_max < n_min)
      throw config_error("schedule orders must satisfy 1 <= n_min <= n_max");
    if (epsilons.empty()) throw config_error("schedule needs at least one radius");
    double prev = std::numeric_limits<double>::infinity();
    for (double e : epsilons) {
      if (!(e > 0.0) || !(e < prev))
        throw config_error("schedule radii must be positive and strictly decreasing");
      prev = e;
    }
    if (s_lo < 0.0 || s_hi < s_lo)
      throw config_error("schedule exponent range must satisfy 0 <= s_lo <= s_hi");
    if (!(tol > 0.0)) throw config_error("schedule tolerance must be positive");
    if (exact_cap < 1) throw config_error("exact solver cap must be >= 1");
    if (exact_cap > 64)
      throw config_error("exact solver cap is limited to 64 (bitset-backed solvers)");
  }

  void validate_for_capacity() const {
    validate();
    if (n_max - n_min + 1 < 3)
      throw config_error("capacity fits need at least three orders per radius");
    if (epsilons.size() < 2) throw config_error("capacity fits need at least two radii");
  }

  ScaleSchedule with_orders(int lo, int hi) const {
    ScaleSchedule s = *this;
    s.n_min = lo;
    s.n_max = hi;
    return s;
  }
};

// One evaluated grid point of a separated-count sweep.
struct ScalePoint {
  double epsilon = 0.0;
  int order = 0;
  double log_lower = 0.0;      // log of the certified count lower bound
  double log_upper = 0.0;      // log of the certified count upper bound
  double count_lower = 0.0;    // the raw counts, for reports (rounded above 2^53)
  double count_upper = 0.0;
  bool exact = false;
  double spanning_count = 0.0;
};

// One critical-exponent bisection outcome at a fixed (epsilon, order).
struct CrossingPoint {
  double epsilon = 0.0;
  int order = 0;
  double s_critical = 0.0;
  double value_at_crossing = 0.0;
  bool optimal = false;
};

struct EntropyEstimate {
  double value = 0.0;  // nats
  double lower = 0.0;  // bracket
  double upper = 0.0;
  std::vector<std::pair<double, double>> per_epsilon;  // (epsilon, exponent)
  std::vector<ScalePoint> scale_points;
  std::vector<CrossingPoint> crossings;
  std::map<std::string, double> stats;  // named numeric diagnostics
  std::vector<std::string> notes;       // textual flags

  bool has_note(const std::string& n) const {
    return std::find(notes.begin(), notes.end(), n) != notes.end();
  }
  void note(const std::string& n) {
    if (!has_note(n)) notes.push_back(n);
  }
};

// Least-squares slope of y against x. A constant y column is reported as
// slope 0 with the degenerate flag set.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                        bool* degenerate = nullptr) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_slope needs at least two (x, y) pairs");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_slope needs distinct x values");
  if (degenerate) {
    bool all_equal = true;
    for (std::size_t i = 1; i < ys.size(); ++i) all_equal = all_equal && ys[i] == ys[0];
    *degenerate = all_equal;
  }
  return (n * sxy - sx * sy) / den;
}

}  // namespace topent
