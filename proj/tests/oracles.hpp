#pragma once

// Test-only enumeration oracles. They deliberately avoid the library's solver
// paths: subset enumeration over bitmasks, string DFS for word counts, and a
// direct definition-chasing Bowen metric on truncated symbol sequences.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "topent/finite_system.hpp"

namespace oracles {

using topent::FiniteSystem;
using topent::SubsetRef;

inline double dn(const FiniteSystem& sys, int x, int y, int n) {
  double m = 0.0;
  for (int k = 0; k < n; ++k) {
    m = std::max(m, sys.dist(x, y));
    x = sys.step(x);
    y = sys.step(y);
  }
  return m;
}

// Largest (n, eps)-separated subset by exhaustive subset enumeration.
inline int brute_max_separated(const SubsetRef& z, int n, double eps) {
  const auto& pts = z.members();
  const int v = static_cast<int>(pts.size());
  if (v > 20) throw std::runtime_error("oracle instance too large");
  int best = 0;
  for (std::uint32_t mask = 1; mask < (1u << v); ++mask) {
    bool ok = true;
    for (int i = 0; i < v && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      for (int j = i + 1; j < v && ok; ++j) {
        if (!(mask & (1u << j))) continue;
        if (!(dn(z.system(), pts[i], pts[j], n) > eps)) ok = false;
      }
    }
    if (ok) best = std::max(best, static_cast<int>(__builtin_popcount(mask)));
  }
  return best;
}

// Smallest set of centers anywhere in the system whose closed d_n balls
// cover z, by exhaustive center-subset enumeration.
inline int brute_min_spanning(const SubsetRef& z, int n, double eps) {
  const FiniteSystem& sys = z.system();
  const int total = sys.size();
  if (total > 20) throw std::runtime_error("oracle instance too large");
  int best = total + 1;
  for (std::uint32_t mask = 1; mask < (1u << total); ++mask) {
    bool covers = true;
    for (int p : z.members()) {
      bool hit = false;
      for (int c = 0; c < total && !hit; ++c)
        if ((mask & (1u << c)) && dn(sys, c, p, n) <= eps) hit = true;
      if (!hit) {
        covers = false;
        break;
      }
    }
    if (covers) best = std::min(best, static_cast<int>(__builtin_popcount(mask)));
  }
  return best;
}

struct BruteBall {
  int center = 0;
  int order = 0;
  double weight = 0.0;
  std::vector<int> pts;  // covered z positions (cover) or system points (packing)
};

// Candidates in the same canonical (order, center) enumeration the solvers
// use, but with no deduplication or pruning.
inline std::vector<BruteBall> cover_balls(const SubsetRef& z, double s, double eps, int n_lo,
                                          int n_hi) {
  std::vector<BruteBall> out;
  const FiniteSystem& sys = z.system();
  for (int n = n_lo; n <= n_hi; ++n)
    for (int c = 0; c < sys.size(); ++c) {
      BruteBall b{c, n, std::exp(-s * n), {}};
      for (std::size_t e = 0; e < z.members().size(); ++e)
        if (dn(sys, c, z.members()[e], n) < eps) b.pts.push_back(static_cast<int>(e));
      out.push_back(std::move(b));
    }
  return out;
}

inline std::vector<BruteBall> packing_balls(const SubsetRef& z, double s, double eps, int n_lo,
                                            int n_hi) {
  std::vector<BruteBall> out;
  const FiniteSystem& sys = z.system();
  for (int n = n_lo; n <= n_hi; ++n)
    for (int c : z.members()) {
      BruteBall b{c, n, std::exp(-s * n), {}};
      for (int p = 0; p < sys.size(); ++p)
        if (dn(sys, c, p, n) <= eps) b.pts.push_back(p);
      out.push_back(std::move(b));
    }
  return out;
}

// Minimum family weight over all covering subfamilies; weights summed in
// ascending candidate order, matching the solvers' canonical value.
inline double brute_min_cover_value(const SubsetRef& z, double s, double eps, int n_lo, int n_hi) {
  const auto balls = cover_balls(z, s, eps, n_lo, n_hi);
  const int c = static_cast<int>(balls.size());
  if (c > 22) throw std::runtime_error("oracle instance too large");
  const int u = z.size();
  double best = -1.0;
  for (std::uint32_t mask = 1; mask < (1u << c); ++mask) {
    std::vector<char> covered(static_cast<std::size_t>(u), 0);
    double value = 0.0;
    for (int i = 0; i < c; ++i) {
      if (!(mask & (1u << i))) continue;
      value += balls[i].weight;
      for (int e : balls[i].pts) covered[static_cast<std::size_t>(e)] = 1;
    }
    bool all = true;
    for (char x : covered) all = all && x;
    if (!all) continue;
    if (best < 0.0 || value < best) best = value;
  }
  if (best < 0.0) throw std::runtime_error("oracle found no cover");
  return best;
}

inline double brute_max_packing_value(const SubsetRef& z, double s, double eps, int n_lo,
                                      int n_hi) {
  const auto balls = packing_balls(z, s, eps, n_lo, n_hi);
  const int c = static_cast<int>(balls.size());
  if (c > 22) throw std::runtime_error("oracle instance too large");
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << c); ++mask) {
    std::vector<char> used(static_cast<std::size_t>(z.system().size()), 0);
    double value = 0.0;
    bool ok = true;
    for (int i = 0; i < c && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      for (int p : balls[i].pts) {
        if (used[static_cast<std::size_t>(p)]) {
          ok = false;
          break;
        }
        used[static_cast<std::size_t>(p)] = 1;
      }
      if (ok) value += balls[i].weight;
    }
    if (ok && value > best) best = value;
  }
  return best;
}

// Count of length-n strings over {0..k-1} avoiding every forbidden word, by
// admissible-prefix DFS.
inline std::uint64_t count_avoiding(int k, const std::vector<std::string>& forbidden, int n) {
  std::uint64_t count = 0;
  std::string word;
  auto banned_suffix = [&](const std::string& w) {
    for (const auto& f : forbidden)
      if (f.size() <= w.size() && w.compare(w.size() - f.size(), f.size(), f) == 0) return true;
    return false;
  };
  auto rec = [&](auto&& self, int depth) -> void {
    if (depth == n) {
      ++count;
      return;
    }
    for (int a = 0; a < k; ++a) {
      word.push_back(static_cast<char>('0' + a));
      if (!banned_suffix(word)) self(self, depth + 1);
      word.pop_back();
    }
  };
  rec(rec, 0);
  return count;
}

// Bowen distance between truncated symbol sequences, straight from the
// definition: max over shifts of 2^{-first disagreement} on the overlap.
inline double shift_dn(const std::string& u, const std::string& v, int n) {
  double m = 0.0;
  for (int k = 0; k < n; ++k) {
    double d = 0.0;
    const std::size_t len = std::min(u.size(), v.size()) - static_cast<std::size_t>(k);
    for (std::size_t j = 0; j < len; ++j)
      if (u[static_cast<std::size_t>(k) + j] != v[static_cast<std::size_t>(k) + j]) {
        d = std::ldexp(1.0, -static_cast<int>(j));
        break;
      }
    m = std::max(m, d);
  }
  return m;
}

// Largest (n, eps)-separated set among truncated sequences, by enumeration.
inline int brute_shift_separated(const std::vector<std::string>& words, int n, double eps) {
  const int v = static_cast<int>(words.size());
  if (v > 20) throw std::runtime_error("oracle instance too large");
  int best = 0;
  for (std::uint32_t mask = 1; mask < (1u << v); ++mask) {
    bool ok = true;
    for (int i = 0; i < v && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      for (int j = i + 1; j < v && ok; ++j)
        if ((mask & (1u << j)) && !(shift_dn(words[i], words[j], n) > eps)) ok = false;
    }
    if (ok) best = std::max(best, static_cast<int>(__builtin_popcount(mask)));
  }
  return best;
}

}  // namespace oracles
