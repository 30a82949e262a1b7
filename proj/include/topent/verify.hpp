#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "topent/caratheodory.hpp"
#include "topent/capacity.hpp"
#include "topent/json_codec.hpp"

namespace topent {

struct CheckReport {
  std::string check;
  std::string instance;
  bool pass = true;
  double slack = 0.0;  // worst margin across the asserted inequalities; < 0 means violated
  Json witness;        // full replayable instance, populated on failure
};

namespace detail_ver {

constexpr double kWeightTol = 1e-9;  // slack for exp-weighted comparisons

inline double rel_tol(double a, double b) {
  return kWeightTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

struct Margins {
  double worst = std::numeric_limits<double>::infinity();
  bool pass = true;

  // lhs <= rhs, exact (integer-valued quantities).
  void exact_le(double lhs, double rhs) {
    worst = std::min(worst, rhs - lhs);
    pass = pass && lhs <= rhs;
  }
  // lhs <= rhs up to floating-point slack (exp-weighted sums).
  void weighted_le(double lhs, double rhs) {
    worst = std::min(worst, rhs - lhs);
    pass = pass && lhs <= rhs + rel_tol(lhs, rhs);
  }
  void require(bool ok) {
    pass = pass && ok;
    worst = std::min(worst, ok ? 0.0 : -1.0);
  }

  double finite_worst() const { return std::isfinite(worst) ? worst : 0.0; }
};

}  // namespace detail_ver

// ---------------------------------------------------------------------------
// Fixed-scale check instances. Each is fully serializable; a stored witness
// replays to the identical verdict.
// ---------------------------------------------------------------------------

struct MonotoneInstance {
  FiniteSystem sys;
  std::vector<int> z, z_prime;  // z subset of z_prime
  int n = 1;
  double eps = 0.5;
  double s = 0.5;
};

struct UnionInstance {
  FiniteSystem sys;
  std::vector<int> z1, z2;
  int n = 1;
  double eps = 0.5;
};

struct ProductSpanInstance {
  FiniteSystem a, b;
  std::vector<int> z1, z2;
  int n = 1;
  double eps = 0.5;
};

struct PackCoverInstance {
  FiniteSystem sys;
  std::vector<int> z;
  int n = 1;
  double eps = 0.5;
  double delta = 0.0625;
};

struct SepPackInstance {
  FiniteSystem sys;
  std::vector<int> z;
  int n_lo = 1, n_hi = 2;
  double eps = 0.5;
  double s = 0.5;
};

struct SubaddInstance {
  FiniteSystem sys;
  std::vector<int> z, z1, z2;  // z subset of z1 ∪ z2
  int n_lo = 1, n_hi = 2;
  double eps = 0.5;
  double s = 0.5;
};

struct GreedySpanInstance {
  FiniteSystem sys;
  std::vector<int> z;
  int n = 1;
  double eps = 0.5;
};

namespace detail_ver {

inline ScaleSchedule fixed_scale(int n_lo, int n_hi, double eps) {
  ScaleSchedule s;
  s.n_min = n_lo;
  s.n_max = n_hi;
  s.epsilons = {eps};
  s.s_hi = 64.0;
  return s;
}

inline Json witness_base(const std::string& check) {
  Json j;
  j["check"] = check;
  return j;
}

}  // namespace detail_ver

// Separated counts, cover values and packing values are monotone under
// subset inclusion at fixed scale.
inline CheckReport check_monotone_subset(const MonotoneInstance& in, std::string instance = "") {
  CheckReport rep;
  rep.check = "monotone_subset";
  rep.instance = std::move(instance);
  if (in.z.empty()) return rep;  // nothing to assert for the empty subset
  SubsetRef z(in.sys, in.z), zp(in.sys, in.z_prime);
  if (!z.is_subset_of(zp)) throw contract_error("monotone_subset needs z subset of z_prime");

  detail_ver::Margins m;
  const auto sched = detail_ver::fixed_scale(in.n, in.n + 1, in.eps);
  m.exact_le(static_cast<double>(max_separated_exact(z, in.n, in.eps).points.size()),
             static_cast<double>(max_separated_exact(zp, in.n, in.eps).points.size()));
  m.weighted_le(bowen_outer_measure(z, in.s, in.eps, sched).value,
                bowen_outer_measure(zp, in.s, in.eps, sched).value);
  m.weighted_le(packing_premeasure(z, in.s, in.eps, sched).value,
                packing_premeasure(zp, in.s, in.eps, sched).value);
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system"] = system_to_json(in.sys);
    rep.witness["z"] = subset_to_json(in.sys, in.z);
    rep.witness["z_prime"] = subset_to_json(in.sys, in.z_prime);
    rep.witness["n"] = in.n;
    rep.witness["epsilon"] = in.eps;
    rep.witness["s"] = in.s;
  }
  return rep;
}

// Union bounds at fixed scale:
// max(r_n(Z1), r_n(Z2)) <= r_n(Z1 ∪ Z2) <= r_n(Z1) + r_n(Z2).
inline CheckReport check_union_bounds(const UnionInstance& in, std::string instance = "") {
  CheckReport rep;
  rep.check = "union_bounds";
  rep.instance = std::move(instance);
  if (in.z1.empty() || in.z2.empty()) return rep;
  SubsetRef z1(in.sys, in.z1), z2(in.sys, in.z2);
  const SubsetRef zu = union_subset(z1, z2);
  const double r1 = static_cast<double>(max_separated_exact(z1, in.n, in.eps).points.size());
  const double r2 = static_cast<double>(max_separated_exact(z2, in.n, in.eps).points.size());
  const double ru = static_cast<double>(max_separated_exact(zu, in.n, in.eps).points.size());
  detail_ver::Margins m;
  m.exact_le(std::max(r1, r2), ru);
  m.exact_le(ru, r1 + r2);
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system"] = system_to_json(in.sys);
    rep.witness["z1"] = subset_to_json(in.sys, in.z1);
    rep.witness["z2"] = subset_to_json(in.sys, in.z2);
    rep.witness["n"] = in.n;
    rep.witness["epsilon"] = in.eps;
  }
  return rep;
}

// The product of minimal spanning certificates spans the product subset, so
// spanning numbers submultiply.
inline CheckReport check_product_spanning(const ProductSpanInstance& in,
                                          std::string instance = "") {
  CheckReport rep;
  rep.check = "product_spanning";
  rep.instance = std::move(instance);
  if (in.z1.empty() || in.z2.empty()) return rep;
  SubsetRef z1(in.a, in.z1), z2(in.b, in.z2);
  const auto s1 = min_spanning_exact(z1, in.n, in.eps);
  const auto s2 = min_spanning_exact(z2, in.n, in.eps);
  const FiniteSystem prod = product_system(in.a, in.b);
  const SubsetRef zprod = product_subset(prod, z1, z2);
  std::vector<int> cert;
  for (int p : s1.points)
    for (int q : s2.points) cert.push_back(product_index(prod, p, q));
  std::sort(cert.begin(), cert.end());

  detail_ver::Margins m;
  m.require(check_spanning(zprod, cert, in.n, in.eps));
  if (prod.size() <= 64) {
    const auto sp = min_spanning_exact(zprod, in.n, in.eps);
    m.exact_le(static_cast<double>(sp.points.size()),
               static_cast<double>(s1.points.size()) * static_cast<double>(s2.points.size()));
  }
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system_a"] = system_to_json(in.a);
    rep.witness["system_b"] = system_to_json(in.b);
    rep.witness["z1"] = subset_to_json(in.a, in.z1);
    rep.witness["z2"] = subset_to_json(in.b, in.z2);
    rep.witness["n"] = in.n;
    rep.witness["epsilon"] = in.eps;
  }
  return rep;
}

// A maximal disjoint family of closed (n, eps) balls centered in z yields an
// open (n, 2 eps + delta) cover of z from the same centers: any uncovered
// point would have extended the family.
inline CheckReport check_packing_to_cover(const PackCoverInstance& in,
                                          std::string instance = "") {
  CheckReport rep;
  rep.check = "packing_to_cover";
  rep.instance = std::move(instance);
  if (in.z.empty()) return rep;
  const FiniteSystem& sys = in.sys;
  const int total = sys.size();

  std::vector<int> centers;
  std::vector<detail::Bits> footprints;
  detail::Bits occupied(total);
  for (int c : in.z) {
    detail::Bits fp(total);
    for (int p = 0; p < total; ++p)
      if (bowen_within(sys, c, p, in.n, in.eps, /*closed=*/true)) fp.set(p);
    if (occupied.intersects(fp)) continue;
    occupied |= fp;
    centers.push_back(c);
    footprints.push_back(std::move(fp));
  }

  const double wide = 2.0 * in.eps + in.delta;
  int uncovered = 0;
  int first_uncovered = -1;
  for (int x : in.z) {
    bool covered = false;
    for (int c : centers)
      if (bowen_within(sys, c, x, in.n, wide, /*closed=*/false)) {
        covered = true;
        break;
      }
    if (!covered) {
      ++uncovered;
      if (first_uncovered < 0) first_uncovered = x;
    }
  }
  detail_ver::Margins m;
  m.require(uncovered == 0);
  rep.pass = m.pass;
  rep.slack = m.pass ? 0.0 : -static_cast<double>(uncovered);
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system"] = system_to_json(sys);
    rep.witness["z"] = subset_to_json(sys, in.z);
    rep.witness["n"] = in.n;
    rep.witness["epsilon"] = in.eps;
    rep.witness["delta"] = in.delta;
    rep.witness["centers"] = subset_to_json(sys, centers);
    rep.witness["uncovered_point"] = sys.name(first_uncovered);
  }
  return rep;
}

// Separated sets at doubled radius give disjoint closed-ball packings:
// r_N(z, 2 eps) exp(-N s) <= P^s_{N, eps}(z).
inline CheckReport check_separated_vs_packing(const SepPackInstance& in,
                                              std::string instance = "") {
  CheckReport rep;
  rep.check = "separated_vs_packing";
  rep.instance = std::move(instance);
  if (in.z.empty()) return rep;
  SubsetRef z(in.sys, in.z);
  const auto sep = max_separated_exact(z, in.n_lo, 2.0 * in.eps);
  const double lhs = static_cast<double>(sep.points.size()) * std::exp(-in.s * in.n_lo);
  const auto sched = detail_ver::fixed_scale(in.n_lo, in.n_hi, in.eps);
  const PackingSolution pack = packing_premeasure(z, in.s, in.eps, sched);
  detail_ver::Margins m;
  m.weighted_le(lhs, pack.value);
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system"] = system_to_json(in.sys);
    rep.witness["z"] = subset_to_json(in.sys, in.z);
    rep.witness["n_lo"] = in.n_lo;
    rep.witness["n_hi"] = in.n_hi;
    rep.witness["epsilon"] = in.eps;
    rep.witness["s"] = in.s;
    rep.witness["separated"] = certificate_to_json(in.sys, sep);
    rep.witness["packing"] = packing_solution_to_json(in.sys, pack);
  }
  return rep;
}

// Cover values are subadditive: M(z) <= M(z1) + M(z2) whenever z ⊆ z1 ∪ z2.
inline CheckReport check_cover_subadditivity(const SubaddInstance& in,
                                             std::string instance = "") {
  CheckReport rep;
  rep.check = "cover_subadditivity";
  rep.instance = std::move(instance);
  if (in.z.empty() || in.z1.empty() || in.z2.empty()) return rep;
  SubsetRef z(in.sys, in.z), z1(in.sys, in.z1), z2(in.sys, in.z2);
  if (!z.is_subset_of(union_subset(z1, z2)))
    throw contract_error("cover_subadditivity needs z inside z1 ∪ z2");
  const auto sched = detail_ver::fixed_scale(in.n_lo, in.n_hi, in.eps);
  detail_ver::Margins m;
  m.weighted_le(bowen_outer_measure(z, in.s, in.eps, sched).value,
                bowen_outer_measure(z1, in.s, in.eps, sched).value +
                    bowen_outer_measure(z2, in.s, in.eps, sched).value);
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system"] = system_to_json(in.sys);
    rep.witness["z"] = subset_to_json(in.sys, in.z);
    rep.witness["z1"] = subset_to_json(in.sys, in.z1);
    rep.witness["z2"] = subset_to_json(in.sys, in.z2);
    rep.witness["n_lo"] = in.n_lo;
    rep.witness["n_hi"] = in.n_hi;
    rep.witness["epsilon"] = in.eps;
    rep.witness["s"] = in.s;
  }
  return rep;
}

// Maximality of the greedy separated set makes it a spanning set, and never
// larger than the exact maximum.
inline CheckReport check_greedy_spanning(const GreedySpanInstance& in,
                                         std::string instance = "") {
  CheckReport rep;
  rep.check = "greedy_spanning";
  rep.instance = std::move(instance);
  if (in.z.empty()) return rep;
  SubsetRef z(in.sys, in.z);
  const auto greedy = greedy_separated(z, in.n, in.eps);
  detail_ver::Margins m;
  m.require(check_separated(in.sys, greedy.points, in.n, in.eps));
  m.require(check_spanning(z, greedy.points, in.n, in.eps));
  if (z.size() <= 64) {
    const auto exact = max_separated_exact(z, in.n, in.eps);
    m.exact_le(static_cast<double>(greedy.points.size()),
               static_cast<double>(exact.points.size()));
  }
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["system"] = system_to_json(in.sys);
    rep.witness["z"] = subset_to_json(in.sys, in.z);
    rep.witness["n"] = in.n;
    rep.witness["epsilon"] = in.eps;
    rep.witness["certificate"] = certificate_to_json(in.sys, greedy);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Product theorem suite on symbolic instances (bracketed assertions).
// ---------------------------------------------------------------------------

struct TheoremProductsInstance {
  SftSpec a, b;
  SymbolicSubset za, zb;
  ScaleSchedule sched;
};

namespace detail_ver {

struct Bracket {
  double value = 0, lower = 0, upper = 0;
  Bracket() = default;
  Bracket(const EntropyEstimate& e) : value(e.value), lower(e.lower), upper(e.upper) {}
  Bracket operator+(const Bracket& o) const {
    Bracket r;
    r.value = value + o.value;
    r.lower = lower + o.lower;
    r.upper = upper + o.upper;
    return r;
  }
};

// lhs <= rhs within the reported brackets.
inline double bracket_le_margin(const Bracket& lhs, const Bracket& rhs) {
  return rhs.upper - lhs.lower + kWeightTol;
}
inline double bracket_eq_margin(const Bracket& a, const Bracket& b) {
  const double width = (a.upper - a.lower) + (b.upper - b.lower) + kWeightTol;
  return width - std::fabs(a.value - b.value);
}

}  // namespace detail_ver

// Product laws at symbolic scale: bracketed inequalities for h^B, h^P, h^U,
// plus additivity when a factor is the full (invariant, compact) space.
inline CheckReport check_theorem_products(const TheoremProductsInstance& in,
                                          std::string instance = "") {
  CheckReport rep;
  rep.check = "theorem_products";
  rep.instance = std::move(instance);
  const SftSpec prod = product_sft(in.a, in.b);
  const SymbolicSubset zprod = product_symbolic_subset(in.a, in.b, in.za, in.zb);

  using detail_ver::Bracket;
  const Bracket hb_a(bowen_entropy_estimate(in.a, in.za, in.sched));
  const Bracket hb_b(bowen_entropy_estimate(in.b, in.zb, in.sched));
  const Bracket hb_p(bowen_entropy_estimate(prod, zprod, in.sched));
  const Bracket hp_a(packing_entropy_estimate(in.a, in.za, in.sched));
  const Bracket hp_b(packing_entropy_estimate(in.b, in.zb, in.sched));
  const Bracket hp_p(packing_entropy_estimate(prod, zprod, in.sched));
  const Bracket hu_a(capacity_entropy_estimate(in.a, in.za, in.sched));
  const Bracket hu_b(capacity_entropy_estimate(in.b, in.zb, in.sched));
  const Bracket hu_p(capacity_entropy_estimate(prod, zprod, in.sched));

  detail_ver::Margins m;
  auto le = [&](const Bracket& l, const Bracket& r) {
    const double margin = detail_ver::bracket_le_margin(l, r);
    m.worst = std::min(m.worst, margin);
    m.pass = m.pass && margin >= 0.0;
  };
  auto eq = [&](const Bracket& x, const Bracket& y) {
    const double margin = detail_ver::bracket_eq_margin(x, y);
    m.worst = std::min(m.worst, margin);
    m.pass = m.pass && margin >= 0.0;
  };

  le(hb_a + hb_b, hb_p);        // lower product bound for Bowen entropy
  le(hb_p, hb_a + hp_b);        // Bowen-packing upper bound
  le(hp_p, hp_a + hp_b);        // packing submultiplicativity
  le(hu_p, hu_a + hu_b);        // capacity submultiplicativity
  if (in.za.full || in.zb.full) eq(hb_p, hb_a + hb_b);
  if (in.za.full && in.zb.full) {
    eq(hp_p, hp_a + hp_b);
    eq(hu_p, hu_a + hu_b);
  }
  rep.pass = m.pass;
  rep.slack = m.finite_worst();
  if (!rep.pass) {
    rep.witness = detail_ver::witness_base(rep.check);
    rep.witness["sft_a"] = sft_to_json(in.a);
    rep.witness["sft_b"] = sft_to_json(in.b);
    rep.witness["za"] = in.za.full ? Json() : Json(in.za.bases);
    rep.witness["zb"] = in.zb.full ? Json() : Json(in.zb.bases);
    rep.witness["schedule"] = schedule_to_json(in.sched);
    rep.witness["values"] = Json{{"hB_a", hb_a.value}, {"hB_b", hb_b.value},
                                 {"hB_prod", hb_p.value}, {"hP_a", hp_a.value},
                                 {"hP_b", hp_b.value}, {"hP_prod", hp_p.value},
                                 {"hU_a", hu_a.value}, {"hU_b", hu_b.value},
                                 {"hU_prod", hu_p.value}};
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Witness replay: rebuild the instance from JSON and rerun the named check.
// ---------------------------------------------------------------------------

inline CheckReport replay_witness(const Json& w) {
  const std::string check = w.at("check").get<std::string>();
  if (check == "monotone_subset") {
    MonotoneInstance in;
    in.sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
    in.z = subset_from_json(in.sys, w.at("z"));
    in.z_prime = subset_from_json(in.sys, w.at("z_prime"));
    in.n = w.at("n").get<int>();
    in.eps = w.at("epsilon").get<double>();
    in.s = w.at("s").get<double>();
    return check_monotone_subset(in, "replay");
  }
  if (check == "union_bounds") {
    UnionInstance in;
    in.sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
    in.z1 = subset_from_json(in.sys, w.at("z1"));
    in.z2 = subset_from_json(in.sys, w.at("z2"));
    in.n = w.at("n").get<int>();
    in.eps = w.at("epsilon").get<double>();
    return check_union_bounds(in, "replay");
  }
  if (check == "product_spanning") {
    ProductSpanInstance in;
    in.a = system_from_json(w.at("system_a"), /*validate_triangle=*/false);
    in.b = system_from_json(w.at("system_b"), /*validate_triangle=*/false);
    in.z1 = subset_from_json(in.a, w.at("z1"));
    in.z2 = subset_from_json(in.b, w.at("z2"));
    in.n = w.at("n").get<int>();
    in.eps = w.at("epsilon").get<double>();
    return check_product_spanning(in, "replay");
  }
  if (check == "packing_to_cover") {
    PackCoverInstance in;
    in.sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
    in.z = subset_from_json(in.sys, w.at("z"));
    in.n = w.at("n").get<int>();
    in.eps = w.at("epsilon").get<double>();
    in.delta = w.at("delta").get<double>();
    return check_packing_to_cover(in, "replay");
  }
  if (check == "separated_vs_packing") {
    SepPackInstance in;
    in.sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
    in.z = subset_from_json(in.sys, w.at("z"));
    in.n_lo = w.at("n_lo").get<int>();
    in.n_hi = w.at("n_hi").get<int>();
    in.eps = w.at("epsilon").get<double>();
    in.s = w.at("s").get<double>();
    return check_separated_vs_packing(in, "replay");
  }
  if (check == "cover_subadditivity") {
    SubaddInstance in;
    in.sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
    in.z = subset_from_json(in.sys, w.at("z"));
    in.z1 = subset_from_json(in.sys, w.at("z1"));
    in.z2 = subset_from_json(in.sys, w.at("z2"));
    in.n_lo = w.at("n_lo").get<int>();
    in.n_hi = w.at("n_hi").get<int>();
    in.eps = w.at("epsilon").get<double>();
    in.s = w.at("s").get<double>();
    return check_cover_subadditivity(in, "replay");
  }
  if (check == "greedy_spanning") {
    GreedySpanInstance in;
    in.sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
    in.z = subset_from_json(in.sys, w.at("z"));
    in.n = w.at("n").get<int>();
    in.eps = w.at("epsilon").get<double>();
    return check_greedy_spanning(in, "replay");
  }
  if (check == "theorem_products") {
    auto sft_from = [](const Json& j) {
      const auto alphabet = j.contains("block_alphabet")
                                ? j.at("block_alphabet").get<std::vector<std::string>>()
                                : j.at("alphabet").get<std::vector<std::string>>();
      return SftSpec::from_matrix(alphabet,
                                  j.at("transitions").get<std::vector<std::vector<int>>>());
    };
    TheoremProductsInstance in{sft_from(w.at("sft_a")), sft_from(w.at("sft_b")),
                               SymbolicSubset::whole(), SymbolicSubset::whole(),
                               schedule_from_json(w.at("schedule"))};
    if (!w.at("za").is_null())
      in.za = SymbolicSubset::cylinders(in.a, w.at("za").get<std::vector<std::vector<int>>>());
    if (!w.at("zb").is_null())
      in.zb = SymbolicSubset::cylinders(in.b, w.at("zb").get<std::vector<std::vector<int>>>());
    return check_theorem_products(in, "replay");
  }
  throw config_error("unknown check in witness: " + check);
}

// ---------------------------------------------------------------------------
// Deterministic fuzzing with greedy shrinking.
// ---------------------------------------------------------------------------

struct FuzzParams {
  std::uint64_t seed = 1;
  int count = 100;
  int max_points = 10;
  int max_order = 4;
  int threads = 0;  // 0 = hardware concurrency
};

namespace detail_ver {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Random system on the dyadic lattice (coords j/64), so every distance,
// doubled radius and 2*eps+delta below is exact in floating point and each
// fixed-scale theorem holds bit-exactly.
inline FiniteSystem random_system(std::mt19937_64& rng, int max_points) {
  std::uniform_int_distribution<int> pts_d(2, max_points);
  std::uniform_int_distribution<int> dim_d(1, 3);
  std::uniform_int_distribution<int> coord_d(0, 64);
  std::uniform_int_distribution<int> mode_d(0, 1);
  const int p = pts_d(rng);
  const int dim = dim_d(rng);
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(p));
  for (auto& c : coords) {
    c.resize(static_cast<std::size_t>(dim));
    for (double& v : c) v = coord_d(rng) / 64.0;
  }
  std::vector<int> step(static_cast<std::size_t>(p));
  std::uniform_int_distribution<int> map_d(0, p - 1);
  for (int& t : step) t = map_d(rng);
  std::vector<std::string> names;
  for (int i = 0; i < p; ++i) names.push_back("p" + std::to_string(i));

  if (mode_d(rng) == 0)
    return FiniteSystem::from_coords(std::move(names), std::move(coords),
                                     CoordMetric::Norm::chebyshev, std::move(step));
  // Explicit-table variant of the same metric; exercises the table backend.
  CoordMetric cm(coords, CoordMetric::Norm::chebyshev);
  std::vector<double> tri;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) tri.push_back(cm.dist(i, j));
  return FiniteSystem::from_table(std::move(names), std::move(tri), std::move(step),
                                  /*validate_triangle=*/false);
}

inline std::vector<int> random_subset(std::mt19937_64& rng, int total) {
  std::uniform_int_distribution<int> size_d(1, total);
  const int k = size_d(rng);
  std::vector<int> idx(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline double random_eps(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(1, 96);
  return u(rng) / 64.0;  // exact dyadic, can exceed the unit-cube diameter
}

inline double random_s(std::mt19937_64& rng) {
  static const double choices[] = {0.0, 0.25, 0.5, 1.0};
  std::uniform_int_distribution<int> u(0, 3);
  return choices[u(rng)];
}

// Forward-closed point subsets that survive dropping `drop`, or empty if the
// closure grows back to everything.
inline std::vector<int> closed_complement(const FiniteSystem& sys, int drop) {
  std::vector<char> keep(static_cast<std::size_t>(sys.size()), 1);
  keep[static_cast<std::size_t>(drop)] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < sys.size(); ++i)
      if (keep[static_cast<std::size_t>(i)] && !keep[static_cast<std::size_t>(sys.step(i))]) {
        keep[static_cast<std::size_t>(i)] = 0;
        changed = true;
      }
  }
  std::vector<int> out;
  for (int i = 0; i < sys.size(); ++i)
    if (keep[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

// Restrict a witness's system (and every point list in it) to `kept`.
inline Json restrict_witness(const Json& w, const FiniteSystem& sys,
                             const std::vector<int>& kept) {
  std::vector<int> pos(static_cast<std::size_t>(sys.size()), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) pos[static_cast<std::size_t>(kept[i])] =
      static_cast<int>(i);
  std::vector<std::string> names;
  std::vector<int> step;
  std::vector<double> tri;
  for (int p : kept) names.push_back(sys.name(p));
  for (int p : kept) step.push_back(pos[static_cast<std::size_t>(sys.step(p))]);
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j) tri.push_back(sys.dist(kept[i], kept[j]));
  FiniteSystem sub = FiniteSystem::from_table(names, tri, step, /*validate_triangle=*/false);

  Json out = w;
  out["system"] = system_to_json(sub);
  for (const char* key : {"z", "z_prime", "z1", "z2"}) {
    if (!w.contains(key)) continue;
    Json filtered = Json::array();
    for (const auto& nm : w.at(key)) {
      const std::string s = nm.get<std::string>();
      for (const auto& kn : names)
        if (kn == s) {
          filtered.push_back(s);
          break;
        }
    }
    out[key] = std::move(filtered);
  }
  return out;
}

inline bool witness_still_valid(const Json& w) {
  // Shrunk instances must keep the subsets nonempty and nested where the
  // check's contract requires it.
  const std::string check = w.at("check").get<std::string>();
  auto nonempty = [&](const char* key) {
    return w.contains(key) && !w.at(key).empty();
  };
  if (check == "monotone_subset") return nonempty("z") && nonempty("z_prime");
  if (check == "cover_subadditivity") return nonempty("z") && nonempty("z1") && nonempty("z2");
  if (check == "product_spanning") return nonempty("z1") && nonempty("z2");
  return nonempty("z") || (nonempty("z1") && nonempty("z2"));
}

// Greedy shrink: drop points (closing under the map), then lower orders.
// Two-system instances shrink by order only.
inline Json shrink_witness(Json w) {
  bool improved = true;
  while (improved) {
    improved = false;
    if (w.contains("system")) {
      FiniteSystem sys = system_from_json(w.at("system"), /*validate_triangle=*/false);
      for (int drop = sys.size() - 1; drop >= 0 && sys.size() > 1; --drop) {
        const auto kept = closed_complement(sys, drop);
        if (kept.empty() || static_cast<int>(kept.size()) == sys.size()) continue;
        Json cand = restrict_witness(w, sys, kept);
        if (!witness_still_valid(cand)) continue;
        try {
          if (!replay_witness(cand).pass) {
            w = std::move(cand);
            improved = true;
            break;
          }
        } catch (const contract_error&) {
          continue;  // shrink broke a precondition (e.g. nesting); skip
        }
      }
    }
    for (const char* key : {"n", "n_hi", "n_lo"}) {
      if (!w.contains(key)) continue;
      const int v = w.at(key).get<int>();
      const int floor = (std::string(key) == "n_hi" && w.contains("n_lo"))
                            ? w.at("n_lo").get<int>()
                            : 1;
      if (v <= floor) continue;
      Json cand = w;
      cand[key] = v - 1;
      try {
        if (!replay_witness(cand).pass) {
          w = std::move(cand);
          improved = true;
        }
      } catch (const contract_error&) {
      }
    }
  }
  return w;
}

}  // namespace detail_ver

// Runs the full fixed-scale battery on deterministic random systems. Any
// failing report carries a shrunk, replayable witness.
inline std::vector<CheckReport> fuzz(const FuzzParams& params) {
  std::vector<std::vector<CheckReport>> per_instance(
      static_cast<std::size_t>(std::max(0, params.count)));

  auto run_instance = [&](int i) {
    std::mt19937_64 rng(detail_ver::splitmix64(params.seed ^ (0x517cc1b727220a95ull * (i + 1))));
    std::vector<CheckReport>& out = per_instance[static_cast<std::size_t>(i)];
    char tag_buf[16];
    std::snprintf(tag_buf, sizeof(tag_buf), "fuzz-%06d", i);
    const std::string tag = tag_buf;

    const FiniteSystem sys = detail_ver::random_system(rng, params.max_points);
    std::uniform_int_distribution<int> order_d(1, params.max_order);
    const int n = order_d(rng);
    const double eps = detail_ver::random_eps(rng);
    const double s = detail_ver::random_s(rng);

    {
      MonotoneInstance in;
      in.sys = sys;
      in.z_prime = detail_ver::random_subset(rng, sys.size());
      std::mt19937_64 pick(rng());
      std::uniform_int_distribution<int> kd(1, static_cast<int>(in.z_prime.size()));
      std::vector<int> z = in.z_prime;
      std::shuffle(z.begin(), z.end(), pick);
      z.resize(static_cast<std::size_t>(kd(pick)));
      std::sort(z.begin(), z.end());
      in.z = std::move(z);
      in.n = n;
      in.eps = eps;
      in.s = s;
      out.push_back(check_monotone_subset(in, tag));
    }
    {
      UnionInstance in;
      in.sys = sys;
      in.z1 = detail_ver::random_subset(rng, sys.size());
      in.z2 = detail_ver::random_subset(rng, sys.size());
      in.n = n;
      in.eps = eps;
      out.push_back(check_union_bounds(in, tag));
    }
    {
      std::mt19937_64 rng2(detail_ver::splitmix64(params.seed ^ (0xd1342543de82ef95ull * (i + 1))));
      const int cap_a = 8;
      FiniteSystem a = detail_ver::random_system(rng2, std::min(params.max_points, cap_a));
      const int cap_b = std::max(2, std::min({params.max_points, 8, 64 / a.size()}));
      FiniteSystem b = detail_ver::random_system(rng2, cap_b);
      ProductSpanInstance in;
      in.a = a;
      in.b = b;
      in.z1 = detail_ver::random_subset(rng2, a.size());
      in.z2 = detail_ver::random_subset(rng2, b.size());
      in.n = n;
      in.eps = eps;
      out.push_back(check_product_spanning(in, tag));
    }
    {
      PackCoverInstance in;
      in.sys = sys;
      in.z = detail_ver::random_subset(rng, sys.size());
      in.n = n;
      in.eps = eps;
      in.delta = eps / 8.0;
      out.push_back(check_packing_to_cover(in, tag));
    }
    {
      SepPackInstance in;
      in.sys = sys;
      in.z = detail_ver::random_subset(rng, sys.size());
      in.n_lo = n;
      in.n_hi = std::min(n + 1, params.max_order);
      if (in.n_hi < in.n_lo) in.n_hi = in.n_lo;
      in.eps = eps;
      in.s = s;
      out.push_back(check_separated_vs_packing(in, tag));
    }
    {
      SubaddInstance in;
      in.sys = sys;
      in.z1 = detail_ver::random_subset(rng, sys.size());
      in.z2 = detail_ver::random_subset(rng, sys.size());
      std::vector<int> uni = in.z1;
      uni.insert(uni.end(), in.z2.begin(), in.z2.end());
      std::sort(uni.begin(), uni.end());
      uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
      std::shuffle(uni.begin(), uni.end(), rng);
      std::uniform_int_distribution<int> kd(1, static_cast<int>(uni.size()));
      uni.resize(static_cast<std::size_t>(kd(rng)));
      std::sort(uni.begin(), uni.end());
      in.z = std::move(uni);
      in.n_lo = n;
      in.n_hi = std::min(n + 1, params.max_order);
      if (in.n_hi < in.n_lo) in.n_hi = in.n_lo;
      in.eps = eps;
      in.s = s;
      out.push_back(check_cover_subadditivity(in, tag));
    }
    {
      GreedySpanInstance in;
      in.sys = sys;
      in.z = detail_ver::random_subset(rng, sys.size());
      in.n = n;
      in.eps = eps;
      out.push_back(check_greedy_spanning(in, tag));
    }

    for (CheckReport& rep : out)
      if (!rep.pass && !rep.witness.is_null())
        rep.witness = detail_ver::shrink_witness(rep.witness);
  };

  int threads = params.threads > 0 ? params.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, std::max(1, params.count));
  if (threads == 1) {
    for (int i = 0; i < params.count; ++i) run_instance(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < params.count; i = next.fetch_add(1)) run_instance(i);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<CheckReport> all;
  for (auto& batch : per_instance)
    for (auto& rep : batch) all.push_back(std::move(rep));
  return all;
}

}  // namespace topent
