#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "topent/caratheodory.hpp"

using namespace topent;

namespace {

FiniteSystem three_cycle() {
  return FiniteSystem::from_table({"a", "b", "c"}, {1.0, 3.0, 2.0}, {1, 2, 0});
}

FiniteSystem random_system(std::mt19937_64& rng, int points) {
  std::uniform_int_distribution<int> coord(0, 64);
  std::uniform_int_distribution<int> image(0, points - 1);
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(points));
  std::vector<int> step(static_cast<std::size_t>(points));
  std::vector<std::string> names;
  for (int i = 0; i < points; ++i) {
    coords[static_cast<std::size_t>(i)] = {coord(rng) / 64.0, coord(rng) / 64.0};
    step[static_cast<std::size_t>(i)] = image(rng);
    names.push_back("p" + std::to_string(i));
  }
  return FiniteSystem::from_coords(std::move(names), std::move(coords),
                                   CoordMetric::Norm::chebyshev, std::move(step));
}

ScaleSchedule orders(int lo, int hi, std::vector<double> eps = {0.5}) {
  ScaleSchedule s;
  s.n_min = lo;
  s.n_max = hi;
  s.epsilons = std::move(eps);
  s.s_hi = 64.0;
  return s;
}

}  // namespace

TEST_CASE("bowen outer measure") {
  FiniteSystem sys = three_cycle();
  SubsetRef all = SubsetRef::whole(sys);

  SECTION("one ball suffices past the diameter, and s = 0 counts balls") {
    auto sol = bowen_outer_measure(all, 0.0, 10.0, orders(1, 3));
    CHECK(sol.value == 1.0);
    CHECK(sol.optimal);
    CHECK(sol.balls.size() == 1);
  }
  SECTION("a singleton takes the single deepest ball") {
    auto sol = bowen_outer_measure(SubsetRef(sys, {1}), 0.7, 0.5, orders(1, 3));
    CHECK(sol.value == std::exp(-0.7 * 3));
    REQUIRE(sol.balls.size() == 1);
    CHECK(sol.balls[0].order == 3);
  }
  SECTION("matches family enumeration on random 5-point systems") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 25; ++trial) {
      FiniteSystem s5 = random_system(rng, 5);
      SubsetRef z = SubsetRef::whole(s5);
      std::uniform_int_distribution<int> u(1, 96);
      const double eps = u(rng) / 64.0;
      for (double s : {0.0, 0.5}) {
        auto sol = bowen_outer_measure(z, s, eps, orders(1, 3));
        REQUIRE(sol.optimal);
        CHECK(sol.value == oracles::brute_min_cover_value(z, s, eps, 1, 3));
      }
    }
  }
}

TEST_CASE("packing premeasure") {
  FiniteSystem sys = three_cycle();
  SubsetRef all = SubsetRef::whole(sys);

  SECTION("tiny radius packs every singleton at s = 0") {
    auto sol = packing_premeasure(all, 0.0, 0.5, orders(1, 1));
    CHECK(sol.value == 3.0);
  }
  SECTION("huge radius packs one ball at the minimal order") {
    auto sol = packing_premeasure(all, 0.9, 10.0, orders(2, 4));
    CHECK(sol.value == std::exp(-0.9 * 2));
    REQUIRE(sol.balls.size() == 1);
    CHECK(sol.balls[0].order == 2);
  }
  SECTION("matches family enumeration on random 5-point systems") {
    std::mt19937_64 rng(211);
    for (int trial = 0; trial < 25; ++trial) {
      FiniteSystem s5 = random_system(rng, 5);
      SubsetRef z = SubsetRef::whole(s5);
      std::uniform_int_distribution<int> u(1, 96);
      const double eps = u(rng) / 64.0;
      for (double s : {0.3, 1.0}) {
        auto sol = packing_premeasure(z, s, eps, orders(1, 3));
        REQUIRE(sol.optimal);
        CHECK(sol.value == oracles::brute_max_packing_value(z, s, eps, 1, 3));
      }
    }
  }
}

TEST_CASE("fixed-scale measure monotonicity") {
  std::mt19937_64 rng(307);
  for (int trial = 0; trial < 15; ++trial) {
    FiniteSystem sys = random_system(rng, 6);
    SubsetRef z = SubsetRef::whole(sys);
    std::uniform_int_distribution<int> u(8, 64);
    const double eps = u(rng) / 64.0;

    // cover value nondecreasing in N (orders [N, 4])
    double prev = -1.0;
    for (int lo = 1; lo <= 4; ++lo) {
      const double v = bowen_outer_measure(z, 0.5, eps, orders(lo, 4)).value;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    // cover value nonincreasing in s
    CHECK(bowen_outer_measure(z, 1.0, eps, orders(1, 3)).value <=
          bowen_outer_measure(z, 0.25, eps, orders(1, 3)).value + 1e-12);
    // cover value nondecreasing as the radius shrinks
    CHECK(bowen_outer_measure(z, 0.5, eps, orders(1, 3)).value <=
          bowen_outer_measure(z, 0.5, eps / 2.0, orders(1, 3)).value + 1e-12);
    // packing value nonincreasing as N grows
    CHECK(packing_premeasure(z, 0.5, eps, orders(2, 4)).value <=
          packing_premeasure(z, 0.5, eps, orders(1, 4)).value + 1e-12);
  }
}

TEST_CASE("subadditivity and the separated-packing bound") {
  std::mt19937_64 rng(401);
  for (int trial = 0; trial < 15; ++trial) {
    FiniteSystem sys = random_system(rng, 7);
    SubsetRef z1(sys, {0, 1, 2, 3});
    SubsetRef z2(sys, {3, 4, 5, 6});
    SubsetRef z = union_subset(z1, z2);
    std::uniform_int_distribution<int> u(8, 80);
    const double eps = u(rng) / 64.0;
    const double s = 0.5;
    const auto sched = orders(1, 3);
    CHECK(bowen_outer_measure(z, s, eps, sched).value <=
          bowen_outer_measure(z1, s, eps, sched).value +
              bowen_outer_measure(z2, s, eps, sched).value + 1e-12);

    const auto sep = max_separated_exact(z, 1, 2.0 * eps);
    const double lhs = static_cast<double>(sep.points.size()) * std::exp(-s * 1);
    CHECK(lhs <= packing_premeasure(z, s, eps, sched).value * (1.0 + 1e-12));
  }
}

TEST_CASE("critical exponent search") {
  SECTION("closed-form crossing") {
    const double c = 0.37;
    auto cross = critical_exponent([c](double s) { return std::exp(12.0 * (c - s)); }, 0.0, 2.0,
                                   1e-10);
    CHECK(cross.crossed);
    CHECK(std::fabs(cross.s - c) < 1e-9);
  }
  SECTION("identically zero evaluator reports the lower endpoint") {
    auto cross = critical_exponent([](double) { return 0.0; }, 0.0, 2.0, 1e-9);
    CHECK_FALSE(cross.crossed);
    CHECK(cross.s == 0.0);
    CHECK(cross.flag == "below_threshold_at_range_start");
  }
  SECTION("never crossing reports the upper endpoint") {
    auto cross = critical_exponent([](double) { return 5.0; }, 0.0, 2.0, 1e-9);
    CHECK_FALSE(cross.crossed);
    CHECK(cross.s == 2.0);
  }
  SECTION("non-monotone evaluators are a contract violation") {
    CHECK_THROWS_AS(critical_exponent([](double s) { return s; }, 0.0, 2.0, 1e-9),
                    contract_error);
  }
  SECTION("agrees with a dense grid scan on a truncated-shift cover value") {
    SftSpec full2 = SftSpec::full_shift(2);
    FiniteSystem t = truncate_shift(full2, 6);
    SubsetRef z = SubsetRef::whole(t);
    const auto sched = orders(2, 4, {0.5});
    auto eval = [&](double s) { return bowen_outer_measure(z, s, 0.5, sched).value; };
    auto cross = critical_exponent(eval, 0.0, 8.0, 1e-6);
    REQUIRE(cross.crossed);
    // dense scan oracle
    double scan = 8.0;
    for (double s = 0.0; s <= 8.0; s += 1e-3)
      if (eval(s) <= 1.0) {
        scan = s;
        break;
      }
    CHECK(std::fabs(cross.s - scan) < 2e-3);
  }
}

TEST_CASE("bowen entropy estimates") {
  SECTION("singleton and identity map sit at zero") {
    FiniteSystem one = FiniteSystem::from_table({"*"}, {}, {0});
    auto est = bowen_entropy_estimate(SubsetRef::whole(one), orders(1, 4, {0.5, 0.25}));
    CHECK(est.value == 0.0);

    FiniteSystem id = FiniteSystem::from_table({"a", "b", "c"}, {1, 1, 1}, {0, 1, 2}, false);
    auto est2 = bowen_entropy_estimate(SubsetRef::whole(id), orders(1, 4, {0.5, 0.25}));
    CHECK(est2.value < 1e-9);
  }
  SECTION("truncated full 2-shift extrapolates to log 2") {
    SftSpec full2 = SftSpec::full_shift(2);
    FiniteSystem t = truncate_shift(full2, 11);
    auto est = bowen_entropy_estimate(SubsetRef::whole(t), orders(4, 9, {0.5, 0.25}));
    CHECK(std::fabs(est.value - std::log(2.0)) < 1e-6);
    CHECK(est.lower <= est.value);
    CHECK(est.value <= est.upper);
  }
  SECTION("symbolic track matches") {
    auto est = bowen_entropy_estimate(SftSpec::full_shift(2), SymbolicSubset::whole(),
                                      orders(4, 20, {0.5, 0.25}));
    CHECK(std::fabs(est.value - std::log(2.0)) < 1e-6);
    CHECK(est.upper >= std::log(2.0));
  }
}

TEST_CASE("packing entropy estimates") {
  SECTION("singleton") {
    FiniteSystem one = FiniteSystem::from_table({"*"}, {}, {0});
    auto est = packing_entropy_estimate(SubsetRef::whole(one), orders(1, 4, {0.5, 0.25}));
    CHECK(est.value == 0.0);
  }
  SECTION("fixed points under the identity vanish via the singleton decomposition") {
    FiniteSystem id = FiniteSystem::from_table({"a", "b", "c"}, {1, 1, 1}, {0, 1, 2}, false);
    SubsetRef z = SubsetRef::whole(id);
    Decomposition parts;
    for (int i = 0; i < 3; ++i) parts.parts.push_back(SubsetRef(id, {i}));
    auto est = packing_entropy_estimate(z, orders(1, 4, {0.5, 0.25}), {parts});
    CHECK(est.value == 0.0);
  }
  SECTION("full 2-shift, symbolic, trivial decomposition") {
    auto est = packing_entropy_estimate(SftSpec::full_shift(2), SymbolicSubset::whole(),
                                        orders(4, 20, {0.5, 0.25}));
    CHECK(std::fabs(est.value - std::log(2.0)) < 1e-6);
  }
  SECTION("a decomposition must union to the target") {
    FiniteSystem sys = three_cycle();
    SubsetRef z = SubsetRef::whole(sys);
    Decomposition bad;
    bad.parts.push_back(SubsetRef(sys, {0}));
    CHECK_THROWS_AS(packing_entropy_estimate(z, orders(1, 4, {0.5, 0.25}), {bad}),
                    contract_error);
  }
}

TEST_CASE("entropy order on symbolic instances") {
  const auto sched = orders(4, 20, {0.5, 0.25});
  for (const SftSpec& sft :
       {SftSpec::full_shift(2), SftSpec::from_forbidden({"0", "1"}, {{1, 1}})}) {
    auto hb = bowen_entropy_estimate(sft, SymbolicSubset::whole(), sched);
    auto hp = packing_entropy_estimate(sft, SymbolicSubset::whole(), sched);
    auto hu = capacity_entropy_estimate(sft, SymbolicSubset::whole(), sched);
    CHECK(hb.lower <= hp.upper + 1e-9);
    CHECK(hp.lower <= hu.upper + 1e-9);
    // packing exponents do not drop as the radius shrinks on these instances
    CHECK_FALSE(hp.has_note("epsilon_monotonicity_violated"));
    CHECK(hb.lower <= hb.value);
    CHECK(hb.value <= hb.upper);
    CHECK(hp.lower <= hp.value);
    CHECK(hp.value <= hp.upper);
  }
}

TEST_CASE("increasing sequences toward the packing bound") {
  SECTION("trivial decomposition suffices when capacity is already close") {
    FiniteSystem id = FiniteSystem::from_table({"a", "b"}, {1}, {0, 1}, false);
    SubsetRef z = SubsetRef::whole(id);
    auto seq = build_increasing_sequence(z, 0.1, orders(1, 4, {0.5, 0.25}), {});
    REQUIRE(seq.achieved);
    CHECK(seq.stages.back().members() == z.members());
  }
  SECTION("two fixed points build up from singletons") {
    FiniteSystem id = FiniteSystem::from_table({"a", "b"}, {1}, {0, 1}, false);
    SubsetRef z = SubsetRef::whole(id);
    Decomposition parts;
    parts.parts.push_back(SubsetRef(id, {0}));
    parts.parts.push_back(SubsetRef(id, {1}));
    auto seq = build_increasing_sequence(z, 0.05, orders(1, 4, {0.5, 0.25}), {parts});
    REQUIRE(seq.achieved);
    REQUIRE(seq.stages.size() >= 1);
    for (const auto& est : seq.estimates) CHECK(est.value <= 0.05 + 1e-12);
  }
  SECTION("decompositions must cover the target") {
    FiniteSystem swap = FiniteSystem::from_table({"a", "b"}, {1}, {1, 0}, false);
    SubsetRef z = SubsetRef::whole(swap);
    Decomposition bad;
    bad.parts.push_back(SubsetRef(swap, {0}));
    CHECK_THROWS_AS(build_increasing_sequence(z, 0.1, orders(1, 4, {0.5, 0.25}), {bad}),
                    contract_error);
  }
  SECTION("unachievable thresholds return an explicit insufficient result") {
    // On a short truncation the saturating packing counts extrapolate below
    // the capacity slope, so with no extra decompositions nothing qualifies.
    SftSpec full2 = SftSpec::full_shift(2);
    FiniteSystem t = truncate_shift(full2, 4);
    SubsetRef z = SubsetRef::whole(t);
    auto seq = build_increasing_sequence(z, 0.01, orders(1, 4, {0.5, 0.25}), {});
    CHECK_FALSE(seq.achieved);
    CHECK(seq.message.find("insufficient") != std::string::npos);
  }
}

TEST_CASE("increasing sequence on the symbolic split") {
  SftSpec full2 = SftSpec::full_shift(2);
  ScaleSchedule sched = orders(8, 24, {0.5, 0.25});
  auto decomp = first_symbol_decomposition(full2, SymbolicSubset::whole());
  REQUIRE(decomp.parts.size() == 2);

  auto seq = build_increasing_sequence(full2, SymbolicSubset::whole(), 0.05, sched, {decomp});
  REQUIRE(seq.achieved);
  REQUIRE(!seq.stages.empty());
  for (const auto& est : seq.estimates)
    CHECK(std::fabs(est.value - std::log(2.0)) < 1e-9);  // every stage grows at log 2
  // stages nest: each stage's class set contains the previous one's
  for (std::size_t i = 1; i < seq.stages.size(); ++i) {
    auto prev = class_words(full2, seq.stages[i - 1], 2);
    auto next = class_words(full2, seq.stages[i], 2);
    CHECK(std::includes(next.begin(), next.end(), prev.begin(), prev.end()));
  }
}
