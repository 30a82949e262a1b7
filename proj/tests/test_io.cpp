#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "topent/io.hpp"
#include "topent/caratheodory.hpp"

using namespace topent;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("finite system documents") {
  SECTION("table form round-trips") {
    const char* doc = R"({
      "points": ["a", "b", "c"],
      "metric": {"table": [1.0, 3.0, 2.0]},
      "map": {"a": "b", "b": "c", "c": "a"},
      "subsets": {"Z1": ["a", "c"]}
    })";
    const std::string path = write_temp("topent_sys.json", doc);
    SystemSource src = load_system(path);
    REQUIRE(src.finite.has_value());
    CHECK(src.finite->size() == 3);
    CHECK(src.finite->dist(0, 2) == 3.0);
    CHECK(src.finite->step(2) == 0);
    CHECK(resolve_finite_subset(src, "Z1").members() == std::vector<int>{0, 2});
    CHECK(resolve_finite_subset(src, "all").size() == 3);
    CHECK_THROWS_AS(resolve_finite_subset(src, "nope"), config_error);

    const Json back = system_to_json(*src.finite);
    FiniteSystem again = system_from_json(back);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(again.dist(i, j) == src.finite->dist(i, j));
  }
  SECTION("non-metric tables are rejected with the violating triple") {
    const char* doc = R"({
      "points": ["a", "b", "c"],
      "metric": {"table": [1.0, 10.0, 2.0]},
      "map": {"a": "a", "b": "b", "c": "c"}
    })";
    const std::string path = write_temp("topent_bad.json", doc);
    try {
      load_system(path);
      FAIL("expected a config error");
    } catch (const config_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("triangle") != std::string::npos);
      CHECK(msg.find("d(a,c)") != std::string::npos);
    }
  }
  SECTION("coordinate metrics") {
    const char* doc = R"({
      "points": ["p", "q"],
      "metric": {"coords": [[0.0, 0.0], [3.0, 4.0]], "kind": "euclidean"},
      "map": {"p": "q", "q": "p"}
    })";
    SystemSource src = load_system(write_temp("topent_coords.json", doc));
    CHECK(src.finite->dist(0, 1) == 5.0);

    const char* doc2 = R"({
      "points": ["p", "q"],
      "metric": {"coords": [[0.0, 0.0], [3.0, 4.0]], "kind": "chebyshev"},
      "map": {"p": "q", "q": "p"}
    })";
    SystemSource src2 = load_system(write_temp("topent_coords2.json", doc2));
    CHECK(src2.finite->dist(0, 1) == 4.0);
  }
  SECTION("defective documents") {
    CHECK_THROWS_AS(load_system(write_temp("t1.json", R"({"points": ["a"]})")), config_error);
    CHECK_THROWS_AS(load_system(write_temp(
                        "t2.json",
                        R"({"points": ["a","b"], "metric": {"table":[1.0]}, "map": {"a":"b"}})")),
                    config_error);
    CHECK_THROWS_AS(
        load_system(write_temp(
            "t3.json",
            R"({"points": ["a","a"], "metric": {"table":[1.0]}, "map": {"a":"a"}})")),
        config_error);
    CHECK_THROWS_AS(load_system(write_temp("t4.json", "{ not json")), config_error);
    CHECK_THROWS_AS(load_system("no_such_file.json"), config_error);
  }
}

TEST_CASE("sft documents") {
  SECTION("transition matrix") {
    const char* doc = R"({
      "alphabet": ["0", "1"],
      "transitions": [[1, 1], [1, 0]],
      "subsets": {"left": ["0"], "pair": [["0", "1"]]}
    })";
    SystemSource src = load_system(write_temp("topent_sft.json", doc));
    REQUIRE(src.sft.has_value());
    CHECK(src.sft->count_words(4) == 8);
    CHECK(resolve_symbolic_subset(src, "left").bases == std::vector<std::vector<int>>{{0}});
    CHECK(resolve_symbolic_subset(src, "pair").bases == std::vector<std::vector<int>>{{0, 1}});
    CHECK(resolve_symbolic_subset(src, "all").full);
  }
  SECTION("forbidden words, string shorthand") {
    const char* doc = R"({"alphabet": ["0", "1"], "forbidden": ["11"]})";
    SystemSource src = load_system(write_temp("topent_sft2.json", doc));
    CHECK(src.sft->count_words(4) == 8);
  }
  SECTION("empty-language rejection") {
    const char* doc = R"({"alphabet": ["0"], "forbidden": ["0"]})";
    CHECK_THROWS_AS(load_system(write_temp("topent_sft3.json", doc)), config_error);
  }
}

TEST_CASE("built-in systems") {
  CHECK(load_system("full2").sft->alphabet_size() == 2);
  CHECK(load_system("full3").sft->alphabet_size() == 3);
  CHECK(load_system("goldenmean").sft->count_words(4) == 8);
  CHECK(load_system("identity_4").finite->size() == 4);
  CHECK(load_system("identity_4").finite->step(2) == 2);

  SystemSource cyc = load_system("cycle_5");
  REQUIRE(cyc.finite.has_value());
  CHECK(cyc.finite->size() == 5);
  CHECK(cyc.finite->step(4) == 0);
  CHECK(cyc.finite->dist(0, 4) == 1.0);
  CHECK(cyc.finite->dist(0, 2) == 2.0);

  BuiltinOptions opt;
  opt.truncation_depth = 4;
  SystemSource ext = load_system("example_extension(full2,3)", opt);
  REQUIRE(ext.finite.has_value());
  CHECK(ext.finite->size() == 16 * 4);
  REQUIRE(ext.finite_subsets.count("embedded") == 1);
  CHECK(ext.finite_subsets.at("embedded").size() == 16);

  CHECK_THROWS_AS(load_system("example_extension(identity_3,2)"), config_error);
  CHECK(!builtin_system("not_a_builtin").has_value());
}

TEST_CASE("json writing") {
  const auto path = (std::filesystem::temp_directory_path() / "topent_out.json").string();
  write_json_file(path, Json{{"a", 1}});
  const Json j = detail_io::read_json_file(path);
  CHECK(j.at("a") == 1);
}

TEST_CASE("schedule round-trip") {
  ScaleSchedule s;
  s.n_min = 3;
  s.n_max = 17;
  s.epsilons = {0.5, 0.125};
  s.s_lo = 0.25;
  s.s_hi = 6.0;
  s.tol = 1e-8;
  s.exact_cap = 32;
  s.candidate_cap = 512;
  const ScaleSchedule back = schedule_from_json(schedule_to_json(s));
  CHECK(back.n_min == s.n_min);
  CHECK(back.n_max == s.n_max);
  CHECK(back.epsilons == s.epsilons);
  CHECK(back.s_lo == s.s_lo);
  CHECK(back.s_hi == s.s_hi);
  CHECK(back.tol == s.tol);
  CHECK(back.exact_cap == s.exact_cap);
  CHECK(back.candidate_cap == s.candidate_cap);
  CHECK_THROWS_AS(schedule_from_json(Json{{"n_min", 5}, {"n_max", 2}}), config_error);
}

TEST_CASE("estimate documents carry the tabulated scales") {
  SftSpec full2 = SftSpec::full_shift(2);
  ScaleSchedule sched;
  sched.n_min = 4;
  sched.n_max = 8;
  sched.epsilons = {0.5, 0.25};
  const Json cap = estimate_to_json(capacity_entropy_estimate(full2, SymbolicSubset::whole(), sched));
  for (const char* key : {"value", "bracket", "per_epsilon", "scale_points", "crossings",
                          "stats", "notes"})
    CHECK(cap.contains(key));
  CHECK(cap.at("scale_points").size() == 2u * 5u);
  CHECK(cap.at("scale_points")[0].contains("spanning_count"));

  const Json hb = estimate_to_json(bowen_entropy_estimate(full2, SymbolicSubset::whole(), sched));
  CHECK(hb.at("crossings").size() == 4u);  // two radii, two proxy orders
  CHECK(hb.at("crossings")[0].contains("s_critical"));
}
