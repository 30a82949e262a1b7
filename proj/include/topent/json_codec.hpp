#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "topent/caratheodory.hpp"
#include "topent/capacity.hpp"
#include "topent/errors.hpp"
#include "topent/estimate.hpp"
#include "topent/finite_system.hpp"
#include "topent/sft.hpp"

namespace topent {

using Json = nlohmann::ordered_json;

// Systems serialize with an explicit distance table, whatever backend they
// were built on, so a replayed witness sees bit-identical distances.
inline Json system_to_json(const FiniteSystem& sys) {
  Json j;
  j["points"] = sys.names();
  std::vector<double> tri;
  for (int i = 0; i < sys.size(); ++i)
    for (int k = i + 1; k < sys.size(); ++k) tri.push_back(sys.dist(i, k));
  j["metric"] = Json{{"table", tri}};
  Json map = Json::object();
  for (int i = 0; i < sys.size(); ++i) map[sys.name(i)] = sys.name(sys.step(i));
  j["map"] = std::move(map);
  return j;
}

inline int point_index(const std::vector<std::string>& names, const std::string& n) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return static_cast<int>(i);
  throw config_error("unknown point name: " + n);
}

inline FiniteSystem system_from_json(const Json& j, bool validate_triangle = true) {
  if (!j.contains("points") || !j.contains("metric") || !j.contains("map"))
    throw config_error("system document needs 'points', 'metric' and 'map' fields");
  std::vector<std::string> names = j.at("points").get<std::vector<std::string>>();
  if (names.empty()) throw config_error("'points' must be nonempty");
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t k = i + 1; k < names.size(); ++k)
      if (names[i] == names[k]) throw config_error("duplicate point name: " + names[i]);

  std::vector<int> step(names.size());
  const Json& map = j.at("map");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!map.contains(names[i]))
      throw config_error("map must be total; missing image for point " + names[i]);
    step[i] = point_index(names, map.at(names[i]).get<std::string>());
  }

  const Json& metric = j.at("metric");
  if (metric.contains("table")) {
    return FiniteSystem::from_table(std::move(names),
                                    metric.at("table").get<std::vector<double>>(), std::move(step),
                                    validate_triangle);
  }
  if (metric.contains("coords")) {
    auto coords = metric.at("coords").get<std::vector<std::vector<double>>>();
    const std::string kind = metric.value("kind", std::string("euclidean"));
    CoordMetric::Norm norm;
    if (kind == "euclidean")
      norm = CoordMetric::Norm::euclidean;
    else if (kind == "chebyshev")
      norm = CoordMetric::Norm::chebyshev;
    else
      throw config_error("metric kind must be 'euclidean' or 'chebyshev', got '" + kind + "'");
    return FiniteSystem::from_coords(std::move(names), std::move(coords), norm, std::move(step));
  }
  throw config_error("metric needs either a 'table' or 'coords'");
}

inline Json subset_to_json(const FiniteSystem& sys, const std::vector<int>& members) {
  Json arr = Json::array();
  for (int p : members) arr.push_back(sys.name(p));
  return arr;
}

inline std::vector<int> subset_from_json(const FiniteSystem& sys, const Json& arr) {
  std::vector<int> out;
  for (const auto& n : arr) out.push_back(point_index(sys.names(), n.get<std::string>()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline Json sft_to_json(const SftSpec& sft) {
  Json j;
  j["alphabet"] = sft.alphabet();
  const SftSpec blocks = sft.built_from_forbidden() ? sft.block_presentation() : sft;
  Json rows = Json::array();
  const auto m = blocks.block_transition_matrix();
  for (const auto& row : m) {
    Json r = Json::array();
    for (double v : row) r.push_back(v > 0 ? 1 : 0);
    rows.push_back(std::move(r));
  }
  j["transitions"] = std::move(rows);
  if (sft.built_from_forbidden()) j["block_alphabet"] = blocks.alphabet();
  return j;
}

inline Json schedule_to_json(const ScaleSchedule& s) {
  return Json{{"n_min", s.n_min},         {"n_max", s.n_max}, {"epsilons", s.epsilons},
              {"s_lo", s.s_lo},           {"s_hi", s.s_hi},   {"tol", s.tol},
              {"exact_cap", s.exact_cap}, {"candidate_cap", s.candidate_cap}};
}

inline ScaleSchedule schedule_from_json(const Json& j) {
  ScaleSchedule s;
  s.n_min = j.value("n_min", s.n_min);
  s.n_max = j.value("n_max", s.n_max);
  if (j.contains("epsilons")) s.epsilons = j.at("epsilons").get<std::vector<double>>();
  s.s_lo = j.value("s_lo", s.s_lo);
  s.s_hi = j.value("s_hi", s.s_hi);
  s.tol = j.value("tol", s.tol);
  s.exact_cap = j.value("exact_cap", s.exact_cap);
  s.candidate_cap = j.value("candidate_cap", s.candidate_cap);
  s.validate();
  return s;
}

inline Json estimate_to_json(const EntropyEstimate& est) {
  Json j;
  j["value"] = est.value;
  j["bracket"] = Json{{"lower", est.lower}, {"upper", est.upper}};
  Json pe = Json::array();
  for (const auto& [eps, expo] : est.per_epsilon)
    pe.push_back(Json{{"epsilon", eps}, {"exponent", expo}});
  j["per_epsilon"] = std::move(pe);
  Json sp = Json::array();
  for (const auto& p : est.scale_points)
    sp.push_back(Json{{"epsilon", p.epsilon},
                      {"n", p.order},
                      {"log_r_lower", p.log_lower},
                      {"log_r_upper", p.log_upper},
                      {"r_lower", p.count_lower},
                      {"r_upper", p.count_upper},
                      {"exact", p.exact},
                      {"spanning_count", p.spanning_count}});
  j["scale_points"] = std::move(sp);
  Json cr = Json::array();
  for (const auto& c : est.crossings)
    cr.push_back(Json{{"epsilon", c.epsilon},
                      {"N", c.order},
                      {"s_critical", c.s_critical},
                      {"value_at_crossing", c.value_at_crossing},
                      {"optimal", c.optimal}});
  j["crossings"] = std::move(cr);
  j["stats"] = est.stats;
  j["notes"] = est.notes;
  return j;
}

inline Json certificate_to_json(const FiniteSystem& sys, const SeparationCertificate& cert) {
  return Json{{"kind", cert.kind == SeparationCertificate::Kind::separated ? "separated"
                                                                           : "spanning"},
              {"points", subset_to_json(sys, cert.points)},
              {"n", cert.order},
              {"epsilon", cert.radius},
              {"optimal", cert.optimal}};
}

inline Json cover_solution_to_json(const FiniteSystem& sys, const CoverSolution& sol) {
  Json balls = Json::array();
  for (const auto& b : sol.balls)
    balls.push_back(Json{{"center", sys.name(b.center)},
                         {"order", b.order},
                         {"radius", b.radius},
                         {"closed", b.closed}});
  return Json{{"balls", std::move(balls)}, {"value", sol.value}, {"optimal", sol.optimal}};
}

inline Json packing_solution_to_json(const FiniteSystem& sys, const PackingSolution& sol) {
  Json balls = Json::array();
  for (const auto& b : sol.balls)
    balls.push_back(Json{{"center", sys.name(b.center)},
                         {"order", b.order},
                         {"radius", b.radius},
                         {"closed", b.closed}});
  return Json{{"balls", std::move(balls)}, {"value", sol.value}, {"optimal", sol.optimal}};
}

}  // namespace topent
