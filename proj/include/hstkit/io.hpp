#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hstkit/adversary.hpp"
#include "hstkit/hst.hpp"
#include "hstkit/kserver.hpp"
#include "hstkit/metric.hpp"
#include "hstkit/mts.hpp"
#include "hstkit/ramsey.hpp"

namespace hstkit {

using Json = nlohmann::ordered_json;

// ---- metric ----

inline Json metric_to_json(const MetricSpace& m) {
  Json j;
  j["points"] = m.points();
  j["dist"] = m.matrix();
  return j;
}

inline MetricSpace metric_from_json(const Json& j, double tol = kDefaultTol) {
  if (!j.is_object() || !j.contains("dist")) throw ValidationError("metric JSON needs a \"dist\" matrix");
  std::vector<std::vector<double>> mat;
  try {
    mat = j.at("dist").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("metric JSON: \"dist\" must be a matrix of numbers");
  }
  std::vector<std::string> names;
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) names.push_back(p.is_string() ? p.get<std::string>() : p.dump());
  }
  return validate_metric(mat, names, tol);
}

// ---- HST ----

inline Json hst_node_to_json(const HstTree& t, int v) {
  Json j;
  if (t[v].is_leaf()) {
    j["point"] = t[v].point;
    j["delta"] = 0.0;
    return j;
  }
  j["delta"] = t[v].delta;
  Json ch = Json::array();
  for (int c : t[v].children) ch.push_back(hst_node_to_json(t, c));
  j["children"] = std::move(ch);
  return j;
}

inline Json hst_to_json(const HstTree& t) {
  if (t.empty()) throw DomainError("hst_to_json: empty tree");
  return hst_node_to_json(t, t.root);
}

inline int hst_node_from_json(const Json& j, HstTree& t) {
  if (!j.is_object()) throw ValidationError("HST JSON: node must be an object");
  if (j.contains("children") && !j.at("children").empty()) {
    if (!j.contains("delta")) throw ValidationError("HST JSON: internal node needs \"delta\"");
    std::vector<int> ch;
    for (const auto& c : j.at("children")) ch.push_back(hst_node_from_json(c, t));
    return t.add_node(j.at("delta").get<double>(), std::move(ch));
  }
  if (!j.contains("point")) throw ValidationError("HST JSON: leaf needs \"point\"");
  const auto& p = j.at("point");
  return t.add_leaf(p.is_string() ? p.get<std::string>() : p.dump());
}

inline HstTree hst_from_json(const Json& j) {
  HstTree t;
  t.root = hst_node_from_json(j, t);
  validate_hst(t);
  return t;
}

// ---- tasks and requests ----

inline std::string tasks_to_jsonl(const TaskSeq<double>& seq) {
  std::string out;
  for (const auto& t : seq) {
    Json j;
    j["i"] = t.point;
    j["c"] = t.cost;
    out += j.dump() + "\n";
  }
  return out;
}

inline TaskSeq<double> tasks_from_jsonl(std::istream& in, std::size_t n_points) {
  TaskSeq<double> seq;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("i") || !j.contains("c"))
      throw ValidationError("task line " + std::to_string(lineno) + ": expected {\"i\": int, \"c\": float}");
    long long i = j.at("i").get<long long>();
    double c = j.at("c").get<double>();
    if (i < 0 || std::size_t(i) >= n_points) throw ValidationError("task line " + std::to_string(lineno) + ": point out of range");
    if (!(c >= 0) || !std::isfinite(c)) throw ValidationError("task line " + std::to_string(lineno) + ": cost must be finite and >= 0");
    seq.push_back({std::size_t(i), c});
  }
  return seq;
}

inline std::string requests_to_jsonl(const std::vector<std::size_t>& sigma, const MetricSpace& m) {
  std::string out;
  for (std::size_t l : sigma) out += Json{{"point", m.name(l)}}.dump() + "\n";
  return out;
}

// ---- reports ----

inline Json extraction_to_json(const Extraction& ex) {
  Json j;
  j["subset"] = ex.subset;
  j["tree"] = hst_to_json(ex.tree);
  j["guaranteed_size"] = ex.guaranteed_size;
  j["guaranteed_factor"] = ex.guaranteed_factor;
  j["measured_factor"] = ex.measured_factor;
  if (ex.t > 0) j["t"] = ex.t;
  return j;
}

inline Json approx_to_json(const ApproxReport& r) {
  Json j;
  j["alpha"] = std::isinf(r.alpha) ? Json("inf") : Json(r.alpha);
  j["dominated"] = r.dominated;
  j["worst_pair"] = {r.worst_pair.first, r.worst_pair.second};
  j["optimal_rescale"] = r.optimal_rescale;
  j["rescaled_alpha"] = r.rescaled_alpha;
  return j;
}

inline Json constants_to_json(const Constants& c) {
  return Json{{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"lambda3", c.lambda3}, {"rho", c.rho},
              {"c1", c.c1},           {"c2", c.c2},           {"c3", c.c3}};
}

// Missing keys keep their defaults; rho-derived c2 follows rho unless given.
inline Constants constants_from_json(const Json& j) {
  Constants c = Constants::defaults();
  if (j.contains("preset")) {
    std::string p = j.at("preset").get<std::string>();
    if (p == "aggressive") c = Constants::aggressive();
    else if (p != "default") throw ValidationError("constants: unknown preset '" + p + "'");
  }
  auto get = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  get("lambda1", c.lambda1);
  get("lambda2", c.lambda2);
  get("lambda3", c.lambda3);
  get("rho", c.rho);
  if (j.contains("rho") && !j.contains("c2")) c.c2 = 0.5 * c.rho;
  get("c1", c.c1);
  get("c2", c.c2);
  get("c3", c.c3);
  c.validate();
  return c;
}

inline Json discrete_to_json(const DiscreteAdversary& d) {
  Json j;
  j["type"] = to_string(d.kind);
  j["b"] = d.b;
  j["delta"] = d.delta;
  j["r"] = d.r;
  j["beta"] = d.beta;
  j["r_bound"] = d.r_bound;
  j["eta"] = d.eta;
  j["alpha"] = d.coefficients();
  if (!d.label.empty()) j["points"] = d.label;
  if (d.kind == AdvKind::unfair_equal || d.kind == AdvKind::unfair_binary) {
    j["ell"] = d.ell;
    j["mu_tilde"] = d.mu_tilde;
    j["mu"] = d.mu;
    j["m"] = d.m;
    j["delta1"] = d.delta1;
    if (d.kind == AdvKind::unfair_binary) j["delta2"] = d.delta2;
    j["p_hat_lb"] = d.p_hat_lb;
  }
  return j;
}

inline Json flexible_to_json(const FlexibleDiscrete& f) {
  Json j;
  j["type"] = "flexible";
  j["r"] = f.r;
  j["beta"] = f.beta;
  j["eta"] = f.eta;
  j["gamma"] = f.gamma;
  j["r_bound"] = f.r_bound;
  j["alpha"] = f.alpha;
  j["base"] = discrete_to_json(f.base);
  return j;
}

inline Json interval_to_json(const Interval99& iv) {
  return Json{{"mean", iv.mean}, {"se", iv.se}, {"lo", iv.lo}, {"hi", iv.hi}};
}

inline Json estimate_to_json(const RatioEstimate& e) {
  Json j;
  j["trials"] = e.trials;
  j["mean_length"] = e.mean_length;
  j["upper_target"] = e.upper_target;
  j["lower_target"] = e.lower_target;
  j["best_start"] = e.best_start;
  Json o = Json::array();
  for (const auto& iv : e.opt0_by_start) o.push_back(interval_to_json(iv));
  j["opt0_by_start"] = std::move(o);
  j["opt0_clear"] = e.opt0_clear;
  Json algs = Json::array();
  for (const auto& a : e.algorithms) {
    Json x;
    x["name"] = a.name;
    x["min_mean"] = a.min_mean;
    x["consistent"] = a.consistent;
    x["clear"] = a.clear;
    Json c = Json::array();
    for (const auto& iv : a.cost_by_start) c.push_back(interval_to_json(iv));
    x["cost_by_start"] = std::move(c);
    algs.push_back(std::move(x));
  }
  j["algorithms"] = std::move(algs);
  return j;
}

template <class T>
Json cost_report_to_json(const CostReport<T>& r) {
  return Json{{"total", as_double(r.total)},
              {"moving", as_double(r.moving)},
              {"local", as_double(r.local)},
              {"moves", r.moves},
              {"final_point", r.final_point}};
}

// ---- files ----

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("'" + path + "' is not valid JSON");
  return j;
}

}  // namespace hstkit
