#include "apor/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "apor/errors.hpp"

namespace apor {

using nlohmann::json;

namespace {

void allow_keys(const json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
  return v;
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

Vector vector_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where);
  return v;
}

Matrix matrix_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(where + ": rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], where);
  }
  return m;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

struct VarIndex {
  std::vector<DiscreteVar> vars;

  std::size_t find(const std::string& name, const std::string& where) const {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].name == name) return i;
    }
    throw ConfigError(where + ": unknown discrete variable '" + name + "'");
  }

  DiscreteState state(const json& j, const std::string& where) const {
    if (!j.is_object()) throw ConfigError(where + ": expected an object of variable values");
    std::vector<int> values(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) values[i] = vars[i].min;
    for (const auto& [k, v] : j.items()) {
      if (!v.is_number_integer()) throw ConfigError(where + ": value of '" + k + "' must be an integer");
      values[find(k, where)] = v.get<int>();
    }
    return DiscreteState(std::move(values));
  }

  json state_json(const DiscreteState& s) const {
    json o = json::object();
    for (std::size_t i = 0; i < vars.size(); ++i) o[vars[i].name] = s[i];
    return o;
  }
};

json halfspace_json(const HalfSpace& h) { return {{"normal", to_json(h.normal)}, {"bound", h.bound}}; }

HalfSpace halfspace_of(const json& j, const std::string& where) {
  allow_keys(j, {"normal", "bound"}, where);
  return {vector_of(need(j, "normal", where), where + ".normal"), number(need(j, "bound", where), where + ".bound")};
}

}  // namespace

json system_to_json(const TransitionSystem& system) {
  VarIndex idx{system.discrete_vars()};
  json j;
  j["dimension"] = system.dimension();
  j["norm"] = to_string(system.norm());
  j["discrete_vars"] = json::array();
  for (const auto& v : system.discrete_vars()) j["discrete_vars"].push_back({{"name", v.name}, {"min", v.min}, {"max", v.max}});
  j["actions"] = json::array();
  for (const auto& a : system.actions()) {
    json ja;
    ja["name"] = a.name;
    json guard = json::object();
    json disc = json::object();
    for (const auto& c : a.guard.discrete) disc[system.discrete_vars()[c.var].name] = c.value;
    guard["discrete"] = disc;
    guard["halfspaces"] = json::array();
    for (const auto& h : a.guard.halfspaces) guard["halfspaces"].push_back(halfspace_json(h));
    ja["guard"] = guard;
    ja["matrix"] = to_json(a.matrix);
    if (const auto* off = std::get_if<AffineOffset>(&a.offset)) {
      ja["offset"] = {{"base", to_json(off->base)}};
      if (off->coupling.cols() > 0) ja["offset"]["coupling"] = to_json(off->coupling);
    } else {
      json table = json::array();
      for (const auto& [s, v] : std::get<TableOffset>(a.offset).entries)
        table.push_back({{"state", idx.state_json(s)}, {"value", to_json(v)}});
      ja["offset"] = {{"table", table}};
    }
    json upd = json::object();
    for (const auto& u : a.update) upd[system.discrete_vars()[u.var].name] = u.value;
    ja["update"] = upd;
    j["actions"].push_back(std::move(ja));
  }
  json init;
  init["discrete"] = idx.state_json(system.initial().discrete);
  if (const auto* box = std::get_if<Box>(&system.initial().region)) {
    init["box"] = {{"lower", to_json(box->lower)}, {"upper", to_json(box->upper)}};
  } else {
    const auto& ball = std::get<BallRegion>(system.initial().region);
    init["ball"] = {{"center", to_json(ball.center)}, {"radius", ball.radius}};
  }
  j["initial"] = init;
  if (system.invariant_radius()) j["invariant_radius"] = *system.invariant_radius();
  return j;
}

TransitionSystem system_from_json(const json& j) {
  allow_keys(j, {"dimension", "norm", "discrete_vars", "actions", "initial", "invariant_radius"}, "system");
  const std::size_t dim = count(need(j, "dimension", "system"), "system.dimension");
  const Norm norm = j.contains("norm") ? parse_norm(j["norm"].get<std::string>()) : Norm::L2;

  VarIndex idx;
  if (j.contains("discrete_vars")) {
    for (const auto& v : j["discrete_vars"]) {
      allow_keys(v, {"name", "min", "max"}, "discrete_vars");
      idx.vars.push_back({need(v, "name", "discrete_vars").get<std::string>(), v.value("min", 0), v.value("max", 1)});
    }
  }

  std::vector<AffineAction> actions;
  for (const auto& ja : need(j, "actions", "system")) {
    AffineAction a;
    a.name = need(ja, "name", "action").get<std::string>();
    const std::string where = "action '" + a.name + "'";
    allow_keys(ja, {"name", "guard", "matrix", "offset", "update"}, where);
    if (ja.contains("guard")) {
      const auto& g = ja["guard"];
      allow_keys(g, {"discrete", "halfspaces"}, where + ".guard");
      if (g.contains("discrete")) {
        for (const auto& [k, v] : g["discrete"].items()) a.guard.discrete.push_back({idx.find(k, where), v.get<int>()});
      }
      if (g.contains("halfspaces")) {
        for (const auto& h : g["halfspaces"]) a.guard.halfspaces.push_back(halfspace_of(h, where + ".guard"));
      }
    }
    a.matrix = matrix_of(need(ja, "matrix", where), where + ".matrix");
    const auto& off = need(ja, "offset", where);
    allow_keys(off, {"base", "coupling", "table"}, where + ".offset");
    if (off.contains("table")) {
      TableOffset t;
      for (const auto& e : off["table"])
        t.entries[idx.state(need(e, "state", where), where)] = vector_of(need(e, "value", where), where);
      a.offset = std::move(t);
    } else {
      AffineOffset o{vector_of(need(off, "base", where), where + ".offset.base"),
                     Matrix(static_cast<Eigen::Index>(dim), 0)};
      if (off.contains("coupling")) o.coupling = matrix_of(off["coupling"], where + ".offset.coupling");
      a.offset = std::move(o);
    }
    if (ja.contains("update")) {
      for (const auto& [k, v] : ja["update"].items()) a.update.push_back({idx.find(k, where), v.get<int>()});
    }
    actions.push_back(std::move(a));
  }

  const auto& ji = need(j, "initial", "system");
  allow_keys(ji, {"discrete", "box", "ball"}, "initial");
  InitialSet init;
  init.discrete = idx.state(ji.value("discrete", json::object()), "initial.discrete");
  if (ji.contains("box")) {
    init.region = Box{vector_of(need(ji["box"], "lower", "initial.box"), "initial.box.lower"),
                      vector_of(need(ji["box"], "upper", "initial.box"), "initial.box.upper")};
  } else if (ji.contains("ball")) {
    init.region = BallRegion{vector_of(need(ji["ball"], "center", "initial.ball"), "initial.ball.center"),
                             number(need(ji["ball"], "radius", "initial.ball"), "initial.ball.radius")};
  } else {
    throw ConfigError("initial: needs 'box' or 'ball'");
  }
  std::optional<double> r_inv;
  if (j.contains("invariant_radius")) r_inv = number(j["invariant_radius"], "invariant_radius");
  return TransitionSystem(dim, idx.vars, std::move(actions), std::move(init), r_inv, norm);
}

json safety_to_json(const SafetyQuery& q) {
  json j;
  j["unsafe"] = json::array();
  for (const auto& poly : q.unsafe) {
    json p = json::array();
    for (const auto& h : poly) p.push_back(halfspace_json(h));
    j["unsafe"].push_back(std::move(p));
  }
  j["first_step"] = q.first_step;
  if (q.last_step) j["last_step"] = *q.last_step;
  return j;
}

SafetyQuery safety_from_json(const json& j) {
  allow_keys(j, {"unsafe", "box", "first_step", "last_step"}, "safety");
  SafetyQuery q;
  if (j.contains("box")) {
    allow_keys(j["box"], {"lower", "upper"}, "safety.box");
    q = SafetyQuery::outside_box(vector_of(need(j["box"], "lower", "safety.box"), "safety.box.lower"),
                                 vector_of(need(j["box"], "upper", "safety.box"), "safety.box.upper"));
  }
  if (j.contains("unsafe")) {
    for (const auto& p : j["unsafe"]) {
      std::vector<HalfSpace> poly;
      for (const auto& h : p) poly.push_back(halfspace_of(h, "safety.unsafe"));
      q.unsafe.push_back(std::move(poly));
    }
  }
  if (j.contains("first_step")) q.first_step = count(j["first_step"], "safety.first_step");
  if (j.contains("last_step")) q.last_step = count(j["last_step"], "safety.last_step");
  return q;
}

RunConfig parse_config(const json& j) {
  allow_keys(j,
             {"model", "model_params", "system", "delta0", "epsilon", "horizon", "norm", "discrepancy_decimals",
              "safety", "seed", "workers", "oracle_samples", "full_history", "tuple_budget", "node_budget"},
             "config");
  RunConfig c;
  if (j.contains("model")) c.model = j["model"].get<std::string>();
  if (j.contains("model_params")) {
    if (!j["model_params"].is_object()) throw ConfigError("model_params: expected an object");
    c.model_params = j["model_params"];
  }
  if (j.contains("system")) c.system = j["system"];
  if (c.model == "inline" && !c.system) throw ConfigError("model 'inline' needs a 'system' definition");
  if (j.contains("delta0")) {
    c.delta0 = number(j["delta0"], "delta0");
    if (!(*c.delta0 > 0)) throw ConfigError("delta0 must be positive");
  }
  if (j.contains("epsilon")) {
    c.epsilon = number(j["epsilon"], "epsilon");
    if (*c.epsilon < 0) throw ConfigError("epsilon must be non-negative");
  }
  if (j.contains("horizon")) c.horizon = count(j["horizon"], "horizon");
  if (j.contains("norm")) {
    try {
      c.norm = parse_norm(j["norm"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("norm: ") + e.what());
    }
  }
  if (j.contains("discrepancy_decimals")) c.discrepancy_decimals = j["discrepancy_decimals"].get<int>();
  if (j.contains("safety")) c.safety = safety_from_json(j["safety"]);
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) c.workers = count(j["workers"], "workers");
  if (j.contains("oracle_samples")) c.oracle_samples = count(j["oracle_samples"], "oracle_samples");
  if (j.contains("full_history")) c.full_history = j["full_history"].get<bool>();
  if (j.contains("tuple_budget")) c.tuple_budget = count(j["tuple_budget"], "tuple_budget");
  if (j.contains("node_budget")) c.node_budget = count(j["node_budget"], "node_budget");
  if (c.model == "inline" && (!c.delta0 || !c.epsilon || !c.horizon))
    throw ConfigError("an inline system needs delta0, epsilon and horizon");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["model"] = c.model;
  if (!c.model_params.empty()) j["model_params"] = c.model_params;
  if (c.system) j["system"] = *c.system;
  if (c.delta0) j["delta0"] = *c.delta0;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  if (c.horizon) j["horizon"] = *c.horizon;
  if (c.norm) j["norm"] = to_string(*c.norm);
  if (c.discrepancy_decimals) j["discrepancy_decimals"] = *c.discrepancy_decimals;
  if (c.safety) j["safety"] = safety_to_json(*c.safety);
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["oracle_samples"] = c.oracle_samples;
  j["full_history"] = c.full_history;
  j["tuple_budget"] = c.tuple_budget;
  j["node_budget"] = c.node_budget;
  return j;
}

namespace {

template <class T>
void take(const json& p, const char* key, T& out) {
  if (p.contains(key)) out = p[key].get<T>();
}

void take_vector(const json& p, const char* key, Vector& out) {
  if (p.contains(key)) out = vector_of(p[key], std::string("model_params.") + key);
}

ModelPreset build_preset(const RunConfig& c) {
  const json& p = c.model_params;
  if (c.model == "inline") {
    if (!p.empty()) throw ConfigError("model_params only apply to presets");
    ModelPreset m{"inline", system_from_json(*c.system), 0.0, 1.0, 0, -1, std::nullopt, {}};
    return m;
  }
  if (c.model == "consensus") {
    allow_keys(p, {"matrices", "init_center", "init_radius", "invariant_radius", "rounds", "safe_bound"},
               "model_params");
    ConsensusParams cp;
    if (p.contains("matrices")) {
      for (const auto& m : p["matrices"]) cp.matrices.push_back(matrix_of(m, "model_params.matrices"));
    }
    take_vector(p, "init_center", cp.init_center);
    take(p, "init_radius", cp.init_radius);
    if (p.contains("invariant_radius")) cp.invariant_radius = number(p["invariant_radius"], "invariant_radius");
    take(p, "rounds", cp.rounds);
    take(p, "safe_bound", cp.safe_bound);
    return build_consensus(cp);
  }
  if (c.model == "heating") {
    allow_keys(p, {"init_center", "init_radius", "threshold", "rounds", "safe_lower", "safe_upper"}, "model_params");
    HeatingParams hp;
    take_vector(p, "init_center", hp.init_center);
    take(p, "init_radius", hp.init_radius);
    take(p, "threshold", hp.threshold);
    take(p, "rounds", hp.rounds);
    take(p, "safe_lower", hp.safe_lower);
    take(p, "safe_upper", hp.safe_upper);
    return build_heating(hp);
  }
  if (auto pp = platoon_scenario(c.model)) {
    allow_keys(p,
               {"cars", "dt", "accelerations", "accelerate_gap", "brake_gap", "velocity", "positions", "spacing",
                "position_spread", "ball_radius", "min_gap"},
               "model_params");
    take(p, "cars", pp->cars);
    take(p, "dt", pp->dt);
    take(p, "accelerations", pp->accelerations);
    take(p, "accelerate_gap", pp->accelerate_gap);
    take(p, "brake_gap", pp->brake_gap);
    take(p, "velocity", pp->velocity);
    take(p, "positions", pp->positions);
    take(p, "spacing", pp->spacing);
    take(p, "position_spread", pp->position_spread);
    take(p, "ball_radius", pp->ball_radius);
    take(p, "min_gap", pp->min_gap);
    auto m = build_platoon(*pp);
    m.name = c.model;
    return m;
  }
  throw ConfigError("unknown model '" + c.model + "'");
}

}  // namespace

ModelPreset resolve_model(const RunConfig& c) {
  ModelPreset m = [&] {
    try {
      return build_preset(c);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("model_params: ") + e.what());
    }
  }();
  if (c.norm && *c.norm != m.system.norm()) {
    json s = system_to_json(m.system);
    s["norm"] = to_string(*c.norm);
    m.system = system_from_json(s);
  }
  if (c.delta0) m.delta0 = *c.delta0;
  if (c.epsilon) m.epsilon = *c.epsilon;
  if (c.horizon) {
    // A step-anchored safety window follows the horizon.
    if (m.safety && m.safety->first_step == m.horizon && m.horizon > 0) m.safety->first_step = *c.horizon;
    m.horizon = *c.horizon;
  }
  if (c.discrepancy_decimals) m.discrepancy_decimals = *c.discrepancy_decimals;
  if (c.safety) m.safety = c.safety;
  return m;
}

}  // namespace apor
