#include "apor/models.hpp"

#include <cmath>
#include <sstream>

#include "apor/errors.hpp"

namespace apor {

namespace {

Matrix rows3(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(3, 3);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

ModelPreset build_consensus(const ConsensusParams& params) {
  std::vector<Matrix> mats = params.matrices;
  if (mats.empty()) {
    mats = {rows3({{0.2, -0.2, -0.3}, {-0.2, 0.2, -0.1}, {-0.3, -0.1, 0.3}}),
            rows3({{0.2, 0.3, 0.2}, {0.3, -0.2, 0.3}, {0.2, 0.3, 0.0}}),
            rows3({{-0.1, 0.0, 0.4}, {0.0, 0.4, -0.2}, {0.4, -0.2, -0.1}})};
  }
  const auto n = mats.front().rows();
  for (const auto& m : mats) {
    if (m.rows() != n || m.cols() != n) throw ConfigError("consensus matrices must all be n x n");
  }
  const std::size_t agents = mats.size();
  Vector center = params.init_center.size() ? params.init_center : vec({2.5, 0.5, -3.0});
  if (center.size() != n) throw ConfigError("consensus initial centre has the wrong dimension");

  std::vector<DiscreteVar> vars;
  for (std::size_t i = 0; i < agents; ++i) vars.push_back({"d" + std::to_string(i), 0, 1});

  std::vector<AffineAction> actions;
  for (std::size_t i = 0; i < agents; ++i) {
    AffineAction a;
    a.name = "a_" + std::to_string(i);
    a.guard.discrete = {{i, 0}};
    a.matrix = mats[i];
    a.offset = AffineOffset{Vector::Zero(n), Matrix(n, 0)};
    a.update = {{i, 1}};
    actions.push_back(std::move(a));
  }
  AffineAction bot;
  bot.name = "a_bot";
  for (std::size_t i = 0; i < agents; ++i) {
    bot.guard.discrete.push_back({i, 1});
    bot.update.push_back({i, 0});
  }
  bot.matrix = Matrix::Identity(n, n);
  bot.offset = AffineOffset{Vector::Zero(n), Matrix(n, 0)};
  actions.push_back(std::move(bot));

  InitialSet init{DiscreteState(std::vector<int>(agents, 0)), BallRegion{center, params.init_radius}};
  const double r_inv = params.invariant_radius.value_or(4.0 * std::sqrt(static_cast<double>(n)));

  ModelPreset p{"consensus",
                TransitionSystem(static_cast<std::size_t>(n), vars, std::move(actions), init, r_inv, Norm::L2),
                params.epsilon,
                params.delta0,
                params.rounds * (agents + 1),
                2,
                std::nullopt,
                {}};
  SafetyQuery q;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    q.unsafe.push_back({HalfSpace{-e, -params.safe_bound}});
    q.unsafe.push_back({HalfSpace{e, -params.safe_bound}});
  }
  q.first_step = p.horizon;
  p.safety = std::move(q);
  return p;
}

ModelPreset build_platoon(const PlatoonParams& params) {
  const std::size_t cars = params.cars;
  if (cars < 2) throw ConfigError("platoon needs at least two cars");
  if (!(params.dt > 0) || !std::isfinite(params.dt)) throw ConfigError("platoon dt must be positive");
  if (params.accelerations.empty() || params.accelerations.size() > 26)
    throw ConfigError("platoon needs between 1 and 26 acceleration choices");
  const auto n = static_cast<Eigen::Index>(2 * cars);
  const double dt = params.dt;

  Matrix a = Matrix::Identity(n, n);
  for (std::size_t i = 0; i < cars; ++i) a(2 * i, 2 * i + 1) = dt;

  auto gap_normal = [&](std::size_t i) {
    Vector c = Vector::Zero(n);
    c[static_cast<Eigen::Index>(2 * (i - 1))] = 1.0;
    c[static_cast<Eigen::Index>(2 * i)] = -1.0;
    return c;
  };

  const std::size_t k = params.accelerations.size();
  std::vector<AffineAction> actions;
  std::vector<std::size_t> choice(cars, 0);
  while (true) {
    AffineAction act;
    Vector b = Vector::Zero(n);
    for (std::size_t i = 0; i < cars; ++i) {
      const double acc = params.accelerations[choice[i]];
      act.name.push_back(static_cast<char>('a' + choice[i]));
      b[static_cast<Eigen::Index>(2 * i)] = acc * dt * dt / 2.0;
      b[static_cast<Eigen::Index>(2 * i + 1)] = acc * dt;
      if (i == 0) continue;
      const Vector c = gap_normal(i);
      if (acc > 0) {
        act.guard.halfspaces.push_back({-c, -params.accelerate_gap});
      } else if (acc < 0) {
        act.guard.halfspaces.push_back({c, params.brake_gap});
      } else {
        act.guard.halfspaces.push_back({c, params.accelerate_gap});
        act.guard.halfspaces.push_back({-c, -params.brake_gap});
      }
    }
    act.matrix = a;
    act.offset = AffineOffset{b, Matrix(n, 0)};
    actions.push_back(std::move(act));
    std::size_t i = cars;
    while (i > 0 && ++choice[i - 1] == k) choice[--i] = 0;
    if (i == 0) break;
  }

  Vector center(n);
  for (std::size_t i = 0; i < cars; ++i) {
    const double pos = params.positions.empty() ? params.spacing * static_cast<double>(cars - 1 - i)
                                                : params.positions.at(i);
    center[static_cast<Eigen::Index>(2 * i)] = pos;
    center[static_cast<Eigen::Index>(2 * i + 1)] = params.velocity;
  }
  if (!params.positions.empty() && params.positions.size() != cars)
    throw ConfigError("platoon positions must list every car");

  ContinuousRegion region;
  if (params.ball_radius > 0) {
    region = BallRegion{center, params.ball_radius};
  } else {
    Vector lo = center, hi = center;
    for (std::size_t i = 0; i < params.position_spread.size() && i < cars; ++i) {
      lo[static_cast<Eigen::Index>(2 * i)] -= params.position_spread[i];
      hi[static_cast<Eigen::Index>(2 * i)] += params.position_spread[i];
    }
    region = Box{lo, hi};
  }

  ModelPreset p{"platoon" + std::to_string(cars),
                TransitionSystem(static_cast<std::size_t>(n), {}, std::move(actions),
                                 InitialSet{DiscreteState(), region}, std::nullopt, Norm::L2),
                params.epsilon,
                params.delta0,
                params.horizon,
                2,
                std::nullopt,
                {}};
  SafetyQuery q;
  for (std::size_t i = 1; i < cars; ++i) q.unsafe.push_back({HalfSpace{gap_normal(i), params.min_gap}});
  p.safety = std::move(q);
  p.assumptions = {"initial velocity " + num(params.velocity) + " for every car",
                   "unsafe when a gap to the predecessor is <= " + num(params.min_gap)};
  return p;
}

ModelPreset build_heating(const HeatingParams& params) {
  const Matrix wh = rows3({{0.96, 0.01, 0.01}, {0.02, 0.97, 0.01}, {0.0, 0.01, 0.97}});
  const Vector bh = vec({1.2, 0.0, 1.2});
  const Matrix ch = vec({0.4, 0.0, 0.4}).asDiagonal();
  const Matrix wt = rows3({{0.18, 0.11, 0.14}, {0.18, 0.25, 0.17}, {0.09, 0.13, 0.28}});
  const Vector bt = vec({34.2, 24.0, 30.0});
  const Matrix ct = vec({11.4, 8.0, 10.0}).asDiagonal();
  constexpr std::size_t rooms = 3;

  // d0..d2 decided flags, then m0..m2 heater states.
  std::vector<DiscreteVar> vars;
  for (std::size_t i = 0; i < rooms; ++i) vars.push_back({"d" + std::to_string(i), 0, 1});
  for (std::size_t i = 0; i < rooms; ++i) vars.push_back({"m" + std::to_string(i), 0, 1});

  // Offsets couple to the updated (d, m) valuation; only the m half counts.
  auto coupling = [](const Matrix& c) {
    Matrix out = Matrix::Zero(3, 6);
    out.rightCols(3) = c;
    return out;
  };

  std::vector<AffineAction> actions;
  for (std::size_t i = 0; i < rooms; ++i) {
    for (bool on : {true, false}) {
      AffineAction a;
      a.name = (on ? "on_" : "off_") + std::to_string(i);
      a.guard.discrete = {{i, 0}};
      Vector e = Vector::Zero(3);
      e[static_cast<Eigen::Index>(i)] = 1.0;
      if (on) {
        a.guard.halfspaces = {{e, params.threshold}};
      } else {
        a.guard.halfspaces = {{-e, -params.threshold}};
      }
      a.matrix = wh;
      a.offset = AffineOffset{bh, coupling(ch)};
      a.update = {{i, 1}, {rooms + i, on ? 1 : 0}};
      actions.push_back(std::move(a));
    }
  }
  AffineAction flow;
  flow.name = "flow";
  for (std::size_t i = 0; i < rooms; ++i) {
    flow.guard.discrete.push_back({i, 1});
    flow.update.push_back({i, 0});
  }
  flow.matrix = wt;
  flow.offset = AffineOffset{bt, coupling(ct)};
  actions.push_back(std::move(flow));

  const Vector center = params.init_center.size() ? params.init_center : vec({70.0, 70.0, 70.0});
  if (center.size() != 3) throw ConfigError("heating initial centre must have 3 entries");
  InitialSet init{DiscreteState(std::vector<int>(2 * rooms, 0)), BallRegion{center, params.init_radius}};

  ModelPreset p{"heating",
                TransitionSystem(3, vars, std::move(actions), init, std::nullopt, Norm::L2),
                params.epsilon,
                params.delta0,
                params.rounds * (rooms + 1),
                2,
                std::nullopt,
                {}};
  p.safety = SafetyQuery::outside_box(Vector::Constant(3, params.safe_lower), Vector::Constant(3, params.safe_upper));
  p.assumptions = {"heaters start off",
                   "on_i needs x[i] <= " + num(params.threshold) + ", off_i needs x[i] >= " +
                       num(params.threshold)};
  return p;
}

std::vector<std::string> preset_names() {
  return {"consensus", "heating", "platoon2", "platoon2-40", "platoon2-25", "platoon4"};
}

std::optional<PlatoonParams> platoon_scenario(const std::string& name) {
  PlatoonParams pp;
  if (name == "platoon4") {
    pp.cars = 4;
    pp.spacing = 40.0;
    pp.ball_radius = 4.0;
    pp.delta0 = 4.0;
    return pp;
  }
  double lead = 0.0;
  if (name == "platoon2") {
    lead = 60.0;
  } else if (name == "platoon2-40") {
    lead = 40.0;
  } else if (name == "platoon2-25") {
    lead = 25.0;
  } else {
    return std::nullopt;
  }
  pp.positions = {lead, 2.5};
  pp.position_spread = {0.0, 2.5};
  return pp;
}

ModelPreset preset_by_name(const std::string& name) {
  if (name == "consensus") return build_consensus();
  if (name == "heating") return build_heating();
  if (auto pp = platoon_scenario(name)) {
    auto p = build_platoon(*pp);
    p.name = name;
    return p;
  }
  throw ConfigError("unknown model preset '" + name + "'");
}

}  // namespace apor
