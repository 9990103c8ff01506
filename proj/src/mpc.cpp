#include "fleet/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "fleet/kernels.hpp"

namespace fleet {

RobotState motion_model(RobotState s, Action u, double dt) {
  return {s.x + u.v * std::cos(s.theta) * dt, s.y + u.v * std::sin(s.theta) * dt,
          wrap_angle(s.theta + u.omega * dt)};
}

double cost_reference(const RobotState& s, const TrajPoint& ref, const Action& u, const Action& u_ref,
                      const Action& u_prev, const MpcParams& p) {
  const double ex = s.x - ref.x;
  const double ey = s.y - ref.y;
  const double eth = wrap_angle(s.theta - ref.heading);
  const double dv = u.v - u_ref.v;
  const double dw = u.omega - u_ref.omega;
  const double rv = u.v - u_prev.v;
  const double rw = u.omega - u_prev.omega;
  return p.q_state[0] * ex * ex + p.q_state[1] * ey * ey + p.q_state[2] * eth * eth +
         p.q_action[0] * dv * dv + p.q_action[1] * dw * dw + p.q_rate[0] * rv * rv + p.q_rate[1] * rw * rw;
}

double cost_obstacle(Vec2 z, std::span<const Polygon> obstacles, double weight, double inflation, Vec2* grad) {
  double total = 0.0;
  for (const Polygon& poly : obstacles) {
    const Vec2 lo = poly.bbox_min();
    const Vec2 hi = poly.bbox_max();
    if (z.x < lo.x - inflation || z.x > hi.x + inflation || z.y < lo.y - inflation || z.y > hi.y + inflation) {
      continue;
    }
    const SignedDistance sd = signed_distance(poly, z);
    const double pen = inflation - sd.value;
    if (pen <= 0.0) continue;
    total += weight * pen * pen;
    if (grad) {
      const double c = -2.0 * weight * pen;
      grad->x += c * sd.gradient.x;
      grad->y += c * sd.gradient.y;
    }
  }
  return total;
}

double cost_fleet(Vec2 zi, Vec2 zj, double q, double d_fleet) {
  const double pen = d_fleet - distance(zi, zj);
  return pen > 0.0 ? q * pen * pen : 0.0;
}

double mpc_cost(const MpcProblem& pr, std::span<const Action> u, std::vector<Action>* grad,
                std::vector<Vec2>* positions) {
  const MpcParams& p = pr.params;
  const std::size_t n = u.size();
  const double dt = p.dt;
  const Action u_ref{pr.reference_speed, 0.0};

  std::vector<RobotState> s(n + 1);
  s[0] = pr.start;
  for (std::size_t k = 0; k < n; ++k) s[k + 1] = motion_model(s[k], u[k], dt);

  double total = 0.0;
  std::vector<double> px(n), py(n), gx(n, 0.0), gy(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    px[k] = s[k + 1].x;
    py[k] = s[k + 1].y;
    const Action& prev = k == 0 ? pr.previous : u[k - 1];
    total += cost_reference(s[k + 1], pr.reference[k], u[k], u_ref, prev, p);
  }
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 g{};
    total += cost_obstacle({px[k], py[k]}, pr.obstacles, p.obstacle_weight, p.obstacle_inflation, &g);
    gx[k] += g.x;
    gy[k] += g.y;
  }
  const auto& kern = kernels::active();
  for (const NeighborPlan& nb : pr.neighbors) {
    std::vector<double> bx(n), by(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 q = nb.positions[std::min(k, nb.positions.size() - 1)];
      bx[k] = q.x;
      by[k] = q.y;
    }
    total += kern.fleet_penalty(px, py, bx, by, p.q_fleet, p.d_fleet, gx, gy);
  }

  if (positions) {
    positions->resize(n);
    for (std::size_t k = 0; k < n; ++k) (*positions)[k] = {px[k], py[k]};
  }
  if (!grad) return total;

  grad->assign(n, Action{});
  // Adjoint of the state: lx, ly, lt = dJ/ds_{k+1} accumulated from the end.
  double lx = 0.0, ly = 0.0, lt = 0.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const RobotState& sn = s[kk + 1];
    const TrajPoint& ref = pr.reference[kk];
    lx += 2.0 * p.q_state[0] * (sn.x - ref.x) + gx[kk];
    ly += 2.0 * p.q_state[1] * (sn.y - ref.y) + gy[kk];
    lt += 2.0 * p.q_state[2] * wrap_angle(sn.theta - ref.heading);

    const RobotState& sk = s[kk];
    const double c = std::cos(sk.theta);
    const double sn_ = std::sin(sk.theta);
    const Action& prev = kk == 0 ? pr.previous : u[kk - 1];
    Action& g = (*grad)[kk];
    g.v += c * dt * lx + sn_ * dt * ly + 2.0 * p.q_action[0] * (u[kk].v - u_ref.v) +
           2.0 * p.q_rate[0] * (u[kk].v - prev.v);
    g.omega += dt * lt + 2.0 * p.q_action[1] * (u[kk].omega - u_ref.omega) +
               2.0 * p.q_rate[1] * (u[kk].omega - prev.omega);
    if (kk > 0) {
      (*grad)[kk - 1].v -= 2.0 * p.q_rate[0] * (u[kk].v - prev.v);
      (*grad)[kk - 1].omega -= 2.0 * p.q_rate[1] * (u[kk].omega - prev.omega);
    }
    // Propagate through the dynamics to s_kk.
    lt += u[kk].v * dt * (-sn_ * lx + c * ly);
  }
  return total;
}

void project_actions(std::vector<Action>& u, const Action& previous, const MpcParams& p, double max_speed) {
  const double vmax = std::min(p.u_max[0], max_speed);
  Action prev = previous;
  for (Action& a : u) {
    const double vlo = std::max(p.u_min[0], prev.v + p.du_min[0] * p.dt);
    const double vhi = std::min(vmax, prev.v + p.du_max[0] * p.dt);
    const double wlo = std::max(p.u_min[1], prev.omega + p.du_min[1] * p.dt);
    const double whi = std::min(p.u_max[1], prev.omega + p.du_max[1] * p.dt);
    a.v = std::min(std::max(a.v, vlo), vhi);
    a.omega = std::min(std::max(a.omega, wlo), whi);
    prev = a;
  }
}

namespace {

bool finite_actions(const std::vector<Action>& g) {
  return std::all_of(g.begin(), g.end(), [](const Action& a) { return std::isfinite(a.v) && std::isfinite(a.omega); });
}

MpcSolution braking(const MpcProblem& pr, std::size_t n) {
  MpcSolution out;
  out.fallback = true;
  out.actions.assign(n, Action{});
  Action prev = pr.previous;
  for (Action& a : out.actions) {
    a.v = prev.v + pr.params.du_min[0] * pr.params.dt;
    a.omega = 0.0;
    prev = a;
  }
  project_actions(out.actions, pr.previous, pr.params, pr.max_speed);
  RobotState s = pr.start;
  for (const Action& a : out.actions) {
    s = motion_model(s, a, pr.params.dt);
    out.positions.push_back({s.x, s.y});
  }
  return out;
}

}  // namespace

MpcSolution solve_mpc(const MpcProblem& pr, std::span<const Action> warm_start) {
  const MpcParams& p = pr.params;
  const std::size_t n = pr.reference.size();
  std::vector<Action> u(warm_start.begin(), warm_start.end());
  u.resize(n, u.empty() ? Action{pr.reference_speed, 0.0} : u.back());
  project_actions(u, pr.previous, p, pr.max_speed);

  std::vector<Action> g;
  double cost = mpc_cost(pr, u, &g);
  if (!std::isfinite(cost) || !finite_actions(g)) return braking(pr, n);

  MpcSolution out;
  out.history.push_back(cost);
  double alpha = 1e-2;
  std::vector<Action> trial(n), g_trial;
  int it = 0;
  for (; it < p.max_iterations; ++it) {
    bool accepted = false;
    double trial_cost = cost;
    double moved = 0.0;
    for (int bt = 0; bt < 40; ++bt) {
      for (std::size_t k = 0; k < n; ++k) {
        trial[k] = {u[k].v - alpha * g[k].v, u[k].omega - alpha * g[k].omega};
      }
      project_actions(trial, pr.previous, p, pr.max_speed);
      double step_sq = 0.0;
      moved = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double dv = trial[k].v - u[k].v;
        const double dw = trial[k].omega - u[k].omega;
        step_sq += dv * dv + dw * dw;
        moved = std::max({moved, std::abs(dv), std::abs(dw)});
      }
      if (step_sq == 0.0) break;
      trial_cost = mpc_cost(pr, trial, &g_trial);
      if (std::isfinite(trial_cost) && finite_actions(g_trial) && trial_cost <= cost - 1e-4 / alpha * step_sq &&
          trial_cost < cost) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    // Barzilai-Borwein step for the next iteration.
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double sv = trial[k].v - u[k].v, sw = trial[k].omega - u[k].omega;
      const double yv = g_trial[k].v - g[k].v, yw = g_trial[k].omega - g[k].omega;
      ss += sv * sv + sw * sw;
      sy += sv * yv + sw * yw;
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-8, 1e3) : std::min(alpha * 2.0, 1e3);

    u.swap(trial);
    g.swap(g_trial);
    cost = trial_cost;
    out.history.push_back(cost);
    if (moved < p.tolerance) {
      ++it;
      break;
    }
  }

  out.iterations = it;
  out.cost = mpc_cost(pr, u, nullptr, &out.positions);
  out.actions = std::move(u);
  return out;
}

}  // namespace fleet
