// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace cfsim {
namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

/// d/d eta_{m,l} of A_{k,l} A_{k,l}^H:
/// B B^H + (B C^H + C B^H) / (2 sqrt(max(eta_{m,l}, floor))), C = other APs' part of A_{k,l}.
SmallMat stream_derivative(const SmallMat& b, const SmallMat& c, double eta, double sqrt_floor) {
  SmallMat d = b * b.adjoint();
  if (c.squaredNorm() > 0.0) {
    const double s = 0.5 / std::sqrt(std::max(eta, sqrt_floor));
    d.noalias() += s * (b * c.adjoint() + c * b.adjoint());
  }
  return d;
}

SmallMat other_ap_part(const GainTensor& g, const PowerAllocation& p, int k, int l, int m) {
  SmallMat c = SmallMat::Zero(g.streams, g.streams);
  for (int mp : g.assoc.servers[l]) {
    if (mp == m) continue;
    const double e = p.eta(mp, l);
    if (e > 0.0) c += std::sqrt(e) * g.block(k, l, mp);
  }
  return c;
}

/// (B / ln 2) Re tr(T^{-1} dT/d eta_{m,l}) for l in K(m); `include_own` adds l == k.
Eigen::VectorXd logdet_gradient(const GainTensor& g, const PowerAllocation& p, const SmallMat& t,
                                int m, int k, bool include_own, double bandwidth_hz,
                                double sqrt_floor) {
  const auto& users = g.assoc.served_by[m];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(users.size()));
  Eigen::LLT<SmallMat> llt(t);
  if (llt.info() != Eigen::Success) throw Error("logdet_gradient: matrix is not positive definite");
  for (std::size_t j = 0; j < users.size(); ++j) {
    const int l = users[j];
    if (l == k && !include_own) continue;
    const SmallMat d =
        stream_derivative(g.block(k, l, m), other_ap_part(g, p, k, l, m), p.eta(m, l), sqrt_floor);
    out[static_cast<Eigen::Index>(j)] = bandwidth_hz * kInvLn2 * llt.solve(d).trace().real();
  }
  return out;
}

Eigen::VectorXd row_on(const PowerAllocation& p, int m, const std::vector<int>& users) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(users.size()));
  for (std::size_t j = 0; j < users.size(); ++j) x[static_cast<Eigen::Index>(j)] = p.eta(m, users[j]);
  return x;
}

void set_row(PowerAllocation& p, int m, const std::vector<int>& users, const Eigen::VectorXd& x) {
  for (std::size_t j = 0; j < users.size(); ++j) p.eta(m, users[j]) = x[static_cast<Eigen::Index>(j)];
}

/// Surrogate numerator sum_k Rbar_k as a function of AP m's powers only, with
/// every other AP frozen at the anchor. Precomputes the frozen parts so one
/// evaluation costs O(K |K(m)| P^3).
class ApSubproblem {
 public:
  ApSubproblem(const GainTensor& g, const PowerAllocation& anchor, int m, double bandwidth_hz,
               double sqrt_floor)
      : scalar_(g.streams == 1), bandwidth_(bandwidth_hz), users_(g.assoc.served_by[m]) {
    const int K = g.num_ms;
    const int n = static_cast<int>(users_.size());
    x0_ = row_on(anchor, m, users_);
    lin_ = Eigen::VectorXd::Zero(n);
    terms_.resize(K);
    for (int k = 0; k < K; ++k) {
      Terms& t = terms_[k];
      t.base = g.noise;
      for (int l = 0; l < K; ++l) {
        if (g.assoc.serves(m, l)) continue;
        const SmallMat a = stream_matrix(g, anchor, k, l);
        t.base.noalias() += a * a.adjoint();
      }
      t.b.resize(n);
      t.c.resize(n);
      for (int j = 0; j < n; ++j) {
        t.b[j] = g.block(k, users_[j], m);
        t.c[j] = other_ap_part(g, anchor, k, users_[j], m);
      }
      if (g.streams == 1) {
        t.base_s = t.base(0, 0).real();
        for (int j = 0; j < n; ++j) {
          t.bs.push_back(t.b[j](0, 0));
          t.cs.push_back(t.c[j](0, 0));
        }
      }
      const GSplit gs = g_split_eval(g, anchor, k, bandwidth_hz);
      constant_ += gs.g2;
      lin_ += grad_g2_wrt_ap(g, anchor, m, k, bandwidth_hz, sqrt_floor);
    }
  }

  const Eigen::VectorXd& anchor() const { return x0_; }
  const std::vector<int>& users() const { return users_; }

  double value(const Eigen::VectorXd& x) const {
    double g1 = 0.0;
    if (scalar_) {
      for (const Terms& t : terms_) g1 += std::log2(scalar_total(t, x.cwiseMax(0.0).cwiseSqrt()));
    } else {
      for (const Terms& t : terms_) g1 += log2det_hpd(assemble(t, x));
    }
    return bandwidth_ * g1 - constant_ - lin_.dot(x - x0_);
  }

  /// Same objective in amplitudes y = sqrt(x); smooth at y = 0.
  double value_amp(const Eigen::VectorXd& y) const { return value(y.cwiseAbs2()); }

  /// d/dy_j of log det T_k is 2 Re tr(T_k^{-1} b_j a_j^H) with a_j = c_j + y_j b_j.
  Eigen::VectorXd gradient_amp(const Eigen::VectorXd& y) const {
    Eigen::VectorXd grad = -2.0 * lin_.cwiseProduct(y);
    const double scale = 2.0 * bandwidth_ * kInvLn2;
    for (const Terms& t : terms_) {
      if (scalar_) {
        const double inv = scale / scalar_total(t, y);
        for (Eigen::Index j = 0; j < y.size(); ++j) {
          const std::complex<double> a = t.cs[j] + y[j] * t.bs[j];
          grad[j] += inv * (t.bs[j] * std::conj(a)).real();
        }
        continue;
      }
      const SmallMat m = assemble(t, y.cwiseAbs2());
      Eigen::LLT<SmallMat> llt(m);
      if (llt.info() != Eigen::Success) throw Error("ApSubproblem: covariance is not positive definite");
      const SmallMat inv = llt.solve(SmallMat::Identity(m.rows(), m.cols()));
      for (Eigen::Index j = 0; j < y.size(); ++j) {
        const SmallMat a = t.c[j] + y[j] * t.b[j];
        // tr(X b a^H) = sum_{il} (X b)_{il} conj(a_{il})
        grad[j] += scale * (inv * t.b[j]).cwiseProduct(a.conjugate()).sum().real();
      }
    }
    return grad;
  }

 private:
  struct Terms {
    SmallMat base;
    std::vector<SmallMat> b;
    std::vector<SmallMat> c;
    // single-stream copies
    double base_s = 0.0;
    std::vector<std::complex<double>> bs;
    std::vector<std::complex<double>> cs;
  };

  static SmallMat assemble(const Terms& t, const Eigen::VectorXd& x) {
    SmallMat m = t.base;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const SmallMat a = t.c[j] + std::sqrt(std::max(x[j], 0.0)) * t.b[j];
      m.noalias() += a * a.adjoint();
    }
    return m;
  }

  static double scalar_total(const Terms& t, const Eigen::VectorXd& y) {
    double v = t.base_s;
    for (Eigen::Index j = 0; j < y.size(); ++j) v += std::norm(t.cs[j] + y[j] * t.bs[j]);
    if (!(v > 0.0)) throw Error("ApSubproblem: covariance is not positive definite");
    return v;
  }

  bool scalar_ = false;
  double bandwidth_;
  std::vector<int> users_;
  Eigen::VectorXd x0_;
  Eigen::VectorXd lin_;
  double constant_ = 0.0;
  std::vector<Terms> terms_;
};

/// {y >= 0, |y|^2 <= p_max}, the amplitude image of the per-AP power set.
Eigen::VectorXd project_amplitudes(const Eigen::VectorXd& v, double p_max) {
  Eigen::VectorXd y = v.cwiseMax(0.0);
  const double n2 = y.squaredNorm();
  if (n2 > p_max) y *= std::sqrt(p_max / n2);
  return y;
}

/// Projected gradient ascent in amplitude space: Barzilai-Borwein trial steps with
/// Armijo backtracking. Never returns a point with a lower objective than `y`.
Eigen::VectorXd projected_gradient_ascent(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                          Eigen::VectorXd y, double p_max,
                                          const OptimizerOptions& opts) {
  const double radius = std::sqrt(p_max);
  double fy = f(y);
  Eigen::VectorXd gy = grad(y);
  double step = -1.0;
  for (int it = 0; it < opts.pg_max_iters; ++it) {
    const double gmax = gy.cwiseAbs().maxCoeff();
    if (!(gmax > 0.0) || !std::isfinite(gmax)) break;
    if (step <= 0.0) step = radius / gmax;

    bool accepted = false;
    Eigen::VectorXd next;
    double fnext = fy;
    for (int bt = 0; bt < 60; ++bt) {
      next = project_amplitudes(y + step * gy, p_max);
      fnext = f(next);
      if (std::isfinite(fnext) && fnext >= fy + opts.pg_armijo_c * gy.dot(next - y)) {
        accepted = true;
        break;
      }
      step *= opts.pg_backtrack;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = next - y;
    y = std::move(next);
    fy = fnext;
    if (s.cwiseAbs().maxCoeff() <= opts.pg_tol * radius) break;
    Eigen::VectorXd gnext = grad(y);
    const double sy = s.dot(gnext - gy);
    gy = std::move(gnext);
    step = sy < 0.0 ? s.squaredNorm() / -sy : step / opts.pg_backtrack;
  }
  return y;
}

double circuit_term(const PowerModel& model, int m, double radiated) {
  if (model.kind == PowerModelKind::Basic || radiated > 0.0) return model.circuit_w[m];
  return model.idle_fraction * model.circuit_w[m];
}

PowerAllocation feasible_warm_start(const PowerAllocation& warm, const Association& assoc, double p_max) {
  PowerAllocation out;
  out.eta = Eigen::MatrixXd::Zero(assoc.num_aps, assoc.num_ms);
  for (int m = 0; m < assoc.num_aps; ++m) {
    const auto& users = assoc.served_by[m];
    if (users.empty()) continue;
    set_row(out, m, users, project_box_simplex(row_on(warm, m, users), p_max));
  }
  return out;
}

Eigen::MatrixXd sum_rate_gradient(const GainTensor& g, const PowerAllocation& p, double bandwidth_hz,
                                  double sqrt_floor) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.num_aps, g.num_ms);
  for (int m = 0; m < g.num_aps; ++m) {
    const auto& users = g.assoc.served_by[m];
    if (users.empty()) continue;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(users.size()));
    for (int k = 0; k < g.num_ms; ++k) {
      acc += grad_g1_wrt_ap(g, p, m, k, bandwidth_hz, sqrt_floor) -
             grad_g2_wrt_ap(g, p, m, k, bandwidth_hz, sqrt_floor);
    }
    for (std::size_t j = 0; j < users.size(); ++j) out(m, users[j]) = acc[static_cast<Eigen::Index>(j)];
  }
  return out;
}

enum class Objective { Gee, SumAse };

void maximize_into(OptimizationResult& res, const GainTensor& g, double p_max,
                   const PowerModel& model, double bandwidth_hz, const OptimizerOptions& opts,
                   const PowerAllocation* warm, Objective objective) {
  const bool gee_mode = objective == Objective::Gee;
  const Association& assoc = g.assoc;
  const int M = g.num_aps;

  auto score = [&](const GeeReport& r) { return gee_mode ? r.gee_mbit_per_joule : r.sum_ase_bit_s_hz; };

  res.alloc = uniform_allocation(assoc, p_max);
  GeeReport rep = gee(g, res.alloc, model, bandwidth_hz);
  if (warm != nullptr && opts.warm_start) {
    PowerAllocation w = feasible_warm_start(*warm, assoc, p_max);
    const GeeReport rw = gee(g, w, model, bandwidth_hz);
    if (score(rw) > score(rep)) {
      res.alloc = std::move(w);
      rep = rw;
    }
  }
  double obj = score(rep);
  if (!std::isfinite(obj)) throw OptimizationError("maximize: non-finite initial objective", res.trace);

  ConvergenceTrace& trace = res.trace;
  {
    TraceEntry e;
    e.true_gee = rep.gee_mbit_per_joule;
    e.true_objective = obj;
    e.surrogate = rep.sum_rate_bit_s;
    e.surrogate_at_anchor = rep.sum_rate_bit_s;
    e.sum_rate_at_anchor = rep.sum_rate_bit_s;
    trace.entries.push_back(std::move(e));
  }

  trace.termination = "max_sweeps";
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    const double sweep_start = obj;
    for (int m = 0; m < M; ++m) {
      const auto& users = assoc.served_by[m];
      if (users.empty()) continue;

      for (int round = 0; round < opts.sca_iters_per_ap; ++round) {
        const ApSubproblem sub(g, res.alloc, m, bandwidth_hz, opts.sqrt_floor);
        const Eigen::VectorXd& x0 = sub.anchor();
        const double sum_rate_anchor = rep.sum_rate_bit_s;

        double rest = 0.0;
        for (int mp = 0; mp < M; ++mp) {
          if (mp == m) continue;
          const double pt = res.alloc.ap_total(mp);
          rest += model.delta * pt + circuit_term(model, mp, pt);
        }
        rest += model.circuit_w[m];
        auto denom = [&](const Eigen::VectorXd& x) { return model.delta * x.sum() + rest; };

        const auto num = [&](const Eigen::VectorXd& y) { return sub.value_amp(y); };
        const auto num_grad = [&](const Eigen::VectorXd& y) { return sub.gradient_amp(y); };

        Eigen::VectorXd y = x0.cwiseSqrt();
        double lambda = 0.0;
        std::vector<double> history;
        const double anchor_value = sub.value(x0);
        if (gee_mode) {
          lambda = anchor_value / denom(x0);
          history.push_back(lambda);
          for (int it = 0; it < opts.dinkelbach_max; ++it) {
            const double lam = lambda;
            const auto phi = [&](const Eigen::VectorXd& v) { return sub.value_amp(v) - lam * denom(v.cwiseAbs2()); };
            const auto phi_grad = [&](const Eigen::VectorXd& v) {
              Eigen::VectorXd gr = sub.gradient_amp(v);
              gr -= 2.0 * lam * model.delta * v;
              return gr;
            };
            y = projected_gradient_ascent(phi, phi_grad, y, p_max, opts);
            const Eigen::VectorXd xi = y.cwiseAbs2();
            const double nx = sub.value(xi);
            const double dx = denom(xi);
            const double gap = nx - lam * dx;
            lambda = std::max(lam, nx / dx);
            history.push_back(lambda);
            if (gap <= opts.dinkelbach_tol * std::max(std::abs(nx), 1e-300)) break;
          }
        } else {
          y = projected_gradient_ascent(num, num_grad, y, p_max, opts);
        }
        const Eigen::VectorXd x = project_box_simplex(y.cwiseAbs2(), p_max);

        PowerAllocation best = res.alloc;
        set_row(best, m, users, x);
        GeeReport best_rep = gee(g, best, model, bandwidth_hz);
        double best_surrogate = sub.value(x);
        if (gee_mode && model.kind == PowerModelKind::IdleAware) {
          PowerAllocation off = res.alloc;
          set_row(off, m, users, Eigen::VectorXd::Zero(x.size()));
          GeeReport off_rep = gee(g, off, model, bandwidth_hz);
          if (score(off_rep) > score(best_rep)) {
            best = std::move(off);
            best_rep = std::move(off_rep);
            best_surrogate = sub.value(Eigen::VectorXd::Zero(x.size()));
          }
        }

        const double cand = score(best_rep);
        if (!std::isfinite(cand)) throw OptimizationError("maximize: non-finite objective at AP " + std::to_string(m), trace);
        const bool changed = (row_on(best, m, users) - x0).cwiseAbs().maxCoeff() > 0.0;
        if (!(cand >= obj) || !changed) break;

        const double gain = cand - obj;
        res.alloc = std::move(best);
        rep = std::move(best_rep);
        obj = cand;
        if (!res.alloc.feasible(assoc, p_max))
          throw OptimizationError("maximize: infeasible iterate at AP " + std::to_string(m), trace);

        TraceEntry e;
        e.sweep = sweep;
        e.ap = m;
        e.true_gee = rep.gee_mbit_per_joule;
        e.true_objective = obj;
        e.surrogate = best_surrogate;
        e.lambda = lambda;
        e.surrogate_at_anchor = anchor_value;
        e.sum_rate_at_anchor = sum_rate_anchor;
        e.lambda_history = std::move(history);
        trace.entries.push_back(std::move(e));

        if (gain <= 1e-12 * std::abs(obj)) break;
      }
    }
    trace.sweeps = sweep;
    if (obj - sweep_start <= opts.tol_outer * std::abs(sweep_start)) {
      trace.termination = "converged";
      break;
    }
  }

  const Eigen::MatrixXd grad_rate = sum_rate_gradient(g, res.alloc, bandwidth_hz, opts.sqrt_floor);
  if (gee_mode) {
    const double n = rep.sum_rate_bit_s;
    const double d = rep.power_w;
    trace.final_gradient = (grad_rate * d - Eigen::MatrixXd::Constant(M, g.num_ms, n * model.delta)) / (d * d) / 1e6;
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < g.num_ms; ++k)
        if (!assoc.serves(m, k)) trace.final_gradient(m, k) = 0.0;
  } else {
    trace.final_gradient = grad_rate / bandwidth_hz;
  }
}

/// Any module error raised mid-run is re-thrown with the trace collected so far.
OptimizationResult maximize(const GainTensor& g, double p_max, const PowerModel& model,
                            double bandwidth_hz, const OptimizerOptions& opts,
                            const PowerAllocation* warm, Objective objective) {
  OptimizationResult res;
  try {
    maximize_into(res, g, p_max, model, bandwidth_hz, opts, warm, objective);
  } catch (const OptimizationError&) {
    throw;
  } catch (const Error& e) {
    throw OptimizationError(std::string("maximize: ") + e.what(), res.trace);
  }
  return res;
}

}  // namespace

PowerAllocation uniform_allocation(const Association& assoc, double p_max) {
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(assoc.num_aps, assoc.num_ms);
  for (int m = 0; m < assoc.num_aps; ++m) {
    const auto& users = assoc.served_by[m];
    if (users.empty()) continue;
    const double share = p_max / static_cast<double>(users.size());
    for (int k : users) p.eta(m, k) = share;
  }
  return p;
}

GSplit g_split_eval(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz) {
  const SmallMat r = interference_covariance(g, p, k);
  const SmallMat a = stream_matrix(g, p, k, k);
  SmallMat t = r;
  t.noalias() += a * a.adjoint();
  return {bandwidth_hz * log2det_hpd(t), bandwidth_hz * log2det_hpd(r)};
}

Eigen::VectorXd grad_g2_wrt_ap(const GainTensor& g, const PowerAllocation& p, int m, int k,
                               double bandwidth_hz, double sqrt_floor) {
  return logdet_gradient(g, p, interference_covariance(g, p, k), m, k, false, bandwidth_hz, sqrt_floor);
}

Eigen::VectorXd grad_g1_wrt_ap(const GainTensor& g, const PowerAllocation& p, int m, int k,
                               double bandwidth_hz, double sqrt_floor) {
  SmallMat t = interference_covariance(g, p, k);
  const SmallMat a = stream_matrix(g, p, k, k);
  t.noalias() += a * a.adjoint();
  return logdet_gradient(g, p, t, m, k, true, bandwidth_hz, sqrt_floor);
}

double surrogate_rate(const GainTensor& g, const PowerAllocation& eta, const PowerAllocation& eta0,
                      int m, int k, double bandwidth_hz, double sqrt_floor) {
  const auto& users = g.assoc.served_by[m];
  const double g1 = g_split_eval(g, eta, k, bandwidth_hz).g1;
  const double g2_0 = g_split_eval(g, eta0, k, bandwidth_hz).g2;
  const Eigen::VectorXd grad = grad_g2_wrt_ap(g, eta0, m, k, bandwidth_hz, sqrt_floor);
  return g1 - g2_0 - grad.dot(row_on(eta, m, users) - row_on(eta0, m, users));
}

Eigen::VectorXd project_box_simplex(const Eigen::VectorXd& v, double p_max) {
  Eigen::VectorXd x = v.cwiseMax(0.0);
  if (x.sum() <= p_max) return x;

  // threshold projection onto {x >= 0, sum x = p_max}
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cumsum += s[i];
    const double t = (cumsum - p_max) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  x = (v.array() - theta).cwiseMax(0.0);
  return x;
}

OptimizationResult maximize_gee(const GainTensor& g, double p_max, const PowerModel& model,
                                double bandwidth_hz, const OptimizerOptions& opts,
                                const PowerAllocation* warm) {
  return maximize(g, p_max, model, bandwidth_hz, opts, warm, Objective::Gee);
}

OptimizationResult maximize_ase(const GainTensor& g, double p_max, const PowerModel& model,
                                double bandwidth_hz, const OptimizerOptions& opts,
                                const PowerAllocation* warm) {
  return maximize(g, p_max, model, bandwidth_hz, opts, warm, Objective::SumAse);
}

}  // namespace cfsim
