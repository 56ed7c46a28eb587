#include "lss/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lss/error.hpp"
#include "lss/geometry.hpp"

namespace lss {

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Theta: return "theta";
    case SchemeKind::ThetaSkew: return "theta_skew";
    case SchemeKind::Pi: return "pi";
    case SchemeKind::EmIntrinsic: return "em_intrinsic";
    case SchemeKind::Soft: return "soft";
  }
  return "unknown";
}

SchemeKind scheme_from_string(const std::string& name) {
  for (SchemeKind k : {SchemeKind::Theta, SchemeKind::ThetaSkew, SchemeKind::Pi,
                       SchemeKind::EmIntrinsic, SchemeKind::Soft}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown scheme '" + name + "'");
}

bool is_constrained(SchemeKind kind) {
  return kind == SchemeKind::Theta || kind == SchemeKind::ThetaSkew || kind == SchemeKind::Pi;
}

void SchemeConfig::validate(int d) const {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "scheme step h must be > 0");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "scheme step count n must be >= 1");
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be > 0");
  const bool wants_A = kind == SchemeKind::ThetaSkew;
  const bool wants_eps = kind == SchemeKind::Soft;
  if (wants_A != (A.size() > 0)) {
    throw Error(ErrorKind::InvalidArgument, "skew matrix A is required for theta_skew only");
  }
  if (wants_A) {
    if (A.rows() != d || A.cols() != d) {
      throw Error(ErrorKind::InvalidArgument, "skew matrix A must be d x d");
    }
    require_skew(A);
  }
  if (wants_eps != eps_soft.has_value()) {
    throw Error(ErrorKind::InvalidArgument, "eps_soft is required for the soft scheme only");
  }
  if (wants_eps && !(*eps_soft > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "eps_soft must be > 0");
  }
  flow.validate();
}

ChainState initial_state(const Vec& x0, std::uint64_t seed, std::uint32_t chain_id) {
  ChainState s;
  s.x = x0;
  s.key = NoiseKey(seed, chain_id);
  return s;
}

Vec drift(const ManifoldModel&, const DiffusionField& field, const Vec& x, double beta) {
  Vec b = field.div_a_at(x) / beta;
  if (field.U || field.grad_U) {
    const Vec gU = field.grad_U_at(x);
    b -= field.identity ? gU : Vec(field.a_at(x) * gU);
  }
  return b;
}

namespace {

Vec noise_term(const DiffusionField& field, const Vec& x, const Vec& eta, double scale) {
  return field.identity ? Vec(scale * eta) : Vec(scale * (field.sigma_at(x) * eta));
}

}  // namespace

double soft_tube_radius(const ManifoldModel& model, double eps_soft) {
  return std::max(model.r_tube, 10.0 * std::sqrt(eps_soft));
}

StepOutcome apply_kernel(const ManifoldModel& model, const DiffusionField& field,
                         const SchemeConfig& cfg, const Vec& x, const Vec& eta) {
  const double h = cfg.h;
  const double scale = std::sqrt(2.0 * h / cfg.beta);
  StepOutcome out;
  switch (cfg.kind) {
    case SchemeKind::Theta: {
      out.half = x + drift(model, field, x, cfg.beta) * h + noise_term(field, x, eta, scale);
      FlowResult r = theta(model, field, out.half, cfg.flow);
      out.x = std::move(r.point);
      out.flow_iters = r.iters;
      break;
    }
    case SchemeKind::ThetaSkew: {
      Vec b = drift(model, field, x, cfg.beta);
      if (field.U || field.grad_U) b += cfg.A * field.grad_U_at(x);
      out.half = x + b * h + noise_term(field, x, eta, scale);
      FlowResult r = theta_skew(model, field, out.half, cfg.A, cfg.flow);
      out.x = std::move(r.point);
      out.flow_iters = r.iters;
      break;
    }
    case SchemeKind::Pi: {
      if (!is_identity_metric(field, x)) {
        throw Error(ErrorKind::RequiresIdentityMetric, "the projection scheme needs a = id");
      }
      out.half = x + drift(model, field, x, cfg.beta) * h + noise_term(field, x, eta, scale);
      FlowResult r = pi_nearest(model, out.half, cfg.flow);
      out.x = std::move(r.point);
      out.flow_iters = r.iters;
      break;
    }
    case SchemeKind::EmIntrinsic: {
      if (!in_tube(model, x)) throw Error(ErrorKind::OutsideTube, "state left the tube");
      const ProjectionData pd = eval_projection(model, field, x);
      Vec b = eval_pa_divergence(model, field, x) / cfg.beta;
      if (field.U || field.grad_U) b -= pd.Pa * field.grad_U_at(x);
      const Mat Ps = field.identity ? pd.P : Mat(pd.P * field.sigma_at(x));
      out.x = x + b * h + scale * (Ps * eta);
      out.half = out.x;
      break;
    }
    case SchemeKind::Soft: {
      const double inv_eps = 1.0 / *cfg.eps_soft;
      Vec pen = model.grad_xi(x) * model.xi(x);
      if (!field.identity) pen = field.a_at(x) * pen;
      out.x = x + (drift(model, field, x, cfg.beta) - inv_eps * pen) * h +
              noise_term(field, x, eta, scale);
      out.half = out.x;
      const bool guarded = !model.tube_guard || model.tube_guard(out.x);
      if (!out.x.allFinite() || !guarded ||
          xi_norm(model, out.x) > soft_tube_radius(model, *cfg.eps_soft)) {
        throw Error(ErrorKind::StiffnessBlowup, "soft-constraint state left the tube");
      }
      break;
    }
  }
  return out;
}

ChainState step(const ChainState& s, const ManifoldModel& model, const DiffusionField& field,
                const SchemeConfig& cfg) {
  Vec eta(model.d);
  s.key.normals(static_cast<std::uint64_t>(s.step_index), {eta.data(), std::size_t(model.d)});
  StepOutcome o = apply_kernel(model, field, cfg, s.x, eta);
  ChainState next;
  next.x = std::move(o.x);
  next.step_index = s.step_index + 1;
  next.key = s.key;
  next.cum_flow_iters = s.cum_flow_iters + o.flow_iters;
  return next;
}

namespace {

ChainState step_as(SchemeKind kind, const ChainState& s, const ManifoldModel& model,
                   const DiffusionField& field, const SchemeConfig& cfg) {
  if (cfg.kind == kind) return step(s, model, field, cfg);
  SchemeConfig c = cfg;
  c.kind = kind;
  return step(s, model, field, c);
}

}  // namespace

ChainState step_theta(const ChainState& s, const ManifoldModel& m, const DiffusionField& f,
                      const SchemeConfig& c) {
  return step_as(SchemeKind::Theta, s, m, f, c);
}
ChainState step_theta_skew(const ChainState& s, const ManifoldModel& m, const DiffusionField& f,
                           const SchemeConfig& c) {
  return step_as(SchemeKind::ThetaSkew, s, m, f, c);
}
ChainState step_pi(const ChainState& s, const ManifoldModel& m, const DiffusionField& f,
                   const SchemeConfig& c) {
  return step_as(SchemeKind::Pi, s, m, f, c);
}
ChainState step_em_intrinsic(const ChainState& s, const ManifoldModel& m, const DiffusionField& f,
                             const SchemeConfig& c) {
  return step_as(SchemeKind::EmIntrinsic, s, m, f, c);
}
ChainState step_soft(const ChainState& s, const ManifoldModel& m, const DiffusionField& f,
                     const SchemeConfig& c) {
  return step_as(SchemeKind::Soft, s, m, f, c);
}

ChainReport run_chain(const ManifoldModel& model, const DiffusionField& field,
                      const SchemeConfig& cfg, const ChainOptions& opts) {
  cfg.validate(model.d);
  ChainReport rep;
  rep.chain_id = opts.chain_id;
  rep.seed = cfg.seed;
  const std::size_t nobs = opts.observables.size();
  for (const auto& o : opts.observables) rep.names.push_back(o.name);
  std::vector<double> sums(nobs, 0.0);
  const bool angles = opts.record_angles && model.chart.has_value();
  const long first_avg = static_cast<long>(std::floor(opts.burn_in * static_cast<double>(cfg.n)));
  if (angles) rep.angles.reserve(static_cast<std::size_t>(cfg.n - first_avg));

  ChainState s = initial_state(opts.x0 ? *opts.x0 : model.start, cfg.seed, opts.chain_id);
  double xin = xi_norm(model, s.x);
  rep.max_xi = xin;
  if (opts.on_state) opts.on_state(0, s.x, xin, 0);
  for (long l = 0; l < cfg.n; ++l) {
    if (l >= first_avg) {
      for (std::size_t i = 0; i < nobs; ++i) sums[i] += opts.observables[i].f(s.x);
      if (angles) rep.angles.push_back(model.chart->inverse(s.x)[0]);
      ++rep.averaged;
    }
    try {
      const long before = s.cum_flow_iters;
      s = step(s, model, field, cfg);
      xin = xi_norm(model, s.x);
      if (opts.on_state) opts.on_state(s.step_index, s.x, xin, s.cum_flow_iters - before);
    } catch (const Error& e) {
      rep.aborted = true;
      rep.abort_step = s.step_index;
      rep.abort_kind = e.kind();
      rep.abort_reason = e.what();
      break;
    }
    rep.max_xi = std::max(rep.max_xi, xin);
    ++rep.steps;
  }
  rep.averages.resize(nobs);
  for (std::size_t i = 0; i < nobs; ++i) {
    rep.averages[i] = rep.averaged > 0 ? sums[i] / static_cast<double>(rep.averaged) : 0.0;
  }
  rep.total_flow_iters = s.cum_flow_iters;
  rep.mean_flow_iters =
      rep.steps > 0 ? static_cast<double>(s.cum_flow_iters) / static_cast<double>(rep.steps) : 0.0;
  rep.final_x = s.x;
  return rep;
}

void throw_if_aborted(const ChainReport& r) {
  if (r.aborted) throw ChainAborted(r.abort_kind, r.abort_step, r.abort_reason);
}

std::vector<ChainReport> run_replicas(const ManifoldModel& model, const DiffusionField& field,
                                      const SchemeConfig& cfg, const ChainOptions& opts,
                                      int replicas, int threads, std::uint32_t first_id) {
  std::vector<ChainReport> out(static_cast<std::size_t>(std::max(replicas, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r; (r = next.fetch_add(1)) < replicas;) {
      ChainOptions o = opts;
      o.chain_id = first_id + static_cast<std::uint32_t>(r);
      out[static_cast<std::size_t>(r)] = run_chain(model, field, cfg, o);
    }
  };
  const int nt = std::clamp(threads, 1, std::max(replicas, 1));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  }
  return out;
}

ChainReport merge_reports(std::vector<ChainReport> reports) {
  std::sort(reports.begin(), reports.end(),
            [](const ChainReport& a, const ChainReport& b) { return a.chain_id < b.chain_id; });
  ChainReport m;
  if (reports.empty()) return m;
  m.chain_id = reports.front().chain_id;
  m.seed = reports.front().seed;
  m.names = reports.front().names;
  m.final_x = reports.front().final_x;
  m.averages.assign(m.names.size(), 0.0);
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < m.averages.size(); ++i) {
      m.averages[i] += r.averages[i] * static_cast<double>(r.averaged);
    }
    m.steps += r.steps;
    m.averaged += r.averaged;
    m.max_xi = std::max(m.max_xi, r.max_xi);
    m.total_flow_iters += r.total_flow_iters;
    m.angles.insert(m.angles.end(), r.angles.begin(), r.angles.end());
    if (r.aborted && !m.aborted) {
      m.aborted = true;
      m.abort_step = r.abort_step;
      m.abort_kind = r.abort_kind;
      m.abort_reason = "chain " + std::to_string(r.chain_id) + ": " + r.abort_reason;
    }
  }
  for (double& a : m.averages) a = m.averaged > 0 ? a / static_cast<double>(m.averaged) : 0.0;
  m.mean_flow_iters =
      m.steps > 0 ? static_cast<double>(m.total_flow_iters) / static_cast<double>(m.steps) : 0.0;
  return m;
}

}  // namespace lss
