#include "lss/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lss/error.hpp"

namespace lss {

AngleHistogram::AngleHistogram(int bins, double lo, double hi) : lo_(lo), hi_(hi) {
  if (bins < 1 || !(hi > lo)) {
    throw Error(ErrorKind::InvalidArgument, "histogram needs bins >= 1 and hi > lo");
  }
  counts_.assign(static_cast<std::size_t>(bins), 0);
}

void AngleHistogram::add(double v) {
  const int b = static_cast<int>(std::floor((v - lo_) / width()));
  ++counts_[static_cast<std::size_t>(std::clamp(b, 0, bins() - 1))];
  ++total_;
}

void AngleHistogram::add(const std::vector<double>& values) {
  for (double v : values) add(v);
}

std::vector<double> AngleHistogram::probabilities() const {
  std::vector<double> p(counts_.size(), 0.0);
  if (total_ == 0) return p;
  for (std::size_t b = 0; b < p.size(); ++b) {
    p[b] = static_cast<double>(counts_[b]) / static_cast<double>(total_);
  }
  return p;
}

std::vector<double> AngleHistogram::density() const {
  std::vector<double> p = probabilities();
  for (double& v : p) v /= width();
  return p;
}

const char* to_string(Measure m) { return m == Measure::Mu1 ? "mu1" : "mu2"; }

Measure measure_from_string(const std::string& name) {
  if (name == "mu1") return Measure::Mu1;
  if (name == "mu2") return Measure::Mu2;
  throw Error(ErrorKind::InvalidArgument, "unknown measure '" + name + "'");
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

ReferenceDensity::ReferenceDensity(const std::string& model_id, Measure measure,
                                   ReferenceParams params)
    : model_id_(model_id), measure_(measure), params_(params) {
  if (model_id == "ellipse") {
    lo_ = 0.0;
    hi_ = 2.0 * std::numbers::pi;
  } else if (model_id == "sphere_id" || model_id == "sphere_precond") {
    // |grad xi| = 1 on the unit sphere, so both measures share the latitude
    // marginal.
    lo_ = -0.5 * std::numbers::pi;
    hi_ = 0.5 * std::numbers::pi;
  } else {
    throw Error(ErrorKind::UnknownModel, "no reference density for model '" + model_id + "'");
  }
  norm_ = integrate([this](double t) { return weight(t); }, lo_, hi_);
}

double ReferenceDensity::weight(double t) const {
  if (model_id_ == "ellipse") {
    if (measure_ == Measure::Mu1) return 1.0;
    const double s = std::sin(t), c = std::cos(t);
    return std::sqrt(params_.c * params_.c * s * s + c * c);
  }
  return std::exp(-params_.beta * t * t / (2.0 * params_.eps)) * std::cos(t);
}

std::vector<double> ReferenceDensity::binned(int bins) const {
  std::vector<double> p(static_cast<std::size_t>(bins));
  const double w = (hi_ - lo_) / bins;
  auto dens = [this](double t) { return (*this)(t); };
  for (int b = 0; b < bins; ++b) p[static_cast<std::size_t>(b)] = integrate(dens, lo_ + b * w, lo_ + (b + 1) * w);
  return p;
}

double ReferenceDensity::expectation(const std::function<double(double)>& g) const {
  return integrate([&](double t) { return g(t) * (*this)(t); }, lo_, hi_);
}

double reference_density(const std::string& model_id, Measure measure, double t,
                         ReferenceParams params) {
  return ReferenceDensity(model_id, measure, params)(t);
}

double builtin_reference_mean(const std::string& model_id, Measure measure,
                              const std::string& observable, ReferenceParams params) {
  if (observable == "const1") return 1.0;
  const ReferenceDensity ref(model_id, measure, params);
  const bool ellipse = model_id == "ellipse";
  if (observable == "angle") return ref.expectation([](double t) { return t; });
  if (observable == "x1sq") {
    if (ellipse) {
      return ref.expectation([c = params.c](double t) { return c * c * std::cos(t) * std::cos(t); });
    }
    // x1^2 = cos^2(lat) cos^2(lon) with the longitude uniform.
    return ref.expectation([](double t) { return 0.5 * std::cos(t) * std::cos(t); });
  }
  throw Error(ErrorKind::InvalidArgument, "unknown observable '" + observable + "'");
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(ErrorKind::DomainMismatch, "bin counts differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double density_distance(const AngleHistogram& hist, const ReferenceDensity& ref) {
  const double tol = 1e-12 * (1.0 + std::abs(ref.hi() - ref.lo()));
  if (std::abs(hist.lo() - ref.lo()) > tol || std::abs(hist.hi() - ref.hi()) > tol) {
    throw Error(ErrorKind::DomainMismatch, "histogram domain differs from the reference domain");
  }
  return tv_distance(hist.probabilities(), ref.binned(hist.bins()));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

namespace {

SweepCell run_cell(const ManifoldModel& model, const DiffusionField& field,
                   const SchemeConfig& base, const Observable& f, double reference,
                   const SweepPlan& plan, double h, double T, std::uint32_t first_id) {
  SweepCell cell;
  cell.h = h;
  cell.T = T;
  cell.n = std::max(1L, std::lround(T / h));
  SchemeConfig cfg = base;
  cfg.h = h;
  cfg.n = cell.n;
  ChainOptions opts;
  opts.observables = {f};
  opts.burn_in = plan.burn_in;
  const auto reps = run_replicas(model, field, cfg, opts, plan.replicas, plan.threads, first_id);
  double sum = 0.0, sq = 0.0, flow = 0.0;
  for (const auto& r : reps) {
    if (r.aborted && !cell.aborted) {
      cell.aborted = true;
      cell.abort_reason = r.abort_reason;
    }
    const double v = r.averages.at(0);
    cell.replica_averages.push_back(v);
    sum += v;
    sq += (v - reference) * (v - reference);
    flow += r.mean_flow_iters;
  }
  const double m = static_cast<double>(reps.size());
  const double mean = sum / m;
  cell.bias = mean - reference;
  cell.mse = sq / m;
  double var = 0.0;
  for (double v : cell.replica_averages) var += (v - mean) * (v - mean);
  cell.variance = m > 1 ? var / (m - 1.0) : 0.0;
  cell.mean_flow_iters = flow / m;
  return cell;
}

}  // namespace

ConvergenceReport error_sweep(const ManifoldModel& model, const DiffusionField& field,
                              const SchemeConfig& base, const Observable& f, double reference,
                              const SweepPlan& plan) {
  if (plan.h_list.empty() || plan.T_list.empty() || plan.replicas < 1) {
    throw Error(ErrorKind::InvalidArgument, "sweep needs h values, T values and replicas");
  }
  ConvergenceReport rep;
  rep.reference = reference;
  rep.replicas = plan.replicas;
  const double T_max = *std::max_element(plan.T_list.begin(), plan.T_list.end());
  const double h_min = *std::min_element(plan.h_list.begin(), plan.h_list.end());
  // Replica ids are disjoint across cells so no two chains share noise.
  std::uint32_t next_id = 0;
  const auto ids = static_cast<std::uint32_t>(plan.replicas);

  std::vector<double> hs, bias;
  for (double h : plan.h_list) {
    rep.cells.push_back(run_cell(model, field, base, f, reference, plan, h, T_max, next_id));
    next_id += ids;
    hs.push_back(h);
    bias.push_back(std::abs(rep.cells.back().bias));
  }
  std::vector<double> inv_T, mse;
  for (double T : plan.T_list) {
    const SweepCell* reuse = nullptr;
    for (const auto& c : rep.cells) {
      if (c.h == h_min && c.T == T) reuse = &c;
    }
    if (reuse == nullptr) {
      rep.cells.push_back(run_cell(model, field, base, f, reference, plan, h_min, T, next_id));
      next_id += ids;
      reuse = &rep.cells.back();
    }
    inv_T.push_back(1.0 / T);
    mse.push_back(reuse->mse);
  }
  rep.bias_slope = loglog_slope(hs, bias);
  rep.mse_slope = loglog_slope(inv_T, mse);
  return rep;
}

SoftCheck soft_convergence_check(const ManifoldModel& model, const DiffusionField& field,
                                 const Observable& f, double reference,
                                 const std::vector<double>& eps_list, double h_ratio, double T,
                                 int replicas, int threads, std::uint64_t seed) {
  SoftCheck out;
  std::uint32_t next_id = 0;
  for (double eps : eps_list) {
    SoftRow row;
    row.eps = eps;
    row.h = h_ratio * eps;
    row.n = std::max(1L, std::lround(T / row.h));
    SchemeConfig cfg;
    cfg.kind = SchemeKind::Soft;
    cfg.h = row.h;
    cfg.n = row.n;
    cfg.beta = field.beta;
    cfg.seed = seed;
    cfg.eps_soft = eps;
    ChainOptions opts;
    opts.observables = {f};
    const auto reps = run_replicas(model, field, cfg, opts, replicas, threads, next_id);
    next_id += static_cast<std::uint32_t>(replicas);
    double sum = 0.0;
    for (const auto& r : reps) {
      if (r.aborted && !row.aborted) {
        row.aborted = true;
        row.abort_reason = r.abort_reason;
      }
      sum += r.averages.at(0);
    }
    const double m = static_cast<double>(reps.size());
    row.average = sum / m;
    double var = 0.0;
    for (const auto& r : reps) var += (r.averages[0] - row.average) * (r.averages[0] - row.average);
    row.std_err = m > 1 ? std::sqrt(var / (m - 1.0) / m) : 0.0;
    row.error = std::abs(row.average - reference);
    out.rows.push_back(row);
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& a = out.rows[i - 1];
    const auto& b = out.rows[i];
    const double noise = std::hypot(a.std_err, b.std_err);
    if (a.aborted || b.aborted || b.error > a.error + 2.0 * noise) out.monotone = false;
  }
  return out;
}

}  // namespace lss
