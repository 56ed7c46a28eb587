#include "lss/app/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "lss/error.hpp"
#include "lss/estimators.hpp"
#include "lss/models.hpp"

namespace lss::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kCorruption = 1e-3;

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : f_(std::fopen(path.string().c_str(), "wb")) {
    if (f_ == nullptr) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    std::setvbuf(f_, nullptr, _IOFBF, 1 << 20);
  }
  ~CsvWriter() {
    if (f_ != nullptr) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void text(const char* s) { std::fputs(s, f_); }
  void num(double v) { std::fprintf(f_, "%.17g", v); }
  void integer(long long v) { std::fprintf(f_, "%lld", v); }
  void sep() { std::fputc(',', f_); }
  void end() { std::fputc('\n', f_); }

 private:
  std::FILE* f_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json base_report(const RunConfig& cfg, const ModelPair& mp) {
  json j;
  j["version"] = LSS_VERSION;
  j["config_hash"] = cfg.hash;
  j["seed"] = cfg.scheme.seed;
  j["platform"] = platform_triple();
  j["model"] = cfg.model.id;
  j["scheme"] = to_string(cfg.scheme.kind);
  j["h"] = cfg.scheme.h;
  j["n"] = cfg.scheme.n;
  j["beta"] = cfg.scheme.beta;
  j["replicas"] = cfg.replicas;
  j["waived_assumptions"] = json::array();
  if (!mp.model.compact) j["waived_assumptions"].push_back("compact level set");
  return j;
}

void fill_chain(json& j, const ChainReport& rep, double wall) {
  json avg = json::object();
  for (std::size_t i = 0; i < rep.names.size(); ++i) avg[rep.names[i]] = rep.averages[i];
  j["averages"] = avg;
  j["steps"] = rep.steps;
  j["max_xi"] = rep.max_xi;
  j["mean_flow_iters"] = rep.mean_flow_iters;
  j["wall_time_s"] = wall;
  j["aborted"] = rep.aborted;
  if (rep.aborted) {
    j["abort_step"] = rep.abort_step;
    j["abort_reason"] = rep.abort_reason;
  }
}

struct Loaded {
  RunConfig cfg;
  ModelPair mp;
};

Loaded load(const std::string& path, const Overrides& o) {
  Loaded l{load_config(path), {}};
  apply(o, l.cfg);
  l.mp = make_builtin(l.cfg.model);
  fs::create_directories(l.cfg.out_dir);
  return l;
}

// Chain 0 streams its states to samples.csv; the remaining replicas run
// without a sink.
ChainReport run_all(const Loaded& l, ChainOptions opts, bool samples) {
  const RunConfig& cfg = l.cfg;
  const int d = l.mp.model.d;
  std::optional<CsvWriter> csv;
  if (samples) {
    csv.emplace(fs::path(cfg.out_dir) / "samples.csv");
    csv->text("step");
    for (int i = 1; i <= d; ++i) {
      csv->text((",x" + std::to_string(i)).c_str());
    }
    csv->text(",xi_norm,flow_iters\n");
    const long stride = cfg.sample_stride;
    opts.on_state = [&csv, d, stride](std::int64_t step, const Vec& x, double xin, long iters) {
      if (step % stride != 0) return;
      csv->integer(step);
      for (int i = 0; i < d; ++i) {
        csv->sep();
        csv->num(x[i]);
      }
      csv->sep();
      csv->num(xin);
      csv->sep();
      csv->integer(iters);
      csv->end();
    };
  }
  std::vector<ChainReport> reps;
  opts.chain_id = 0;
  reps.push_back(run_chain(l.mp.model, l.mp.field, cfg.scheme, opts));
  opts.on_state = nullptr;
  if (cfg.replicas > 1) {
    auto more = run_replicas(l.mp.model, l.mp.field, cfg.scheme, opts, cfg.replicas - 1,
                             cfg.threads, 1);
    reps.insert(reps.end(), more.begin(), more.end());
  }
  return merge_reports(std::move(reps));
}

template <class Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const Error& e) {
    const bool config = e.kind() == ErrorKind::InvalidArgument ||
                        e.kind() == ErrorKind::UnknownModel ||
                        e.kind() == ErrorKind::UnsupportedDimension ||
                        e.kind() == ErrorKind::NotSkewSymmetric ||
                        e.kind() == ErrorKind::DomainMismatch;
    log << (config ? "config error: " : "runtime error: ") << e.what() << '\n';
    return config ? kConfigInvalid : kRuntimeAbort;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << '\n';
    return kRuntimeAbort;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string platform_triple() {
#if defined(__x86_64__) || defined(_M_X64)
  std::string arch = "x86_64";
#elif defined(__aarch64__)
  std::string arch = "aarch64";
#else
  std::string arch = "unknown";
#endif
#if defined(__linux__)
  return arch + "-linux-gnu";
#elif defined(__APPLE__)
  return arch + "-apple-darwin";
#elif defined(_WIN32)
  return arch + "-pc-windows";
#else
  return arch + "-unknown";
#endif
}

void apply(const Overrides& o, RunConfig& cfg) {
  if (o.seed) cfg.scheme.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *o.threads;
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
}

int cmd_run(const std::string& config_path, const Overrides& o, std::ostream& log) {
  return guarded(log, [&] {
    const Loaded l = load(config_path, o);
    ChainOptions opts;
    opts.observables = make_observables(l.cfg.observables, l.mp.model);
    opts.burn_in = l.cfg.burn_in;
    const auto t0 = std::chrono::steady_clock::now();
    const ChainReport rep = run_all(l, opts, l.cfg.write_samples);
    json j = base_report(l.cfg, l.mp);
    fill_chain(j, rep, seconds_since(t0));
    write_json(fs::path(l.cfg.out_dir) / "report.json", j);
    log << "run: " << rep.steps << " steps, mean flow iterations " << rep.mean_flow_iters
        << ", max |xi| " << rep.max_xi << '\n';
    if (rep.aborted) {
      log << "chain aborted at step " << rep.abort_step << ": " << rep.abort_reason << '\n';
      return int(kRuntimeAbort);
    }
    return int(kOk);
  });
}

int cmd_density(const std::string& config_path, const Overrides& o, std::ostream& log) {
  return guarded(log, [&] {
    const Loaded l = load(config_path, o);
    const ReferenceParams rp = reference_params(l.cfg);
    const ReferenceDensity mu1(l.cfg.model.id, Measure::Mu1, rp);
    const ReferenceDensity mu2(l.cfg.model.id, Measure::Mu2, rp);
    ChainOptions opts;
    opts.observables = make_observables(l.cfg.observables, l.mp.model);
    opts.burn_in = l.cfg.burn_in;
    opts.record_angles = true;
    const auto t0 = std::chrono::steady_clock::now();
    const ChainReport rep = run_all(l, opts, false);
    AngleHistogram hist(l.cfg.bins, mu1.lo(), mu1.hi());
    hist.add(rep.angles);
    const auto dens = hist.density();
    {
      CsvWriter csv(fs::path(l.cfg.out_dir) / "density.csv");
      csv.text("bin_center,empirical,mu1,mu2\n");
      for (int b = 0; b < hist.bins(); ++b) {
        const double c = hist.center(b);
        csv.num(c);
        csv.sep();
        csv.num(dens[static_cast<std::size_t>(b)]);
        csv.sep();
        csv.num(mu1(c));
        csv.sep();
        csv.num(mu2(c));
        csv.end();
      }
    }
    json tv;
    tv["tv_mu1"] = density_distance(hist, mu1);
    tv["tv_mu2"] = density_distance(hist, mu2);
    tv["bins"] = hist.bins();
    tv["samples"] = hist.total();
    tv["config_hash"] = l.cfg.hash;
    tv["seed"] = l.cfg.scheme.seed;
    write_json(fs::path(l.cfg.out_dir) / "tv.json", tv);
    json j = base_report(l.cfg, l.mp);
    fill_chain(j, rep, seconds_since(t0));
    write_json(fs::path(l.cfg.out_dir) / "report.json", j);
    log << "density: TV to mu1 " << tv["tv_mu1"].get<double>() << ", TV to mu2 "
        << tv["tv_mu2"].get<double>() << '\n';
    if (rep.aborted) {
      log << "chain aborted at step " << rep.abort_step << ": " << rep.abort_reason << '\n';
      return int(kRuntimeAbort);
    }
    return int(kOk);
  });
}

int cmd_sweep(const std::string& config_path, const Overrides& o, std::ostream& log) {
  return guarded(log, [&] {
    const Loaded l = load(config_path, o);
    const RunConfig& cfg = l.cfg;
    if (cfg.sweep_h.empty() || cfg.sweep_T.empty()) {
      throw ConfigError("sweep needs non-empty sweep.h and sweep.T");
    }
    const Measure measure = cfg.sweep_measure.value_or(target_measure(cfg.scheme.kind));
    const double ref =
        builtin_reference_mean(cfg.model.id, measure, cfg.sweep_observable, reference_params(cfg));
    const auto obs = make_observables({cfg.sweep_observable}, l.mp.model);
    SweepPlan plan;
    plan.h_list = cfg.sweep_h;
    plan.T_list = cfg.sweep_T;
    plan.replicas = cfg.sweep_replicas;
    plan.threads = cfg.threads;
    plan.burn_in = cfg.burn_in;
    const auto t0 = std::chrono::steady_clock::now();
    const ConvergenceReport rep = error_sweep(l.mp.model, l.mp.field, cfg.scheme, obs[0], ref, plan);
    bool aborted = false;
    {
      CsvWriter csv(fs::path(cfg.out_dir) / "sweep.csv");
      csv.text("h,T,n,replica,average\n");
      for (const auto& c : rep.cells) {
        aborted = aborted || c.aborted;
        for (std::size_t r = 0; r < c.replica_averages.size(); ++r) {
          csv.num(c.h);
          csv.sep();
          csv.num(c.T);
          csv.sep();
          csv.integer(c.n);
          csv.sep();
          csv.integer(static_cast<long long>(r));
          csv.sep();
          csv.num(c.replica_averages[r]);
          csv.end();
        }
      }
    }
    json j;
    j["version"] = LSS_VERSION;
    j["config_hash"] = cfg.hash;
    j["seed"] = cfg.scheme.seed;
    j["platform"] = platform_triple();
    j["observable"] = cfg.sweep_observable;
    j["measure"] = to_string(measure);
    j["reference"] = ref;
    j["replicas"] = rep.replicas;
    j["bias_slope"] = rep.bias_slope;
    j["mse_slope"] = rep.mse_slope;
    j["cells"] = json::array();
    for (const auto& c : rep.cells) {
      j["cells"].push_back({{"h", c.h},
                            {"T", c.T},
                            {"n", c.n},
                            {"bias", c.bias},
                            {"variance", c.variance},
                            {"mse", c.mse},
                            {"mean_flow_iters", c.mean_flow_iters},
                            {"aborted", c.aborted}});
    }
    j["wall_time_s"] = seconds_since(t0);
    write_json(fs::path(cfg.out_dir) / "slopes.json", j);
    log << "sweep: bias slope " << rep.bias_slope << ", MSE slope " << rep.mse_slope << '\n';
    return aborted ? int(kRuntimeAbort) : int(kOk);
  });
}

std::vector<std::string> verify_selectors() {
  return {"all",           "p-identities",      "theta-derivatives", "pi-derivatives",
          "surface-ratio", "divergence-identity", "pa-divergence",     "generator"};
}

std::vector<CheckResult> run_checks(const std::string& selector, bool corrupt) {
  const auto sel = verify_selectors();
  if (std::find(sel.begin(), sel.end(), selector) == sel.end()) {
    throw ConfigError("unknown verify selector '" + selector + "'");
  }
  const bool all = selector == "all";
  VerifyOptions opts;
  opts.corruption = corrupt ? kCorruption : 0.0;
  VerifyOptions dense = opts;
  dense.samples = 1000;

  const ModelPair ellipse = make_ellipse(3.0);
  const ModelPair sphere_pre = make_sphere(3, true, 0.1);
  const ModelPair sphere_id = make_sphere(3, false, 0.1);
  Mat a(3, 3);
  a << 2.0, 1.0, 0.5, 1.0, 2.0, 0.3, 0.5, 0.3, 1.5;
  const LinearModel linear = make_linear(3, 1, a);
  const std::vector<const ModelPair*> models = {&ellipse, &sphere_pre, &sphere_id, &linear};

  std::vector<CheckResult> out;
  if (all || selector == "p-identities") {
    for (const auto* m : models) out.push_back(check_p_identities(m->model, m->field, dense));
  }
  if (all || selector == "theta-derivatives") {
    for (const auto* m : {&ellipse, &sphere_pre, (const ModelPair*)&linear}) {
      out.push_back(check_theta_jacobian(m->model, m->field, opts));
      out.push_back(check_theta_hessian_contraction(m->model, m->field, opts));
    }
  }
  if (all || selector == "pi-derivatives") {
    for (const auto* m : {&ellipse, &sphere_id}) {
      for (auto& r : check_pi_derivatives(m->model, opts)) out.push_back(std::move(r));
    }
  }
  if (all || selector == "surface-ratio") {
    out.push_back(check_surface_measure_ratio(ellipse.model, ellipse.field, opts));
    out.push_back(check_surface_measure_ratio(
        ellipse.model, constant_field(4.0 * Mat::Identity(2, 2), 1.0, "scaled_identity"), opts));
    out.push_back(check_surface_measure_ratio(sphere_pre.model, sphere_pre.field, opts));
  }
  if (all || selector == "divergence-identity") {
    out.push_back(check_divergence_identity(sphere_pre.model, sphere_pre.field, opts));
    out.push_back(check_divergence_identity(ellipse.model, ellipse.field, opts));
  }
  if (all || selector == "pa-divergence") {
    out.push_back(check_pa_divergence_override(ellipse.model, ellipse.field, dense));
    out.push_back(check_pa_divergence_override(sphere_pre.model, sphere_pre.field, dense));
  }
  if (all || selector == "generator") {
    for (const auto* m : models) out.push_back(check_generator_xi(m->model, m->field, opts));
  }
  return out;
}

int cmd_verify(const std::string& selector, bool corrupt, std::ostream& out) {
  return guarded(out, [&] {
    const auto results = run_checks(selector, corrupt);
    bool ok = true;
    out << std::left << std::setw(48) << "check" << std::setw(12) << "max_abs" << std::setw(12)
        << "max_rel" << std::setw(8) << "points" << std::setw(10) << "tol" << "result\n";
    for (const auto& r : results) {
      ok = ok && r.pass;
      out << std::left << std::setw(48) << r.name << std::scientific << std::setprecision(3)
          << std::setw(12) << r.max_abs_error << std::setw(12) << r.max_rel_error
          << std::setw(8) << r.points_tested << std::setw(10) << std::setprecision(0)
          << r.tolerance << (r.pass ? "PASS" : "FAIL") << '\n';
      out << std::defaultfloat << std::setprecision(6);
    }
    out << (ok ? "all checks passed\n" : "verification FAILED\n");
    return ok ? int(kOk) : int(kVerifyFailed);
  });
}

}  // namespace lss::app
