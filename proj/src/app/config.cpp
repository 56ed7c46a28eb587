#include "lss/app/config.hpp"

#include <cinttypes>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <tomlplusplus/toml.hpp>

#include "lss/error.hpp"

namespace lss::app {

namespace {

using KeySet = std::set<std::string, std::less<>>;

void reject_unknown(const toml::table& t, const std::string& where, const KeySet& allowed) {
  for (const auto& [k, v] : t) {
    if (!allowed.contains(k.str())) {
      throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
    }
  }
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* n = root.get(name);
  if (n == nullptr) return nullptr;
  if (!n->is_table()) throw ConfigError("'" + std::string(name) + "' must be a table");
  return n->as_table();
}

std::string key_path(std::string_view sec, std::string_view key) {
  return std::string(sec) + "." + std::string(key);
}

std::optional<double> get_double(const toml::table& t, std::string_view sec, std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (auto v = n->value<double>()) return *v;
  throw ConfigError(key_path(sec, key) + " must be a number");
}

std::optional<std::int64_t> get_int(const toml::table& t, std::string_view sec,
                                    std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (auto v = n->as_integer()) return v->get();
  if (auto v = n->as_floating_point()) {
    const double d = v->get();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e18) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw ConfigError(key_path(sec, key) + " must be an integer");
}

std::optional<std::string> get_string(const toml::table& t, std::string_view sec,
                                      std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (auto v = n->value<std::string>()) return *v;
  throw ConfigError(key_path(sec, key) + " must be a string");
}

std::optional<bool> get_bool(const toml::table& t, std::string_view sec, std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (auto v = n->value<bool>()) return *v;
  throw ConfigError(key_path(sec, key) + " must be a boolean");
}

std::vector<double> get_list(const toml::table& t, std::string_view sec, std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return {};
  const toml::array* arr = n->as_array();
  if (arr == nullptr) throw ConfigError(key_path(sec, key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw ConfigError(key_path(sec, key) + " must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> get_strings(const toml::table& t, std::string_view sec,
                                     std::string_view key) {
  const toml::array* arr = t.get(key) ? t.get(key)->as_array() : nullptr;
  if (t.get(key) != nullptr && arr == nullptr) {
    throw ConfigError(key_path(sec, key) + " must be an array of strings");
  }
  std::vector<std::string> out;
  if (arr == nullptr) return out;
  for (const auto& e : *arr) {
    auto v = e.value<std::string>();
    if (!v) throw ConfigError(key_path(sec, key) + " must be an array of strings");
    out.push_back(*v);
  }
  return out;
}

std::optional<Mat> get_matrix(const toml::table& t, std::string_view sec, std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  const std::string where = key_path(sec, key);
  const toml::array* rows = n->as_array();
  if (rows == nullptr || rows->empty()) throw ConfigError(where + " must be a non-empty matrix");
  const auto r = static_cast<int>(rows->size());
  if (r > kMaxDim) throw ConfigError(where + " exceeds the maximum dimension");
  Mat m(r, r);
  for (int i = 0; i < r; ++i) {
    const toml::array* row = (*rows)[static_cast<std::size_t>(i)].as_array();
    if (row == nullptr || static_cast<int>(row->size()) != r) {
      throw ConfigError(where + " must be a square matrix");
    }
    for (int j = 0; j < r; ++j) {
      auto v = (*row)[static_cast<std::size_t>(j)].value<double>();
      if (!v) throw ConfigError(where + " entries must be numbers");
      m(i, j) = *v;
    }
  }
  return m;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string canonical_hash(toml::table root) {
  root.erase("output");
  if (auto* s = root["scheme"].as_table()) s->erase("seed");
  if (auto* r = root["run"].as_table()) {
    r->erase("threads");
    if (r->empty()) root.erase("run");
  }
  std::ostringstream os;
  os << root;
  return fnv1a_hex(os.str());
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
  reject_unknown(root, "config",
                 {"model", "scheme", "flow", "observables", "run", "output", "density", "sweep"});

  RunConfig cfg;
  const toml::table* model = section(root, "model");
  if (model == nullptr) throw ConfigError("missing [model] section");
  reject_unknown(*model, "[model]", {"id", "d", "k", "c", "eps", "kappa", "a"});
  cfg.model.id = get_string(*model, "model", "id").value_or("");
  if (cfg.model.id.empty()) throw ConfigError("model.id is required");
  if (auto v = get_int(*model, "model", "d")) cfg.model.d = static_cast<int>(*v);
  if (auto v = get_int(*model, "model", "k")) cfg.model.k = static_cast<int>(*v);
  if (auto v = get_double(*model, "model", "c")) cfg.model.c = *v;
  if (auto v = get_double(*model, "model", "eps")) cfg.model.eps = *v;
  if (auto v = get_double(*model, "model", "kappa")) cfg.model.kappa = *v;
  if (auto v = get_matrix(*model, "model", "a")) cfg.model.a = *v;

  const toml::table* scheme = section(root, "scheme");
  if (scheme == nullptr) throw ConfigError("missing [scheme] section");
  reject_unknown(*scheme, "[scheme]", {"kind", "h", "n", "beta", "seed", "A", "eps_soft"});
  SchemeConfig& sc = cfg.scheme;
  try {
    sc.kind = scheme_from_string(get_string(*scheme, "scheme", "kind").value_or("theta"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (auto v = get_double(*scheme, "scheme", "h")) sc.h = *v;
  if (auto v = get_int(*scheme, "scheme", "n")) sc.n = static_cast<long>(*v);
  if (auto v = get_double(*scheme, "scheme", "beta")) sc.beta = *v;
  if (auto v = get_int(*scheme, "scheme", "seed")) sc.seed = static_cast<std::uint64_t>(*v);
  if (auto v = get_matrix(*scheme, "scheme", "A")) sc.A = *v;
  if (auto v = get_double(*scheme, "scheme", "eps_soft")) sc.eps_soft = *v;
  cfg.model.beta = sc.beta;

  if (const toml::table* flow = section(root, "flow")) {
    reject_unknown(*flow, "[flow]",
                   {"dt0", "growth", "eps_tol", "max_iters", "gd_step", "gd_tol"});
    FlowConfig& f = sc.flow;
    if (auto v = get_double(*flow, "flow", "dt0")) f.dt0 = *v;
    if (auto v = get_double(*flow, "flow", "growth")) f.growth = *v;
    if (auto v = get_double(*flow, "flow", "eps_tol")) f.eps_tol = *v;
    if (auto v = get_int(*flow, "flow", "max_iters")) f.max_iters = static_cast<long>(*v);
    if (auto v = get_double(*flow, "flow", "gd_step")) f.gd_step = *v;
    if (auto v = get_double(*flow, "flow", "gd_tol")) f.gd_tol = *v;
  }

  if (const toml::table* obs = section(root, "observables")) {
    reject_unknown(*obs, "[observables]", {"names"});
    cfg.observables = get_strings(*obs, "observables", "names");
  }
  for (const auto& name : cfg.observables) {
    if (name != "const1" && name != "x1sq" && name != "angle") {
      throw ConfigError("unknown observable '" + name + "'");
    }
  }

  if (const toml::table* run = section(root, "run")) {
    reject_unknown(*run, "[run]", {"replicas", "burn_in", "threads"});
    if (auto v = get_int(*run, "run", "replicas")) cfg.replicas = static_cast<int>(*v);
    if (auto v = get_double(*run, "run", "burn_in")) cfg.burn_in = *v;
    if (auto v = get_int(*run, "run", "threads")) cfg.threads = static_cast<int>(*v);
  }
  if (const toml::table* out = section(root, "output")) {
    reject_unknown(*out, "[output]", {"dir", "samples", "sample_stride"});
    if (auto v = get_string(*out, "output", "dir")) cfg.out_dir = *v;
    if (auto v = get_bool(*out, "output", "samples")) cfg.write_samples = *v;
    if (auto v = get_int(*out, "output", "sample_stride")) cfg.sample_stride = static_cast<long>(*v);
  }
  if (const toml::table* den = section(root, "density")) {
    reject_unknown(*den, "[density]", {"bins"});
    if (auto v = get_int(*den, "density", "bins")) cfg.bins = static_cast<int>(*v);
  }
  if (const toml::table* sw = section(root, "sweep")) {
    reject_unknown(*sw, "[sweep]", {"h", "T", "replicas", "observable", "measure"});
    cfg.sweep_h = get_list(*sw, "sweep", "h");
    cfg.sweep_T = get_list(*sw, "sweep", "T");
    if (auto v = get_int(*sw, "sweep", "replicas")) cfg.sweep_replicas = static_cast<int>(*v);
    if (auto v = get_string(*sw, "sweep", "observable")) cfg.sweep_observable = *v;
    if (auto v = get_string(*sw, "sweep", "measure")) {
      try {
        cfg.sweep_measure = measure_from_string(*v);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }

  if (cfg.replicas < 1) throw ConfigError("run.replicas must be >= 1");
  if (!(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0)) throw ConfigError("run.burn_in must be in [0, 1)");
  if (cfg.threads < 1) throw ConfigError("run.threads must be >= 1");
  if (cfg.sample_stride < 1) throw ConfigError("output.sample_stride must be >= 1");
  if (cfg.bins < 1) throw ConfigError("density.bins must be >= 1");
  if (cfg.sweep_replicas < 1) throw ConfigError("sweep.replicas must be >= 1");
  for (double v : cfg.sweep_h) {
    if (!(v > 0.0)) throw ConfigError("sweep.h values must be > 0");
  }
  for (double v : cfg.sweep_T) {
    if (!(v > 0.0)) throw ConfigError("sweep.T values must be > 0");
  }
  try {
    const ModelPair mp = make_builtin(cfg.model);
    sc.validate(mp.model.d);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  cfg.hash = canonical_hash(root);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

std::vector<Observable> make_observables(const std::vector<std::string>& names,
                                         const ManifoldModel& model) {
  std::vector<Observable> out;
  for (const auto& name : names) {
    if (name == "const1") {
      out.push_back({name, [](const Vec&) { return 1.0; }});
    } else if (name == "x1sq") {
      out.push_back({name, [](const Vec& x) { return x[0] * x[0]; }});
    } else if (name == "angle") {
      if (!model.chart) throw ConfigError("observable 'angle' needs a model with a chart");
      out.push_back({name, [chart = *model.chart](const Vec& x) { return chart.inverse(x)[0]; }});
    } else {
      throw ConfigError("unknown observable '" + name + "'");
    }
  }
  return out;
}

Measure target_measure(SchemeKind kind) {
  return kind == SchemeKind::Pi ? Measure::Mu2 : Measure::Mu1;
}

ReferenceParams reference_params(const RunConfig& cfg) {
  ReferenceParams p;
  p.c = cfg.model.c;
  p.beta = cfg.scheme.beta;
  p.eps = cfg.model.eps;
  return p;
}

}  // namespace lss::app
