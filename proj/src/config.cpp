#include "kkf/config.hpp"

#include <filesystem>
#include <set>

#include "kkf/io.hpp"

namespace kkf {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Object view that rejects unknown keys once every field has been read.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& key) {
    const Json* v = find(key);
    if (!v) fail(join(path_, key), "missing");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const Json* v = find(key);
    if (!v) {
      if (!fallback) fail(join(path_, key), "missing");
      return *fallback;
    }
    if (!v->is_number()) fail(join(path_, key), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    const Json* v = find(key);
    if (!v) {
      if (!fallback) fail(join(path_, key), "missing");
      return *fallback;
    }
    if (!v->is_number_integer()) fail(join(path_, key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    const std::int64_t v = integer(key, fallback ? std::optional<std::int64_t>(static_cast<std::int64_t>(*fallback))
                                                 : std::nullopt);
    if (v < 0) fail(join(path_, key), "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const Json* v = find(key);
    if (!v) {
      if (!fallback) fail(join(path_, key), "missing");
      return *fallback;
    }
    if (!v->is_string()) fail(join(path_, key), "expected a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(join(path_, key), "expected true or false");
    return v->get<bool>();
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) fail(join(path_, key), "unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Matrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != cols || cols == 0) fail(row_path, "rows must be equal-length arrays");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) fail(row_path + "[" + std::to_string(c) + "]", "expected a number");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

// Re-raises library validation failures as ConfigInvalid at `path`.
template <class Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    fail(path, e.detail());
  }
}

std::vector<KernelSpec> parse_kernel_list(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of kernels");
  std::vector<KernelSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_kernel_spec(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

MethodKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "kekrikf") return MethodKind::KeKriKF;
  if (s == "mkrikf") return MethodKind::MKriKF;
  if (s == "ie") return MethodKind::IE;
  if (s == "kf_only") return MethodKind::KfOnly;
  if (s == "kkr_only") return MethodKind::KkrOnly;
  fail(path, "unknown method kind '" + s + "' (kekrikf, mkrikf, ie, kf_only, kkr_only)");
}

MethodSpec parse_method(const Json& j, const std::string& path) {
  Fields f(j, path);
  MethodSpec m;
  m.name = f.string("name");
  m.kind = parse_kind(f.string("kind"), f.path("kind"));
  m.lambda1 = f.number("lambda1", 1.0);
  m.lambda2 = f.number("lambda2", 1.0);
  if (const Json* v = f.find("kernel_nu")) m.kernel_nu = parse_kernel_spec(*v, f.path("kernel_nu"));
  if (const Json* v = f.find("kernel_eta")) m.kernel_eta = parse_kernel_spec(*v, f.path("kernel_eta"));
  if (const Json* v = f.find("transition")) m.transition = parse_transition(*v, f.path("transition"));
  if (const Json* v = f.find("dictionary_nu")) m.dictionary_nu = parse_kernel_list(*v, f.path("dictionary_nu"));
  if (const Json* v = f.find("dictionary_eta")) m.dictionary_eta = parse_kernel_list(*v, f.path("dictionary_eta"));
  m.mkl.mu_theta_nu = f.number("mu_theta_nu", m.mkl.mu_theta_nu);
  m.mkl.mu_theta_eta = f.number("mu_theta_eta", m.mkl.mu_theta_eta);
  m.mkl.gamma_nu = f.number("gamma_nu", m.mkl.gamma_nu);
  m.mkl.gamma_eta = f.number("gamma_eta", m.mkl.gamma_eta);
  const std::string mode = f.string("accumulator", "forgetting");
  if (mode == "forgetting") {
    m.mkl.accumulator_mode = AccumulatorMode::Forgetting;
  } else if (mode == "sample_mean") {
    m.mkl.accumulator_mode = AccumulatorMode::SampleMean;
  } else {
    fail(f.path("accumulator"), "expected 'forgetting' or 'sample_mean'");
  }
  if (const Json* v = f.find("pgd")) {
    Fields p(*v, f.path("pgd"));
    PgdParams& g = m.mkl.pgd;
    g.max_iters = static_cast<int>(p.integer("max_iters", g.max_iters));
    g.tol = p.number("tol", g.tol);
    g.armijo_s = p.number("armijo_s", g.armijo_s);
    g.armijo_beta = p.number("armijo_beta", g.armijo_beta);
    g.armijo_sigma = p.number("armijo_sigma", g.armijo_sigma);
    g.max_backtracks = static_cast<int>(p.integer("max_backtracks", g.max_backtracks));
    p.finish();
  }
  f.finish();
  if (m.kind == MethodKind::MKriKF && (m.dictionary_nu.empty() || m.dictionary_eta.empty())) {
    fail(path, "mkrikf requires dictionary_nu and dictionary_eta");
  }
  checked(path, [&] { validate(m); });
  return m;
}

ScenarioSpec parse_scenario(const Json& j, const std::string& path, const std::string& base_dir) {
  Fields f(j, path);
  ScenarioSpec sc;
  const std::string type = f.string("type");
  sc.noise_std = f.number("noise_std", 0.0);
  if (!(sc.noise_std >= 0.0)) fail(f.path("noise_std"), "must be >= 0");
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() || base_dir.empty()) ? p : (std::filesystem::path(base_dir) / fp).string();
  };

  if (type == "synthetic") {
    sc.synthetic = true;
    if (const Json* v = f.find("kronecker")) {
      Fields k(*v, f.path("kronecker"));
      KroneckerConfig& kc = sc.kronecker;
      if (const Json* s = k.find("seed_matrix")) kc.seed_matrix = parse_matrix(*s, k.path("seed_matrix"));
      if (kc.seed_matrix.rows() != 3 || kc.seed_matrix.cols() != 3) fail(k.path("seed_matrix"), "must be 3x3");
      if ((kc.seed_matrix.array() < 0.0).any() || (kc.seed_matrix.array() > 1.0).any()) {
        fail(k.path("seed_matrix"), "entries must lie in [0, 1]");
      }
      kc.power = static_cast<int>(k.integer("power", kc.power));
      if (kc.power < 1) fail(k.path("power"), "must be >= 1");
      kc.omega = k.number("omega", kc.omega);
      if (!(kc.omega >= 0.0)) fail(k.path("omega"), "must be >= 0");
      kc.t_change = k.count("t_change", kc.t_change);
      kc.t_delete = k.count("t_delete", kc.t_delete);
      kc.delete_prob = k.number("delete_prob", kc.delete_prob);
      if (!(kc.delete_prob >= 0.0 && kc.delete_prob <= 1.0)) fail(k.path("delete_prob"), "must lie in [0, 1]");
      kc.max_attempts = static_cast<int>(k.integer("max_attempts", kc.max_attempts));
      if (kc.max_attempts < 1) fail(k.path("max_attempts"), "must be >= 1");
      kc.rng_seed = static_cast<std::uint64_t>(k.count("rng_seed", 0));
      k.finish();
    }
    if (const Json* v = f.find("signal")) {
      Fields s(*v, f.path("signal"));
      SignalModelConfig& m = sc.signal;
      const std::string model = s.string("model", "bandlimited_plus_trend");
      if (model == "bandlimited_plus_trend") {
        m.model = SignalModel::BandlimitedPlusTrend;
      } else if (model == "autoregressive_plus_bandlimited") {
        m.model = SignalModel::AutoregressivePlusBandlimited;
      } else {
        fail(s.path("model"), "expected 'bandlimited_plus_trend' or 'autoregressive_plus_bandlimited'");
      }
      m.bandwidth = static_cast<int>(s.count("bandwidth", static_cast<std::size_t>(m.bandwidth)));
      if (const Json* t = s.find("trend")) {
        Fields tr(*t, s.path("trend"));
        if (const Json* b = tr.find("transition")) m.trend_transition = parse_transition(*b, tr.path("transition"));
        if (const Json* k = tr.find("noise_kernel")) {
          m.trend_noise_kernel = parse_kernel_spec(*k, tr.path("noise_kernel"));
        }
        tr.finish();
      }
      m.gamma_f = s.number("gamma_f", m.gamma_f);
      if (!(m.gamma_f >= 0.0)) fail(s.path("gamma_f"), "must be >= 0");
      m.rng_seed = static_cast<std::uint64_t>(s.count("rng_seed", 0));
      s.finish();
    }
    const auto n = static_cast<std::size_t>(std::pow(3.0, sc.kronecker.power) + 0.5);
    if (static_cast<std::size_t>(sc.signal.bandwidth) > n) {
      fail(f.path("signal") + ".bandwidth", "exceeds the node count " + std::to_string(n));
    }
    sc.signal.noise_std = sc.noise_std;
  } else if (type == "dataset") {
    sc.synthetic = false;
    if (const Json* man = f.find("manifest")) {
      if (!man->is_string()) fail(f.path("manifest"), "expected a path");
      const std::string mpath = resolve(man->get<std::string>());
      Json mj;
      try {
        mj = Json::parse(read_text_file(mpath));
      } catch (const Json::exception& e) {
        fail(f.path("manifest"), std::string("cannot parse ") + mpath + ": " + e.what());
      }
      const std::string mdir = std::filesystem::path(mpath).parent_path().string();
      Fields m(mj, f.path("manifest"));
      const auto resolve_m = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return (fp.is_absolute() || mdir.empty()) ? p : (std::filesystem::path(mdir) / fp).string();
      };
      sc.dataset.signals_path = resolve_m(m.string("signals"));
      const Json& epochs = m.require("epochs");
      if (!epochs.is_array() || epochs.empty()) fail(m.path("epochs"), "expected a nonempty array");
      for (std::size_t i = 0; i < epochs.size(); ++i) {
        Fields e(epochs[i], m.path("epochs") + "[" + std::to_string(i) + "]");
        const std::size_t first = e.count("first_slot");
        sc.dataset.graph_paths.emplace_back(first, resolve_m(e.string("path")));
        e.finish();
      }
      m.find("num_nodes");
      m.find("horizon");
      m.find("components");
      m.finish();
    } else {
      sc.dataset.signals_path = resolve(f.string("signals"));
      const Json& graphs = f.require("graphs");
      if (!graphs.is_array() || graphs.empty()) fail(f.path("graphs"), "expected a nonempty array");
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        Fields e(graphs[i], f.path("graphs") + "[" + std::to_string(i) + "]");
        const std::size_t first = e.count("first_slot", 1);
        sc.dataset.graph_paths.emplace_back(first, resolve(e.string("path")));
        e.finish();
      }
    }
  } else {
    fail(f.path("type"), "expected 'synthetic' or 'dataset'");
  }
  f.finish();
  return sc;
}

}  // namespace

KernelSpec parse_kernel_spec(const Json& j, const std::string& path) {
  Fields f(j, path);
  const std::string family = f.string("family");
  KernelSpec s;
  const auto sigma2 = [&] {
    if (f.has("sigma2") && f.has("sigma")) fail(path, "give sigma2 or sigma, not both");
    if (f.has("sigma")) {
      const double sigma = f.number("sigma");
      return sigma * sigma;
    }
    return f.number("sigma2");
  };
  if (family == "diffusion") {
    s = KernelSpec::diffusion(sigma2());
  } else if (family == "regularized") {
    s = KernelSpec::regularized(sigma2());
  } else if (family == "p_step") {
    s = KernelSpec::p_step(f.number("a"), static_cast<int>(f.integer("p")));
  } else if (family == "bandlimited") {
    s = KernelSpec::bandlimited(f.number("beta"), static_cast<int>(f.integer("bandwidth")));
  } else if (family == "band_rejection") {
    s = KernelSpec::band_rejection(f.number("beta"), static_cast<int>(f.integer("k")),
                                   static_cast<int>(f.integer("l")));
  } else if (family == "identity") {
    s = KernelSpec::identity();
  } else {
    fail(f.path("family"), "unknown kernel family '" + family + "'");
  }
  f.finish();
  // Parameter bounds that do not depend on the graph size.
  checked(path, [&] { validate(s, std::numeric_limits<int>::max()); });
  return s;
}

Json to_json(const KernelSpec& s) {
  switch (s.family) {
    case KernelFamily::Diffusion: return {{"family", "diffusion"}, {"sigma2", s.sigma2}};
    case KernelFamily::RegularizedLaplacian: return {{"family", "regularized"}, {"sigma2", s.sigma2}};
    case KernelFamily::PStepRandomWalk: return {{"family", "p_step"}, {"a", s.a}, {"p", s.p}};
    case KernelFamily::Bandlimited: return {{"family", "bandlimited"}, {"beta", s.beta}, {"bandwidth", s.bandwidth}};
    case KernelFamily::BandRejection:
      return {{"family", "band_rejection"}, {"beta", s.beta}, {"k", s.k}, {"l", s.l}};
    case KernelFamily::Identity: return {{"family", "identity"}};
  }
  return {};
}

TransitionSpec parse_transition(const Json& j, const std::string& path) {
  Fields f(j, path);
  TransitionSpec t;
  const std::string form = f.string("form");
  if (form == "scaled_identity") {
    t.form = TransitionForm::ScaledIdentity;
  } else if (form == "scaled_adjacency") {
    t.form = TransitionForm::ScaledAdjacency;
  } else if (form == "scaled_adjacency_plus_identity") {
    t.form = TransitionForm::ScaledAdjacencyPlusIdentity;
  } else if (form == "explicit") {
    t.form = TransitionForm::ExplicitMatrix;
    t.matrix = parse_matrix(f.require("matrix"), f.path("matrix"));
  } else {
    fail(f.path("form"),
         "expected scaled_identity, scaled_adjacency, scaled_adjacency_plus_identity or explicit");
  }
  if (t.form != TransitionForm::ExplicitMatrix) t.alpha = f.number("alpha");
  f.finish();
  return t;
}

ExperimentConfig parse_experiment_config(const Json& j, const std::string& base_dir) {
  Fields f(j, "");
  ExperimentConfig cfg;
  cfg.horizon = f.count("horizon");
  if (cfg.horizon == 0) fail("horizon", "must be >= 1");
  cfg.trials = f.count("trials", 1);
  if (cfg.trials == 0) fail("trials", "must be >= 1");
  cfg.seed = static_cast<std::uint64_t>(f.count("seed", 0));
  cfg.output_dir = f.string("output_dir", "out");
  cfg.write_estimates = f.boolean("write_estimates", false);
  cfg.scenario = parse_scenario(f.require("scenario"), "scenario", base_dir);

  const Json& sampling = f.require("sampling");
  Fields s(sampling, "sampling");
  if (s.has("sample_count") == s.has("sample_fraction")) fail("sampling", "give exactly one of sample_count, sample_fraction");
  std::optional<double> fraction;
  if (s.has("sample_count")) {
    cfg.sample_count = s.count("sample_count");
  } else {
    fraction = s.number("sample_fraction");
    if (!(*fraction >= 0.0 && *fraction <= 1.0)) fail("sampling.sample_fraction", "must lie in [0, 1]");
  }
  if (s.string("mode", "fixed_uniform") != "fixed_uniform") fail("sampling.mode", "only 'fixed_uniform' is supported");
  s.finish();

  const Json& methods = f.require("methods");
  if (!methods.is_array() || methods.empty()) fail("methods", "at least one method required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string p = "methods[" + std::to_string(i) + "]";
    cfg.methods.push_back(parse_method(methods[i], p));
    if (!names.insert(cfg.methods.back().name).second) fail(p + ".name", "duplicate method name");
  }
  f.finish();

  if (cfg.scenario.synthetic) {
    const auto n = static_cast<std::size_t>(std::pow(3.0, cfg.scenario.kronecker.power) + 0.5);
    if (fraction) cfg.sample_count = static_cast<std::size_t>(std::ceil(*fraction * static_cast<double>(n) - 1e-9));
    if (cfg.sample_count > n) fail("sampling.sample_count", "exceeds the node count " + std::to_string(n));
  } else if (fraction) {
    // Resolved against the dataset width.
    const Matrix signals = load_signals_csv(cfg.scenario.dataset.signals_path);
    cfg.sample_count = static_cast<std::size_t>(std::ceil(*fraction * static_cast<double>(signals.cols()) - 1e-9));
  }
  cfg.canonical_json = j.dump();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "<root>: cannot parse " + path + ": " + e.what());
  }
  return parse_experiment_config(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace kkf
