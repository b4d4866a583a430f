#include "stein/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <utility>
#include <vector>

#include "stein/diagnostics.hpp"
#include "stein/errors.hpp"
#include "stein/io.hpp"
#include "stein/rng.hpp"
#include "stein/svgd.hpp"
#include "stein/svn.hpp"
#include "stein/svn_cg.hpp"

namespace stein {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known) throw ConfigError(where.empty() ? item.key() : where + "." + item.key(),
                                  "unknown key");
  }
}

double get_number(const json& obj, const std::string& where, const char* key,
                  double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + key, "missing required field");
    return fallback;
  }
  if (!obj[key].is_number()) throw ConfigError(where + key, "expected a number");
  return obj[key].get<double>();
}

long get_integer(const json& obj, const std::string& where, const char* key, long fallback,
                 bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + key, "missing required field");
    return fallback;
  }
  if (!obj[key].is_number_integer()) throw ConfigError(where + key, "expected an integer");
  return obj[key].get<long>();
}

Vector vector_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where, "expected an array");
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError(where, "expected numeric entries");
    v(static_cast<Index>(i)) = arr[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(where, "expected a non-empty array of rows");
  const std::size_t cols = arr[0].size();
  Matrix m(arr.size(), cols);
  for (std::size_t r = 0; r < arr.size(); ++r) {
    if (!arr[r].is_array() || arr[r].size() != cols)
      throw ConfigError(where, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = arr[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// Normalizes a target spec: fills defaults, rejects unknown keys, and
// returns the spec with its dimension attached implicitly via make_target.
json normalize_target(const json& spec) {
  if (!spec.is_object()) throw ConfigError("target", "expected an object");
  if (!spec.contains("name") || !spec["name"].is_string() ||
      spec["name"].get<std::string>().empty())
    throw ConfigError("target.name", "missing target name");
  const std::string name = spec["name"].get<std::string>();
  json out;
  out["name"] = name;
  if (name == "hybrid_rosenbrock") {
    check_keys(spec, "target", {"name", "n1", "n2", "a", "b", "mu"});
    out["n1"] = get_integer(spec, "target.", "n1", 0, true);
    out["n2"] = get_integer(spec, "target.", "n2", 0, true);
    out["a"] = get_number(spec, "target.", "a", 0.0, true);
    out["b"] = get_number(spec, "target.", "b", 0.0, true);
    out["mu"] = get_number(spec, "target.", "mu", 1.0);
  } else if (name == "gaussian") {
    check_keys(spec, "target", {"name", "dim", "mean", "cov"});
    Vector mean;
    if (spec.contains("mean")) {
      mean = vector_from_json(spec["mean"], "target.mean");
    } else if (spec.contains("dim")) {
      mean = Vector::Zero(get_integer(spec, "target.", "dim", 0, true));
    } else {
      throw ConfigError("target", "gaussian requires 'dim' or 'mean'");
    }
    Matrix cov = spec.contains("cov") ? matrix_from_json(spec["cov"], "target.cov")
                                      : Matrix(Matrix::Identity(mean.size(), mean.size()));
    json mean_json = json::array();
    for (Index i = 0; i < mean.size(); ++i) mean_json.push_back(mean(i));
    out["mean"] = mean_json;
    out["cov"] = matrix_to_json(cov);
  } else if (name == "double_banana") {
    check_keys(spec, "target", {"name", "y", "sigma1", "sigma2"});
    out["y"] = get_number(spec, "target.", "y", std::log(30.0));
    out["sigma1"] = get_number(spec, "target.", "sigma1", 1.0);
    out["sigma2"] = get_number(spec, "target.", "sigma2", 0.3);
  } else {
    throw ConfigError("target.name", "unknown target '" + name + "'");
  }
  return out;
}

Method parse_method(const json& doc) {
  if (!doc.contains("method") || !doc["method"].is_string() ||
      doc["method"].get<std::string>().empty())
    throw ConfigError("method", "missing or empty method");
  const std::string name = doc["method"].get<std::string>();
  if (name == "svgd") return Method::svgd;
  if (name == "ssvgd") return Method::ssvgd;
  if (name == "svn_bd") return Method::svn_bd;
  if (name == "ssvn_chol") return Method::ssvn_chol;
  if (name == "ssvn_cg") return Method::ssvn_cg;
  throw ConfigError("method", "unknown method '" + name + "'");
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::svgd: return "svgd";
    case Method::ssvgd: return "ssvgd";
    case Method::svn_bd: return "svn_bd";
    case Method::ssvn_chol: return "ssvn_chol";
    case Method::ssvn_cg: return "ssvn_cg";
  }
  return "?";
}

TargetModel make_target(const json& target_spec) {
  const json spec = normalize_target(target_spec);
  const std::string name = spec["name"].get<std::string>();
  if (name == "hybrid_rosenbrock") {
    HybridRosenbrockParams p;
    p.n1 = spec["n1"].get<int>();
    p.n2 = spec["n2"].get<int>();
    p.a = spec["a"].get<double>();
    p.b = spec["b"].get<double>();
    p.mu = spec["mu"].get<double>();
    return make_hybrid_rosenbrock(p);
  }
  if (name == "gaussian") {
    return make_gaussian(vector_from_json(spec["mean"], "target.mean"),
                         matrix_from_json(spec["cov"], "target.cov"));
  }
  return make_double_banana(spec["y"].get<double>(), spec["sigma1"].get<double>(),
                            spec["sigma2"].get<double>());
}

SamplerConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "config must be a JSON object");
  check_keys(doc, "", {"method", "target", "N", "L", "tau", "lambda", "kernel", "init",
                       "seed", "record_every", "pool_last", "cg"});

  SamplerConfig config;
  config.method = parse_method(doc);
  if (!doc.contains("target")) throw ConfigError("target", "missing required field");
  config.target = normalize_target(doc["target"]);
  const Index dim = make_target(config.target).dim;

  config.particles = get_integer(doc, "", "N", 0, true);
  config.iterations = get_integer(doc, "", "L", 0, true);
  if (config.particles < 1) throw ConfigError("N", "particle count must be >= 1");
  if (config.iterations < 1) throw ConfigError("L", "iteration count must be >= 1");

  const double default_tau = config.method == Method::ssvgd ? 0.01 : 0.1;
  config.tau = get_number(doc, "", "tau", default_tau);
  if (!(config.tau > 0.0)) throw ConfigError("tau", "step size must be > 0");
  config.lambda = get_number(doc, "", "lambda", 0.01);
  if (config.lambda < 0.0) throw ConfigError("lambda", "damping must be >= 0");

  config.bandwidth = static_cast<double>(dim);
  config.metric_mode = MetricMode::averaged_gauss_newton;
  if (doc.contains("kernel")) {
    const json& kernel = doc["kernel"];
    if (!kernel.is_object()) throw ConfigError("kernel", "expected an object");
    check_keys(kernel, "kernel", {"bandwidth", "metric_mode", "metric"});
    config.bandwidth = get_number(kernel, "kernel.", "bandwidth", config.bandwidth);
    if (!(config.bandwidth > 0.0)) throw ConfigError("kernel.bandwidth", "must be > 0");
    if (kernel.contains("metric_mode")) {
      const std::string mode = kernel["metric_mode"].is_string()
                                   ? kernel["metric_mode"].get<std::string>()
                                   : "";
      if (mode == "identity") config.metric_mode = MetricMode::identity;
      else if (mode == "averaged_gauss_newton")
        config.metric_mode = MetricMode::averaged_gauss_newton;
      else if (mode == "fixed") config.metric_mode = MetricMode::fixed;
      else throw ConfigError("kernel.metric_mode", "unknown mode '" + mode + "'");
    }
    if (config.metric_mode == MetricMode::fixed) {
      if (!kernel.contains("metric"))
        throw ConfigError("kernel.metric", "fixed metric mode requires a metric");
      config.fixed_metric = matrix_from_json(kernel["metric"], "kernel.metric");
      if (config.fixed_metric.rows() != dim)
        throw ConfigError("kernel.metric", "metric dimension does not match the target");
    } else if (kernel.contains("metric")) {
      throw ConfigError("kernel.metric", "metric is only valid with metric_mode = fixed");
    }
  }

  if (doc.contains("init")) {
    const json& init = doc["init"];
    if (!init.is_object()) throw ConfigError("init", "expected an object");
    check_keys(init, "init", {"low", "high"});
    config.init_low = get_number(init, "init.", "low", config.init_low);
    config.init_high = get_number(init, "init.", "high", config.init_high);
  }
  if (!(config.init_low < config.init_high))
    throw ConfigError("init", "low must be strictly below high");

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned())
      throw ConfigError("seed", "expected an integer");
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  config.record_every = get_integer(doc, "", "record_every", 1);
  if (config.record_every < 1) throw ConfigError("record_every", "must be >= 1");

  const long snapshots = 1 + config.iterations / config.record_every;
  config.pool_last = get_integer(doc, "", "pool_last", std::min<long>(100, snapshots));
  if (config.pool_last < 1 || config.pool_last > snapshots)
    throw ConfigError("pool_last", "must be in [1, " + std::to_string(snapshots) +
                                       "] for this L and record_every");

  if (doc.contains("cg")) {
    const json& cg = doc["cg"];
    if (!cg.is_object()) throw ConfigError("cg", "expected an object");
    check_keys(cg, "cg", {"rel_tol", "max_iter"});
    config.cg.rel_tol = get_number(cg, "cg.", "rel_tol", config.cg.rel_tol);
    if (!(config.cg.rel_tol > 0.0)) throw ConfigError("cg.rel_tol", "must be > 0");
    config.cg.max_iter = get_integer(cg, "cg.", "max_iter", config.cg.max_iter);
    if (config.cg.max_iter < 0) throw ConfigError("cg.max_iter", "must be >= 0");
  }
  return config;
}

json config_to_json(const SamplerConfig& config) {
  json out;
  out["method"] = method_name(config.method);
  out["target"] = config.target;
  out["N"] = config.particles;
  out["L"] = config.iterations;
  out["tau"] = config.tau;
  out["lambda"] = config.lambda;
  out["kernel"]["bandwidth"] = config.bandwidth;
  out["kernel"]["metric_mode"] = config.metric_mode == MetricMode::identity ? "identity"
                                 : config.metric_mode == MetricMode::fixed ? "fixed"
                                     : "averaged_gauss_newton";
  if (config.metric_mode == MetricMode::fixed)
    out["kernel"]["metric"] = matrix_to_json(config.fixed_metric);
  out["init"]["low"] = config.init_low;
  out["init"]["high"] = config.init_high;
  out["seed"] = config.seed;
  out["record_every"] = config.record_every;
  out["pool_last"] = config.pool_last;
  out["cg"]["rel_tol"] = config.cg.rel_tol;
  out["cg"]["max_iter"] = config.cg.max_iter;
  return out;
}

std::string config_hash(const SamplerConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

TargetModel with_counters(const TargetModel& target, std::shared_ptr<EvalCounters> counters) {
  TargetModel wrapped = target;
  wrapped.log_density = [inner = target.log_density, counters](const Vector& x) {
    ++counters->log_density;
    return inner(x);
  };
  wrapped.grad_log_density = [inner = target.grad_log_density, counters](const Vector& x) {
    ++counters->grad;
    return inner(x);
  };
  wrapped.gauss_newton_hessian = [inner = target.gauss_newton_hessian,
                                  counters](const Vector& x) {
    ++counters->hessian;
    return inner(x);
  };
  return wrapped;
}

RunArtifacts run(const SamplerConfig& config, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const auto start_time = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  RunArtifacts artifacts;
  artifacts.dir = out_dir;
  artifacts.meta_path = out_dir / "meta.json";
  artifacts.trace_path = out_dir / "trace.csv";
  artifacts.metrics_path = out_dir / "metrics.jsonl";
  artifacts.pooled_path = out_dir / "pooled.csv";

  auto counters = std::make_shared<EvalCounters>();
  const TargetModel target = with_counters(make_target(config.target), counters);
  const Index n = config.particles;
  const Index d = target.dim;

  KernelSpec spec;
  spec.bandwidth = config.bandwidth;
  spec.metric_mode = config.metric_mode;
  spec.metric = config.metric_mode == MetricMode::fixed ? config.fixed_metric
                                                        : Matrix(Matrix::Identity(d, d));

  // Particle-major init order from the dedicated substream.
  Ensemble ens;
  ens.positions.resize(n, d);
  {
    auto rng = make_substream(config.seed, Purpose::init, 0);
    std::uniform_real_distribution<double> uniform(config.init_low, config.init_high);
    for (Index m = 0; m < n; ++m)
      for (Index i = 0; i < d; ++i) ens.positions(m, i) = uniform(rng);
  }

  std::ofstream trace(artifacts.trace_path);
  std::ofstream metrics(artifacts.metrics_path);
  if (!trace || !metrics)
    throw std::runtime_error("cannot open run outputs under " + out_dir.string());
  write_csv_header(trace, d);
  append_ensemble_rows(trace, 0, ens.positions);
  trace.flush();

  std::vector<Ensemble> snapshots;
  snapshots.push_back(ens);
  MomentTrace moment_trace;

  artifacts.completed = true;
  long iterations_done = 0;
  for (long t = 1; t <= config.iterations; ++t) {
    try {
      switch (config.method) {
        case Method::svgd:
          ens = svgd_step(ens, target, spec, config.tau);
          break;
        case Method::ssvgd: {
          auto rng = make_substream(config.seed, Purpose::svgd_noise, t);
          ens = svgd_step(ens, target, spec, config.tau, true, rng);
          break;
        }
        case Method::svn_bd:
          ens = svn_block_diagonal_step(ens, target, spec, config.tau);
          break;
        case Method::ssvn_chol: {
          auto rng = make_substream(config.seed, Purpose::svn_noise, t);
          ens = ssvn_step_cholesky(ens, target, spec, config.tau, config.lambda, true, rng);
          break;
        }
        case Method::ssvn_cg: {
          auto rng = make_substream(config.seed, Purpose::svn_noise, t);
          const long max_iter = config.cg.max_iter > 0 ? config.cg.max_iter : n * d;
          ens = ssvn_step_cg(ens, target, spec, config.tau, config.lambda, config.cg.rel_tol,
                             max_iter, true, rng);
          break;
        }
      }
    } catch (const NonFiniteUpdate& e) {
      artifacts.completed = false;
      artifacts.error = e.what();
      artifacts.failed_iteration = e.iteration;
      break;
    } catch (const std::exception& e) {
      artifacts.completed = false;
      artifacts.error = e.what();
      artifacts.failed_iteration = t;
      break;
    }
    iterations_done = t;

    moment_trace.iterations.push_back(t);
    json row;
    row["iter"] = t;
    json mean = json::array();
    if (n >= 2) {
      const Moments m = ensemble_moments(ens.positions);
      moment_trace.means.push_back(m.mean);
      moment_trace.variances.push_back(m.variance);
      json variance = json::array();
      for (Index i = 0; i < d; ++i) {
        mean.push_back(m.mean(i));
        variance.push_back(m.variance(i));
      }
      row["mean"] = mean;
      row["variance"] = variance;
    } else {
      moment_trace.means.push_back(ens.positions.colwise().mean().transpose());
      for (Index i = 0; i < d; ++i) mean.push_back(moment_trace.means.back()(i));
      row["mean"] = mean;
    }
    metrics << row.dump() << "\n";

    if (t % config.record_every == 0) {
      append_ensemble_rows(trace, t, ens.positions);
      trace.flush();
      metrics.flush();
      snapshots.push_back(ens);
    }
  }

  if (artifacts.completed) {
    std::ofstream pooled_out(artifacts.pooled_path);
    write_csv_header(pooled_out, d);
    const std::size_t offset = snapshots.size() - static_cast<std::size_t>(config.pool_last);
    for (long s = 0; s < config.pool_last; ++s) {
      const Ensemble& snap = snapshots[offset + static_cast<std::size_t>(s)];
      append_ensemble_rows(pooled_out, snap.iteration, snap.positions);
    }
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();

  json meta;
  meta["config"] = config_to_json(config);
  meta["config_hash"] = config_hash(config);
  meta["method"] = method_name(config.method);
  meta["dim"] = d;
  meta["status"] = artifacts.completed ? "completed" : "failed";
  if (!artifacts.completed) {
    meta["error"]["message"] = artifacts.error;
    meta["error"]["iteration"] = artifacts.failed_iteration;
  }
  meta["iterations_completed"] = iterations_done;
  meta["snapshots_recorded"] = snapshots.size();
  meta["grad_evals"] = counters->grad;
  meta["hessian_evals"] = counters->hessian;
  meta["log_density_evals"] = counters->log_density;
  meta["elapsed_seconds"] = elapsed;
  meta["files"]["trace"] = artifacts.trace_path.filename().string();
  meta["files"]["metrics"] = artifacts.metrics_path.filename().string();
  if (artifacts.completed)
    meta["files"]["pooled"] = artifacts.pooled_path.filename().string();
  std::ofstream meta_out(artifacts.meta_path);
  meta_out << meta.dump() << "\n";
  return artifacts;
}

}  // namespace stein
