#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "stein/kernels.hpp"
#include "stein/targets.hpp"
#include "stein/types.hpp"

namespace stein {

enum class Method { svgd, ssvgd, svn_bd, ssvn_chol, ssvn_cg };

std::string method_name(Method method);

struct CgOptions {
  double rel_tol = 1e-6;
  long max_iter = 0;  // 0 -> N*d
};

struct SamplerConfig {
  Method method = Method::ssvn_chol;
  nlohmann::json target;  // normalized target spec (name + parameters)
  Index particles = 0;    // N
  long iterations = 0;    // L
  double tau = 0.1;
  double lambda = 0.01;
  double bandwidth = 0.0;  // resolved to d when absent from the document
  MetricMode metric_mode = MetricMode::averaged_gauss_newton;
  Matrix fixed_metric;     // only with metric_mode == fixed
  double init_low = -6.0;
  double init_high = 6.0;
  std::uint64_t seed = 0;
  long record_every = 1;
  long pool_last = 100;
  CgOptions cg;
};

// Parses and validates a JSON config document; absent fields get the
// documented defaults (bandwidth = d, lambda = 0.01, tau = 0.01 for ssvgd
// and 0.1 otherwise, init = [-6, 6]). Unknown keys are errors.
SamplerConfig parse_config(const std::string& text);

// Canonical resolved form; stable across runs, used for the meta record and
// the config hash.
nlohmann::json config_to_json(const SamplerConfig& config);
std::string config_hash(const SamplerConfig& config);

TargetModel make_target(const nlohmann::json& target_spec);

struct EvalCounters {
  long log_density = 0;
  long grad = 0;
  long hessian = 0;
};

TargetModel with_counters(const TargetModel& target, std::shared_ptr<EvalCounters> counters);

struct RunArtifacts {
  std::filesystem::path dir;
  std::filesystem::path meta_path;
  std::filesystem::path trace_path;
  std::filesystem::path metrics_path;
  std::filesystem::path pooled_path;
  bool completed = false;
  std::string error;
  long failed_iteration = -1;
};

// Seeds, initializes, iterates the selected stepper for L iterations,
// records snapshots every record_every iterations (plus iteration 0) and
// per-iteration moments, pools the last pool_last snapshots on completion.
// Stepper failures are recorded in the meta record; traces written so far
// stay on disk.
RunArtifacts run(const SamplerConfig& config, const std::filesystem::path& out_dir);

}  // namespace stein
