#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stein/errors.hpp"
#include "stein/harness.hpp"
#include "stein/io.hpp"
#include "stein/rng.hpp"

using namespace stein;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "stein_harness_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const fs::path& path) {
  std::ifstream in(path);
  long lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  return lines;
}

const char* k5d_config = R"({
  "method": "ssvn_chol",
  "target": {"name": "hybrid_rosenbrock", "n2": 2, "n1": 3, "a": 10, "b": 30},
  "N": 100,
  "L": 200
})";

}  // namespace

TEST_CASE("defaults are filled for the 5d run") {
  const SamplerConfig config = parse_config(k5d_config);
  CHECK(config.method == Method::ssvn_chol);
  CHECK(config.tau == doctest::Approx(0.1));
  CHECK(config.lambda == doctest::Approx(0.01));
  CHECK(config.bandwidth == doctest::Approx(5.0));  // h = d
  CHECK(config.metric_mode == MetricMode::averaged_gauss_newton);
  CHECK(config.init_low == doctest::Approx(-6.0));
  CHECK(config.init_high == doctest::Approx(6.0));
  CHECK(config.pool_last == 100);
  CHECK(config.record_every == 1);
  CHECK(config.target["mu"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("ssvgd default step size is smaller") {
  const SamplerConfig config = parse_config(R"({
    "method": "ssvgd",
    "target": {"name": "gaussian", "dim": 2},
    "N": 10, "L": 5
  })");
  CHECK(config.tau == doctest::Approx(0.01));
}

TEST_CASE("the 10d run document is accepted") {
  const SamplerConfig config = parse_config(R"({
    "method": "ssvgd",
    "target": {"name": "hybrid_rosenbrock", "n2": 3, "n1": 4, "a": 30, "b": 20},
    "N": 300,
    "L": 10000,
    "kernel": {"metric_mode": "identity"}
  })");
  CHECK(config.particles == 300);
  CHECK(config.metric_mode == MetricMode::identity);
  CHECK(config.bandwidth == doctest::Approx(10.0));
}

TEST_CASE("config validation errors name the field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field;
    }
    return std::string("<no error>");
  };
  CHECK(field_of(R"({"target": {"name": "gaussian", "dim": 2}, "N": 1, "L": 1})") ==
        "method");
  CHECK(field_of(R"({"method": "", "target": {"name": "gaussian", "dim": 2}, "N": 1, "L": 1})") ==
        "method");
  CHECK(field_of(R"({"method": "ssvgd", "target": {"name": "gaussian", "dim": 2},
                     "N": 1, "L": 0})") == "L");
  CHECK(field_of(R"({"method": "ssvgd", "target": {"name": "gaussian", "dim": 2},
                     "N": 1, "L": 1, "bogus": 3})") == "bogus");
  CHECK(field_of(R"({"method": "ssvgd", "target": {"name": "gaussian", "dim": 2, "mean2": []},
                     "N": 1, "L": 1})") == "target.mean2");
  CHECK(field_of(R"({"method": "ssvgd", "target": {"name": "gaussian", "dim": 2},
                     "N": 1, "L": 1, "init": {"low": 2, "high": -2}})") == "init");
  CHECK(field_of(R"({"method": "ssvgd", "target": {"name": "gaussian", "dim": 2},
                     "N": 1, "L": 1, "tau": -0.5})") == "tau");
  CHECK(field_of(R"({"method": "ssvgd", "target": {"name": "gaussian", "dim": 2},
                     "N": 1, "L": 4, "pool_last": 99})") == "pool_last");
  CHECK(field_of("not json at all") == "<document>");
}

TEST_CASE("target factory covers the benchmark catalog") {
  CHECK(make_target(nlohmann::json::parse(
            R"({"name": "hybrid_rosenbrock", "n1": 3, "n2": 2, "a": 10, "b": 30})"))
            .dim == 5);
  CHECK(make_target(nlohmann::json::parse(R"({"name": "gaussian", "dim": 4})")).dim == 4);
  const TargetModel banana =
      make_target(nlohmann::json::parse(R"({"name": "double_banana"})"));
  CHECK(banana.dim == 2);
  CHECK_FALSE(banana.has_ground_truth());
  CHECK_THROWS_AS(make_target(nlohmann::json::parse(R"({"name": "cauchy"})")), ConfigError);
}

TEST_CASE("counting wrapper tracks evaluations") {
  auto counters = std::make_shared<EvalCounters>();
  const TargetModel target = with_counters(make_standard_gaussian(2), counters);
  const Vector x = Vector::Zero(2);
  target.log_density(x);
  target.grad_log_density(x);
  target.grad_log_density(x);
  target.gauss_newton_hessian(x);
  CHECK(counters->log_density == 1);
  CHECK(counters->grad == 2);
  CHECK(counters->hessian == 1);
}

TEST_CASE("runs with the same seed produce byte-identical sample files") {
  const SamplerConfig config = parse_config(R"({
    "method": "ssvn_chol",
    "target": {"name": "hybrid_rosenbrock", "n1": 2, "n2": 1, "a": 0.5, "b": 0.5},
    "N": 8, "L": 20, "seed": 31337
  })");
  const RunArtifacts first = run(config, fresh_dir("determinism_a"));
  const RunArtifacts second = run(config, fresh_dir("determinism_b"));
  CHECK(first.completed);
  CHECK(second.completed);
  CHECK(slurp(first.pooled_path) == slurp(second.pooled_path));
  CHECK(slurp(first.trace_path) == slurp(second.trace_path));
}

TEST_CASE("the 2d benchmark run completes with one moment row per iteration") {
  const SamplerConfig config = parse_config(R"({
    "method": "ssvn_chol",
    "target": {"name": "hybrid_rosenbrock", "n1": 2, "n2": 1, "a": 0.5, "b": 0.5},
    "N": 100, "L": 200, "tau": 0.1, "seed": 5
  })");
  const RunArtifacts artifacts = run(config, fresh_dir("run_2d"));
  CHECK(artifacts.completed);
  CHECK(count_lines(artifacts.metrics_path) == 200);
  // trace: header + (L + 1) snapshots of N rows at record_every = 1
  CHECK(count_lines(artifacts.trace_path) == 1 + 201 * 100);

  const nlohmann::json meta = nlohmann::json::parse(slurp(artifacts.meta_path));
  CHECK(meta["status"] == "completed");
  CHECK(meta["grad_evals"].get<long>() == 100 * 200);
  CHECK(meta["hessian_evals"].get<long>() == 100 * 200);
  CHECK(meta["config_hash"].get<std::string>() == config_hash(config));

  const Matrix pooled = read_samples_csv(artifacts.pooled_path);
  CHECK(pooled.rows() == 100 * 100);  // pool_last = 100 snapshots of N = 100
  CHECK(pooled.cols() == 2);
}

TEST_CASE("identity-metric ssvgd evaluates no hessians") {
  const SamplerConfig config = parse_config(R"({
    "method": "ssvgd",
    "target": {"name": "gaussian", "dim": 2},
    "N": 5, "L": 10, "kernel": {"metric_mode": "identity"}, "seed": 2
  })");
  const RunArtifacts artifacts = run(config, fresh_dir("ssvgd_identity"));
  CHECK(artifacts.completed);
  const nlohmann::json meta = nlohmann::json::parse(slurp(artifacts.meta_path));
  CHECK(meta["grad_evals"].get<long>() == 50);
  CHECK(meta["hessian_evals"].get<long>() == 0);
}

TEST_CASE("a stepper blow-up preserves the partial trace and is recorded") {
  const SamplerConfig config = parse_config(R"({
    "method": "ssvgd",
    "target": {"name": "hybrid_rosenbrock", "n1": 2, "n2": 1, "a": 0.5, "b": 50000},
    "N": 8, "L": 400, "tau": 1000000.0, "seed": 7,
    "kernel": {"metric_mode": "identity"},
    "pool_last": 1
  })");
  const RunArtifacts artifacts = run(config, fresh_dir("overflow"));
  CHECK_FALSE(artifacts.completed);
  CHECK(artifacts.failed_iteration >= 1);
  CHECK_FALSE(fs::exists(artifacts.pooled_path));

  const nlohmann::json meta = nlohmann::json::parse(slurp(artifacts.meta_path));
  CHECK(meta["status"] == "failed");
  CHECK(meta["error"]["iteration"].get<long>() == artifacts.failed_iteration);
  // snapshots for iterations 0 .. t-1 survive on disk
  const long expected_rows = 1 + 8 * artifacts.failed_iteration;
  CHECK(count_lines(artifacts.trace_path) == expected_rows);
  CHECK(count_lines(artifacts.metrics_path) == artifacts.failed_iteration - 1);
}

TEST_CASE("sample csv round trip") {
  std::mt19937_64 rng(17);
  Matrix samples(7, 3);
  std::normal_distribution<double> normal;
  for (Index r = 0; r < 7; ++r)
    for (Index c = 0; c < 3; ++c) samples(r, c) = normal(rng);
  const fs::path path = fresh_dir("csv") / "samples.csv";
  write_samples_csv(path, samples);
  const Matrix back = read_samples_csv(path);
  CHECK(back.rows() == 7);
  CHECK((back - samples).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("substreams are decorrelated across purposes and counters") {
  CHECK(substream_seed(1, Purpose::init, 0) != substream_seed(1, Purpose::svgd_noise, 0));
  CHECK(substream_seed(1, Purpose::init, 0) != substream_seed(1, Purpose::init, 1));
  CHECK(substream_seed(1, Purpose::init, 0) != substream_seed(2, Purpose::init, 0));
}
