#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stein/diagnostics.hpp"
#include "stein/harness.hpp"
#include "stein/io.hpp"
#include "stein/rng.hpp"

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Target specs on the command line are inline JSON, or @file to read one.
nlohmann::json parse_target_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '@') return nlohmann::json::parse(slurp(arg.substr(1)));
  return nlohmann::json::parse(arg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein variational samplers (SVGD/SVN and stochastic variants)"};
  app.require_subcommand(1);

  // run
  std::string run_config_path, run_out_dir;
  std::int64_t run_seed = -1;
  int run_threads = 1;
  auto* cmd_run = app.add_subcommand("run", "execute a sampling run from a config file");
  cmd_run->add_option("--config", run_config_path, "JSON config file")->required();
  cmd_run->add_option("--out", run_out_dir, "output directory")->required();
  cmd_run->add_option("--seed", run_seed, "override the config seed");
  cmd_run->add_option("--threads", run_threads, "dense-algebra thread count");

  // ground-truth
  std::string gt_target, gt_out;
  std::int64_t gt_count = 0;
  std::uint64_t gt_seed = 0;
  auto* cmd_gt = app.add_subcommand("ground-truth", "draw exact i.i.d. samples from a target");
  cmd_gt->add_option("--target", gt_target, "target spec (inline JSON or @file)")->required();
  cmd_gt->add_option("--count", gt_count, "number of samples")->required();
  cmd_gt->add_option("--out", gt_out, "output CSV file")->required();
  cmd_gt->add_option("--seed", gt_seed, "random seed")->required();

  // mmd
  std::string mmd_x, mmd_y, mmd_bandwidth = "auto";
  auto* cmd_mmd = app.add_subcommand("mmd", "squared MMD between two sample files");
  cmd_mmd->add_option("--x", mmd_x, "first sample CSV")->required();
  cmd_mmd->add_option("--y", mmd_y, "second sample CSV")->required();
  cmd_mmd->add_option("--bandwidth", mmd_bandwidth, "kernel bandwidth or 'auto'");

  // pp
  std::string pp_samples, pp_truth, pp_out;
  auto* cmd_pp = app.add_subcommand("pp", "probability-probability curve data");
  cmd_pp->add_option("--samples", pp_samples, "sample CSV")->required();
  cmd_pp->add_option("--truth", pp_truth, "ground-truth CSV")->required();
  cmd_pp->add_option("--out", pp_out, "output CSV (dimension,p,q)")->required();

  // moments
  std::string moments_samples;
  auto* cmd_moments = app.add_subcommand("moments", "per-dimension mean and variance");
  cmd_moments->add_option("--samples", moments_samples, "sample CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      Eigen::setNbThreads(run_threads);
      stein::SamplerConfig config = stein::parse_config(slurp(run_config_path));
      if (run_seed >= 0) config.seed = static_cast<std::uint64_t>(run_seed);
      const stein::RunArtifacts artifacts = stein::run(config, run_out_dir);
      std::cout << "status: " << (artifacts.completed ? "completed" : "failed") << "\n"
                << "meta:   " << artifacts.meta_path.string() << std::endl;
      if (!artifacts.completed) {
        std::cerr << "error at iteration " << artifacts.failed_iteration << ": "
                  << artifacts.error << std::endl;
        return 1;
      }
    } else if (*cmd_gt) {
      const stein::TargetModel target = stein::make_target(parse_target_arg(gt_target));
      if (!target.has_ground_truth())
        throw std::runtime_error("target has no ground-truth sampler");
      auto rng = stein::make_substream(gt_seed, stein::Purpose::ground_truth, 0);
      stein::write_samples_csv(gt_out, target.ground_truth_sampler(gt_count, rng));
      std::cout << "wrote " << gt_count << " samples to " << gt_out << std::endl;
    } else if (*cmd_mmd) {
      const stein::Matrix x = stein::read_samples_csv(mmd_x);
      const stein::Matrix y = stein::read_samples_csv(mmd_y);
      const double value =
          mmd_bandwidth == "auto" ? stein::mmd(x, y) : stein::mmd(x, y, std::stod(mmd_bandwidth));
      std::cout << stein::format_double(value) << std::endl;
    } else if (*cmd_pp) {
      const stein::PpCurve curve =
          stein::pp_curve(stein::read_samples_csv(pp_samples), stein::read_samples_csv(pp_truth));
      stein::write_pp_csv(pp_out, curve);
      std::cout << "wrote " << pp_out << std::endl;
    } else if (*cmd_moments) {
      const stein::Matrix samples = stein::read_samples_csv(moments_samples);
      const stein::Moments m = stein::ensemble_moments(samples);
      std::cout << "dim,mean,variance\n";
      for (stein::Index i = 0; i < m.mean.size(); ++i)
        std::cout << (i + 1) << ',' << stein::format_double(m.mean(i)) << ','
                  << stein::format_double(m.variance(i)) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
