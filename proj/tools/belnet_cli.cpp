// Command-line front end: dataset generation, training, evaluation,
// experiment reproduction and the gradient/theory batteries.
//
// Exit codes: 0 success, 1 a checked battery or strict-mode gate failed,
// 2 usage or configuration error, 3 runtime failure.

#include "belnet/checkpoint.hpp"
#include "belnet/dataset_io.hpp"
#include "belnet/experiments.hpp"
#include "belnet/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOpts {
  std::string experiment = "burgers";
  std::string scale = "desk";
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--experiment", opts.experiment,
                  "burgers | don_contrast | elliptic1d | elliptic2d_onefast | "
                  "elliptic2d_multiscale | theory_battery | grad_check");
  cmd->add_option("--scale", opts.scale, "desk | paper");
  cmd->add_option("--config", opts.config_file,
                  "key=value (or .json) config file; overrides the preset");
  cmd->add_option("--set", opts.overrides,
                  "extra key=value overrides, applied last")
      ->expected(-1);
  cmd->add_option("--seed", opts.seed, "master seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
}

belnet::exp::ExperimentConfig resolve_config(const CommonOpts& opts) {
  namespace exp = belnet::exp;
  // A config file wins over --experiment/--scale; --set and --seed win over
  // both.
  exp::ExperimentConfig cfg = opts.config_file.empty()
                                  ? exp::preset(opts.experiment, opts.scale)
                                  : exp::load_config_file(opts.config_file);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got " + kv);
    exp::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discretization-invariant operator learning toolkit"};
  app.require_subcommand(1);

  CommonOpts gen_opts, train_opts, repro_opts;
  std::string gen_out = "dataset";
  std::string train_data, train_test, train_ckpt = "model";
  std::string eval_ckpt, eval_data;
  std::string repro_outdir;
  int repro_workers = 0;
  bool repro_audit = false, repro_strict = false;
  std::uint64_t gc_seed = 2024, th_seed = 2024;
  int gc_cases = 300;
  bool gc_fault = false;

  auto* gen = app.add_subcommand("gen-data", "Generate a dataset container");
  add_common(gen, gen_opts);
  gen->add_option("--out", gen_out, "output path base");

  auto* train = app.add_subcommand("train", "Train one model on a dataset");
  add_common(train, train_opts);
  train->add_option("--data", train_data, "training dataset path base")
      ->required();
  train->add_option("--test", train_test, "evaluation dataset path base");
  train->add_option("--checkpoint", train_ckpt, "checkpoint output path base");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path base")
      ->required();
  eval->add_option("--data", eval_data, "dataset path base")->required();

  auto* repro = app.add_subcommand("reproduce", "Run a full experiment");
  add_common(repro, repro_opts);
  repro->add_option("--output-dir", repro_outdir, "artifact directory");
  repro->add_option("--workers", repro_workers, "ensemble/repeat parallelism");
  repro->add_flag("--audit", repro_audit,
                  "force sequential, bit-reproducible execution");
  repro->add_flag("--strict", repro_strict,
                  "exit 1 if the experiment's acceptance band is missed");

  auto* gc = app.add_subcommand("grad-check", "Finite-difference battery");
  gc->add_option("--seed", gc_seed, "battery seed");
  gc->add_option("--cases", gc_cases, "number of seeded cases");
  gc->add_flag("--inject-fault", gc_fault,
               "corrupt one gradient as a checker self-test");

  auto* th = app.add_subcommand("theory-check", "Reconstruction-theory battery");
  th->add_option("--seed", th_seed, "battery seed");

  CLI11_PARSE(app, argc, argv);

  namespace exp = belnet::exp;
  try {
    if (gen->parsed()) {
      const auto cfg = resolve_config(gen_opts);
      std::cout << exp::cmd_gen_data(cfg, gen_out).dump(2) << "\n";
      return 0;
    }

    if (train->parsed()) {
      const auto cfg = resolve_config(train_opts);
      const auto data = belnet::io::read_dataset(train_data);
      belnet::train::TrainConfig tc = cfg.train_cfg;
      tc.seed = cfg.seed;
      auto model = belnet::train::make_model(tc, data, cfg.seed);
      const auto trace = belnet::train::train(model, data, tc, cfg.seed);
      belnet::ops::save_checkpoint(
          model, tc.activation,
          tc.construction_activation.value_or(tc.activation), train_ckpt);

      nlohmann::json out;
      out["final_loss"] = trace.per_step.back();
      std::vector<double> sampled;
      const std::size_t stride =
          std::max<std::size_t>(1, trace.per_step.size() / 20);
      for (std::size_t i = 0; i < trace.per_step.size(); i += stride)
        sampled.push_back(trace.per_step[i]);
      out["loss_trace"] = sampled;
      out["param_count"] = model.param_count();
      out["checkpoint"] = train_ckpt;
      if (!train_test.empty()) {
        const auto test = belnet::io::read_dataset(train_test);
        out["test_relative_error"] =
            belnet::train::relative_error(model, test).mean;
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (eval->parsed()) {
      const auto model = belnet::ops::load_checkpoint(eval_ckpt);
      const auto data = belnet::io::read_dataset(eval_data);
      const auto rep = belnet::train::relative_error(model, data);
      nlohmann::json out;
      out["mean_relative_error"] = rep.mean;
      out["per_instance"] = rep.per_instance;
      out["skipped_instances"] = rep.skipped;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (repro->parsed()) {
      auto cfg = resolve_config(repro_opts);
      if (!repro_outdir.empty()) cfg.output_dir = repro_outdir;
      if (repro_workers > 0) cfg.workers = repro_workers;
      cfg.train_cfg.workers = cfg.workers;
      cfg.train_cfg.audit = repro_audit;
      cfg.strict = repro_strict;
      const auto report = exp::reproduce(cfg);
      std::cout << report.dump(2) << "\n";
      if (cfg.strict && report.contains("pass") &&
          !report["pass"].get<bool>())
        return 1;
      return 0;
    }

    if (gc->parsed()) {
      const auto report = exp::grad_check(gc_seed, gc_cases, gc_fault);
      std::cout << report.dump(2) << "\n";
      return report["pass"].get<bool>() ? 0 : 1;
    }

    if (th->parsed()) {
      const auto report = belnet::theory::run_theory_battery(th_seed);
      std::cout << report.dump(2) << "\n";
      return report["all_pass"].get<bool>() ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
