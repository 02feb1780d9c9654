// sparsim: run and compare gradient-sparsification strategies on synthetic
// data-parallel SGD workloads, emitting per-iteration metrics as CSV/JSON.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include "sparsim/harness.hpp"
#include "sparsim/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace sparsim;

struct ExperimentSpec {
  RunConfig base;
  std::vector<SparsifierKind> kinds;  // one entry: single run; several: compare
  std::filesystem::path out;          // empty: no file output
  RecordFormat format = RecordFormat::csv;
  bool parallel = false;
};

std::filesystem::path run_output_path(const std::filesystem::path& out, SparsifierKind kind,
                                      bool compare) {
  if (!compare) return out;
  std::filesystem::path p = out;
  const std::string stem = p.stem().string();
  const std::string ext = p.extension().string();
  p.replace_filename(stem + "_" + std::string(to_string(kind)) + ext);
  return p;
}

void print_run_summary(const RunResult& result) {
  const auto& c = result.config;
  const auto& s = result.summary;
  std::printf("sparsifier=%s task=%s workers=%d density=%g iters=%lld seed=%llu\n",
              std::string(to_string(c.sparsifier.kind)).c_str(),
              std::string(to_string(c.task)).c_str(), c.workers, c.sparsifier.density,
              static_cast<long long>(c.iterations), static_cast<unsigned long long>(c.seed));
  std::printf("final_loss=%.10g\n", s.final_loss);
  std::printf("mean_actual_density=%.10g\n", s.mean_actual_density);
  std::printf("mean_buildup_factor=%.10g\n", s.mean_buildup_factor);
  std::printf("mean_redundant_traffic_factor=%.10g\n", s.mean_redundant_traffic);
  if (s.threshold_error_scaling)
    std::printf("threshold_error_scaling=%.10g\n", *s.threshold_error_scaling);
  else
    std::printf("threshold_error_scaling=none\n");
  const double total = s.time_grad + s.time_select + s.time_comm + s.time_overhead;
  std::printf("modeled_time_s=%.6g (grad=%.6g select=%.6g comm=%.6g overhead=%.6g)\n", total,
              s.time_grad, s.time_select, s.time_comm, s.time_overhead);
}

int run_single(const ExperimentSpec& spec) {
  RunConfig config = spec.base;
  config.sparsifier.kind = spec.kinds.front();
  const RunResult result = run_experiment(config);
  print_run_summary(result);
  if (!spec.out.empty()) {
    emit(result.config, result.records, spec.format, spec.out);
    std::printf("wrote %s\n", spec.out.string().c_str());
  }
  return 0;
}

int run_compare(const ExperimentSpec& spec) {
  struct Row {
    SparsifierKind kind;
    RunResult result;
  };

  auto one = [&spec](SparsifierKind kind) {
    RunConfig config = spec.base;
    config.sparsifier.kind = kind;
    return run_experiment(config);
  };

  std::vector<Row> rows;
  rows.reserve(spec.kinds.size());
  if (spec.parallel) {
    std::vector<std::future<RunResult>> futures;
    futures.reserve(spec.kinds.size());
    for (auto kind : spec.kinds)
      futures.push_back(std::async(std::launch::async, one, kind));
    for (std::size_t i = 0; i < spec.kinds.size(); ++i) {
      try {
        rows.push_back({spec.kinds[i], futures[i].get()});
      } catch (const std::exception& e) {
        throw std::runtime_error("run '" + std::string(to_string(spec.kinds[i])) +
                                 "' failed: " + e.what());
      }
    }
  } else {
    for (auto kind : spec.kinds) {
      try {
        rows.push_back({kind, one(kind)});
      } catch (const std::exception& e) {
        throw std::runtime_error("run '" + std::string(to_string(kind)) + "' failed: " + e.what());
      }
    }
  }

  std::printf("%-8s %14s %14s %16s %14s\n", "strategy", "final_loss", "mean_density",
              "mean_redundant", "modeled_time_s");
  for (const auto& row : rows) {
    const auto& s = row.result.summary;
    const double total = s.time_grad + s.time_select + s.time_comm + s.time_overhead;
    std::printf("%-8s %14.6g %14.6g %16.6g %14.6g\n",
                std::string(to_string(row.kind)).c_str(), s.final_loss, s.mean_actual_density,
                s.mean_redundant_traffic, total);
  }
  if (!spec.out.empty()) {
    for (const auto& row : rows) {
      const auto path = run_output_path(spec.out, row.kind, true);
      emit(row.result.config, row.result.records, spec.format, path);
      std::printf("wrote %s\n", path.string().c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sparsim: gradient sparsification simulator for synchronous data-parallel SGD.\n"
      "Runs one strategy (--sparsifier) or compares several on the same seed\n"
      "(--sparsifiers a,b,...)."};
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");

  RunConfig base;
  std::string sparsifier = "micro";
  std::vector<std::string> sparsifiers;
  std::string task = "quadratic";
  std::string per_worker_k = "split";
  std::string format = "csv";
  std::string out;
  bool parallel = false;
  bool no_error_feedback = false;
  std::int64_t dim = 0, samples = 0, batch = 8, iters = 200, decay_at = -1;

  const auto positive_real = [](const std::string& flag) {
    return CLI::Validator(
        [flag](std::string& value) -> std::string {
          const double v = std::stod(value);
          if (!(v > 0.0)) return flag + ": value must be positive, got " + value;
          return {};
        },
        "POSITIVE");
  };

  app.add_option("--sparsifier", sparsifier,
                 "strategy for a single run: micro|topk|cltk|hard|dense")
      ->check(CLI::IsMember({"micro", "topk", "cltk", "hard", "dense"}))
      ->capture_default_str();
  auto* multi =
      app.add_option("--sparsifiers", sparsifiers,
                     "comma-separated strategies to compare on one seed (at least two)")
          ->delimiter(',');
  app.add_option("--workers", base.workers, "worker count n")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  app.add_option("--density", base.sparsifier.density, "target density d in (0, 1]")
      ->check(CLI::Validator(
          [](std::string& value) -> std::string {
            const double d = std::stod(value);
            if (!(d > 0.0 && d <= 1.0))
              return "--density: value must lie in (0, 1], got " + value;
            return {};
          },
          "DENSITY"))
      ->capture_default_str();
  app.add_option("--iters", iters, "iterations to run")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40))
      ->capture_default_str();
  app.add_option("--task", task, "training task: quadratic|logreg|mlp2")
      ->check(CLI::IsMember({"quadratic", "logreg", "mlp2"}))
      ->capture_default_str();
  app.add_option("--dim", dim, "gradient count n_g (0: task default)")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 40));
  app.add_option("--samples", samples, "dataset size (0: task default)")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 40));
  app.add_option("--batch", batch, "per-worker mini-batch size")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 30))
      ->capture_default_str();
  app.add_option("--seed", base.seed, "run seed")
      ->envname("SPARSIM_SEED")
      ->capture_default_str();
  app.add_option("--delta0", base.sparsifier.initial_threshold,
                 "initial threshold (and the fixed hard threshold)")
      ->check(CLI::Validator(
          [](std::string& value) -> std::string {
            if (!(std::stod(value) >= 0.0))
              return "--delta0: value must be nonnegative, got " + value;
            return {};
          },
          "NONNEG"))
      ->capture_default_str();
  app.add_option("--alpha", base.sparsifier.scaling_factor,
                 "micro threshold scaling factor in (0, 1)")
      ->check(CLI::Validator(
          [](std::string& value) -> std::string {
            const double a = std::stod(value);
            if (!(a > 0.0 && a < 1.0)) return "--alpha: value must lie in (0, 1), got " + value;
            return {};
          },
          "ALPHA"))
      ->capture_default_str();
  app.add_option("--eps-delta", base.sparsifier.min_threshold,
                 "minimum positive threshold used to escape delta=0")
      ->check(positive_real("--eps-delta"))
      ->capture_default_str();
  app.add_option("--lr", base.lr.initial, "initial learning rate")
      ->check(positive_real("--lr"))
      ->capture_default_str();
  app.add_option("--decay-at", decay_at, "iteration of the lr step decay (-1: 3/4 of the run)")
      ->capture_default_str();
  app.add_option("--decay-factor", base.lr.decay_factor, "lr multiplier applied at decay")
      ->check(positive_real("--decay-factor"))
      ->capture_default_str();
  app.add_option("--per-worker-k", per_worker_k,
                 "micro per-worker target: split (d*n_g/n) or full (d*n_g)")
      ->check(CLI::IsMember({"split", "full"}))
      ->capture_default_str();
  app.add_option("--out", out, "output file for per-iteration records");
  app.add_option("--format", format, "output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--parallel", parallel, "run compare experiments concurrently");
  app.add_flag("--no-error-feedback", no_error_feedback,
               "discard residuals instead of accumulating them (ablation)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ExperimentSpec spec;
    spec.base = base;
    spec.base.iterations = iters;
    spec.base.batch_size = batch;
    spec.base.dimension = dim;
    spec.base.samples = samples;
    spec.base.lr.decay_at = decay_at;
    spec.base.task = parse_task_kind(task);
    spec.base.sparsifier.target = parse_per_worker_target(per_worker_k);
    spec.base.error_feedback = !no_error_feedback;
    spec.out = out;
    spec.format = parse_record_format(format);
    spec.parallel = parallel;

    if (multi->count() > 0) {
      if (sparsifiers.size() < 2) {
        std::cerr << "--sparsifiers: compare needs at least two strategies\n";
        return 1;
      }
      for (const auto& name : sparsifiers) spec.kinds.push_back(parse_sparsifier_kind(name));
      return run_compare(spec);
    }
    spec.kinds.push_back(parse_sparsifier_kind(sparsifier));
    return run_single(spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
