#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reynet/checkpoint.hpp"
#include "reynet/data.hpp"
#include "reynet/error.hpp"
#include "reynet/experiment.hpp"
#include "reynet/kernels.hpp"
#include "reynet/verify.hpp"

namespace fs = std::filesystem;
using namespace reynet;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kTasks{"symmetry", "diagonal", "power", "trace"};
const std::vector<std::string> kModels{"fnn", "maron-skip", "reynet", "red-reynet"};

struct TrainFlags {
  std::string model = "red-reynet";
  std::string task = "symmetry";
  int n = 3;
  std::string loss = "mse";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::uint64_t seed = 0;
  int epochs = 100;
  double lr = 1e-3;
  double wd = 1e-5;
  int batch = 100;
  std::vector<int> hidden{128, 128};
  int body_channels = 8;
  std::string pooling = "max";
  bool stab_restricted = false;
  std::size_t train_count = 1000;
  std::size_t test_count = 1000;
  int log_every = 0;
  int threads = 1;
  bool serial = false;
};

void add_run_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--model", f.model, "fnn | maron-skip | reynet | red-reynet")->check(CLI::IsMember(kModels))
      ->capture_default_str();
  cmd->add_option("--task", f.task, "symmetry | diagonal | power | trace")->check(CLI::IsMember(kTasks))
      ->capture_default_str();
  cmd->add_option("--loss", f.loss, "mse | corner")->check(CLI::IsMember({"mse", "corner"}))->capture_default_str();
  cmd->add_option("--seeds", f.seeds, "Run seeds")->delimiter(',')->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--lr", f.lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--wd", f.wd, "Decoupled weight decay")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--batch", f.batch, "Minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--hidden", f.hidden, "Hidden layer widths")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--body-channels", f.body_channels, "Body output channels of invariant models")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--pooling", f.pooling, "Invariant pooling: max | sum")->check(CLI::IsMember({"max", "sum"}))
      ->capture_default_str();
  cmd->add_flag("--stab-restricted", f.stab_restricted, "Reduced components read only indices within their depth");
  cmd->add_option("--train-count", f.train_count, "Generated training samples")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--test-count", f.test_count, "Generated test samples")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--log-every", f.log_every, "Extra metrics rows every k epochs")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", f.threads, "OpenMP threads inside one run")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--serial", f.serial, "Use the per-sample reference kernels");
}

RunConfig to_config(const TrainFlags& f) {
  RunConfig cfg;
  cfg.model = f.model;
  cfg.task = task_from_string(f.task);
  cfg.n_train = f.n;
  cfg.loss = loss_kind_from_string(f.loss);
  cfg.seeds = f.seeds;
  cfg.epochs = f.epochs;
  cfg.adam.lr = f.lr;
  cfg.adam.weight_decay = f.wd;
  cfg.batch = f.batch;
  cfg.options.hidden = f.hidden;
  cfg.options.body_channels = f.body_channels;
  cfg.options.pooling = pooling_from_string(f.pooling);
  cfg.options.stab_restricted = f.stab_restricted;
  cfg.train_count = f.train_count;
  cfg.test_count = f.test_count;
  cfg.log_every = f.log_every;
  cfg.exec = f.serial ? Exec::serial : Exec::parallel;
  try {
    validate(cfg);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_rows(const std::string& out, const std::vector<MetricsRecord>& rows) {
  if (out.empty()) {
    std::cout << kMetricsHeader << '\n';
    for (const auto& r : rows) std::cout << to_csv_row(r) << '\n';
  } else {
    append_metrics(out, rows);
  }
}

// Config reader that files unqualified keys under the active verb.
class VerbConfig : public CLI::ConfigTOML {
 public:
  explicit VerbConfig(std::string verb) : verb_(std::move(verb)) {}
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigTOML::from_config(in);
    for (auto& item : items)
      if (!verb_.empty() && (item.parents.empty() || item.parents == std::vector<std::string>{"default"}))
        item.parents = {verb_};
    return items;
  }

 private:
  std::string verb_;
};

std::string active_verb(int argc, char** argv) {
  for (int i = 1; i < argc; ++i)
    if (argv[i][0] != '-') return argv[i];
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReyNet experiments: data generation, training, evaluation and property checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML file of option defaults for the chosen verb");
  app.config_formatter(std::make_shared<VerbConfig>(active_verb(argc, argv)));

  // gen
  std::string gen_task = "symmetry", gen_out;
  int gen_n = 3;
  std::size_t gen_count = 1000;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset (REYNDATA)");
  gen->add_option("--task", gen_task)->check(CLI::IsMember(kTasks))->capture_default_str();
  gen->add_option("--n", gen_n)->check(CLI::Range(2, 4096))->capture_default_str();
  gen->add_option("--count", gen_count)->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output file")->required();

  // train
  TrainFlags tf;
  std::string train_out = ".", train_metrics, train_data, test_data;
  auto* train = app.add_subcommand("train", "Train models and write checkpoints and metrics");
  add_run_flags(train, tf);
  train->add_option("--n", tf.n, "Matrix size")->check(CLI::Range(2, 4096))->capture_default_str();
  auto* seed_opt = train->add_option("--seed", tf.seed, "Single seed (overrides --seeds)");
  train->add_option("--out", train_out, "Checkpoint directory")->capture_default_str();
  train->add_option("--metrics", train_metrics, "Metrics CSV (default <out>/metrics.csv)");
  train->add_option("--train-data", train_data, "REYNDATA training set (default: generated)");
  train->add_option("--test-data", test_data, "REYNDATA test set (default: generated)");

  // eval
  std::string eval_ckpt, eval_data, eval_out, eval_split = "test";
  std::uint64_t eval_seed = 0;
  int eval_threads = 1;
  auto* eval = app.add_subcommand("eval", "Standard MSE of a checkpoint on a dataset");
  eval->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "Split label for the metrics row")->capture_default_str();
  eval->add_option("--seed", eval_seed, "Unused; accepted for a uniform interface");
  eval->add_option("--out", eval_out, "Metrics CSV to append to (default: stdout)");
  eval->add_option("--threads", eval_threads)->check(CLI::PositiveNumber);

  // sweep
  std::string sweep_ckpt, sweep_out;
  int sweep_lo = 3, sweep_hi = 20, sweep_threads = 1;
  std::size_t sweep_count = 1000;
  std::uint64_t sweep_seed = 0;
  auto* sw = app.add_subcommand("sweep", "Evaluate a reduced checkpoint across n");
  sw->add_option("--checkpoint", sweep_ckpt)->required()->check(CLI::ExistingFile);
  sw->add_option("--n-min", sweep_lo)->check(CLI::Range(2, 4096))->capture_default_str();
  sw->add_option("--n-max", sweep_hi)->check(CLI::Range(2, 4096))->capture_default_str();
  sw->add_option("--count", sweep_count, "Test samples per n")->check(CLI::PositiveNumber)->capture_default_str();
  auto* sweep_seed_opt = sw->add_option("--seed", sweep_seed, "Test data seed (default: the checkpoint seed)");
  sw->add_option("--out", sweep_out, "CSV output (default: stdout)");
  sw->add_option("--threads", sweep_threads)->check(CLI::PositiveNumber);

  // verify
  std::string verify_suite = "all", verify_out;
  int verify_max_n = 4;
  std::uint64_t verify_seed = 0;
  std::vector<std::string> suites = verify_suites();
  suites.push_back("all");
  auto* ver = app.add_subcommand("verify", "Run property suites");
  ver->add_option("--suite", verify_suite)->check(CLI::IsMember(suites))->capture_default_str();
  ver->add_option("--max-n", verify_max_n)->capture_default_str();
  ver->add_option("--seed", verify_seed)->capture_default_str();
  ver->add_option("--out", verify_out, "CSV report of gaps");

  // table
  TrainFlags tab;
  std::string table_which, table_out = ".";
  std::vector<int> table_ns;
  std::vector<std::string> table_tasks, table_models;
  auto* table = app.add_subcommand("table", "Reproduce a results table (resumable)");
  table->add_option("which", table_which, "table1 | table2")->required()->check(CLI::IsMember({"table1", "table2"}));
  add_run_flags(table, tab);
  table->add_option("--seed", tab.seed, "Accepted for a uniform interface; use --seeds");
  table->add_option("--ns", table_ns, "Matrix sizes (default 3 5 10 20)")->delimiter(',')->check(CLI::Range(2, 4096));
  table->add_option("--tasks", table_tasks, "Tasks (default: all of the table)")->delimiter(',')->check(CLI::IsMember(kTasks));
  table->add_option("--models", table_models, "Models (default: all of the table)")->delimiter(',')->check(CLI::IsMember(kModels));
  table->add_option("--out", table_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      const auto ds = generate(task_from_string(gen_task), gen_n, gen_count, gen_seed);
      save_dataset(ds, gen_out);
      std::cerr << "wrote " << gen_out << " (" << fs::file_size(gen_out) << " bytes)\n";
    } else if (*train) {
      if (*seed_opt) tf.seeds = {tf.seed};
      RunConfig cfg = to_config(tf);
      if (is_skipped_model(cfg.model)) {
        std::cerr << "skipping " << cfg.model << ": baseline not implemented\n";
        return 0;
      }
      set_kernel_threads(tf.threads);
      const fs::path out_dir = train_out;
      fs::create_directories(out_dir);
      const fs::path metrics = train_metrics.empty() ? out_dir / "metrics.csv" : fs::path(train_metrics);
      std::optional<Dataset> tr, te;
      if (!train_data.empty()) tr = load_dataset(train_data);
      if (!test_data.empty()) te = load_dataset(test_data);
      if (tr && tr->task != cfg.task) throw UsageError("training data task does not match --task");
      if (tr) cfg.n_train = tr->n;
      double sum = 0.0;
      for (auto seed : cfg.seeds) {
        const Dataset train_ds = tr ? *tr : generate(cfg.task, cfg.n_train, cfg.train_count, train_data_seed(seed));
        const Dataset test_ds = te ? *te : generate(cfg.task, cfg.n_train, cfg.test_count, test_data_seed(seed));
        if (static_cast<std::size_t>(cfg.batch) > train_ds.count)
          throw UsageError("batch exceeds the training set size");
        auto res = train_run(cfg, seed, train_ds, test_ds);
        const fs::path ck = out_dir / (cfg.model + "_" + to_string(cfg.task) + "_n" + std::to_string(cfg.n_train) +
                                       "_" + to_string(cfg.loss) + "_seed" + std::to_string(seed) + ".ckpt.json");
        save_checkpoint(res.checkpoint, ck);
        append_metrics(metrics, res.records);
        std::cout << "seed " << seed << ": train_mse=" << fmt(res.train_mse) << " test_mse=" << fmt(res.test_mse)
                  << " -> " << ck.string() << '\n';
        sum += res.test_mse;
      }
      std::cout << "mean test_mse over " << cfg.seeds.size() << " seeds: " << fmt(sum / static_cast<double>(cfg.seeds.size()))
                << '\n';
    } else if (*eval) {
      set_kernel_threads(eval_threads);
      const auto ck = load_checkpoint(eval_ckpt);
      write_rows(eval_out, {eval_record(ck, load_dataset(eval_data), eval_split)});
    } else if (*sw) {
      if (sweep_hi < sweep_lo) throw UsageError("--n-max must be >= --n-min");
      set_kernel_threads(sweep_threads);
      auto ck = load_checkpoint(sweep_ckpt);
      if (*sweep_seed_opt) ck.meta.seed = sweep_seed;
      const auto rows = sweep(ck, sweep_lo, sweep_hi, sweep_count);
      if (sweep_out.empty()) {
        write_rows("", rows);
      } else {
        std::ofstream out(sweep_out, std::ios::trunc);
        out << kMetricsHeader << '\n';
        for (const auto& r : rows) out << to_csv_row(r) << '\n';
        if (!out) throw FormatError(FormatError::Kind::io, "failed writing " + sweep_out);
      }
    } else if (*ver) {
      const int cap = verify_suite == "count" ? kCountMaxN : kVerifyMaxN;
      if (verify_max_n < 2 || verify_max_n > cap)
        throw UsageError("--max-n must lie in [2, " + std::to_string(cap) + "] for suite " + verify_suite);
      const auto report = run_verify(verify_suite, verify_max_n, verify_seed);
      print_report(std::cout, report);
      if (!verify_out.empty()) {
        std::ofstream out(verify_out, std::ios::trunc);
        write_report_csv(out, report);
        if (!out) throw FormatError(FormatError::Kind::io, "failed writing " + verify_out);
      }
      return report.pass() ? 0 : 1;
    } else if (*table) {
      TableSpec spec = default_table(table_which);
      if (!table_ns.empty()) spec.ns = table_ns;
      if (!table_tasks.empty()) {
        spec.tasks.clear();
        for (const auto& t : table_tasks) spec.tasks.push_back(task_from_string(t));
      }
      if (!table_models.empty()) spec.models = table_models;
      spec.base = to_config(tab);
      const fs::path out_dir = table_out;
      fs::create_directories(out_dir);
      run_table(spec, out_dir / (table_which + "_runs.csv"), out_dir / (table_which + ".csv"), parallel_run_limit(),
                &std::cerr);
      std::cout << "wrote " << (out_dir / (table_which + ".csv")).string() << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
