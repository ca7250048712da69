#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reynet/checkpoint.hpp"
#include "reynet/data.hpp"
#include "reynet/kernels.hpp"
#include "reynet/network.hpp"

namespace reynet {

struct RunConfig {
  std::string model = "red-reynet";  ///< fnn | maron-skip | reynet | red-reynet
  Task task = Task::symmetry;
  int n_train = 3;
  LossKind loss = LossKind::standard_mse;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int epochs = 100;
  AdamConfig adam;
  int batch = 100;
  NetworkOptions options;
  std::size_t train_count = 1000;
  std::size_t test_count = 1000;
  /// Write a train/test row every `log_every` epochs (0: final epoch only).
  int log_every = 0;
  Exec exec = Exec::parallel;
};

/// True for the Maron et al. baseline, which is not implemented; such runs are skipped.
bool is_skipped_model(const std::string& model);
ModelKind model_kind_for(const std::string& model);
/// Checks model name, loss/model compatibility and positive sizes.
void validate(const RunConfig& cfg);

struct MetricsRecord {
  std::string task;
  std::string model;
  std::string loss;
  int n_train = 0;
  int n_test = 0;
  std::uint64_t seed = 0;
  int epoch = 0;
  std::string split;
  double mse = 0.0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline constexpr const char* kMetricsHeader = "task,model,loss,n_train,n_test,seed,epoch,split,mse";

std::string to_csv_row(const MetricsRecord& r);
MetricsRecord parse_csv_row(const std::string& line);
/// Appends rows, writing the header first when the file is new or empty.
void append_metrics(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows);
/// Rows of an existing metrics file; empty if the file does not exist.
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

/// Data seeds of run seed s: training set CounterRng(s).split(1), test set split(2).
std::uint64_t train_data_seed(std::uint64_t seed);
std::uint64_t test_data_seed(std::uint64_t seed);

struct RunResult {
  Checkpoint checkpoint;
  std::vector<MetricsRecord> records;
  double train_mse = 0.0;
  double test_mse = 0.0;
};

/// Optional per-epoch hook: (epoch, mean training loss).
using EpochHook = std::function<void(int, double)>;

/// Trains one seed with Adam on shuffled minibatches. Reported MSE is always
/// the full standard MSE, whatever the training loss.
RunResult train_run(const RunConfig& cfg, std::uint64_t seed, const Dataset& train, const Dataset& test,
                    const EpochHook& hook = {});

/// Generates the datasets from the seed and trains.
RunResult train_run(const RunConfig& cfg, std::uint64_t seed, const EpochHook& hook = {});

/// Standard MSE of a checkpoint on a dataset; reduced models are transferred to the dataset's n.
double evaluate(const Checkpoint& ck, const Dataset& ds, Exec exec = Exec::parallel);
MetricsRecord eval_record(const Checkpoint& ck, const Dataset& ds, const std::string& split, Exec exec = Exec::parallel);

/// One test row per n in [n_lo, n_hi], ascending. Test data for each n from test_data_seed(checkpoint seed).
std::vector<MetricsRecord> sweep(const Checkpoint& ck, int n_lo, int n_hi, std::size_t count = 1000,
                                 Exec exec = Exec::parallel);

struct TableSpec {
  std::string which = "table1";
  std::vector<Task> tasks;
  std::vector<int> ns;
  std::vector<std::string> models;
  std::vector<LossKind> losses;
  RunConfig base;
};

/// Grid defaults: table1 = {symmetry, diagonal, power, trace} x n {3,5,10,20} x
/// {fnn, maron-skip, reynet, red-reynet}; table2 = symmetry x n {3,5,10,20} x
/// red-reynet x {mse, corner}.
TableSpec default_table(const std::string& which);

/// Runs every missing (cell, seed) with up to `workers` concurrent runs,
/// appending rows to `metrics_path`, then writes the table of mean test MSE
/// per cell to `table_path`. Rows already in the metrics file are reused.
void run_table(const TableSpec& spec, const std::filesystem::path& metrics_path,
               const std::filesystem::path& table_path, int workers, std::ostream* log = nullptr);

/// REYNET_THREADS if set and positive, else the hardware concurrency.
int parallel_run_limit();

}  // namespace reynet
