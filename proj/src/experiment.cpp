#include "reynet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "reynet/error.hpp"
#include "reynet/rng.hpp"

namespace reynet {

bool is_skipped_model(const std::string& model) { return model == "maron-skip"; }

ModelKind model_kind_for(const std::string& model) {
  if (model == "fnn") return ModelKind::fnn;
  if (model == "reynet") return ModelKind::reynet;
  if (model == "red-reynet") return ModelKind::red_reynet;
  if (is_skipped_model(model)) throw DomainError("model 'maron-skip' (Maron et al. baseline) is not implemented");
  throw DomainError("unknown model '" + model + "' (expected fnn, maron-skip, reynet or red-reynet)");
}

void validate(const RunConfig& cfg) {
  if (!is_skipped_model(cfg.model)) model_kind_for(cfg.model);
  if (cfg.loss == LossKind::corner_mse && (cfg.model == "fnn" || task_is_invariant(cfg.task)))
    throw DomainError("corner loss applies only to equivariant ReyNet runs");
  if (cfg.n_train < 2) throw DomainError("n must be >= 2");
  if (cfg.epochs < 0) throw DomainError("epochs must be >= 0");
  if (cfg.batch < 1) throw DomainError("batch must be >= 1");
  if (cfg.train_count < 1 || cfg.test_count < 1) throw DomainError("dataset counts must be >= 1");
  if (static_cast<std::size_t>(cfg.batch) > cfg.train_count)
    throw DomainError("batch (" + std::to_string(cfg.batch) + ") exceeds the training set size (" +
                      std::to_string(cfg.train_count) + ")");
  if (cfg.seeds.empty()) throw DomainError("no seeds given");
  if (cfg.log_every < 0) throw DomainError("log_every must be >= 0");
}

std::string to_csv_row(const MetricsRecord& r) {
  char mse[40];
  std::snprintf(mse, sizeof mse, "%.17g", r.mse);
  std::ostringstream ss;
  ss << r.task << ',' << r.model << ',' << r.loss << ',' << r.n_train << ',' << r.n_test << ',' << r.seed << ','
     << r.epoch << ',' << r.split << ',' << mse;
  return ss.str();
}

MetricsRecord parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
  if (f.size() != 9) throw FormatError(FormatError::Kind::malformed, "metrics row needs 9 fields: " + line);
  try {
    MetricsRecord r{f[0], f[1], f[2], std::stoi(f[3]), std::stoi(f[4]), std::stoull(f[5]), std::stoi(f[6]), f[7],
                    std::stod(f[8])};
    if (!(r.mse >= 0.0)) throw FormatError(FormatError::Kind::malformed, "metrics row has negative mse: " + line);
    return r;
  } catch (const std::logic_error&) {
    throw FormatError(FormatError::Kind::malformed, "metrics row has a bad number: " + line);
  }
}

void append_metrics(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw FormatError(FormatError::Kind::io, "cannot open " + path.string() + " for appending");
  if (fresh) out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << to_csv_row(r) << '\n';
  if (!out) throw FormatError(FormatError::Kind::io, "failed writing " + path.string());
}

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
  std::vector<MetricsRecord> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line != kMetricsHeader) throw FormatError(FormatError::Kind::malformed, path.string() + ": unexpected header");
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  return rows;
}

std::uint64_t train_data_seed(std::uint64_t seed) { return CounterRng(seed).split(1).seed(); }
std::uint64_t test_data_seed(std::uint64_t seed) { return CounterRng(seed).split(2).seed(); }

namespace {

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

double predict_mse(const Network& net, const Dataset& ds, Exec exec) {
  const Eigen::MatrixXd x = dataset_inputs(ds);
  const Eigen::MatrixXd y = dataset_targets(ds);
  constexpr Eigen::Index chunk = 100;
  double total = 0.0;
  for (Eigen::Index begin = 0; begin < x.cols(); begin += chunk) {
    const Eigen::Index len = std::min(chunk, x.cols() - begin);
    const Eigen::MatrixXd pred = net.predict(x.middleCols(begin, len), exec);
    total += (pred - y.middleCols(begin, len)).squaredNorm();
  }
  return total / static_cast<double>(y.size());
}

MetricsRecord make_record(const RunConfig& cfg, std::uint64_t seed, int n_test, int epoch, const char* split,
                          double mse) {
  return {to_string(cfg.task), cfg.model, to_string(cfg.loss), cfg.n_train, n_test, seed, epoch, split, mse};
}

}  // namespace

RunResult train_run(const RunConfig& cfg, std::uint64_t seed, const Dataset& train, const Dataset& test,
                    const EpochHook& hook) {
  validate(cfg);
  const ModelKind kind = model_kind_for(cfg.model);
  if (train.task != cfg.task || test.task != cfg.task) throw ShapeError("dataset task differs from the run's task");
  if (train.n != cfg.n_train || test.n != cfg.n_train) throw ShapeError("dataset n differs from the run's n");
  if (static_cast<std::size_t>(cfg.batch) > train.count) throw DomainError("batch exceeds the training set size");

  Network net = Network::create(kind, cfg.task, cfg.n_train, cfg.options, seed);
  auto params = net.parameters();
  std::vector<AdamState> states;
  for (const auto* p : params) states.push_back(AdamState::init(*p, cfg.adam));

  const Eigen::MatrixXd x = dataset_inputs(train);
  const Eigen::MatrixXd y = dataset_targets(train);
  std::vector<std::size_t> order(train.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng shuffle = CounterRng(seed).split(3);

  RunResult result{Checkpoint{net, TrainingMeta{cfg.task, seed, cfg.loss, cfg.adam, cfg.epochs, cfg.batch, train.count,
                                                cfg.options}},
                   {},
                   0.0,
                   0.0};
  const auto bs = static_cast<std::size_t>(cfg.batch);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += bs) {
      const std::span<const std::size_t> idx(order.data() + begin, std::min(bs, order.size() - begin));
      auto grads = net.zero_grads();
      const double l = net.loss_and_grad(take_columns(x, idx), take_columns(y, idx), cfg.loss, grads, cfg.exec);
      for (std::size_t k = 0; k < params.size(); ++k) adam_step(states[k], *params[k], grads[k]);
      epoch_loss += l * static_cast<double>(idx.size());
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw Error("training diverged at epoch " + std::to_string(epoch));
    if (hook) hook(epoch, epoch_loss);
    if (cfg.log_every > 0 && epoch % cfg.log_every == 0 && epoch != cfg.epochs) {
      result.records.push_back(make_record(cfg, seed, cfg.n_train, epoch, "train", predict_mse(net, train, cfg.exec)));
      result.records.push_back(make_record(cfg, seed, cfg.n_train, epoch, "test", predict_mse(net, test, cfg.exec)));
    }
  }
  result.train_mse = predict_mse(net, train, cfg.exec);
  result.test_mse = predict_mse(net, test, cfg.exec);
  result.records.push_back(make_record(cfg, seed, cfg.n_train, cfg.epochs, "train", result.train_mse));
  result.records.push_back(make_record(cfg, seed, cfg.n_train, cfg.epochs, "test", result.test_mse));
  result.checkpoint.network = std::move(net);
  return result;
}

RunResult train_run(const RunConfig& cfg, std::uint64_t seed, const EpochHook& hook) {
  validate(cfg);
  const Dataset train = generate(cfg.task, cfg.n_train, cfg.train_count, train_data_seed(seed));
  const Dataset test = generate(cfg.task, cfg.n_train, cfg.test_count, test_data_seed(seed));
  return train_run(cfg, seed, train, test, hook);
}

double evaluate(const Checkpoint& ck, const Dataset& ds, Exec exec) {
  if (ds.task != ck.meta.task)
    throw ShapeError("dataset task '" + to_string(ds.task) + "' differs from the checkpoint task '" +
                     to_string(ck.meta.task) + "'");
  if (ds.n == ck.network.n()) return predict_mse(ck.network, ds, exec);
  return predict_mse(ck.network.transfer(ds.n), ds, exec);
}

MetricsRecord eval_record(const Checkpoint& ck, const Dataset& ds, const std::string& split, Exec exec) {
  const double mse = evaluate(ck, ds, exec);
  const ModelKind k = ck.network.kind();
  const std::string model = k == ModelKind::fnn                                         ? "fnn"
                            : (k == ModelKind::red_reynet || k == ModelKind::inv_red_reynet) ? "red-reynet"
                                                                                         : "reynet";
  return {to_string(ck.meta.task), model, to_string(ck.meta.loss), ck.network.n(), ds.n, ck.meta.seed,
          ck.meta.epochs, split, mse};
}

std::vector<MetricsRecord> sweep(const Checkpoint& ck, int n_lo, int n_hi, std::size_t count, Exec exec) {
  if (!ck.network.reduced()) throw ShapeError("sweep needs a reduced checkpoint; this model is tied to its n");
  if (n_lo < 2 || n_hi < n_lo) throw DomainError("sweep range must satisfy 2 <= n_lo <= n_hi");
  std::vector<MetricsRecord> rows;
  for (int n = n_lo; n <= n_hi; ++n)
    rows.push_back(eval_record(ck, generate(ck.meta.task, n, count, test_data_seed(ck.meta.seed)), "test", exec));
  return rows;
}

TableSpec default_table(const std::string& which) {
  TableSpec spec;
  spec.which = which;
  spec.ns = {3, 5, 10, 20};
  if (which == "table1") {
    spec.tasks = {Task::symmetry, Task::diagonal, Task::power, Task::trace};
    spec.models = {"fnn", "reynet", "red-reynet"};
    spec.losses = {LossKind::standard_mse};
  } else if (which == "table2") {
    spec.tasks = {Task::symmetry};
    spec.models = {"red-reynet"};
    spec.losses = {LossKind::standard_mse, LossKind::corner_mse};
  } else {
    throw DomainError("unknown table '" + which + "' (expected table1 or table2)");
  }
  return spec;
}

int parallel_run_limit() {
  if (const char* env = std::getenv("REYNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void run_table(const TableSpec& spec, const std::filesystem::path& metrics_path,
               const std::filesystem::path& table_path, int workers, std::ostream* log) {
  using Key = std::tuple<std::string, std::string, std::string, int, std::uint64_t, int>;
  auto key_of = [](const MetricsRecord& r) { return Key{r.task, r.model, r.loss, r.n_train, r.seed, r.epoch}; };

  std::map<Key, double> done;
  for (const auto& r : read_metrics(metrics_path))
    if (r.split == "test" && r.n_test == r.n_train) done[key_of(r)] = r.mse;

  std::vector<std::pair<RunConfig, std::uint64_t>> jobs;
  for (const auto& model : spec.models) {
    if (is_skipped_model(model)) {
      if (log) *log << "skipping " << model << ": baseline not implemented\n";
      continue;
    }
    for (LossKind loss : spec.losses)
      for (Task task : spec.tasks)
        for (int n : spec.ns) {
          RunConfig cfg = spec.base;
          cfg.model = model;
          cfg.task = task;
          cfg.n_train = n;
          cfg.loss = loss;
          if (loss == LossKind::corner_mse && (model == "fnn" || task_is_invariant(task))) continue;
          validate(cfg);
          for (auto seed : cfg.seeds) {
            const Key k{to_string(task), model, to_string(loss), n, seed, cfg.epochs};
            if (!done.count(k)) jobs.emplace_back(cfg, seed);
          }
        }
  }
  if (log) *log << spec.which << ": " << jobs.size() << " runs to compute\n";

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        const auto& [cfg, seed] = jobs[j];
        auto res = train_run(cfg, seed);
        std::lock_guard lock(mu);
        append_metrics(metrics_path, res.records);
        for (const auto& r : res.records)
          if (r.split == "test") done[key_of(r)] = r.mse;
        if (log)
          *log << to_string(cfg.task) << " n=" << cfg.n_train << ' ' << cfg.model << ' ' << to_string(cfg.loss)
               << " seed=" << seed << " test_mse=" << res.test_mse << std::endl;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::ofstream out(table_path, std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::io, "cannot open " + table_path.string() + " for writing");
  out << "model,loss";
  for (Task task : spec.tasks)
    for (int n : spec.ns) out << ',' << to_string(task) << "_n" << n;
  out << '\n';
  for (const auto& model : spec.models) {
    if (is_skipped_model(model)) continue;
    for (LossKind loss : spec.losses) {
      out << model << ',' << to_string(loss);
      for (Task task : spec.tasks)
        for (int n : spec.ns) {
          double sum = 0.0;
          std::size_t hits = 0;
          for (auto seed : spec.base.seeds) {
            const auto it = done.find(Key{to_string(task), model, to_string(loss), n, seed, spec.base.epochs});
            if (it != done.end()) {
              sum += it->second;
              ++hits;
            }
          }
          out << ',';
          if (hits == spec.base.seeds.size()) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.6g", sum / static_cast<double>(hits));
            out << buf;
          }
        }
      out << '\n';
    }
  }
  if (!out) throw FormatError(FormatError::Kind::io, "failed writing " + table_path.string());
}

}  // namespace reynet
