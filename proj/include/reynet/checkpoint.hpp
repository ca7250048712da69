#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "reynet/data.hpp"
#include "reynet/mlp.hpp"
#include "reynet/network.hpp"

namespace reynet {

struct TrainingMeta {
  Task task = Task::symmetry;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::standard_mse;
  AdamConfig adam;
  int epochs = 0;
  int batch = 100;
  std::size_t n_train = 0;
  NetworkOptions options;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct Checkpoint {
  Network network;
  TrainingMeta meta;
};

/// JSON document: model kind, shapes, reduced coordinates, pooling,
/// hyperparameters, seed and one {dims, values} entry per MLP. Values are
/// decimal strings with 17 significant digits, so a reload is bit-exact.
std::string checkpoint_to_string(const Checkpoint& ck);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace reynet
