#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reynet/dense_tensor.hpp"
#include "reynet/reynolds.hpp"

namespace reynet {

/// Synthetic tasks on n x n matrices. The numeric values are the REYNDATA task ids.
enum class Task : std::uint32_t { symmetry = 0, diagonal = 1, power = 2, trace = 3 };

std::string to_string(Task t);
Task task_from_string(const std::string& name);
Task task_from_id(std::uint32_t id);

/// Output shape: symmetry and power give n x n, diagonal gives n, trace a scalar.
TensorShape task_output_shape(Task t, int n);
bool task_is_invariant(Task t);

/// ½(A+Aᵀ), diag(A), [A_ij²] or tr(A) of a square single-channel matrix.
DenseTensor apply_task(Task t, const DenseTensor& a);

struct Dataset {
  Task task = Task::symmetry;
  int n = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::vector<double> inputs;   ///< count * n², sample-major, each sample row-major
  std::vector<double> targets;  ///< count * output size

  std::size_t input_size() const noexcept { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  std::size_t output_size() const;
  DenseTensor input(std::size_t i) const;
  DenseTensor target(std::size_t i) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Entries drawn in order from CounterRng(seed): sample by sample, row-major,
/// each uniform on [0, 10]. Targets from apply_task.
Dataset generate(Task t, int n, std::size_t count, std::uint64_t seed);

inline constexpr std::size_t kDatasetHeaderBytes = 32;
inline constexpr std::uint32_t kDatasetVersion = 1;

/// REYNDATA: "REYNDATA" | u32 version | u32 task | u32 n | u32 count | u64 seed |
/// inputs f64 | targets f64, all little-endian.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace reynet
