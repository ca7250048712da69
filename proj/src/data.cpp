#include "reynet/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "reynet/error.hpp"
#include "reynet/rng.hpp"

namespace reynet {

static_assert(std::endian::native == std::endian::little, "REYNDATA I/O assumes a little-endian host");

std::string to_string(Task t) {
  switch (t) {
    case Task::symmetry: return "symmetry";
    case Task::diagonal: return "diagonal";
    case Task::power: return "power";
    case Task::trace: return "trace";
  }
  return "unknown";
}

Task task_from_string(const std::string& name) {
  for (auto t : {Task::symmetry, Task::diagonal, Task::power, Task::trace})
    if (to_string(t) == name) return t;
  throw DomainError("unknown task '" + name + "' (expected symmetry, diagonal, power or trace)");
}

Task task_from_id(std::uint32_t id) {
  if (id > 3) throw DomainError("unknown task id " + std::to_string(id));
  return static_cast<Task>(id);
}

TensorShape task_output_shape(Task t, int n) {
  switch (t) {
    case Task::symmetry:
    case Task::power: return {n, 2, 1};
    case Task::diagonal: return {n, 1, 1};
    case Task::trace: return {n, 0, 1};
  }
  throw DomainError("unknown task");
}

bool task_is_invariant(Task t) { return t == Task::trace; }

DenseTensor apply_task(Task t, const DenseTensor& a) {
  if (a.order() != 2 || a.channels() != 1) throw ShapeError("task input must be a square single-channel matrix");
  const auto n = static_cast<std::size_t>(a.n());
  const auto shape = task_output_shape(t, a.n());
  DenseTensor out(shape.n, shape.order, shape.channels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = a[i * n + j];
      switch (t) {
        case Task::symmetry: out[i * n + j] = 0.5 * (v + a[j * n + i]); break;
        case Task::power: out[i * n + j] = v * v; break;
        case Task::diagonal:
          if (i == j) out[i] = v;
          break;
        case Task::trace:
          if (i == j) out[0] += v;
          break;
      }
    }
  }
  return out;
}

std::size_t Dataset::output_size() const {
  const auto s = task_output_shape(task, n);
  return int_pow(s.n, s.order) * static_cast<std::size_t>(s.channels);
}

DenseTensor Dataset::input(std::size_t i) const {
  if (i >= count) throw DomainError("sample index out of range");
  const auto w = input_size();
  return DenseTensor(n, 2, 1, std::vector<double>(inputs.begin() + static_cast<std::ptrdiff_t>(i * w),
                                                  inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * w)));
}

DenseTensor Dataset::target(std::size_t i) const {
  if (i >= count) throw DomainError("sample index out of range");
  const auto s = task_output_shape(task, n);
  const auto w = output_size();
  return DenseTensor(s.n, s.order, s.channels,
                     std::vector<double>(targets.begin() + static_cast<std::ptrdiff_t>(i * w),
                                         targets.begin() + static_cast<std::ptrdiff_t>((i + 1) * w)));
}

Dataset generate(Task t, int n, std::size_t count, std::uint64_t seed) {
  if (n < 2) throw DomainError("dataset needs n >= 2");
  if (count < 1) throw DomainError("dataset needs count >= 1");
  Dataset ds{t, n, count, seed, {}, {}};
  CounterRng rng(seed);
  ds.inputs.resize(count * ds.input_size());
  for (double& v : ds.inputs) v = rng.uniform(0.0, 10.0);
  ds.targets.reserve(count * ds.output_size());
  for (std::size_t i = 0; i < count; ++i) {
    const auto y = apply_task(t, ds.input(i));
    ds.targets.insert(ds.targets.end(), y.data().begin(), y.data().end());
  }
  return ds;
}

namespace {

constexpr std::array<char, 8> kMagic{'R', 'E', 'Y', 'N', 'D', 'A', 'T', 'A'};

template <class T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  if (ds.inputs.size() != ds.count * ds.input_size() || ds.targets.size() != ds.count * ds.output_size())
    throw ShapeError("dataset arrays do not match its header fields");
  std::string buf(kMagic.begin(), kMagic.end());
  put<std::uint32_t>(buf, kDatasetVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.task));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.n));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.count));
  put<std::uint64_t>(buf, ds.seed);
  for (double v : ds.inputs) put(buf, v);
  for (double v : ds.targets) put(buf, v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::io, "cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError(FormatError::Kind::io, "failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::io, "cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), buf.begin()))
    throw FormatError(FormatError::Kind::bad_magic, path.string() + ": bad magic, not a REYNDATA file");
  if (buf.size() < kDatasetHeaderBytes)
    throw FormatError(FormatError::Kind::truncated, path.string() + ": truncated header");
  const auto version = get<std::uint32_t>(buf, 8);
  if (version != kDatasetVersion)
    throw FormatError(FormatError::Kind::version_mismatch,
                      path.string() + ": version " + std::to_string(version) + ", expected " +
                          std::to_string(kDatasetVersion));
  Dataset ds;
  const auto task_id = get<std::uint32_t>(buf, 12);
  if (task_id > 3) throw FormatError(FormatError::Kind::malformed, path.string() + ": unknown task id");
  ds.task = static_cast<Task>(task_id);
  const auto n = get<std::uint32_t>(buf, 16);
  if (n < 1 || n > 4096) throw FormatError(FormatError::Kind::malformed, path.string() + ": implausible n");
  ds.n = static_cast<int>(n);
  ds.count = get<std::uint32_t>(buf, 20);
  ds.seed = get<std::uint64_t>(buf, 24);
  const std::size_t ni = ds.count * ds.input_size();
  const std::size_t no = ds.count * ds.output_size();
  const std::size_t want = kDatasetHeaderBytes + 8 * (ni + no);
  if (buf.size() < want)
    throw FormatError(FormatError::Kind::truncated, path.string() + ": truncated payload (" +
                                                        std::to_string(buf.size()) + " of " + std::to_string(want) +
                                                        " bytes)");
  if (buf.size() > want) throw FormatError(FormatError::Kind::malformed, path.string() + ": trailing bytes");
  ds.inputs.resize(ni);
  ds.targets.resize(no);
  std::memcpy(ds.inputs.data(), buf.data() + kDatasetHeaderBytes, 8 * ni);
  std::memcpy(ds.targets.data(), buf.data() + kDatasetHeaderBytes + 8 * ni, 8 * no);
  return ds;
}

}  // namespace reynet
