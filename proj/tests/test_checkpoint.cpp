#include <gtest/gtest.h>

#include <filesystem>
#include <regex>

#include "reynet/checkpoint.hpp"
#include "reynet/error.hpp"

using namespace reynet;

namespace {

std::vector<double> all_params(const Network& net) {
  std::vector<double> out;
  for (const auto* p : net.parameters()) {
    const auto f = p->flatten();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

Checkpoint make(ModelKind kind, Task task, Pooling pooling = Pooling::max_diag_offdiag) {
  NetworkOptions opts{{5, 3}, 2, pooling, kind == ModelKind::red_reynet};
  TrainingMeta meta{task, 17, LossKind::standard_mse, AdamConfig{}, 3, 10, 50, opts};
  return Checkpoint{Network::create(kind, task, 3, opts, 17), meta};
}

}  // namespace

TEST(Checkpoint, BitExactRoundTripForEveryKind) {
  const Checkpoint cases[] = {make(ModelKind::fnn, Task::power), make(ModelKind::reynet, Task::symmetry),
                              make(ModelKind::red_reynet, Task::diagonal), make(ModelKind::red_reynet, Task::trace),
                              make(ModelKind::reynet, Task::trace, Pooling::orbit_sum)};
  for (const auto& ck : cases) {
    const auto back = checkpoint_from_string(checkpoint_to_string(ck));
    EXPECT_EQ(back.network.kind(), ck.network.kind());
    EXPECT_EQ(back.meta, ck.meta);
    EXPECT_EQ(all_params(back.network), all_params(ck.network));
    EXPECT_EQ(back.network.input_shape(), ck.network.input_shape());
    EXPECT_EQ(back.network.output_shape(), ck.network.output_shape());
  }
}

TEST(Checkpoint, NumbersCarrySeventeenSignificantDigits) {
  auto ck = make(ModelKind::red_reynet, Task::symmetry);
  ck.network.parameters()[0]->weights[0](0, 0) = 0.1;
  const auto text = checkpoint_to_string(ck);
  EXPECT_NE(text.find("\"0.10000000000000001\""), std::string::npos);
  EXPECT_NE(text.find("\"kind\": \"red-reynet\""), std::string::npos);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto ck = make(ModelKind::red_reynet, Task::symmetry);
  const auto path = std::filesystem::temp_directory_path() / "reynet_ck_test.json";
  save_checkpoint(ck, path);
  EXPECT_EQ(all_params(load_checkpoint(path).network), all_params(ck.network));
}

TEST(Checkpoint, MalformedDocumentsAreRejected) {
  EXPECT_THROW(checkpoint_from_string("not json"), FormatError);
  EXPECT_THROW(checkpoint_from_string("{\"format\": \"other\", \"version\": 1}"), FormatError);
  auto text = checkpoint_to_string(make(ModelKind::reynet, Task::symmetry));
  text = std::regex_replace(text, std::regex("\"version\": 1"), "\"version\": 7");
  try {
    checkpoint_from_string(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::version_mismatch);
  }
  auto truncated = checkpoint_to_string(make(ModelKind::reynet, Task::symmetry));
  truncated = std::regex_replace(truncated, std::regex("\"dims\": \\[\\s*9,"), "\"dims\": [8,");
  EXPECT_THROW(checkpoint_from_string(truncated), Error);
}
