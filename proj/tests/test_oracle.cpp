#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "hdc/oracle.hpp"
#include "hdc/problems.hpp"

using namespace hdc;
namespace fs = std::filesystem;

namespace {

std::vector<double> tenths(int n) {
  std::vector<double> ts;
  for (int j = 0; j <= n; ++j) ts.push_back(0.1 * j);
  return ts;
}

OdeProblem zero_problem() {
  OdeProblem p;
  p.name = "zero";
  p.tag = "zero";
  p.dim = 2;
  p.t_end = 1.0;
  p.initial = {0.5, -1.5};
  p.rhs = [](double, std::span<const double>, std::span<double> du) { du[0] = du[1] = 0.0; };
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hdc_oracle_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ReferenceTrajectory sample_reference() {
  ReferenceTrajectory ref;
  ref.problem_id = "demo-0123456789abcdef";
  ref.sample_times = {0.0, 0.1, 1.0 / 3.0};
  ref.states = {{1.0, -0.0}, {std::nextafter(1.0, 2.0), 1e-310}, {-3.25e200, 0.1}};
  ref.agreement = 1.2345678901234567e-13;
  ref.generator = StepperKind::Rk6;
  ref.n_steps_finest = 123456789;
  ref.agreement_history = {1e-3, 2e-8, ref.agreement};
  return ref;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(ReferenceTrajectory, ZeroRhsConvergesAtFirstDoubling) {
  const auto ts = tenths(10);
  const auto ref = reference_trajectory(zero_problem(), ts, 1e-12, StepperKind::Dc6Rk24, 10);
  EXPECT_EQ(ref.agreement, 0.0);
  EXPECT_EQ(ref.agreement_history.size(), 1u);
  EXPECT_EQ(ref.n_steps_finest, 20u);
  for (const auto& s : ref.states) EXPECT_EQ(s, (State{0.5, -1.5}));
}

TEST(ReferenceTrajectory, AgreesWithExactSolution) {
  // lambda = 1: at lambda = 10 the solution reaches e^10 and an absolute
  // tolerance of 1e-12 is below double resolution.
  const auto p = oscillatory(1.0, 10.0);
  const auto ts = tenths(100);
  const double tol = 1e-12;
  const auto ref = reference_trajectory(p, ts, tol, StepperKind::Dc6Rk24, 1000);
  EXPECT_LE(ref.agreement, tol);
  for (std::size_t i = 0; i < ts.size(); ++i)
    EXPECT_LE(std::abs(ref.states[i][0] - p.exact_at(ts[i])[0]), 10 * tol) << ts[i];
}

TEST(ReferenceTrajectory, AgreementsShrinkAtSixthOrder) {
  const auto p = bernoulli();
  const auto ref = reference_trajectory(p, tenths(100), 5e-12, StepperKind::Dc6Rk24, 100000);
  const auto& h = ref.agreement_history;
  ASSERT_GE(h.size(), 3u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(h[i - 1] / h[i], 32.0) << i;
}

TEST(ReferenceTrajectory, DivergedStartIsReported) {
  try {
    reference_trajectory(bernoulli(), tenths(100), 1e-10, StepperKind::Dc6Rk24, 100);
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::Diverged);
  }
}

TEST(ReferenceTrajectory, BudgetExhaustion) {
  try {
    reference_trajectory(bernoulli(), tenths(100), 1e-14, StepperKind::Dc6Rk24, 10000, 100000);
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::BudgetExhausted);
    EXPECT_TRUE(std::isfinite(e.best_agreement()));
  }
}

TEST(ReferenceTrajectory, RejectsOffGridSamples) {
  const std::vector<double> ts = {0.0, 0.123456};
  EXPECT_THROW(reference_trajectory(zero_problem(), ts, 1e-12, StepperKind::Rk4, 10), std::invalid_argument);
  EXPECT_THROW(reference_trajectory(zero_problem(), tenths(10), 0.0, StepperKind::Rk4, 10), std::invalid_argument);
}

TEST(ReferenceTrajectory, AlignedLookup) {
  const auto ref = reference_trajectory(zero_problem(), tenths(10), 1e-12, StepperKind::Rk4, 10);
  ASSERT_NE(ref.state_at(0.3), nullptr);
  EXPECT_EQ(ref.state_at(0.35), nullptr);
  TrajectoryRun run;
  run.sample_times = {0.0, 0.5, 1.0};
  EXPECT_EQ(ref.aligned_with(run).size(), 3u);
  run.sample_times = {0.25};
  EXPECT_THROW(ref.aligned_with(run), std::invalid_argument);
}

TEST(Cache, RoundTripIsBitExact) {
  const auto dir = fresh_dir("roundtrip");
  const auto ref = sample_reference();
  cache_store(ref, dir);
  const auto back = cache_load(ref.problem_id, dir);
  ASSERT_TRUE(back);
  EXPECT_EQ(back->problem_id, ref.problem_id);
  EXPECT_EQ(back->generator, ref.generator);
  EXPECT_EQ(back->n_steps_finest, ref.n_steps_finest);
  EXPECT_TRUE(bit_equal(back->agreement, ref.agreement));
  ASSERT_EQ(back->agreement_history.size(), ref.agreement_history.size());
  for (std::size_t i = 0; i < ref.agreement_history.size(); ++i)
    EXPECT_TRUE(bit_equal(back->agreement_history[i], ref.agreement_history[i]));
  ASSERT_EQ(back->sample_times.size(), ref.sample_times.size());
  for (std::size_t i = 0; i < ref.sample_times.size(); ++i) {
    EXPECT_TRUE(bit_equal(back->sample_times[i], ref.sample_times[i]));
    for (std::size_t c = 0; c < 2; ++c) EXPECT_TRUE(bit_equal(back->states[i][c], ref.states[i][c]));
  }
  fs::remove_all(dir);
}

TEST(Cache, FileLayout) {
  const auto bytes = encode_reference(sample_reference());
  ASSERT_GT(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "HDC1");
  std::uint64_t dim = 0, count = 0, sum = 0;
  std::memcpy(&dim, bytes.data() + 4, 8);
  std::memcpy(&count, bytes.data() + 12, 8);
  std::memcpy(&sum, bytes.data() + bytes.size() - 8, 8);
  EXPECT_EQ(dim, 2u);
  EXPECT_EQ(count, 3u);
  EXPECT_EQ(sum, fnv1a64(std::span(bytes).first(bytes.size() - 8)));
  const std::string abc = "a";
  EXPECT_EQ(fnv1a64(std::span(reinterpret_cast<const unsigned char*>(abc.data()), 1)), 0xaf63dc4c8601ec8cULL);
}

TEST(Cache, WrongIdIsMiss) {
  const auto dir = fresh_dir("wrongid");
  const auto ref = sample_reference();
  cache_store(ref, dir);
  EXPECT_FALSE(cache_load("demo-ffffffffffffffff", dir));
  // Same bytes under another file name: the embedded id does not match.
  fs::copy_file(cache_path(ref.problem_id, dir), cache_path("other-id", dir));
  EXPECT_FALSE(cache_load("other-id", dir));
  fs::remove_all(dir);
}

TEST(Cache, FlippedByteIsMiss) {
  const auto dir = fresh_dir("corrupt");
  const auto ref = sample_reference();
  cache_store(ref, dir);
  const auto path = cache_path(ref.problem_id, dir);
  const auto size = fs::file_size(path);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    cache_store(ref, dir);
    const auto pos = static_cast<std::streamoff>(rng() % size);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(pos);
    const char c = static_cast<char>(f.get());
    f.seekp(pos);
    f.put(static_cast<char>(c ^ 0x10));
    f.close();
    EXPECT_FALSE(cache_load(ref.problem_id, dir)) << "byte " << pos;
  }
  // Truncation is a miss as well.
  cache_store(ref, dir);
  fs::resize_file(path, size - 3);
  EXPECT_FALSE(cache_load(ref.problem_id, dir));
  fs::remove_all(dir);
}

TEST(Cache, UnwritableDirectoryReportsPath) {
  const auto blocker = fs::temp_directory_path() / "hdc_oracle_blocker";
  fs::remove_all(blocker);
  std::ofstream(blocker) << "x";
  try {
    cache_store(sample_reference(), blocker / "sub");
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("hdc_oracle_blocker"), std::string::npos);
  }
  fs::remove(blocker);
}

TEST(Cache, ObtainReferenceStoresAndReuses) {
  const auto dir = fresh_dir("obtain");
  const auto p = oscillatory(1.0, 1.0);
  const auto ts = tenths(10);
  const auto first = obtain_reference(p, ts, 1e-12, StepperKind::Dc6Rk24, 100, dir);
  const auto id = reference_id(p, StepperKind::Dc6Rk24, 1e-12, ts);
  EXPECT_EQ(first.problem_id, id);
  ASSERT_TRUE(fs::exists(cache_path(id, dir)));
  const auto second = obtain_reference(p, ts, 1e-12, StepperKind::Dc6Rk24, 100, dir);
  EXPECT_EQ(second.states, first.states);
  // Different tolerance or sample set means a different key.
  EXPECT_NE(reference_id(p, StepperKind::Dc6Rk24, 1e-11, ts), id);
  EXPECT_NE(reference_id(p, StepperKind::Dc6Rk24, 1e-12, tenths(5)), id);
  EXPECT_NE(reference_id(oscillatory(2.0, 1.0), StepperKind::Dc6Rk24, 1e-12, ts), id);
  fs::remove_all(dir);
}

TEST(Cache, ResolveDirectory) {
  EXPECT_EQ(*resolve_cache_dir("explicit"), fs::path("explicit"));
  ::setenv("HDC_REF_CACHE", "/tmp/from-env", 1);
  EXPECT_EQ(*resolve_cache_dir(), fs::path("/tmp/from-env"));
  ::unsetenv("HDC_REF_CACHE");
  EXPECT_FALSE(resolve_cache_dir());
}
