#pragma once
/**
 * @file oracle.hpp
 * @brief Reference trajectories by step-doubling self-convergence, with an
 * on-disk cache.
 *
 * A reference is produced by integrating at N, 2N, 4N, ... steps until two
 * consecutive runs agree (max over samples of the Euclidean difference) to a
 * requested tolerance. Sample times must lie on every grid that is visited,
 * which holds whenever they are multiples of T/N; nothing is interpolated.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "hdc/ivp.hpp"
#include "hdc/steppers.hpp"

namespace hdc {

struct ReferenceTrajectory {
  std::string problem_id;
  std::vector<double> sample_times;
  std::vector<State> states;
  double agreement = 0.0;
  StepperKind generator = StepperKind::Dc6Rk24;
  std::uint64_t n_steps_finest = 0;
  /// Agreement after each doubling, oldest first.
  std::vector<double> agreement_history;

  /// State at a sample time; matches within a relative 1e-12 of the horizon.
  const State* state_at(double t) const {
    const double scale = sample_times.empty() ? 1.0 : std::max(1.0, std::abs(sample_times.back()));
    auto it = std::lower_bound(sample_times.begin(), sample_times.end(), t - 1e-12 * scale);
    if (it == sample_times.end() || std::abs(*it - t) > 1e-12 * scale) return nullptr;
    return &states[static_cast<std::size_t>(it - sample_times.begin())];
  }

  /// Reference states aligned with a run's sample times.
  std::vector<State> aligned_with(const TrajectoryRun& run) const {
    std::vector<State> out;
    out.reserve(run.sample_times.size());
    for (double t : run.sample_times) {
      const State* s = state_at(t);
      if (!s) throw std::invalid_argument("reference has no sample at t = " + format_exact(t));
      out.push_back(*s);
    }
    return out;
  }
};

class OracleError : public std::runtime_error {
 public:
  enum class Kind { BudgetExhausted, Diverged };

  OracleError(Kind kind, double best_agreement, const std::string& what)
      : std::runtime_error(what), kind_(kind), best_(best_agreement) {}

  Kind kind() const { return kind_; }
  double best_agreement() const { return best_; }

 private:
  Kind kind_;
  double best_;
};

namespace detail {

inline std::vector<std::size_t> indices_on_grid(std::span<const double> times, double t_end,
                                                std::size_t n_steps) {
  std::vector<std::size_t> idx;
  idx.reserve(times.size());
  const double n = static_cast<double>(n_steps);
  for (double t : times) {
    const double x = t / t_end * n;
    const double r = std::round(x);
    if (r < 0.0 || r > n || std::abs(x - r) > 1e-6)
      throw std::invalid_argument("sample time " + format_exact(t) + " is not on the grid N = " +
                                  std::to_string(n_steps));
    const auto i = static_cast<std::size_t>(r);
    if (!idx.empty() && i <= idx.back())
      throw std::invalid_argument("sample times must be strictly increasing");
    idx.push_back(i);
  }
  return idx;
}

inline double max_euclidean_difference(const std::vector<State>& a, const std::vector<State>& b) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s)
    worst = std::max(worst, euclidean_distance(a[s], b[s], 0, a[s].size()));
  return worst;
}

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  return detail::fnv1a(bytes.data(), bytes.size());
}

/**
 * Integrate at n_start, 2 n_start, ... until consecutive runs agree to `tol`.
 *
 * Throws OracleError(Diverged) if a run blows up (the caller must start from a
 * stable N) and OracleError(BudgetExhausted) once the total number of steps
 * would exceed `step_budget`.
 */
inline ReferenceTrajectory reference_trajectory(const OdeProblem& problem,
                                                std::span<const double> sample_times, double tol,
                                                StepperKind kind, std::size_t n_start,
                                                std::uint64_t step_budget = 1'000'000'000ULL) {
  if (!(tol > 0.0)) throw std::invalid_argument("reference_trajectory: tol must be positive");
  if (n_start < 1) throw std::invalid_argument("reference_trajectory: n_start must be positive");

  auto run_at = [&](std::size_t n) {
    const auto idx = detail::indices_on_grid(sample_times, problem.t_end, n);
    auto run = integrate_at(problem, kind, n, idx);
    if (!run.completed())
      throw OracleError(OracleError::Kind::Diverged, INFINITY,
                        "reference run for " + problem.tag + " diverged at N = " + std::to_string(n));
    return run;
  };

  std::uint64_t used = n_start;
  std::size_t n = n_start;
  TrajectoryRun prev = run_at(n);
  std::vector<double> history;
  double best = INFINITY;
  while (true) {
    if (used + 2 * static_cast<std::uint64_t>(n) > step_budget)
      throw OracleError(OracleError::Kind::BudgetExhausted, best,
                        "step budget exhausted for " + problem.tag + ", best agreement " +
                            format_exact(best));
    n *= 2;
    used += n;
    TrajectoryRun cur = run_at(n);
    const double agreement = detail::max_euclidean_difference(prev.sample_states, cur.sample_states);
    history.push_back(agreement);
    best = std::min(best, agreement);
    if (agreement <= tol) {
      ReferenceTrajectory ref;
      ref.problem_id = problem.tag;
      ref.sample_times.assign(sample_times.begin(), sample_times.end());
      ref.states = std::move(cur.sample_states);
      ref.agreement = agreement;
      ref.generator = kind;
      ref.n_steps_finest = n;
      ref.agreement_history = std::move(history);
      return ref;
    }
    prev = std::move(cur);
  }
}

/**
 * Cache key: problem name plus a hash of everything that determines the
 * reference (canonical parameters, generator, tolerance and sample times).
 */
inline std::string reference_id(const OdeProblem& problem, StepperKind kind, double tol,
                                std::span<const double> sample_times) {
  std::string key = problem.tag + "|" + std::string(to_string(kind)) + "|" + format_exact(tol);
  std::uint64_t h = detail::fnv1a(key.data(), key.size());
  h = detail::fnv1a(sample_times.data(), sample_times.size_bytes(), h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return problem.name + "-" + buf;
}

// ---------------------------------------------------------------------------
// Cache container
//
//   "HDC1" | u64 dim | u64 samples | u64 id_len | id bytes
//   | f64 agreement | u64 generator | u64 n_steps_finest | u64 hist_len | f64 hist[]
//   | f64 times[samples] | f64 states[samples * dim] | u64 FNV-1a of all preceding bytes
//
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

namespace detail {

class ByteWriter {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> b) : b_(b) {}
  template <class T>
  bool get(T& v) {
    if (pos_ + sizeof(T) > b_.size()) return false;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return true;
  }
  bool get_bytes(void* out, std::size_t n) {
    if (pos_ + n > b_.size()) return false;
    std::memcpy(out, b_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const unsigned char> b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_reference(const ReferenceTrajectory& ref) {
  detail::ByteWriter w;
  w.put_bytes("HDC1", 4);
  const std::uint64_t dim = ref.states.empty() ? 0 : ref.states.front().size();
  w.put(dim);
  w.put(static_cast<std::uint64_t>(ref.sample_times.size()));
  w.put(static_cast<std::uint64_t>(ref.problem_id.size()));
  w.put_bytes(ref.problem_id.data(), ref.problem_id.size());
  w.put(ref.agreement);
  w.put(static_cast<std::uint64_t>(ref.generator));
  w.put(ref.n_steps_finest);
  w.put(static_cast<std::uint64_t>(ref.agreement_history.size()));
  for (double a : ref.agreement_history) w.put(a);
  for (double t : ref.sample_times) w.put(t);
  for (const auto& s : ref.states) {
    if (s.size() != dim) throw std::invalid_argument("encode_reference: ragged states");
    for (double x : s) w.put(x);
  }
  const std::uint64_t sum = detail::fnv1a(w.bytes().data(), w.bytes().size());
  w.put(sum);
  return std::move(w.bytes());
}

/// Decodes a cache container; nullopt on any structural or checksum failure.
inline std::optional<ReferenceTrajectory> decode_reference(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 + 8) return std::nullopt;
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (detail::fnv1a(bytes.data(), body) != stored) return std::nullopt;

  detail::ByteReader r(bytes.first(body));
  char magic[4];
  if (!r.get_bytes(magic, 4) || std::memcmp(magic, "HDC1", 4) != 0) return std::nullopt;
  std::uint64_t dim = 0, count = 0, id_len = 0, gen = 0, hist_len = 0;
  ReferenceTrajectory ref;
  if (!r.get(dim) || !r.get(count) || !r.get(id_len) || id_len > r.remaining()) return std::nullopt;
  ref.problem_id.resize(id_len);
  if (!r.get_bytes(ref.problem_id.data(), id_len)) return std::nullopt;
  if (!r.get(ref.agreement) || !r.get(gen) || !r.get(ref.n_steps_finest) || !r.get(hist_len))
    return std::nullopt;
  if (gen > static_cast<std::uint64_t>(StepperKind::Dc6Rk24)) return std::nullopt;
  ref.generator = static_cast<StepperKind>(gen);
  if (hist_len > r.remaining() / 8) return std::nullopt;
  ref.agreement_history.resize(hist_len);
  for (auto& a : ref.agreement_history) r.get(a);
  if (count > r.remaining() / 8 || (dim > 0 && count * dim > r.remaining() / 8)) return std::nullopt;
  ref.sample_times.resize(count);
  for (auto& t : ref.sample_times) r.get(t);
  ref.states.assign(count, State(dim));
  for (auto& s : ref.states)
    for (auto& x : s)
      if (!r.get(x)) return std::nullopt;
  if (r.remaining() != 0) return std::nullopt;
  return ref;
}

inline std::filesystem::path cache_path(const std::string& problem_id,
                                        const std::filesystem::path& dir) {
  return dir / (problem_id + ".ref");
}

/// Writes `<dir>/<problem_id>.ref` through a temporary file and a rename.
inline void cache_store(const ReferenceTrajectory& ref, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create cache directory " + dir.string() + ": " + ec.message());
  const auto bytes = encode_reference(ref);
  const auto final_path = cache_path(ref.problem_id, dir);
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

/// Cache lookup. Missing files, wrong ids and corrupt containers are misses.
inline std::optional<ReferenceTrajectory> cache_load(const std::string& problem_id,
                                                     const std::filesystem::path& dir) {
  const auto path = cache_path(problem_id, dir);
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  auto ref = decode_reference(bytes);
  if (!ref || ref->problem_id != problem_id) return std::nullopt;
  return ref;
}

/// Cache directory from an explicit setting or the HDC_REF_CACHE environment variable.
inline std::optional<std::filesystem::path> resolve_cache_dir(const std::string& explicit_dir = {}) {
  if (!explicit_dir.empty()) return std::filesystem::path(explicit_dir);
  if (const char* env = std::getenv("HDC_REF_CACHE"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

/**
 * Cached `reference_trajectory`. The returned reference carries the cache key
 * as its problem_id.
 */
inline ReferenceTrajectory obtain_reference(const OdeProblem& problem,
                                            std::span<const double> sample_times, double tol,
                                            StepperKind kind, std::size_t n_start,
                                            const std::optional<std::filesystem::path>& cache_dir,
                                            std::uint64_t step_budget = 1'000'000'000ULL) {
  const std::string id = reference_id(problem, kind, tol, sample_times);
  if (cache_dir) {
    if (auto hit = cache_load(id, *cache_dir);
        hit && hit->agreement <= tol && hit->sample_times.size() == sample_times.size() &&
        std::equal(hit->sample_times.begin(), hit->sample_times.end(), sample_times.begin()))
      return *hit;
  }
  auto ref = reference_trajectory(problem, sample_times, tol, kind, n_start, step_budget);
  ref.problem_id = id;
  if (cache_dir) cache_store(ref, *cache_dir);
  return ref;
}

}  // namespace hdc
