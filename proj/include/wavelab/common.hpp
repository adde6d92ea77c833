#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wavelab {

using Field = Eigen::ArrayXd;
using Vec = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

/// Surface area of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(int n);

// ---------------------------------------------------------------------------
// Error taxonomy. Validation-type errors map to CLI exit code 2, numerical
// ones to exit code 3.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct DomainError : ValidationError {
  using ValidationError::ValidationError;
};
struct WindowError : ValidationError {
  using ValidationError::ValidationError;
};
struct DegenerateError : ValidationError {
  using ValidationError::ValidationError;
};
struct CflError : ValidationError {
  using ValidationError::ValidationError;
};
struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};
struct ResourceError : ValidationError {
  using ValidationError::ValidationError;
};
struct InfeasibleError : ValidationError {
  using ValidationError::ValidationError;
};

struct BlowupError : NumericalError {
  BlowupError(const std::string& what, double last_safe_time_, double first_unstable_time_)
      : NumericalError(what),
        last_safe_time(last_safe_time_),
        first_unstable_time(first_unstable_time_) {}
  double last_safe_time;
  double first_unstable_time;
  /// Reported blow-up time: midpoint of the bracketing steps.
  double time() const { return 0.5 * (last_safe_time + first_unstable_time); }
};

struct NoConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};
struct ConstraintDriftError : NumericalError {
  using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// Deterministic seeding and index-sharded parallelism. Work items are written
// to their own slot so results do not depend on the thread count.
// ---------------------------------------------------------------------------

/// splitmix64 step; used to derive independent per-item seeds from one root.
std::uint64_t mix_seed(std::uint64_t root, std::uint64_t index);

/// RNG for work item `index` of a run seeded with `root`.
std::mt19937_64 rng_for(std::uint64_t root, std::uint64_t index);

/// Run fn(i) for i in [0, count) on up to `threads` threads. Exceptions are
/// captured and the first one (lowest index) is rethrown after completion.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

int default_thread_count();

}  // namespace wavelab
