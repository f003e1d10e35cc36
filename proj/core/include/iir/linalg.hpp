#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "iir/model.hpp"

namespace iir {

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// S^p for symmetric positive semidefinite S, through an eigendecomposition.
/// Eigenvalues are clamped at zero before powering; for p < 0 the
/// zero eigenvalues map to zero (pseudo-inverse power).
Matrix symmetric_power(const Matrix& s, double p);

/// Worker count for parallel jobs: IIR_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs job(i) for i in [0, count). Jobs must write only to their own slot;
/// completion order does not affect results.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job);

/// Seed for an independent RNG stream derived from (seed, stream index).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace iir
