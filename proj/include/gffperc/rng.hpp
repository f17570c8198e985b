#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

namespace gffperc {

/// The generator behind every random stream.
using Rng = std::mt19937_64;

/// Identifies an independent random stream: replica r of experiment e under
/// a root seed. Streams are derived by hashing, so they can be built in any
/// order and on any worker.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t experiment = 0;
  std::uint64_t replica = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_key(const StreamId& id);
Rng make_rng(const StreamId& id);

/// Stable 64-bit id of an experiment label.
std::uint64_t experiment_id(std::string_view label);

/// Fills out with i.i.d. standard normals.
void fill_normal(Rng& rng, double* out, std::size_t n);

/// Process-wide default worker count (1 unless changed).
int default_workers();
void set_default_workers(int n);

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// executed exactly once; results must be written to slot i by the caller,
/// so the outcome never depends on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers = 0);

/// Pairwise summation; the bracketing depends only on the length.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace gffperc
