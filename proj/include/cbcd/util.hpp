// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbcd {

/// Malformed or unusable input data (bad file, bad dimensions, bad config).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure (divergence, non-finite values).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic random source. All transforms are implemented by hand on top
/// of the mt19937_64 bit stream so that sequences are identical on every
/// platform (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is negligible for the small n used here
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    /// Standard normal via Box-Muller (pairwise, cached spare).
    double normal();

    /// Fisher-Yates permutation of {0, .., n-1}.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// independent; no ordering is imposed, so fn must only write to its own
/// slots. threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Thread-count default: CBCD_THREADS env var, else hardware concurrency.
int default_thread_count();

/// Plain-text key=value config files. Lines starting with '#' and blank
/// lines are ignored. Later keys override earlier ones.
std::map<std::string, std::string> read_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

}  // namespace cbcd
