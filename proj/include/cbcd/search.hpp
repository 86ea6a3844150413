// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "cbcd/nn.hpp"

namespace cbcd {

struct SearchBudget {
    long long max_params = 600000;       // per sub-network
    int max_depth = 40;
    std::vector<int> widths = {32, 64, 128};
    int depth_step_initial = 5;
    int depth_step_refine = 2;
    int max_skip_variants = 32;
};

/// d(K) = min(40, floor((6e5 - 9(C*K + K)) / K^2) + 2), evaluated verbatim.
int depth_bound(int width, int input_channels, const SearchBudget& budget);

/// Validation error of a candidate spec. A real oracle trains the candidate
/// for a few epochs and reports validation loss; fixtures script it.
using ValidationOracle = std::function<double(const NetworkSpec&)>;

struct SearchTraceRow {
    int id = 0;
    int phase = 0;
    int width = 0;
    int depth = 0;
    long long params = 0;
    std::string skip_layout;
    double val_error = 0.0;
};

struct SearchResult {
    NetworkSpec best;
    int chosen_width = 0;
    int chosen_depth = 0;
    long long chosen_params = 0;
    std::vector<SearchTraceRow> trace;
};

/// Parameter-preserving variants that trade plain hidden layers for concat
/// blocks: a block reading [out(i-1) || out(i-5)] counts as two weight
/// units, one additionally reading out(i-10) counts as three, and
/// h + 2s + 3t stays equal to the original hidden count while the depth
/// drops. Concat blocks sit at the tail of the hidden stack, never before
/// layer 6. Returns at most budget.max_skip_variants specs; empty when the
/// spec is too shallow to host a concat block.
std::vector<NetworkSpec> skip_variants(const NetworkSpec& spec, const SearchBudget& budget = {});

/// The four-phase progressive search:
///   1. evaluate (d(K), K) per width, keep the argmin width;
///   2. shrink depth by 5 then by 2 while the error does not strictly
///      increase (ties keep shrinking);
///   3. evaluate the parameter-preserving skip variants, keep the
///      shallowest whose error does not exceed the phase-2 winner;
///   4. for the difference targets, dilate the hidden convolutions to
///      enlarge the receptive field at unchanged parameter count.
SearchResult progressive_search(Subnet target, const SearchBudget& budget,
                                const ValidationOracle& oracle);

/// CSV trace: id,phase,width,depth,params,skips,val_error.
void write_search_trace_csv(const std::string& path, const std::vector<SearchTraceRow>& trace);

}  // namespace cbcd
