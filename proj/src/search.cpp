// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/search.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cbcd {

int depth_bound(int width, int input_channels, const SearchBudget& budget) {
    if (width < 1 || input_channels < 1) throw DataError("depth_bound: counts must be positive");
    const double k = width, c = input_channels;
    const double d = std::floor((static_cast<double>(budget.max_params) - 9.0 * (c * k + k)) /
                                (k * k)) +
                     2.0;
    return static_cast<int>(std::min(static_cast<double>(budget.max_depth), d));
}

namespace {

std::string skip_layout_string(const NetworkSpec& spec) {
    std::ostringstream out;
    bool any = false;
    for (int i = 1; i + 1 < spec.depth(); ++i) {
        if (spec.layers[i].skip_sources.empty()) continue;
        if (any) out << " ";
        out << i << ":";
        for (std::size_t k = 0; k < spec.layers[i].skip_sources.size(); ++k)
            out << (k ? "," : "") << spec.layers[i].skip_sources[k];
        any = true;
    }
    return any ? out.str() : "-";
}

// Concat blocks occupy the tail of the hidden stack: doubles first, triples
// last (triples need the deepest history).
NetworkSpec build_variant(const NetworkSpec& base, int plain, int doubles, int triples) {
    NetworkSpec s = plain_spec(base.name, base.width, plain + doubles + triples + 2,
                               base.layers.size() > 2 ? base.layers[1].dilation : 1);
    int pos = plain + 1;  // absolute layer index of the first concat block
    for (int d = 0; d < doubles; ++d, ++pos) {
        s.layers[pos].skip_sources = {pos - 5};
        s.layers[pos].in_channels = s.layer_input_channels(pos);
    }
    for (int t = 0; t < triples; ++t, ++pos) {
        s.layers[pos].skip_sources = {pos - 5, pos - 10};
        s.layers[pos].in_channels = s.layer_input_channels(pos);
    }
    return s;
}

bool variant_valid(const NetworkSpec& s) {
    for (int i = 1; i + 1 < s.depth(); ++i) {
        const auto& src = s.layers[i].skip_sources;
        if (src.empty()) continue;
        if (i < 6) return false;
        for (int j : src)
            if (j < 1) return false;  // sources must be real hidden/input outputs
    }
    return true;
}

}  // namespace

std::vector<NetworkSpec> skip_variants(const NetworkSpec& spec, const SearchBudget& budget) {
    std::vector<NetworkSpec> out;
    const int units = spec.hidden_count();  // h + 2s + 3t is pinned to this
    if (units < 7) return out;
    for (int triples = 0; 3 * triples <= units; ++triples) {
        for (int doubles = triples == 0 ? 1 : 0; 2 * doubles + 3 * triples <= units; ++doubles) {
            const int plain = units - 2 * doubles - 3 * triples;
            if (plain < 0) break;
            NetworkSpec v = build_variant(spec, plain, doubles, triples);
            if (!variant_valid(v)) continue;
            v.validate();
            out.push_back(std::move(v));
            if (static_cast<int>(out.size()) >= budget.max_skip_variants) return out;
        }
    }
    return out;
}

SearchResult progressive_search(Subnet target, const SearchBudget& budget,
                                const ValidationOracle& oracle) {
    if (budget.widths.empty()) throw DataError("progressive_search: no candidate widths");
    const int cin = subnet_input_channels(target);
    SearchResult result;
    int next_id = 0;
    auto evaluate = [&](const NetworkSpec& spec, int phase) {
        const double err = oracle(spec);
        SearchTraceRow row;
        row.id = next_id++;
        row.phase = phase;
        row.width = spec.width;
        row.depth = spec.depth();
        row.params = count_params(spec);
        row.skip_layout = skip_layout_string(spec);
        row.val_error = err;
        result.trace.push_back(row);
        return err;
    };

    // Phase 1: width selection at the d(K) depth bound.
    NetworkSpec best;
    double best_err = 0.0;
    bool first = true;
    for (int k : budget.widths) {
        NetworkSpec cand = plain_spec(target, k, depth_bound(k, cin, budget));
        const double err = evaluate(cand, 1);
        if (first || err < best_err) {
            best = std::move(cand);
            best_err = err;
            first = false;
        }
    }

    // Phase 2: progressive depth reduction, step 5 then 2. A strict error
    // increase reverts the step and moves to the next step size; ties keep
    // shrinking (prefer the smaller model).
    for (int step : {budget.depth_step_initial, budget.depth_step_refine}) {
        for (;;) {
            const int depth = best.depth() - step;
            if (depth - 2 < 1) break;
            NetworkSpec cand = plain_spec(target, best.width, depth);
            const double err = evaluate(cand, 2);
            if (err > best_err) break;
            best = std::move(cand);
            best_err = err;
        }
    }
    // The parameter bound is a hard requirement; when the error criterion
    // stopped above it (wide networks), depth keeps shrinking regardless.
    while (count_params(best) > budget.max_params && best.depth() - budget.depth_step_refine >= 3) {
        NetworkSpec cand = plain_spec(target, best.width, best.depth() - budget.depth_step_refine);
        best_err = evaluate(cand, 2);
        best = std::move(cand);
    }

    // Phase 3: skip-connection variants at fixed parameter count; keep the
    // shallowest candidate whose error does not exceed the phase-2 winner
    // (first enumerated wins a depth tie).
    {
        const double threshold = best_err;
        for (NetworkSpec& v : skip_variants(best, budget)) {
            const double err = evaluate(v, 3);
            if (err <= threshold && v.depth() < best.depth()) {
                best = std::move(v);
                best_err = err;
            }
        }
    }

    // Phase 4: dilation for the difference targets; parameter count is
    // unchanged by construction.
    if (target != Subnet::Green) {
        for (int i = 1; i + 1 < best.depth(); ++i) best.layers[i].dilation = 3;
    }

    best.validate();
    if (count_params(best) > budget.max_params)
        throw NumericError("progressive_search: winning spec exceeds the parameter budget");
    result.best = best;
    result.chosen_width = best.width;
    result.chosen_depth = best.depth();
    result.chosen_params = count_params(best);
    return result;
}

void write_search_trace_csv(const std::string& path, const std::vector<SearchTraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write search trace: " + path);
    out << "id,phase,width,depth,params,skips,val_error\n";
    out.precision(17);
    for (const SearchTraceRow& r : trace)
        out << r.id << "," << r.phase << "," << r.width << "," << r.depth << "," << r.params
            << ",\"" << r.skip_layout << "\"," << r.val_error << "\n";
}

}  // namespace cbcd
