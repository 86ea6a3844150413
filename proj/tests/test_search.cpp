// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "cbcd/search.hpp"

using namespace cbcd;

namespace {

// Independent reimplementation of the depth bound with exact integer
// arithmetic (the library evaluates it in floating point).
int depth_bound_oracle(int k, int c, long long max_params, int max_depth) {
    const long long numer = max_params - 9LL * (static_cast<long long>(c) * k + k);
    long long q = numer / (static_cast<long long>(k) * k);
    if (numer < 0 && numer % (static_cast<long long>(k) * k) != 0) --q;  // true floor
    return static_cast<int>(std::min<long long>(max_depth, q + 2));
}

}  // namespace

TEST_CASE("depth_bound reproduces the published values") {
    const SearchBudget budget;
    CHECK(depth_bound(32, 3, budget) == 40);
    CHECK(depth_bound(64, 3, budget) == 40);
    CHECK(depth_bound(128, 3, budget) == 38);
}

TEST_CASE("depth_bound matches the integer oracle across widths and inputs") {
    const SearchBudget budget;
    for (int c : {2, 3})
        for (int k = 8; k <= 256; ++k)
            CHECK(depth_bound(k, c, budget) == depth_bound_oracle(k, c, budget.max_params, 40));
}

TEST_CASE("skip_variants preserves the hidden weight-unit total") {
    NetworkSpec base = plain_spec(Subnet::Green, 8, 12);  // 10 hidden layers
    const long long hidden_params =
        count_params(base) - 9LL * 3 * 8 - 9LL * 8 * 1;  // minus input/output convs
    const auto variants = skip_variants(base);
    REQUIRE(!variants.empty());

    bool found_8_hidden_2_concat = false;
    for (const NetworkSpec& v : variants) {
        v.validate();
        int concats = 0;
        for (const LayerSpec& l : v.layers) concats += !l.skip_sources.empty();
        const long long vhidden =
            count_params(v) - 9LL * 3 * 8 - 9LL * 8 * 1;
        CHECK(vhidden == hidden_params);  // parameter-preserving on hidden layers
        CHECK(v.hidden_count() < base.hidden_count());
        if (v.hidden_count() == 8 && concats == 2) found_8_hidden_2_concat = true;
        for (int i = 0; i < v.depth(); ++i)
            if (!v.layers[i].skip_sources.empty()) CHECK(i >= 6);
    }
    CHECK(found_8_hidden_2_concat);  // 6 plain + 2 double = 10 weight units
}

TEST_CASE("skip_variants is empty for shallow specs") {
    CHECK(skip_variants(plain_spec(Subnet::Green, 8, 8)).empty());   // 6 hidden
    CHECK(!skip_variants(plain_spec(Subnet::Green, 8, 9)).empty());  // 7 hidden
}

TEST_CASE("skip_variants respects the enumeration cap") {
    SearchBudget budget;
    budget.max_skip_variants = 3;
    const auto variants = skip_variants(plain_spec(Subnet::Green, 8, 30), budget);
    CHECK(variants.size() == 3);
}

TEST_CASE("progressive search with a strictly-depth-increasing oracle shrinks to the floor") {
    const SearchBudget budget;
    const ValidationOracle oracle = [](const NetworkSpec& s) {
        return static_cast<double>(s.depth());
    };
    const SearchResult r = progressive_search(Subnet::Green, budget, oracle);
    // phase 1 prefers the width whose bound is shallowest (128 at depth 38),
    // then step 5 and step 2 shrink all the way to one hidden layer
    CHECK(r.chosen_width == 128);
    CHECK(r.best.hidden_count() == 1);
}

TEST_CASE("progressive search with a constant oracle keeps shrinking on ties") {
    const SearchBudget budget;
    const ValidationOracle oracle = [](const NetworkSpec&) { return 1.0; };
    const SearchResult r = progressive_search(Subnet::Green, budget, oracle);
    CHECK(r.best.hidden_count() == 1);
    // skip variants of a depth-3 spec do not exist, so no concats appear
    for (const LayerSpec& l : r.best.layers) CHECK(l.skip_sources.empty());
}

TEST_CASE("progressive search recovers a planted minimum at width 32 depth 12") {
    const SearchBudget budget;
    // scripted oracle over (width, depth); skip variants are penalized so the
    // planted plain configuration wins
    const ValidationOracle oracle = [](const NetworkSpec& s) {
        for (const LayerSpec& l : s.layers)
            if (!l.skip_sources.empty()) return 5.0;
        const std::map<int, double> by_depth{{40, 1.00}, {35, 0.90}, {30, 0.80}, {25, 0.85},
                                             {28, 0.79}, {26, 0.78}, {24, 0.77}, {22, 0.76},
                                             {20, 0.75}, {18, 0.74}, {16, 0.73}, {14, 0.72},
                                             {12, 0.71}, {10, 0.80}};
        if (s.width != 32) return 2.0 + s.width;  // width 32 wins phase 1
        const auto it = by_depth.find(s.depth());
        REQUIRE(it != by_depth.end());
        return it->second;
    };
    const SearchResult r = progressive_search(Subnet::Green, budget, oracle);
    CHECK(r.chosen_width == 32);
    CHECK(r.chosen_depth == 12);
    CHECK(r.best.width == 32);
    CHECK(r.best.depth() == 12);
    CHECK(r.chosen_params == count_params(r.best));
    CHECK(r.chosen_params <= budget.max_params);
    CHECK(r.best.depth() <= budget.max_depth);

    // phase-1 candidates appear in the trace for every width
    bool saw64 = false, saw128 = false;
    for (const SearchTraceRow& row : r.trace) {
        saw64 |= row.width == 64;
        saw128 |= row.width == 128;
    }
    CHECK(saw64);
    CHECK(saw128);
}

TEST_CASE("difference targets get dilated hidden convolutions at equal parameter count") {
    const SearchBudget budget;
    const ValidationOracle oracle = [](const NetworkSpec& s) {
        return s.width == 32 ? 1.0 : 2.0;  // constant within width 32
    };
    const SearchResult r = progressive_search(Subnet::GreenRed, budget, oracle);
    for (int i = 1; i + 1 < r.best.depth(); ++i) CHECK(r.best.layers[i].dilation == 3);
    // the same search for green keeps dilation 1
    const SearchResult g = progressive_search(Subnet::Green, budget, oracle);
    for (int i = 1; i + 1 < g.best.depth(); ++i) CHECK(g.best.layers[i].dilation == 1);
    // dilation does not change the parameter count for equal architecture
    NetworkSpec dil1 = plain_spec(Subnet::GreenRed, 32, 12, 1);
    NetworkSpec dil3 = plain_spec(Subnet::GreenRed, 32, 12, 3);
    CHECK(count_params(dil1) == count_params(dil3));
}

TEST_CASE("progressive search is deterministic for a deterministic oracle") {
    const SearchBudget budget;
    const ValidationOracle oracle = [](const NetworkSpec& s) {
        return std::abs(s.depth() - 17.0) + (s.width == 64 ? 0.0 : 1.0);
    };
    const SearchResult a = progressive_search(Subnet::GreenBlue, budget, oracle);
    const SearchResult b = progressive_search(Subnet::GreenBlue, budget, oracle);
    CHECK(a.chosen_width == b.chosen_width);
    CHECK(a.chosen_depth == b.chosen_depth);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].depth == b.trace[i].depth);
        CHECK(a.trace[i].val_error == b.trace[i].val_error);
    }
}

TEST_CASE("search trace CSV is written") {
    const SearchBudget budget;
    const ValidationOracle oracle = [](const NetworkSpec& s) {
        return static_cast<double>(s.depth());
    };
    const SearchResult r = progressive_search(Subnet::Green, budget, oracle);
    const std::string path = "search_trace_test.csv";
    write_search_trace_csv(path, r.trace);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "id,phase,width,depth,params,skips,val_error");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(r.trace.size()));
    in.close();
    std::remove(path.c_str());
}
