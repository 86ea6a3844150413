// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: runs every criterion end to end and prints one line per
// criterion. Exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cbcd/bench.hpp"
#include "cbcd/image_io.hpp"
#include "cbcd/model.hpp"
#include "cbcd/pipeline.hpp"
#include "cbcd/search.hpp"
#include "cbcd/train.hpp"

using namespace cbcd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail = "") {
    std::printf("%s criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

struct Criterion {
    int id;
    std::string what;
    double seconds = 0.0;

    Criterion(int id_, std::string what_) : id(id_), what(std::move(what_)) {}
    template <typename Fn>
    void run(Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string detail;
        try {
            detail = fn();
            ok = true;
        } catch (const std::exception& e) {
            detail = e.what();
        }
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream d;
        d << detail << (detail.empty() ? "" : ", ") << std::fixed << seconds << "s";
        report(id, what, ok, d.str());
    }
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

RgbImage random_byte_image(int h, int w, Rng& rng) {
    RgbImage img(h, w);
    for (auto* p : {&img.r, &img.g, &img.b})
        for (double& v : p->data) v = static_cast<double>(rng.below(256));
    return img;
}

const BayerLayout kLayouts[4] = {BayerLayout::RGGB, BayerLayout::GRBG, BayerLayout::GBRG,
                                 BayerLayout::BGGR};

// Independent HQLI oracle (duplicated from the unit suite on purpose: the
// acceptance binary carries its own reference).
char oracle_role(BayerLayout layout, int y, int x) {
    static const char tiles[4][5] = {"RGGB", "GRBG", "GBRG", "BGGR"};
    return tiles[static_cast<int>(layout)][2 * (y & 1) + (x & 1)];
}

double oracle_pad_at(const PlaneImage& p, int y, int x) {
    auto m = [](int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };
    return p.at(m(y, p.height), m(x, p.width));
}

double oracle_stencil(const PlaneImage& cfa, int y, int x, const double (&k)[5][5]) {
    double acc = 0.0;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx)
            acc += k[dy + 2][dx + 2] * oracle_pad_at(cfa, y + dy, x + dx);
    return acc / 8.0;
}

const double kG[5][5] = {{0, 0, -1, 0, 0},
                         {0, 0, 2, 0, 0},
                         {-1, 2, 4, 2, -1},
                         {0, 0, 2, 0, 0},
                         {0, 0, -1, 0, 0}};
const double kRow[5][5] = {{0, 0, 0.5, 0, 0},
                           {0, -1, 0, -1, 0},
                           {-1, 4, 5, 4, -1},
                           {0, -1, 0, -1, 0},
                           {0, 0, 0.5, 0, 0}};
const double kCol[5][5] = {{0, 0, -1, 0, 0},
                           {0, -1, 4, -1, 0},
                           {0.5, 0, 5, 0, 0.5},
                           {0, -1, 4, -1, 0},
                           {0, 0, -1, 0, 0}};
const double kCross[5][5] = {{0, 0, -1.5, 0, 0},
                             {0, 2, 0, 2, 0},
                             {-1.5, 0, 6, 0, -1.5},
                             {0, 2, 0, 2, 0},
                             {0, 0, -1.5, 0, 0}};

InitPlanes oracle_hqli(const MosaicImage& m) {
    const int h = m.cfa.height, w = m.cfa.width;
    InitPlanes out{PlaneImage(h, w), PlaneImage(h, w), PlaneImage(h, w)};
    const int r_row =
        oracle_role(m.layout, 0, 0) == 'R' || oracle_role(m.layout, 0, 1) == 'R' ? 0 : 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const char role = oracle_role(m.layout, y, x);
            const double v = m.cfa.at(y, x);
            if (role == 'R') {
                out.r0.at(y, x) = v;
                out.g0.at(y, x) = oracle_stencil(m.cfa, y, x, kG);
                out.b0.at(y, x) = oracle_stencil(m.cfa, y, x, kCross);
            } else if (role == 'B') {
                out.b0.at(y, x) = v;
                out.g0.at(y, x) = oracle_stencil(m.cfa, y, x, kG);
                out.r0.at(y, x) = oracle_stencil(m.cfa, y, x, kCross);
            } else {
                out.g0.at(y, x) = v;
                const bool in_r_row = (y & 1) == r_row;
                out.r0.at(y, x) = oracle_stencil(m.cfa, y, x, in_r_row ? kRow : kCol);
                out.b0.at(y, x) = oracle_stencil(m.cfa, y, x, in_r_row ? kCol : kRow);
            }
        }
    return out;
}

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------

std::string criterion_param_counts() {
    const long long g = count_params(default_spec(Subnet::Green));
    const long long gr = count_params(default_spec(Subnet::GreenRed));
    const long long gb = count_params(default_spec(Subnet::GreenBlue));
    require(g == 277632, "green params " + std::to_string(g));
    require(gr == 314208, "green-red params " + std::to_string(gr));
    require(gb == 332640, "green-blue params " + std::to_string(gb));
    require(g + gr + gb == 924480, "total params");
    return "277632/314208/332640 total 924480";
}

std::string criterion_depth_bound() {
    const SearchBudget budget;
    require(depth_bound(32, 3, budget) == 40, "d(32) != 40");
    require(depth_bound(64, 3, budget) == 40, "d(64) != 40");
    require(depth_bound(128, 3, budget) == 38, "d(128) != 38");
    return "d(32)=40 d(64)=40 d(128)=38";
}

std::string criterion_flops() {
    // library convention: exactly params x pixels
    long long total = 0;
    for (Subnet s : {Subnet::Green, Subnet::GreenRed, Subnet::GreenBlue}) {
        const NetworkSpec spec = default_spec(s);
        require(count_flops(spec, 100, 100) == count_params(spec) * 10000, "flops convention");
        total += count_flops(spec, 100, 100);
    }
    require(total == 9244800000LL, "total flops");
    require(std::abs(static_cast<double>(total) - 9.25e9) <= 0.01e9, "not within rounding of 9.25e9");

    // and the CLI report emits it
#ifdef CBCD_CLI_PATH
    const std::string out = fs::temp_directory_path() / "cbcd_accept_report.txt";
    const std::string cmd = std::string(CBCD_CLI_PATH) + " report --size 100x100 > " + out;
    require(std::system(cmd.c_str()) == 0, "report subcommand failed");
    const std::string text = slurp(out);
    for (const char* needle : {"277632", "314208", "332640", "924480", "9.2448e+09"})
        require(text.find(needle) != std::string::npos, std::string("report missing ") + needle);
    fs::remove(out);
#endif
    return "total 9.2448e9 (= params x 1e4), report subcommand verified";
}

std::string criterion_hqli_oracle() {
    Rng rng(2026);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const RgbImage img = random_byte_image(16, 16, rng);
        const BayerLayout layout = kLayouts[trial % 4];
        const MosaicImage m = mosaic(img, layout);
        const InitPlanes got = hqli(m);
        const InitPlanes want = oracle_hqli(m);
        require(got.r0.data == want.r0.data, "r0 mismatch");
        require(got.g0.data == want.g0.data, "g0 mismatch");
        require(got.b0.data == want.b0.data, "b0 mismatch");
        ++checked;
    }
    // constants reconstruct exactly on every layout
    RgbImage flat(8, 8);
    for (auto* p : {&flat.r, &flat.g, &flat.b}) std::fill(p->data.begin(), p->data.end(), 119.0);
    for (BayerLayout layout : kLayouts) {
        const InitPlanes planes = hqli(mosaic(flat, layout));
        for (const PlaneImage* p : {&planes.r0, &planes.g0, &planes.b0})
            for (double v : p->data) require(std::abs(v - 119.0) < 1e-12, "constant drift");
    }
    return std::to_string(checked) + " random 16x16 images bit-exact, constants exact";
}

std::string criterion_gradients() {
    TrainConfig cfg;
    cfg.threads = 1;
    int coords = 0;

    auto check = [&](const NetworkSpec& spec, std::uint64_t seed, LossKind loss, bool margin) {
        Rng rng(seed);
        NetworkWeights weights = init_weights(spec, rng);
        std::vector<TrainingExample> batch(2);
        for (auto& ex : batch) {
            ex.input = Tensor(6, 6, spec.input_channels);
            for (double& v : ex.input.data) v = rng.uniform(-1.0, 1.0);
            ex.label = PlaneImage(6, 6);
            for (double& v : ex.label.data) v = rng.uniform(-1.0, 1.0);
        }
        if (margin) {
            // residuals bounded away from the p-norm curvature blow-up
            const auto preds = training_predictions(spec, weights, batch, cfg);
            for (std::size_t ex = 0; ex < batch.size(); ++ex)
                for (std::size_t i = 0; i < batch[ex].label.size(); ++i) {
                    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                    batch[ex].label.data[i] = preds[ex].data[i] + sign * rng.uniform(0.4, 1.2);
                }
        }
        const BatchGradients bg = backward(spec, weights, batch, loss, cfg);
        NetworkWeights grads = bg.grads;
        auto warrays = trainable_arrays(spec, weights);
        auto garrays = trainable_arrays(spec, grads);
        for (std::size_t a = 0; a < warrays.size(); ++a)
            for (std::size_t k = 0; k < warrays[a]->size(); ++k) {
                double& p = (*warrays[a])[k];
                const double saved = p;
                const double an = (*garrays[a])[k];
                double best = 1.0;
                for (const double h : {1e-4, 1e-5, 1e-6}) {
                    p = saved + h;
                    const double lp = batch_loss(spec, weights, batch, loss, cfg);
                    p = saved - h;
                    const double lm = batch_loss(spec, weights, batch, loss, cfg);
                    p = saved;
                    const double fd = (lp - lm) / (2.0 * h);
                    const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
                    best = std::min(best, std::abs(fd - an) / denom);
                    if (best < 1e-4) break;
                }
                require(best < 1e-4, "gradient mismatch (rel " + std::to_string(best) + ")");
                ++coords;
            }
    };

    // plain blocks, 3-channel input
    const NetworkSpec plain = plain_spec(Subnet::Green, 3, 4);
    check(plain, 11, LossKind::Mse, false);
    check(plain, 12, LossKind::PNorm, true);
    // dilated hidden blocks with a skip concatenation, 2-channel input
    NetworkSpec skip = plain_spec(Subnet::GreenRed, 4, 8, 3);
    skip.layers[6].skip_sources = {1};
    skip.layers[6].in_channels = skip.layer_input_channels(6);
    skip.validate();
    check(skip, 13, LossKind::Mse, false);
    check(skip, 14, LossKind::PNorm, true);
    return std::to_string(coords) + " parameters FD-checked at 1e-4 relative";
}

std::string criterion_pipeline_invariants() {
    Rng rng(617);
    DemosaicModel model = DemosaicModel::zero_default();
    {
        // small random weights on reduced specs keep this fast while still
        // exercising all three networks
        Rng wr(5);
        model.spec_g = plain_spec(Subnet::Green, 8, 4);
        model.spec_gr = plain_spec(Subnet::GreenRed, 8, 9, 3);
        model.spec_gr.layers[6].skip_sources = {1};
        model.spec_gr.layers[6].in_channels = model.spec_gr.layer_input_channels(6);
        model.spec_gb = plain_spec(Subnet::GreenBlue, 8, 5, 3);
        model.w_g = init_weights(model.spec_g, wr);
        model.w_gr = init_weights(model.spec_gr, wr);
        model.w_gb = init_weights(model.spec_gb, wr);
    }
    int images = 0;
    for (int trial = 0; trial < 25; ++trial) {
        for (BayerLayout layout : kLayouts) {
            const int h = 8 + static_cast<int>(rng.below(9));
            const int w = 8 + static_cast<int>(rng.below(9));
            const RgbImage img = random_byte_image(h, w, rng);
            const RgbImage out = demosaic(mosaic(img, layout), model);
            const PixelSets sets = pixel_sets(h, w, layout);
            for (auto [y, x] : sets.r) require(out.r.at(y, x) == img.r.at(y, x), "r sample");
            for (auto [y, x] : sets.g) require(out.g.at(y, x) == img.g.at(y, x), "g sample");
            for (auto [y, x] : sets.b) require(out.b.at(y, x) == img.b.at(y, x), "b sample");
            for (const PlaneImage* p : {&out.r, &out.g, &out.b})
                for (double v : p->data) require(v >= 0.0 && v <= 255.0, "range");
            ++images;
        }
    }
    // zero-weight collapse, bit-exact
    const DemosaicModel zero = DemosaicModel::zero_default();
    const RgbImage img = random_byte_image(14, 12, rng);
    for (BayerLayout layout : kLayouts) {
        const MosaicImage m = mosaic(img, layout);
        const RgbImage out = demosaic(m, zero);
        const InitPlanes init = hqli(m);
        RgbImage want;
        want.r = init.r0;
        want.g = init.g0;
        want.b = init.b0;
        want = clip(want);
        require(out.r.data == want.r.data && out.g.data == want.g.data &&
                    out.b.data == want.b.data,
                "zero-weight collapse not bit-exact");
    }
    return std::to_string(images) + " random images x layouts hold sample/range invariants";
}

std::string criterion_training_smoke() {
    std::ostringstream detail;
    const int threads = default_thread_count();

    // (a) reduced green network: 3 hidden layers, K=32, 200 iterations on
    //     200 synthetic 50x50 patches; final loss <= 50% of initial
    {
        const auto images = synthetic_dataset(50, 100, 100, 909);
        std::vector<TrainingExample> examples;
        for (const RgbImage& img : images)
            for (const RgbImage& patch : extract_patches(img, 50))
                examples.push_back(make_example(patch, Subnet::Green, BayerLayout::RGGB));
        require(examples.size() == 200, "expected 200 patches");

        const NetworkSpec spec = plain_spec(Subnet::Green, 32, 5);  // 3 hidden layers
        TrainConfig cfg;
        cfg.threads = threads;
        cfg.batch_size = 16;
        Rng rng(4242);
        NetworkWeights weights = init_weights(spec, rng);
        OptimizerState state = OptimizerState::zero(spec);

        std::vector<TrainingExample> probe(examples.begin(), examples.begin() + 32);
        const double initial = batch_loss(spec, weights, probe, LossKind::Mse, cfg);

        std::vector<std::size_t> order = rng.permutation(examples.size());
        std::size_t cursor = 0;
        for (int it = 0; it < 200; ++it) {
            std::vector<TrainingExample> batch;
            for (int k = 0; k < cfg.batch_size; ++k) {
                if (cursor == order.size()) {
                    order = rng.permutation(examples.size());
                    cursor = 0;
                }
                batch.push_back(examples[order[cursor++]]);
            }
            BatchGradients bg = backward(spec, weights, batch, LossKind::Mse, cfg);
            adam_step(state, bg.grads, weights, lr_schedule(1, cfg), cfg);
        }
        const double final_loss = batch_loss(spec, weights, probe, LossKind::Mse, cfg);
        detail << "smoke loss " << initial << " -> " << final_loss;
        require(final_loss <= 0.5 * initial, "loss did not halve: " + detail.str());
    }

    // (b) three reduced nets, 10 desk-scale epochs, must beat the HQLI
    //     baseline CPSNR by at least 0.3 dB on a held-out synthetic set
    {
        const auto train_images = synthetic_dataset(18, 100, 100, 31337);
        TrainConfig cfg;
        cfg.threads = threads;
        cfg.batch_size = 16;
        cfg.epochs = 10;
        cfg.discard_patches = 2;
        cfg.seed = 7;

        DemosaicModel model = DemosaicModel::zero_default();
        model.spec_g = plain_spec(Subnet::Green, 32, 5);
        model.spec_gr = plain_spec(Subnet::GreenRed, 32, 5, 3);
        model.spec_gb = plain_spec(Subnet::GreenBlue, 32, 5, 3);
        for (Subnet target : {Subnet::Green, Subnet::GreenRed, Subnet::GreenBlue}) {
            const Dataset ds = build_dataset(train_images, target, BayerLayout::RGGB, cfg);
            Rng rng(cfg.seed + static_cast<int>(target));
            const NetworkSpec& spec = model.spec(target);
            TrainResult r = train(spec, ds, default_loss(target), cfg, init_weights(spec, rng));
            model.set(target, spec, std::move(r.weights));
        }

        std::vector<DatasetEntry> held_out;
        const auto eval_images = synthetic_dataset(12, 100, 100, 555);
        for (std::size_t i = 0; i < eval_images.size(); ++i)
            held_out.push_back({"synth" + std::to_string(i), eval_images[i]});

        EvalOptions opts;
        opts.threads = threads;
        const BenchmarkReport baseline =
            evaluate_dataset(held_out, DemosaicModel::zero_default(), opts);
        const BenchmarkReport trained = evaluate_dataset(held_out, model, opts);
        detail << "; baseline CPSNR " << baseline.mean.cpsnr << " dB, trained "
               << trained.mean.cpsnr << " dB";
        require(trained.mean.cpsnr >= baseline.mean.cpsnr + 0.3,
                "trained model does not beat HQLI by 0.3 dB:" + detail.str());
    }
    return detail.str();
}

std::string criterion_determinism() {
    const int kThreads[2] = {1, 2};
    // identical seeds -> bit-identical trained model files
    const auto images = synthetic_dataset(6, 60, 60, 77);
    TrainConfig cfg;
    cfg.patch_size = 30;
    cfg.discard_patches = 1;
    cfg.batch_size = 8;
    cfg.epochs = 2;
    cfg.seed = 99;

    const NetworkSpec spec = plain_spec(Subnet::Green, 8, 4);
    std::string files[2];
    for (int run = 0; run < 2; ++run) {
        TrainConfig c = cfg;
        c.threads = kThreads[run];  // thread count must not matter either
        const Dataset ds = build_dataset(images, Subnet::Green, BayerLayout::RGGB, c);
        Rng rng(3);
        const TrainResult r = train(spec, ds, LossKind::Mse, c, init_weights(spec, rng));
        DemosaicModel model = DemosaicModel::zero_default();
        model.spec_g = spec;
        model.w_g = r.weights;
        files[run] = (fs::temp_directory_path() / ("cbcd_det_" + std::to_string(run) + ".cbcd"))
                         .string();
        save_model(files[run], model);
    }
    require(slurp(files[0]) == slurp(files[1]), "trained weight files differ");
    fs::remove(files[0]);
    fs::remove(files[1]);

    // identical fingerprints -> identical benchmark CSVs
    Rng rng(15);
    std::vector<DatasetEntry> entries;
    for (int i = 0; i < 3; ++i)
        entries.push_back({"img" + std::to_string(i), random_byte_image(16, 16, rng)});
    const DemosaicModel zero = DemosaicModel::zero_default();
    std::string csvs[2];
    for (int run = 0; run < 2; ++run) {
        EvalOptions opts;
        opts.threads = kThreads[run];
        opts.seed = 1;
        const BenchmarkReport rep = evaluate_dataset(entries, zero, opts);
        csvs[run] =
            (fs::temp_directory_path() / ("cbcd_det_" + std::to_string(run) + ".csv")).string();
        write_report_csv(csvs[run], rep);
    }
    require(slurp(csvs[0]) == slurp(csvs[1]), "benchmark CSVs differ");
    fs::remove(csvs[0]);
    fs::remove(csvs[1]);

    // demosaic output independent of thread count
    DemosaicModel model = DemosaicModel::zero_default();
    {
        Rng wr(21);
        model.spec_g = plain_spec(Subnet::Green, 8, 4);
        model.spec_gr = plain_spec(Subnet::GreenRed, 8, 4, 3);
        model.spec_gb = plain_spec(Subnet::GreenBlue, 8, 4, 3);
        model.w_g = init_weights(model.spec_g, wr);
        model.w_gr = init_weights(model.spec_gr, wr);
        model.w_gb = init_weights(model.spec_gb, wr);
    }
    const MosaicImage m = mosaic(random_byte_image(20, 18, rng), BayerLayout::GRBG);
    DemosaicOptions o1, o4;
    o1.threads = 1;
    o4.threads = 4;
    const RgbImage a = demosaic(m, model, o1);
    const RgbImage b = demosaic(m, model, o4);
    require(a.r.data == b.r.data && a.g.data == b.g.data && a.b.data == b.b.data,
            "demosaic depends on thread count");
    return "weights, CSVs and demosaic identical across seeds/threads";
}

std::string criterion_search_fixture() {
    const SearchBudget budget;
    const ValidationOracle oracle = [](const NetworkSpec& s) -> double {
        for (const LayerSpec& l : s.layers)
            if (!l.skip_sources.empty()) return 5.0;
        if (s.width != 32) return 2.0 + s.width;
        switch (s.depth()) {
            case 40: return 1.00;
            case 35: return 0.90;
            case 30: return 0.80;
            case 25: return 0.85;
            case 28: return 0.79;
            case 26: return 0.78;
            case 24: return 0.77;
            case 22: return 0.76;
            case 20: return 0.75;
            case 18: return 0.74;
            case 16: return 0.73;
            case 14: return 0.72;
            case 12: return 0.71;
            case 10: return 0.80;
            default: throw std::runtime_error("unexpected candidate depth");
        }
    };
    const SearchResult r = progressive_search(Subnet::Green, budget, oracle);
    require(r.chosen_width == 32, "width not recovered");
    require(r.chosen_depth == 12, "depth not recovered");
    require(count_params(r.best) <= budget.max_params, "budget violated");
    require(r.best.depth() <= budget.max_depth, "depth bound violated");
    return "planted (K=32, D=12) recovered; budget respected";
}

std::string criterion_serialization() {
    Rng rng(2718);
    DemosaicModel m = DemosaicModel::zero_default();
    m.w_g = init_weights(m.spec_g, rng);
    m.w_gr = init_weights(m.spec_gr, rng);
    m.w_gb = init_weights(m.spec_gb, rng);
    const std::string p1 = (fs::temp_directory_path() / "cbcd_rt1.cbcd").string();
    const std::string p2 = (fs::temp_directory_path() / "cbcd_rt2.cbcd").string();
    save_model(p1, m);
    save_model(p2, load_model(p1));
    const bool ok = slurp(p1) == slurp(p2);
    const auto size = fs::file_size(p1);
    fs::remove(p1);
    fs::remove(p2);
    require(ok, "round trip not byte-identical");
    return "write-read-write byte-identical (" + std::to_string(size) + " bytes)";
}

}  // namespace

int main() {
    std::printf("acceptance suite (%d worker threads)\n", default_thread_count());

    Criterion c1(1, "parameter-count reproduction [exact]");
    c1.run(criterion_param_counts);
    Criterion c2(2, "d(K) depth-bound formula [exact]");
    c2.run(criterion_depth_bound);
    Criterion c3(3, "FLOPs convention at 100x100");
    c3.run(criterion_flops);
    Criterion c4(4, "HQLI oracle equivalence [bit-exact]");
    c4.run(criterion_hqli_oracle);
    Criterion c5(5, "gradient checks vs finite differences [1e-4 rel]");
    c5.run(criterion_gradients);
    Criterion c6(6, "pipeline invariants (samples, range, zero collapse)");
    c6.run(criterion_pipeline_invariants);
    Criterion c7(7, "training smoke test (loss halves; beats HQLI by 0.3 dB)");
    c7.run(criterion_training_smoke);
    Criterion c8(8, "determinism (seeds, CSVs, thread count)");
    c8.run(criterion_determinism);
    Criterion c9(9, "search fixture recovers (K=32, D=12)");
    c9.run(criterion_search_fixture);
    Criterion c10(10, "model serialization round-trip [byte-identical]");
    c10.run(criterion_serialization);

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
