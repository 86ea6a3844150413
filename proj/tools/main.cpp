// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "cbcd/bench.hpp"
#include "cbcd/image_io.hpp"
#include "cbcd/model.hpp"
#include "cbcd/pipeline.hpp"
#include "cbcd/search.hpp"
#include "cbcd/train.hpp"

namespace fs = std::filesystem;
using namespace cbcd;

namespace {

// exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure

DemosaicModel load_or_default(const std::string& path) {
    if (path.empty()) return DemosaicModel::zero_default();
    return load_model(path);
}

TrainConfig config_from(const std::string& path, int threads_flag) {
    TrainConfig cfg = path.empty() ? TrainConfig{} : TrainConfig::from_file(path);
    if (threads_flag > 0) cfg.threads = threads_flag;
    if (cfg.threads <= 0) cfg.threads = default_thread_count();
    return cfg;
}

std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw DataError("size must be HxW, e.g. 100x100");
    const int h = std::stoi(s.substr(0, x));
    const int w = std::stoi(s.substr(x + 1));
    if (h <= 0 || w <= 0) throw DataError("size must be positive");
    return {h, w};
}

std::vector<RgbImage> dataset_images(const std::string& dir) {
    IngestResult in = ingest_dataset(dir);
    for (const std::string& s : in.skipped) std::cerr << "warning: skipped " << s << "\n";
    if (in.images.empty()) throw DataError("no usable images in " + dir);
    std::vector<RgbImage> images;
    images.reserve(in.images.size());
    for (auto& e : in.images) images.push_back(std::move(e.image));
    return images;
}

int run(int argc, char** argv) {
    CLI::App app{"channel-by-channel Bayer demosaicking lab"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "worker threads (default: CBCD_THREADS env or hardware)");

    // mosaic: RGB -> CFA
    auto* cmd_mosaic = app.add_subcommand("mosaic", "subsample an RGB image through the CFA");
    std::string m_in, m_out, m_layout = "rggb";
    cmd_mosaic->add_option("--in", m_in, "input RGB image (png/ppm)")->required();
    cmd_mosaic->add_option("--out", m_out, "output CFA (pgm)")->required();
    cmd_mosaic->add_option("--layout", m_layout, "Bayer layout (rggb/grbg/gbrg/bggr)");

    // init: CFA -> HQLI planes
    auto* cmd_init = app.add_subcommand("init", "linear initialization of a CFA image");
    std::string i_in, i_prefix;
    bool i_clip = false;
    cmd_init->add_option("--in", i_in, "input CFA (pgm)")->required();
    cmd_init->add_option("--out-prefix", i_prefix, "prefix for <prefix>{r0,g0,b0,rgb}.png")
        ->required();
    cmd_init->add_flag("--clip", i_clip, "clip the planes to [0,255] before export");

    // demosaic
    auto* cmd_demosaic = app.add_subcommand("demosaic", "full reconstruction of a CFA image");
    std::string d_in, d_out, d_model, d_simulate;
    cmd_demosaic->add_option("--in", d_in, "input CFA (pgm), or RGB with --simulate")->required();
    cmd_demosaic->add_option("--out", d_out, "output RGB image (png/ppm)")->required();
    cmd_demosaic->add_option("--model", d_model, "model file (omit for the zero baseline)");
    cmd_demosaic->add_option("--simulate", d_simulate,
                             "treat --in as ground-truth RGB and mosaic it with this layout");

    // train
    auto* cmd_train = app.add_subcommand("train", "train one sub-network");
    std::string t_target, t_config, t_data, t_model, t_spec, t_layout = "rggb", t_trace, t_state;
    cmd_train->add_option("--target", t_target, "g, gr or gb")->required();
    cmd_train->add_option("--data", t_data, "directory of training images")->required();
    cmd_train->add_option("--model", t_model, "model file to create or update")->required();
    cmd_train->add_option("--config", t_config, "key=value training config");
    cmd_train->add_option("--spec", t_spec, "architecture config (default: shipped architecture)");
    cmd_train->add_option("--layout", t_layout, "Bayer layout for simulation");
    cmd_train->add_option("--trace", t_trace, "write per-epoch loss CSV here");
    cmd_train->add_option("--state", t_state, "write the optimizer-state sidecar here");

    // search
    auto* cmd_search = app.add_subcommand("search", "progressive architecture search");
    std::string s_target, s_data, s_out, s_trace, s_config, s_layout = "rggb";
    int s_epochs = 2;
    long long s_budget = 600000;
    int s_max_depth = 40;
    std::vector<int> s_widths{32, 64, 128};
    cmd_search->add_option("--target", s_target, "g, gr or gb")->required();
    cmd_search->add_option("--data", s_data, "directory of training images")->required();
    cmd_search->add_option("--out", s_out, "write the winning spec config here")->required();
    cmd_search->add_option("--trace", s_trace, "write the candidate trace CSV here");
    cmd_search->add_option("--config", s_config, "key=value training config for the oracle");
    cmd_search->add_option("--epochs", s_epochs, "oracle training epochs per candidate");
    cmd_search->add_option("--budget-params", s_budget, "parameter budget per sub-network");
    cmd_search->add_option("--max-depth", s_max_depth, "depth bound");
    cmd_search->add_option("--widths", s_widths, "candidate widths");
    cmd_search->add_option("--layout", s_layout, "Bayer layout for simulation");

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "benchmark a model over a dataset");
    std::string e_data, e_model, e_out, e_layout = "rggb";
    int e_crop = 0;
    std::uint64_t e_seed = 0;
    cmd_eval->add_option("--data", e_data, "directory of ground-truth images")->required();
    cmd_eval->add_option("--model", e_model, "model file (omit for the zero baseline)");
    cmd_eval->add_option("--out", e_out, "write the CSV report here");
    cmd_eval->add_option("--layout", e_layout, "Bayer layout for simulation");
    cmd_eval->add_option("--crop", e_crop, "border pixels ignored by the metrics");
    cmd_eval->add_option("--seed", e_seed, "fingerprint seed");

    // report
    auto* cmd_report = app.add_subcommand("report", "parameter and FLOP accounting");
    std::string r_model, r_size = "100x100";
    cmd_report->add_option("--model", r_model, "model file (omit for the shipped architectures)");
    cmd_report->add_option("--size", r_size, "image size HxW for the FLOP convention");

    // create-model
    auto* cmd_create = app.add_subcommand("create-model", "write a fresh model file");
    std::string c_out;
    std::uint64_t c_seed = 0;
    bool c_random = false;
    cmd_create->add_option("--out", c_out, "output model file")->required();
    cmd_create->add_flag("--random", c_random, "fan-in-scaled random weights instead of zeros");
    cmd_create->add_option("--seed", c_seed, "seed for --random");

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic desk-scale dataset");
    std::string y_out, y_size = "100x100";
    int y_count = 12;
    std::uint64_t y_seed = 1;
    cmd_synth->add_option("--out", y_out, "output directory")->required();
    cmd_synth->add_option("--count", y_count, "number of images");
    cmd_synth->add_option("--size", y_size, "image size HxW");
    cmd_synth->add_option("--seed", y_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
    }
    if (threads <= 0) threads = default_thread_count();

    if (*cmd_mosaic) {
        const RgbImage img = read_rgb(m_in);
        write_cfa_pgm(m_out, mosaic(img, layout_from_string(m_layout)));
        return 0;
    }

    if (*cmd_init) {
        const MosaicImage m = read_cfa_pgm(i_in);
        HqliOptions opts;
        opts.clip_output = i_clip;
        const InitPlanes planes = hqli(m, opts);
        RgbImage tmp(m.cfa.height, m.cfa.width);
        auto write_plane = [&](const PlaneImage& p, const std::string& tag) {
            tmp.r = p;
            tmp.g = p;
            tmp.b = p;
            write_png(i_prefix + tag + ".png", tmp);
        };
        write_plane(planes.r0, "r0");
        write_plane(planes.g0, "g0");
        write_plane(planes.b0, "b0");
        tmp.r = planes.r0;
        tmp.g = planes.g0;
        tmp.b = planes.b0;
        write_png(i_prefix + "rgb.png", tmp);
        return 0;
    }

    if (*cmd_demosaic) {
        MosaicImage m;
        if (!d_simulate.empty())
            m = mosaic(read_rgb(d_in), layout_from_string(d_simulate));
        else
            m = read_cfa_pgm(d_in);
        const DemosaicModel model = load_or_default(d_model);
        DemosaicOptions opts;
        opts.threads = threads;
        write_rgb(d_out, demosaic(m, model, opts));
        return 0;
    }

    if (*cmd_train) {
        const Subnet target = subnet_from_string(t_target);
        const TrainConfig cfg = config_from(t_config, threads);
        const NetworkSpec spec = t_spec.empty() ? default_spec(target) : read_spec_config(t_spec);
        if (spec.name != target) throw DataError("spec config is for a different target");

        const Dataset ds =
            build_dataset(dataset_images(t_data), target, layout_from_string(t_layout), cfg);
        std::cout << "dataset: " << ds.train.size() << " train / " << ds.val.size()
                  << " validation examples\n";

        Rng rng(cfg.seed);
        const TrainResult result = train(spec, ds, default_loss(target), cfg,
                                         init_weights(spec, rng), [](const EpochTrace& t) {
                                             std::cout << "epoch " << t.epoch << " lr " << t.lr
                                                       << " train " << t.train_loss << " val "
                                                       << t.val_loss << "\n";
                                         });

        DemosaicModel model =
            fs::exists(t_model) ? load_model(t_model) : DemosaicModel::zero_default();
        model.set(target, spec, result.weights);
        save_model(t_model, model);
        if (!t_trace.empty()) write_trace_csv(t_trace, result.trace);
        if (!t_state.empty()) save_optimizer_state(t_state, result.opt);
        std::cout << "wrote " << t_model << "\n";
        return 0;
    }

    if (*cmd_search) {
        const Subnet target = subnet_from_string(s_target);
        TrainConfig cfg = config_from(s_config, threads);
        cfg.epochs = s_epochs;
        SearchBudget budget;
        budget.max_params = s_budget;
        budget.max_depth = s_max_depth;
        budget.widths = s_widths;

        const Dataset ds =
            build_dataset(dataset_images(s_data), target, layout_from_string(s_layout), cfg);
        std::cout << "dataset: " << ds.train.size() << " train / " << ds.val.size()
                  << " validation examples\n";

        int candidate = 0;
        const ValidationOracle oracle = [&](const NetworkSpec& cand) {
            Rng rng(cfg.seed + 1000 + candidate++);
            const TrainResult r =
                train(cand, ds, default_loss(target), cfg, init_weights(cand, rng));
            const double err = r.trace.back().val_loss;
            std::cout << "candidate width " << cand.width << " depth " << cand.depth()
                      << " params " << count_params(cand) << " val " << err << "\n";
            return err;
        };
        const SearchResult result = progressive_search(target, budget, oracle);
        write_spec_config(s_out, result.best);
        if (!s_trace.empty()) write_search_trace_csv(s_trace, result.trace);
        std::cout << "winner: width " << result.chosen_width << " depth " << result.chosen_depth
                  << " params " << result.chosen_params << " -> " << s_out << "\n";
        return 0;
    }

    if (*cmd_eval) {
        const IngestResult in = ingest_dataset(e_data);
        for (const std::string& s : in.skipped) std::cerr << "warning: skipped " << s << "\n";
        const DemosaicModel model = load_or_default(e_model);
        EvalOptions opts;
        opts.layout = layout_from_string(e_layout);
        opts.crop = e_crop;
        opts.threads = threads;
        opts.seed = e_seed;
        const BenchmarkReport report = evaluate_dataset(in.images, model, opts);
        std::cout << format_report_table(report);
        if (!e_out.empty()) write_report_csv(e_out, report);
        return 0;
    }

    if (*cmd_report) {
        const DemosaicModel model = load_or_default(r_model);
        const auto [h, w] = parse_size(r_size);
        const long long pg = count_params(model.spec_g);
        const long long pgr = count_params(model.spec_gr);
        const long long pgb = count_params(model.spec_gb);
        const long long fg = count_flops(model.spec_g, h, w);
        const long long fgr = count_flops(model.spec_gr, h, w);
        const long long fgb = count_flops(model.spec_gb, h, w);
        std::printf("network  params   flops@%dx%d\n", h, w);
        std::printf("g        %-8lld %.5g\n", pg, static_cast<double>(fg));
        std::printf("gr       %-8lld %.5g\n", pgr, static_cast<double>(fgr));
        std::printf("gb       %-8lld %.5g\n", pgb, static_cast<double>(fgb));
        std::printf("total    %-8lld %.5g\n", pg + pgr + pgb,
                    static_cast<double>(fg + fgr + fgb));
        return 0;
    }

    if (*cmd_create) {
        DemosaicModel model = DemosaicModel::zero_default();
        if (c_random) {
            Rng rng(c_seed);
            model.w_g = init_weights(model.spec_g, rng);
            model.w_gr = init_weights(model.spec_gr, rng);
            model.w_gb = init_weights(model.spec_gb, rng);
        }
        save_model(c_out, model);
        std::cout << "wrote " << c_out << "\n";
        return 0;
    }

    if (*cmd_synth) {
        const auto [h, w] = parse_size(y_size);
        fs::create_directories(y_out);
        const auto images = synthetic_dataset(y_count, h, w, y_seed);
        for (int i = 0; i < y_count; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "synth_%03d.png", i);
            write_png((fs::path(y_out) / name).string(), images[i]);
        }
        std::cout << "wrote " << y_count << " images to " << y_out << "\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
