// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cbcd/image_io.hpp"

namespace cbcd {

namespace fs = std::filesystem;

IngestResult ingest_dataset(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".ppm" || ext == ".PNG" || ext == ".PPM")
            names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());

    IngestResult out;
    for (const std::string& name : names) {
        try {
            RgbImage img = read_rgb((fs::path(dir) / name).string());
            if (img.height() < 5 || img.width() < 5) {
                out.skipped.push_back(name + ": smaller than 5x5");
                continue;
            }
            out.images.push_back({name, std::move(img)});
        } catch (const std::exception& e) {
            out.skipped.push_back(name + ": " + e.what());
        }
    }
    return out;
}

namespace {

struct MeanAccum {
    double sum = 0.0;
    int n = 0;
    int dropped = 0;
    void add(double v) {
        if (std::isinf(v)) {
            ++dropped;
            return;
        }
        sum += v;
        ++n;
    }
    double mean() const { return n > 0 ? sum / n : std::numeric_limits<double>::infinity(); }
};

}  // namespace

BenchmarkReport evaluate_dataset(const std::vector<DatasetEntry>& images,
                                 const DemosaicModel& model, const EvalOptions& opts) {
    if (images.empty()) throw DataError("evaluate_dataset: no images to evaluate");

    BenchmarkReport report;
    report.rows.resize(images.size());

    std::vector<MosaicImage> mosaics(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        mosaics[i] = mosaic(images[i].image, opts.layout);
    BatchResult batch = demosaic_batch(mosaics, model, opts.threads);
    report.timing = batch.timing;

    MeanAccum mr, mg, mb, mc;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!batch.errors[i].empty())
            throw DataError("demosaic failed on " + images[i].filename + ": " + batch.errors[i]);
        ImageScore& row = report.rows[i];
        row.filename = images[i].filename;
        row.psnr = psnr_report(images[i].image, batch.images[i], opts.crop);
        mr.add(row.psnr.r);
        mg.add(row.psnr.g);
        mb.add(row.psnr.b);
        mc.add(row.psnr.cpsnr);
    }
    report.mean = {mr.mean(), mg.mean(), mb.mean(), mc.mean()};
    report.mean.cpsnr = mc.mean();
    report.excluded_infinite = mr.dropped + mg.dropped + mb.dropped + mc.dropped;

    // Parameter counts are recomputed from the loaded model, never trusted
    // from metadata.
    report.params_g = count_params(model.spec_g);
    report.params_gr = count_params(model.spec_gr);
    report.params_gb = count_params(model.spec_gb);
    report.params_total = report.params_g + report.params_gr + report.params_gb;
    report.flops_total = count_flops(model.spec_g, report.flops_height, report.flops_width) +
                         count_flops(model.spec_gr, report.flops_height, report.flops_width) +
                         count_flops(model.spec_gb, report.flops_height, report.flops_width);

    std::ostringstream fp;
    fp << "layout=" << to_string(opts.layout) << ";crop=" << opts.crop << ";seed=" << opts.seed
       << ";format=1;images=" << images.size();
    report.fingerprint = fp.str();
    return report;
}

namespace {

void put_psnr(std::ostream& out, double v) {
    if (std::isinf(v))
        out << "inf";
    else
        out << v;
}

}  // namespace

void write_report_csv(const std::string& path, const BenchmarkReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << "# fingerprint: " << report.fingerprint << "\n";
    out << "image,psnr_r,psnr_g,psnr_b,cpsnr\n";
    out << std::setprecision(17);
    for (const ImageScore& row : report.rows) {
        out << row.filename << ",";
        put_psnr(out, row.psnr.r);
        out << ",";
        put_psnr(out, row.psnr.g);
        out << ",";
        put_psnr(out, row.psnr.b);
        out << ",";
        put_psnr(out, row.psnr.cpsnr);
        out << "\n";
    }
    out << "mean,";
    put_psnr(out, report.mean.r);
    out << ",";
    put_psnr(out, report.mean.g);
    out << ",";
    put_psnr(out, report.mean.b);
    out << ",";
    put_psnr(out, report.mean.cpsnr);
    out << "\n";
}

std::string format_report_table(const BenchmarkReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << std::setw(28) << std::left << "image" << std::right << std::setw(9) << "R"
        << std::setw(9) << "G" << std::setw(9) << "B" << std::setw(9) << "CPSNR" << "\n";
    auto line = [&](const std::string& name, const ChannelPsnr& p) {
        auto cell = [&](double v) {
            std::ostringstream c;
            if (std::isinf(v))
                c << "inf";
            else
                c << std::fixed << std::setprecision(2) << v;
            return c.str();
        };
        out << std::setw(28) << std::left << name << std::right << std::setw(9) << cell(p.r)
            << std::setw(9) << cell(p.g) << std::setw(9) << cell(p.b) << std::setw(9)
            << cell(p.cpsnr) << "\n";
    };
    for (const ImageScore& row : report.rows) line(row.filename, row.psnr);
    line("mean", report.mean);
    if (report.excluded_infinite > 0)
        out << "warning: " << report.excluded_infinite
            << " infinite per-image PSNR value(s) excluded from the mean\n";
    out << "\n";
    out << "parameters: g=" << report.params_g << " gr=" << report.params_gr
        << " gb=" << report.params_gb << " total=" << report.params_total << "\n";
    out << "flops @" << report.flops_height << "x" << report.flops_width << ": "
        << static_cast<double>(report.flops_total) << "\n";
    out << "wall time: total=" << report.timing.total_seconds
        << "s g=" << report.timing.net_g_seconds << "s gr=" << report.timing.net_gr_seconds
        << "s gb=" << report.timing.net_gb_seconds << "s\n";
    out << "fingerprint: " << report.fingerprint << "\n";
    return out.str();
}

RgbImage synthetic_image(int height, int width, std::uint64_t seed, std::size_t index) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + index + 1);
    RgbImage img(height, width);
    const int kind = static_cast<int>(index % 3);
    if (kind == 0) {
        // linear gradient between two random colors, random orientation
        const double c0[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
        const double c1[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const double dy = std::sin(ang), dx = std::cos(ang);
        const double span = std::abs(dy) * height + std::abs(dx) * width + 1e-9;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double t = (dy * y + dx * x) / span;
                t = 0.5 + t;  // roughly [0,1] over the image
                t = std::clamp(t, 0.0, 1.0);
                img.r.at(y, x) = c0[0] + t * (c1[0] - c0[0]);
                img.g.at(y, x) = c0[1] + t * (c1[1] - c0[1]);
                img.b.at(y, x) = c0[2] + t * (c1[2] - c0[2]);
            }
    } else if (kind == 1) {
        // checkerboard with a small cell, two random colors
        const int cell = 1 + static_cast<int>(rng.below(3));
        const double c0[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
        const double c1[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const bool on = ((y / cell) + (x / cell)) % 2 == 0;
                img.r.at(y, x) = on ? c0[0] : c1[0];
                img.g.at(y, x) = on ? c0[1] : c1[1];
                img.b.at(y, x) = on ? c0[2] : c1[2];
            }
    } else {
        // sum of a few random sinusoidal gratings per channel around a base
        const int ngrates = 3;
        double base[3] = {rng.uniform(60, 200), rng.uniform(60, 200), rng.uniform(60, 200)};
        double fy[ngrates], fx[ngrates], ph[ngrates], amp[ngrates];
        for (int k = 0; k < ngrates; ++k) {
            fy[k] = rng.uniform(-0.9, 0.9) * M_PI;
            fx[k] = rng.uniform(-0.9, 0.9) * M_PI;
            ph[k] = rng.uniform(0.0, 2.0 * M_PI);
            amp[k] = rng.uniform(10.0, 45.0);
        }
        const double chroma[3] = {rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0),
                                  rng.uniform(0.4, 1.0)};
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double s = 0.0;
                for (int k = 0; k < ngrates; ++k) s += amp[k] * std::sin(fy[k] * y + fx[k] * x + ph[k]);
                img.r.at(y, x) = std::clamp(base[0] + chroma[0] * s, 0.0, 255.0);
                img.g.at(y, x) = std::clamp(base[1] + chroma[1] * s, 0.0, 255.0);
                img.b.at(y, x) = std::clamp(base[2] + chroma[2] * s, 0.0, 255.0);
            }
    }
    return img;
}

std::vector<RgbImage> synthetic_dataset(int count, int height, int width, std::uint64_t seed) {
    std::vector<RgbImage> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(synthetic_image(height, width, seed, static_cast<std::size_t>(i)));
    return out;
}

}  // namespace cbcd
