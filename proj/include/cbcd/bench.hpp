// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cbcd/pipeline.hpp"

namespace cbcd {

struct DatasetEntry {
    std::string filename;  // basename, lexicographic order
    RgbImage image;
};

struct IngestResult {
    std::vector<DatasetEntry> images;
    std::vector<std::string> skipped;  // unreadable/undersized files, with reason
};

/// Loads every PNG/PPM in a directory in lexicographic filename order.
/// Unreadable files and images smaller than 5x5 are skipped with a warning
/// recorded in the manifest.
IngestResult ingest_dataset(const std::string& dir);

struct ImageScore {
    std::string filename;
    ChannelPsnr psnr;
};

struct BenchmarkReport {
    std::vector<ImageScore> rows;
    ChannelPsnr mean;                   // per-image mean, infinities excluded
    int excluded_infinite = 0;          // channels dropped from some mean
    long long params_g = 0, params_gr = 0, params_gb = 0, params_total = 0;
    int flops_height = 100, flops_width = 100;
    long long flops_total = 0;
    BatchTiming timing;
    std::string fingerprint;            // seed/version/flags; identical runs match
};

struct EvalOptions {
    BayerLayout layout = BayerLayout::RGGB;
    int crop = 0;
    int threads = 1;
    std::uint64_t seed = 0;  // recorded in the fingerprint only
};

/// Mosaics each ground-truth image, demosaics it with the model, and scores
/// the result. The dataset mean averages per-image PSNRs (not pooled MSE);
/// infinite per-image values are excluded from the mean with a count.
BenchmarkReport evaluate_dataset(const std::vector<DatasetEntry>& images,
                                 const DemosaicModel& model, const EvalOptions& opts);

/// Machine-readable CSV: fingerprint comment, header, one row per image,
/// final mean row. Timings are deliberately omitted so equal fingerprints
/// produce byte-identical files.
void write_report_csv(const std::string& path, const BenchmarkReport& report);

/// Human-readable table mirroring the per-channel columns, plus parameter,
/// FLOP and timing summaries.
std::string format_report_table(const BenchmarkReport& report);

enum class SyntheticKind { Gradient, Checker, Texture };

/// Deterministic desk-scale test images: linear color gradients,
/// checkerboards with small cells, and smooth random textures with
/// sinusoidal detail. Kind cycles with the index.
RgbImage synthetic_image(int height, int width, std::uint64_t seed, std::size_t index);

std::vector<RgbImage> synthetic_dataset(int count, int height, int width, std::uint64_t seed);

}  // namespace cbcd
