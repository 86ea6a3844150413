// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cbcd/image_io.hpp"

using namespace cbcd;
namespace fs = std::filesystem;

namespace {

const std::string cli = CBCD_CLI_PATH;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
    const int rc = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

int run_capture(const std::string& args, const fs::path& out) {
    const int rc = std::system((cli + " " + args + " > " + out.string() + " 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("report prints the parameter and FLOP accounting") {
    TempDir dir("cbcd_cli_report");
    const fs::path out = dir.path / "report.txt";
    REQUIRE(run_capture("report --size 100x100", out) == 0);
    const std::string text = slurp(out);
    for (const char* needle : {"277632", "314208", "332640", "924480", "9.2448e+09"})
        CHECK(text.find(needle) != std::string::npos);
}

TEST_CASE("mosaic then demosaic with the zero baseline is the identity on a gray image") {
    TempDir dir("cbcd_cli_identity");
    RgbImage img(16, 16);
    for (auto* p : {&img.r, &img.g, &img.b}) std::fill(p->data.begin(), p->data.end(), 77.0);
    const fs::path truth = dir.path / "truth.png";
    write_png(truth.string(), img);

    const fs::path cfa = dir.path / "cfa.pgm";
    const fs::path out = dir.path / "out.png";
    REQUIRE(run("mosaic --in " + truth.string() + " --out " + cfa.string() + " --layout rggb") ==
            0);
    REQUIRE(run("demosaic --in " + cfa.string() + " --out " + out.string()) == 0);
    const RgbImage got = read_png(out.string());
    CHECK(got.r.data == img.r.data);
    CHECK(got.g.data == img.g.data);
    CHECK(got.b.data == img.b.data);
}

TEST_CASE("synth, simulate-demosaic and eval produce a per-image report") {
    TempDir dir("cbcd_cli_eval");
    const fs::path data = dir.path / "data";
    REQUIRE(run("synth --out " + data.string() + " --count 4 --size 32x32 --seed 5") == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(data)) files += e.is_regular_file();
    CHECK(files == 4);

    // single-image reconstruction from simulated mosaicking
    const fs::path one_out = dir.path / "rec.png";
    REQUIRE(run("demosaic --in " + (data / "synth_000.png").string() + " --simulate rggb --out " +
                one_out.string()) == 0);
    CHECK(fs::exists(one_out));

    const fs::path csv = dir.path / "report.csv";
    const fs::path table = dir.path / "table.txt";
    REQUIRE(run_capture(
                "eval --data " + data.string() + " --out " + csv.string() + " --layout rggb",
                table) == 0);
    const std::string text = slurp(csv);
    CHECK(text.find("image,psnr_r,psnr_g,psnr_b,cpsnr") != std::string::npos);
    CHECK(text.find("synth_000.png") != std::string::npos);
    CHECK(text.find("synth_003.png") != std::string::npos);
    CHECK(text.find("mean,") != std::string::npos);
    CHECK(slurp(table).find("parameters: g=277632") != std::string::npos);

    // equal fingerprints give identical CSVs
    const fs::path csv2 = dir.path / "report2.csv";
    REQUIRE(run("eval --data " + data.string() + " --out " + csv2.string() + " --layout rggb") ==
            0);
    CHECK(slurp(csv) == slurp(csv2));
}

TEST_CASE("init writes the four initialization images") {
    TempDir dir("cbcd_cli_init");
    Rng rng(3);
    RgbImage img(12, 12);
    for (auto* p : {&img.r, &img.g, &img.b})
        for (double& v : p->data) v = static_cast<double>(rng.below(256));
    const fs::path truth = dir.path / "t.png";
    write_png(truth.string(), img);
    const fs::path cfa = dir.path / "t.pgm";
    REQUIRE(run("mosaic --in " + truth.string() + " --out " + cfa.string() + " --layout gbrg") ==
            0);
    REQUIRE(run("init --in " + cfa.string() + " --out-prefix " + (dir.path / "i_").string()) == 0);
    for (const char* tag : {"r0", "g0", "b0", "rgb"})
        CHECK(fs::exists(dir.path / (std::string("i_") + tag + ".png")));
}

TEST_CASE("train and search run end to end at desk scale") {
    TempDir dir("cbcd_cli_train");
    const fs::path data = dir.path / "data";
    REQUIRE(run("synth --out " + data.string() + " --count 6 --size 60x60 --seed 9") == 0);

    const fs::path cfgfile = dir.path / "train.cfg";
    std::ofstream cfg(cfgfile);
    cfg << "epochs=1\nbatch_size=8\npatch_size=30\ndiscard=1\nseed=4\n";
    cfg.close();

    const fs::path specfile = dir.path / "tiny.cfg";
    std::ofstream spec(specfile);
    spec << "name=g\nwidth=8\ndepth=4\ndilation=1\n";
    spec.close();

    const fs::path model = dir.path / "m.cbcd";
    const fs::path trace = dir.path / "trace.csv";
    const fs::path state = dir.path / "m.state";
    REQUIRE(run("train --target g --data " + data.string() + " --model " + model.string() +
                " --config " + cfgfile.string() + " --spec " + specfile.string() + " --trace " +
                trace.string() + " --state " + state.string() + " --threads 2") == 0);
    CHECK(fs::exists(model));
    CHECK(fs::exists(state));
    CHECK(slurp(trace).find("epoch,lr,train_loss,val_loss") != std::string::npos);

    // the updated model still demosaics
    const fs::path rec = dir.path / "rec.png";
    REQUIRE(run("demosaic --in " + (data / "synth_000.png").string() +
                " --simulate rggb --model " + model.string() + " --out " + rec.string()) == 0);

    // search with a tiny budget and width set
    const fs::path won = dir.path / "won.cfg";
    REQUIRE(run("search --target g --data " + data.string() + " --out " + won.string() +
                " --config " + cfgfile.string() +
                " --epochs 1 --widths 4 --max-depth 6 --threads 2") == 0);
    CHECK(slurp(won).find("name=g") != std::string::npos);
}

TEST_CASE("exit codes: usage 1, data errors 2") {
    TempDir dir("cbcd_cli_exit");
    CHECK(run("definitely-not-a-subcommand") == 1);
    CHECK(run("mosaic --nonsense") == 1);
    CHECK(run("mosaic --in /nope.png --out " + (dir.path / "x.pgm").string()) == 2);
    // malformed model file
    const fs::path bad = dir.path / "bad.cbcd";
    std::ofstream out(bad, std::ios::binary);
    out << "JUNKJUNKJUNK";
    out.close();
    CHECK(run("report --model " + bad.string()) == 2);
}
