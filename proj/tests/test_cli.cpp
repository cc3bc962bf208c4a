#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cli/commands.hpp"
#include "data/manifest.hpp"
#include "data/loader.hpp"
#include "io/imageio.hpp"
#include "metrics/report.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace tamp;
using namespace tamp::testing;
using nlohmann::json;

namespace {

cli::BuildDatasetOptions tiny_dataset_opts(const std::string& out, uint64_t seed = 3) {
    cli::BuildDatasetOptions opts;
    opts.out_dir = out;
    opts.synthetic = true;
    opts.subset = 0.002;
    opts.resolution = 16;
    opts.seed = seed;
    return opts;
}

std::string train_tiny_checkpoint(const std::string& manifest, const std::string& out_dir) {
    cli::TrainOptions t;
    t.train_manifest = manifest;
    t.val_manifest = manifest;
    t.out_dir = out_dir;
    t.resolution = 16;
    t.base_channels = 8;
    t.depth = 2;
    t.overfit_one = true;
    t.steps = 4;
    t.seed = 21;
    REQUIRE(cli::cmd_train(t) == 0);
    return (fs::path(out_dir) / "best.ckpt").string();
}

json read_json(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    json j;
    f >> j;
    return j;
}

}  // namespace

TEST_CASE("build-dataset: synthetic subset has balanced bins and reruns byte-identically") {
    ScopedTempDir a("bd_a"), b("bd_b");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(a.str())) == 0);
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(b.str())) == 0);

    for (const char* split : {"train", "val", "test"}) {
        const std::string name = "manifest_" + std::string(split) + ".json";
        const DatasetManifest m = DatasetManifest::load((a.path() / name).string());
        int lo = 1 << 30, hi = 0;
        for (const auto& [bin, n] : m.bin_counts) {
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        CHECK(hi - lo <= 1);
        CHECK(m.bin_counts.size() == 4);
        // relative paths make same-seed builds byte-identical across directories
        CHECK(read_file_bytes(a.path() / name) == read_file_bytes(b.path() / name));
    }
    CHECK(fs::exists(a.path() / "run_config.json"));
}

TEST_CASE("build-dataset: missing sources without --synthetic fails with a diagnostic") {
    unsetenv("TAMP_DATA_ROOT");
    ScopedTempDir dir("bd_err");
    cli::BuildDatasetOptions opts;
    opts.out_dir = dir.str();
    CHECK(cli::cmd_build_dataset(opts) != 0);

    opts.image_root = (dir.path() / "does_not_exist").string();
    opts.mask_root = (dir.path() / "also_missing").string();
    CHECK(cli::cmd_build_dataset(opts) != 0);
}

TEST_CASE("train: invalid weights are rejected before any work") {
    ScopedTempDir data("tr_err");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(data.str())) == 0);
    cli::TrainOptions t;
    t.train_manifest = (data.path() / "manifest_train.json").string();
    t.out_dir = (data.path() / "run").string();
    t.resolution = 16;
    t.base_channels = 8;
    t.depth = 2;
    t.lambda_gan = -0.5f;
    CHECK(cli::cmd_train(t) == 2);
}

TEST_CASE("sample: mode contracts and output integrity") {
    ScopedTempDir data("sp");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(data.str())) == 0);
    const std::string manifest = (data.path() / "manifest_test.json").string();

    cli::SampleOptions s;
    s.manifest = manifest;
    s.out_dir = (data.path() / "out_ddnm").string();
    s.mode = "ddnm";
    s.steps = 4;
    s.limit = 1;
    s.seed = 9;
    CHECK(cli::cmd_sample(s) == 0);  // no checkpoint needed
    CHECK(fs::exists(fs::path(s.out_dir) / output_image_name(0, 0)));
    CHECK(fs::exists(fs::path(s.out_dir) / "rec_00000_grid.jpg"));
    CHECK(fs::exists(fs::path(s.out_dir) / "run_config.json"));

    // outputs decode to finite values in range
    Tensor img = read_image_rgb((fs::path(s.out_dir) / output_image_name(0, 0)).string());
    CHECK(img.all_finite());
    CHECK(img.min_value() >= 0.0f);
    CHECK(img.max_value() <= 1.0f);

    s.mode = "indite-diff";
    s.out_dir = (data.path() / "out_fail").string();
    CHECK(cli::cmd_sample(s) == 2);  // checkpoint required

    const std::string ckpt = train_tiny_checkpoint(manifest, (data.path() / "train").string());
    s.checkpoint = ckpt;
    s.out_dir = (data.path() / "out_indite").string();
    s.trace = true;
    CHECK(cli::cmd_sample(s) == 0);
    CHECK(fs::exists(fs::path(s.out_dir) / "trace.jsonl"));
}

TEST_CASE("sample: reruns are bitwise identical") {
    ScopedTempDir data("sp_det");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(data.str())) == 0);
    cli::SampleOptions s;
    s.manifest = (data.path() / "manifest_test.json").string();
    s.mode = "ddnm-interact";
    s.steps = 4;
    s.limit = 1;
    s.seed = 13;

    s.out_dir = (data.path() / "o1").string();
    REQUIRE(cli::cmd_sample(s) == 0);
    s.out_dir = (data.path() / "o2").string();
    REQUIRE(cli::cmd_sample(s) == 0);
    CHECK(read_file_bytes(data.path() / "o1" / output_image_name(0, 0)) ==
          read_file_bytes(data.path() / "o2" / output_image_name(0, 0)));
    CHECK(read_file_bytes(data.path() / "o1" / output_image_name(0, 1)) ==
          read_file_bytes(data.path() / "o2" / output_image_name(0, 1)));
}

TEST_CASE("evaluate: ground-truth copies yield the perfect-score table") {
    ScopedTempDir data("ev");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(data.str())) == 0);
    const std::string manifest_path = (data.path() / "manifest_test.json").string();
    const DatasetManifest manifest = DatasetManifest::load(manifest_path);

    PreprocessSpec prep;
    prep.resolution = manifest.resolution;
    prep.mode = TaskMode::kTvDuo;
    const fs::path outputs = data.path() / "outputs";
    fs::create_directories(outputs);
    for (size_t i = 0; i < manifest.records.size(); ++i) {
        const ScenePair pair = load_sample(manifest.records[i], prep);
        write_ppm((outputs / output_image_name(i, 0)).string(), pair.gt_1);
        write_ppm((outputs / output_image_name(i, 1)).string(), pair.gt_2);
    }

    cli::EvaluateOptions e;
    e.manifest = manifest_path;
    e.outputs_dir = outputs.string();
    e.report_dir = (data.path() / "report").string();
    REQUIRE(cli::cmd_evaluate(e) == 0);

    const json report = read_json(data.path() / "report" / "report.json");
    REQUIRE(report.at("bins").size() == 4);
    for (const auto& bin : report.at("bins")) {
        for (const char* branch : {"image_1", "image_2"}) {
            REQUIRE(bin.contains(branch));
            CHECK(bin.at(branch).at("psnr").get<double>() == 100.0);
            CHECK(bin.at(branch).at("ssim").get<double>() == doctest::Approx(1.0));
            CHECK(bin.at(branch).at("l1").get<double>() == 0.0);
            CHECK(bin.at(branch).at("pct").get<double>() == 0.0);
        }
    }

    // missing outputs directory is an error
    e.outputs_dir = (data.path() / "nothing").string();
    e.report_dir = (data.path() / "report2").string();
    CHECK(cli::cmd_evaluate(e) != 0);
}

TEST_CASE("evaluate: tvRef reports only the damaged target branch") {
    ScopedTempDir data("ev_ref");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(data.str())) == 0);
    const std::string manifest_path = (data.path() / "manifest_test.json").string();
    const DatasetManifest manifest = DatasetManifest::load(manifest_path);

    PreprocessSpec prep;
    prep.resolution = manifest.resolution;
    prep.mode = TaskMode::kTvRef;
    const fs::path outputs = data.path() / "outputs";
    fs::create_directories(outputs);
    for (size_t i = 0; i < manifest.records.size(); ++i) {
        const ScenePair pair = load_sample(manifest.records[i], prep);
        write_ppm((outputs / output_image_name(i, 1)).string(), pair.gt_2);
    }
    cli::EvaluateOptions e;
    e.manifest = manifest_path;
    e.outputs_dir = outputs.string();
    e.report_dir = (data.path() / "report").string();
    e.task = "tvRef";
    REQUIRE(cli::cmd_evaluate(e) == 0);
    const json report = read_json(data.path() / "report" / "report.json");
    for (const auto& bin : report.at("bins")) {
        CHECK_FALSE(bin.contains("image_1"));
        CHECK(bin.at("image_2").at("psnr").get<double>() == 100.0);
    }
}

TEST_CASE("ablate: five rows; guidance toggles the interact row") {
    ScopedTempDir data("ab");
    REQUIRE(cli::cmd_build_dataset(tiny_dataset_opts(data.str())) == 0);
    const std::string manifest = (data.path() / "manifest_test.json").string();
    const std::string ckpt = train_tiny_checkpoint(manifest, (data.path() / "train").string());

    cli::AblateOptions a;
    a.manifest = manifest;
    a.checkpoint = ckpt;
    a.out_dir = (data.path() / "ablate").string();
    a.steps = 4;
    a.limit = 1;
    a.seed = 17;
    a.omega = 0.5f;
    REQUIRE(cli::cmd_ablate(a) == 0);

    const json report = read_json(data.path() / "ablate" / "ablate_report.json");
    REQUIRE(report.at("rows").size() == 5);
    const std::vector<std::string> expected = {"DDNM", "DDNM-Interact", "InDiTE", "InDiTE-DDNM",
                                               "InDiTE-Diff"};
    for (size_t i = 0; i < expected.size(); ++i)
        CHECK(report.at("rows")[i].at("variant").get<std::string>() == expected[i]);

    // omega > 0: the two raw-input variants diverge
    CHECK(read_file_bytes(data.path() / "ablate" / "ddnm" / output_image_name(0, 0)) !=
          read_file_bytes(data.path() / "ablate" / "ddnm-interact" / output_image_name(0, 0)));

    // omega = 0: they coincide under the same seed
    a.out_dir = (data.path() / "ablate0").string();
    a.omega = 0.0f;
    REQUIRE(cli::cmd_ablate(a) == 0);
    CHECK(read_file_bytes(data.path() / "ablate0" / "ddnm" / output_image_name(0, 0)) ==
          read_file_bytes(data.path() / "ablate0" / "ddnm-interact" / output_image_name(0, 0)));
}
