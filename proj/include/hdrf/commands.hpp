#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hdrf/features.hpp"
#include "hdrf/itmo.hpp"
#include "hdrf/manifest.hpp"
#include "hdrf/model.hpp"
#include "hdrf/report.hpp"
#include "hdrf/trainer.hpp"

// The subcommands of the hdrf tool, callable in-process. Each writes `<name>.config`
// (flat key=value, keys named after the command-line flags) into its output directory.

namespace hdrf::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Maps an exception raised by a command to the tool's exit code.
int exit_code_for(const std::exception& e);

// scenes: procedural radiance scenes rendered as bracketed stacks and/or single LDR frames.
struct ScenesOptions {
    fs::path out_dir;
    int count = 8;
    int first_index = 0;
    int width = 256;
    int height = 256;
    int frames = 3;
    double stops = 2.0;
    std::string mode = "both";     // stack | single | both
    double time_jitter = 2.0;      // decades spanned by the random exposure-time scale per stack
    std::uint64_t seed = 0;
};
void cmd_scenes(const ScenesOptions& o);

// synth: one RGBE file per PPM in ldr_dir, expanded with a single operator.
struct SynthOptions {
    fs::path ldr_dir;
    fs::path out_dir;
    itmo::ItmoParams params;
    double scale_jitter = 0.0;  // decades spanned by a random per-image radiance scale
    std::uint64_t seed = 0;
};
void cmd_synth(const SynthOptions& o);

// fuse: one RGBE file per stack listed in a TSV of `name  frame  time  frame  time ...` rows.
struct FuseOptions {
    fs::path stacks;
    fs::path out_dir;
    double gamma = 2.2;
};
void cmd_fuse(const FuseOptions& o);

// build: manifest.txt plus train/verify1/verify2 block stores.
struct BuildOptions {
    fs::path mhdr_dir;
    fs::path ihdr_dir;
    fs::path out_dir;
    std::uint64_t seed = 0;
    dataset::InputMode input = dataset::InputMode::LOG_LUMINANCE;
    int verify_images = 40;
    int train_blocks = 60000;
    int max_dim = 1024;
    double epsilon = dataset::kLogEpsilon;
    int threads = 1;
};
dataset::DatasetManifest cmd_build(const BuildOptions& o);

/// Blocks of one split from a build directory, normalized with the manifest statistics.
std::vector<dataset::LogLumBlock> load_split(const fs::path& data_dir, dataset::Split split, bool normalize = true);

// train: best.ckpt, last.ckpt and history.csv.
struct TrainOptions {
    fs::path data_dir;
    fs::path out_dir;
    models::Architecture arch = models::Architecture::PLAIN;
    int width_divisor = 1;
    int epochs = 50;
    int batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::optional<fs::path> resume;  // directory holding last.ckpt (and best.ckpt)
    bool quiet = false;
};
models::TrainOutcome cmd_train(const TrainOptions& o);

std::string history_csv(const std::vector<models::EpochRecord>& history);

// eval: metrics CSV, ROC CSV and ROC SVG for a CNN checkpoint or an SVM model.
struct EvalOptions {
    fs::path model;
    fs::path data_dir;
    std::string split = "VERIFY1";
    fs::path out_dir;
    int threads = 1;
};
struct EvalResult {
    dataset::Split split = dataset::Split::VERIFY1;
    double block_accuracy = 0.0;
    std::optional<eval::Verify1Report> verify1;
    eval::RocCurve roc;
    fs::path metrics_csv;
};
EvalResult cmd_eval(const EvalOptions& o);

/// Per-block outcomes of a checkpoint or SVM model file on one split of a build directory.
std::vector<eval::ScoredBlock> score_blocks(const fs::path& model, const fs::path& data_dir,
                                            dataset::Split split, int threads = 1);

// features: one feature table over every block of the build.
struct FeaturesOptions {
    fs::path data_dir;
    features::FeatureKind kind = features::FeatureKind::HOG;
    fs::path out_dir;
    int threads = 1;
};
fs::path cmd_features(const FeaturesOptions& o);

// svm: linear SVM fitted on the TRAIN rows of a feature table.
struct SvmCommandOptions {
    fs::path features;
    fs::path out_dir;
    std::vector<double> grid{0.01, 0.1, 1.0, 10.0, 100.0};
    int epochs = 20;
    int folds = 5;
    std::uint64_t seed = 0;
};
fs::path cmd_svm(const SvmCommandOptions& o);

// report: side-by-side comparison of several VERIFY1 evaluations.
struct ReportOptions {
    std::vector<std::string> entries;  // NAME=path/to/<prefix>_metrics.csv
    fs::path out_dir;
};
void cmd_report(const ReportOptions& o);

}  // namespace hdrf::cli
