// hdrf: command-line front end for the HDR forensics toolkit.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>

#include "hdrf/commands.hpp"
#include "hdrf/error.hpp"
#include "hdrf/features.hpp"

using namespace hdrf;
using namespace hdrf::cli;

namespace {

// CLI11 transform that maps a name to an enum through the library's parser, so unknown
// names surface as usage errors with the parser's own message.
template <typename E, typename Parse>
CLI::Validator enum_validator(Parse parse, std::string desc) {
    return CLI::Validator(
        [parse](std::string& s) {
            try {
                parse(s);
            } catch (const Error& e) {
                return std::string(e.what());
            }
            return std::string();
        },
        std::move(desc));
}

void add_config(CLI::App* sub) {
    sub->add_option("--config", "Flat key=value file; flags given on the command line take precedence");
}

std::string trim(std::string s) {
    const char* ws = " \t\r";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
}

// Splices `--config FILE` entries into the argument list as `--key=value` right after the
// subcommand name. Keys already present on the command line are skipped.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string file;
    std::set<std::string> given;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        std::string key = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
        if (key == "config") {
            if (a.find('=') != std::string::npos) file = a.substr(a.find('=') + 1);
            else if (i + 1 < args.size()) file = args[i + 1];
        }
        given.insert(key);
    }
    if (file.empty() || args.size() < 2) return args;
    std::ifstream in(file);
    if (!in) throw CLI::FileError::Missing(file);
    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (given.count(key)) continue;
        injected.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + 2, injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HDR image forensics: synthesize corpora, train CNN and baseline classifiers, evaluate"};
    app.require_subcommand(1);

    // scenes
    ScenesOptions scenes;
    auto* sc = app.add_subcommand("scenes", "Render procedural scenes as exposure stacks and single LDR frames");
    add_config(sc);
    sc->add_option("--out", scenes.out_dir, "Output directory")->required();
    sc->add_option("--count", scenes.count, "Number of scenes")->capture_default_str();
    sc->add_option("--first-index", scenes.first_index, "Index of the first scene")->capture_default_str();
    sc->add_option("--width", scenes.width)->capture_default_str();
    sc->add_option("--height", scenes.height)->capture_default_str();
    sc->add_option("--frames", scenes.frames, "Frames per stack")->capture_default_str();
    sc->add_option("--stops", scenes.stops, "EV spacing between frames")->capture_default_str();
    sc->add_option("--mode", scenes.mode, "stack, single or both")->capture_default_str();
    sc->add_option("--time-jitter", scenes.time_jitter, "Decades of random exposure-time scale per stack")
        ->capture_default_str();
    sc->add_option("--seed", scenes.seed)->required();

    // synth
    SynthOptions synth;
    std::string synth_op;
    auto* sy = app.add_subcommand("synth", "Expand LDR images (PPM) into iHDR images with one iTMO");
    add_config(sy);
    sy->add_option("--ldr", synth.ldr_dir, "Directory of .ppm inputs")->required();
    sy->add_option("--out", synth.out_dir, "Output directory")->required();
    sy->add_option("--operator", synth_op, "LINEAR, SIGMOID, EXPAND_MAP or DUAL_REGION")
        ->required()
        ->check(enum_validator<itmo::Operator>([](const std::string& s) { return itmo::parse_operator(s); }, "OP"));
    sy->add_option("--gamma", synth.params.gamma)->capture_default_str();
    sy->add_option("--l-max", synth.params.l_max)->capture_default_str();
    sy->add_option("--threshold", synth.params.highlight_threshold)->capture_default_str();
    sy->add_option("--boost", synth.params.boost)->capture_default_str();
    sy->add_option("--sigma", synth.params.sigma_s)->capture_default_str();
    sy->add_option("--scale-jitter", synth.scale_jitter, "Decades of random per-image radiance scale")
        ->capture_default_str();
    sy->add_option("--seed", synth.seed)->required();

    // fuse
    FuseOptions fuse;
    auto* fu = app.add_subcommand("fuse", "Merge exposure stacks into mHDR images");
    add_config(fu);
    fu->add_option("--stacks", fuse.stacks, "TSV: name, then frame path and exposure time pairs")->required();
    fu->add_option("--out", fuse.out_dir, "Output directory")->required();
    fu->add_option("--gamma", fuse.gamma)->capture_default_str();

    // build
    BuildOptions build;
    std::string build_input = "log";
    auto* bu = app.add_subcommand("build", "Tile both corpora into blocks and split into TRAIN/VERIFY1/VERIFY2");
    add_config(bu);
    bu->add_option("--mhdr", build.mhdr_dir, "Directory of mHDR images")->required();
    bu->add_option("--ihdr", build.ihdr_dir, "Directory of iHDR images")->required();
    bu->add_option("--out", build.out_dir, "Output directory")->required();
    bu->add_option("--seed", build.seed)->required();
    bu->add_option("--input", build_input, "log or pixel")
        ->capture_default_str()
        ->check(enum_validator<dataset::InputMode>(
            [](const std::string& s) { return dataset::parse_input_mode(s); }, "MODE"));
    bu->add_option("--verify-images", build.verify_images, "VERIFY1 images per class")->capture_default_str();
    bu->add_option("--train-blocks", build.train_blocks, "TRAIN blocks over both classes")->capture_default_str();
    bu->add_option("--max-dim", build.max_dim)->capture_default_str();
    bu->add_option("--epsilon", build.epsilon)->capture_default_str();
    bu->add_option("--threads", build.threads)->capture_default_str();

    // train
    TrainOptions train;
    std::string train_arch = "PLAIN";
    std::string train_resume;
    auto* tr = app.add_subcommand("train", "Train the CNN on a build directory");
    add_config(tr);
    tr->add_option("--data", train.data_dir, "Build directory")->required();
    tr->add_option("--out", train.out_dir, "Output directory")->required();
    tr->add_option("--arch", train_arch, "PLAIN or RESIDUAL")
        ->capture_default_str()
        ->check(enum_validator<models::Architecture>(
            [](const std::string& s) { return models::parse_architecture(s); }, "ARCH"));
    tr->add_option("--width-divisor", train.width_divisor, "Divide every layer width by this")
        ->capture_default_str();
    tr->add_option("--epochs", train.epochs)->capture_default_str();
    tr->add_option("--batch", train.batch)->capture_default_str();
    tr->add_option("--lr", train.lr)->capture_default_str();
    tr->add_option("--seed", train.seed)->required();
    tr->add_option("--resume", train_resume, "Directory of a previous run to continue");
    tr->add_flag("--quiet", train.quiet, "No progress lines");

    // eval
    EvalOptions ev;
    auto* ea = app.add_subcommand("eval", "Score a checkpoint or SVM model on one split");
    add_config(ea);
    ea->add_option("--model", ev.model, "Checkpoint (.ckpt) or SVM model")->required();
    ea->add_option("--data", ev.data_dir, "Build directory")->required();
    ea->add_option("--split", ev.split, "VERIFY1, VERIFY2 or TRAIN")->capture_default_str();
    ea->add_option("--out", ev.out_dir, "Output directory")->required();
    ea->add_option("--threads", ev.threads)->capture_default_str();

    // features
    FeaturesOptions feat;
    std::string feat_kind;
    auto* fe = app.add_subcommand("features", "Extract HOG, LBP or SPAM descriptors for every block");
    add_config(fe);
    fe->add_option("--data", feat.data_dir, "Build directory")->required();
    fe->add_option("--kind", feat_kind, "HOG, LBP or SPAM")
        ->required()
        ->check(enum_validator<features::FeatureKind>(
            [](const std::string& s) { return features::parse_feature_kind(s); }, "KIND"));
    fe->add_option("--out", feat.out_dir, "Output directory")->required();
    fe->add_option("--threads", feat.threads)->capture_default_str();

    // svm
    SvmCommandOptions svm;
    auto* sv = app.add_subcommand("svm", "Fit a linear SVM with a C grid search on a feature table");
    add_config(sv);
    sv->add_option("--features", svm.features, "Feature table from `features`")->required();
    sv->add_option("--out", svm.out_dir, "Output directory")->required();
    sv->add_option("--grid", svm.grid, "C values")->capture_default_str()->delimiter(' ');
    sv->add_option("--epochs", svm.epochs)->capture_default_str();
    sv->add_option("--folds", svm.folds)->capture_default_str();
    sv->add_option("--seed", svm.seed)->required();

    // report
    ReportOptions rep;
    auto* re = app.add_subcommand("report", "Compare several VERIFY1 evaluations in one table and ROC plot");
    add_config(re);
    re->add_option("--entry", rep.entries, "NAME=path/to/<prefix>_metrics.csv")->required();
    re->add_option("--out", rep.out_dir, "Output directory")->required();

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::vector<char*> ptrs;
        for (auto& a : args) ptrs.push_back(a.data());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*sc) {
            cmd_scenes(scenes);
        } else if (*sy) {
            synth.params.op = itmo::parse_operator(synth_op);
            cmd_synth(synth);
        } else if (*fu) {
            cmd_fuse(fuse);
        } else if (*bu) {
            build.input = dataset::parse_input_mode(build_input);
            auto m = cmd_build(build);
            for (auto s : {dataset::Split::TRAIN, dataset::Split::VERIFY1, dataset::Split::VERIFY2}) {
                std::cout << dataset::to_string(s) << ": MHDR " << m.block_count(s, dataset::HdrClass::MHDR)
                          << " blocks, IHDR " << m.block_count(s, dataset::HdrClass::IHDR) << " blocks\n";
            }
        } else if (*tr) {
            train.arch = models::parse_architecture(train_arch);
            if (!train_resume.empty()) train.resume = train_resume;
            auto out = cmd_train(train);
            const auto& last = out.history.back();
            std::cout << "epochs " << out.history.size() << ", final verify accuracy " << last.verify_accuracy
                      << '\n';
        } else if (*ea) {
            auto r = cmd_eval(ev);
            std::cout << "block accuracy " << r.block_accuracy;
            if (r.verify1) std::cout << ", MVS accuracy " << r.verify1->mvs_accuracy;
            std::cout << ", AUC " << r.roc.auc << "\nwrote " << r.metrics_csv.string() << '\n';
        } else if (*fe) {
            feat.kind = features::parse_feature_kind(feat_kind);
            std::cout << "wrote " << cmd_features(feat).string() << '\n';
        } else if (*sv) {
            std::cout << "wrote " << cmd_svm(svm).string() << '\n';
        } else if (*re) {
            cmd_report(rep);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kOk;
}
