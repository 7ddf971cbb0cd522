#include "hdrf/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "hdrf/binary_io.hpp"
#include "hdrf/error.hpp"
#include "hdrf/feature_store.hpp"
#include "hdrf/formats.hpp"
#include "hdrf/fusion.hpp"
#include "hdrf/parallel.hpp"
#include "hdrf/random.hpp"
#include "hdrf/scene.hpp"
#include "hdrf/svm.hpp"

namespace hdrf::cli {
namespace {

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

// Flat key=value provenance file; string values are quoted so paths survive re-parsing.
class ConfigWriter {
public:
    ConfigWriter& str(std::string_view key, std::string_view v) {
        os_ << key << "=\"" << v << "\"\n";
        return *this;
    }
    ConfigWriter& path(std::string_view key, const fs::path& p) { return str(key, p.generic_string()); }
    ConfigWriter& real(std::string_view key, double v) {
        os_ << key << '=' << num(v) << '\n';
        return *this;
    }
    template <typename I>
    ConfigWriter& integer(std::string_view key, I v) {
        os_ << key << '=' << v << '\n';
        return *this;
    }
    void write(const fs::path& file) const { io::write_text(file, os_.str()); }

private:
    std::ostringstream os_;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<fs::path> list_files(const fs::path& dir, std::initializer_list<std::string_view> extensions) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

io::HdrImage read_hdr(const fs::path& p) {
    io::Bytes bytes = io::read_file(p);
    try {
        std::string ext = p.extension().string();
        if (ext == ".pfm" || ext == ".PFM") return io::decode_pfm(bytes);
        return io::decode_rgbe(bytes);
    } catch (const FormatError& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

void write_new(const fs::path& p, const io::Bytes& bytes) {
    if (fs::exists(p)) throw DataError("output already exists: " + p.string());
    io::write_file(p, bytes);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t t = line.find('\t', pos);
        out.push_back(line.substr(pos, t == std::string::npos ? std::string::npos : t - pos));
        if (t == std::string::npos) break;
        pos = t + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw FormatError(what + ": not a number: '" + s + "'");
    return v;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

dataset::Split parse_eval_split(std::string_view s) {
    std::string u(s);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "TRAIN") return dataset::Split::TRAIN;
    if (u == "VERIFY1") return dataset::Split::VERIFY1;
    if (u == "VERIFY2") return dataset::Split::VERIFY2;
    throw ParameterError("unknown split '" + std::string(s) + "' (expected TRAIN, VERIFY1 or VERIFY2)");
}

fs::path store_path(const fs::path& dir, dataset::Split s) {
    return dir / (lower(dataset::to_string(s)) + ".blocks");
}

std::string read_magic(const fs::path& p) {
    io::Bytes b = io::read_file(p);
    return std::string(b.begin(), b.begin() + std::min<std::size_t>(8, b.size()));
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ParameterError*>(&e)) return kUsage;
    if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
    return kData;
}

void cmd_scenes(const ScenesOptions& o) {
    if (o.count < 1 || o.first_index < 0) throw ParameterError("scenes: count must be >= 1 and first index >= 0");
    if (o.mode != "stack" && o.mode != "single" && o.mode != "both") {
        throw ParameterError("scenes: mode must be stack, single or both");
    }
    if (o.frames < 2) throw ParameterError("scenes: a stack needs at least two frames");
    if (!(o.time_jitter >= 0)) throw ParameterError("scenes: time jitter must be >= 0");
    const bool stacks = o.mode != "single", singles = o.mode != "stack";
    ensure_dir(o.out_dir);
    if (stacks) ensure_dir(o.out_dir / "stacks");
    if (singles) ensure_dir(o.out_dir / "ldr");

    std::ostringstream tsv;
    dataset::CaptureParams cap;
    for (int i = o.first_index; i < o.first_index + o.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%05d", i);
        io::HdrImage scene = dataset::synth_scene(o.width, o.height, mix_seed(o.seed, static_cast<std::uint64_t>(i)));
        Rng rng(mix_seed(o.seed, 1'000'000ull + static_cast<std::uint64_t>(i)));
        if (stacks) {
            dataset::ExposureStack st = dataset::capture_stack(scene, o.frames, o.stops, cap, rng);
            const double scale = std::pow(10.0, rng.uniform(-0.5 * o.time_jitter, 0.5 * o.time_jitter));
            tsv << name;
            for (std::size_t k = 0; k < st.frames.size(); ++k) {
                std::string file = std::string(name) + "_f" + std::to_string(k) + ".ppm";
                io::write_file(o.out_dir / "stacks" / file, io::encode_ppm(st.frames[k]));
                tsv << "\tstacks/" << file << '\t' << num(st.times[k] * scale);
            }
            tsv << '\n';
        }
        if (singles) {
            io::LdrImage frame = dataset::render_exposure(scene, dataset::auto_exposure(scene), cap, rng);
            io::write_file(o.out_dir / "ldr" / (std::string(name) + ".ppm"), io::encode_ppm(frame));
        }
    }
    if (stacks) io::write_text(o.out_dir / "stacks.tsv", tsv.str());
    ConfigWriter()
        .path("out", o.out_dir)
        .integer("count", o.count)
        .integer("first-index", o.first_index)
        .integer("width", o.width)
        .integer("height", o.height)
        .integer("frames", o.frames)
        .real("stops", o.stops)
        .str("mode", o.mode)
        .real("time-jitter", o.time_jitter)
        .integer("seed", o.seed)
        .write(o.out_dir / "scenes.config");
}

void cmd_synth(const SynthOptions& o) {
    itmo::validate(o.params);
    if (!(o.scale_jitter >= 0)) throw ParameterError("synth: scale jitter must be >= 0");
    std::vector<fs::path> inputs = list_files(o.ldr_dir, {".ppm"});
    if (inputs.empty()) throw DataError("synth: no .ppm files in " + o.ldr_dir.string());
    ensure_dir(o.out_dir);
    for (const auto& in : inputs) {
        fs::path out = o.out_dir / (in.stem().string() + ".hdr");
        if (fs::exists(out)) throw DataError("synth: output already exists: " + out.string());
    }

    const fs::path tag_file = o.out_dir / "operators.tsv";
    std::map<std::string, std::string> tags;
    if (fs::exists(tag_file)) {
        std::istringstream is(io::read_text(tag_file));
        std::string line;
        while (std::getline(is, line)) {
            auto f = split_tabs(line);
            if (f.size() == 2) tags[f[0]] = f[1];
        }
    }
    const std::string op(itmo::to_string(o.params.op));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        io::LdrImage ldr;
        try {
            ldr = io::decode_ppm(io::read_file(inputs[i]));
        } catch (const FormatError& e) {
            throw FormatError(inputs[i].string() + ": " + e.what());
        }
        io::HdrImage hdr = itmo::apply(ldr, o.params);
        if (o.scale_jitter > 0) {
            Rng rng(mix_seed(o.seed, i));
            const auto s = static_cast<float>(std::pow(10.0, rng.uniform(-0.5 * o.scale_jitter, 0.5 * o.scale_jitter)));
            for (float& v : hdr.data) v *= s;
        }
        std::string file = inputs[i].stem().string() + ".hdr";
        write_new(o.out_dir / file, io::encode_rgbe(hdr));
        tags[file] = op;
    }
    std::ostringstream os;
    for (const auto& [file, tag] : tags) os << file << '\t' << tag << '\n';
    io::write_text(tag_file, os.str());
    ConfigWriter()
        .path("ldr", o.ldr_dir)
        .path("out", o.out_dir)
        .str("operator", op)
        .real("gamma", o.params.gamma)
        .real("l-max", o.params.l_max)
        .real("threshold", o.params.highlight_threshold)
        .real("boost", o.params.boost)
        .real("sigma", o.params.sigma_s)
        .real("scale-jitter", o.scale_jitter)
        .integer("seed", o.seed)
        .write(o.out_dir / ("synth_" + lower(op) + ".config"));
}

void cmd_fuse(const FuseOptions& o) {
    const fs::path base = o.stacks.parent_path();
    std::istringstream is(io::read_text(o.stacks));
    ensure_dir(o.out_dir);
    std::string line;
    int line_no = 0, fused = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto f = split_tabs(line);
        const std::string where = o.stacks.string() + ":" + std::to_string(line_no);
        if (f.size() < 5 || (f.size() - 1) % 2 != 0) {
            throw FormatError(where + ": expected name followed by frame/time pairs (at least two frames)");
        }
        const std::string& name = f[0];
        std::vector<io::LdrImage> frames;
        std::vector<double> times;
        for (std::size_t k = 1; k < f.size(); k += 2) {
            fs::path frame = fs::path(f[k]).is_absolute() ? fs::path(f[k]) : base / f[k];
            try {
                frames.push_back(io::decode_ppm(io::read_file(frame)));
            } catch (const FormatError& e) {
                throw FormatError(frame.string() + ": " + e.what());
            }
            times.push_back(parse_double(f[k + 1], where));
        }
        io::HdrImage hdr;
        try {
            hdr = dataset::fuse_exposures(frames, times, o.gamma);
        } catch (const ParameterError& e) {
            throw DataError("stack " + name + ": " + e.what());
        }
        write_new(o.out_dir / (name + ".hdr"), io::encode_rgbe(hdr));
        ++fused;
    }
    if (fused == 0) throw DataError("fuse: no stacks listed in " + o.stacks.string());
    ConfigWriter().path("stacks", o.stacks).path("out", o.out_dir).real("gamma", o.gamma).write(
        o.out_dir / "fuse.config");
}

dataset::DatasetManifest cmd_build(const BuildOptions& o) {
    struct Candidate {
        fs::path path;
        dataset::HdrClass cls;
        std::string tag;
    };
    std::vector<Candidate> cands;
    for (const auto& p : list_files(o.mhdr_dir, {".hdr", ".pfm"})) cands.push_back({p, dataset::HdrClass::MHDR, "FUSED"});
    std::map<std::string, std::string> tags;
    if (fs::exists(o.ihdr_dir / "operators.tsv")) {
        std::istringstream is(io::read_text(o.ihdr_dir / "operators.tsv"));
        std::string line;
        while (std::getline(is, line)) {
            auto f = split_tabs(line);
            if (f.size() == 2) tags[f[0]] = f[1];
        }
    }
    for (const auto& p : list_files(o.ihdr_dir, {".hdr", ".pfm"})) {
        auto it = tags.find(p.filename().string());
        cands.push_back({p, dataset::HdrClass::IHDR, it == tags.end() ? "UNKNOWN" : it->second});
    }
    if (cands.empty()) throw DataError("build: no images found");

    auto map_of = [&](const fs::path& p) { return dataset::prepare_input(read_hdr(p), o.input, o.max_dim, o.epsilon); };

    std::vector<dataset::SourceImage> sources(cands.size());
    parallel_for(cands.size(), o.threads, [&](std::size_t i) {
        dataset::LuminanceMap m = map_of(cands[i].path);
        auto count = static_cast<std::uint32_t>((m.width / dataset::kBlockSize) * (m.height / dataset::kBlockSize));
        sources[i] = {cands[i].path.generic_string(), cands[i].cls, cands[i].tag, count};
    });

    dataset::DatasetManifest m =
        dataset::build_manifest(sources, {o.seed, o.verify_images, o.train_blocks});
    m.input = o.input;
    m.epsilon = o.epsilon;
    m.max_dim = o.max_dim;

    std::vector<std::vector<dataset::LogLumBlock>> per_entry(m.entries.size());
    parallel_for(m.entries.size(), o.threads, [&](std::size_t i) {
        const auto& e = m.entries[i];
        if (e.split == dataset::Split::UNUSED) return;
        per_entry[i] = dataset::entry_blocks(e, static_cast<std::uint32_t>(i), map_of(e.path));
    });
    std::map<dataset::Split, std::vector<dataset::LogLumBlock>> by_split;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        auto& dst = by_split[m.entries[i].split];
        for (auto& b : per_entry[i]) dst.push_back(std::move(b));
    }
    auto [mean, sd] = dataset::block_statistics(by_split[dataset::Split::TRAIN]);
    if (!(sd > 0.0)) throw DataError("build: TRAIN blocks are constant; cannot standardize");
    m.norm_mean = mean;
    m.norm_std = sd;

    ensure_dir(o.out_dir);
    dataset::save_manifest(o.out_dir / "manifest.txt", m);
    for (auto s : {dataset::Split::TRAIN, dataset::Split::VERIFY1, dataset::Split::VERIFY2}) {
        dataset::write_block_store(store_path(o.out_dir, s), by_split[s]);
    }
    ConfigWriter()
        .path("mhdr", o.mhdr_dir)
        .path("ihdr", o.ihdr_dir)
        .path("out", o.out_dir)
        .integer("seed", o.seed)
        .str("input", dataset::to_string(o.input))
        .integer("verify-images", o.verify_images)
        .integer("train-blocks", o.train_blocks)
        .integer("max-dim", o.max_dim)
        .real("epsilon", o.epsilon)
        .write(o.out_dir / "build.config");
    return m;
}

std::vector<dataset::LogLumBlock> load_split(const fs::path& data_dir, dataset::Split split, bool normalize) {
    auto blocks = dataset::read_block_store(store_path(data_dir, split));
    if (normalize) dataset::normalize_blocks(blocks, dataset::load_manifest(data_dir / "manifest.txt"));
    return blocks;
}

std::string history_csv(const std::vector<models::EpochRecord>& history) {
    std::ostringstream os;
    os << "epoch,train_loss,train_accuracy,verify_accuracy\n";
    char buf[160];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", r.epoch, r.train_loss, r.train_accuracy,
                      r.verify_accuracy);
        os << buf;
    }
    return os.str();
}

models::TrainOutcome cmd_train(const TrainOptions& o) {
    models::ModelSpec spec = models::ModelSpec::scaled(o.arch, o.width_divisor);
    dataset::DatasetManifest manifest = dataset::load_manifest(o.data_dir / "manifest.txt");
    auto train_set = load_split(o.data_dir, dataset::Split::TRAIN);
    auto verify_set = load_split(o.data_dir, dataset::Split::VERIFY1);

    models::Checkpoint stats;
    stats.input = manifest.input;
    stats.norm_mean = manifest.norm_mean;
    stats.norm_std = manifest.norm_std;

    models::TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch = o.batch;
    cfg.lr = o.lr;
    cfg.seed = o.seed;

    std::optional<models::Checkpoint> last, best;
    models::ResumeFrom resume;
    if (o.resume) {
        last = models::load_checkpoint(*o.resume / "last.ckpt");
        if (fs::exists(*o.resume / "best.ckpt")) best = models::load_checkpoint(*o.resume / "best.ckpt");
        if (last->spec.arch != spec.arch || last->spec.widths != spec.widths) {
            throw ParameterError("train: resume checkpoint was trained with a different architecture");
        }
        resume.last = &*last;
        resume.best = best ? &*best : nullptr;
    }
    models::LogFn log;
    if (!o.quiet) log = [](const std::string& s) { std::cerr << s << '\n'; };

    ensure_dir(o.out_dir);
    models::TrainOutcome out;
    try {
        out = models::train(spec, stats, train_set, verify_set, cfg, resume, log);
    } catch (const models::TrainingAborted& e) {
        models::save_checkpoint(o.out_dir / "aborted.ckpt", e.last_good());
        throw;
    }
    models::save_checkpoint(o.out_dir / "best.ckpt", out.best);
    models::save_checkpoint(o.out_dir / "last.ckpt", out.last);
    io::write_text(o.out_dir / "history.csv", history_csv(out.history));
    ConfigWriter cw;
    cw.path("data", o.data_dir)
        .path("out", o.out_dir)
        .str("arch", models::to_string(o.arch))
        .integer("width-divisor", o.width_divisor)
        .integer("epochs", o.epochs)
        .integer("batch", o.batch)
        .real("lr", o.lr)
        .integer("seed", o.seed);
    if (o.resume) cw.path("resume", *o.resume);
    cw.write(o.out_dir / "train.config");
    return out;
}

std::vector<eval::ScoredBlock> score_blocks(const fs::path& model, const fs::path& data_dir, dataset::Split split,
                                            int threads) {
    dataset::DatasetManifest manifest = dataset::load_manifest(data_dir / "manifest.txt");
    auto blocks = load_split(data_dir, split, false);
    if (blocks.empty()) throw DataError("split " + std::string(dataset::to_string(split)) + " has no blocks");
    std::vector<eval::ScoredBlock> out(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        out[i].source_id = blocks[i].source_id;
        out[i].label = static_cast<int>(blocks[i].label);
    }
    const std::string magic = read_magic(model);
    if (magic == "HDRFCKPT") {
        models::Checkpoint ckpt = models::load_checkpoint(model);
        if (ckpt.input != manifest.input) {
            throw DataError("checkpoint expects " + std::string(dataset::to_string(ckpt.input)) +
                            " input but the data directory holds " + std::string(dataset::to_string(manifest.input)));
        }
        dataset::DatasetManifest norm = manifest;
        norm.norm_mean = ckpt.norm_mean;
        norm.norm_std = ckpt.norm_std;
        dataset::normalize_blocks(blocks, norm);
        models::Classifier clf(ckpt);
        auto probs = clf.predict(blocks);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            out[i].predicted = probs[i][1] > probs[i][0] ? 1 : 0;
            out[i].score = probs[i][1];
            out[i].confidence = std::max(probs[i][0], probs[i][1]);
        }
    } else if (magic == "HDRF-SVM") {
        features::SvmModel svm = features::parse_svm(io::read_text(model));
        features::FeatureKind kind = features::parse_feature_kind(svm.tag);
        if (svm.weights.size() != static_cast<std::size_t>(features::feature_dims(kind))) {
            throw DataError("svm model has " + std::to_string(svm.weights.size()) + " weights for " + svm.tag);
        }
        std::vector<dataset::Split> splits(blocks.size(), split);
        features::FeatureTable t = features::extract_table(kind, blocks, splits, threads);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            auto p = features::svm_predict(svm, t.x.row(i));
            out[i].predicted = p.label;
            out[i].score = p.margin;
            out[i].confidence = std::abs(p.margin);
        }
    } else {
        throw FormatError(model.string() + ": neither a checkpoint nor an SVM model");
    }
    return out;
}

EvalResult cmd_eval(const EvalOptions& o) {
    EvalResult r;
    r.split = parse_eval_split(o.split);
    dataset::DatasetManifest manifest = dataset::load_manifest(o.data_dir / "manifest.txt");
    auto scored = score_blocks(o.model, o.data_dir, r.split, o.threads);

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& b : scored) {
        scores.push_back(b.score);
        labels.push_back(b.label);
    }
    ensure_dir(o.out_dir);
    const std::string prefix = o.model.stem().string() + "_s" + std::to_string(manifest.seed) + "_" +
                               lower(dataset::to_string(r.split));
    r.metrics_csv = o.out_dir / (prefix + "_metrics.csv");
    if (r.split == dataset::Split::VERIFY1) {
        r.verify1 = eval::evaluate_verify1(scored);
        r.block_accuracy = r.verify1->block_accuracy;
        r.roc = r.verify1->roc;
        io::write_text(r.metrics_csv, eval::verify1_csv(*r.verify1));
    } else {
        r.block_accuracy = eval::evaluate_blocks(scored);
        r.roc = eval::roc_auc(scores, labels, 1);
        io::write_text(r.metrics_csv, eval::verify2_csv(r.block_accuracy, scored.size()));
    }
    io::write_text(o.out_dir / (prefix + "_roc.csv"), eval::roc_csv(r.roc));
    io::write_text(o.out_dir / (prefix + "_roc.svg"), eval::roc_svg({{o.model.stem().string(), r.roc}}));
    ConfigWriter()
        .path("model", o.model)
        .path("data", o.data_dir)
        .str("split", dataset::to_string(r.split))
        .path("out", o.out_dir)
        .write(o.out_dir / (prefix + ".config"));
    return r;
}

fs::path cmd_features(const FeaturesOptions& o) {
    std::vector<dataset::LogLumBlock> blocks;
    std::vector<dataset::Split> splits;
    for (auto s : {dataset::Split::TRAIN, dataset::Split::VERIFY1, dataset::Split::VERIFY2}) {
        for (auto& b : load_split(o.data_dir, s, false)) {
            blocks.push_back(std::move(b));
            splits.push_back(s);
        }
    }
    features::FeatureTable t = features::extract_table(o.kind, blocks, splits, o.threads);
    ensure_dir(o.out_dir);
    const std::string kind = lower(features::to_string(o.kind));
    fs::path out = o.out_dir / ("features_" + kind + ".bin");
    features::write_feature_table(out, t);
    ConfigWriter()
        .path("data", o.data_dir)
        .str("kind", features::to_string(o.kind))
        .path("out", o.out_dir)
        .write(o.out_dir / ("features_" + kind + ".config"));
    return out;
}

fs::path cmd_svm(const SvmCommandOptions& o) {
    features::FeatureTable all = features::read_feature_table(o.features);
    features::FeatureTable t = features::filter_split(all, dataset::Split::TRAIN);
    std::vector<int> labels(t.labels.begin(), t.labels.end());
    features::SvmOptions so;
    so.grid = o.grid;
    so.epochs = o.epochs;
    so.folds = o.folds;
    so.seed = o.seed;
    features::SvmModel m = features::svm_train(t.x, labels, so);
    m.tag = std::string(features::to_string(all.kind));
    ensure_dir(o.out_dir);
    const std::string kind = lower(m.tag);
    fs::path out = o.out_dir / ("svm_" + kind + ".model");
    io::write_text(out, features::serialize_svm(m));
    std::string grid;
    for (double c : o.grid) grid += (grid.empty() ? "" : " ") + num(c);
    ConfigWriter()
        .path("features", o.features)
        .path("out", o.out_dir)
        .str("grid", grid)
        .integer("epochs", o.epochs)
        .integer("folds", o.folds)
        .integer("seed", o.seed)
        .real("chosen-c", m.c)
        .real("cv-accuracy", m.cv_accuracy)
        .write(o.out_dir / ("svm_" + kind + ".config"));
    return out;
}

void cmd_report(const ReportOptions& o) {
    if (o.entries.empty()) throw ParameterError("report: no entries given");
    std::ostringstream table;
    table << "method,block_accuracy,auc,mvs_accuracy,table_cell\n";
    std::vector<std::pair<std::string, eval::RocCurve>> curves;
    ConfigWriter cw;
    for (const auto& entry : o.entries) {
        auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) throw ParameterError("report: entry must be NAME=metrics.csv");
        const std::string name = entry.substr(0, eq);
        const fs::path metrics = entry.substr(eq + 1);
        cw.path("entry", name + "=" + metrics.generic_string());
        std::istringstream is(io::read_text(metrics));
        std::string line, all_row;
        while (std::getline(is, line)) {
            if (line.rfind("ALL,", 0) == 0) all_row = line;
        }
        if (all_row.empty()) throw FormatError(metrics.string() + ": no ALL row (not a VERIFY1 report)");
        std::vector<std::string> f;
        std::stringstream ss(all_row);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw FormatError(metrics.string() + ": malformed ALL row");
        table << name << ',' << f[3] << ',' << f[4] << ',' << f[5] << ',' << f[6] << '\n';

        std::string roc_name = metrics.filename().string();
        const std::string suffix = "_metrics.csv";
        if (roc_name.size() > suffix.size() && roc_name.ends_with(suffix)) {
            roc_name = roc_name.substr(0, roc_name.size() - suffix.size()) + "_roc.csv";
            fs::path roc_path = metrics.parent_path() / roc_name;
            if (fs::exists(roc_path)) {
                eval::RocCurve roc;
                std::istringstream rs(io::read_text(roc_path));
                std::getline(rs, line);
                while (std::getline(rs, line)) {
                    auto c = line.find(',');
                    if (c == std::string::npos) throw FormatError(roc_path.string() + ": malformed row");
                    roc.points.emplace_back(parse_double(line.substr(0, c), roc_path.string()),
                                            parse_double(line.substr(c + 1), roc_path.string()));
                }
                roc.auc = parse_double(f[4], metrics.string());
                curves.emplace_back(name, std::move(roc));
            }
        }
    }
    ensure_dir(o.out_dir);
    io::write_text(o.out_dir / "comparison.csv", table.str());
    if (!curves.empty()) io::write_text(o.out_dir / "comparison_roc.svg", eval::roc_svg(curves));
    cw.path("out", o.out_dir).write(o.out_dir / "report.config");
}

}  // namespace hdrf::cli
