#include "hdrf/checkpoint.hpp"

#include <string>

#include "hdrf/error.hpp"

namespace hdrf::models {
namespace {

constexpr std::uint32_t kVersion = 1;

struct LayerRecord {
    std::string kind;
    std::vector<int> config;
    std::vector<nn::Shape> shapes;
    bool operator==(const LayerRecord&) const = default;
};

std::vector<nn::Tensor<float>*> state_tensors(nn::Layer<float>& leaf) {
    std::vector<nn::Tensor<float>*> out;
    for (auto& p : leaf.params()) out.push_back(p.value);
    for (auto* b : leaf.buffers()) out.push_back(b);
    return out;
}

std::vector<LayerRecord> layer_table(nn::Sequential<float>& net) {
    std::vector<LayerRecord> table;
    for (auto* leaf : leaf_layers<float>(net)) {
        LayerRecord r{leaf->kind(), leaf->config(), {}};
        for (auto* t : state_tensors(*leaf)) r.shapes.push_back(t->shape());
        table.push_back(std::move(r));
    }
    return table;
}

void write_floats(io::ByteWriter& w, const std::vector<std::vector<float>>& arrays) {
    w.put_u32(static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        w.put_u64(a.size());
        w.put_f32s(a);
    }
}

std::vector<std::vector<float>> read_floats(io::ByteReader& r) {
    std::vector<std::vector<float>> arrays(r.u32());
    for (auto& a : arrays) {
        a.resize(r.u64());
        r.f32s(a);
    }
    return arrays;
}

}  // namespace

Checkpoint capture(nn::Sequential<float>& net, const ModelSpec& spec) {
    Checkpoint c;
    c.spec = spec;
    for (auto* leaf : leaf_layers<float>(net)) {
        for (auto* t : state_tensors(*leaf)) c.tensors.emplace_back(t->values().begin(), t->values().end());
    }
    return c;
}

void restore(const Checkpoint& ckpt, nn::Sequential<float>& net) {
    std::size_t k = 0;
    for (auto* leaf : leaf_layers<float>(net)) {
        for (auto* t : state_tensors(*leaf)) {
            if (k >= ckpt.tensors.size() || ckpt.tensors[k].size() != t->size()) {
                throw FormatError("checkpoint: tensor " + std::to_string(k) + " does not match the network");
            }
            std::copy(ckpt.tensors[k].begin(), ckpt.tensors[k].end(), t->data());
            ++k;
        }
    }
    if (k != ckpt.tensors.size()) throw FormatError("checkpoint: extra tensors beyond the network");
}

std::unique_ptr<nn::Sequential<float>> instantiate(const Checkpoint& ckpt) {
    auto net = build_layers<float>(ckpt.spec, 0);
    restore(ckpt, *net);
    return net;
}

io::Bytes serialize_checkpoint(const Checkpoint& c) {
    io::ByteWriter w;
    w.put_bytes("HDRFCKPT");
    w.put_u32(kVersion);
    w.put_string(to_string(c.spec.arch));
    for (int v : c.spec.widths) w.put_u32(static_cast<std::uint32_t>(v));
    w.put_u32(static_cast<std::uint32_t>(c.spec.dense_width));
    w.put_u32(static_cast<std::uint32_t>(c.spec.stem_width));
    w.put_u32(static_cast<std::uint32_t>(c.spec.input_size));
    w.put_f64(c.spec.dropout);
    w.put_string(dataset::to_string(c.input));
    w.put_f64(c.norm_mean);
    w.put_f64(c.norm_std);

    auto net = build_layers<float>(c.spec, 0);
    auto table = layer_table(*net);
    w.put_u32(static_cast<std::uint32_t>(table.size()));
    for (const auto& r : table) {
        w.put_string(r.kind);
        w.put_u32(static_cast<std::uint32_t>(r.config.size()));
        for (int v : r.config) w.put_u32(static_cast<std::uint32_t>(v));
        w.put_u32(static_cast<std::uint32_t>(r.shapes.size()));
        for (const auto& s : r.shapes) {
            w.put_u32(static_cast<std::uint32_t>(s.size()));
            for (int d : s) w.put_u32(static_cast<std::uint32_t>(d));
        }
    }
    restore(c, *net);  // validates tensor sizes against the table
    for (const auto& t : c.tensors) w.put_f32s(t);

    w.put_u8(c.training ? 1 : 0);
    if (c.training) {
        const TrainingState& s = *c.training;
        w.put_u32(static_cast<std::uint32_t>(s.epochs_done));
        w.put_u64(s.adam_steps);
        write_floats(w, s.adam_m);
        write_floats(w, s.adam_v);
        w.put_u32(static_cast<std::uint32_t>(s.best_epoch));
        w.put_f64(s.best_verify_accuracy);
        w.put_u32(static_cast<std::uint32_t>(s.history.size()));
        for (const auto& e : s.history) {
            w.put_u32(static_cast<std::uint32_t>(e.epoch));
            w.put_f64(e.train_loss);
            w.put_f64(e.train_accuracy);
            w.put_f64(e.verify_accuracy);
        }
    }
    return w.take();
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
    io::ByteReader r(bytes);
    r.expect_magic("HDRFCKPT");
    if (std::uint32_t v = r.u32(); v != kVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(v));
    Checkpoint c;
    c.spec.arch = parse_architecture(r.string());
    for (int& v : c.spec.widths) v = static_cast<int>(r.u32());
    c.spec.dense_width = static_cast<int>(r.u32());
    c.spec.stem_width = static_cast<int>(r.u32());
    c.spec.input_size = static_cast<int>(r.u32());
    c.spec.dropout = r.f64();
    c.input = dataset::parse_input_mode(r.string());
    c.norm_mean = r.f64();
    c.norm_std = r.f64();

    auto net = build_layers<float>(c.spec, 0);
    auto expected = layer_table(*net);
    std::vector<LayerRecord> table(r.u32());
    for (auto& rec : table) {
        rec.kind = r.string();
        rec.config.resize(r.u32());
        for (int& v : rec.config) v = static_cast<int>(r.u32());
        rec.shapes.resize(r.u32());
        for (auto& s : rec.shapes) {
            s.resize(r.u32());
            for (int& d : s) d = static_cast<int>(r.u32());
        }
    }
    if (table != expected) throw FormatError("checkpoint: layer table does not match the declared architecture");
    for (const auto& rec : table) {
        for (const auto& s : rec.shapes) {
            std::vector<float> t(nn::shape_volume(s));
            r.f32s(t);
            c.tensors.push_back(std::move(t));
        }
    }
    if (r.u8()) {
        TrainingState s;
        s.epochs_done = static_cast<int>(r.u32());
        s.adam_steps = r.u64();
        s.adam_m = read_floats(r);
        s.adam_v = read_floats(r);
        s.best_epoch = static_cast<int>(r.u32());
        s.best_verify_accuracy = r.f64();
        s.history.resize(r.u32());
        for (auto& e : s.history) {
            e.epoch = static_cast<int>(r.u32());
            e.train_loss = r.f64();
            e.train_accuracy = r.f64();
            e.verify_accuracy = r.f64();
        }
        c.training = std::move(s);
    }
    if (!r.at_end()) throw FormatError("checkpoint: trailing bytes at " + std::to_string(r.offset()));
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(io::read_file(path)); }

}  // namespace hdrf::models
