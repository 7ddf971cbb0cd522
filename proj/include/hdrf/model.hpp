#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "hdrf/layers.hpp"

namespace hdrf::models {

enum class Architecture { PLAIN, RESIDUAL };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view s);

/// Layer widths for either architecture. Defaults reproduce the full-size networks;
/// `scaled()` divides every width for desk-scale runs while keeping the topology.
struct ModelSpec {
    Architecture arch = Architecture::PLAIN;
    std::array<int, 3> widths{64, 128, 256};  // conv stage widths
    int dense_width = 512;                    // PLAIN hidden dense layers
    int stem_width = 32;                      // RESIDUAL 7x7 stem
    int input_size = 64;
    double dropout = 0.5;

    static ModelSpec scaled(Architecture arch, int divisor);
    void validate() const;
};

/// Builds the layer stack.
///
/// PLAIN: three stages of [conv3x3 -> ReLU -> BN] x 2 followed by 2x2/2 max pooling,
/// then flatten, dense(hidden) -> ReLU -> dropout, dense(hidden) -> ReLU -> dropout, dense(2).
///
/// RESIDUAL: conv7x7/1 stem -> BN -> ReLU -> 3x3/2 average pool (pad 1), two residual blocks
/// per stage width (stages two and three open with stride 2), global average pool, dense(2).
///
/// Weights are He-normal, except the final classifier which is scaled by kClassifierGain so
/// the untrained network predicts close to uniform.
template <typename T>
std::unique_ptr<nn::Sequential<T>> build_layers(const ModelSpec& spec, std::uint64_t seed);

inline constexpr double kClassifierGain = 0.01;

/// Trainable parameter count of the built network.
std::size_t parameter_count(nn::Sequential<float>& net);

/// Leaf layers in declaration order (descends into residual blocks).
template <typename T>
std::vector<nn::Layer<T>*> leaf_layers(nn::Layer<T>& root);

}  // namespace hdrf::models
