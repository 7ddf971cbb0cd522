#pragma once

#include <cstdint>
#include <vector>

#include "hdrf/image.hpp"
#include "hdrf/random.hpp"

namespace hdrf::dataset {

// Procedural scenes used to build desk-scale corpora: a textured backdrop with
// shadowed objects and a few small emitters, spanning roughly 3-5 decades of radiance.
io::HdrImage synth_scene(int width, int height, std::uint64_t seed);

struct CaptureParams {
    double gamma = 2.2;
    double shot_noise = 0.01;   // std of signal-dependent noise, relative to sqrt(signal)
    double read_noise = 0.002;  // additive std in linear [0, 1] units
};

/// Simulated 8-bit capture of radiance * exposure with clipping and sensor noise.
io::LdrImage render_exposure(const io::HdrImage& scene, double exposure, const CaptureParams& cap, Rng& rng);

/// Exposure that maps the scene's median luminance to 18% gray.
double auto_exposure(const io::HdrImage& scene);

struct ExposureStack {
    std::vector<io::LdrImage> frames;
    std::vector<double> times;
};

/// frames bracketed around auto_exposure, spaced by `stops` EV, shortest first.
ExposureStack capture_stack(const io::HdrImage& scene, int frames, double stops, const CaptureParams& cap, Rng& rng);

}  // namespace hdrf::dataset
