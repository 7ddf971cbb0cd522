#include "hdrf/scene.hpp"

#include <algorithm>
#include <cmath>

#include "hdrf/error.hpp"
#include "hdrf/luminance.hpp"

namespace hdrf::dataset {
namespace {

// Bilinearly interpolated lattice noise, summed over octaves; roughly in [-1, 1].
class ValueNoise {
public:
    ValueNoise(int cells, int octaves, Rng& rng) : cells_(cells), octaves_(octaves) {
        for (int o = 0; o < octaves; ++o) {
            int n = (cells << o) + 2;
            std::vector<float> g(static_cast<std::size_t>(n) * n);
            for (float& v : g) v = static_cast<float>(rng.uniform(-1.0, 1.0));
            grids_.push_back(std::move(g));
        }
    }

    double operator()(double u, double v) const {  // u, v in [0, 1]
        double sum = 0.0, amp = 1.0, norm = 0.0;
        for (int o = 0; o < octaves_; ++o) {
            int n = (cells_ << o) + 2;
            double x = u * (cells_ << o), y = v * (cells_ << o);
            int ix = std::min(static_cast<int>(x), n - 2), iy = std::min(static_cast<int>(y), n - 2);
            double fx = x - ix, fy = y - iy;
            fx = fx * fx * (3 - 2 * fx);
            fy = fy * fy * (3 - 2 * fy);
            const auto& g = grids_[o];
            auto at = [&](int a, int b) { return double(g[static_cast<std::size_t>(b) * n + a]); };
            double top = at(ix, iy) * (1 - fx) + at(ix + 1, iy) * fx;
            double bot = at(ix, iy + 1) * (1 - fx) + at(ix + 1, iy + 1) * fx;
            sum += amp * (top * (1 - fy) + bot * fy);
            norm += amp;
            amp *= 0.5;
        }
        return sum / norm;
    }

private:
    int cells_;
    int octaves_;
    std::vector<std::vector<float>> grids_;
};

struct Shape {
    bool disc;
    double cx, cy, rx, ry;
    double reflect[3];
    double shadow;  // illumination multiplier in the cast shadow
    double sdx, sdy;
};

}  // namespace

io::HdrImage synth_scene(int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw ParameterError("synth_scene: bad size");
    Rng rng(mix_seed(seed, 0xC0FFEE));
    ValueNoise texture(4 + static_cast<int>(rng.below(6)), 5, rng);
    ValueNoise illum(2, 2, rng);

    double sky = std::exp(rng.uniform(std::log(0.5), std::log(5.0)));
    double horizon = rng.uniform(0.25, 0.6);
    double ground_tint[3], sky_tint[3];
    for (int c = 0; c < 3; ++c) {
        ground_tint[c] = rng.uniform(0.15, 0.6);
        sky_tint[c] = rng.uniform(0.7, 1.0);
    }

    std::vector<Shape> shapes(4 + rng.below(9));
    for (auto& s : shapes) {
        s.disc = rng.uniform() < 0.4;
        s.cx = rng.uniform();
        s.cy = rng.uniform(0.2, 1.0);
        s.rx = rng.uniform(0.04, 0.25);
        s.ry = rng.uniform(0.04, 0.25);
        double albedo = std::exp(rng.uniform(std::log(0.02), std::log(0.9)));
        for (double& r : s.reflect) r = albedo * rng.uniform(0.6, 1.0);
        s.shadow = std::exp(rng.uniform(std::log(0.01), std::log(0.3)));
        s.sdx = rng.uniform(-0.15, 0.15);
        s.sdy = rng.uniform(0.02, 0.12);
    }
    struct Emitter {
        double cx, cy, r, power;
    };
    std::vector<Emitter> emitters(rng.below(4));
    for (auto& e : emitters) {
        e = {rng.uniform(), rng.uniform(0.0, 0.7), rng.uniform(0.01, 0.04),
             std::exp(rng.uniform(std::log(30.0), std::log(3000.0)))};
    }

    auto inside = [](const Shape& s, double u, double v, double ox, double oy) {
        double dx = (u - s.cx - ox) / s.rx, dy = (v - s.cy - oy) / s.ry;
        return s.disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
    };

    io::HdrImage img(width, height);
    const double aspect = double(width) / height;
    for (int y = 0; y < height; ++y) {
        double v = (y + 0.5) / height;
        for (int x = 0; x < width; ++x) {
            double u = (x + 0.5) / width;
            double tex = 1.0 + 0.35 * texture(u, v);
            double light = sky * std::exp(0.8 * illum(u, v));
            double rgb[3];
            if (v < horizon) {
                double grad = std::exp(-2.5 * (horizon - v));
                for (int c = 0; c < 3; ++c) rgb[c] = 4.0 * sky * sky_tint[c] * grad * (1.0 + 0.1 * tex);
            } else {
                for (int c = 0; c < 3; ++c) rgb[c] = light * ground_tint[c] * tex;
            }
            // Later shapes occlude earlier ones; shadows darken whatever lies beneath.
            for (const auto& s : shapes) {
                if (inside(s, u, v, s.sdx, s.sdy)) {
                    for (double& c : rgb) c *= s.shadow;
                }
                if (inside(s, u, v, 0.0, 0.0)) {
                    for (int c = 0; c < 3; ++c) rgb[c] = light * s.reflect[c] * tex;
                }
            }
            for (const auto& e : emitters) {
                double dx = (u - e.cx) * aspect, dy = v - e.cy;
                double d2 = (dx * dx + dy * dy) / (e.r * e.r);
                double glow = e.power * sky * std::exp(-d2);
                for (double& c : rgb) c += glow;
            }
            float* p = img.pixel(x, y);
            for (int c = 0; c < 3; ++c) p[c] = static_cast<float>(rgb[c]);
        }
    }
    return img;
}

double auto_exposure(const io::HdrImage& scene) {
    LuminanceMap lum = compute_luminance(scene);
    auto mid = lum.values.begin() + static_cast<std::ptrdiff_t>(lum.values.size() / 2);
    std::nth_element(lum.values.begin(), mid, lum.values.end());
    double median = std::max(double(*mid), 1e-12);
    return 0.18 / median;
}

io::LdrImage render_exposure(const io::HdrImage& scene, double exposure, const CaptureParams& cap, Rng& rng) {
    if (!(exposure > 0.0)) throw ParameterError("render_exposure: exposure must be > 0");
    io::LdrImage out(scene.width, scene.height);
    const double inv_gamma = 1.0 / cap.gamma;
    for (std::size_t i = 0; i < scene.data.size(); ++i) {
        double e = scene.data[i] * exposure;
        double sigma = std::sqrt(cap.shot_noise * cap.shot_noise * std::min(e, 1.0) + cap.read_noise * cap.read_noise);
        e = std::clamp(e + sigma * rng.normal(), 0.0, 1.0);
        out.data[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::pow(e, inv_gamma)));
    }
    return out;
}

ExposureStack capture_stack(const io::HdrImage& scene, int frames, double stops, const CaptureParams& cap, Rng& rng) {
    if (frames < 2) throw ParameterError("capture_stack: need at least two frames");
    ExposureStack st;
    double base = auto_exposure(scene);
    for (int k = 0; k < frames; ++k) {
        double ev = (k - (frames - 1) / 2.0) * stops;
        double t = base * std::exp2(ev);
        st.times.push_back(t);
        st.frames.push_back(render_exposure(scene, t, cap, rng));
    }
    return st;
}

}  // namespace hdrf::dataset
