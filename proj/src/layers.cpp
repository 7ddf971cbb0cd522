#include "hdrf/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hdrf/error.hpp"

namespace hdrf::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

void require_rank(const Shape& s, int rank, const char* what) {
    if (static_cast<int>(s.size()) != rank) {
        throw ParameterError(std::string(what) + ": expected rank " + std::to_string(rank) + " input, got " +
                             shape_string(s));
    }
}

int pooled_extent(int in, int window, int stride, int pad, const char* what) {
    int span = in + 2 * pad - window;
    if (span < 0) throw ParameterError(std::string(what) + ": window larger than input");
    return span / stride + 1;
}

// cols[(c*k + u)*k + v][i*wo + j] = x[c][i*s + u - pad][j*s + v - pad]
template <typename T>
void im2col(const T* x, int c, int h, int w, int k, int s, int pad, int ho, int wo, T* cols) {
    for (int ci = 0; ci < c; ++ci) {
        const T* plane = x + static_cast<std::size_t>(ci) * h * w;
        for (int u = 0; u < k; ++u) {
            for (int v = 0; v < k; ++v) {
                T* row = cols + (static_cast<std::size_t>(ci * k + u) * k + v) * ho * wo;
                for (int i = 0; i < ho; ++i) {
                    int y = i * s + u - pad;
                    T* dst = row + static_cast<std::size_t>(i) * wo;
                    if (y < 0 || y >= h) {
                        std::fill(dst, dst + wo, T(0));
                        continue;
                    }
                    const T* src = plane + static_cast<std::size_t>(y) * w;
                    for (int j = 0; j < wo; ++j) {
                        int xx = j * s + v - pad;
                        dst[j] = (xx >= 0 && xx < w) ? src[xx] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im(const T* cols, int c, int h, int w, int k, int s, int pad, int ho, int wo, T* x) {
    for (int ci = 0; ci < c; ++ci) {
        T* plane = x + static_cast<std::size_t>(ci) * h * w;
        for (int u = 0; u < k; ++u) {
            for (int v = 0; v < k; ++v) {
                const T* row = cols + (static_cast<std::size_t>(ci * k + u) * k + v) * ho * wo;
                for (int i = 0; i < ho; ++i) {
                    int y = i * s + u - pad;
                    if (y < 0 || y >= h) continue;
                    T* dst = plane + static_cast<std::size_t>(y) * w;
                    const T* src = row + static_cast<std::size_t>(i) * wo;
                    for (int j = 0; j < wo; ++j) {
                        int xx = j * s + v - pad;
                        if (xx >= 0 && xx < w) dst[xx] += src[j];
                    }
                }
            }
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad)
    : cin_(in_channels), cout_(out_channels), k_(kernel), stride_(stride), pad_(pad) {
    if (cin_ < 1 || cout_ < 1 || k_ < 1 || stride_ < 1 || pad_ < 0) {
        throw ParameterError("conv2d: bad configuration");
    }
    w_ = Tensor<T>({cout_, cin_, k_, k_});
    b_ = Tensor<T>({cout_});
    gw_ = Tensor<T>(w_.shape());
    gb_ = Tensor<T>(b_.shape());
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
    require_rank(in, 4, "conv2d");
    if (in[1] != cin_) {
        throw ParameterError("conv2d: expected " + std::to_string(cin_) + " input channels, got " + shape_string(in));
    }
    return {in[0], cout_, pooled_extent(in[2], k_, stride_, pad_, "conv2d"),
            pooled_extent(in[3], k_, stride_, pad_, "conv2d")};
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Mode) {
    Shape os = output_shape(x.shape());
    x_ = x;
    const int n = os[0], h = x.dim(2), w = x.dim(3), ho = os[2], wo = os[3];
    const int kk = cin_ * k_ * k_, hw = ho * wo;
    Tensor<T> out(os);
    std::vector<T> cols(static_cast<std::size_t>(kk) * hw);
    ConstMatMap<T> wm(w_.data(), cout_, kk);
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bv(b_.data(), cout_);
    for (int i = 0; i < n; ++i) {
        const T* xi = x.data() + static_cast<std::size_t>(i) * cin_ * h * w;
        T* yi = out.data() + static_cast<std::size_t>(i) * cout_ * hw;
        MatMap<T> ym(yi, cout_, hw);
        if (k_ == 1 && stride_ == 1 && pad_ == 0) {
            ym.noalias() = wm * ConstMatMap<T>(xi, cin_, hw);
        } else {
            im2col(xi, cin_, h, w, k_, stride_, pad_, ho, wo, cols.data());
            ym.noalias() = wm * ConstMatMap<T>(cols.data(), kk, hw);
        }
        ym.colwise() += bv;
    }
    return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& g) {
    const Shape os = output_shape(x_.shape());
    require_shape(g.shape(), os, "conv2d backward");
    const int n = os[0], h = x_.dim(2), w = x_.dim(3), ho = os[2], wo = os[3];
    const int kk = cin_ * k_ * k_, hw = ho * wo;
    Tensor<T> dx(x_.shape());
    std::vector<T> cols(static_cast<std::size_t>(kk) * hw);
    std::vector<T> dcols(static_cast<std::size_t>(kk) * hw);
    ConstMatMap<T> wm(w_.data(), cout_, kk);
    MatMap<T> gwm(gw_.data(), cout_, kk);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gbv(gb_.data(), cout_);
    const bool pointwise = k_ == 1 && stride_ == 1 && pad_ == 0;
    for (int i = 0; i < n; ++i) {
        const T* xi = x_.data() + static_cast<std::size_t>(i) * cin_ * h * w;
        ConstMatMap<T> gm(g.data() + static_cast<std::size_t>(i) * cout_ * hw, cout_, hw);
        T* dxi = dx.data() + static_cast<std::size_t>(i) * cin_ * h * w;
        // Plain loop: Eigen's vectorized reductions peel by pointer alignment, which makes
        // the summation order (and the last bits) depend on where the batch was allocated.
        for (int c = 0; c < cout_; ++c) {
            const T* row = g.data() + (static_cast<std::size_t>(i) * cout_ + c) * hw;
            gbv[c] += static_cast<T>(std::accumulate(row, row + hw, 0.0));
        }
        if (pointwise) {
            gwm.noalias() += gm * ConstMatMap<T>(xi, cin_, hw).transpose();
            MatMap<T>(dxi, cin_, hw).noalias() = wm.transpose() * gm;
        } else {
            im2col(xi, cin_, h, w, k_, stride_, pad_, ho, wo, cols.data());
            gwm.noalias() += gm * ConstMatMap<T>(cols.data(), kk, hw).transpose();
            MatMap<T>(dcols.data(), kk, hw).noalias() = wm.transpose() * gm;
            col2im(dcols.data(), cin_, h, w, k_, stride_, pad_, ho, wo, dxi);
        }
    }
    return dx;
}

template <typename T>
std::vector<ParamRef<T>> Conv2d<T>::params() {
    return {{"conv.weight", &w_, &gw_}, {"conv.bias", &b_, &gb_}};
}

// ---------------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
    if (channels < 1 || !(eps > 0) || momentum < 0 || momentum > 1) throw ParameterError("batchnorm: bad configuration");
    gamma_ = Tensor<T>({channels}, T(1));
    beta_ = Tensor<T>({channels});
    ggamma_ = Tensor<T>({channels});
    gbeta_ = Tensor<T>({channels});
    running_mean_ = Tensor<T>({channels});
    running_var_ = Tensor<T>({channels}, T(1));
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
    require_rank(x.shape(), 4, "batchnorm");
    if (x.dim(1) != channels_) throw ParameterError("batchnorm: channel mismatch " + shape_string(x.shape()));
    const int n = x.dim(0), hw = x.dim(2) * x.dim(3);
    Tensor<T> y(x.shape());
    last_mode_ = mode;
    if (mode == Mode::EVAL) {
        for (int c = 0; c < channels_; ++c) {
            double inv = 1.0 / std::sqrt(double(running_var_[c]) + eps_);
            double scale = gamma_[c] * inv;
            double shift = beta_[c] - running_mean_[c] * scale;
            for (int i = 0; i < n; ++i) {
                const T* src = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * hw;
                T* dst = y.data() + (static_cast<std::size_t>(i) * channels_ + c) * hw;
                for (int k = 0; k < hw; ++k) dst[k] = static_cast<T>(src[k] * scale + shift);
            }
        }
        return y;
    }
    if (n < 2) throw ParameterError("batchnorm: TRAIN mode needs a batch of at least 2");
    xhat_ = Tensor<T>(x.shape());
    inv_std_.assign(channels_, 0.0);
    const double m = double(n) * hw;
    for (int c = 0; c < channels_; ++c) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const T* src = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * hw;
            for (int k = 0; k < hw; ++k) sum += src[k];
        }
        double mean = sum / m;
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const T* src = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * hw;
            for (int k = 0; k < hw; ++k) ss += (src[k] - mean) * (src[k] - mean);
        }
        double var = ss / m;
        double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = inv;
        for (int i = 0; i < n; ++i) {
            std::size_t off = (static_cast<std::size_t>(i) * channels_ + c) * hw;
            for (int k = 0; k < hw; ++k) {
                double xh = (x[off + k] - mean) * inv;
                xhat_[off + k] = static_cast<T>(xh);
                y[off + k] = static_cast<T>(gamma_[c] * xh + beta_[c]);
            }
        }
        double unbiased = m > 1 ? ss / (m - 1) : var;
        running_mean_[c] = static_cast<T>(momentum_ * running_mean_[c] + (1 - momentum_) * mean);
        running_var_[c] = static_cast<T>(momentum_ * running_var_[c] + (1 - momentum_) * unbiased);
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& g) {
    require_shape(g.shape(), xhat_.shape(), "batchnorm backward");
    if (last_mode_ != Mode::TRAIN) throw ParameterError("batchnorm: backward requires a TRAIN forward");
    const int n = g.dim(0), hw = g.dim(2) * g.dim(3);
    const double m = double(n) * hw;
    Tensor<T> dx(g.shape());
    for (int c = 0; c < channels_; ++c) {
        double sg = 0.0, sgx = 0.0;
        for (int i = 0; i < n; ++i) {
            std::size_t off = (static_cast<std::size_t>(i) * channels_ + c) * hw;
            for (int k = 0; k < hw; ++k) {
                sg += g[off + k];
                sgx += double(g[off + k]) * xhat_[off + k];
            }
        }
        ggamma_[c] += static_cast<T>(sgx);
        gbeta_[c] += static_cast<T>(sg);
        double scale = gamma_[c] * inv_std_[c] / m;
        for (int i = 0; i < n; ++i) {
            std::size_t off = (static_cast<std::size_t>(i) * channels_ + c) * hw;
            for (int k = 0; k < hw; ++k) {
                dx[off + k] = static_cast<T>(scale * (m * g[off + k] - sg - xhat_[off + k] * sgx));
            }
        }
    }
    return dx;
}

template <typename T>
std::vector<ParamRef<T>> BatchNorm2d<T>::params() {
    return {{"bn.gamma", &gamma_, &ggamma_}, {"bn.beta", &beta_, &gbeta_}};
}

// ---------------------------------------------------------------- ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode) {
    x_ = x;
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& g) {
    require_shape(g.shape(), x_.shape(), "relu backward");
    Tensor<T> dx(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] = x_[i] > T(0) ? g[i] : T(0);
    return dx;
}

// ---------------------------------------------------------------- MaxPool2d

template <typename T>
Shape MaxPool2d<T>::output_shape(const Shape& in) const {
    require_rank(in, 4, "maxpool");
    return {in[0], in[1], pooled_extent(in[2], window_, stride_, 0, "maxpool"),
            pooled_extent(in[3], window_, stride_, 0, "maxpool")};
}

template <typename T>
Tensor<T> MaxPool2d<T>::forward(const Tensor<T>& x, Mode) {
    Shape os = output_shape(x.shape());
    in_shape_ = x.shape();
    Tensor<T> y(os);
    argmax_.assign(y.size(), 0);
    const int h = x.dim(2), w = x.dim(3), ho = os[2], wo = os[3];
    std::size_t o = 0;
    for (int p = 0; p < os[0] * os[1]; ++p) {
        std::size_t base = static_cast<std::size_t>(p) * h * w;
        for (int i = 0; i < ho; ++i) {
            for (int j = 0; j < wo; ++j, ++o) {
                std::size_t best = base + static_cast<std::size_t>(i * stride_) * w + j * stride_;
                T bv = x[best];
                for (int u = 0; u < window_; ++u) {
                    for (int v = 0; v < window_; ++v) {
                        std::size_t idx = base + static_cast<std::size_t>(i * stride_ + u) * w + j * stride_ + v;
                        if (x[idx] > bv) {
                            bv = x[idx];
                            best = idx;
                        }
                    }
                }
                y[o] = bv;
                argmax_[o] = best;
            }
        }
    }
    return y;
}

template <typename T>
Tensor<T> MaxPool2d<T>::backward(const Tensor<T>& g) {
    require_shape(g.shape(), output_shape(in_shape_), "maxpool backward");
    Tensor<T> dx(in_shape_);
    for (std::size_t o = 0; o < g.size(); ++o) dx[argmax_[o]] += g[o];
    return dx;
}

// ---------------------------------------------------------------- AvgPool2d

template <typename T>
AvgPool2d<T>::AvgPool2d(int window, int stride, int pad) : window_(window), stride_(stride), pad_(pad) {
    if (window < 1 || stride < 1 || pad < 0 || pad >= window) throw ParameterError("avgpool: bad configuration");
}

template <typename T>
Shape AvgPool2d<T>::output_shape(const Shape& in) const {
    require_rank(in, 4, "avgpool");
    return {in[0], in[1], pooled_extent(in[2], window_, stride_, pad_, "avgpool"),
            pooled_extent(in[3], window_, stride_, pad_, "avgpool")};
}

template <typename T>
Tensor<T> AvgPool2d<T>::forward(const Tensor<T>& x, Mode) {
    Shape os = output_shape(x.shape());
    in_shape_ = x.shape();
    Tensor<T> y(os);
    const int h = x.dim(2), w = x.dim(3), ho = os[2], wo = os[3];
    std::size_t o = 0;
    for (int p = 0; p < os[0] * os[1]; ++p) {
        const T* plane = x.data() + static_cast<std::size_t>(p) * h * w;
        for (int i = 0; i < ho; ++i) {
            int y0 = std::max(0, i * stride_ - pad_), y1 = std::min(h, i * stride_ - pad_ + window_);
            for (int j = 0; j < wo; ++j, ++o) {
                int x0 = std::max(0, j * stride_ - pad_), x1 = std::min(w, j * stride_ - pad_ + window_);
                double acc = 0.0;
                for (int yy = y0; yy < y1; ++yy) {
                    for (int xx = x0; xx < x1; ++xx) acc += plane[static_cast<std::size_t>(yy) * w + xx];
                }
                y[o] = static_cast<T>(acc / double((y1 - y0) * (x1 - x0)));
            }
        }
    }
    return y;
}

template <typename T>
Tensor<T> AvgPool2d<T>::backward(const Tensor<T>& g) {
    Shape os = output_shape(in_shape_);
    require_shape(g.shape(), os, "avgpool backward");
    Tensor<T> dx(in_shape_);
    const int h = in_shape_[2], w = in_shape_[3], ho = os[2], wo = os[3];
    std::size_t o = 0;
    for (int p = 0; p < os[0] * os[1]; ++p) {
        T* plane = dx.data() + static_cast<std::size_t>(p) * h * w;
        for (int i = 0; i < ho; ++i) {
            int y0 = std::max(0, i * stride_ - pad_), y1 = std::min(h, i * stride_ - pad_ + window_);
            for (int j = 0; j < wo; ++j, ++o) {
                int x0 = std::max(0, j * stride_ - pad_), x1 = std::min(w, j * stride_ - pad_ + window_);
                T share = static_cast<T>(g[o] / double((y1 - y0) * (x1 - x0)));
                for (int yy = y0; yy < y1; ++yy) {
                    for (int xx = x0; xx < x1; ++xx) plane[static_cast<std::size_t>(yy) * w + xx] += share;
                }
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------- GlobalAvgPool / Flatten

template <typename T>
Shape GlobalAvgPool<T>::output_shape(const Shape& in) const {
    require_rank(in, 4, "global_avgpool");
    return {in[0], in[1]};
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, Mode) {
    Shape os = output_shape(x.shape());
    in_shape_ = x.shape();
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    Tensor<T> y(os);
    for (std::size_t p = 0; p < y.size(); ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < hw; ++k) acc += x[p * hw + k];
        y[p] = static_cast<T>(acc / double(hw));
    }
    return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& g) {
    require_shape(g.shape(), output_shape(in_shape_), "global_avgpool backward");
    const std::size_t hw = static_cast<std::size_t>(in_shape_[2]) * in_shape_[3];
    Tensor<T> dx(in_shape_);
    for (std::size_t p = 0; p < g.size(); ++p) {
        T share = static_cast<T>(g[p] / double(hw));
        std::fill(dx.data() + p * hw, dx.data() + (p + 1) * hw, share);
    }
    return dx;
}

template <typename T>
Shape Flatten<T>::output_shape(const Shape& in) const {
    if (in.empty()) throw ParameterError("flatten: empty shape");
    std::size_t rest = 1;
    for (std::size_t i = 1; i < in.size(); ++i) rest *= static_cast<std::size_t>(in[i]);
    return {in[0], static_cast<int>(rest)};
}

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& x, Mode) {
    in_shape_ = x.shape();
    return x.reshaped(output_shape(x.shape()));
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& g) {
    return g.reshaped(in_shape_);
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(int in_features, int out_features) : in_(in_features), out_(out_features) {
    if (in_ < 1 || out_ < 1) throw ParameterError("dense: bad configuration");
    w_ = Tensor<T>({out_, in_});
    b_ = Tensor<T>({out_});
    gw_ = Tensor<T>(w_.shape());
    gb_ = Tensor<T>(b_.shape());
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& in) const {
    require_rank(in, 2, "dense");
    if (in[1] != in_) {
        throw ParameterError("dense: expected " + std::to_string(in_) + " features, got " + shape_string(in));
    }
    return {in[0], out_};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
    Shape os = output_shape(x.shape());
    x_ = x;
    Tensor<T> y(os);
    MatMap<T> ym(y.data(), os[0], out_);
    ym.noalias() = ConstMatMap<T>(x.data(), os[0], in_) * ConstMatMap<T>(w_.data(), out_, in_).transpose();
    ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b_.data(), out_);
    return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& g) {
    require_shape(g.shape(), output_shape(x_.shape()), "dense backward");
    const int n = g.dim(0);
    ConstMatMap<T> gm(g.data(), n, out_);
    MatMap<T>(gw_.data(), out_, in_).noalias() += gm.transpose() * ConstMatMap<T>(x_.data(), n, in_);
    for (int o = 0; o < out_; ++o) {
        double acc = 0.0;
        for (int r = 0; r < n; ++r) acc += g[static_cast<std::size_t>(r) * out_ + o];
        gb_[o] += static_cast<T>(acc);
    }
    Tensor<T> dx(x_.shape());
    MatMap<T>(dx.data(), n, in_).noalias() = gm * ConstMatMap<T>(w_.data(), out_, in_);
    return dx;
}

template <typename T>
std::vector<ParamRef<T>> Dense<T>::params() {
    return {{"dense.weight", &w_, &gw_}, {"dense.bias", &b_, &gb_}};
}

// ---------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed) {
    if (!(p >= 0.0 && p < 1.0)) throw ParameterError("dropout: p must lie in [0, 1)");
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, Mode mode) {
    active_ = mode == Mode::TRAIN && p_ > 0.0;
    if (!active_) return x;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p_));
    mask_.resize(x.size());
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask_[i] = rng_.uniform() < p_ ? T(0) : keep_scale;
        y[i] = x[i] * mask_[i];
    }
    return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& g) {
    if (!active_) return g;
    if (g.size() != mask_.size()) throw ParameterError("dropout backward: shape mismatch");
    Tensor<T> dx(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] = g[i] * mask_[i];
    return dx;
}

// ---------------------------------------------------------------- Sequential

template <typename T>
Shape Sequential<T>::output_shape(const Shape& in) const {
    Shape s = in;
    for (const auto& l : layers_) s = l->output_shape(s);
    return s;
}

template <typename T>
std::vector<Shape> Sequential<T>::shape_walk(const Shape& in) const {
    std::vector<Shape> walk{in};
    for (const auto& l : layers_) walk.push_back(l->output_shape(walk.back()));
    return walk;
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, mode);
    return cur;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& g) {
    Tensor<T> cur = g;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

template <typename T>
std::vector<ParamRef<T>> Sequential<T>::params() {
    std::vector<ParamRef<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        for (auto& p : layers_[i]->params()) {
            p.name = std::to_string(i) + "." + p.name;
            out.push_back(p);
        }
    }
    return out;
}

template <typename T>
std::vector<Tensor<T>*> Sequential<T>::buffers() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_) {
        for (auto* b : l->buffers()) out.push_back(b);
    }
    return out;
}

template <typename T>
void Sequential<T>::reseed(std::uint64_t seed) {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->reseed(mix_seed(seed, i));
}

// ---------------------------------------------------------------- ResidualBlock

template <typename T>
ResidualBlock<T>::ResidualBlock(int in_channels, int out_channels, int stride)
    : cin_(in_channels), cout_(out_channels), stride_(stride) {
    main_.template emplace<Conv2d<T>>(cin_, cout_, 3, stride_, 1);
    main_.template emplace<BatchNorm2d<T>>(cout_);
    main_.template emplace<ReLU<T>>();
    main_.template emplace<Conv2d<T>>(cout_, cout_, 3, 1, 1);
    main_.template emplace<BatchNorm2d<T>>(cout_);
    if (cin_ != cout_ || stride_ != 1) projection_ = std::make_unique<Conv2d<T>>(cin_, cout_, 1, stride_, 0);
}

template <typename T>
Shape ResidualBlock<T>::output_shape(const Shape& in) const {
    Shape m = main_.output_shape(in);
    Shape s = projection_ ? projection_->output_shape(in) : in;
    if (m != s) {
        throw ParameterError("residual: branch shapes differ, main " + shape_string(m) + " vs shortcut " +
                             shape_string(s));
    }
    return m;
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, Mode mode) {
    output_shape(x.shape());
    Tensor<T> m = main_.forward(x, mode);
    Tensor<T> s = projection_ ? projection_->forward(x, mode) : x;
    sum_ = std::move(m);
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += s[i];
    Tensor<T> y(sum_.shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = sum_[i] > T(0) ? sum_[i] : T(0);
    return y;
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& g) {
    require_shape(g.shape(), sum_.shape(), "residual backward");
    Tensor<T> gs(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) gs[i] = sum_[i] > T(0) ? g[i] : T(0);
    Tensor<T> dx = main_.backward(gs);
    if (projection_) {
        Tensor<T> ds = projection_->backward(gs);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ds[i];
    } else {
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += gs[i];
    }
    return dx;
}

template <typename T>
std::vector<ParamRef<T>> ResidualBlock<T>::params() {
    std::vector<ParamRef<T>> out;
    for (auto& p : main_.params()) {
        p.name = "main." + p.name;
        out.push_back(p);
    }
    if (projection_) {
        for (auto& p : projection_->params()) {
            p.name = "shortcut." + p.name;
            out.push_back(p);
        }
    }
    return out;
}

template <typename T>
std::vector<Tensor<T>*> ResidualBlock<T>::buffers() {
    return main_.buffers();
}

// ---------------------------------------------------------------- loss

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    require_rank(logits.shape(), 2, "softmax");
    const int n = logits.dim(0), k = logits.dim(1);
    Tensor<T> p(logits.shape());
    for (int i = 0; i < n; ++i) {
        const T* row = logits.data() + static_cast<std::size_t>(i) * k;
        double mx = *std::max_element(row, row + k);
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(double(row[j]) - mx);
        for (int j = 0; j < k; ++j) p[static_cast<std::size_t>(i) * k + j] = static_cast<T>(std::exp(double(row[j]) - mx) / z);
    }
    return p;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
    require_rank(logits.shape(), 2, "softmax_cross_entropy");
    const int n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int>(labels.size()) != n) throw ParameterError("softmax_cross_entropy: label count mismatch");
    LossResult<T> r;
    r.probs = softmax(logits);
    r.grad = Tensor<T>(logits.shape());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= k) throw ParameterError("softmax_cross_entropy: label " + std::to_string(y) + " out of range");
        const T* row = logits.data() + static_cast<std::size_t>(i) * k;
        double mx = *std::max_element(row, row + k);
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(double(row[j]) - mx);
        total += -(double(row[y]) - mx - std::log(z));
        for (int j = 0; j < k; ++j) {
            double pj = std::exp(double(row[j]) - mx) / z;
            r.grad[static_cast<std::size_t>(i) * k + j] = static_cast<T>((pj - (j == y ? 1.0 : 0.0)) / n);
        }
    }
    r.loss = total / n;
    return r;
}

// ---------------------------------------------------------------- init

template <typename T>
void he_initialize(Layer<T>& root, Rng& rng) {
    auto fill_normal = [&](Tensor<T>& t, double stddev) {
        for (auto& v : t.values()) v = static_cast<T>(stddev * rng.normal());
    };
    if (auto* seq = dynamic_cast<Sequential<T>*>(&root)) {
        for (std::size_t i = 0; i < seq->size(); ++i) he_initialize(seq->layer(i), rng);
    } else if (auto* res = dynamic_cast<ResidualBlock<T>*>(&root)) {
        he_initialize(res->main_path(), rng);
        if (res->projection()) he_initialize(*res->projection(), rng);
    } else if (auto* conv = dynamic_cast<Conv2d<T>*>(&root)) {
        const Shape& s = conv->weight().shape();
        fill_normal(conv->weight(), std::sqrt(2.0 / (s[1] * s[2] * s[3])));
        conv->bias().fill(T(0));
    } else if (auto* dense = dynamic_cast<Dense<T>*>(&root)) {
        fill_normal(dense->weight(), std::sqrt(2.0 / dense->weight().dim(1)));
        dense->bias().fill(T(0));
    } else if (auto* bn = dynamic_cast<BatchNorm2d<T>*>(&root)) {
        bn->gamma().fill(T(1));
        bn->beta().fill(T(0));
        bn->running_mean().fill(T(0));
        bn->running_var().fill(T(1));
    }
}

#define HDRF_INSTANTIATE(T)                                                             \
    template class Conv2d<T>;                                                           \
    template class BatchNorm2d<T>;                                                      \
    template class ReLU<T>;                                                             \
    template class MaxPool2d<T>;                                                        \
    template class AvgPool2d<T>;                                                        \
    template class GlobalAvgPool<T>;                                                    \
    template class Flatten<T>;                                                          \
    template class Dense<T>;                                                            \
    template class Dropout<T>;                                                          \
    template class Sequential<T>;                                                       \
    template class ResidualBlock<T>;                                                    \
    template Tensor<T> softmax<T>(const Tensor<T>&);                                    \
    template LossResult<T> softmax_cross_entropy<T>(const Tensor<T>&, std::span<const int>); \
    template void he_initialize<T>(Layer<T>&, Rng&);

HDRF_INSTANTIATE(float)
HDRF_INSTANTIATE(double)

#undef HDRF_INSTANTIATE

}  // namespace hdrf::nn
