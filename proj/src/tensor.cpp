#include "hdrf/tensor.hpp"

#include <cmath>
#include <sstream>

#include "hdrf/error.hpp"

namespace hdrf::nn {

std::string shape_string(const Shape& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ')';
    return os.str();
}

std::size_t shape_volume(const Shape& s) {
    std::size_t v = 1;
    for (int d : s) {
        if (d < 0) throw ParameterError("negative tensor dimension in " + shape_string(s));
        v *= static_cast<std::size_t>(d);
    }
    return v;
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape s) const {
    if (shape_volume(s) != data_.size()) {
        throw ParameterError("cannot reshape " + shape_string(shape_) + " to " + shape_string(s));
    }
    Tensor<T> out;
    out.shape_ = std::move(s);
    out.data_ = data_;
    return out;
}

template <typename T>
bool Tensor<T>::all_finite() const {
    for (T v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_shape(const Shape& got, const Shape& want, const char* what) {
    if (got != want) {
        throw ParameterError(std::string(what) + ": expected shape " + shape_string(want) + ", got " +
                             shape_string(got));
    }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace hdrf::nn
