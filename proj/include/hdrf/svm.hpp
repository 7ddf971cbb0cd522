#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hdrf::features {

/// Row-major dense sample matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// Linear soft-margin SVM over standardized features. Class 1 is the positive side.
struct SvmModel {
    std::vector<double> weights;  // in standardized space
    double bias = 0.0;
    double c = 1.0;
    std::string tag;  // free-form label stored with the model, e.g. the feature kind
    double cv_accuracy = 0.0;
    std::vector<double> mean;   // per-dimension standardization
    std::vector<double> scale;  // 1 / std (1 where the dimension is constant)
};

struct SvmOptions {
    std::vector<double> grid{0.01, 0.1, 1.0, 10.0, 100.0};
    int folds = 5;
    int epochs = 20;
    std::uint64_t seed = 0;
};

struct PegasosResult {
    std::vector<double> weights;  // averaged iterate; last entry is the bias
    std::vector<double> objective_per_epoch;  // primal objective of the averaged iterate
};

/// Pegasos with a seeded permutation per epoch and projection onto the 1/sqrt(lambda) ball,
/// lambda = 1 / (C n). The bias is learned as the weight of a constant-one feature.
/// labels are in {-1, +1}; x must already be standardized.
PegasosResult pegasos(const Matrix& x, std::span<const int> signs, double c, int epochs, std::uint64_t seed);

/// lambda/2 |w|^2 + mean hinge loss, with w including the bias weight.
double svm_objective(const Matrix& x, std::span<const int> signs, std::span<const double> w_with_bias, double lambda);

/// Standardizes with training statistics, grid-searches C by k-fold accuracy (first best wins),
/// and refits on all data. labels are class indices {0, 1}. Throws DataError for single-class input.
SvmModel svm_train(const Matrix& features, std::span<const int> labels, const SvmOptions& opt = {});

struct SvmPrediction {
    int label = 0;        // 1 when margin > 0
    double margin = 0.0;  // w . standardize(x) + b
};

SvmPrediction svm_predict(const SvmModel& model, std::span<const float> feature);

std::string serialize_svm(const SvmModel& m);
SvmModel parse_svm(const std::string& text);

}  // namespace hdrf::features
