#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hdrf/metrics.hpp"

namespace hdrf::eval {

/// One block's outcome from any classifier. score orders blocks by IHDR-ness
/// (softmax p_ihdr for the CNN, the margin for the SVM).
struct ScoredBlock {
    std::uint32_t source_id = 0;
    int label = 0;
    int predicted = 0;
    double score = 0.0;
    double confidence = 0.0;  // confidence in `predicted`
};

struct ClassRow {
    int cls = 0;
    std::size_t blocks = 0;
    std::size_t images = 0;
    double block_accuracy = 0.0;
    double auc = 0.0;  // this class taken as positive
    double mvs_accuracy = 0.0;
};

struct Verify1Report {
    std::array<ClassRow, 2> rows;
    double block_accuracy = 0.0;
    double mvs_accuracy = 0.0;
    RocCurve roc;  // IHDR positive
    std::vector<VoteResult> votes;
};

/// Per-class block accuracy, per-class AUC and image accuracy after majority voting.
Verify1Report evaluate_verify1(std::span<const ScoredBlock> blocks);

/// Pooled block accuracy (the leftover-block set is scored without voting).
double evaluate_blocks(std::span<const ScoredBlock> blocks);

/// "93.26(100.00)"-style cell: block accuracy with the MVS accuracy in brackets, both in percent.
std::string format_table_cell(double block_accuracy, double mvs_accuracy);

std::string verify1_csv(const Verify1Report& r);
std::string verify2_csv(double block_accuracy, std::size_t blocks);
std::string roc_csv(const RocCurve& roc);
/// Standalone SVG with axes, the chance diagonal and each named curve.
std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves);

}  // namespace hdrf::eval
