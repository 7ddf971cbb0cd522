#include "hdrf/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "hdrf/error.hpp"

namespace hdrf::eval {
namespace {

const char* class_name(int c) { return c == 0 ? "MHDR" : "IHDR"; }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

Verify1Report evaluate_verify1(std::span<const ScoredBlock> blocks) {
    if (blocks.empty()) throw DataError("evaluate_verify1: no blocks");
    Verify1Report r;
    std::vector<double> scores, neg_scores;
    std::vector<int> labels, preds;
    std::map<std::uint32_t, std::vector<BlockVote>> per_image;
    std::map<std::uint32_t, int> image_label;
    for (const auto& b : blocks) {
        scores.push_back(b.score);
        neg_scores.push_back(-b.score);
        labels.push_back(b.label);
        preds.push_back(b.predicted);
        per_image[b.source_id].push_back({b.predicted, b.confidence});
        auto [it, fresh] = image_label.emplace(b.source_id, b.label);
        if (!fresh && it->second != b.label) {
            throw DataError("evaluate_verify1: image " + std::to_string(b.source_id) + " has mixed labels");
        }
    }
    r.block_accuracy = accuracy(preds, labels);
    r.roc = roc_auc(scores, labels, 1);
    const double auc_ihdr = r.roc.auc;
    const double auc_mhdr = roc_auc(neg_scores, labels, 0).auc;

    std::array<std::size_t, 2> hit{0, 0}, img_hit{0, 0};
    for (int c = 0; c < 2; ++c) r.rows[c].cls = c;
    for (const auto& b : blocks) {
        ++r.rows[b.label].blocks;
        hit[b.label] += b.predicted == b.label;
    }
    std::size_t mvs_hit = 0;
    for (const auto& [id, votes] : per_image) {
        VoteResult v = majority_vote(votes, id);
        const int truth = image_label[id];
        ++r.rows[truth].images;
        if (v.final_class == truth) {
            ++img_hit[truth];
            ++mvs_hit;
        }
        r.votes.push_back(std::move(v));
    }
    for (int c = 0; c < 2; ++c) {
        auto& row = r.rows[c];
        row.block_accuracy = row.blocks ? double(hit[c]) / double(row.blocks) : 0.0;
        row.mvs_accuracy = row.images ? double(img_hit[c]) / double(row.images) : 0.0;
    }
    r.rows[0].auc = auc_mhdr;
    r.rows[1].auc = auc_ihdr;
    r.mvs_accuracy = double(mvs_hit) / double(per_image.size());
    return r;
}

double evaluate_blocks(std::span<const ScoredBlock> blocks) {
    std::vector<int> preds, labels;
    for (const auto& b : blocks) {
        preds.push_back(b.predicted);
        labels.push_back(b.label);
    }
    return accuracy(preds, labels);
}

std::string format_table_cell(double block_accuracy, double mvs_accuracy) {
    return fixed(100.0 * block_accuracy, 2) + "(" + fixed(100.0 * mvs_accuracy, 2) + ")";
}

std::string verify1_csv(const Verify1Report& r) {
    std::ostringstream os;
    os << "class,blocks,images,block_accuracy,auc,mvs_accuracy,table_cell\n";
    for (const auto& row : r.rows) {
        os << class_name(row.cls) << ',' << row.blocks << ',' << row.images << ',' << fixed(row.block_accuracy, 6)
           << ',' << fixed(row.auc, 6) << ',' << fixed(row.mvs_accuracy, 6) << ','
           << format_table_cell(row.block_accuracy, row.mvs_accuracy) << '\n';
    }
    os << "ALL," << r.rows[0].blocks + r.rows[1].blocks << ',' << r.votes.size() << ','
       << fixed(r.block_accuracy, 6) << ',' << fixed(r.roc.auc, 6) << ',' << fixed(r.mvs_accuracy, 6) << ','
       << format_table_cell(r.block_accuracy, r.mvs_accuracy) << '\n';
    return os.str();
}

std::string verify2_csv(double block_accuracy, std::size_t blocks) {
    std::ostringstream os;
    os << "split,blocks,block_accuracy\n";
    os << "VERIFY2," << blocks << ',' << fixed(block_accuracy, 6) << '\n';
    return os.str();
}

std::string roc_csv(const RocCurve& roc) {
    std::ostringstream os;
    os << "fpr,tpr\n";
    for (auto [f, t] : roc.points) os << fixed(f, 8) << ',' << fixed(t, 8) << '\n';
    return os.str();
}

std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    const double x0 = 60, y0 = 20, side = 400;
    auto px = [&](double f) { return fixed(x0 + f * side, 2); };
    auto py = [&](double t) { return fixed(y0 + (1.0 - t) * side, 2); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"620\" height=\"480\" font-family=\"sans-serif\" "
          "font-size=\"12\">\n";
    os << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << side << "\" height=\"" << side
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double v = i / 5.0;
        os << "<text x=\"" << px(v) << "\" y=\"" << fixed(y0 + side + 16, 2) << "\" text-anchor=\"middle\">"
           << fixed(v, 1) << "</text>\n";
        os << "<text x=\"" << fixed(x0 - 6, 2) << "\" y=\"" << py(v) << "\" text-anchor=\"end\">" << fixed(v, 1)
           << "</text>\n";
    }
    os << "<text x=\"" << px(0.5) << "\" y=\"" << fixed(y0 + side + 34, 2)
       << "\" text-anchor=\"middle\">False positive rate</text>\n";
    os << "<text x=\"16\" y=\"" << py(0.5) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << py(0.5)
       << ")\">True positive rate</text>\n";
    os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
       << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const auto& [name, roc] = curves[k];
        const char* color = colors[k % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < roc.points.size(); ++i) {
            if (i) os << ' ';
            os << px(roc.points[i].first) << ',' << py(roc.points[i].second);
        }
        os << "\"/>\n";
        const double ly = y0 + 14 + 18.0 * k;
        os << "<line x1=\"" << x0 + side + 12 << "\" y1=\"" << fixed(ly - 4, 2) << "\" x2=\"" << x0 + side + 32
           << "\" y2=\"" << fixed(ly - 4, 2) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << x0 + side + 36 << "\" y=\"" << fixed(ly, 2) << "\">" << name
           << " (AUC " << fixed(roc.auc, 3) << ")</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace hdrf::eval
