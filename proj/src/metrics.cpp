#include "lidarforge/metrics.hpp"

#include <algorithm>
#include <string>

#include "lidarforge/error.hpp"

namespace lidarforge {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
    if (classes == 0) { throw ValidationError("confusion matrix needs at least one class"); }
}

void ConfusionMatrix::add(std::size_t predicted, std::size_t truth, std::uint64_t count) {
    if (predicted >= classes_ || truth >= classes_) {
        throw ValidationError("confusion matrix index out of range: (" + std::to_string(predicted) + ", " +
                              std::to_string(truth) + ") for " + std::to_string(classes_) + " classes");
    }
    counts_[predicted * classes_ + truth] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix &other) {
    if (other.classes_ != classes_) { throw ValidationError("cannot merge confusion matrices of different size"); }
    for (std::size_t i = 0; i < counts_.size(); ++i) { counts_[i] += other.counts_[i]; }
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (const auto c : counts_) { sum += c; }
    return sum;
}

std::uint64_t ConfusionMatrix::predicted_total(std::size_t cls) const {
    std::uint64_t sum = 0;
    for (std::size_t j = 0; j < classes_; ++j) { sum += at(cls, j); }
    return sum;
}

std::uint64_t ConfusionMatrix::truth_total(std::size_t cls) const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < classes_; ++i) { sum += at(i, cls); }
    return sum;
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::uint64_t>> &rows) {
    ConfusionMatrix cm(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) { throw ValidationError("confusion matrix rows must be square"); }
        for (std::size_t j = 0; j < rows.size(); ++j) { cm.add(i, j, rows[i][j]); }
    }
    return cm;
}

IouReport miou(const ConfusionMatrix &cm, const std::vector<bool> &excluded) {
    IouReport report;
    report.per_class.resize(cm.classes());
    std::vector<double> defined;
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        if (i < excluded.size() && excluded[i]) { continue; }
        const std::uint64_t hit = cm.at(i, i);
        const std::uint64_t uni = cm.predicted_total(i) + cm.truth_total(i) - hit;
        if (uni == 0) { continue; }
        const double iou = static_cast<double>(hit) / static_cast<double>(uni);
        report.per_class[i] = iou;
        defined.push_back(iou);
    }
    report.defined_classes = defined.size();
    if (report.defined_classes == 0) { throw ValidationError("mIoU undefined: no class was predicted or present"); }
    // Summing in sorted order makes the mean independent of class order.
    std::sort(defined.begin(), defined.end());
    double sum = 0.0;
    for (const double v : defined) { sum += v; }
    report.mean = sum / static_cast<double>(report.defined_classes);
    return report;
}

}  // namespace lidarforge
