#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace lidarforge {

/// C x C counts indexed [prediction][ground truth].
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes);

    void add(std::size_t predicted, std::size_t truth, std::uint64_t count = 1);
    void merge(const ConfusionMatrix &other);

    [[nodiscard]] std::size_t classes() const { return classes_; }
    [[nodiscard]] std::uint64_t at(std::size_t predicted, std::size_t truth) const {
        return counts_[predicted * classes_ + truth];
    }
    [[nodiscard]] std::uint64_t total() const;
    [[nodiscard]] std::uint64_t predicted_total(std::size_t cls) const;
    [[nodiscard]] std::uint64_t truth_total(std::size_t cls) const;

    static ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>> &rows);

    bool operator==(const ConfusionMatrix &) const = default;

private:
    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
};

struct IouReport {
    /// Empty optional where the class was neither predicted nor present.
    std::vector<std::optional<double>> per_class;
    double mean = 0.0;
    std::size_t defined_classes = 0;
};

/// IoU_i = cm[i][i] / (row_i + col_i - cm[i][i]); the mean runs over classes
/// with a non-empty union. Classes flagged in `excluded` (if given) are
/// reported as undefined. Throws ValidationError when no class is defined.
IouReport miou(const ConfusionMatrix &cm, const std::vector<bool> &excluded = {});

}  // namespace lidarforge
