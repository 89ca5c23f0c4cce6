#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidarforge/augment.hpp"
#include "lidarforge/config.hpp"
#include "lidarforge/forge.hpp"
#include "lidarforge/metrics.hpp"
#include "lidarforge/spatial_histogram.hpp"

namespace lidarforge {

struct ScanPair {
    std::string frame_id;
    std::filesystem::path points;
    std::filesystem::path labels;
};

/// Every `*.bin` in `scans_dir` paired with `<labels_dir>/<stem>.label`,
/// sorted by frame id. Throws ValidationError on a missing label file.
std::vector<ScanPair> list_scan_pairs(const std::filesystem::path &scans_dir, const std::filesystem::path &labels_dir);

SpatialHistogram histogram_from_directories(const std::filesystem::path &scans_dir,
                                            const std::filesystem::path &labels_dir,
                                            const std::vector<CategoryInfo> &categories, const GridConfig &grid,
                                            double cluster_distance, HistogramDiagnostics *diagnostics = nullptr);

/// Runs fn(0..count-1) on up to `jobs` threads. The exception of the lowest
/// failing index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn &&fn);

struct AugmentDirectoryStats {
    std::size_t scans = 0;
    std::size_t written = 0;
    std::size_t skipped = 0;
    std::size_t inserted_points = 0;
};

/// Augments every scan pair into `out/velodyne`, `out/labels` and
/// `out/reports`. The report is written last, so a scan whose report exists
/// is complete and is skipped unless `force`.
AugmentDirectoryStats augment_directory(const std::filesystem::path &scans_dir,
                                        const std::filesystem::path &labels_dir, const InstanceDatabase &db,
                                        const AugmentPolicy &policy, const std::filesystem::path &out,
                                        std::size_t jobs, bool force);

/// Maps raw semantic ids to evaluation indices; 0 is the ignore index and
/// class k of `classes` gets index k + 1.
std::vector<std::uint16_t> eval_lookup(const std::vector<EvalClass> &classes);

/// Accumulates prediction x truth counts for one scan. Points whose truth maps
/// to ignore are skipped; unmapped predictions land in the ignore row.
void accumulate_confusion(ConfusionMatrix &cm, const std::vector<std::uint16_t> &lookup,
                          const std::vector<std::uint32_t> &predicted, const std::vector<std::uint32_t> &truth);

struct EvalResult {
    std::vector<EvalClass> classes;
    ConfusionMatrix confusion{1};
    IouReport iou;
    std::size_t scans = 0;
};

/// Pairs every `*.label` in `pred_dir` with the same name in `gt_dir`.
EvalResult evaluate_directories(const std::filesystem::path &pred_dir, const std::filesystem::path &gt_dir,
                                const std::vector<EvalClass> &classes, std::size_t jobs = 1);

std::string eval_json(const EvalResult &result);
std::string eval_table(const EvalResult &result);

}  // namespace lidarforge

#include "lidarforge/detail/parallel.hpp"
