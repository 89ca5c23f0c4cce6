#include "lidarforge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "lidarforge/error.hpp"
#include "lidarforge/scan.hpp"

namespace lidarforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<fs::path> files_with_extension(const fs::path &dir, const std::string &ext) {
    if (!fs::is_directory(dir)) { throw ValidationError("not a directory: " + dir.string()); }
    std::vector<fs::path> out;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) { out.push_back(entry.path()); }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<ScanPair> list_scan_pairs(const fs::path &scans_dir, const fs::path &labels_dir) {
    if (!fs::is_directory(labels_dir)) { throw ValidationError("not a directory: " + labels_dir.string()); }
    std::vector<ScanPair> pairs;
    for (const auto &p : files_with_extension(scans_dir, ".bin")) {
        const std::string id = p.stem().string();
        fs::path label = labels_dir / (id + ".label");
        if (!fs::is_regular_file(label)) { throw ValidationError("missing label file " + label.string()); }
        pairs.push_back({id, p, label});
    }
    return pairs;
}

SpatialHistogram histogram_from_directories(const fs::path &scans_dir, const fs::path &labels_dir,
                                            const std::vector<CategoryInfo> &categories, const GridConfig &grid,
                                            double cluster_distance, HistogramDiagnostics *diagnostics) {
    HistogramAccumulator acc(categories, grid, cluster_distance);
    for (const auto &pair : list_scan_pairs(scans_dir, labels_dir)) { acc.add(read_scan(pair.points, pair.labels)); }
    return acc.finish(diagnostics);
}

AugmentDirectoryStats augment_directory(const fs::path &scans_dir, const fs::path &labels_dir,
                                        const InstanceDatabase &db, const AugmentPolicy &policy, const fs::path &out,
                                        std::size_t jobs, bool force) {
    policy.validate();
    for (const auto cat : policy.categories) {
        if (db.categories.count(cat) == 0) {
            throw ValidationError("augment.categories: category " + std::to_string(cat) + " not in the database");
        }
    }
    const auto pairs = list_scan_pairs(scans_dir, labels_dir);
    std::vector<std::uint8_t> written(pairs.size(), 0);
    std::vector<std::size_t> inserted(pairs.size(), 0);
    parallel_for(pairs.size(), jobs, [&](std::size_t i) {
        const auto &pair = pairs[i];
        const fs::path report = out / "reports" / (pair.frame_id + ".json");
        if (!force && fs::exists(report)) { return; }
        const LabeledScan scan = read_scan(pair.points, pair.labels);
        const AugmentResult result = augment_scan(scan, db, policy);
        write_scan(result.scan, out / "velodyne" / (pair.frame_id + ".bin"),
                   out / "labels" / (pair.frame_id + ".label"));
        const std::string text = augment_report_json(result.report);
        write_file_bytes(report, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
        written[i] = 1;
        inserted[i] = result.scan.size() - scan.size();
    });
    AugmentDirectoryStats stats;
    stats.scans = pairs.size();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        stats.written += written[i];
        stats.inserted_points += inserted[i];
    }
    stats.skipped = stats.scans - stats.written;
    return stats;
}

std::vector<std::uint16_t> eval_lookup(const std::vector<EvalClass> &classes) {
    if (classes.empty()) { throw ValidationError("eval.classes: at least one class required"); }
    std::vector<std::uint16_t> lookup(0x10000, 0);
    for (std::size_t k = 0; k < classes.size(); ++k) {
        for (const auto id : classes[k].labels) {
            if (lookup[id] != 0) {
                throw ValidationError("eval.classes: label " + std::to_string(id) + " mapped twice");
            }
            lookup[id] = static_cast<std::uint16_t>(k + 1);
        }
    }
    return lookup;
}

void accumulate_confusion(ConfusionMatrix &cm, const std::vector<std::uint16_t> &lookup,
                          const std::vector<std::uint32_t> &predicted, const std::vector<std::uint32_t> &truth) {
    if (predicted.size() != truth.size()) {
        throw ValidationError("prediction has " + std::to_string(predicted.size()) + " labels, ground truth has " +
                              std::to_string(truth.size()));
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = lookup[semantic_of(truth[i])];
        if (t == 0) { continue; }
        cm.add(lookup[semantic_of(predicted[i])], t);
    }
}

EvalResult evaluate_directories(const fs::path &pred_dir, const fs::path &gt_dir,
                                const std::vector<EvalClass> &classes, std::size_t jobs) {
    const auto lookup = eval_lookup(classes);
    if (!fs::is_directory(gt_dir)) { throw ValidationError("not a directory: " + gt_dir.string()); }
    const auto preds = files_with_extension(pred_dir, ".label");
    if (preds.empty()) { throw ValidationError("no .label files in " + pred_dir.string()); }
    std::vector<fs::path> truths;
    for (const auto &p : preds) {
        fs::path t = gt_dir / p.filename();
        if (!fs::is_regular_file(t)) { throw ValidationError("missing ground truth " + t.string()); }
        truths.push_back(t);
    }
    const std::size_t size = classes.size() + 1;
    std::vector<ConfusionMatrix> shards(preds.size(), ConfusionMatrix(size));
    parallel_for(preds.size(), jobs, [&](std::size_t i) {
        const auto predicted = read_labels(preds[i]);
        const auto truth = read_labels(truths[i]);
        try {
            accumulate_confusion(shards[i], lookup, predicted, truth);
        } catch (const ValidationError &e) {
            throw ValidationError(preds[i].filename().string() + ": " + e.what());
        }
    });
    EvalResult result;
    result.classes = classes;
    result.confusion = ConfusionMatrix(size);
    for (const auto &s : shards) { result.confusion.merge(s); }
    std::vector<bool> excluded(size, false);
    excluded[0] = true;
    result.iou = miou(result.confusion, excluded);
    result.scans = preds.size();
    return result;
}

std::string eval_json(const EvalResult &result) {
    json j;
    json classes = json::array();
    for (std::size_t k = 0; k < result.classes.size(); ++k) {
        const auto &iou = result.iou.per_class[k + 1];
        classes.push_back({{"index", k + 1},
                           {"name", result.classes[k].name},
                           {"labels", result.classes[k].labels},
                           {"iou", iou ? json(*iou) : json(nullptr)}});
    }
    j["classes"] = classes;
    j["mean_iou"] = result.iou.mean;
    j["defined_classes"] = result.iou.defined_classes;
    j["scans"] = result.scans;
    j["points"] = result.confusion.total();
    json matrix = json::array();
    for (std::size_t p = 0; p < result.confusion.classes(); ++p) {
        json row = json::array();
        for (std::size_t t = 0; t < result.confusion.classes(); ++t) { row.push_back(result.confusion.at(p, t)); }
        matrix.push_back(row);
    }
    j["confusion"] = {{"ignore_index", 0}, {"layout", "rows=prediction, cols=truth"}, {"matrix", matrix}};
    return j.dump(2) + "\n";
}

std::string eval_table(const EvalResult &result) {
    std::ostringstream os;
    std::size_t width = 5;
    for (const auto &c : result.classes) { width = std::max(width, c.name.size()); }
    os << std::left << std::setw(static_cast<int>(width)) << "class" << "  IoU\n";
    os << std::fixed << std::setprecision(4);
    for (std::size_t k = 0; k < result.classes.size(); ++k) {
        os << std::left << std::setw(static_cast<int>(width)) << result.classes[k].name << "  ";
        const auto &iou = result.iou.per_class[k + 1];
        if (iou) {
            os << *iou << "\n";
        } else {
            os << "n/a\n";
        }
    }
    os << std::left << std::setw(static_cast<int>(width)) << "mean" << "  " << result.iou.mean << "  ("
       << result.iou.defined_classes << " classes)\n";
    return os.str();
}

}  // namespace lidarforge
