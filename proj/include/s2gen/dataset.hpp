#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "s2gen/pipeline.hpp"
#include "s2gen/storage.hpp"

namespace s2gen {

inline constexpr const char* kGeneratorVersion = "s2gen 0.1.0";

struct WorkItem {
    std::uint64_t seed = 0;
    int m = 0;
    int n = 0;

    friend bool operator==(const WorkItem&, const WorkItem&) = default;
};

/// (seed, M, N) in lexicographic order: the order pairs appear on disk.
std::vector<WorkItem> work_items(const GenConfig& cfg);

struct DatasetSummary {
    std::uint64_t pairs = 0;
    std::uint64_t timestamps = 0;
    std::uint64_t exhausted = 0;
    std::vector<WorkItem> exhausted_items;
    RejectionCounts rejections;
    std::vector<ShardEntry> shards;
    double wall_seconds = 0.0;
    double timestamps_per_second = 0.0;
};

struct DatasetOptions {
    int workers = 1;
    /// Called after each shard is written, from the calling thread.
    std::function<void(const ShardEntry&)> on_shard;
};

/// Writes shards and manifest.json under out_dir (created if missing).
/// Shard bytes depend only on cfg. A storage failure removes the partial
/// shard and propagates.
DatasetSummary generate_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir,
                                const DatasetOptions& options = {});

/// All shards listed in the manifest, in order.
std::vector<S2Pair> load_dataset(const std::filesystem::path& root);

std::string utc_timestamp();

struct ScalingPoint {
    int length = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    int samples = 0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    /// Absent with fewer than two lengths.
    std::optional<LinearFit> fit;
};

/// Ordinary least squares of y on x. Throws std::invalid_argument with fewer than two points.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Mean accepted-draw generation time per length. Repeat r uses seed r and
/// grid cell r mod |grid|, so every length sees the same expressions.
/// Exhausted draws are skipped.
ScalingReport bench_scaling(const std::vector<int>& lengths, int repeats, const GenConfig& cfg);

/// Columns L, mean_ms, std_ms.
void write_scaling_csv(const ScalingReport& report, const std::filesystem::path& path);

}  // namespace s2gen
