#include "s2gen/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

namespace s2gen {
namespace fs = std::filesystem;

std::vector<WorkItem> work_items(const GenConfig& cfg) {
    std::vector<WorkItem> items;
    items.reserve(static_cast<std::size_t>(cfg.seeds.count()) * cfg.grid.cells());
    for (std::uint64_t seed = cfg.seeds.first; seed < cfg.seeds.last; ++seed) {
        for (int m = cfg.grid.m_min; m <= cfg.grid.m_max; ++m) {
            for (int n = cfg.grid.n_min; n <= cfg.grid.n_max; ++n) items.push_back({seed, m, n});
        }
    }
    return items;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

/// Runs fn(i) for i in [0, count) on `workers` threads; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
    if (n_threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(n_threads, count); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next.store(count);
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

struct ShardPlan {
    std::string file;
    std::size_t begin = 0;
    std::size_t end = 0;
};

std::vector<ShardPlan> plan_shards(const GenConfig& cfg, const std::vector<WorkItem>& items) {
    std::vector<ShardPlan> plans;
    if (cfg.shard_size == 0) {
        const std::size_t per_seed = cfg.grid.cells();
        for (std::size_t b = 0; b < items.size(); b += per_seed) {
            plans.push_back({"seed-" + std::to_string(items[b].seed) + ".s2sh", b, std::min(items.size(), b + per_seed)});
        }
    } else {
        const auto size = static_cast<std::size_t>(cfg.shard_size);
        for (std::size_t b = 0, k = 0; b < items.size(); b += size, ++k) {
            char name[32];
            std::snprintf(name, sizeof name, "shard-%05zu.s2sh", k);
            plans.push_back({name, b, std::min(items.size(), b + size)});
        }
    }
    return plans;
}

}  // namespace

DatasetSummary generate_dataset(const GenConfig& cfg, const fs::path& out_dir, const DatasetOptions& options) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ShardError(ShardError::Kind::io, "cannot create " + out_dir.string() + ": " + ec.message());

    const std::vector<WorkItem> items = work_items(cfg);
    DatasetSummary summary;
    Manifest manifest;
    manifest.config = cfg;
    manifest.generator_version = kGeneratorVersion;

    for (const ShardPlan& plan : plan_shards(cfg, items)) {
        std::vector<PairResult> results(plan.end - plan.begin);
        parallel_for(results.size(), options.workers, [&](std::size_t i) {
            const WorkItem& w = items[plan.begin + i];
            results[i] = generate_pair(w.m, w.n, cfg, w.seed);
        });
        std::vector<S2Pair> pairs;
        pairs.reserve(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            summary.rejections += results[i].rejections;
            if (results[i].exhausted()) {
                ++summary.exhausted;
                summary.exhausted_items.push_back(items[plan.begin + i]);
            } else {
                pairs.push_back(std::move(*results[i].pair));
            }
        }
        if (pairs.empty()) continue;
        ShardEntry entry = write_shard(pairs, out_dir / plan.file);
        summary.pairs += entry.pairs;
        summary.timestamps += entry.timestamps;
        summary.shards.push_back(entry);
        if (options.on_shard) options.on_shard(entry);
    }

    manifest.shards = summary.shards;
    manifest.total_pairs = summary.pairs;
    manifest.total_timestamps = summary.timestamps;
    manifest.exhausted = summary.exhausted;
    manifest.rejections = summary.rejections;
    manifest.created = utc_timestamp();
    write_manifest(manifest, out_dir / "manifest.json");

    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    summary.timestamps_per_second =
        summary.wall_seconds > 0.0 ? static_cast<double>(summary.timestamps) / summary.wall_seconds : 0.0;
    return summary;
}

std::vector<S2Pair> load_dataset(const fs::path& root) {
    const fs::path manifest_path = fs::is_directory(root) ? root / "manifest.json" : root;
    const Manifest manifest = read_manifest(manifest_path);
    std::vector<S2Pair> pairs;
    for (const ShardEntry& s : manifest.shards) {
        auto shard = read_shard(manifest_path.parent_path() / s.file);
        if (shard.size() != s.pairs) {
            throw ShardError(ShardError::Kind::invalid, s.file + ": pair count disagrees with the manifest");
        }
        std::move(shard.begin(), shard.end(), std::back_inserter(pairs));
    }
    return pairs;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
    if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: x is constant");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

ScalingReport bench_scaling(const std::vector<int>& lengths, int repeats, const GenConfig& base) {
    if (lengths.empty()) throw std::invalid_argument("bench_scaling: no lengths");
    if (!std::is_sorted(lengths.begin(), lengths.end())) throw std::invalid_argument("bench_scaling: lengths must ascend");
    if (repeats < 1) throw std::invalid_argument("bench_scaling: repeats must be >= 1");
    base.validate();

    std::vector<std::pair<int, int>> cells;
    for (int m = base.grid.m_min; m <= base.grid.m_max; ++m) {
        for (int n = base.grid.n_min; n <= base.grid.n_max; ++n) cells.emplace_back(m, n);
    }

    std::vector<GenConfig> configs;
    for (int length : lengths) {
        GenConfig cfg = base;
        cfg.input.length = length;
        cfg.validate();
        configs.push_back(cfg);
        // Warm caches and the allocator before timing.
        for (int r = 0; r < std::min(repeats, 8); ++r) {
            (void)generate_pair(cells[0].first, cells[0].second, cfg, static_cast<std::uint64_t>(r));
        }
    }
    // Lengths are interleaved inside each repeat so slow drift in machine
    // speed spreads evenly over all of them instead of biasing a few.
    std::vector<std::vector<double>> ms(lengths.size());
    for (int r = 0; r < repeats; ++r) {
        const auto [m, n] = cells[static_cast<std::size_t>(r) % cells.size()];
        for (std::size_t k = 0; k < configs.size(); ++k) {
            const PairResult result = generate_pair(m, n, configs[k], static_cast<std::uint64_t>(r));
            if (result.exhausted()) continue;
            ms[k].push_back(std::chrono::duration<double, std::milli>(result.accepted_draw_time).count());
        }
    }

    ScalingReport report;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        const auto& v = ms[k];
        ScalingPoint p;
        p.length = lengths[k];
        p.samples = static_cast<int>(v.size());
        if (!v.empty()) {
            p.mean_ms = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double var = 0.0;
            for (double t : v) var += (t - p.mean_ms) * (t - p.mean_ms);
            p.std_ms = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
        }
        report.points.push_back(p);
    }
    if (report.points.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& p : report.points) {
            if (p.samples == 0) continue;
            x.push_back(p.length);
            y.push_back(p.mean_ms);
        }
        if (x.size() >= 2) report.fit = fit_line(x, y);
    }
    return report;
}

void write_scaling_csv(const ScalingReport& report, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ShardError(ShardError::Kind::io, "cannot open " + path.string() + " for writing");
    out << "L,mean_ms,std_ms\r\n";
    char buf[96];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\r\n", p.length, p.mean_ms, p.std_ms);
        out << buf;
    }
    if (!out) throw ShardError(ShardError::Kind::io, "write failed for " + path.string());
}

}  // namespace s2gen
