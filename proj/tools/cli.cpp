#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "s2gen/config.hpp"
#include "s2gen/dataset.hpp"
#include "s2gen/grammar.hpp"
#include "s2gen/patch.hpp"
#include "s2gen/stats/features.hpp"
#include "s2gen/storage.hpp"

namespace s2gen::cli {
namespace fs = std::filesystem;

namespace {

std::string env_name(std::string flag) {
    for (char& c : flag) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return "S2_" + flag;
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Every GenConfig field as an optional string flag, plus the convenience
/// --grid/--m/--n and --config.
struct GenFlags {
    std::vector<std::optional<std::string>> values;
    std::optional<std::string> config_path;
    std::optional<std::string> grid;
    std::optional<int> m;
    std::optional<int> n;

    void attach(CLI::App* app) {
        const GenConfig defaults;
        const auto& fields = config_fields();
        values.assign(fields.size(), std::nullopt);
        app->add_option("--config", config_path, "config file ([section] key = value)")->envname("S2_CONFIG");
        app->add_option("--grid", grid, "full, or MxN for a single grid cell [default: full]")->envname("S2_GRID");
        app->add_option("--m", m, "restrict the grid to a single M")->envname("S2_M");
        app->add_option("--n", n, "restrict the grid to a single N")->envname("S2_N");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto& f = fields[i];
            app->add_option("--" + f.flag, values[i],
                            f.help + " [" + f.section + "." + f.key + ", default: " + f.get(defaults) + "]")
                ->envname(env_name(f.flag))
                ->group("Generator settings");
        }
    }

    GenConfig resolve() const {
        GenConfig cfg;
        if (config_path) cfg = load_config_file(*config_path);
        if (grid) {
            if (*grid == "full") {
                cfg.grid = GridRange{1, cfg.expr.m_max, 1, cfg.expr.n_max};
            } else {
                int gm = 0, gn = 0;
                char sep = 0;
                std::istringstream in(*grid);
                if (!(in >> gm >> sep >> gn) || (sep != 'x' && sep != 'X') || !in.eof()) {
                    throw std::invalid_argument("--grid: expected 'full' or MxN, got '" + *grid + "'");
                }
                cfg.grid = GridRange{gm, gm, gn, gn};
            }
        }
        if (m) cfg.grid.m_min = cfg.grid.m_max = *m;
        if (n) cfg.grid.n_min = cfg.grid.n_max = *n;
        const auto& fields = config_fields();
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (values[i]) fields[i].set(cfg, *values[i]);
        }
        cfg.validate();
        return cfg;
    }
};

std::string rejection_line(const RejectionCounts& r) {
    std::ostringstream s;
    s << "non_finite=" << r.non_finite << " log_nonpositive=" << r.log_nonpositive
      << " sqrt_negative=" << r.sqrt_negative << " div_by_zero=" << r.div_by_zero << " y_limit=" << r.y_limit
      << " x_limit=" << r.x_limit << " input_divergence=" << r.input_divergence;
    return s.str();
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    GenFlags gen;
    std::string out_dir;
    int workers = default_workers();
    std::uint64_t max_exhausted = 0;
    bool verbose = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
    const GenConfig cfg = a.gen.resolve();
    DatasetOptions opts;
    opts.workers = a.workers;
    if (a.verbose) {
        opts.on_shard = [&](const ShardEntry& e) { err << "wrote " << e.file << " (" << e.pairs << " pairs)\n"; };
    }
    const DatasetSummary s = generate_dataset(cfg, a.out_dir, opts);
    out << "pairs: " << s.pairs << "\n"
        << "timestamps: " << s.timestamps << "\n"
        << "shards: " << s.shards.size() << "\n"
        << "exhausted: " << s.exhausted << "\n"
        << "rejections: " << s.rejections.total() << " (" << rejection_line(s.rejections) << ")\n"
        << "wall: " << std::fixed << std::setprecision(3) << s.wall_seconds << " s\n"
        << "throughput: " << std::setprecision(0) << s.timestamps_per_second << " timestamps/s\n";
    out << std::defaultfloat;
    for (const auto& w : s.exhausted_items) {
        err << "exhausted: seed " << w.seed << " M=" << w.m << " N=" << w.n << "\n";
    }
    if (s.exhausted > a.max_exhausted) {
        err << "error: " << s.exhausted << " work items exhausted their draw budget (allowed " << a.max_exhausted
            << ")\n";
        return kExhausted;
    }
    return kOk;
}

// ------------------------------------------------------------ characterize

struct CharacterizeArgs {
    std::string input;
    std::string out = "features.csv";
    std::string channels = "y";
    int segment_length = 0;
    int workers = default_workers();
};

struct Segment {
    std::string id;
    int m = 0;
    int n = 0;
    Series values;
};

std::vector<Segment> segments_from_csv(const fs::path& path, int segment_length) {
    std::vector<Segment> segs;
    for (auto& col : read_series_csv(path)) {
        const std::size_t len = col.values.size();
        if (len == 0) continue;
        if (segment_length <= 0) {
            segs.push_back({col.name, 0, 0, std::move(col.values)});
            continue;
        }
        const auto step = static_cast<std::size_t>(segment_length);
        for (std::size_t b = 0, k = 0; b + step <= len; b += step, ++k) {
            segs.push_back({col.name + "#" + std::to_string(k), 0, 0,
                            Series(col.values.begin() + static_cast<std::ptrdiff_t>(b),
                                   col.values.begin() + static_cast<std::ptrdiff_t>(b + step))});
        }
    }
    return segs;
}

std::vector<S2Pair> load_pairs(const fs::path& path) {
    if (fs::is_directory(path) || path.filename() == "manifest.json") return load_dataset(path);
    return read_shard(path);
}

std::vector<Segment> segments_from_pairs(const std::vector<S2Pair>& pairs, const std::string& channels) {
    const bool want_x = channels == "x" || channels == "all";
    const bool want_y = channels == "y" || channels == "all";
    std::vector<Segment> segs;
    for (const auto& p : pairs) {
        const auto& pv = p.provenance;
        const std::string base =
            std::to_string(pv.seed) + ":" + std::to_string(pv.m) + "x" + std::to_string(pv.n) + ":";
        auto add = [&](const SeriesMatrix& mat, char tag) {
            for (std::size_t c = 0; c < mat.channels(); ++c) {
                auto r = mat.row(c);
                segs.push_back({base + tag + std::to_string(c + 1), pv.m, pv.n, Series(r.begin(), r.end())});
            }
        };
        if (want_x) add(p.x, 'x');
        if (want_y) add(p.y, 'y');
    }
    return segs;
}

int cmd_characterize(const CharacterizeArgs& a, std::ostream& out, std::ostream& err) {
    if (a.channels != "x" && a.channels != "y" && a.channels != "all") {
        throw std::invalid_argument("--channels must be x, y or all");
    }
    const fs::path input = a.input;
    if (!fs::exists(input)) throw ShardError(ShardError::Kind::io, "input not found: " + a.input);
    std::vector<Segment> segs;
    if (input.extension() == ".csv") {
        segs = segments_from_csv(input, a.segment_length);
    } else {
        segs = segments_from_pairs(load_pairs(input), a.channels);
    }
    if (segs.empty()) {
        err << "error: " << a.input << " contains no series to characterize\n";
        return kValidation;
    }

    std::vector<FeatureRow> rows(segs.size());
    std::vector<std::vector<stats::MetricError>> errors(segs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < segs.size(); i = next.fetch_add(1)) {
            rows[i].id = segs[i].id;
            rows[i].m = segs[i].m;
            rows[i].n = segs[i].n;
            try {
                auto c = stats::characterize(segs[i].values);
                rows[i].features = c.features;
                errors[i] = std::move(c.errors);
            } catch (const std::exception& e) {
                errors[i].push_back({"characterize", e.what()});
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < std::max(1, a.workers); ++t) pool.emplace_back(work);
        work();
    }

    std::size_t flagged = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (errors[i].empty()) continue;
        ++flagged;
        for (const auto& e : errors[i]) err << "warning: " << segs[i].id << ": " << e.metric << ": " << e.message << "\n";
    }
    export_features_csv(rows, a.out);

    auto mean_of = [&](auto member) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : rows) {
            const double v = static_cast<double>(r.features.*member);
            if (std::isfinite(v)) {
                sum += v;
                ++count;
            }
        }
        return count ? sum / static_cast<double>(count) : std::nan("");
    };
    using FV = stats::FeatureVector;
    out << "segments: " << rows.size() << " (" << flagged << " flagged)\n"
        << "mean adf_stat: " << mean_of(&FV::adf_stat) << "\n"
        << "mean adf_p: " << mean_of(&FV::adf_p) << "\n"
        << "mean forecastability: " << mean_of(&FV::forecastability) << "\n"
        << "mean fft_mean: " << mean_of(&FV::fft_mean) << "\n"
        << "mean perm_entropy: " << mean_of(&FV::perm_entropy) << "\n"
        << "mean seasonality: " << mean_of(&FV::seasonality) << "\n"
        << "mean mk_trend: " << mean_of(&FV::mk_trend) << "\n"
        << "features: " << a.out << "\n";
    return kOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
    GenFlags gen;
    int l_min = 16;
    int l_max = 512;
    int l_step = 16;
    int repeats = 1280;
    bool quick = false;
    std::optional<std::string> out_dir;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
    const GenConfig cfg = a.gen.resolve();
    if (a.l_min < 1 || a.l_step < 1 || a.l_max < a.l_min) {
        throw std::invalid_argument("bench: need 1 <= l-min <= l-max and l-step >= 1");
    }
    std::vector<int> lengths;
    for (int l = a.l_min; l <= a.l_max; l += a.l_step) lengths.push_back(l);
    const int repeats = a.quick ? 64 : a.repeats;
    const ScalingReport report = bench_scaling(lengths, repeats, cfg);

    out << "L,mean_ms,std_ms\n";
    for (const auto& p : report.points) out << p.length << "," << p.mean_ms << "," << p.std_ms << "\n";
    out << "points: " << report.points.size() << ", repeats: " << repeats << "\n";
    if (report.fit) {
        out << "slope_ms_per_step: " << report.fit->slope << "\n"
            << "intercept_ms: " << report.fit->intercept << "\n"
            << "R^2: " << report.fit->r_squared << "\n";
    } else {
        out << "fit: undefined (single length)\n";
    }
    if (a.out_dir) {
        const fs::path dir = *a.out_dir;
        write_scaling_csv(report, dir / "scaling.csv");
        Manifest m;
        m.config = cfg;
        m.generator_version = kGeneratorVersion;
        m.created = utc_timestamp();
        nlohmann::json scaling = {{"lengths", lengths}, {"repeats", repeats}};
        if (report.fit) {
            scaling["slope"] = report.fit->slope;
            scaling["intercept"] = report.fit->intercept;
            scaling["r_squared"] = report.fit->r_squared;
        }
        m.extra["scaling"] = scaling;
        write_manifest(m, dir / "manifest.json");
        out << "wrote " << (dir / "scaling.csv").string() << "\n";
    }
    return kOk;
}

// ----------------------------------------------------------------- inspect

struct InspectArgs {
    std::string input;
    std::optional<int> pair;
    bool patches = false;
};

void print_pair(const S2Pair& p, std::size_t index, bool patches, std::ostream& out) {
    const auto& pv = p.provenance;
    out << "pair " << index << ": seed " << pv.seed << ", M=" << p.x.channels() << ", N=" << p.y.channels()
        << ", L=" << p.length() << ", retries " << pv.retries_used << ", expressions resampled "
        << pv.expressions_resampled << "\n";
    for (std::size_t i = 0; i < p.system.expressions.size(); ++i) {
        out << "  y" << i + 1 << " = " << to_text(p.system.expressions[i]) << "\n";
    }
    if (!patches) return;
    auto show = [&](const SeriesMatrix& mat, char tag) {
        for (std::size_t c = 0; c < mat.channels(); ++c) {
            const PatchMatrix pm = patchify(mat.row(c));
            out << "  " << tag << c + 1 << ": " << pm.n_valid << " valid patches, padded to " << pm.padded_to << "\n";
        }
    };
    show(p.x, 'x');
    show(p.y, 'y');
    const PatchMatrix stacked = patchify(p);
    out << "  stacked: " << stacked.n_valid << " valid patches, padded to " << stacked.padded_to << " ("
        << stacked.padded_to << " x " << stacked.kernel << ")\n";
}

int cmd_inspect(const InspectArgs& a, std::ostream& out, std::ostream&) {
    const fs::path input = a.input;
    if (!fs::exists(input)) throw ShardError(ShardError::Kind::io, "input not found: " + a.input);
    std::vector<S2Pair> pairs;
    if (fs::is_directory(input) || input.filename() == "manifest.json") {
        const fs::path mpath = fs::is_directory(input) ? input / "manifest.json" : input;
        const Manifest m = read_manifest(mpath);
        out << "dataset: " << m.generator_version << ", " << m.shards.size() << " shards, " << m.total_pairs
            << " pairs, " << m.total_timestamps << " timestamps, " << m.exhausted << " exhausted\n";
        pairs = load_dataset(mpath);
    } else {
        const ShardHeader h = read_shard_header(input);
        pairs = read_shard(input);
        char sum[24];
        std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(h.checksum));
        out << "shard: " << input.filename().string() << ", format v" << h.version << ", L=" << h.length
            << ", checksum " << sum << "\n";
    }
    out << pairs.size() << " pairs\n";
    if (a.pair) {
        if (*a.pair < 0 || static_cast<std::size_t>(*a.pair) >= pairs.size()) {
            throw std::invalid_argument("--pair " + std::to_string(*a.pair) + " out of range (0.." +
                                        std::to_string(pairs.size()) + ")");
        }
        print_pair(pairs[static_cast<std::size_t>(*a.pair)], static_cast<std::size_t>(*a.pair), a.patches, out);
    } else if (a.patches && !pairs.empty()) {
        print_pair(pairs.front(), 0, true, out);
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic series-symbol (S2) data generator and characterization tools", "s2gen"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kGeneratorVersion);

    GenerateArgs gen_args;
    auto* generate = app.add_subcommand("generate", "generate a sharded dataset");
    gen_args.gen.attach(generate);
    generate->add_option("-o,--out", gen_args.out_dir, "output directory")->required()->envname("S2_OUT");
    generate->add_option("--workers", gen_args.workers, "worker threads")->envname("S2_WORKERS")->capture_default_str();
    generate->add_option("--max-exhausted", gen_args.max_exhausted, "tolerated exhausted work items")
        ->envname("S2_MAX_EXHAUSTED")
        ->capture_default_str();
    generate->add_flag("-v,--verbose", gen_args.verbose, "report each shard as it is written");

    CharacterizeArgs ch_args;
    auto* characterize = app.add_subcommand("characterize", "compute the six coverage metrics per series segment");
    characterize->add_option("-i,--input", ch_args.input, "dataset directory, manifest.json, shard file or CSV")
        ->required()
        ->envname("S2_INPUT");
    characterize->add_option("-o,--out", ch_args.out, "feature CSV to write")->envname("S2_OUT")->capture_default_str();
    characterize->add_option("--channels", ch_args.channels, "dataset channels to characterize: x, y or all")
        ->envname("S2_CHANNELS")
        ->capture_default_str();
    characterize->add_option("--segment-length", ch_args.segment_length, "split CSV columns into segments (0 = whole)")
        ->envname("S2_SEGMENT_LENGTH")
        ->capture_default_str();
    characterize->add_option("--workers", ch_args.workers, "worker threads")->envname("S2_WORKERS")->capture_default_str();

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "measure generation time against series length");
    bench_args.gen.attach(bench);
    bench->add_option("--l-min", bench_args.l_min, "shortest length")->envname("S2_L_MIN")->capture_default_str();
    bench->add_option("--l-max", bench_args.l_max, "longest length")->envname("S2_L_MAX")->capture_default_str();
    bench->add_option("--l-step", bench_args.l_step, "length step")->envname("S2_L_STEP")->capture_default_str();
    bench->add_option("--repeats", bench_args.repeats, "timed pairs per length")->envname("S2_REPEATS")->capture_default_str();
    bench->add_flag("--quick", bench_args.quick, "64 repeats per length");
    bench->add_option("-o,--out", bench_args.out_dir, "directory for scaling.csv and manifest.json")->envname("S2_OUT");

    InspectArgs in_args;
    auto* inspect = app.add_subcommand("inspect", "show a shard or dataset");
    inspect->add_option("input,-i,--input", in_args.input, "shard file, dataset directory or manifest.json")
        ->required()
        ->envname("S2_INPUT");
    inspect->add_option("--pair", in_args.pair, "pair index to print");
    inspect->add_flag("--patches", in_args.patches, "show the patch layout of the chosen pair");

    try {
        std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
        std::reverse(reversed.begin(), reversed.end());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (app.got_subcommand(generate)) return cmd_generate(gen_args, out, err);
        if (app.got_subcommand(characterize)) return cmd_characterize(ch_args, out, err);
        if (app.got_subcommand(bench)) return cmd_bench(bench_args, out, err);
        if (app.got_subcommand(inspect)) return cmd_inspect(in_args, out, err);
    } catch (const ShardError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    }
    return kValidation;
}

}  // namespace s2gen::cli
