#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "cli.hpp"
#include "s2gen/config.hpp"
#include "s2gen/dataset.hpp"
#include "s2gen/storage.hpp"
#include "test_util.hpp"

using namespace s2gen;
using s2gen::testing::slurp;
using s2gen::testing::spit;
using s2gen::testing::TempDir;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "s2gen");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
public:
    ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
        ::setenv(name_.c_str(), value.c_str(), 1);
    }
    ~ScopedEnv() { ::unsetenv(name_.c_str()); }

private:
    std::string name_;
};

}  // namespace

TEST_CASE("seed ranges") {
    CHECK(parse_seed_range("0..10") == SeedRange{0, 10});
    CHECK(parse_seed_range("7") == SeedRange{7, 8});
    CHECK(format_seed_range({3, 9}) == "3..9");
    CHECK_THROWS_AS(parse_seed_range("5..5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_range("a..b"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_range(""), std::invalid_argument);
}

TEST_CASE("config text") {
    const GenConfig cfg = parse_config_text(R"(
# comment
[expr]
b_max = 4
[input]
p_mixture = 0.25
length = 128
[curation]
y_abs_limit = 500
[dataset]
seeds = "2..5"
)");
    CHECK(cfg.expr.b_max == 4);
    CHECK(cfg.input.p_mixture == 0.25);
    CHECK(cfg.input.length == 128);
    CHECK(cfg.y_abs_limit == 500);
    CHECK(cfg.seeds == SeedRange{2, 5});
    CHECK(cfg.expr.b_min == GenConfig{}.expr.b_min);

    CHECK_THROWS_AS(parse_config_text("[nope]\nx = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[expr]\nbogus = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[expr]\nb_max = five\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("b_max = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(load_config_file("/nonexistent/s2gen.conf"), std::runtime_error);
}

TEST_CASE("config round trips") {
    GenConfig cfg;
    cfg.expr.u_max = 2;
    cfg.expr.affine_law.hi_exp = 1.5;
    cfg.input.q_max = 2;
    cfg.x_abs_limit = 0;
    cfg.grid = {2, 3, 4, 5};
    cfg.seeds = {10, 20};
    cfg.shard_size = 9;
    CHECK(parse_config_text(format_config_text(cfg)) == cfg);
    CHECK(config_from_json(config_to_json(cfg)) == cfg);
    CHECK(config_to_json(cfg).at("dataset").at("seeds").at("first") == 10);
    for (const auto& f : config_fields()) {
        GenConfig copy;
        f.set(copy, f.get(cfg));
        CHECK_MESSAGE(f.get(copy) == f.get(cfg), f.section << "." << f.key);
    }
}

TEST_CASE("help lists every field with its default") {
    const Run r = invoke({"generate", "--help"});
    CHECK(r.code == 0);
    const GenConfig defaults;
    for (const auto& f : config_fields()) {
        CHECK_MESSAGE(r.out.find("--" + f.flag) != std::string::npos, f.flag);
        CHECK_MESSAGE(r.out.find(f.section + "." + f.key + ", default: " + f.get(defaults)) != std::string::npos,
                      f.key);
    }
    for (const char* flag : {"--seeds", "--grid", "--m", "--n", "--length", "--p-mixture", "--b-min", "--b-max",
                             "--u-min", "--u-max", "--y-limit", "--workers", "--out", "--config"}) {
        CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
    }
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({}).code != 0);
}

TEST_CASE("generate: full grid and a single cell") {
    TempDir dir("gen");
    Run r = invoke({"generate", "--seeds", "0..1", "--grid", "full", "-o", dir.path().string(), "--workers", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("pairs: 72\n") != std::string::npos);
    CHECK(r.out.find("timestamps/s") != std::string::npos);
    const Manifest m = read_manifest(dir / "manifest.json");
    CHECK(m.total_pairs == 72);

    TempDir one("gen1");
    r = invoke({"generate", "--m", "1", "--n", "1", "--seeds", "0..1000", "-o", one.path().string(), "--shard-size",
             "250"});
    CHECK(r.code == 0);
    CHECK(r.out.find("pairs: 1000\n") != std::string::npos);
    CHECK(read_manifest(one / "manifest.json").shards.size() == 4);

    TempDir cell("gen2");
    r = invoke({"generate", "--grid", "2x3", "-o", cell.path().string()});
    CHECK(r.code == 0);
    const auto pairs = load_dataset(cell.path());
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].x.channels() == 2);
    CHECK(pairs[0].y.channels() == 3);
}

TEST_CASE("generate: validation errors write nothing") {
    TempDir dir("bad");
    const auto out = dir / "out";
    Run r = invoke({"generate", "--b-max", "0", "-o", out.string()});
    CHECK(r.code == cli::kValidation);
    CHECK(r.err.find("b_max") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(out));
    CHECK(invoke({"generate", "--grid", "7x1", "-o", out.string()}).code == cli::kValidation);
    CHECK(invoke({"generate", "--grid", "banana", "-o", out.string()}).code == cli::kValidation);
    CHECK(invoke({"generate", "--p-mixture", "0.9", "-o", out.string()}).code == cli::kValidation);
    CHECK(invoke({"generate", "--seeds", "3..1", "-o", out.string()}).code == cli::kValidation);
    CHECK(invoke({"generate", "--no-such-flag", "-o", out.string()}).code == cli::kValidation);
    CHECK(invoke({"generate"}).code == cli::kValidation);
    CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("generate: exhausted work items set exit code 3") {
    TempDir dir("exh");
    const Run r = invoke({"generate", "--grid", "1x1", "--y-limit", "1e-9", "--max-retries", "2", "-o",
                       dir.path().string()});
    CHECK(r.code == cli::kExhausted);
    CHECK(r.out.find("exhausted: 1\n") != std::string::npos);
    CHECK(r.err.find("exhausted: seed 0 M=1 N=1") != std::string::npos);
    CHECK(invoke({"generate", "--grid", "1x1", "--y-limit", "1e-9", "--max-retries", "2", "--max-exhausted", "1", "-o",
               dir.path().string()})
              .code == 0);
}

TEST_CASE("precedence: flags > environment > config file > defaults") {
    TempDir dir("prec");
    spit(dir / "c.conf", "[expr]\nb_max = 2\nu_max = 1\n[input]\nlength = 64\n[grid]\nm_max = 1\nn_max = 1\n");
    auto effective = [&](std::vector<std::string> extra) {
        const auto out = dir / ("o" + std::to_string(std::rand()));
        std::vector<std::string> args{"generate", "--config", (dir / "c.conf").string(), "-o", out.string()};
        args.insert(args.end(), extra.begin(), extra.end());
        const Run r = invoke(args);
        REQUIRE_MESSAGE(r.code == 0, r.err);
        return read_manifest(out / "manifest.json").config;
    };
    GenConfig c = effective({});
    CHECK(c.expr.b_max == 2);
    CHECK(c.expr.u_max == 1);
    CHECK(c.input.length == 64);
    {
        ScopedEnv env("S2_B_MAX", "3");
        ScopedEnv env2("S2_LENGTH", "32");
        c = effective({});
        CHECK(c.expr.b_max == 3);
        CHECK(c.input.length == 32);
        CHECK(c.expr.u_max == 1);
        c = effective({"--b-max", "4"});
        CHECK(c.expr.b_max == 4);
        CHECK(c.input.length == 32);
    }
    c = effective({"--u-max", "0"});
    CHECK(c.expr.u_max == 0);
    CHECK(c.expr.b_max == 2);
    {
        ScopedEnv env("S2_CONFIG", (dir / "c.conf").string());
        const auto out = dir / "envcfg";
        REQUIRE(invoke({"generate", "-o", out.string()}).code == 0);
        CHECK(read_manifest(out / "manifest.json").config.input.length == 64);
    }
    CHECK(invoke({"generate", "--config", (dir / "missing.conf").string(), "-o", (dir / "x").string()}).code != 0);
}

TEST_CASE("inspect") {
    TempDir dir("insp");
    REQUIRE(invoke({"generate", "-o", dir.path().string()}).code == 0);
    Run r = invoke({"inspect", (dir / "seed-0.s2sh").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("72 pairs\n") != std::string::npos);
    r = invoke({"inspect", "-i", dir.path().string(), "--pair", "0", "--patches"});
    CHECK(r.code == 0);
    CHECK(r.out.find("x1: 16 valid patches, padded to 288") != std::string::npos);
    CHECK(r.out.find("y1 = ") != std::string::npos);
    CHECK(invoke({"inspect", dir.path().string(), "--pair", "72"}).code == cli::kValidation);

    std::string bytes = slurp(dir / "seed-0.s2sh");
    bytes[bytes.size() / 2] ^= 0x10;
    spit(dir / "seed-0.s2sh", bytes);
    r = invoke({"inspect", (dir / "seed-0.s2sh").string()});
    CHECK(r.code == cli::kIo);
    CHECK(r.err.find("checksum mismatch") != std::string::npos);
    CHECK(invoke({"inspect", (dir / "absent.s2sh").string()}).code == cli::kIo);
}

TEST_CASE("characterize: dataset rows") {
    TempDir dir("char");
    REQUIRE(invoke({"generate", "--grid", "1x1", "--seeds", "0..20", "-o", (dir / "ds").string()}).code == 0);
    const auto csv = dir / "f.csv";
    const Run r = invoke({"characterize", "-i", (dir / "ds").string(), "-o", csv.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("segments: 20") != std::string::npos);
    CHECK(r.out.find("mean adf_stat: ") != std::string::npos);
    const auto rows = read_features_csv(csv);
    REQUIRE(rows.size() == 20);
    CHECK(rows[0].id == "0:1x1:y1");
    CHECK(rows[0].m == 1);
    const Run all = invoke({"characterize", "-i", (dir / "ds").string(), "-o", csv.string(), "--channels", "all"});
    CHECK(all.code == 0);
    CHECK(read_features_csv(csv).size() == 40);
    CHECK(invoke({"characterize", "-i", (dir / "ds").string(), "--channels", "z", "-o", csv.string()}).code ==
          cli::kValidation);
}

TEST_CASE("characterize: external CSV with a sinusoid column") {
    TempDir dir("ext");
    std::string text = "sine\n";
    for (int t = 0; t < 256; ++t) text += std::to_string(std::sin(2.0 * std::numbers::pi * t / 16.0)) + "\n";
    spit(dir / "external.csv", text);
    const auto csv = dir / "f.csv";
    const Run r = invoke({"characterize", "--input", (dir / "external.csv").string(), "-o", csv.string()});
    REQUIRE(r.code == 0);
    const auto rows = read_features_csv(csv);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].features.seasonality >= 0.99);
    CHECK(rows[0].features.forecastability >= 0.95);

    const Run seg = invoke({"characterize", "--input", (dir / "external.csv").string(), "-o", csv.string(),
                         "--segment-length", "64"});
    CHECK(seg.code == 0);
    CHECK(read_features_csv(csv).size() == 4);
}

TEST_CASE("characterize: empty input fails explicitly") {
    TempDir dir("empty");
    spit(dir / "empty.csv", "a\n");
    const Run r = invoke({"characterize", "-i", (dir / "empty.csv").string(), "-o", (dir / "f.csv").string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("no series") != std::string::npos);

    REQUIRE(invoke({"generate", "--grid", "1x1", "--y-limit", "1e-9", "--max-retries", "1", "--max-exhausted", "1",
                 "-o", (dir / "ds").string()})
                .code == 0);
    CHECK(invoke({"characterize", "-i", (dir / "ds").string(), "-o", (dir / "f.csv").string()}).code != 0);
    CHECK(invoke({"characterize", "-i", (dir / "missing").string()}).code == cli::kIo);
}

TEST_CASE("bench --quick") {
    TempDir dir("bench");
    const Run r = invoke({"bench", "--quick", "--l-min", "32", "--l-max", "128", "--l-step", "32", "-o",
                       dir.path().string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("L,mean_ms,std_ms\n32,", 0) == 0);
    CHECK(r.out.find("points: 4, repeats: 64") != std::string::npos);
    CHECK(r.out.find("R^2: ") != std::string::npos);
    const CsvTable t = read_csv(dir / "scaling.csv");
    CHECK(t.header == std::vector<std::string>{"L", "mean_ms", "std_ms"});
    CHECK(t.rows.size() == 4);
    const Manifest m = read_manifest(dir / "manifest.json");
    CHECK(m.extra.at("scaling").at("slope") > 0.0);

    const Run single = invoke({"bench", "--quick", "--l-min", "64", "--l-max", "64"});
    CHECK(single.code == 0);
    CHECK(single.out.find("fit: undefined") != std::string::npos);
    CHECK(invoke({"bench", "--l-min", "64", "--l-max", "32"}).code == cli::kValidation);
}
