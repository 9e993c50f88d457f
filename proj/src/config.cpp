#include "s2gen/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "s2gen/grammar.hpp"

namespace s2gen {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    text = trim(unquote(trim(text)));
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw std::invalid_argument(std::string(what) + ": cannot parse '" + std::string(text) + "'");
    }
    return value;
}

template <class Get>
ConfigField make_int(std::string section, std::string key, std::string flag, std::string help, Get ref) {
    ConfigField f{std::move(section), std::move(key), std::move(flag), std::move(help), {}, {}};
    const std::string name = f.key;
    f.get = [ref](const GenConfig& c) { return std::to_string(ref(const_cast<GenConfig&>(c))); };
    f.set = [ref, name](GenConfig& c, std::string_view v) { ref(c) = parse_number<int>(v, name); };
    return f;
}

template <class Get>
ConfigField make_double(std::string section, std::string key, std::string flag, std::string help, Get ref) {
    ConfigField f{std::move(section), std::move(key), std::move(flag), std::move(help), {}, {}};
    const std::string name = f.key;
    f.get = [ref](const GenConfig& c) { return format_number(ref(const_cast<GenConfig&>(c))); };
    f.set = [ref, name](GenConfig& c, std::string_view v) { ref(c) = parse_number<double>(v, name); };
    return f;
}

std::vector<ConfigField> build_fields() {
    std::vector<ConfigField> f;
    // expression sampler
    f.push_back(make_int("expr", "b_min", "b-min", "minimum binary operators per expression",
                         [](GenConfig& c) -> int& { return c.expr.b_min; }));
    f.push_back(make_int("expr", "b_max", "b-max", "maximum binary operators per expression",
                         [](GenConfig& c) -> int& { return c.expr.b_max; }));
    f.push_back(make_int("expr", "u_min", "u-min", "minimum unary operators per expression",
                         [](GenConfig& c) -> int& { return c.expr.u_min; }));
    f.push_back(make_int("expr", "u_max", "u-max", "maximum unary operators per expression",
                         [](GenConfig& c) -> int& { return c.expr.u_max; }));
    f.push_back(make_int("expr", "m_max", "m-max", "largest input dimension the sampler supports",
                         [](GenConfig& c) -> int& { return c.expr.m_max; }));
    f.push_back(make_int("expr", "n_max", "n-max", "largest output dimension the sampler supports",
                         [](GenConfig& c) -> int& { return c.expr.n_max; }));
    f.push_back(make_double("expr", "constant_lo_exp", "constant-lo-exp", "leaf constants: lower log10 magnitude",
                            [](GenConfig& c) -> double& { return c.expr.constant_law.lo_exp; }));
    f.push_back(make_double("expr", "constant_hi_exp", "constant-hi-exp", "leaf constants: upper log10 magnitude",
                            [](GenConfig& c) -> double& { return c.expr.constant_law.hi_exp; }));
    f.push_back(make_int("expr", "constant_digits", "constant-digits", "leaf constants: significant digits (0 = full)",
                         [](GenConfig& c) -> int& { return c.expr.constant_law.significant_digits; }));
    f.push_back(make_double("expr", "affine_lo_exp", "affine-lo-exp", "affine a, b: lower log10 magnitude",
                            [](GenConfig& c) -> double& { return c.expr.affine_law.lo_exp; }));
    f.push_back(make_double("expr", "affine_hi_exp", "affine-hi-exp", "affine a, b: upper log10 magnitude",
                            [](GenConfig& c) -> double& { return c.expr.affine_law.hi_exp; }));
    f.push_back(make_int("expr", "affine_digits", "affine-digits", "affine a, b: significant digits (0 = full)",
                         [](GenConfig& c) -> int& { return c.expr.affine_law.significant_digits; }));
    // input sampler
    f.push_back(make_double("input", "p_mixture", "p-mixture", "probability a channel comes from a mixture",
                            [](GenConfig& c) -> double& { return c.input.p_mixture; }));
    f.push_back(make_int("input", "k_max", "k-max", "maximum mixture components",
                         [](GenConfig& c) -> int& { return c.input.k_max; }));
    f.push_back(make_int("input", "p_max", "p-max", "maximum AR order",
                         [](GenConfig& c) -> int& { return c.input.p_max; }));
    f.push_back(make_int("input", "q_max", "q-max", "maximum MA order",
                         [](GenConfig& c) -> int& { return c.input.q_max; }));
    f.push_back(make_int("input", "length", "length", "series length L",
                         [](GenConfig& c) -> int& { return c.input.length; }));
    f.push_back(make_int("input", "burn_in", "burn-in", "ARMA burn-in (-1 = 10*max(p,q)+100)",
                         [](GenConfig& c) -> int& { return c.input.burn_in; }));
    // curation
    f.push_back(make_double("curation", "y_abs_limit", "y-limit", "reject outputs with any |y| above this",
                            [](GenConfig& c) -> double& { return c.y_abs_limit; }));
    f.push_back(make_double("curation", "x_abs_limit", "x-limit", "reject raw inputs with any |x| above this (0 = off)",
                            [](GenConfig& c) -> double& { return c.x_abs_limit; }));
    f.push_back(make_int("curation", "max_retries_per_expression", "max-retries",
                         "input redraws before an offending expression is resampled",
                         [](GenConfig& c) -> int& { return c.max_retries_per_expression; }));
    // grid
    f.push_back(make_int("grid", "m_min", "grid-m-min", "smallest M visited",
                         [](GenConfig& c) -> int& { return c.grid.m_min; }));
    f.push_back(make_int("grid", "m_max", "grid-m-max", "largest M visited",
                         [](GenConfig& c) -> int& { return c.grid.m_max; }));
    f.push_back(make_int("grid", "n_min", "grid-n-min", "smallest N visited",
                         [](GenConfig& c) -> int& { return c.grid.n_min; }));
    f.push_back(make_int("grid", "n_max", "grid-n-max", "largest N visited",
                         [](GenConfig& c) -> int& { return c.grid.n_max; }));
    // dataset
    {
        ConfigField seeds{"dataset", "seeds", "seeds", "seed range A..B (half-open)", {}, {}};
        seeds.get = [](const GenConfig& c) { return format_seed_range(c.seeds); };
        seeds.set = [](GenConfig& c, std::string_view v) { c.seeds = parse_seed_range(unquote(trim(v))); };
        f.push_back(std::move(seeds));
    }
    f.push_back(make_int("dataset", "shard_size", "shard-size", "pairs per shard (0 = one shard per seed)",
                         [](GenConfig& c) -> int& { return c.shard_size; }));
    return f;
}

}  // namespace

const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = build_fields();
    return fields;
}

SeedRange parse_seed_range(std::string_view text) {
    text = trim(text);
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const auto s = parse_number<std::uint64_t>(text, "seeds");
        if (s == std::numeric_limits<std::uint64_t>::max()) throw std::invalid_argument("seeds: seed too large");
        return {s, s + 1};
    }
    SeedRange r{parse_number<std::uint64_t>(text.substr(0, dots), "seeds"),
                parse_number<std::uint64_t>(text.substr(dots + 2), "seeds")};
    if (r.last <= r.first) throw std::invalid_argument("seeds: range A..B needs B > A");
    return r;
}

std::string format_seed_range(const SeedRange& range) {
    return std::to_string(range.first) + ".." + std::to_string(range.last);
}

GenConfig parse_config_text(std::string_view text, GenConfig base) {
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(where + "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            bool known = false;
            for (const auto& f : config_fields()) known = known || f.section == section;
            if (!known) throw std::invalid_argument(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const ConfigField* field = nullptr;
        for (const auto& f : config_fields()) {
            if (f.section == section && f.key == key) field = &f;
        }
        if (!field) throw std::invalid_argument(where + "unknown key '" + key + "' in [" + section + "]");
        try {
            field->set(base, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    return base;
}

GenConfig load_config_file(const std::string& path, GenConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), std::move(base));
}

std::string format_config_text(const GenConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : config_fields()) {
        if (f.section != section) {
            if (!section.empty()) out += '\n';
            section = f.section;
            out += "[" + section + "]\n";
        }
        std::string value = f.get(cfg);
        if (f.key == "seeds") value = "\"" + value + "\"";
        out += f.key + " = " + value + "\n";
    }
    return out;
}

nlohmann::json config_to_json(const GenConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : config_fields()) {
        const std::string v = f.get(cfg);
        if (f.key == "seeds") {
            j[f.section]["seeds"] = {{"first", cfg.seeds.first}, {"last", cfg.seeds.last}};
        } else {
            j[f.section][f.key] = nlohmann::json::parse(v);
        }
    }
    return j;
}

GenConfig config_from_json(const nlohmann::json& j) {
    GenConfig cfg;
    for (const auto& f : config_fields()) {
        if (!j.contains(f.section) || !j[f.section].contains(f.key)) continue;
        const auto& v = j[f.section][f.key];
        if (f.key == "seeds") {
            cfg.seeds = {v.at("first").get<std::uint64_t>(), v.at("last").get<std::uint64_t>()};
        } else {
            f.set(cfg, v.dump());
        }
    }
    return cfg;
}

}  // namespace s2gen
