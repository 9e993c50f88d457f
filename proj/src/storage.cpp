#include "s2gen/storage.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "s2gen/config.hpp"
#include "s2gen/grammar.hpp"
#include "s2gen/overloaded.hpp"

namespace s2gen {
namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ShardError::Kind kind) noexcept {
    switch (kind) {
        case ShardError::Kind::io: return "io";
        case ShardError::Kind::bad_magic: return "bad magic";
        case ShardError::Kind::version_mismatch: return "version mismatch";
        case ShardError::Kind::checksum_mismatch: return "checksum mismatch";
        case ShardError::Kind::grammar: return "grammar";
        case ShardError::Kind::truncated: return "truncated";
        case ShardError::Kind::invalid: return "invalid";
    }
    return "unknown";
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) noexcept {
    for (std::uint8_t b : bytes) {
        state ^= b;
        state *= 0x100000001b3ULL;
    }
    return state;
}

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

template <class U>
void put_le(std::vector<std::uint8_t>& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.size() > UINT32_MAX) throw ShardError(ShardError::Kind::invalid, "string too long for shard record");
    put_le(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string where) : bytes_(bytes), where_(std::move(where)) {}

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > bytes_.size() - pos_) {
            throw ShardError(ShardError::Kind::truncated, where_ + ": record runs past the end of the payload");
        }
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    template <class U>
    U le() {
        auto s = take(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(s[i]) << (8 * i));
        return v;
    }

    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

    std::string str() {
        const auto n = le<std::uint32_t>();
        auto s = take(n);
        return {reinterpret_cast<const char*>(s.data()), s.size()};
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string where_;
};

json channel_to_json(const ChannelProvenance& c) {
    return std::visit(
        Overloaded{
            [](const MixtureSpec& m) {
                json comps = json::array();
                for (const auto& comp : m.components) {
                    comps.push_back(std::visit(
                        Overloaded{[](const GaussianComponent& g) {
                                       return json{{"family", "gaussian"}, {"mean", g.mean}, {"stddev", g.stddev}};
                                   },
                                   [](const UniformComponent& u) {
                                       return json{{"family", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
                                   }},
                        comp));
                }
                return json{{"kind", "mixture"}, {"weights", m.weights}, {"components", comps}};
            },
            [](const ArmaParams& a) { return json{{"kind", "arma"}, {"phi", a.phi}, {"theta", a.theta}}; },
        },
        c);
}

ChannelProvenance channel_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "arma") return ArmaParams{j.at("phi").get<std::vector<double>>(), j.at("theta").get<std::vector<double>>()};
    if (kind != "mixture") throw std::invalid_argument("unknown input kind '" + kind + "'");
    MixtureSpec m;
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& c : j.at("components")) {
        const auto family = c.at("family").get<std::string>();
        if (family == "gaussian") {
            m.components.emplace_back(GaussianComponent{c.at("mean").get<double>(), c.at("stddev").get<double>()});
        } else if (family == "uniform") {
            m.components.emplace_back(UniformComponent{c.at("lo").get<double>(), c.at("hi").get<double>()});
        } else {
            throw std::invalid_argument("unknown mixture family '" + family + "'");
        }
    }
    return m;
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_number(v);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_for_write(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ShardError(ShardError::Kind::io, "cannot open " + path.string() + " for writing");
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ShardError(ShardError::Kind::io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw ShardError(ShardError::Kind::io, "read failed for " + path.string());
    return buf.str();
}

double parse_double_cell(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    if (cell == "nan") return std::nan("");
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || cell.empty()) throw std::invalid_argument(where + ": not a number '" + cell + "'");
    return v;
}

}  // namespace

json provenance_to_json(const PairProvenance& p) {
    json inputs = json::array();
    for (const auto& c : p.inputs) inputs.push_back(channel_to_json(c));
    return json{{"seed", p.seed},
                {"m", p.m},
                {"n", p.n},
                {"retries_used", p.retries_used},
                {"expressions_resampled", p.expressions_resampled},
                {"inputs", inputs}};
}

PairProvenance provenance_from_json(const json& j) {
    PairProvenance p;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.m = j.at("m").get<int>();
    p.n = j.at("n").get<int>();
    p.retries_used = j.at("retries_used").get<int>();
    p.expressions_resampled = j.at("expressions_resampled").get<int>();
    for (const auto& c : j.at("inputs")) p.inputs.push_back(channel_from_json(c));
    return p;
}

std::vector<std::uint8_t> encode_pair(const S2Pair& pair) {
    const std::size_t m = pair.x.channels();
    const std::size_t n = pair.y.channels();
    if (m < 1 || m > 255 || n < 1 || n > 255) throw ShardError(ShardError::Kind::invalid, "M and N must be in [1, 255]");
    if (pair.y.length() != pair.x.length()) throw ShardError(ShardError::Kind::invalid, "X and Y lengths differ");
    if (pair.system.expressions.size() != n) {
        throw ShardError(ShardError::Kind::invalid, "expression count does not match Y channels");
    }
    std::vector<std::uint8_t> out;
    out.reserve(2 + (m + n) * pair.length() * 8 + 256);
    put_u8(out, static_cast<std::uint8_t>(m));
    put_u8(out, static_cast<std::uint8_t>(n));
    for (double v : pair.x.data()) put_f64(out, v);
    for (double v : pair.y.data()) put_f64(out, v);
    for (const Expr& e : pair.system.expressions) put_string(out, to_text(e));
    put_string(out, provenance_to_json(pair.provenance).dump());
    return out;
}

ShardEntry write_shard(std::span<const S2Pair> pairs, const fs::path& path) {
    if (pairs.empty()) throw ShardError(ShardError::Kind::invalid, "write_shard: no pairs");
    const std::size_t length = pairs.front().length();
    if (length > UINT32_MAX || pairs.size() > UINT32_MAX) {
        throw ShardError(ShardError::Kind::invalid, "write_shard: shard too large");
    }
    ShardEntry entry;
    entry.file = path.filename().string();
    try {
        std::ofstream out = open_for_write(path);
        // Placeholder header; the real one goes in once the checksum is known.
        const std::vector<std::uint8_t> blank(kShardHeaderSize, 0);
        out.write(reinterpret_cast<const char*>(blank.data()), static_cast<std::streamsize>(blank.size()));
        std::uint64_t checksum = 0xcbf29ce484222325ULL;
        for (const S2Pair& pair : pairs) {
            if (pair.length() != length) throw ShardError(ShardError::Kind::invalid, "write_shard: mixed series lengths");
            const auto bytes = encode_pair(pair);
            checksum = fnv1a64(bytes, checksum);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            entry.timestamps += pair.timestamps();
        }
        std::vector<std::uint8_t> header;
        header.insert(header.end(), std::begin(kShardMagic), std::end(kShardMagic));
        put_le(header, kShardVersion);
        put_le(header, static_cast<std::uint32_t>(pairs.size()));
        put_le(header, static_cast<std::uint32_t>(length));
        put_le(header, checksum);
        out.seekp(0);
        out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
        out.flush();
        if (!out) throw ShardError(ShardError::Kind::io, "write failed for " + path.string());
        entry.pairs = pairs.size();
        entry.checksum = checksum;
    } catch (...) {
        std::error_code ec;
        fs::remove(path, ec);
        throw;
    }
    return entry;
}

namespace {

ShardHeader decode_header(std::span<const std::uint8_t> bytes, const std::string& where) {
    if (bytes.size() < kShardHeaderSize) throw ShardError(ShardError::Kind::truncated, where + ": shorter than the header");
    if (std::memcmp(bytes.data(), kShardMagic, 4) != 0) throw ShardError(ShardError::Kind::bad_magic, where + ": bad magic");
    Reader r(bytes.subspan(4, kShardHeaderSize - 4), where);
    ShardHeader h;
    h.version = r.le<std::uint32_t>();
    if (h.version != kShardVersion) {
        throw ShardError(ShardError::Kind::version_mismatch,
                         where + ": format version " + std::to_string(h.version) + ", expected " +
                             std::to_string(kShardVersion));
    }
    h.n_pairs = r.le<std::uint32_t>();
    h.length = r.le<std::uint32_t>();
    h.checksum = r.le<std::uint64_t>();
    return h;
}

}  // namespace

ShardHeader read_shard_header(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ShardError(ShardError::Kind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> buf(kShardHeaderSize);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    buf.resize(static_cast<std::size_t>(in.gcount()));
    return decode_header(buf, path.string());
}

std::vector<S2Pair> read_shard(const fs::path& path) {
    const std::string where = path.string();
    const std::string raw = slurp(path);
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
    const ShardHeader h = decode_header(bytes, where);
    const auto payload = bytes.subspan(kShardHeaderSize);
    if (fnv1a64(payload) != h.checksum) throw ShardError(ShardError::Kind::checksum_mismatch, where + ": checksum mismatch");

    Reader r(payload, where);
    std::vector<S2Pair> pairs;
    pairs.reserve(h.n_pairs);
    for (std::uint32_t k = 0; k < h.n_pairs; ++k) {
        const std::size_t m = r.le<std::uint8_t>();
        const std::size_t n = r.le<std::uint8_t>();
        if (m == 0 || n == 0) throw ShardError(ShardError::Kind::invalid, where + ": pair with zero channels");
        S2Pair pair;
        pair.x = SeriesMatrix(m, h.length);
        pair.y = SeriesMatrix(n, h.length);
        for (double& v : pair.x.data()) v = r.f64();
        for (double& v : pair.y.data()) v = r.f64();
        pair.system.input_dim = static_cast<int>(m);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string text = r.str();
            try {
                Expr e = parse_text(text);
                if (max_variable_index(e) > static_cast<int>(m)) {
                    throw ShardError(ShardError::Kind::grammar, where + ": expression references x beyond M");
                }
                pair.system.expressions.push_back(std::move(e));
            } catch (const ParseError& e) {
                throw ShardError(ShardError::Kind::grammar, where + ": pair " + std::to_string(k) + ": " + e.what());
            }
        }
        try {
            pair.provenance = provenance_from_json(json::parse(r.str()));
        } catch (const json::exception& e) {
            throw ShardError(ShardError::Kind::invalid, where + ": bad provenance record: " + e.what());
        }
        pair.system.provenance = {pair.provenance.seed, pair.provenance.m, pair.provenance.n};
        pairs.push_back(std::move(pair));
    }
    if (!r.done()) throw ShardError(ShardError::Kind::invalid, where + ": trailing bytes after the last pair");
    return pairs;
}

json manifest_to_json(const Manifest& m) {
    json shards = json::array();
    for (const auto& s : m.shards) {
        shards.push_back({{"file", s.file}, {"pairs", s.pairs}, {"timestamps", s.timestamps}, {"checksum", s.checksum}});
    }
    const auto& r = m.rejections;
    return json{{"generator_version", m.generator_version},
                {"created", m.created},
                {"config", config_to_json(m.config)},
                {"shards", shards},
                {"totals", {{"pairs", m.total_pairs}, {"timestamps", m.total_timestamps}, {"exhausted", m.exhausted}}},
                {"rejections",
                 {{"non_finite", r.non_finite},
                  {"log_nonpositive", r.log_nonpositive},
                  {"sqrt_negative", r.sqrt_negative},
                  {"div_by_zero", r.div_by_zero},
                  {"y_limit", r.y_limit},
                  {"x_limit", r.x_limit},
                  {"input_divergence", r.input_divergence}}},
                {"extra", m.extra}};
}

Manifest manifest_from_json(const json& j) {
    Manifest m;
    m.generator_version = j.at("generator_version").get<std::string>();
    m.created = j.value("created", "");
    m.config = config_from_json(j.at("config"));
    for (const auto& s : j.at("shards")) {
        m.shards.push_back({s.at("file").get<std::string>(), s.at("pairs").get<std::uint64_t>(),
                            s.at("timestamps").get<std::uint64_t>(), s.at("checksum").get<std::uint64_t>()});
    }
    const auto& t = j.at("totals");
    m.total_pairs = t.at("pairs").get<std::uint64_t>();
    m.total_timestamps = t.at("timestamps").get<std::uint64_t>();
    m.exhausted = t.at("exhausted").get<std::uint64_t>();
    const auto& r = j.at("rejections");
    m.rejections.non_finite = r.at("non_finite").get<std::uint64_t>();
    m.rejections.log_nonpositive = r.at("log_nonpositive").get<std::uint64_t>();
    m.rejections.sqrt_negative = r.at("sqrt_negative").get<std::uint64_t>();
    m.rejections.div_by_zero = r.at("div_by_zero").get<std::uint64_t>();
    m.rejections.y_limit = r.at("y_limit").get<std::uint64_t>();
    m.rejections.x_limit = r.value("x_limit", std::uint64_t{0});
    m.rejections.input_divergence = r.at("input_divergence").get<std::uint64_t>();
    if (j.contains("extra")) m.extra = j.at("extra");
    return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
    std::ofstream out = open_for_write(path);
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) throw ShardError(ShardError::Kind::io, "write failed for " + path.string());
}

Manifest read_manifest(const fs::path& path) {
    try {
        return manifest_from_json(json::parse(slurp(path)));
    } catch (const json::exception& e) {
        throw ShardError(ShardError::Kind::invalid, path.string() + ": bad manifest: " + e.what());
    }
}

void export_series_csv(const S2Pair& pair, const fs::path& path) {
    std::ofstream out = open_for_write(path);
    out << 't';
    for (std::size_t i = 0; i < pair.x.channels(); ++i) out << ",x" << i + 1;
    for (std::size_t i = 0; i < pair.y.channels(); ++i) out << ",y" << i + 1;
    out << "\r\n";
    for (std::size_t t = 0; t < pair.length(); ++t) {
        out << t;
        for (std::size_t i = 0; i < pair.x.channels(); ++i) out << ',' << csv_number(pair.x(i, t));
        for (std::size_t i = 0; i < pair.y.channels(); ++i) out << ',' << csv_number(pair.y(i, t));
        out << "\r\n";
    }
    if (!out) throw ShardError(ShardError::Kind::io, "write failed for " + path.string());
}

void export_features_csv(std::span<const FeatureRow> rows, const fs::path& path) {
    std::ofstream out = open_for_write(path);
    out << "id,M,N,adf_stat,adf_p,forecastability,fft_mean,perm_entropy,seasonality,mk_trend\r\n";
    for (const auto& r : rows) {
        const auto& f = r.features;
        out << csv_field(r.id) << ',' << r.m << ',' << r.n << ',' << csv_number(f.adf_stat) << ','
            << csv_number(f.adf_p) << ',' << csv_number(f.forecastability) << ',' << csv_number(f.fft_mean) << ','
            << csv_number(f.perm_entropy) << ',' << csv_number(f.seasonality) << ',' << f.mk_trend << "\r\n";
    }
    if (!out) throw ShardError(ShardError::Kind::io, "write failed for " + path.string());
}

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (!field.empty() || !record.empty()) end_record();
    CsvTable t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return t;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(slurp(path)); }

std::vector<FeatureRow> read_features_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header.size() != kFeatureColumns) throw std::invalid_argument(path.string() + ": expected 10 feature columns");
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& c = t.rows[i];
        const std::string where = path.string() + " row " + std::to_string(i + 1);
        if (c.size() != kFeatureColumns) throw std::invalid_argument(where + ": wrong column count");
        FeatureRow r;
        r.id = c[0];
        r.m = static_cast<int>(parse_double_cell(c[1], where));
        r.n = static_cast<int>(parse_double_cell(c[2], where));
        r.features.adf_stat = parse_double_cell(c[3], where);
        r.features.adf_p = parse_double_cell(c[4], where);
        r.features.forecastability = parse_double_cell(c[5], where);
        r.features.fft_mean = parse_double_cell(c[6], where);
        r.features.perm_entropy = parse_double_cell(c[7], where);
        r.features.seasonality = parse_double_cell(c[8], where);
        r.features.mk_trend = static_cast<int>(parse_double_cell(c[9], where));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<NamedSeries> read_series_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header.empty()) throw std::invalid_argument(path.string() + ": empty CSV");
    std::vector<NamedSeries> cols(t.header.size());
    std::vector<bool> ended(t.header.size(), false);
    for (std::size_t j = 0; j < t.header.size(); ++j) cols[j].name = t.header[j];
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const std::string cell = j < row.size() ? row[j] : std::string();
            if (cell.empty()) {
                ended[j] = true;
                continue;
            }
            if (ended[j]) {
                throw std::invalid_argument(path.string() + ": column '" + cols[j].name + "' has a gap at row " +
                                            std::to_string(i + 1));
            }
            cols[j].values.push_back(parse_double_cell(cell, path.string() + " row " + std::to_string(i + 1)));
        }
    }
    return cols;
}

}  // namespace s2gen
