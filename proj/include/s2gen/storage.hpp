#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2gen/pipeline.hpp"
#include "s2gen/stats/features.hpp"

namespace s2gen {

inline constexpr char kShardMagic[4] = {'S', '2', 'S', 'H'};
inline constexpr std::uint32_t kShardVersion = 1;
/// magic, version, n_pairs, L, checksum.
inline constexpr std::size_t kShardHeaderSize = 4 + 4 + 4 + 4 + 8;

class ShardError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, version_mismatch, checksum_mismatch, grammar, truncated, invalid };

    ShardError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

const char* to_string(ShardError::Kind kind) noexcept;

struct ShardHeader {
    std::uint32_t version = kShardVersion;
    std::uint32_t n_pairs = 0;
    std::uint32_t length = 0;
    std::uint64_t checksum = 0;
};

struct ShardEntry {
    std::string file;  // relative to the dataset root
    std::uint64_t pairs = 0;
    std::uint64_t timestamps = 0;
    std::uint64_t checksum = 0;

    friend bool operator==(const ShardEntry&, const ShardEntry&) = default;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = 0xcbf29ce484222325ULL) noexcept;

/// Per-pair payload: u8 M, u8 N, (M+N)*L little-endian f64 (X rows then Y
/// rows), N expressions as u32 length + UTF-8 text, then the provenance
/// record as u32 length + UTF-8 JSON.
std::vector<std::uint8_t> encode_pair(const S2Pair& pair);

/// The header is written last; a failed write removes the partial file.
/// Throws ShardError (io, invalid).
ShardEntry write_shard(std::span<const S2Pair> pairs, const std::filesystem::path& path);

/// Validates magic, version and checksum before decoding any pair.
std::vector<S2Pair> read_shard(const std::filesystem::path& path);
ShardHeader read_shard_header(const std::filesystem::path& path);

nlohmann::json provenance_to_json(const PairProvenance& p);
PairProvenance provenance_from_json(const nlohmann::json& j);

struct Manifest {
    GenConfig config;
    std::vector<ShardEntry> shards;
    std::uint64_t total_pairs = 0;
    std::uint64_t total_timestamps = 0;
    std::uint64_t exhausted = 0;
    RejectionCounts rejections;
    std::string generator_version;
    /// ISO-8601 UTC; the only run-dependent field.
    std::string created;
    /// Optional scaling fit, written by `bench`.
    nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

struct FeatureRow {
    std::string id;
    int m = 0;
    int n = 0;
    stats::FeatureVector features;
};

inline constexpr std::size_t kFeatureColumns = 10;

/// Wide format: t, x1..xM, y1..yN, one row per timestep.
void export_series_csv(const S2Pair& pair, const std::filesystem::path& path);
/// id, M, N, adf_stat, adf_p, forecastability, fft_mean, perm_entropy, seasonality, mk_trend.
void export_features_csv(std::span<const FeatureRow> rows, const std::filesystem::path& path);
std::vector<FeatureRow> read_features_csv(const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 reader; the first record is the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// One numeric column per series, header row required. Empty cells end a
/// column early (ragged columns are allowed).
struct NamedSeries {
    std::string name;
    Series values;
};
std::vector<NamedSeries> read_series_csv(const std::filesystem::path& path);

}  // namespace s2gen
