#pragma once

// LIDE-v1 point cloud files.
//
// Layout, all integers little-endian:
//   offset 0   4 bytes  magic "LIDE"
//   offset 4   u16      version (1)
//   offset 6   u16      flags, bit 0 set = float64 payload, clear = float32
//   offset 8   u64      n_points
//   offset 16  u32      dim
//   offset 20  u32      reserved, 0
//   offset 24  n_points * dim values, row-major, IEEE-754 little-endian
//
// Token metadata lives next to the data file in <stem>.meta.jsonl, one JSON
// object per point with keys seq_id, pos, token_text, layer, mode.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lidscope/error.hpp"
#include "lidscope/log.hpp"
#include "lidscope/point_cloud.hpp"

namespace lidscope {

inline constexpr std::array<unsigned char, 4> kLideMagic{'L', 'I', 'D', 'E'};
inline constexpr std::uint16_t kLideVersion = 1;
inline constexpr std::size_t kLideHeaderSize = 24;

struct LoadOptions {
    /// Drop a mismatching metadata sidecar with a warning instead of failing.
    bool permissive_meta = false;
};

inline std::filesystem::path meta_sidecar_path(const std::filesystem::path& data_path) {
    auto p = data_path;
    p.replace_extension(".meta.jsonl");
    return p;
}

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
    using U = std::make_unsigned_t<T>;
    U u;
    std::memcpy(&u, &value, sizeof u);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(u >> (8 * i)));
}

template <typename U>
U get_le(const unsigned char* p) {
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
    return u;
}

inline nlohmann::ordered_json meta_to_json(const TokenMeta& m) {
    nlohmann::ordered_json j;
    j["seq_id"] = m.seq_id;
    j["pos"] = m.pos;
    j["token_text"] = m.token_text;
    j["layer"] = m.layer;
    j["mode"] = std::string(to_string(m.mode));
    return j;
}

inline TokenMeta meta_from_json(const nlohmann::json& j) {
    TokenMeta m;
    m.seq_id = j.at("seq_id").get<std::int64_t>();
    m.pos = j.at("pos").get<std::int64_t>();
    m.token_text = j.at("token_text").get<std::string>();
    m.layer = j.at("layer").get<std::int32_t>();
    m.mode = parse_embedding_mode(j.at("mode").get<std::string>());
    return m;
}

inline std::vector<TokenMeta> read_meta_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metadata sidecar " + path.string());
    std::vector<TokenMeta> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            rows.push_back(meta_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw MetadataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace detail

/// Serialize to the exact LIDE-v1 byte stream.
inline std::vector<unsigned char> encode_lide(const PointCloud& cloud) {
    const bool f64 = cloud.precision() == Precision::float64;
    std::vector<unsigned char> out;
    out.reserve(kLideHeaderSize + cloud.data().size() * (f64 ? 8 : 4));
    out.insert(out.end(), kLideMagic.begin(), kLideMagic.end());
    detail::put_le<std::uint16_t>(out, kLideVersion);
    detail::put_le<std::uint16_t>(out, f64 ? 1 : 0);
    detail::put_le<std::uint64_t>(out, cloud.n_points());
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cloud.dim()));
    detail::put_le<std::uint32_t>(out, 0);
    for (double v : cloud.data()) {
        if (f64) {
            detail::put_le(out, std::bit_cast<std::uint64_t>(v));
        } else {
            detail::put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }
    }
    return out;
}

/// Parse a LIDE-v1 byte stream (metadata not included).
inline PointCloud decode_lide(std::span<const unsigned char> bytes, const std::string& origin = "<memory>") {
    if (bytes.size() < kLideHeaderSize) throw FormatError(origin + ": truncated LIDE header");
    if (!std::equal(kLideMagic.begin(), kLideMagic.end(), bytes.begin()))
        throw FormatError(origin + ": bad magic, not a LIDE file");
    const auto* p = bytes.data();
    const auto version = detail::get_le<std::uint16_t>(p + 4);
    if (version != kLideVersion)
        throw FormatError(origin + ": unsupported LIDE version " + std::to_string(version));
    const auto flags = detail::get_le<std::uint16_t>(p + 6);
    if ((flags & ~std::uint16_t{1}) != 0) throw FormatError(origin + ": unknown flag bits set");
    const auto n = detail::get_le<std::uint64_t>(p + 8);
    const auto dim = detail::get_le<std::uint32_t>(p + 16);
    if (detail::get_le<std::uint32_t>(p + 20) != 0) throw FormatError(origin + ": reserved field is not zero");
    if (dim == 0) throw FormatError(origin + ": dimension is zero");
    const bool f64 = (flags & 1) != 0;
    const std::size_t width = f64 ? 8 : 4;
    const std::size_t payload = bytes.size() - kLideHeaderSize;
    if (n > payload / width / dim || payload != n * dim * width)
        throw FormatError(origin + ": payload size does not match header (" + std::to_string(n) +
                          " x " + std::to_string(dim) + ")");
    std::vector<double> data(n * dim);
    const auto* q = p + kLideHeaderSize;
    for (std::size_t i = 0; i < data.size(); ++i, q += width) {
        data[i] = f64 ? std::bit_cast<double>(detail::get_le<std::uint64_t>(q))
                      : static_cast<double>(std::bit_cast<float>(detail::get_le<std::uint32_t>(q)));
    }
    try {
        return PointCloud(n, dim, std::move(data), std::nullopt,
                          f64 ? Precision::float64 : Precision::float32);
    } catch (const DataError& e) {
        throw DataError(origin + ": " + e.what());
    }
}

inline void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
    const auto bytes = encode_lide(cloud);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed for " + path.string());
    }
    const auto sidecar = meta_sidecar_path(path);
    if (cloud.has_meta()) {
        std::ofstream out(sidecar, std::ios::trunc);
        if (!out) throw IoError("cannot open " + sidecar.string() + " for writing");
        for (const auto& m : *cloud.meta()) out << detail::meta_to_json(m).dump() << '\n';
        if (!out) throw IoError("write failed for " + sidecar.string());
    }
}

inline PointCloud load_point_cloud(const std::filesystem::path& path, const LoadOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    PointCloud cloud = decode_lide(bytes, path.string());

    const auto sidecar = meta_sidecar_path(path);
    if (!std::filesystem::exists(sidecar)) return cloud;
    auto meta = detail::read_meta_lines(sidecar);
    if (meta.size() != cloud.n_points()) {
        const std::string msg = sidecar.string() + " has " + std::to_string(meta.size()) +
                                " rows but " + path.string() + " has " +
                                std::to_string(cloud.n_points()) + " points";
        if (!opts.permissive_meta) throw MetadataError(msg);
        log::warn(msg + "; loading without metadata");
        return cloud;
    }
    return PointCloud(cloud.n_points(), cloud.dim(),
                      std::vector<double>(cloud.data().begin(), cloud.data().end()), std::move(meta),
                      cloud.precision());
}

/// True when the file starts with the LIDE magic.
inline bool looks_like_lide(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<char, 4> head{};
    if (!in.read(head.data(), head.size())) return false;
    return std::memcmp(head.data(), kLideMagic.data(), 4) == 0;
}

}  // namespace lidscope
