#pragma once

// IDX (MNIST distribution format) images and labels, per-sample normalization,
// one-hot targets and pixel-dropout noise.

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "elmboost/error.hpp"
#include "elmboost/matrix.hpp"
#include "elmboost/projection.hpp"

namespace elmboost {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Raised for malformed IDX content or inconsistent image/label pairs.
class IdxError : public Error {
public:
    enum class Kind { bad_magic, truncated, bad_dimensions, count_mismatch, label_out_of_range };

    IdxError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// N images of rows×cols unsigned 8-bit pixels, flattened row-major.
struct ImageSet {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;

    std::size_t width() const noexcept { return rows * cols; }
    std::span<const std::uint8_t> image(std::size_t i) const {
        return {pixels.data() + i * width(), width()};
    }
    friend bool operator==(const ImageSet&, const ImageSet&) = default;
};

/// Images paired with validated labels in [0, classes).
struct RawDataset {
    ImageSet images;
    std::vector<std::uint8_t> labels;
    std::size_t classes = 10;

    std::size_t size() const noexcept { return labels.size(); }
    friend bool operator==(const RawDataset&, const RawDataset&) = default;
};

/// Normalized samples (one per row) with their labels.
struct Dataset {
    Matrix x;
    std::vector<int> labels;
    std::size_t classes = 0;
    std::size_t degenerate_rows = 0;  // constant images emitted as zero rows
};

/// One-hot N×K targets.
struct TargetMatrix {
    Matrix y;
};

namespace detail {

inline std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t at) {
    return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
           (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

inline void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected,
                        const char* what) {
    if (bytes.size() < 4) {
        throw IdxError(IdxError::Kind::truncated, std::string(what) + ": file shorter than magic");
    }
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != expected) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ": bad magic 0x%08x (expected 0x%08x)", magic, expected);
        throw IdxError(IdxError::Kind::bad_magic, std::string(what) + buf);
    }
}

}  // namespace detail

inline ImageSet parse_idx_images(std::span<const std::uint8_t> bytes) {
    detail::check_magic(bytes, kIdxImageMagic, "idx images");
    if (bytes.size() < 16) throw IdxError(IdxError::Kind::truncated, "idx images: truncated header");
    ImageSet set;
    set.count = detail::read_be32(bytes, 4);
    set.rows = detail::read_be32(bytes, 8);
    set.cols = detail::read_be32(bytes, 12);
    if (set.rows == 0 || set.cols == 0) {
        throw IdxError(IdxError::Kind::bad_dimensions, "idx images: zero image dimension");
    }
    std::size_t payload = 0;
    if (__builtin_mul_overflow(set.count, set.rows * set.cols, &payload) ||
        payload > std::vector<std::uint8_t>().max_size()) {
        throw IdxError(IdxError::Kind::bad_dimensions,
                       "idx images: declared size overflows (" + std::to_string(set.count) + "x" +
                           std::to_string(set.rows) + "x" + std::to_string(set.cols) + ")");
    }
    if (bytes.size() - 16 < payload) {
        throw IdxError(IdxError::Kind::truncated,
                       "idx images: payload has " + std::to_string(bytes.size() - 16) +
                           " bytes, header declares " + std::to_string(payload));
    }
    set.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
    return set;
}

inline std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
    detail::check_magic(bytes, kIdxLabelMagic, "idx labels");
    if (bytes.size() < 8) throw IdxError(IdxError::Kind::truncated, "idx labels: truncated header");
    const std::size_t count = detail::read_be32(bytes, 4);
    if (bytes.size() - 8 < count) {
        throw IdxError(IdxError::Kind::truncated,
                       "idx labels: payload has " + std::to_string(bytes.size() - 8) +
                           " bytes, header declares " + std::to_string(count));
    }
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

inline std::vector<std::uint8_t> encode_idx_images(const ImageSet& set) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + set.pixels.size());
    detail::write_be32(out, kIdxImageMagic);
    detail::write_be32(out, static_cast<std::uint32_t>(set.count));
    detail::write_be32(out, static_cast<std::uint32_t>(set.rows));
    detail::write_be32(out, static_cast<std::uint32_t>(set.cols));
    out.insert(out.end(), set.pixels.begin(), set.pixels.end());
    return out;
}

inline std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    detail::write_be32(out, kIdxLabelMagic);
    detail::write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

/// Whole file contents; gzip-compressed files are inflated, anything else is read as-is.
inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes;
    std::uint8_t buf[1 << 16];
    for (;;) {
        const int n = gzread(file, buf, sizeof buf);
        if (n < 0) {
            int code = 0;
            const std::string msg = gzerror(file, &code);
            gzclose(file);
            throw IoError("error reading " + path.string() + ": " + msg);
        }
        if (n == 0) break;
        bytes.insert(bytes.end(), buf, buf + n);
    }
    gzclose(file);
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

namespace detail {

template <typename Parse>
auto load_with_context(const std::filesystem::path& path, Parse parse) {
    const auto bytes = read_file_bytes(path);
    try {
        return parse(std::span<const std::uint8_t>(bytes));
    } catch (const IdxError& e) {
        throw IdxError(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace detail

inline ImageSet load_idx_images(const std::filesystem::path& path) {
    return detail::load_with_context(path, [](auto b) { return parse_idx_images(b); });
}

inline std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path) {
    return detail::load_with_context(path, [](auto b) { return parse_idx_labels(b); });
}

/// Pairs images with labels, checking counts and that every label is below `classes`.
inline RawDataset pair_dataset(ImageSet images, std::vector<std::uint8_t> labels,
                               std::size_t classes = 10) {
    if (images.count != labels.size()) {
        throw IdxError(IdxError::Kind::count_mismatch,
                       std::to_string(images.count) + " images but " +
                           std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) {
            throw IdxError(IdxError::Kind::label_out_of_range,
                           "label " + std::to_string(labels[i]) + " at index " +
                               std::to_string(i) + " is not below class count " +
                               std::to_string(classes));
        }
    }
    return {std::move(images), std::move(labels), classes};
}

/// The first n samples.
inline RawDataset head(const RawDataset& raw, std::size_t n) {
    n = std::min(n, raw.size());
    RawDataset out;
    out.classes = raw.classes;
    out.images.count = n;
    out.images.rows = raw.images.rows;
    out.images.cols = raw.images.cols;
    out.images.pixels.assign(raw.images.pixels.begin(),
                             raw.images.pixels.begin() + static_cast<std::ptrdiff_t>(n * raw.images.width()));
    out.labels.assign(raw.labels.begin(), raw.labels.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

/// Per image: square root of each intensity, subtract the row mean, divide by the row norm.
/// Constant images have no direction after centering and become zero rows.
inline Dataset normalize(const RawDataset& raw) {
    const std::size_t n = raw.size();
    const std::size_t m = raw.images.width();
    Dataset out{Matrix(n, m), std::vector<int>(raw.labels.begin(), raw.labels.end()), raw.classes, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const auto px = raw.images.image(i);
        auto row = out.x.row(i);
        if (std::all_of(px.begin(), px.end(), [&](std::uint8_t v) { return v == px[0]; })) {
            ++out.degenerate_rows;
            continue;
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = std::sqrt(static_cast<double>(px[j]));
            mean += row[j];
        }
        mean /= static_cast<double>(m);
        double sq = 0.0;
        for (double& v : row) {
            v -= mean;
            sq += v * v;
        }
        const double norm = std::sqrt(sq);
        for (double& v : row) v /= norm;
    }
    return out;
}

inline TargetMatrix one_hot_encode(std::span<const int> labels, std::size_t classes) {
    TargetMatrix t{Matrix(labels.size(), classes)};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw ArgumentError("one_hot_encode: label " + std::to_string(labels[i]) +
                                " at index " + std::to_string(i) + " outside [0, " +
                                std::to_string(classes) + ")");
        }
        t.y(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

/// Zeroes exactly round(fraction * M) distinct pixels in every image, chosen uniformly
/// (partial Fisher-Yates over one SplitMix64 stream, images in order).
inline RawDataset zero_pixel_noise(const RawDataset& raw, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw ArgumentError("noise fraction must be in [0, 1]");
    }
    const std::size_t m = raw.images.width();
    const auto drop = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(m)));
    RawDataset out = raw;
    if (drop == 0) return out;

    SplitMix64 rng(seed);
    std::vector<std::size_t> positions(m);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::iota(positions.begin(), positions.end(), std::size_t{0});
        std::uint8_t* px = out.images.pixels.data() + i * m;
        for (std::size_t k = 0; k < drop; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(rng.below(m - k));
            std::swap(positions[k], positions[pick]);
            px[positions[k]] = 0;
        }
    }
    return out;
}

}  // namespace elmboost
