#pragma once

// Binary model file. All numeric fields little-endian.
//
//   offset  size  field
//        0     4  magic "ELMB"
//        4     4  version (u32, currently 1)
//        8     4  generator_id (u32)
//       12     8  master_seed (u64)
//       20     8  lambda (f64)
//       28     8  alpha (f64)
//       36     4  levels L (u32)
//       40     4  t_steps T (u32)
//       44     4  hidden J (u32)
//       48     4  input width M (u32)
//       52     4  classes K (u32)
//       56     1  activation (u8: 0 = tanh, 1 = sign)
//       57  8LTJK weights, level-major then step, each J×K f64 row-major
//      end     8  CRC-64/XZ of every preceding byte (u64)

#include <boost/crc.hpp>

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "elmboost/boosting.hpp"
#include "elmboost/error.hpp"

namespace elmboost {

inline constexpr std::array<std::uint8_t, 4> kModelMagic{'E', 'L', 'M', 'B'};
inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::size_t kModelHeaderBytes = 57;
inline constexpr std::size_t kModelChecksumBytes = 8;

class ModelFileError : public Error {
public:
    enum class Kind { bad_magic, unsupported_version, checksum_mismatch, truncated, size_mismatch, bad_field };

    ModelFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL,
                                 0xFFFFFFFFFFFFFFFFULL, true, true>;

inline std::uint64_t crc64(std::span<const std::uint8_t> bytes) {
    Crc64 crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

/// Exact size of a model file for the given shape.
inline std::size_t model_file_size(std::size_t levels, std::size_t t_steps, std::size_t hidden,
                                   std::size_t classes) {
    return kModelHeaderBytes + 8 * levels * t_steps * hidden * classes + kModelChecksumBytes;
}

namespace detail {

class LeWriter {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    std::vector<std::uint8_t>& buffer() { return out_; }

private:
    template <typename U>
    void put(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class LeReader {
public:
    explicit LeReader(std::span<const std::uint8_t> in) : in_(in) {}
    std::uint8_t u8() { return in_[pos_++]; }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    std::size_t position() const { return pos_; }

private:
    template <typename U>
    U get() {
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

inline std::uint32_t checked_u32(std::size_t v, const char* field) {
    if (v > 0xFFFFFFFFu) throw ArgumentError(std::string("model field ") + field + " exceeds u32");
    return static_cast<std::uint32_t>(v);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const BoostedModel& model) {
    const auto& hp = model.hyper;
    if (model.weights.size() != hp.levels * hp.t_steps) {
        throw DimensionError("serialize_model: weight grid does not match levels x t_steps");
    }
    detail::LeWriter w;
    w.buffer().reserve(model_file_size(hp.levels, hp.t_steps, hp.hidden, model.classes));
    w.bytes(kModelMagic);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(model.generator));
    w.u64(hp.master_seed);
    w.f64(hp.lambda);
    w.f64(hp.alpha);
    w.u32(detail::checked_u32(hp.levels, "levels"));
    w.u32(detail::checked_u32(hp.t_steps, "t_steps"));
    w.u32(detail::checked_u32(hp.hidden, "hidden"));
    w.u32(detail::checked_u32(model.input_width, "input_width"));
    w.u32(detail::checked_u32(model.classes, "classes"));
    w.u8(static_cast<std::uint8_t>(hp.activation));
    for (const Matrix& m : model.weights) {
        if (m.rows() != hp.hidden || m.cols() != model.classes) {
            throw DimensionError("serialize_model: weight matrix " + m.shape() + " is not J x K");
        }
        for (double v : m.values()) w.f64(v);
    }
    w.u64(crc64(w.buffer()));
    return std::move(w.buffer());
}

inline BoostedModel deserialize_model(std::span<const std::uint8_t> bytes) {
    using Kind = ModelFileError::Kind;
    if (bytes.size() < kModelMagic.size() ||
        !std::equal(kModelMagic.begin(), kModelMagic.end(), bytes.begin())) {
        throw ModelFileError(Kind::bad_magic, "model file: bad magic (expected \"ELMB\")");
    }
    if (bytes.size() < 8) throw ModelFileError(Kind::truncated, "model file: truncated header");
    detail::LeReader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    if (version != kModelVersion) {
        throw ModelFileError(Kind::unsupported_version,
                             "model file: unsupported version " + std::to_string(version));
    }
    if (bytes.size() < kModelHeaderBytes) {
        throw ModelFileError(Kind::truncated, "model file: truncated header");
    }

    BoostedModel model;
    const std::uint32_t generator = r.u32();
    model.hyper.master_seed = r.u64();
    model.hyper.lambda = r.f64();
    model.hyper.alpha = r.f64();
    model.hyper.levels = r.u32();
    model.hyper.t_steps = r.u32();
    model.hyper.hidden = r.u32();
    model.input_width = r.u32();
    model.classes = r.u32();
    const std::uint8_t activation = r.u8();

    const std::size_t expected = model_file_size(model.hyper.levels, model.hyper.t_steps,
                                                 model.hyper.hidden, model.classes);
    if (bytes.size() < expected) {
        throw ModelFileError(Kind::truncated, "model file: " + std::to_string(bytes.size()) +
                                                  " bytes, header declares " +
                                                  std::to_string(expected));
    }
    if (bytes.size() > expected) {
        throw ModelFileError(Kind::size_mismatch, "model file: " + std::to_string(bytes.size()) +
                                                      " bytes, header declares " +
                                                      std::to_string(expected));
    }
    const std::size_t body = expected - kModelChecksumBytes;
    detail::LeReader tail(bytes.subspan(body));
    if (tail.u64() != crc64(bytes.first(body))) {
        throw ModelFileError(Kind::checksum_mismatch, "model file: checksum mismatch");
    }
    if (!is_known_generator(generator)) {
        throw ModelFileError(Kind::bad_field, "model file: unknown generator id " + std::to_string(generator));
    }
    if (activation > 1) {
        throw ModelFileError(Kind::bad_field, "model file: unknown activation " + std::to_string(activation));
    }
    model.generator = static_cast<GeneratorId>(generator);
    model.hyper.activation = static_cast<Activation>(activation);
    try {
        model.hyper.validate();
    } catch (const ArgumentError& e) {
        throw ModelFileError(Kind::bad_field, std::string("model file: ") + e.what());
    }

    detail::LeReader weights(bytes.subspan(kModelHeaderBytes, body - kModelHeaderBytes));
    model.weights.reserve(model.hyper.levels * model.hyper.t_steps);
    for (std::size_t i = 0; i < model.hyper.levels * model.hyper.t_steps; ++i) {
        Matrix m(model.hyper.hidden, model.classes);
        for (double& v : m.values()) v = weights.f64();
        model.weights.push_back(std::move(m));
    }
    return model;
}

inline void save_model(const BoostedModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError("cannot write model file " + path.string());
}

inline BoostedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return deserialize_model(bytes);
    } catch (const ModelFileError& e) {
        throw ModelFileError(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace elmboost
