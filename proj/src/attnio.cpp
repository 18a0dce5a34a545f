#include "asap/attnio.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "asap/error.hpp"

namespace asap {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagHasCls = 1u;

std::string at(std::size_t l, std::size_t h, std::size_t row) {
    return "layer " + std::to_string(l) + " head " + std::to_string(h) + " row " + std::to_string(row);
}

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int shift = 0; shift < 32; shift += 8) {
            m_out.push_back(static_cast<std::uint8_t>(v >> shift));
        }
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        m_out.insert(m_out.end(), p, p + n);
    }
    std::vector<std::uint8_t> take() { return std::move(m_out); }

private:
    std::vector<std::uint8_t> m_out;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : m_in(in) {}

    std::size_t remaining() const noexcept { return m_in.size() - m_pos; }

    std::uint32_t u32() {
        need(4, "header");
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) {
            v |= static_cast<std::uint32_t>(m_in[m_pos + b]) << (8 * b);
        }
        m_pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::span<const std::uint8_t> bytes(std::size_t n, const char* what) {
        need(n, what);
        auto s = m_in.subspan(m_pos, n);
        m_pos += n;
        return s;
    }

private:
    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw Error(ErrorCode::ShapeMismatch, std::string("truncated ") + what);
        }
    }

    std::span<const std::uint8_t> m_in;
    std::size_t m_pos = 0;
};

}  // namespace

AttentionStack AttentionStack::create(StackShape shape, std::vector<float> attention,
                                      std::vector<float> features, Meta meta, bool has_cls) {
    if (!has_cls) {
        throw Error(ErrorCode::MissingCls, "stack must carry a CLS token at index 0");
    }
    if (shape.layers < 1 || shape.heads < 1 || shape.tokens < 2) {
        throw Error(ErrorCode::ShapeMismatch, "need L >= 1, H >= 1, N >= 2");
    }
    const std::size_t n = shape.tokens;
    const std::size_t expected_attention = std::size_t{shape.layers} * shape.heads * n * n;
    if (attention.size() != expected_attention) {
        throw Error(ErrorCode::ShapeMismatch, "attention payload has " + std::to_string(attention.size()) +
                                                  " values, expected " + std::to_string(expected_attention));
    }
    const std::size_t expected_features = std::size_t{shape.layers} * n * shape.feature_dim;
    if (features.size() != expected_features) {
        throw Error(ErrorCode::ShapeMismatch, "feature payload has " + std::to_string(features.size()) +
                                                  " values, expected " + std::to_string(expected_features));
    }

    double max_drift = 0.0;
    for (std::size_t l = 0; l < shape.layers; ++l) {
        for (std::size_t h = 0; h < shape.heads; ++h) {
            const float* base = attention.data() + (l * shape.heads + h) * n * n;
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double v = base[i * n + j];
                    if (!std::isfinite(v)) {
                        throw Error(ErrorCode::NonFinite, at(l, h, i) + " has a non-finite entry");
                    }
                    if (v < 0.0) {
                        throw Error(ErrorCode::NegativeEntry, at(l, h, i) + " has a negative entry");
                    }
                    if (v > 1.0 + kEntrySlack) {
                        throw Error(ErrorCode::NotRowStochastic, at(l, h, i) + " has an entry above 1");
                    }
                    sum += v;
                }
                const double drift = std::abs(sum - 1.0);
                if (drift > kMaxRowDrift) {
                    throw Error(ErrorCode::NotRowStochastic,
                                at(l, h, i) + " sums to " + std::to_string(sum));
                }
                max_drift = std::max(max_drift, drift);
            }
        }
    }
    for (float v : features) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFinite, "feature payload has a non-finite value");
        }
    }

    AttentionStack stack;
    stack.m_shape = shape;
    stack.m_attention = std::move(attention);
    stack.m_features = std::move(features);
    stack.m_meta = std::move(meta);
    stack.m_max_drift = max_drift;
    return stack;
}

std::span<const float> AttentionStack::head(std::size_t layer, std::size_t head) const {
    if (layer >= layers()) {
        throw Error(ErrorCode::LayerOutOfRange, "layer " + std::to_string(layer) + " of " + std::to_string(layers()));
    }
    if (head >= heads()) {
        throw Error(ErrorCode::IndexOutOfRange, "head " + std::to_string(head) + " of " + std::to_string(heads()));
    }
    const std::size_t nn = tokens() * tokens();
    return std::span<const float>(m_attention).subspan((layer * heads() + head) * nn, nn);
}

Matrix AttentionStack::features(std::size_t layer) const {
    if (!has_features()) {
        throw Error(ErrorCode::MissingFeatures, "stack carries no token features");
    }
    if (layer >= layers()) {
        throw Error(ErrorCode::LayerOutOfRange, "layer " + std::to_string(layer) + " of " + std::to_string(layers()));
    }
    const std::size_t n = tokens();
    const std::size_t d = feature_dim();
    Matrix out(n, d);
    const float* base = m_features.data() + layer * n * d;
    for (std::size_t i = 0; i < n * d; ++i) {
        out.data()[i] = base[i];
    }
    return out;
}

std::vector<std::uint8_t> encode_stack(const AttentionStack& stack) {
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [key, value] : stack.meta()) {
        meta[key] = value;
    }
    const std::string blob = meta.dump();

    ByteWriter w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(stack.shape().layers);
    w.u32(stack.shape().heads);
    w.u32(stack.shape().tokens);
    w.u32(stack.shape().feature_dim);
    w.u32(kFlagHasCls);
    w.u32(static_cast<std::uint32_t>(blob.size()));
    w.bytes(blob.data(), blob.size());
    for (float v : stack.attention_payload()) {
        w.f32(v);
    }
    for (float v : stack.feature_payload()) {
        w.f32(v);
    }
    return w.take();
}

AttentionStack decode_stack(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
        throw Error(ErrorCode::MagicMismatch, "missing ATNB magic");
    }
    ByteReader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw Error(ErrorCode::VersionUnsupported, "version " + std::to_string(version));
    }
    StackShape shape;
    shape.layers = r.u32();
    shape.heads = r.u32();
    shape.tokens = r.u32();
    shape.feature_dim = r.u32();
    const std::uint32_t flags = r.u32();
    const std::uint32_t meta_len = r.u32();
    const auto blob = r.bytes(meta_len, "meta blob");

    Meta meta;
    if (meta_len > 0) {
        const auto parsed = nlohmann::json::parse(blob.begin(), blob.end(), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw Error(ErrorCode::MalformedMeta, "meta blob is not a JSON object");
        }
        for (const auto& [key, value] : parsed.items()) {
            meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
        }
    }

    const std::size_t n = shape.tokens;
    const std::size_t attention_count = std::size_t{shape.layers} * shape.heads * n * n;
    const std::size_t feature_count = std::size_t{shape.layers} * n * shape.feature_dim;
    if (r.remaining() != 4 * (attention_count + feature_count)) {
        throw Error(ErrorCode::ShapeMismatch, "payload length " + std::to_string(r.remaining()) +
                                                  " does not match declared L/H/N/d");
    }
    std::vector<float> attention(attention_count);
    for (float& v : attention) {
        v = r.f32();
    }
    std::vector<float> features(feature_count);
    for (float& v : features) {
        v = r.f32();
    }
    return AttentionStack::create(shape, std::move(attention), std::move(features), std::move(meta),
                                  (flags & kFlagHasCls) != 0);
}

AttentionStack read_stack(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_stack(bytes);
}

void write_stack(const AttentionStack& stack, const std::filesystem::path& path) {
    const auto bytes = encode_stack(stack);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoFailure, "write to " + path.string() + " failed");
    }
}

TransitionMatrix head_average(const AttentionStack& stack, std::size_t layer) {
    if (layer >= stack.layers()) {
        throw Error(ErrorCode::LayerOutOfRange,
                    "layer " + std::to_string(layer) + " of " + std::to_string(stack.layers()));
    }
    const std::size_t n = stack.tokens();
    const std::size_t heads = stack.heads();
    const double inv_heads = 1.0 / static_cast<double>(heads);
    Matrix avg(n, n);
    for (std::size_t h = 0; h < heads; ++h) {
        const auto payload = stack.head(layer, h);
        for (std::size_t i = 0; i < n; ++i) {
            const float* row = payload.data() + i * n;
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sum += row[j];
            }
            const double scale = inv_heads / sum;
            auto out = avg.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                out[j] += static_cast<double>(row[j]) * scale;
            }
        }
    }
    return TransitionMatrix::from_matrix(std::move(avg));
}

}  // namespace asap
