#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "asap/matrix.hpp"

namespace asap {

using Meta = std::map<std::string, std::string>;

struct StackShape {
    std::uint32_t layers = 0;
    std::uint32_t heads = 0;
    std::uint32_t tokens = 0;       // includes CLS at index 0
    std::uint32_t feature_dim = 0;  // 0 when no features are stored

    friend bool operator==(const StackShape&, const StackShape&) = default;
};

/// Per-layer, per-head attention maps plus optional per-layer token features.
///
/// The float32 payloads are kept verbatim so that a write/read cycle is
/// bit-exact. Rows are validated at construction (drift <= 1e-3) and are
/// renormalized in double precision whenever they enter arithmetic, see
/// head_average().
class AttentionStack {
public:
    /// Maximum tolerated |row sum - 1| before a row is considered corrupt.
    static constexpr double kMaxRowDrift = 1e-3;
    /// Entries above 1 + kEntrySlack are rejected.
    static constexpr double kEntrySlack = 1e-6;

    /// attention: layers*heads matrices of tokens*tokens, row-major.
    /// features: empty, or layers matrices of tokens*feature_dim, row-major.
    static AttentionStack create(StackShape shape, std::vector<float> attention,
                                 std::vector<float> features = {}, Meta meta = {},
                                 bool has_cls = true);

    const StackShape& shape() const noexcept { return m_shape; }
    std::size_t layers() const noexcept { return m_shape.layers; }
    std::size_t heads() const noexcept { return m_shape.heads; }
    std::size_t tokens() const noexcept { return m_shape.tokens; }
    std::size_t feature_dim() const noexcept { return m_shape.feature_dim; }
    bool has_features() const noexcept { return m_shape.feature_dim > 0; }

    std::span<const float> attention_payload() const noexcept { return m_attention; }
    std::span<const float> feature_payload() const noexcept { return m_features; }

    /// Raw tokens*tokens payload for one head.
    std::span<const float> head(std::size_t layer, std::size_t head) const;

    /// Feature matrix of one layer in double precision.
    /// Throws MissingFeatures when the stack has none, LayerOutOfRange otherwise.
    Matrix features(std::size_t layer) const;

    const Meta& meta() const noexcept { return m_meta; }

    /// Largest |row sum - 1| seen over all stored attention rows.
    double max_row_drift() const noexcept { return m_max_drift; }

    friend bool operator==(const AttentionStack&, const AttentionStack&) = default;

private:
    AttentionStack() = default;

    StackShape m_shape;
    std::vector<float> m_attention;
    std::vector<float> m_features;
    Meta m_meta;
    double m_max_drift = 0.0;
};

/// Reads an ATNB container:
///   "ATNB" | version u32 (=1) | L u32 | H u32 | N u32 | d u32 | flags u32 (bit 0 = has_cls)
///   | meta_len u32 | meta JSON (UTF-8) | L*H attention matrices N*N f32
///   | L feature matrices N*d f32 (only if d > 0)
/// All integers and floats little-endian.
AttentionStack read_stack(const std::filesystem::path& path);

/// Serialized ATNB bytes for a stack.
std::vector<std::uint8_t> encode_stack(const AttentionStack& stack);
AttentionStack decode_stack(std::span<const std::uint8_t> bytes);

void write_stack(const AttentionStack& stack, const std::filesystem::path& path);

/// Head-averaged attention of one layer. Each head row is first renormalized
/// in double precision, then the heads are averaged.
TransitionMatrix head_average(const AttentionStack& stack, std::size_t layer);

}  // namespace asap
