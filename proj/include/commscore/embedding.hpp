#pragma once

// Sentence embeddings and the provider boundary.

#include "commscore/detail/text.hpp"
#include "commscore/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commscore {

/// Non-zero, fixed-dimension real vector.
class EmbeddingVector {
public:
    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) fail(ErrorKind::Argument, "embedding must have positive dimension");
        bool nonzero = false;
        for (double v : values_) {
            if (!std::isfinite(v)) fail(ErrorKind::Argument, "embedding has a non-finite component");
            nonzero = nonzero || v != 0.0;
        }
        if (!nonzero) fail(ErrorKind::Argument, "zero embedding vector");
    }

    std::size_t dimension() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

/// |<a|b>| / (|a| |b|), clamped to [0, 1].
/// Similarities closer than this are ties; callers resolve ties by order.
inline constexpr double tie_tolerance = 1e-12;

inline double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension())
        fail(ErrorKind::Argument, "dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                                      std::to_string(b.dimension()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    // Components can underflow when squared.
    if (na == 0.0 || nb == 0.0) fail(ErrorKind::Argument, "zero-norm embedding");
    double c = std::abs(dot) / (std::sqrt(na) * std::sqrt(nb));
    return std::min(c, 1.0);
}

struct ContextualRequest {
    std::vector<std::string> context_sentences;
    std::string target_sentence;

    friend bool operator==(const ContextualRequest&, const ContextualRequest&) = default;
};

/// Embedding backend. Identical input must give an identical vector for the
/// lifetime of an instance, and implementations must tolerate concurrent calls.
///
/// Public entry points validate arguments, then dispatch to the do_* hooks.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual bool supports_contextual() const = 0;

    EmbeddingVector embed(std::string_view text) const {
        if (detail::is_blank(text)) fail(ErrorKind::Argument, "cannot embed empty text");
        return checked(do_embed(text));
    }

    /// Mean of the target sentence's token embeddings, computed with the
    /// context sentences preceding it in the encoder input.
    EmbeddingVector embed_contextual(const ContextualRequest& req) const {
        if (!supports_contextual())
            fail(ErrorKind::Capability, name() + " does not support contextual embeddings");
        if (detail::is_blank(req.target_sentence))
            fail(ErrorKind::Argument, "contextual target sentence is empty");
        return checked(do_embed_contextual(req));
    }

    /// Same as mapping embed() over `texts`. Failing elements are reported
    /// together in one Batch error.
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < texts.size(); ++i)
            if (detail::is_blank(texts[i])) bad.push_back(i);
        if (!bad.empty())
            throw Error(ErrorKind::Batch, "empty text at " + describe(bad)).at_positions(bad);
        if (texts.empty()) return {};
        auto out = do_embed_batch(texts);
        if (out.size() != texts.size())
            fail(ErrorKind::Transport, "provider returned " + std::to_string(out.size()) +
                                           " vectors for " + std::to_string(texts.size()) + " texts");
        for (const auto& v : out) checked_dim(v);
        return out;
    }

protected:
    virtual EmbeddingVector do_embed(std::string_view text) const = 0;

    virtual EmbeddingVector do_embed_contextual(const ContextualRequest&) const {
        fail(ErrorKind::Capability, name() + " does not support contextual embeddings");
    }

    virtual std::vector<EmbeddingVector> do_embed_batch(std::span<const std::string> texts) const {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        std::vector<std::size_t> bad;
        std::string first_reason;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            try {
                out.push_back(do_embed(texts[i]));
            } catch (const Error& e) {
                if (bad.empty()) first_reason = e.what();
                bad.push_back(i);
            }
        }
        if (!bad.empty())
            throw Error(ErrorKind::Batch, "failed at " + describe(bad) + ": " + first_reason)
                .at_positions(bad);
        return out;
    }

    static std::string describe(const std::vector<std::size_t>& positions) {
        std::string s = "positions [";
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(positions[i]);
        }
        return s + "]";
    }

private:
    void checked_dim(const EmbeddingVector& v) const {
        if (v.dimension() != dimension())
            fail(ErrorKind::Transport, name() + " returned dimension " + std::to_string(v.dimension()) +
                                           ", expected " + std::to_string(dimension()));
    }

    EmbeddingVector checked(EmbeddingVector v) const {
        checked_dim(v);
        return v;
    }
};

} // namespace commscore
