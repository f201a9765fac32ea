#pragma once

#include "commscore/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace commscore {

/// Lowercased whitespace-separated words with ASCII punctuation removed.
/// Words that are pure punctuation vanish.
inline std::vector<std::string> bag_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (detail::is_space(ch)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            continue;
        } else {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        }
    }
    flush();
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Offline deterministic provider: hashed bag of tokens.
///
/// Each token becomes a one-hot vector at bucket fnv1a64(token) % dimension;
/// the sentence embedding is the L2-normalized mean of those one-hots. The
/// contextual variant pools the target sentence's tokens only, so context has
/// no effect and an empty context reproduces embed() exactly.
class HashedBagProvider final : public EmbeddingProvider {
public:
    static constexpr std::size_t default_dimension = 64;

    explicit HashedBagProvider(std::size_t dimension = default_dimension) : dimension_(dimension) {
        if (dimension_ == 0) fail(ErrorKind::Argument, "mock dimension must be positive");
    }

    std::string name() const override { return "mock-hashed-bag-" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    bool supports_contextual() const override { return true; }

    std::size_t bucket(std::string_view token) const { return fnv1a64(token) % dimension_; }

protected:
    EmbeddingVector do_embed(std::string_view text) const override { return pool(text); }

    EmbeddingVector do_embed_contextual(const ContextualRequest& req) const override {
        return pool(req.target_sentence);
    }

private:
    EmbeddingVector pool(std::string_view text) const {
        auto tokens = bag_tokens(text);
        if (tokens.empty())
            fail(ErrorKind::Argument, "no embeddable tokens in '" + std::string(text) + "'");
        std::vector<double> acc(dimension_, 0.0);
        for (const auto& t : tokens) acc[bucket(t)] += 1.0;
        const double n = static_cast<double>(tokens.size());
        double norm = 0.0;
        for (auto& v : acc) {
            v /= n;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : acc) v /= norm;
        return EmbeddingVector(std::move(acc));
    }

    std::size_t dimension_;
};

} // namespace commscore
