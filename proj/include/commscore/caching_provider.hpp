#pragma once

// Content-addressed, persistent embedding cache.
//
// Cache file `<dir>/embeddings.cache`, one record per line:
//
//     <key> <dimension> <v0>,<v1>,...,<v{dimension-1}>
//
// key: lowercase hex SHA-256 of the request fingerprint
//     "plain" US <provider name> US <text>
//     "contextual" US <provider name> US <context joined by RS> US <target>
// where US = 0x1F and RS = 0x1E. Values are shortest round-trip decimals, so
// cached vectors are bit-identical to the provider's. Later records win.

#include "commscore/detail/text.hpp"
#include "commscore/embedding.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace commscore {

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::Io, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

inline std::string plain_cache_key(std::string_view provider, std::string_view text) {
    std::string fp = "plain\x1f";
    fp += provider;
    fp += '\x1f';
    fp += text;
    return sha256_hex(fp);
}

inline std::string contextual_cache_key(std::string_view provider, const ContextualRequest& req) {
    std::string fp = "contextual\x1f";
    fp += provider;
    fp += '\x1f';
    for (std::size_t i = 0; i < req.context_sentences.size(); ++i) {
        if (i) fp += '\x1e';
        fp += req.context_sentences[i];
    }
    fp += '\x1f';
    fp += req.target_sentence;
    return sha256_hex(fp);
}

inline std::string format_cache_record(std::string_view key, const EmbeddingVector& v) {
    std::string line(key);
    line += ' ';
    line += std::to_string(v.dimension());
    line += ' ';
    for (std::size_t i = 0; i < v.dimension(); ++i) {
        if (i) line += ',';
        line += detail::format_double(v[i]);
    }
    return line;
}

/// Parses one cache line; nullopt when malformed.
inline std::optional<std::pair<std::string, EmbeddingVector>> parse_cache_record(std::string_view line) {
    auto fields = detail::split(detail::trim(line), ' ');
    if (fields.size() != 3 || fields[0].size() != 64) return std::nullopt;
    auto dim = detail::parse_size(fields[1]);
    if (!dim || *dim == 0) return std::nullopt;
    auto parts = detail::split(fields[2], ',');
    if (parts.size() != *dim) return std::nullopt;
    std::vector<double> values;
    values.reserve(parts.size());
    for (auto p : parts) {
        auto v = detail::parse_double(p);
        if (!v) return std::nullopt;
        values.push_back(*v);
    }
    try {
        return std::make_pair(std::string(fields[0]), EmbeddingVector(std::move(values)));
    } catch (const Error&) {
        return std::nullopt;
    }
}

/// Memoizing decorator. Reads are concurrent; inserts and file appends are
/// serialized.
class CachingProvider final : public EmbeddingProvider {
public:
    /// Empty `directory` keeps the cache in memory only.
    CachingProvider(std::shared_ptr<const EmbeddingProvider> inner, std::filesystem::path directory)
        : inner_(std::move(inner)) {
        if (!inner_) fail(ErrorKind::Argument, "caching provider needs an inner provider");
        if (directory.empty()) return;
        std::error_code ec;
        std::filesystem::create_directories(directory, ec);
        if (ec) fail(ErrorKind::Io, "cannot create cache directory " + directory.string() + ": " + ec.message());
        file_ = directory / "embeddings.cache";
        load();
    }

    std::string name() const override { return inner_->name(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    bool supports_contextual() const override { return inner_->supports_contextual(); }

    const std::filesystem::path& file() const noexcept { return file_; }
    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }
    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }
    /// Malformed lines skipped while loading.
    std::size_t skipped_records() const noexcept { return skipped_; }

protected:
    EmbeddingVector do_embed(std::string_view text) const override {
        auto key = plain_cache_key(inner_->name(), text);
        if (auto hit = lookup(key)) return *hit;
        auto v = inner_->embed(text);
        store(key, v);
        return v;
    }

    EmbeddingVector do_embed_contextual(const ContextualRequest& req) const override {
        auto key = contextual_cache_key(inner_->name(), req);
        if (auto hit = lookup(key)) return *hit;
        auto v = inner_->embed_contextual(req);
        store(key, v);
        return v;
    }

    std::vector<EmbeddingVector> do_embed_batch(std::span<const std::string> texts) const override {
        std::vector<std::optional<EmbeddingVector>> found(texts.size());
        std::vector<std::string> keys(texts.size());
        std::vector<std::string> missing;
        std::vector<std::size_t> missing_pos;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            keys[i] = plain_cache_key(inner_->name(), texts[i]);
            found[i] = lookup(keys[i]);
            if (!found[i]) {
                missing.push_back(texts[i]);
                missing_pos.push_back(i);
            }
        }
        if (!missing.empty()) {
            std::vector<EmbeddingVector> fresh;
            try {
                fresh = inner_->embed_batch(missing);
            } catch (Error& e) {
                std::vector<std::size_t> remapped;
                for (auto p : e.positions()) remapped.push_back(missing_pos.at(p));
                e.at_positions(std::move(remapped));
                throw;
            }
            for (std::size_t j = 0; j < fresh.size(); ++j) {
                store(keys[missing_pos[j]], fresh[j]);
                found[missing_pos[j]] = std::move(fresh[j]);
            }
        }
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (auto& f : found) out.push_back(std::move(*f));
        return out;
    }

private:
    std::optional<EmbeddingVector> lookup(const std::string& key) const {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            ++misses_;
            return std::nullopt;
        }
        ++hits_;
        return it->second;
    }

    void store(const std::string& key, const EmbeddingVector& v) const {
        std::unique_lock lock(mutex_);
        if (!entries_.emplace(key, v).second) return;
        if (file_.empty()) return;
        std::ofstream out(file_, std::ios::app | std::ios::binary);
        out << format_cache_record(key, v) << '\n';
        if (!out) fail(ErrorKind::Io, "cannot append to cache file " + file_.string());
    }

    void load() {
        std::ifstream in(file_, std::ios::binary);
        if (!in) return; // first run
        std::string line;
        while (std::getline(in, line)) {
            if (detail::is_blank(line)) continue;
            auto rec = parse_cache_record(line);
            if (!rec) {
                ++skipped_;
                continue;
            }
            entries_.insert_or_assign(std::move(rec->first), std::move(rec->second));
        }
    }

    std::shared_ptr<const EmbeddingProvider> inner_;
    std::filesystem::path file_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, EmbeddingVector> entries_;
    // Counters are bumped under a shared lock, hence atomic.
    mutable std::atomic<std::size_t> hits_{0};
    mutable std::atomic<std::size_t> misses_{0};
    std::size_t skipped_ = 0;
};

} // namespace commscore
