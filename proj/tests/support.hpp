#pragma once

// Test-only oracles, generators and provider doubles shared by the unit and
// acceptance suites. Nothing here calls into the scorer code paths it checks.

#include "commscore/embedding.hpp"
#include "commscore/mock_provider.hpp"
#include "commscore/transcript.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(COMMSCORE_TEST_DATA) + "/" + name; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline commscore::Transcript load_fixture(const std::string& name) {
    return commscore::parse_transcript(read_file(data_path(name)));
}

// ---------------------------------------------------------------------------
// Reference hashed-bag embedding: counts per bucket, divided by the L2 norm
// of the counts.

inline std::vector<double> reference_bag_embedding(const std::string& text, std::size_t dim) {
    std::vector<std::string> words;
    std::string w;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        const char c = i < text.size() ? text[i] : ' ';
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!w.empty()) words.push_back(w);
            w.clear();
            continue;
        }
        const bool punct = (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
                           (c >= '{' && c <= '~');
        if (punct) continue;
        w.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
    std::vector<double> counts(dim, 0.0);
    for (const auto& word : words) {
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char c : word) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        counts[h % dim] += 1.0;
    }
    double norm = 0.0;
    for (double c : counts) norm += c * c;
    norm = std::sqrt(norm);
    for (double& c : counts) c /= norm;
    return counts;
}

inline double reference_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::fabs(dot) / std::sqrt(na * nb);
}

// ---------------------------------------------------------------------------
// Brute-force duplicate oracle: every utterance against every earlier one.
// Scores within 1e-12 count as tied; the earlier utterance keeps the match.

struct OracleScore {
    std::size_t utterance_index;
    double score;
    std::optional<std::size_t> best;
    bool flagged;
};

inline std::vector<OracleScore> brute_force_duplicates(const commscore::Transcript& t, double window_s,
                                                       double threshold, std::size_t dim) {
    std::vector<OracleScore> out;
    const auto& u = t.utterances();
    for (std::size_t i = 0; i < u.size(); ++i) {
        OracleScore s{u[i].index, 0.0, std::nullopt, false};
        const auto ei = reference_bag_embedding(u[i].text, dim);
        for (std::size_t j = 0; j < i; ++j) {
            if (u[j].speaker != u[i].speaker) continue;
            if (!(u[j].start_s < u[i].start_s && u[i].start_s - u[j].start_s <= window_s)) continue;
            const double c = reference_cosine(ei, reference_bag_embedding(u[j].text, dim));
            if (!s.best || c > s.score + 1e-12) {
                s.score = c;
                s.best = u[j].index;
            }
        }
        s.flagged = s.score >= threshold;
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random transcripts

inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> v{
        "push", "base", "Zyra", "golem", "we", "can't", "I", "think", "maybe", "drake", "top", "bot",
        "mid", "flash", "ward", "go", "stop", "him", "okay", "yes", "no", "wait", "he's", "here",
        "they", "swap", "should", "could", "engage", "Lucian", "TP", "turret", "fight", "items"};
    return v;
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t min_words = 1, std::size_t max_words = 6) {
    const auto& vocab = vocabulary();
    std::uniform_int_distribution<std::size_t> len(min_words, max_words), pick(0, vocab.size() - 1);
    std::uniform_int_distribution<int> punct(0, 5);
    std::string s;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += vocab[pick(rng)];
        if (i + 1 < n && punct(rng) == 0) s += ',';
    }
    static const char* enders[] = {".", "?", "!", "", "..."};
    s += enders[punct(rng) % 5];
    return s;
}

inline double ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

struct RandomTranscriptOptions {
    std::size_t max_utterances = 50;
    std::size_t max_speakers = 4;
    double max_gap_s = 6.0;
    double copy_probability = 0.15; // repeat an earlier same-speaker text verbatim
    double tie_probability = 0.05;  // reuse the previous start time
};

inline commscore::Transcript random_transcript(std::mt19937_64& rng, RandomTranscriptOptions o = {}) {
    std::uniform_int_distribution<std::size_t> count(0, o.max_utterances), speakers(1, o.max_speakers);
    std::uniform_real_distribution<double> gap(0.0, o.max_gap_s), dur(0.1, 4.0), coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> skip(0, 2);
    const auto n = count(rng);
    const auto k = speakers(rng);
    std::uniform_int_distribution<std::size_t> who(0, k - 1);
    std::vector<commscore::Utterance> out;
    std::map<std::string, std::vector<std::string>> said;
    double t = ms(gap(rng));
    std::size_t index = skip(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && coin(rng) >= o.tie_probability) t = ms(t + gap(rng));
        const auto speaker = "SPEAKER_0" + std::to_string(who(rng));
        std::string text;
        auto& history = said[speaker];
        if (!history.empty() && coin(rng) < o.copy_probability) {
            std::uniform_int_distribution<std::size_t> h(0, history.size() - 1);
            text = history[h(rng)];
        } else {
            text = random_sentence(rng);
        }
        history.push_back(text);
        out.push_back({index, t, ms(t + dur(rng)), speaker, text});
        index += 1 + skip(rng);
    }
    return commscore::Transcript(std::move(out));
}

// ---------------------------------------------------------------------------
// Provider doubles

/// Contextual embeddings that actually depend on the context: the target's
/// bag vector plus half the context's, renormalized.
class ContextMixingProvider final : public commscore::EmbeddingProvider {
public:
    explicit ContextMixingProvider(std::size_t dim = 64) : bag_(dim) {}
    std::string name() const override { return "context-mixing"; }
    std::size_t dimension() const override { return bag_.dimension(); }
    bool supports_contextual() const override { return true; }

protected:
    commscore::EmbeddingVector do_embed(std::string_view text) const override { return bag_.embed(text); }
    commscore::EmbeddingVector do_embed_contextual(const commscore::ContextualRequest& req) const override {
        auto target = bag_.embed(req.target_sentence);
        if (req.context_sentences.empty()) return target;
        std::string joined;
        for (const auto& s : req.context_sentences) joined += s + " ";
        std::vector<double> mixed(target.values().begin(), target.values().end());
        try {
            auto ctx = bag_.embed(joined);
            for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] += 0.5 * ctx[i];
        } catch (const commscore::Error&) {
            return target; // context without tokens
        }
        double n = 0;
        for (double v : mixed) n += v * v;
        for (double& v : mixed) v /= std::sqrt(n);
        return commscore::EmbeddingVector(std::move(mixed));
    }

private:
    commscore::HashedBagProvider bag_;
};

/// Plain embeddings only.
class PlainOnlyProvider final : public commscore::EmbeddingProvider {
public:
    std::string name() const override { return "plain-only"; }
    std::size_t dimension() const override { return bag_.dimension(); }
    bool supports_contextual() const override { return false; }

protected:
    commscore::EmbeddingVector do_embed(std::string_view text) const override { return bag_.embed(text); }

private:
    commscore::HashedBagProvider bag_;
};

/// Counts calls reaching the wrapped provider.
class CountingProvider final : public commscore::EmbeddingProvider {
public:
    explicit CountingProvider(std::shared_ptr<const commscore::EmbeddingProvider> inner) : inner_(std::move(inner)) {}
    std::string name() const override { return inner_->name(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    bool supports_contextual() const override { return inner_->supports_contextual(); }
    std::size_t calls() const { return calls_.load(); }

protected:
    commscore::EmbeddingVector do_embed(std::string_view text) const override {
        ++calls_;
        return inner_->embed(text);
    }
    commscore::EmbeddingVector do_embed_contextual(const commscore::ContextualRequest& req) const override {
        ++calls_;
        return inner_->embed_contextual(req);
    }

private:
    std::shared_ptr<const commscore::EmbeddingProvider> inner_;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Transport failure for any text containing "FAIL".
class FailingProvider final : public commscore::EmbeddingProvider {
public:
    std::string name() const override { return "failing"; }
    std::size_t dimension() const override { return bag_.dimension(); }
    bool supports_contextual() const override { return true; }

protected:
    commscore::EmbeddingVector do_embed(std::string_view text) const override {
        if (text.find("FAIL") != std::string_view::npos) commscore::fail(commscore::ErrorKind::Transport, "backend down");
        return bag_.embed(text);
    }
    commscore::EmbeddingVector do_embed_contextual(const commscore::ContextualRequest& req) const override {
        return do_embed(req.target_sentence);
    }

private:
    commscore::HashedBagProvider bag_;
};

// ---------------------------------------------------------------------------
// Planted confusion fixture: 129 labels whose predictions realize
// tp=14, fp=24, fn=3, tn=88.

struct PlantedCase {
    bool predicted;
    bool actual;
};

inline std::vector<PlantedCase> planted_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    std::vector<PlantedCase> out;
    out.insert(out.end(), tp, {true, true});
    out.insert(out.end(), fp, {true, false});
    out.insert(out.end(), fn, {false, true});
    out.insert(out.end(), tn, {false, false});
    return out;
}

} // namespace testing_support
