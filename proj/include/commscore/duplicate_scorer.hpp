#pragma once

// Duplicate-communication scoring: each utterance is compared with the same
// speaker's utterances from the preceding window, and the best cosine
// similarity becomes its redundancy score.

#include "commscore/embedding.hpp"
#include "commscore/transcript.hpp"

#include <future>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace commscore {

struct DuplicateConfig {
    double window_s = 15.0;
    double threshold = 0.6;

    void validate() const {
        if (!(window_s > 0.0)) fail(ErrorKind::Argument, "duplicate window must be positive");
        if (!(threshold > 0.0 && threshold <= 1.0))
            fail(ErrorKind::Argument, "duplicate threshold must lie in (0, 1]");
    }

    friend bool operator==(const DuplicateConfig&, const DuplicateConfig&) = default;
};

struct DuplicateScore {
    std::size_t utterance_index = 0;
    std::string speaker;
    double score = 0.0;
    std::optional<std::size_t> best_match_index; // absent iff the window was empty
    bool flagged = false;

    friend bool operator==(const DuplicateScore&, const DuplicateScore&) = default;
};

namespace detail {

// Max over the window, earliest index winning ties.
inline DuplicateScore best_in_window(const Utterance& u, std::span<const Utterance> window,
                                     const EmbeddingVector& target,
                                     const auto& embedding_of, // (const Utterance&) -> const EmbeddingVector&
                                     const DuplicateConfig& cfg) {
    DuplicateScore out{u.index, u.speaker, 0.0, std::nullopt, false};
    for (const auto& s : window) {
        double c = cosine_sim(target, embedding_of(s));
        if (!out.best_match_index || c > out.score + tie_tolerance) {
            out.score = c;
            out.best_match_index = s.index;
        }
    }
    out.flagged = out.score >= cfg.threshold;
    return out;
}

inline std::vector<DuplicateScore> score_view(const SpeakerView& v, const DuplicateConfig& cfg,
                                              const EmbeddingProvider& p) {
    const auto& utts = v.utterances();
    // One embedding per distinct text.
    std::vector<std::string> texts;
    std::unordered_map<std::string, std::size_t> slot_of_text;
    std::vector<std::size_t> slot(utts.size());
    for (std::size_t i = 0; i < utts.size(); ++i) {
        auto [it, inserted] = slot_of_text.try_emplace(utts[i].text, texts.size());
        if (inserted) texts.push_back(utts[i].text);
        slot[i] = it->second;
    }

    std::vector<EmbeddingVector> embeddings;
    try {
        embeddings = p.embed_batch(texts);
    } catch (const Error& e) {
        std::vector<std::size_t> failing;
        for (std::size_t i = 0; i < utts.size(); ++i)
            for (auto pos : e.positions())
                if (slot[i] == pos) failing.push_back(utts[i].index);
        auto ctx = "speaker " + v.speaker() +
                   (failing.empty() ? std::string() : ", utterances " + index_list(failing));
        throw e.with_context(ctx).at_positions(failing);
    }

    std::vector<DuplicateScore> out;
    out.reserve(utts.size());
    const auto* base = utts.data();
    auto embedding_of = [&](const Utterance& s) -> const EmbeddingVector& {
        return embeddings[slot[static_cast<std::size_t>(&s - base)]];
    };
    for (std::size_t i = 0; i < utts.size(); ++i) {
        auto window = window_before(v, utts[i], cfg.window_s);
        out.push_back(best_in_window(utts[i], window, embeddings[slot[i]], embedding_of, cfg));
    }
    return out;
}

} // namespace detail

/// Score of one utterance against its own speaker's window.
inline DuplicateScore score_utterance(const SpeakerView& v, const Utterance& u, const DuplicateConfig& cfg,
                                      const EmbeddingProvider& p) {
    cfg.validate();
    auto window = window_before(v, u, cfg.window_s);
    try {
        auto target = p.embed(u.text);
        std::vector<EmbeddingVector> prior;
        prior.reserve(window.size());
        for (const auto& s : window) prior.push_back(p.embed(s.text));
        const auto* base = window.data();
        auto embedding_of = [&](const Utterance& s) -> const EmbeddingVector& {
            return prior[static_cast<std::size_t>(&s - base)];
        };
        return detail::best_in_window(u, window, target, embedding_of, cfg);
    } catch (const Error& e) {
        throw e.with_context("utterance " + std::to_string(u.index) + " (" + u.speaker + ")");
    }
}

/// One score per utterance, in transcript order. Speakers are scored
/// concurrently when there is more than one.
inline std::vector<DuplicateScore> score_transcript(const Transcript& t, const DuplicateConfig& cfg,
                                                    const EmbeddingProvider& p) {
    cfg.validate();
    std::vector<SpeakerView> views;
    for (const auto& s : t.speakers()) views.push_back(speaker_view(t, s));

    std::vector<std::vector<DuplicateScore>> per_speaker(views.size());
    if (views.size() <= 1) {
        for (std::size_t i = 0; i < views.size(); ++i) per_speaker[i] = detail::score_view(views[i], cfg, p);
    } else {
        std::vector<std::future<std::vector<DuplicateScore>>> jobs;
        jobs.reserve(views.size());
        for (const auto& v : views)
            jobs.push_back(std::async(std::launch::async, [&v, &cfg, &p] { return detail::score_view(v, cfg, p); }));
        // Drain every job before rethrowing so no task outlives its captures.
        std::optional<Error> first_error;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            try {
                per_speaker[i] = jobs[i].get();
            } catch (const Error& e) {
                if (!first_error) first_error = e;
            }
        }
        if (first_error) throw *first_error;
    }

    std::unordered_map<std::size_t, const DuplicateScore*> by_index;
    for (const auto& scores : per_speaker)
        for (const auto& s : scores) by_index.emplace(s.utterance_index, &s);
    std::vector<DuplicateScore> out;
    out.reserve(t.size());
    for (const auto& u : t.utterances()) out.push_back(*by_index.at(u.index));
    return out;
}

struct SpeakerDuplicateSummary {
    std::size_t count = 0;
    std::size_t flagged_count = 0;
    double flagged_ratio = 0.0;
    double mean_score = 0.0;

    friend bool operator==(const SpeakerDuplicateSummary&, const SpeakerDuplicateSummary&) = default;
};

inline std::map<std::string, SpeakerDuplicateSummary> duplicate_summary(std::span<const DuplicateScore> scores) {
    std::map<std::string, SpeakerDuplicateSummary> out;
    std::map<std::string, double> sums;
    for (const auto& s : scores) {
        auto& agg = out[s.speaker];
        ++agg.count;
        agg.flagged_count += s.flagged ? 1 : 0;
        sums[s.speaker] += s.score;
    }
    for (auto& [speaker, agg] : out) {
        agg.flagged_ratio = static_cast<double>(agg.flagged_count) / static_cast<double>(agg.count);
        agg.mean_score = sums[speaker] / static_cast<double>(agg.count);
    }
    return out;
}

} // namespace commscore
