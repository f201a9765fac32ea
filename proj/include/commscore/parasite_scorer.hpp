#pragma once

// Parasite-communication scoring: every utterance of a speaker is compared with
// a lexicon of hesitant phrasings. Short utterances can be re-embedded with the
// preceding conversation as context before comparison.

#include "commscore/embedding.hpp"
#include "commscore/transcript.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <set>
#include <string>
#include <vector>

namespace commscore {

class ParasiteLexicon {
public:
    explicit ParasiteLexicon(std::vector<std::string> phrasings) {
        std::set<std::string> seen;
        for (auto& p : phrasings) {
            std::string entry(detail::trim(p));
            if (entry.empty()) fail(ErrorKind::Validation, "lexicon entries must be non-empty");
            if (!seen.insert(entry).second) fail(ErrorKind::Validation, "duplicate lexicon entry '" + entry + "'");
            phrasings_.push_back(std::move(entry));
        }
        if (phrasings_.empty()) fail(ErrorKind::Validation, "lexicon must contain at least one phrasing");
    }

    const std::vector<std::string>& phrasings() const noexcept { return phrasings_; }
    std::size_t size() const noexcept { return phrasings_.size(); }

    friend bool operator==(const ParasiteLexicon&, const ParasiteLexicon&) = default;

private:
    std::vector<std::string> phrasings_;
};

/// Built-in hesitation phrasings.
inline ParasiteLexicon default_lexicon() {
    return ParasiteLexicon({"I think", "I don't think", "We should", "We shouldn't", "Maybe", "We could",
                            "We couldn't", "Hmmmmmmmmm", "I don't know", "I'm not sure", "Can we ?",
                            "Can I engage ?"});
}

/// One phrasing per line; blank lines and lines starting with '#' are ignored.
inline ParasiteLexicon load_lexicon(std::istream& in) {
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        entries.emplace_back(t);
    }
    if (in.bad()) fail(ErrorKind::Io, "failed reading lexicon");
    return ParasiteLexicon(std::move(entries));
}

inline std::string format_lexicon(const ParasiteLexicon& lex) {
    std::string out = "# parasite phrasings, one per line\n";
    for (const auto& p : lex.phrasings()) out += p + "\n";
    return out;
}

enum class Pooling { Mean };

struct RefinementConfig {
    bool enabled = true;
    std::size_t max_target_tokens = 2; // utterances with at most this many tokens are refined
    double context_window_s = 15.0;
    Pooling pooling = Pooling::Mean;

    void validate() const {
        if (!(context_window_s > 0.0)) fail(ErrorKind::Argument, "refinement context window must be positive");
        if (max_target_tokens == 0) fail(ErrorKind::Argument, "max_target_tokens must be positive");
    }

    friend bool operator==(const RefinementConfig&, const RefinementConfig&) = default;
};

/// Word runs plus one token per punctuation character: "Okay." -> 2,
/// "I'll stop him." -> 4.
inline std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (detail::is_space(ch)) {
            in_word = false;
        } else if (ch == '\'' && in_word) {
            continue; // contraction: "I'll" is one token
        } else if (c < 0x80 && std::ispunct(c)) {
            ++n;
            in_word = false;
        } else if (!in_word) {
            ++n;
            in_word = true;
        }
    }
    return n;
}

/// Texts of utterances from any speaker that start within `window_s` before
/// `u` and precede it in the log, in transcript order.
inline std::vector<std::string> refinement_context(const Transcript& t, const Utterance& u, double window_s) {
    std::vector<std::string> ctx;
    for (const auto& s : t.utterances()) {
        if (s.index >= u.index) break;
        if (s.start_s < u.start_s && u.start_s - s.start_s <= window_s) ctx.push_back(s.text);
    }
    return ctx;
}

/// Phrasing x utterance similarity grid for one speaker.
struct InterferenceMatrix {
    std::string speaker;
    std::vector<std::string> phrasings;
    std::vector<std::size_t> utterance_indices;
    std::vector<std::vector<double>> cells; // cells[phrasing][utterance]
    std::vector<std::size_t> refined_columns; // utterance indices, ascending

    std::size_t rows() const noexcept { return phrasings.size(); }
    std::size_t cols() const noexcept { return utterance_indices.size(); }
    double at(std::size_t phrasing, std::size_t column) const { return cells.at(phrasing).at(column); }
    bool refined(std::size_t utterance_index) const {
        return std::binary_search(refined_columns.begin(), refined_columns.end(), utterance_index);
    }

    friend bool operator==(const InterferenceMatrix&, const InterferenceMatrix&) = default;
};

inline InterferenceMatrix interference_matrix(const Transcript& t, std::string_view speaker,
                                              const ParasiteLexicon& lex, const RefinementConfig& rcfg,
                                              const EmbeddingProvider& p) {
    rcfg.validate();
    auto view = speaker_view(t, speaker);
    if (rcfg.enabled && !p.supports_contextual())
        fail(ErrorKind::Capability, p.name() + " cannot refine embeddings; disable refinement");

    InterferenceMatrix m;
    m.speaker = view.speaker();
    m.phrasings = lex.phrasings();
    const auto& utts = view.utterances();
    for (const auto& u : utts) m.utterance_indices.push_back(u.index);

    std::vector<EmbeddingVector> phrase_vecs;
    try {
        phrase_vecs = p.embed_batch(lex.phrasings());
    } catch (const Error& e) {
        throw e.with_context("embedding parasite phrasings");
    }

    // Plain embeddings for every column that is not refined.
    std::vector<std::optional<ContextualRequest>> refine(utts.size());
    std::vector<std::string> plain_texts;
    std::vector<std::size_t> plain_cols;
    for (std::size_t k = 0; k < utts.size(); ++k) {
        if (rcfg.enabled && count_tokens(utts[k].text) <= rcfg.max_target_tokens) {
            auto ctx = refinement_context(t, utts[k], rcfg.context_window_s);
            if (!ctx.empty()) {
                refine[k] = ContextualRequest{std::move(ctx), utts[k].text};
                continue;
            }
        }
        plain_texts.push_back(utts[k].text);
        plain_cols.push_back(k);
    }

    std::vector<std::optional<EmbeddingVector>> col_vecs(utts.size());
    try {
        auto plain = p.embed_batch(plain_texts);
        for (std::size_t i = 0; i < plain.size(); ++i) col_vecs[plain_cols[i]] = std::move(plain[i]);
    } catch (const Error& e) {
        std::vector<std::size_t> failing;
        for (auto pos : e.positions()) failing.push_back(utts.at(plain_cols.at(pos)).index);
        throw e.with_context("speaker " + m.speaker + ", columns for utterances " + detail::index_list(failing))
            .at_positions(failing);
    }
    for (std::size_t k = 0; k < utts.size(); ++k) {
        if (!refine[k]) continue;
        try {
            col_vecs[k] = p.embed_contextual(*refine[k]);
        } catch (const Error& e) {
            throw e.with_context("speaker " + m.speaker + ", column " + std::to_string(k) + " (utterance " +
                                 std::to_string(utts[k].index) + ", refined)");
        }
        m.refined_columns.push_back(utts[k].index);
    }

    m.cells.assign(phrase_vecs.size(), std::vector<double>(utts.size(), 0.0));
    for (std::size_t j = 0; j < phrase_vecs.size(); ++j)
        for (std::size_t k = 0; k < utts.size(); ++k) {
            try {
                m.cells[j][k] = cosine_sim(phrase_vecs[j], *col_vecs[k]);
            } catch (const Error& e) {
                throw e.with_context("cell (" + std::to_string(j) + ", " + std::to_string(k) + ")");
            }
        }
    return m;
}

struct ParasiteFlag {
    std::size_t utterance_index = 0;
    double max_score = 0.0;
    std::string argmax_phrasing;
    bool flagged = false;

    friend bool operator==(const ParasiteFlag&, const ParasiteFlag&) = default;
};

struct ParasiteFlags {
    std::string speaker;
    double threshold = 0.6;
    std::vector<std::string> phrasings; // lexicon order, for the distribution
    std::vector<ParasiteFlag> entries;

    std::size_t flagged_count() const {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [](const ParasiteFlag& f) { return f.flagged; }));
    }

    friend bool operator==(const ParasiteFlags&, const ParasiteFlags&) = default;
};

/// Column max against the threshold; ties go to the earliest phrasing.
inline ParasiteFlags flag_parasites(const InterferenceMatrix& m, double threshold = 0.6) {
    if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorKind::Argument, "parasite threshold must lie in (0, 1]");
    ParasiteFlags f{m.speaker, threshold, m.phrasings, {}};
    if (m.rows() == 0) return f;
    f.entries.reserve(m.cols());
    for (std::size_t k = 0; k < m.cols(); ++k) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.rows(); ++j)
            if (m.at(j, k) > m.at(best, k) + tie_tolerance) best = j;
        const double mx = m.at(best, k);
        f.entries.push_back({m.utterance_indices[k], mx, m.phrasings[best], mx >= threshold});
    }
    return f;
}

struct InterferenceSummary {
    std::string speaker;
    double parasite_ratio = 0.0;
    // Share of flagged utterances per argmax phrasing, lexicon order. Empty when
    // nothing is flagged.
    std::vector<std::pair<std::string, double>> phrasing_distribution;

    friend bool operator==(const InterferenceSummary&, const InterferenceSummary&) = default;
};

inline InterferenceSummary interference_summary(const ParasiteFlags& f, std::size_t total_utterances) {
    if (total_utterances < f.entries.size())
        fail(ErrorKind::Argument, "total_utterances is smaller than the number of flag entries");
    InterferenceSummary s{f.speaker, 0.0, {}};
    const auto flagged = f.flagged_count();
    if (total_utterances == 0 || flagged == 0) return s;
    s.parasite_ratio = static_cast<double>(flagged) / static_cast<double>(total_utterances);
    for (const auto& p : f.phrasings) {
        auto n = std::count_if(f.entries.begin(), f.entries.end(),
                               [&](const ParasiteFlag& e) { return e.flagged && e.argmax_phrasing == p; });
        s.phrasing_distribution.emplace_back(p, static_cast<double>(n) / static_cast<double>(flagged));
    }
    return s;
}

/// Plain-embedding similarity of a sentence and one phrasing.
inline double pair_score(std::string_view sentence, std::string_view phrasing, const EmbeddingProvider& p) {
    return cosine_sim(p.embed(sentence), p.embed(phrasing));
}

/// Matrix, flags and summary for one speaker.
struct SpeakerParasiteResult {
    InterferenceMatrix matrix;
    ParasiteFlags flags;
    InterferenceSummary summary;

    friend bool operator==(const SpeakerParasiteResult&, const SpeakerParasiteResult&) = default;
};

inline SpeakerParasiteResult analyze_parasites(const Transcript& t, std::string_view speaker,
                                               const ParasiteLexicon& lex, const RefinementConfig& rcfg,
                                               double threshold, const EmbeddingProvider& p) {
    auto m = interference_matrix(t, speaker, lex, rcfg, p);
    auto f = flag_parasites(m, threshold);
    auto s = interference_summary(f, m.cols());
    return {std::move(m), std::move(f), std::move(s)};
}

} // namespace commscore
