#pragma once

// Speaker-diarized transcript model and log-line parser.
//
// Log grammar, one utterance per line (LF or CRLF, blank lines skipped):
//
//     ^\s*(\d+)\s*-\s*\[([0-9.]+):([0-9.]+)\]\s+(\S+)\s+(.+)$
//
// e.g. `012 - [113.055:113.855] SPEAKER_00 Zyra is doing golem.`

#include "commscore/detail/text.hpp"
#include "commscore/error.hpp"

#include <algorithm>
#include <cstddef>
#include <istream>
#include <regex>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace commscore {

struct Utterance {
    std::size_t index = 0; // log line ordinal
    double start_s = 0.0;
    double end_s = 0.0;
    std::string speaker;
    std::string text;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

namespace detail {

inline void validate_utterance(const Utterance& u) {
    auto where = "utterance " + std::to_string(u.index);
    if (!(u.start_s >= 0.0) || !(u.end_s >= 0.0))
        fail(ErrorKind::Validation, where + ": timestamps must be non-negative");
    if (u.start_s > u.end_s)
        fail(ErrorKind::Validation, where + ": start " + format_double(u.start_s) + " is after end " +
                                        format_double(u.end_s));
    if (is_blank(u.text)) fail(ErrorKind::Validation, where + ": empty text");
    if (u.text.find_first_of("\r\n") != std::string::npos)
        fail(ErrorKind::Validation, where + ": text spans multiple lines");
    if (u.speaker.empty() || std::any_of(u.speaker.begin(), u.speaker.end(), is_space))
        fail(ErrorKind::Validation, where + ": speaker label must be a non-empty token");
}

} // namespace detail

/// Ordered, validated conversation. Immutable after construction.
class Transcript {
public:
    Transcript() = default;

    explicit Transcript(std::vector<Utterance> utterances) : utterances_(std::move(utterances)) {
        for (std::size_t i = 0; i < utterances_.size(); ++i) {
            const auto& u = utterances_[i];
            detail::validate_utterance(u);
            if (i > 0 && u.index <= utterances_[i - 1].index)
                fail(ErrorKind::Validation, "utterance indices must be strictly increasing (" +
                                                std::to_string(utterances_[i - 1].index) + " then " +
                                                std::to_string(u.index) + ")");
            speakers_.insert(u.speaker);
        }
    }

    const std::vector<Utterance>& utterances() const noexcept { return utterances_; }
    const std::set<std::string>& speakers() const noexcept { return speakers_; }
    std::size_t size() const noexcept { return utterances_.size(); }
    bool empty() const noexcept { return utterances_.empty(); }

    /// Utterance with the given log index, or nullptr.
    const Utterance* find(std::size_t index) const {
        auto it = std::lower_bound(utterances_.begin(), utterances_.end(), index,
                                   [](const Utterance& u, std::size_t i) { return u.index < i; });
        return it != utterances_.end() && it->index == index ? &*it : nullptr;
    }

    friend bool operator==(const Transcript& a, const Transcript& b) {
        return a.utterances_ == b.utterances_;
    }

private:
    std::vector<Utterance> utterances_;
    std::set<std::string> speakers_;
};

/// A transcript restricted to one speaker, in transcript order.
/// Start times are non-decreasing; ties keep index order.
class SpeakerView {
public:
    SpeakerView(std::string speaker, std::vector<Utterance> utterances)
        : speaker_(std::move(speaker)), utterances_(std::move(utterances)) {
        for (std::size_t i = 0; i < utterances_.size(); ++i) {
            const auto& u = utterances_[i];
            if (u.speaker != speaker_)
                fail(ErrorKind::Invariant, "utterance " + std::to_string(u.index) +
                                               " does not belong to speaker " + speaker_);
            if (i > 0) {
                const auto& prev = utterances_[i - 1];
                if (u.index <= prev.index)
                    fail(ErrorKind::Invariant, "speaker view indices must be strictly increasing");
                if (u.start_s < prev.start_s)
                    fail(ErrorKind::Validation,
                         "speaker " + speaker_ + ": utterance " + std::to_string(u.index) +
                             " starts before utterance " + std::to_string(prev.index));
            }
        }
    }

    const std::string& speaker() const noexcept { return speaker_; }
    const std::vector<Utterance>& utterances() const noexcept { return utterances_; }
    std::size_t size() const noexcept { return utterances_.size(); }

    /// Position of `u` in this view; throws Invariant when `u` is not a member.
    std::size_t position_of(const Utterance& u) const {
        auto it = std::lower_bound(utterances_.begin(), utterances_.end(), u.index,
                                   [](const Utterance& s, std::size_t i) { return s.index < i; });
        if (it == utterances_.end() || *it != u)
            fail(ErrorKind::Invariant,
                 "utterance " + std::to_string(u.index) + " is not in the view of " + speaker_);
        return static_cast<std::size_t>(it - utterances_.begin());
    }

private:
    std::string speaker_;
    std::vector<Utterance> utterances_;
};

inline SpeakerView speaker_view(const Transcript& t, std::string_view speaker) {
    if (!t.speakers().contains(std::string(speaker)))
        fail(ErrorKind::NotFound, "unknown speaker " + std::string(speaker));
    std::vector<Utterance> subset;
    for (const auto& u : t.utterances())
        if (u.speaker == speaker) subset.push_back(u);
    return SpeakerView(std::string(speaker), std::move(subset));
}

/// Utterances of `v` starting in the half-open window [u.start - W, u.start)
/// and preceding `u` in log order. The span aliases `v`.
inline std::span<const Utterance> window_before(const SpeakerView& v, const Utterance& u,
                                                double window_s) {
    if (!(window_s > 0.0)) fail(ErrorKind::Argument, "window must be positive");
    const auto pos = v.position_of(u);
    const auto& all = v.utterances();
    auto first = all.begin();
    auto last = all.begin() + static_cast<std::ptrdiff_t>(pos);
    // u.start - s.start is non-increasing along the view, so both bounds are partition points.
    auto lo = std::partition_point(first, last, [&](const Utterance& s) {
        return u.start_s - s.start_s > window_s;
    });
    auto hi = std::partition_point(lo, last, [&](const Utterance& s) { return s.start_s < u.start_s; });
    return {all.data() + (lo - first), static_cast<std::size_t>(hi - lo)};
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseIssue {
    std::size_t line = 0;
    ErrorKind kind = ErrorKind::Parse;
    std::string reason;
};

struct LenientParse {
    Transcript transcript;
    std::vector<ParseIssue> issues;
    std::size_t skipped() const noexcept { return issues.size(); }
};

namespace detail {

// Returns nullopt for blank lines; throws Error with line set otherwise.
inline std::optional<Utterance> parse_line(std::string_view raw, std::size_t line_no) {
    static const std::regex full(R"(^\s*(\d+)\s*-\s*\[([0-9.]+):([0-9.]+)\]\s+(\S+)\s+(.+)$)");
    static const std::regex no_text(R"(^\s*(\d+)\s*-\s*\[([0-9.]+):([0-9.]+)\]\s+(\S+)\s*$)");

    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (is_blank(raw)) return std::nullopt;

    std::string line(raw);
    std::smatch m;
    if (!std::regex_match(line, m, full)) {
        if (std::regex_match(line, m, no_text))
            throw Error(ErrorKind::Validation, "empty text").at_line(line_no);
        throw Error(ErrorKind::Parse, "expected `NNN - [START:END] SPEAKER TEXT`").at_line(line_no);
    }

    Utterance u;
    auto index = parse_size(m.str(1));
    if (!index) throw Error(ErrorKind::Parse, "bad index '" + m.str(1) + "'").at_line(line_no);
    auto start = parse_double(m.str(2));
    if (!start) throw Error(ErrorKind::Parse, "bad start time '" + m.str(2) + "'").at_line(line_no);
    auto end = parse_double(m.str(3));
    if (!end) throw Error(ErrorKind::Parse, "bad end time '" + m.str(3) + "'").at_line(line_no);
    u.index = *index;
    u.start_s = *start;
    u.end_s = *end;
    u.speaker = m.str(4);
    u.text = std::string(trim(m.str(5)));
    try {
        validate_utterance(u);
    } catch (Error& e) {
        e.at_line(line_no);
        throw;
    }
    return u;
}

template <typename OnIssue>
Transcript parse_lines(std::istream& in, OnIssue&& on_issue) {
    std::vector<Utterance> utterances;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        try {
            auto u = parse_line(line, line_no);
            if (!u) continue;
            if (!utterances.empty() && u->index <= utterances.back().index)
                throw Error(ErrorKind::Validation,
                            "index " + std::to_string(u->index) + " does not follow " +
                                std::to_string(utterances.back().index))
                    .at_line(line_no);
            utterances.push_back(std::move(*u));
        } catch (const Error& e) {
            on_issue(e, line_no);
        }
    }
    if (in.bad()) fail(ErrorKind::Io, "failed reading transcript stream");
    return Transcript(std::move(utterances));
}

} // namespace detail

/// Strict parse: the first malformed or invalid line throws.
inline Transcript parse_transcript(std::istream& in) {
    return detail::parse_lines(in, [](const Error& e, std::size_t) { throw e; });
}

inline Transcript parse_transcript(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_transcript(in);
}

/// Lenient parse: bad lines are skipped and reported.
inline LenientParse parse_transcript_lenient(std::istream& in) {
    std::vector<ParseIssue> issues;
    auto t = detail::parse_lines(in, [&](const Error& e, std::size_t line_no) {
        issues.push_back({line_no, e.kind(), e.message()});
    });
    return {std::move(t), std::move(issues)};
}

inline std::string format_utterance(const Utterance& u) {
    std::string idx = std::to_string(u.index);
    if (idx.size() < 3) idx.insert(0, 3 - idx.size(), '0');
    return idx + " - [" + detail::format_double(u.start_s) + ":" + detail::format_double(u.end_s) +
           "] " + u.speaker + " " + u.text;
}

/// Log-line form; parse_transcript(format_transcript(t)) == t.
inline std::string format_transcript(const Transcript& t) {
    std::string out;
    for (const auto& u : t.utterances()) {
        out += format_utterance(u);
        out += '\n';
    }
    return out;
}

} // namespace commscore
