#pragma once

// Confusion-matrix evaluation of duplicate and parasite flags against
// human labels.
//
// Label file (CSV, header required):
//
//     utterance_index,speaker,is_duplicate,is_parasite
//     12,SPEAKER_01,1,0

#include "commscore/detail/text.hpp"
#include "commscore/duplicate_scorer.hpp"
#include "commscore/parasite_scorer.hpp"
#include "commscore/transcript.hpp"

#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace commscore {

struct GroundTruthLabel {
    std::size_t utterance_index = 0;
    std::string speaker;
    bool is_duplicate = false;
    bool is_parasite = false;

    friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

enum class Task { Duplicates, Parasite };

inline std::string_view to_string(Task t) { return t == Task::Duplicates ? "duplicates" : "parasite"; }

struct TaskMetrics {
    Task task = Task::Duplicates;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }

    friend bool operator==(const TaskMetrics&, const TaskMetrics&) = default;
};

struct EvaluationResult {
    TaskMetrics duplicates{Task::Duplicates};
    TaskMetrics parasite{Task::Parasite};

    friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

/// Predicted flags keyed by utterance index. An utterance missing from a map
/// counts as not flagged.
struct Predictions {
    std::map<std::size_t, bool> duplicates;
    std::map<std::size_t, bool> parasite;
};

inline Predictions predictions_from(std::span<const DuplicateScore> duplicate_scores,
                                    std::span<const ParasiteFlags> parasite_flags) {
    Predictions p;
    for (const auto& s : duplicate_scores) p.duplicates[s.utterance_index] = s.flagged;
    for (const auto& f : parasite_flags)
        for (const auto& e : f.entries) p.parasite[e.utterance_index] = e.flagged;
    return p;
}

/// Metrics from raw counts. Precision, recall and F1 are 0 on a zero
/// denominator.
inline TaskMetrics metrics_from_counts(Task task, std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    TaskMetrics m{task, tp, fp, tn, fn};
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(tp + tn, m.total());
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

namespace detail {

inline void validate_labels(const Transcript& t, std::span<const GroundTruthLabel> labels) {
    std::vector<std::size_t> dangling, repeated, wrong_speaker;
    std::set<std::size_t> seen;
    for (const auto& l : labels) {
        const auto* u = t.find(l.utterance_index);
        if (!u) {
            dangling.push_back(l.utterance_index);
            continue;
        }
        if (!seen.insert(l.utterance_index).second) repeated.push_back(l.utterance_index);
        if (u->speaker != l.speaker) wrong_speaker.push_back(l.utterance_index);
    }
    std::string msg;
    if (!dangling.empty()) msg += "labels reference unknown utterances [" + index_list(dangling) + "]";
    if (!repeated.empty())
        msg += (msg.empty() ? "" : "; ") + std::string("utterances labeled more than once [") + index_list(repeated) + "]";
    if (!wrong_speaker.empty())
        msg += (msg.empty() ? "" : "; ") + std::string("label speaker disagrees with transcript for [") +
               index_list(wrong_speaker) + "]";
    if (!msg.empty()) fail(ErrorKind::Validation, msg);
}

inline TaskMetrics score_task(Task task, std::span<const GroundTruthLabel> labels,
                              const std::map<std::size_t, bool>& predicted) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t actual_pos = 0, predicted_pos = 0;
    for (const auto& l : labels) {
        const bool truth = task == Task::Duplicates ? l.is_duplicate : l.is_parasite;
        auto it = predicted.find(l.utterance_index);
        const bool guess = it != predicted.end() && it->second;
        if (truth && guess) ++tp;
        else if (!truth && guess) ++fp;
        else if (!truth && !guess) ++tn;
        else ++fn;
        actual_pos += truth ? 1 : 0;
        predicted_pos += guess ? 1 : 0;
    }
    // Second entry of the books: marginals must agree with the cells.
    if (tp + fp + tn + fn != labels.size() || tp + fn != actual_pos || tp + fp != predicted_pos)
        fail(ErrorKind::Invariant, "confusion matrix does not reconcile with its marginals");
    return metrics_from_counts(task, tp, fp, tn, fn);
}

} // namespace detail

/// Confusion counts over labeled utterances only.
inline EvaluationResult evaluate(const Transcript& t, const Predictions& predictions,
                                 std::span<const GroundTruthLabel> labels) {
    detail::validate_labels(t, labels);
    return {detail::score_task(Task::Duplicates, labels, predictions.duplicates),
            detail::score_task(Task::Parasite, labels, predictions.parasite)};
}

inline std::vector<GroundTruthLabel> load_labels(std::istream& in) {
    std::vector<GroundTruthLabel> labels;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    auto parse_bool = [&](std::string_view s, const char* field) {
        s = detail::trim(s);
        if (s == "0") return false;
        if (s == "1") return true;
        throw Error(ErrorKind::Parse, std::string(field) + " must be 0 or 1").at_line(line_no);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::is_blank(line)) continue;
        auto fields = detail::split(line, ',');
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 4 || detail::trim(fields[0]) != "utterance_index" ||
                detail::trim(fields[1]) != "speaker" || detail::trim(fields[2]) != "is_duplicate" ||
                detail::trim(fields[3]) != "is_parasite")
                throw Error(ErrorKind::Parse, "expected header utterance_index,speaker,is_duplicate,is_parasite")
                    .at_line(line_no);
            continue;
        }
        if (fields.size() != 4) throw Error(ErrorKind::Parse, "expected 4 fields").at_line(line_no);
        auto idx = detail::parse_size(detail::trim(fields[0]));
        if (!idx) throw Error(ErrorKind::Parse, "bad utterance_index").at_line(line_no);
        std::string speaker(detail::trim(fields[1]));
        if (speaker.size() >= 2 && speaker.front() == '"' && speaker.back() == '"')
            speaker = speaker.substr(1, speaker.size() - 2);
        if (speaker.empty()) throw Error(ErrorKind::Parse, "empty speaker").at_line(line_no);
        labels.push_back({*idx, std::move(speaker), parse_bool(fields[2], "is_duplicate"),
                          parse_bool(fields[3], "is_parasite")});
    }
    if (in.bad()) fail(ErrorKind::Io, "failed reading labels");
    if (labels.empty()) fail(ErrorKind::Validation, "label file has no records");
    return labels;
}

inline std::string format_labels(std::span<const GroundTruthLabel> labels) {
    std::string out = "utterance_index,speaker,is_duplicate,is_parasite\n";
    for (const auto& l : labels)
        out += std::to_string(l.utterance_index) + "," + l.speaker + "," + (l.is_duplicate ? "1" : "0") + "," +
               (l.is_parasite ? "1" : "0") + "\n";
    return out;
}

} // namespace commscore
