#pragma once

// Analysis report serialization. The structured form is a JSON document whose
// schema is described in docs/report-schema.md; the tabular form is a set of
// CSV tables (comma delimiter, string fields double-quoted, LF line endings).

#include "commscore/detail/text.hpp"
#include "commscore/duplicate_scorer.hpp"
#include "commscore/evaluation.hpp"
#include "commscore/parasite_scorer.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace commscore {

inline constexpr std::string_view report_schema_id = "commscore.report/1";

struct ReportMetadata {
    std::string transcript_id;
    std::string provider;
    nlohmann::json config = nlohmann::json::object(); // everything needed to rerun

    friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct AnalysisReport {
    ReportMetadata metadata;
    std::vector<DuplicateScore> duplicate_scores;
    std::map<std::string, SpeakerDuplicateSummary> duplicate_summary;
    std::vector<SpeakerParasiteResult> parasite; // one per speaker, speaker order
    std::optional<EvaluationResult> evaluation;

    friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

enum class ReportFormat { Structured, Tabular };

/// A named output file held in memory.
struct Document {
    std::string name;
    std::string content;

    friend bool operator==(const Document&, const Document&) = default;
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json metrics_json(const TaskMetrics& m) {
    return {{"tp", m.tp},
            {"fp", m.fp},
            {"tn", m.tn},
            {"fn", m.fn},
            {"accuracy", m.accuracy},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1}};
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Parse, std::string("report is missing '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::Parse, std::string("report field '") + key + "' has the wrong type");
    }
}

inline TaskMetrics metrics_from_json(Task task, const nlohmann::json& j) {
    TaskMetrics m{task};
    m.tp = get_field<std::size_t>(j, "tp");
    m.fp = get_field<std::size_t>(j, "fp");
    m.tn = get_field<std::size_t>(j, "tn");
    m.fn = get_field<std::size_t>(j, "fn");
    m.accuracy = get_field<double>(j, "accuracy");
    m.precision = get_field<double>(j, "precision");
    m.recall = get_field<double>(j, "recall");
    m.f1 = get_field<double>(j, "f1");
    return m;
}

} // namespace detail

inline nlohmann::json to_json(const AnalysisReport& r) {
    using nlohmann::json;
    json scores = json::array();
    for (const auto& s : r.duplicate_scores)
        scores.push_back({{"utterance_index", s.utterance_index},
                          {"speaker", s.speaker},
                          {"score", s.score},
                          {"best_match_index", s.best_match_index ? json(*s.best_match_index) : json(nullptr)},
                          {"flagged", s.flagged}});
    json summary = json::object();
    for (const auto& [speaker, agg] : r.duplicate_summary)
        summary[speaker] = {{"count", agg.count},
                            {"flagged_count", agg.flagged_count},
                            {"flagged_ratio", agg.flagged_ratio},
                            {"mean_score", agg.mean_score}};

    json parasite = json::array();
    for (const auto& p : r.parasite) {
        json entries = json::array();
        for (const auto& e : p.flags.entries)
            entries.push_back({{"utterance_index", e.utterance_index},
                               {"max_score", e.max_score},
                               {"argmax_phrasing", e.argmax_phrasing},
                               {"flagged", e.flagged}});
        json dist = json::array();
        for (const auto& [phrasing, share] : p.summary.phrasing_distribution)
            dist.push_back({{"phrasing", phrasing}, {"share", share}});
        parasite.push_back({{"speaker", p.matrix.speaker},
                            {"matrix",
                             {{"phrasings", p.matrix.phrasings},
                              {"utterance_indices", p.matrix.utterance_indices},
                              {"cells", p.matrix.cells},
                              {"refined_columns", p.matrix.refined_columns}}},
                            {"flags", {{"threshold", p.flags.threshold}, {"entries", entries}}},
                            {"summary", {{"parasite_ratio", p.summary.parasite_ratio}, {"phrasing_distribution", dist}}}});
    }

    json evaluation = nullptr;
    if (r.evaluation)
        evaluation = {{"duplicates", detail::metrics_json(r.evaluation->duplicates)},
                      {"parasite", detail::metrics_json(r.evaluation->parasite)}};

    return {{"schema", report_schema_id},
            {"metadata",
             {{"transcript_id", r.metadata.transcript_id},
              {"provider", r.metadata.provider},
              {"config", r.metadata.config}}},
            {"duplicates", {{"scores", scores}, {"summary", summary}}},
            {"parasite", parasite},
            {"evaluation", evaluation}};
}

inline AnalysisReport report_from_json(const nlohmann::json& j) {
    using detail::get_field;
    using nlohmann::json;
    if (get_field<std::string>(j, "schema") != report_schema_id)
        fail(ErrorKind::Parse, "unsupported report schema");
    AnalysisReport r;
    const auto meta = get_field<json>(j, "metadata");
    r.metadata.transcript_id = get_field<std::string>(meta, "transcript_id");
    r.metadata.provider = get_field<std::string>(meta, "provider");
    r.metadata.config = get_field<json>(meta, "config");

    const auto dup = get_field<json>(j, "duplicates");
    for (const auto& s : get_field<json>(dup, "scores")) {
        DuplicateScore d;
        d.utterance_index = get_field<std::size_t>(s, "utterance_index");
        d.speaker = get_field<std::string>(s, "speaker");
        d.score = get_field<double>(s, "score");
        auto best = get_field<json>(s, "best_match_index");
        if (!best.is_null()) d.best_match_index = get_field<std::size_t>(s, "best_match_index");
        d.flagged = get_field<bool>(s, "flagged");
        r.duplicate_scores.push_back(std::move(d));
    }
    const auto summary = get_field<json>(dup, "summary");
    if (!summary.is_object()) fail(ErrorKind::Parse, "duplicates.summary must be an object");
    for (const auto& [speaker, agg] : summary.items())
        r.duplicate_summary[speaker] = {get_field<std::size_t>(agg, "count"), get_field<std::size_t>(agg, "flagged_count"),
                                        get_field<double>(agg, "flagged_ratio"), get_field<double>(agg, "mean_score")};

    for (const auto& p : get_field<json>(j, "parasite")) {
        SpeakerParasiteResult res;
        const auto speaker = get_field<std::string>(p, "speaker");
        const auto mj = get_field<json>(p, "matrix");
        res.matrix.speaker = speaker;
        res.matrix.phrasings = get_field<std::vector<std::string>>(mj, "phrasings");
        res.matrix.utterance_indices = get_field<std::vector<std::size_t>>(mj, "utterance_indices");
        res.matrix.cells = get_field<std::vector<std::vector<double>>>(mj, "cells");
        res.matrix.refined_columns = get_field<std::vector<std::size_t>>(mj, "refined_columns");
        if (res.matrix.cells.size() != res.matrix.rows())
            fail(ErrorKind::Parse, "matrix row count does not match phrasings");
        for (const auto& row : res.matrix.cells)
            if (row.size() != res.matrix.cols()) fail(ErrorKind::Parse, "matrix column count does not match utterances");

        const auto fj = get_field<json>(p, "flags");
        res.flags.speaker = speaker;
        res.flags.threshold = get_field<double>(fj, "threshold");
        res.flags.phrasings = res.matrix.phrasings;
        for (const auto& e : get_field<json>(fj, "entries"))
            res.flags.entries.push_back({get_field<std::size_t>(e, "utterance_index"), get_field<double>(e, "max_score"),
                                         get_field<std::string>(e, "argmax_phrasing"), get_field<bool>(e, "flagged")});

        const auto sj = get_field<json>(p, "summary");
        res.summary.speaker = speaker;
        res.summary.parasite_ratio = get_field<double>(sj, "parasite_ratio");
        for (const auto& d : get_field<json>(sj, "phrasing_distribution"))
            res.summary.phrasing_distribution.emplace_back(get_field<std::string>(d, "phrasing"),
                                                           get_field<double>(d, "share"));
        r.parasite.push_back(std::move(res));
    }

    const auto ev = get_field<json>(j, "evaluation");
    if (!ev.is_null())
        r.evaluation = EvaluationResult{detail::metrics_from_json(Task::Duplicates, get_field<json>(ev, "duplicates")),
                                        detail::metrics_from_json(Task::Parasite, get_field<json>(ev, "parasite"))};
    return r;
}

inline AnalysisReport parse_report(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("report is not valid JSON: ") + e.what());
    }
    return report_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string csv_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string file_safe(std::string_view s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

} // namespace detail

inline std::string heatmap_csv(const InterferenceMatrix& m) {
    std::string out = "phrasing";
    for (auto idx : m.utterance_indices) out += "," + std::to_string(idx);
    out += '\n';
    for (std::size_t j = 0; j < m.rows(); ++j) {
        out += detail::csv_quote(m.phrasings[j]);
        for (std::size_t k = 0; k < m.cols(); ++k) out += "," + detail::format_double(m.at(j, k));
        out += '\n';
    }
    return out;
}

inline std::string heatmap_file_stem(std::string_view speaker) { return "heatmap_" + detail::file_safe(speaker); }

inline std::vector<Document> emit_report(const AnalysisReport& r, ReportFormat format) {
    using detail::csv_quote;
    using detail::format_double;
    if (format == ReportFormat::Structured) return {{"report.json", to_json(r).dump(2) + "\n"}};

    std::vector<Document> docs;
    std::string scores = "utterance_index,speaker,score,best_match_index,flagged\n";
    for (const auto& s : r.duplicate_scores)
        scores += std::to_string(s.utterance_index) + "," + csv_quote(s.speaker) + "," + format_double(s.score) + "," +
                  (s.best_match_index ? std::to_string(*s.best_match_index) : std::string()) + "," +
                  (s.flagged ? "1" : "0") + "\n";
    docs.push_back({"duplicate_scores.csv", std::move(scores)});

    std::string summary = "speaker,count,flagged_count,flagged_ratio,mean_score,parasite_ratio\n";
    std::map<std::string, double> parasite_ratio;
    for (const auto& p : r.parasite) parasite_ratio[p.matrix.speaker] = p.summary.parasite_ratio;
    for (const auto& [speaker, agg] : r.duplicate_summary) {
        auto it = parasite_ratio.find(speaker);
        summary += csv_quote(speaker) + "," + std::to_string(agg.count) + "," + std::to_string(agg.flagged_count) + "," +
                   format_double(agg.flagged_ratio) + "," + format_double(agg.mean_score) + "," +
                   (it == parasite_ratio.end() ? std::string() : format_double(it->second)) + "\n";
    }
    docs.push_back({"summary.csv", std::move(summary)});

    std::string flags = "speaker,utterance_index,max_score,argmax_phrasing,flagged,refined\n";
    std::string dist = "speaker,phrasing,share\n";
    for (const auto& p : r.parasite) {
        for (const auto& e : p.flags.entries)
            flags += csv_quote(p.flags.speaker) + "," + std::to_string(e.utterance_index) + "," + format_double(e.max_score) +
                     "," + csv_quote(e.argmax_phrasing) + "," + (e.flagged ? "1" : "0") + "," +
                     (p.matrix.refined(e.utterance_index) ? "1" : "0") + "\n";
        for (const auto& [phrasing, share] : p.summary.phrasing_distribution)
            dist += csv_quote(p.summary.speaker) + "," + csv_quote(phrasing) + "," + format_double(share) + "\n";
    }
    docs.push_back({"parasite_flags.csv", std::move(flags)});
    docs.push_back({"phrasing_distribution.csv", std::move(dist)});

    for (const auto& p : r.parasite) docs.push_back({heatmap_file_stem(p.matrix.speaker) + ".csv", heatmap_csv(p.matrix)});

    if (r.evaluation) {
        std::string metrics = "task,tp,fp,tn,fn,accuracy,precision,recall,f1\n";
        for (const auto* m : {&r.evaluation->duplicates, &r.evaluation->parasite})
            metrics += csv_quote(to_string(m->task)) + "," + std::to_string(m->tp) + "," + std::to_string(m->fp) + "," +
                       std::to_string(m->tn) + "," + std::to_string(m->fn) + "," + format_double(m->accuracy) + "," +
                       format_double(m->precision) + "," + format_double(m->recall) + "," + format_double(m->f1) + "\n";
        docs.push_back({"metrics.csv", std::move(metrics)});
    }
    return docs;
}

/// Writes every document into `dir`. On failure, files written by this call
/// are removed before the error propagates.
inline std::vector<std::filesystem::path> write_documents(const std::filesystem::path& dir,
                                                          const std::vector<Document>& docs) {
    std::vector<std::filesystem::path> written;
    auto rollback = [&] {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
    };
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& d : docs) {
        auto path = dir / d.name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (out) written.push_back(path);
        out << d.content;
        out.close();
        if (!out) {
            rollback();
            fail(ErrorKind::Io, "cannot write " + path.string());
        }
    }
    return written;
}

} // namespace commscore
