#pragma once

// Run configuration and the end-to-end pipeline behind the command-line tool.
//
// Config file: a JSON object; every key is optional and unknown keys are
// rejected. See docs/config.md.

#include "commscore/caching_provider.hpp"
#include "commscore/duplicate_scorer.hpp"
#include "commscore/evaluation.hpp"
#include "commscore/mock_provider.hpp"
#include "commscore/parasite_scorer.hpp"
#include "commscore/plot.hpp"
#include "commscore/report.hpp"
#include "commscore/sidecar_client.hpp"
#include "commscore/transcript.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace commscore {

inline constexpr const char* endpoint_env_var = "COMMSCORE_SIDECAR_ENDPOINT";

enum class ProviderKind { Mock, Sidecar, CachedSidecar };

inline std::string_view to_string(ProviderKind k) {
    switch (k) {
    case ProviderKind::Mock: return "mock";
    case ProviderKind::Sidecar: return "sidecar";
    case ProviderKind::CachedSidecar: return "cached-sidecar";
    }
    return "mock";
}

inline ProviderKind parse_provider_kind(std::string_view s) {
    if (s == "mock") return ProviderKind::Mock;
    if (s == "sidecar") return ProviderKind::Sidecar;
    if (s == "cached-sidecar" || s == "cached_sidecar") return ProviderKind::CachedSidecar;
    fail(ErrorKind::Argument, "unknown provider '" + std::string(s) + "' (mock, sidecar, cached-sidecar)");
}

inline const std::set<std::string>& known_formats() {
    static const std::set<std::string> f{"json", "csv", "svg"};
    return f;
}

struct RunConfig {
    double window_s = 15.0;
    double duplicate_threshold = 0.6;
    double parasite_threshold = 0.6;
    std::string lexicon; // lexicon file; empty: built-in phrasings
    std::vector<std::string> lexicon_phrasings; // inline lexicon, wins over the file
    ProviderKind provider = ProviderKind::Mock;
    std::string endpoint = "http://127.0.0.1:8765";
    std::size_t mock_dimension = HashedBagProvider::default_dimension;
    std::string cache_dir = ".commscore-cache";
    RefinementConfig refinement;
    std::string out = "commscore-out";
    std::vector<std::string> formats{"json", "csv", "svg"};

    DuplicateConfig duplicate_config() const { return {window_s, duplicate_threshold}; }

    void validate() const {
        duplicate_config().validate();
        if (!(parasite_threshold > 0.0 && parasite_threshold <= 1.0))
            fail(ErrorKind::Argument, "parasite threshold must lie in (0, 1]");
        refinement.validate();
        if (mock_dimension == 0) fail(ErrorKind::Argument, "mock_dimension must be positive");
        if (formats.empty()) fail(ErrorKind::Argument, "at least one output format is required");
        for (const auto& f : formats)
            if (!known_formats().contains(f)) fail(ErrorKind::Argument, "unknown output format '" + f + "'");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Command-line values; unset fields leave lower layers untouched.
struct ConfigOverrides {
    std::optional<double> window_s;
    std::optional<double> duplicate_threshold;
    std::optional<double> parasite_threshold;
    std::optional<std::string> lexicon;
    std::optional<ProviderKind> provider;
    std::optional<std::string> endpoint;
    std::optional<std::size_t> mock_dimension;
    std::optional<std::string> cache_dir;
    std::optional<bool> refinement_enabled;
    std::optional<std::size_t> max_target_tokens;
    std::optional<double> context_window_s;
    std::optional<std::string> out;
    std::optional<std::vector<std::string>> formats;
};

inline nlohmann::json config_to_json(const RunConfig& c) {
    return {{"window_s", c.window_s},
            {"duplicate_threshold", c.duplicate_threshold},
            {"parasite_threshold", c.parasite_threshold},
            {"lexicon", c.lexicon},
            {"lexicon_phrasings", c.lexicon_phrasings},
            {"provider", to_string(c.provider)},
            {"endpoint", c.endpoint},
            {"mock_dimension", c.mock_dimension},
            {"cache_dir", c.cache_dir},
            {"refinement",
             {{"enabled", c.refinement.enabled},
              {"max_target_tokens", c.refinement.max_target_tokens},
              {"context_window_s", c.refinement.context_window_s},
              {"pooling", "mean"}}},
            {"out", c.out},
            {"formats", c.formats}};
}

namespace detail {

template <typename T>
T config_value(const nlohmann::json& j, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!j.is_number()) throw std::invalid_argument("");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw std::invalid_argument("");
        } else if constexpr (std::is_same_v<T, std::size_t>) {
            if (!j.is_number_unsigned()) throw std::invalid_argument("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!j.is_string()) throw std::invalid_argument("");
        }
        return j.get<T>();
    } catch (const std::exception&) {
        fail(ErrorKind::Validation, "config key '" + key + "' has the wrong type");
    }
}

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) fail(ErrorKind::Validation, "unknown config key '" + where + key + "'");
}

} // namespace detail

/// Applies a config-file object on top of `base`. Keys are schema-checked.
inline RunConfig apply_config_json(RunConfig base, const nlohmann::json& j) {
    using detail::config_value;
    if (!j.is_object()) fail(ErrorKind::Validation, "config file must contain a JSON object");
    detail::reject_unknown(j,
                           {"window_s", "duplicate_threshold", "parasite_threshold", "lexicon", "lexicon_phrasings",
                            "provider", "endpoint", "mock_dimension", "cache_dir", "refinement", "out", "formats"},
                           "");
    if (j.contains("window_s")) base.window_s = config_value<double>(j["window_s"], "window_s");
    if (j.contains("duplicate_threshold"))
        base.duplicate_threshold = config_value<double>(j["duplicate_threshold"], "duplicate_threshold");
    if (j.contains("parasite_threshold"))
        base.parasite_threshold = config_value<double>(j["parasite_threshold"], "parasite_threshold");
    if (j.contains("lexicon")) base.lexicon = config_value<std::string>(j["lexicon"], "lexicon");
    if (j.contains("provider"))
        base.provider = parse_provider_kind(config_value<std::string>(j["provider"], "provider"));
    if (j.contains("endpoint")) base.endpoint = config_value<std::string>(j["endpoint"], "endpoint");
    if (j.contains("mock_dimension"))
        base.mock_dimension = config_value<std::size_t>(j["mock_dimension"], "mock_dimension");
    if (j.contains("cache_dir")) base.cache_dir = config_value<std::string>(j["cache_dir"], "cache_dir");
    if (j.contains("out")) base.out = config_value<std::string>(j["out"], "out");
    if (j.contains("lexicon_phrasings")) {
        const auto& f = j["lexicon_phrasings"];
        if (!f.is_array()) fail(ErrorKind::Validation, "config key 'lexicon_phrasings' must be an array");
        base.lexicon_phrasings.clear();
        for (const auto& x : f) base.lexicon_phrasings.push_back(config_value<std::string>(x, "lexicon_phrasings[]"));
    }
    if (j.contains("formats")) {
        const auto& f = j["formats"];
        if (!f.is_array()) fail(ErrorKind::Validation, "config key 'formats' must be an array");
        base.formats.clear();
        for (const auto& x : f) base.formats.push_back(config_value<std::string>(x, "formats[]"));
    }
    if (j.contains("refinement")) {
        const auto& r = j["refinement"];
        if (!r.is_object()) fail(ErrorKind::Validation, "config key 'refinement' must be an object");
        detail::reject_unknown(r, {"enabled", "max_target_tokens", "context_window_s", "pooling"}, "refinement.");
        if (r.contains("enabled")) base.refinement.enabled = config_value<bool>(r["enabled"], "refinement.enabled");
        if (r.contains("max_target_tokens"))
            base.refinement.max_target_tokens =
                config_value<std::size_t>(r["max_target_tokens"], "refinement.max_target_tokens");
        if (r.contains("context_window_s"))
            base.refinement.context_window_s = config_value<double>(r["context_window_s"], "refinement.context_window_s");
        if (r.contains("pooling") && config_value<std::string>(r["pooling"], "refinement.pooling") != "mean")
            fail(ErrorKind::Validation, "refinement.pooling supports only \"mean\"");
    }
    return base;
}

inline nlohmann::json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Validation, "config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

/// defaults < config file < environment (endpoint only) < command line.
inline RunConfig resolve_config(const std::optional<nlohmann::json>& file, const std::optional<std::string>& env_endpoint,
                                const ConfigOverrides& o) {
    RunConfig c;
    if (file) c = apply_config_json(c, *file);
    if (env_endpoint && !env_endpoint->empty()) c.endpoint = *env_endpoint;
    if (o.window_s) c.window_s = *o.window_s;
    if (o.duplicate_threshold) c.duplicate_threshold = *o.duplicate_threshold;
    if (o.parasite_threshold) c.parasite_threshold = *o.parasite_threshold;
    if (o.lexicon) {
        c.lexicon = *o.lexicon;
        c.lexicon_phrasings.clear();
    }
    if (o.provider) c.provider = *o.provider;
    if (o.endpoint) c.endpoint = *o.endpoint;
    if (o.mock_dimension) c.mock_dimension = *o.mock_dimension;
    if (o.cache_dir) c.cache_dir = *o.cache_dir;
    if (o.refinement_enabled) c.refinement.enabled = *o.refinement_enabled;
    if (o.max_target_tokens) c.refinement.max_target_tokens = *o.max_target_tokens;
    if (o.context_window_s) c.refinement.context_window_s = *o.context_window_s;
    if (o.out) c.out = *o.out;
    if (o.formats) c.formats = *o.formats;
    c.validate();
    return c;
}

inline std::shared_ptr<const EmbeddingProvider> make_provider(const RunConfig& c) {
    switch (c.provider) {
    case ProviderKind::Mock: return std::make_shared<HashedBagProvider>(c.mock_dimension);
    case ProviderKind::Sidecar: return std::make_shared<SidecarProvider>(SidecarOptions{c.endpoint});
    case ProviderKind::CachedSidecar:
        return std::make_shared<CachingProvider>(std::make_shared<SidecarProvider>(SidecarOptions{c.endpoint}),
                                                 c.cache_dir);
    }
    fail(ErrorKind::Argument, "unknown provider");
}

inline ParasiteLexicon lexicon_for(const RunConfig& c) {
    if (!c.lexicon_phrasings.empty()) return ParasiteLexicon(c.lexicon_phrasings);
    if (c.lexicon.empty()) return default_lexicon();
    std::ifstream in(c.lexicon);
    if (!in) fail(ErrorKind::Io, "cannot open lexicon file " + c.lexicon);
    return load_lexicon(in);
}

inline Transcript load_transcript_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open transcript " + path.string());
    try {
        return parse_transcript(in);
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

inline std::vector<GroundTruthLabel> load_labels_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open labels " + path.string());
    try {
        return load_labels(in);
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

/// Duplicate scores and per-speaker parasite analysis. The metadata's config
/// snapshot inlines the lexicon, so feeding it back as a config file repeats
/// the run exactly.
inline AnalysisReport analyze(const Transcript& t, const RunConfig& c, const ParasiteLexicon& lex,
                              const EmbeddingProvider& p, std::string transcript_id) {
    c.validate();
    AnalysisReport r;
    r.metadata.transcript_id = std::move(transcript_id);
    r.metadata.provider = p.name();
    RunConfig snapshot = c;
    snapshot.lexicon.clear();
    snapshot.lexicon_phrasings = lex.phrasings();
    r.metadata.config = config_to_json(snapshot);
    r.duplicate_scores = score_transcript(t, c.duplicate_config(), p);
    r.duplicate_summary = duplicate_summary(r.duplicate_scores);
    for (const auto& speaker : t.speakers())
        r.parasite.push_back(analyze_parasites(t, speaker, lex, c.refinement, c.parasite_threshold, p));
    return r;
}

inline EvaluationResult evaluate_report(const Transcript& t, const AnalysisReport& r,
                                        std::span<const GroundTruthLabel> labels) {
    std::vector<ParasiteFlags> flags;
    for (const auto& p : r.parasite) flags.push_back(p.flags);
    return evaluate(t, predictions_from(r.duplicate_scores, flags), labels);
}

/// Documents for the requested formats: json -> report.json, csv -> tables,
/// svg -> score bars and one heatmap per speaker.
inline std::vector<Document> render_outputs(const AnalysisReport& r, const RunConfig& c) {
    std::vector<Document> docs;
    auto wants = [&](std::string_view f) { return std::find(c.formats.begin(), c.formats.end(), f) != c.formats.end(); };
    if (wants("json")) {
        auto d = emit_report(r, ReportFormat::Structured);
        docs.insert(docs.end(), d.begin(), d.end());
    }
    if (wants("csv")) {
        auto d = emit_report(r, ReportFormat::Tabular);
        docs.insert(docs.end(), d.begin(), d.end());
    }
    if (wants("svg")) {
        docs.push_back({"duplicate_scores.svg", emit_score_plot(r.duplicate_scores, c.duplicate_threshold)});
        for (const auto& p : r.parasite)
            if (p.matrix.cols() > 0)
                docs.push_back({heatmap_file_stem(p.matrix.speaker) + ".svg",
                                emit_heatmap_plot(p.matrix, c.parasite_threshold)});
    }
    return docs;
}

enum class ExitCode : int { Ok = 0, Usage = 2, Parse = 3, Provider = 4, Io = 5 };

inline ExitCode exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Validation: return ExitCode::Parse;
    case ErrorKind::Transport:
    case ErrorKind::Capability:
    case ErrorKind::Batch: return ExitCode::Provider;
    case ErrorKind::Io: return ExitCode::Io;
    case ErrorKind::NotFound:
    case ErrorKind::Invariant:
    case ErrorKind::Argument: return ExitCode::Usage;
    }
    return ExitCode::Usage;
}

} // namespace commscore
