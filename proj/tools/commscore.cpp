// commscore: score team voice transcripts for duplicate and parasite
// communications.
//
//   commscore analyze game.log --provider mock
//   commscore evaluate game.log labels.csv
//   commscore heatmap game.log --speaker SPEAKER_00 --no-refinement
//   commscore print-config --config run.json

#include "commscore/app.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using namespace commscore;

struct CliFlags {
    std::string config_path;
    double window_s = 0, duplicate_threshold = 0, parasite_threshold = 0, threshold = 0, context_window_s = 0;
    std::string lexicon, provider, endpoint, cache_dir, out;
    std::size_t mock_dimension = 0, max_target_tokens = 0;
    bool no_refinement = false, refinement = false;
    std::vector<std::string> formats;

    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_run_options(CLI::App* cmd, CliFlags& f) {
    f.opts["config"] = cmd->add_option("--config", f.config_path, "JSON run configuration file");
    f.opts["window"] = cmd->add_option("--window", f.window_s, "Duplicate look-back window in seconds (default 15)");
    f.opts["duplicate-threshold"] =
        cmd->add_option("--duplicate-threshold", f.duplicate_threshold, "Duplicate flag threshold (default 0.6)");
    f.opts["parasite-threshold"] =
        cmd->add_option("--parasite-threshold", f.parasite_threshold, "Parasite flag threshold (default 0.6)");
    f.opts["threshold"] = cmd->add_option("--threshold", f.threshold, "Set both thresholds");
    f.opts["lexicon"] = cmd->add_option("--lexicon", f.lexicon, "Parasite phrasing file, one per line");
    f.opts["provider"] = cmd->add_option("--provider", f.provider, "Embedding provider")
                             ->check(CLI::IsMember({"mock", "sidecar", "cached-sidecar"}));
    f.opts["endpoint"] = cmd->add_option("--endpoint", f.endpoint,
                                         std::string("Sidecar URL (env ") + endpoint_env_var + ")");
    f.opts["mock-dimension"] = cmd->add_option("--mock-dimension", f.mock_dimension, "Mock embedding dimension");
    f.opts["cache-dir"] = cmd->add_option("--cache-dir", f.cache_dir, "Embedding cache directory (cached-sidecar)");
    auto* no_ref = cmd->add_flag("--no-refinement", f.no_refinement, "Disable contextual refinement of short utterances");
    f.opts["no-refinement"] = no_ref;
    f.opts["refinement"] =
        cmd->add_flag("--refinement", f.refinement, "Enable contextual refinement")->excludes(no_ref);
    f.opts["max-target-tokens"] =
        cmd->add_option("--max-target-tokens", f.max_target_tokens, "Refine utterances with at most this many tokens");
    f.opts["context-window"] =
        cmd->add_option("--context-window", f.context_window_s, "Refinement context window in seconds");
    f.opts["out"] = cmd->add_option("--out", f.out, "Output directory");
    f.opts["format"] = cmd->add_option("--format", f.formats, "Output formats: json, csv, svg")
                           ->delimiter(',')
                           ->check(CLI::IsMember({"json", "csv", "svg"}));
}

RunConfig resolve(const CliFlags& f) {
    ConfigOverrides o;
    if (f.given("threshold")) o.duplicate_threshold = o.parasite_threshold = f.threshold;
    if (f.given("window")) o.window_s = f.window_s;
    if (f.given("duplicate-threshold")) o.duplicate_threshold = f.duplicate_threshold;
    if (f.given("parasite-threshold")) o.parasite_threshold = f.parasite_threshold;
    if (f.given("lexicon")) o.lexicon = f.lexicon;
    if (f.given("provider")) o.provider = parse_provider_kind(f.provider);
    if (f.given("endpoint")) o.endpoint = f.endpoint;
    if (f.given("mock-dimension")) o.mock_dimension = f.mock_dimension;
    if (f.given("cache-dir")) o.cache_dir = f.cache_dir;
    if (f.given("no-refinement")) o.refinement_enabled = false;
    if (f.given("refinement")) o.refinement_enabled = true;
    if (f.given("max-target-tokens")) o.max_target_tokens = f.max_target_tokens;
    if (f.given("context-window")) o.context_window_s = f.context_window_s;
    if (f.given("out")) o.out = f.out;
    if (f.given("format")) o.formats = f.formats;

    std::optional<nlohmann::json> file;
    if (f.given("config")) file = load_config_file(f.config_path);
    std::optional<std::string> env;
    if (const char* e = std::getenv(endpoint_env_var)) env = e;
    return resolve_config(file, env, o);
}

std::string transcript_id(const std::filesystem::path& p) { return p.filename().string(); }

void print_written(const std::vector<std::filesystem::path>& files) {
    for (const auto& p : files) std::cout << "wrote " << p.string() << "\n";
}

int cmd_analyze(const std::string& path, const CliFlags& flags) {
    auto cfg = resolve(flags);
    auto t = load_transcript_file(path);
    auto lex = lexicon_for(cfg);
    auto provider = make_provider(cfg);
    auto report = analyze(t, cfg, lex, *provider, transcript_id(path));
    print_written(write_documents(cfg.out, render_outputs(report, cfg)));
    for (const auto& [speaker, agg] : report.duplicate_summary)
        std::cout << fmt::format("{:<14} utterances {:>4}  duplicates {:>3} ({:5.1f}%)\n", speaker, agg.count,
                                 agg.flagged_count, 100.0 * agg.flagged_ratio);
    for (const auto& p : report.parasite)
        std::cout << fmt::format("{:<14} parasite ratio {:5.1f}%\n", p.summary.speaker, 100.0 * p.summary.parasite_ratio);
    return 0;
}

int cmd_evaluate(const std::string& path, const std::string& labels_path, const CliFlags& flags) {
    auto cfg = resolve(flags);
    auto t = load_transcript_file(path);
    auto labels = load_labels_file(labels_path);
    auto lex = lexicon_for(cfg);
    auto provider = make_provider(cfg);
    auto report = analyze(t, cfg, lex, *provider, transcript_id(path));
    report.evaluation = evaluate_report(t, report, labels);

    auto j = to_json(report)["evaluation"];
    std::vector<Document> docs{{"metrics.json", j.dump(2) + "\n"}};
    print_written(write_documents(cfg.out, docs));
    std::cout << fmt::format("{:<11} {:>5} {:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>9}\n", "task", "tp", "fp", "tn", "fn",
                             "accuracy", "precision", "recall", "f1");
    for (const auto* m : {&report.evaluation->duplicates, &report.evaluation->parasite})
        std::cout << fmt::format("{:<11} {:>5} {:>5} {:>5} {:>5} {:>8.2f}% {:>8.2f}% {:>8.2f}% {:>8.2f}%\n",
                                 to_string(m->task), m->tp, m->fp, m->tn, m->fn, 100 * m->accuracy,
                                 100 * m->precision, 100 * m->recall, 100 * m->f1);
    return 0;
}

int cmd_heatmap(const std::string& path, const std::string& speaker, const CliFlags& flags) {
    auto cfg = resolve(flags);
    auto t = load_transcript_file(path);
    auto lex = lexicon_for(cfg);
    auto provider = make_provider(cfg);
    auto result = analyze_parasites(t, speaker, lex, cfg.refinement, cfg.parasite_threshold, *provider);
    const auto stem = heatmap_file_stem(speaker);
    std::vector<Document> docs{{stem + ".svg", emit_heatmap_plot(result.matrix, cfg.parasite_threshold)},
                               {stem + ".csv", heatmap_csv(result.matrix)}};
    print_written(write_documents(cfg.out, docs));
    std::cout << fmt::format("{}: {} x {} matrix, {} refined, {} flagged ({:.1f}%)\n", speaker, result.matrix.rows(),
                             result.matrix.cols(), result.matrix.refined_columns.size(), result.flags.flagged_count(),
                             100.0 * result.summary.parasite_ratio);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Score team voice-communication transcripts for duplicate and parasite calls"};
    app.require_subcommand(1);

    CliFlags analyze_flags, evaluate_flags, heatmap_flags, print_flags;
    std::string transcript, labels, speaker;

    auto* analyze_cmd = app.add_subcommand("analyze", "Score every utterance and write the report");
    analyze_cmd->add_option("transcript", transcript, "Transcript log file")->required();
    add_run_options(analyze_cmd, analyze_flags);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare flags with human labels");
    evaluate_cmd->add_option("transcript", transcript, "Transcript log file")->required();
    evaluate_cmd->add_option("labels", labels, "Label CSV file")->required();
    add_run_options(evaluate_cmd, evaluate_flags);

    auto* heatmap_cmd = app.add_subcommand("heatmap", "Render one speaker's interference heatmap");
    heatmap_cmd->add_option("transcript", transcript, "Transcript log file")->required();
    heatmap_cmd->add_option("--speaker", speaker, "Speaker label")->required();
    add_run_options(heatmap_cmd, heatmap_flags);

    auto* print_cmd = app.add_subcommand("print-config", "Print the resolved run configuration");
    add_run_options(print_cmd, print_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Usage);
    }

    try {
        if (*analyze_cmd) return cmd_analyze(transcript, analyze_flags);
        if (*evaluate_cmd) return cmd_evaluate(transcript, labels, evaluate_flags);
        if (*heatmap_cmd) return cmd_heatmap(transcript, speaker, heatmap_flags);
        if (*print_cmd) {
            std::cout << config_to_json(resolve(print_flags)).dump(2) << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "commscore: " << e.what() << "\n";
        return static_cast<int>(exit_code_for(e.kind()));
    } catch (const std::exception& e) {
        std::cerr << "commscore: " << e.what() << "\n";
        return static_cast<int>(ExitCode::Io);
    }
    return static_cast<int>(ExitCode::Usage);
}
