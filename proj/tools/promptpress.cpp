// promptpress: distill -> annotate -> qc -> train -> score -> compress
// pipeline over line-delimited record files, plus a stats emitter.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "promptpress/annotator.hpp"
#include "promptpress/chunker.hpp"
#include "promptpress/compressor.hpp"
#include "promptpress/corpus.hpp"
#include "promptpress/distill.hpp"
#include "promptpress/errors.hpp"
#include "promptpress/http_transport.hpp"
#include "promptpress/mock_transport.hpp"
#include "promptpress/quality.hpp"
#include "promptpress/records.hpp"
#include "promptpress/scorer.hpp"

namespace pp = promptpress;

namespace {

pp::TokenCounter counter_by_name(const std::string& name) {
    if (name == "words") return {};
    throw pp::ConfigError("unknown token counter: " + name + " (expected \"words\")");
}

pp::FuzzyMode fuzzy_by_name(const std::string& name) {
    if (name == "exact") return pp::FuzzyMode::Exact;
    if (name == "normalized") return pp::FuzzyMode::Normalized;
    throw pp::ConfigError("unknown fuzzy mode: " + name + " (expected exact or normalized)");
}

/// Shortest round-trip formatting for CSV values; infinities spelled out.
std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return nlohmann::json(v).dump();
}

void add_config_option(CLI::App* cmd) {
    cmd->add_option("--config", "flat key=value config file; flags override config values");
}

// CLI11 only processes set_config() files on the root app, never on a
// parsed subcommand, so flat files are applied by hand: each key names a
// long option of the subcommand, options given on the command line win,
// and unknown keys are skipped so one file can serve every stage.
void apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pp::FileError("cannot open config file: " + path);

    auto trim = [](const std::string& s) {
        const char* ws = " \t\r";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(ws) - b + 1);
    };

    CLI::Option* config_opt = cmd->get_option_no_throw("--config");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#') continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos || trim(entry.substr(0, eq)).empty()) {
            throw pp::ConfigError(path + " line " + std::to_string(line_no) +
                                  ": expected key=value");
        }
        const std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || opt == config_opt) continue;
        if (!opt->empty()) continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw pp::ConfigError(path + ": cannot apply " + key + "=" + value + ": " +
                                  e.what());
        }
    }
}

// ── distill ────────────────────────────────────────────────────────────────

struct DistillArgs {
    std::string input, output;
    std::string endpoint, model = "gpt-4", mock;
    std::string counter = "words";
    std::size_t chunk_size = 512;
    std::size_t doc_token_limit = pp::kDocumentTokenLimit;
    std::size_t max_retries = 2;
    long backoff_ms = 100;
    double backoff_multiplier = 2.0;
    long timeout_ms = 30000;
    std::size_t parallelism = 1;
};

int run_distill(const DistillArgs& args) {
    if (args.endpoint.empty() == args.mock.empty()) {
        throw pp::ConfigError("distill needs exactly one of --endpoint or --mock");
    }
    std::unique_ptr<pp::Transport> transport;
    if (!args.mock.empty()) {
        transport = std::make_unique<pp::RuleTransport>(pp::mock_rule_by_name(args.mock));
    } else {
        const char* key = std::getenv("PROMPTPRESS_API_KEY");
        transport = std::make_unique<pp::HttpTransport>(
            args.endpoint, args.model, key ? key : "",
            std::chrono::milliseconds{args.timeout_ms});
    }

    pp::TransportPolicy policy;
    policy.max_retries = args.max_retries;
    policy.initial_backoff = std::chrono::milliseconds{args.backoff_ms};
    policy.backoff_multiplier = args.backoff_multiplier;
    policy.timeout = std::chrono::milliseconds{args.timeout_ms};
    policy.validate();

    pp::DistillOptions options;
    options.max_chunk_tokens = args.chunk_size;
    options.document_token_limit = args.doc_token_limit;
    options.parallelism = args.parallelism;
    options.counter = counter_by_name(args.counter);
    if (options.max_chunk_tokens < 1) throw pp::ConfigError("chunk size must be >= 1");
    if (options.parallelism < 1) throw pp::ConfigError("parallelism must be >= 1");

    const auto docs = pp::read_records<pp::DocRecord>(args.input);
    std::vector<pp::PairRecord> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) {
        pp::PairRecord rec;
        rec.pair = pp::distill_document(doc, *transport, policy, options);
        out.push_back(std::move(rec));
    }
    pp::write_records(out, args.output);
    return 0;
}

// ── annotate ───────────────────────────────────────────────────────────────

struct AnnotateArgs {
    std::string input, output;
    std::size_t window = 20;
    std::string fuzzy = "normalized";
};

int run_annotate(const AnnotateArgs& args) {
    pp::AnnotationParams params;
    params.window_size = args.window;
    params.fuzzy = fuzzy_by_name(args.fuzzy);
    params.validate();

    const auto pairs = pp::read_records<pp::PairRecord>(args.input);
    std::vector<pp::AnnotationRecord> out;
    out.reserve(pairs.size());
    for (const auto& rec : pairs) {
        pp::AnnotatedExample example =
            pp::annotate(rec.pair.original, rec.pair.compressed, params, rec.pair.doc_id);
        pp::AnnotationRecord a;
        a.doc_id = example.doc_id;
        a.words = example.original_words.words;
        a.labels = example.labels;
        out.push_back(std::move(a));
    }
    pp::write_records(out, args.output);
    return 0;
}

// ── qc ─────────────────────────────────────────────────────────────────────

struct QcArgs {
    std::string pairs, annotations, output, filtered_output;
    double vr_drop = 0.05;
    double ag_drop = 0.10;
    std::string fuzzy = "normalized";
};

int run_qc(const QcArgs& args) {
    const pp::FuzzyMode mode = fuzzy_by_name(args.fuzzy);
    pp::FilterOptions options;
    options.vr_drop = args.vr_drop;
    options.ag_drop = args.ag_drop;
    options.validate();

    const auto pairs = pp::read_records<pp::PairRecord>(args.pairs);
    const auto annotations = pp::read_records<pp::AnnotationRecord>(args.annotations);
    std::unordered_map<std::string, const pp::AnnotationRecord*> by_id;
    for (const auto& a : annotations) by_id[a.doc_id] = &a;

    std::vector<pp::QualityReport> reports;
    reports.reserve(pairs.size());
    for (const auto& rec : pairs) {
        auto it = by_id.find(rec.pair.doc_id);
        if (it == by_id.end()) {
            throw pp::SchemaError("no annotation record for doc_id " + rec.pair.doc_id);
        }
        pp::AnnotatedExample example;
        example.doc_id = it->second->doc_id;
        example.original_words.words = it->second->words;
        example.labels = it->second->labels;
        reports.push_back(pp::evaluate_quality(rec.pair, example, mode));
    }

    const std::vector<std::string> kept_ids = pp::filter_dataset(reports, options);
    const std::unordered_set<std::string> kept(kept_ids.begin(), kept_ids.end());

    std::vector<pp::QualityRecord> out;
    out.reserve(reports.size());
    for (const auto& r : reports) {
        pp::QualityRecord q;
        q.doc_id = r.doc_id;
        q.vr = r.vr;
        q.mr = r.mr;
        q.hr = r.hr;
        q.ag = r.ag;
        q.kept = kept.count(r.doc_id) > 0;
        out.push_back(std::move(q));
    }
    pp::write_records(out, args.output);

    if (!args.filtered_output.empty()) {
        std::vector<pp::AnnotationRecord> survivors;
        for (const auto& a : annotations) {
            if (kept.count(a.doc_id) > 0) survivors.push_back(a);
        }
        pp::write_records(survivors, args.filtered_output);
    }
    return 0;
}

// ── train ──────────────────────────────────────────────────────────────────

struct TrainArgs {
    std::string input, output;
    std::int64_t epochs = 200;
    double lr = 0.1;
    std::int64_t batch = 10;
    std::uint64_t seed = 0;
};

int run_train(const TrainArgs& args) {
    const auto annotations = pp::read_records<pp::AnnotationRecord>(args.input);
    std::vector<pp::AnnotatedExample> dataset;
    dataset.reserve(annotations.size());
    pp::CorpusFrequencyTable freq;
    for (const auto& a : annotations) {
        pp::AnnotatedExample example;
        example.doc_id = a.doc_id;
        example.original_words.words = a.words;
        example.labels = a.labels;
        freq.add(example.original_words);
        dataset.push_back(std::move(example));
    }

    pp::TrainOptions options;
    options.epochs = args.epochs;
    options.learning_rate = args.lr;
    options.batch_size = args.batch;
    options.seed = args.seed;

    const pp::LinearScorerModel model = pp::train(dataset, freq, options);
    pp::save_model(model, freq, args.output);
    return 0;
}

// ── score ──────────────────────────────────────────────────────────────────

struct ScoreArgs {
    std::string input, output, model, external;
};

int run_score(const ScoreArgs& args) {
    if (args.model.empty() == args.external.empty()) {
        throw pp::ConfigError("score needs exactly one of --model or --external");
    }
    const auto docs = pp::read_records<pp::DocRecord>(args.input);
    std::vector<pp::ScoreRecord> out;
    out.reserve(docs.size());

    if (!args.model.empty()) {
        const auto [model, freq] = pp::load_model(args.model);
        for (const auto& doc : docs) {
            const pp::WordSequence words = pp::split_words(doc.text);
            pp::ScoredWords scored = pp::score_document(model, words, freq, doc.doc_id);
            pp::ScoreRecord rec;
            rec.doc_id = scored.doc_id;
            rec.probs = std::move(scored.probs);
            out.push_back(std::move(rec));
        }
    } else {
        const auto external = pp::read_records<pp::ScoreRecord>(args.external);
        std::unordered_map<std::string, const pp::ScoreRecord*> by_id;
        for (const auto& r : external) by_id[r.doc_id] = &r;
        for (const auto& doc : docs) {
            auto it = by_id.find(doc.doc_id);
            if (it == by_id.end()) {
                throw pp::SchemaError("no external score record for doc_id " + doc.doc_id);
            }
            const std::size_t n = pp::split_words(doc.text).size();
            pp::ScoredWords scored = pp::load_external_scores(*it->second, n);
            pp::ScoreRecord rec;
            rec.doc_id = scored.doc_id;
            rec.probs = std::move(scored.probs);
            out.push_back(std::move(rec));
        }
    }
    pp::write_records(out, args.output);
    return 0;
}

// ── compress ───────────────────────────────────────────────────────────────

struct CompressArgs {
    std::string docs, scores, output;
    double rate = 0.0;
    std::int64_t target_tokens = 0;
    bool dynamic = false;
    bool have_rate = false, have_target = false;
};

int run_compress(const CompressArgs& args) {
    if (args.dynamic) {
        if (!args.have_rate) throw pp::ConfigError("--dynamic requires --rate");
        if (args.have_target) {
            throw pp::ConfigError("--dynamic cannot be combined with --target-tokens");
        }
    } else if (args.have_rate == args.have_target) {
        throw pp::ConfigError("compress needs exactly one of --rate or --target-tokens");
    }
    if (args.have_rate && (!(args.rate > 0.0) || args.rate > 1.0)) {
        throw pp::ConfigError("compress: rate must be in (0, 1]");
    }
    if (args.have_target && args.target_tokens < 1) {
        throw pp::ConfigError("compress: target token count must be >= 1");
    }

    const auto docs = pp::read_records<pp::DocRecord>(args.docs);
    const auto scores = pp::read_records<pp::ScoreRecord>(args.scores);
    std::unordered_map<std::string, const pp::ScoreRecord*> by_id;
    for (const auto& r : scores) by_id[r.doc_id] = &r;

    struct Entry {
        const pp::DocRecord* doc;
        pp::WordSequence words;
        const pp::ScoreRecord* score;
    };
    std::vector<Entry> entries;
    entries.reserve(docs.size());
    for (const auto& doc : docs) {
        auto it = by_id.find(doc.doc_id);
        if (it == by_id.end()) {
            throw pp::SchemaError("no score record for doc_id " + doc.doc_id);
        }
        pp::WordSequence words = pp::split_words(doc.text);
        if (words.size() != it->second->probs.size()) {
            throw pp::SchemaError("doc_id " + doc.doc_id + " has " +
                                  std::to_string(words.size()) + " words but " +
                                  std::to_string(it->second->probs.size()) + " probabilities");
        }
        entries.push_back(Entry{&doc, std::move(words), it->second});
    }

    double threshold = 0.0;
    if (args.dynamic) {
        std::vector<pp::ScoredWords> corpus;
        corpus.reserve(entries.size());
        for (const auto& e : entries) corpus.push_back({e.doc->doc_id, e.score->probs});
        threshold = pp::dynamic_threshold(corpus, args.rate);
    }

    std::vector<pp::ResultRecord> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        pp::CompressionResult result;
        if (args.dynamic) {
            result = pp::compress_with_threshold(e.words, e.score->probs, threshold,
                                                 e.doc->doc_id);
        } else if (args.have_rate) {
            result = pp::compress_fixed(e.words, e.score->probs, args.rate, e.doc->doc_id);
        } else {
            result = pp::compress_target_tokens(
                e.words, e.score->probs, static_cast<std::size_t>(args.target_tokens),
                e.doc->doc_id);
        }
        pp::ResultRecord rec;
        rec.doc_id = result.doc_id;
        rec.kept_indices = std::move(result.kept_indices);
        rec.compressed = std::move(result.compressed_text);
        rec.achieved_ratio = result.achieved_ratio;
        out.push_back(std::move(rec));
    }
    pp::write_records(out, args.output);
    return 0;
}

// ── stats ──────────────────────────────────────────────────────────────────

struct StatsArgs {
    std::string pairs, reports, results, output;
    std::string counter = "words";
};

int run_stats(const StatsArgs& args) {
    std::ofstream csv(args.output, std::ios::binary);
    if (!csv) throw pp::FileError("cannot open output file: " + args.output);
    csv << "stage,metric,value\n";

    if (!args.pairs.empty()) {
        const auto recs = pp::read_records<pp::PairRecord>(args.pairs);
        std::vector<pp::DistilledPair> pairs;
        pairs.reserve(recs.size());
        for (const auto& r : recs) pairs.push_back(r.pair);
        const pp::DatasetStats s = pp::dataset_stats(pairs, counter_by_name(args.counter));
        csv << "distill,documents," << s.documents << '\n';
        csv << "distill,chunks," << s.chunks << '\n';
        csv << "distill,avg_sentences_per_document," << format_value(s.avg_sentences_per_document)
            << '\n';
        csv << "distill,avg_original_tokens," << format_value(s.avg_original_tokens) << '\n';
        csv << "distill,avg_compressed_tokens," << format_value(s.avg_compressed_tokens) << '\n';
        csv << "distill,inverse_tau," << format_value(s.aggregate_inverse_tau) << '\n';
    }

    if (!args.reports.empty()) {
        const auto reports = pp::read_records<pp::QualityRecord>(args.reports);
        if (reports.empty()) throw pp::SchemaError("quality report file has no records");
        std::size_t kept = 0;
        double vr_sum = 0, mr_sum = 0, hr_sum = 0, ag_sum = 0;
        // vr bins cover [0,1] in steps of 0.1; ag bins cover [-1,1] in
        // steps of 0.2. Out-of-range values land in the edge bins.
        std::array<std::size_t, 10> vr_hist{}, ag_hist{};
        for (const auto& r : reports) {
            kept += r.kept ? 1 : 0;
            vr_sum += r.vr;
            mr_sum += r.mr;
            hr_sum += r.hr;
            ag_sum += r.ag;
            const auto vr_bin = static_cast<std::size_t>(
                std::clamp(static_cast<int>(r.vr * 10.0), 0, 9));
            const auto ag_bin = static_cast<std::size_t>(
                std::clamp(static_cast<int>((r.ag + 1.0) * 5.0), 0, 9));
            ++vr_hist[vr_bin];
            ++ag_hist[ag_bin];
        }
        const double n = static_cast<double>(reports.size());
        csv << "qc,reports," << reports.size() << '\n';
        csv << "qc,kept," << kept << '\n';
        csv << "qc,dropped," << reports.size() - kept << '\n';
        csv << "qc,vr_mean," << format_value(vr_sum / n) << '\n';
        csv << "qc,mr_mean," << format_value(mr_sum / n) << '\n';
        csv << "qc,hr_mean," << format_value(hr_sum / n) << '\n';
        csv << "qc,ag_mean," << format_value(ag_sum / n) << '\n';
        for (std::size_t b = 0; b < vr_hist.size(); ++b) {
            csv << "qc,vr_hist_bin_" << b << ',' << vr_hist[b] << '\n';
        }
        for (std::size_t b = 0; b < ag_hist.size(); ++b) {
            csv << "qc,ag_hist_bin_" << b << ',' << ag_hist[b] << '\n';
        }
    }

    if (!args.results.empty()) {
        const auto results = pp::read_records<pp::ResultRecord>(args.results);
        if (results.empty()) throw pp::SchemaError("result file has no records");
        std::size_t total_kept = 0, empty_docs = 0, finite = 0;
        double ratio_sum = 0.0;
        for (const auto& r : results) {
            total_kept += r.kept_indices.size();
            if (r.kept_indices.empty()) ++empty_docs;
            if (std::isfinite(r.achieved_ratio)) {
                ratio_sum += r.achieved_ratio;
                ++finite;
            }
        }
        csv << "compress,documents," << results.size() << '\n';
        csv << "compress,total_kept_words," << total_kept << '\n';
        csv << "compress,empty_documents," << empty_docs << '\n';
        csv << "compress,mean_achieved_ratio,"
            << format_value(finite > 0 ? ratio_sum / static_cast<double>(finite)
                                       : std::numeric_limits<double>::infinity())
            << '\n';
    }

    if (!csv) throw pp::FileError("failed while writing: " + args.output);
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"prompt compression pipeline: distill, annotate, qc, train, score, compress, "
                 "stats"};
    app.require_subcommand(1);

    DistillArgs distill;
    auto* cmd_distill = app.add_subcommand(
        "distill", "compress documents chunk-wise through a chat endpoint or a mock rule");
    add_config_option(cmd_distill);
    cmd_distill->add_option("-i,--input", distill.input, "document records (doc_id, text)")
        ->required();
    cmd_distill->add_option("-o,--output", distill.output, "pair records to write")->required();
    cmd_distill->add_option("--endpoint", distill.endpoint,
                            "chat endpoint base URL (API key from PROMPTPRESS_API_KEY)");
    cmd_distill->add_option("--model", distill.model, "model name sent on the wire");
    cmd_distill->add_option("--mock", distill.mock,
                            "offline rule: identity, drop-stopwords (drops stopwords and words "
                            "under 3 characters) or alternate (keeps every second word)");
    cmd_distill->add_option("--chunk-size", distill.chunk_size, "token budget per chunk");
    cmd_distill->add_option("--counter", distill.counter, "token counter (words)");
    cmd_distill->add_option("--doc-token-limit", distill.doc_token_limit,
                            "truncate documents beyond this many tokens");
    cmd_distill->add_option("--max-retries", distill.max_retries, "retries per chunk");
    cmd_distill->add_option("--backoff-ms", distill.backoff_ms, "initial retry backoff");
    cmd_distill->add_option("--backoff-multiplier", distill.backoff_multiplier,
                            "backoff growth per retry");
    cmd_distill->add_option("--timeout-ms", distill.timeout_ms, "per-request timeout");
    cmd_distill->add_option("--parallelism", distill.parallelism,
                            "concurrent chunk requests per document");

    AnnotateArgs annotate;
    auto* cmd_annotate =
        app.add_subcommand("annotate", "align compressed words to original words, label each "
                                       "original word preserve/discard");
    add_config_option(cmd_annotate);
    cmd_annotate->add_option("-i,--input", annotate.input, "pair records")->required();
    cmd_annotate->add_option("-o,--output", annotate.output, "annotation records to write")
        ->required();
    cmd_annotate->add_option("--window", annotate.window, "sliding window size (even, >= 2)");
    cmd_annotate->add_option("--fuzzy", annotate.fuzzy, "word matching: exact or normalized");

    QcArgs qc;
    auto* cmd_qc = app.add_subcommand(
        "qc", "score annotation quality (vr/mr/hr/ag) and drop the worst examples");
    add_config_option(cmd_qc);
    cmd_qc->add_option("--pairs", qc.pairs, "pair records")->required();
    cmd_qc->add_option("--annotations", qc.annotations, "annotation records")->required();
    cmd_qc->add_option("-o,--output", qc.output, "quality report records to write")->required();
    cmd_qc->add_option("--filtered-output", qc.filtered_output,
                       "also write the surviving annotation records here");
    cmd_qc->add_option("--vr-drop", qc.vr_drop, "fraction of highest-vr examples to drop");
    cmd_qc->add_option("--ag-drop", qc.ag_drop, "fraction of highest-ag examples to drop");
    cmd_qc->add_option("--fuzzy", qc.fuzzy, "word matching: exact or normalized");

    TrainArgs train;
    auto* cmd_train =
        app.add_subcommand("train", "fit the linear word scorer on annotation records");
    add_config_option(cmd_train);
    cmd_train->add_option("-i,--input", train.input, "annotation records")->required();
    cmd_train->add_option("-o,--output", train.output, "model file to write")->required();
    cmd_train->add_option("--epochs", train.epochs, "training epochs");
    cmd_train->add_option("--lr", train.lr, "learning rate");
    cmd_train->add_option("--batch", train.batch, "examples per minibatch");
    cmd_train->add_option("--seed", train.seed, "shuffle seed");

    ScoreArgs score;
    auto* cmd_score =
        app.add_subcommand("score", "per-word preserve probabilities for documents");
    add_config_option(cmd_score);
    cmd_score->add_option("-i,--input", score.input, "document records")->required();
    cmd_score->add_option("-o,--output", score.output, "score records to write")->required();
    cmd_score->add_option("--model", score.model, "trained model file");
    cmd_score->add_option("--external", score.external,
                          "score records computed elsewhere (optional subword_map)");

    CompressArgs compress;
    auto* cmd_compress = app.add_subcommand(
        "compress", "keep the highest-probability words per document or corpus-wide");
    add_config_option(cmd_compress);
    cmd_compress->add_option("--docs", compress.docs, "document records")->required();
    cmd_compress->add_option("--scores", compress.scores, "score records")->required();
    cmd_compress->add_option("-o,--output", compress.output, "result records to write")
        ->required();
    auto* rate_opt =
        cmd_compress->add_option("--rate", compress.rate, "retained fraction in (0,1]");
    auto* target_opt = cmd_compress->add_option("--target-tokens", compress.target_tokens,
                                                "retained word budget per document");
    cmd_compress->add_flag("--dynamic", compress.dynamic,
                           "corpus-level threshold at --rate instead of per-document count");

    StatsArgs stats;
    auto* cmd_stats =
        app.add_subcommand("stats", "per-stage aggregates as stage,metric,value CSV");
    add_config_option(cmd_stats);
    cmd_stats->add_option("--pairs", stats.pairs, "pair records");
    cmd_stats->add_option("--reports", stats.reports, "quality report records");
    cmd_stats->add_option("--results", stats.results, "compression result records");
    cmd_stats->add_option("-o,--output", stats.output, "CSV file to write")->required();
    cmd_stats->add_option("--counter", stats.counter, "token counter (words)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // prints help for --help (exit 0); bad flags map to the config
        // violation exit code
        return app.exit(e) == 0 ? 0 : 4;
    }

    for (CLI::App* sub : app.get_subcommands()) {
        if (CLI::Option* cfg = sub->get_option_no_throw("--config");
            cfg != nullptr && cfg->count() > 0) {
            apply_config(sub, cfg->as<std::string>());
        }
    }

    if (cmd_distill->parsed()) return run_distill(distill);
    if (cmd_annotate->parsed()) return run_annotate(annotate);
    if (cmd_qc->parsed()) return run_qc(qc);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_score->parsed()) return run_score(score);
    if (cmd_compress->parsed()) {
        compress.have_rate = rate_opt->count() > 0;
        compress.have_target = target_opt->count() > 0;
        return run_compress(compress);
    }
    if (cmd_stats->parsed()) {
        if (stats.pairs.empty() && stats.reports.empty() && stats.results.empty()) {
            throw pp::ConfigError("stats needs at least one of --pairs, --reports, --results");
        }
        return run_stats(stats);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const pp::FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const pp::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const pp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const pp::TransportError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
