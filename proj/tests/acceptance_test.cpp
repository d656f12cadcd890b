// Acceptance suite: one numbered check per shipping criterion, each printed
// as a PASS/FAIL line with its measured figure. Exits nonzero if any fail.
// Oracles here are written independently of the library implementation.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "promptpress/annotator.hpp"
#include "promptpress/chunker.hpp"
#include "promptpress/compressor.hpp"
#include "promptpress/corpus.hpp"
#include "promptpress/distill.hpp"
#include "promptpress/quality.hpp"
#include "promptpress/records.hpp"
#include "promptpress/scorer.hpp"
#include "promptpress/stopwords.hpp"

#include "support/corpus_gen.hpp"
#include "support/temp_dir.hpp"
#include "support/test_rng.hpp"

namespace pp = promptpress;

namespace {

struct Criterion {
    bool ok = true;
    std::string detail;

    void expect(bool condition, const std::string& why) {
        if (!condition && ok) {
            ok = false;
            detail = why;
        }
    }
    void note(const std::string& info) {
        if (ok) detail = info;
    }
};

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string fmt(double value) {
    std::ostringstream out;
    if (value != 0.0 && std::abs(value) < 1e-3) {
        out.setf(std::ios::scientific);
        out.precision(2);
    } else {
        out.precision(4);
    }
    out << value;
    return out.str();
}

// ── Criterion 1: alignment on the meeting-minutes example ──────────────────

const std::string kMinutesOriginal =
    "Item 15, report from City Manager Recommendation to adopt three resolutions. "
    "First, to join the Victory Pace program. Second, to join the California first "
    "program. And number three, consenting to to inclusion of certain properties "
    "within the jurisdiction in the California Hero program.";

const std::string kMinutesCompressed =
    "City Manager Recommendation adopt three resolutions. Join California first "
    "program. Consent properties inclusion jurisdiction California Hero program.";

void criterion_1(Criterion& c) {
    const auto example = pp::annotate(kMinutesOriginal, kMinutesCompressed);
    const auto original = pp::split_words(kMinutesOriginal);

    // every compressed-side word finds a counterpart: 17 distinct sources
    std::vector<std::size_t> sources;
    for (std::size_t i = 0; i < example.labels.size(); ++i) {
        if (example.labels[i]) sources.push_back(i + 1);
    }
    c.expect(sources.size() == pp::split_words(kMinutesCompressed).size(),
             "expected one preserved word per compressed word, got " +
                 std::to_string(sources.size()));
    const std::vector<std::size_t> expected_positions = {5,  6,  7,  9,  10, 11, 14, 23, 24,
                                                         25, 29, 32, 35, 38, 41, 42, 43};
    c.expect(sources == expected_positions, "preserved positions differ from the known answer");

    auto label_of = [&](const std::string& word) {
        for (std::size_t i = 0; i < original.size(); ++i) {
            if (original.words[i] == word) return example.labels[i];
        }
        return false;
    };
    c.expect(label_of("consenting"), "fuzzy pair Consent/consenting was not matched");
    c.expect(!label_of("Item"), "\"Item\" should be discarded");
    c.expect(!label_of("report"), "\"report\" should be discarded");
    c.expect(!label_of("from"), "\"from\" should be discarded");

    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 100; ++i) {
        volatile auto n = pp::annotate(kMinutesOriginal, kMinutesCompressed).labels.size();
        (void)n;
    }
    const double per_call_ms = ms_since(start) / 100.0;
    c.expect(per_call_ms < 1.0,
             "annotation took " + fmt(per_call_ms) + " ms per call");
    c.note("17/17 matches, " + fmt(per_call_ms) + " ms per call");
}

// ── Criterion 2: metric equations vs a brute-force evaluator ───────────────

// Independent re-derivation of the word key and the four rates: lowercase,
// strip surrounding punctuation, one suffix rule with undoubling; set
// membership by linear scan.
std::string brute_key(const std::string& word) {
    std::size_t b = 0, e = word.size();
    auto is_punct = [](char ch) {
        return static_cast<unsigned char>(ch) < 128 &&
               std::ispunct(static_cast<unsigned char>(ch));
    };
    while (b < e && is_punct(word[b])) ++b;
    while (e > b && is_punct(word[e - 1])) --e;
    std::string k;
    for (std::size_t i = b; i < e; ++i) {
        k += static_cast<char>(std::tolower(static_cast<unsigned char>(word[i])));
    }
    auto tail = [&](const char* s) {
        const std::string suf(s);
        return k.size() >= suf.size() &&
               k.compare(k.size() - suf.size(), suf.size(), suf) == 0;
    };
    auto undouble = [&] {
        const std::string vowels = "aeiou";
        if (k.size() >= 2 && k[k.size() - 1] == k[k.size() - 2] &&
            std::isalpha(static_cast<unsigned char>(k.back())) &&
            vowels.find(k.back()) == std::string::npos && k.back() != 'l' &&
            k.back() != 's' && k.back() != 'z') {
            k.resize(k.size() - 1);
        }
    };
    if (tail("ies")) {
        k = k.substr(0, k.size() - 3) + "y";
    } else if (tail("es") && k.size() > 2) {
        k.resize(k.size() - 2);
    } else if (tail("s") && k.size() > 3) {
        k.resize(k.size() - 1);
    } else if (tail("ed") && k.size() > 2) {
        k.resize(k.size() - 2);
        undouble();
    } else if (tail("ing") && k.size() >= 6) {
        k.resize(k.size() - 3);
        undouble();
    }
    return k;
}

std::vector<std::string> brute_words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

bool brute_in(const std::vector<std::string>& haystack, const std::string& key) {
    for (const auto& w : haystack) {
        if (brute_key(w) == key) return true;
    }
    return false;
}

void criterion_2(Criterion& c) {
    const std::string text = "Council adopted the 2024 budget after running three reviews.";
    pp::DistilledPair identity{"id", text, text, {0, text.size()}};
    const auto report = pp::evaluate_quality(identity, pp::annotate(text, text));
    c.expect(report.ag == 0.0, "identity pair alignment gap is not exactly 0");
    c.expect(report.vr == 0.0 && report.mr == 1.0 && report.hr == 1.0,
             "identity pair metrics are off");

    static const std::vector<std::string> vocab = {
        "council", "adopted", "resolutions.", "budget",  "the",    "for",     "programs",
        "city",    "running", "approves",     "Permit,", "zoning", "hearing", "review",
    };
    static const std::vector<std::string> variants = {
        "adopt", "resolution", "program.", "run", "approved", "permits", "Reviews",
    };
    static const std::vector<std::string> inventions = {"xylophone", "quasar", "Zeppelin!"};

    testsupport::Rng rng(6021);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> orig;
        for (std::size_t i = rng.between(3, 20); i > 0; --i) orig.push_back(rng.pick(vocab));
        std::vector<std::string> comp;
        for (std::size_t i = rng.between(1, 15); i > 0; --i) {
            const double roll = rng.unit();
            if (roll < 0.55) {
                comp.push_back(rng.pick(orig));
            } else if (roll < 0.8) {
                comp.push_back(rng.pick(variants));
            } else {
                comp.push_back(rng.pick(inventions));
            }
        }
        const std::string original = pp::join_words(orig);
        const std::string compressed = pp::join_words(comp);

        pp::DistilledPair pair{"t", original, compressed, {}};
        const auto example = pp::annotate(original, compressed);
        const auto r = pp::evaluate_quality(pair, example);

        const auto ow = brute_words(original);
        const auto cw = brute_words(compressed);
        std::size_t absent = 0, hits = 0, preserved = 0;
        for (const auto& w : cw) {
            if (brute_in(ow, brute_key(w))) {
                ++hits;
            } else {
                ++absent;
            }
        }
        for (bool b : example.labels) preserved += b ? 1 : 0;
        const double vr = static_cast<double>(absent) / static_cast<double>(cw.size());
        const double hr = static_cast<double>(hits) / static_cast<double>(ow.size());
        const double mr = static_cast<double>(preserved) / static_cast<double>(ow.size());

        worst = std::max({worst, std::abs(r.vr - vr), std::abs(r.hr - hr),
                          std::abs(r.mr - mr), std::abs(r.ag - (hr - mr))});
    }
    c.expect(worst <= 1e-12,
             "brute-force evaluator disagrees by " + fmt(worst));
    c.note("identity gap 0, 50 random pairs within " + fmt(worst));
}

// ── Criterion 3: filter drop arithmetic ─────────────────────────────────────

void criterion_3(Criterion& c) {
    std::vector<pp::QualityReport> reports;
    for (int i = 0; i < 20; ++i) {
        pp::QualityReport r;
        r.doc_id = "doc-" + std::to_string(i);
        r.vr = 0.01 * i;
        r.mr = 0.5;
        r.ag = 0.02 * i;
        r.hr = r.mr + r.ag;
        reports.push_back(r);
    }
    const auto kept = pp::filter_dataset(reports);
    c.expect(kept.size() == 17, "expected 17 kept of 20, got " + std::to_string(kept.size()));

    // the dropped three: the vr maximum, then the two ag maxima of the rest
    for (const auto& id : kept) {
        c.expect(id != "doc-19" && id != "doc-18" && id != "doc-17",
                 "kept an example that the ceiling rule should drop: " + id);
    }

    // deterministic under permutation
    testsupport::Rng rng(99);
    auto sorted_baseline = kept;
    std::sort(sorted_baseline.begin(), sorted_baseline.end());
    for (int round = 0; round < 10; ++round) {
        auto shuffled = reports;
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        }
        auto sorted = pp::filter_dataset(shuffled);
        std::sort(sorted.begin(), sorted.end());
        c.expect(sorted == sorted_baseline, "kept set changed under input permutation");
    }
    c.note("1 vr-dropped + 2 ag-dropped, stable over 10 permutations");
}

// ── Criterion 4: fixed-rate compression vs a sort oracle ───────────────────

void criterion_4(Criterion& c) {
    testsupport::Rng rng(2718);
    const auto start = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng.between(1, 200);
        std::vector<std::string> raw;
        for (std::size_t i = 0; i < n; ++i) raw.push_back("w" + std::to_string(i));
        const auto words = pp::split_words(pp::join_words(raw));
        std::vector<double> probs;
        for (std::size_t i = 0; i < n; ++i) probs.push_back(rng.below(8) / 8.0);
        const double tau = 0.01 + rng.unit() * 0.99;

        const auto result = pp::compress_fixed(words, probs, tau, "t");

        // oracle: stable full sort, then truncate
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (probs[a] != probs[b]) return probs[a] > probs[b];
            return a < b;
        });
        const auto target = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(tau * static_cast<double>(n) + 0.5)));
        order.resize(std::min(target, n));
        std::sort(order.begin(), order.end());
        c.expect(result.kept_indices == order, "oracle mismatch at trial " +
                                                   std::to_string(trial));

        // subsequence: strictly increasing indices within range
        for (std::size_t i = 0; i < result.kept_indices.size(); ++i) {
            c.expect(result.kept_indices[i] < n, "kept index out of range");
            if (i > 0) {
                c.expect(result.kept_indices[i] > result.kept_indices[i - 1],
                         "kept indices are not strictly increasing");
            }
        }

        // nesting: a smaller rate keeps a subset
        const double smaller = tau * rng.unit();
        if (smaller > 0.0) {
            const auto nested = pp::compress_fixed(words, probs, smaller, "t");
            c.expect(std::includes(result.kept_indices.begin(), result.kept_indices.end(),
                                   nested.kept_indices.begin(), nested.kept_indices.end()),
                     "smaller rate is not nested in the larger one");
        }
        if (!c.ok) return;
    }
    const double elapsed_s = ms_since(start) / 1000.0;
    c.expect(elapsed_s < 5.0, "took " + fmt(elapsed_s) + " s");
    c.note("1000 instances in " + fmt(elapsed_s) + " s");
}

// ── Criterion 5: dynamic threshold retention ────────────────────────────────

void criterion_5(Criterion& c) {
    // 50 docs x 40 words = 2000 scored words, so 0.2/0.33/0.5 of the corpus
    // are whole numbers and the tie-group bound is exact
    testsupport::Rng rng(31415);
    std::vector<pp::ScoredWords> corpus;
    std::size_t total = 0;
    for (int d = 0; d < 50; ++d) {
        pp::ScoredWords doc;
        doc.doc_id = "doc-" + std::to_string(d);
        for (int w = 0; w < 40; ++w) doc.probs.push_back(rng.below(50) / 50.0);
        total += doc.probs.size();
        corpus.push_back(std::move(doc));
    }

    for (double target : {0.2, 0.33, 0.5}) {
        const double theta = pp::dynamic_threshold(corpus, target);
        std::size_t kept = 0, tied = 0;
        for (const auto& doc : corpus) {
            for (double p : doc.probs) {
                kept += p >= theta ? 1 : 0;
                tied += p == theta ? 1 : 0;
            }
        }
        const double fraction = static_cast<double>(kept) / static_cast<double>(total);
        const double bound =
            static_cast<double>(tied > 0 ? tied - 1 : 0) / static_cast<double>(total);
        c.expect(std::abs(fraction - target) <= bound + 1e-12,
                 "target " + fmt(target) + " retained " + fmt(fraction) +
                     " with tie bound " + fmt(bound));
    }

    // monotonicity: raising the threshold never keeps more words
    std::size_t prev = total + 1;
    for (double theta = 0.0; theta <= 1.0; theta += 0.1) {
        std::size_t kept = 0;
        for (const auto& doc : corpus) {
            for (double p : doc.probs) kept += p >= theta ? 1 : 0;
        }
        c.expect(kept <= prev, "retention is not monotone in the threshold");
        prev = kept;
    }
    c.note("three targets within tie bounds on 2000 words");
}

// ── Criterion 6: scorer numerics ────────────────────────────────────────────

void criterion_6(Criterion& c) {
    testsupport::Rng rng(733);
    static const std::vector<std::string> vocab = {
        "council", "The", "budget", "2024", "approve", "!!",   "zoning", "hearing.",
        "for",     "a",   "Next",   "review", "permit", "14th", "on",     "item",
    };
    std::vector<pp::AnnotatedExample> dataset;
    for (int d = 0; d < 24; ++d) {
        pp::AnnotatedExample ex;
        ex.doc_id = "doc-" + std::to_string(d);
        std::vector<std::string> words;
        const std::size_t len = rng.between(1, 12);
        for (std::size_t i = 0; i < len; ++i) {
            words.push_back(rng.pick(vocab));
            ex.labels.push_back(rng.chance(0.5));
        }
        ex.original_words = pp::split_words(pp::join_words(words));
        dataset.push_back(std::move(ex));
    }
    pp::CorpusFrequencyTable freq;
    for (const auto& ex : dataset) freq.add(ex.original_words);
    const auto featurized = pp::featurize_dataset(dataset, freq);

    pp::LinearScorerModel model{};
    for (auto& w : model.weights) w = rng.unit() * 2.0 - 1.0;
    for (auto& b : model.bias) b = rng.unit() * 2.0 - 1.0;

    auto batch_loss = [&](const pp::LinearScorerModel& m,
                          const std::vector<std::size_t>& batch) {
        double sum = 0.0;
        for (std::size_t idx : batch) {
            sum += pp::example_loss(m, featurized[idx].features, featurized[idx].labels);
        }
        return sum / static_cast<double>(batch.size());
    };

    const double h = 1e-6;
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::size_t> batch;
        for (std::size_t i = rng.between(1, 8); i > 0; --i) {
            batch.push_back(rng.below(dataset.size()));
        }
        const auto grad = pp::batch_gradient(model, featurized, batch);
        auto fd_check = [&](double analytic, auto&& bump) {
            auto plus = model;
            auto minus = model;
            bump(plus, h);
            bump(minus, -h);
            const double fd = (batch_loss(plus, batch) - batch_loss(minus, batch)) / (2.0 * h);
            const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
            worst_rel = std::max(worst_rel, std::abs(analytic - fd) / denom);
        };
        for (std::size_t i = 0; i < grad.weights.size(); ++i) {
            fd_check(grad.weights[i],
                     [i](pp::LinearScorerModel& m, double d) { m.weights[i] += d; });
        }
        for (std::size_t i = 0; i < grad.bias.size(); ++i) {
            fd_check(grad.bias[i], [i](pp::LinearScorerModel& m, double d) { m.bias[i] += d; });
        }
    }
    c.expect(worst_rel <= 1e-4,
             "worst finite-difference relative error " + fmt(worst_rel));

    // the zero model halves everything: loss must equal ln 2
    pp::LinearScorerModel zero{};
    const double uniform_loss = pp::loss(zero, dataset[0], freq);
    c.expect(std::abs(uniform_loss - std::log(2.0)) <= 1e-12,
             "uniform-model loss differs from ln 2");

    // separable task: label = word contains a digit
    static const std::vector<std::string> plain = {"alpha", "beta",  "gamma", "delta",
                                                   "omega", "sigma", "kappa", "theta"};
    static const std::vector<std::string> digity = {"2024", "x9", "42nd", "7am", "v2", "3rd"};
    auto sample = [&](std::size_t docs, const std::string& salt) {
        std::vector<pp::AnnotatedExample> out;
        for (std::size_t d = 0; d < docs; ++d) {
            pp::AnnotatedExample ex;
            ex.doc_id = salt + std::to_string(d);
            std::vector<std::string> words;
            for (std::size_t i = rng.between(4, 12); i > 0; --i) {
                const bool has_digit = rng.chance(0.4);
                words.push_back(has_digit ? rng.pick(digity) : rng.pick(plain));
                ex.labels.push_back(has_digit);
            }
            ex.original_words = pp::split_words(pp::join_words(words));
            out.push_back(std::move(ex));
        }
        return out;
    };
    const auto train_set = sample(60, "train-");
    const auto held_out = sample(20, "held-");
    pp::CorpusFrequencyTable task_freq;
    for (const auto& ex : train_set) task_freq.add(ex.original_words);

    pp::TrainOptions options;
    options.epochs = 200;
    options.learning_rate = 0.1;
    options.batch_size = 10;
    options.seed = 7;

    const auto start = std::chrono::steady_clock::now();
    const auto trained = pp::train(train_set, task_freq, options);
    const double train_s = ms_since(start) / 1000.0;
    c.expect(train_s < 10.0, "training took " + fmt(train_s) + " s");

    std::size_t correct = 0, count = 0;
    for (const auto& ex : held_out) {
        const auto probs = pp::score(trained, pp::featurize(ex.original_words, task_freq));
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const bool actual = ex.labels[i];
            correct += (probs[i] >= 0.5) == actual ? 1 : 0;
            ++count;
        }
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(count);
    c.expect(accuracy >= 0.99, "held-out accuracy " + fmt(accuracy));
    c.note("fd rel err " + fmt(worst_rel) + ", accuracy " +
           fmt(accuracy) + ", " + fmt(train_s) + " s");
}

// ── Criterion 7: subword aggregation ────────────────────────────────────────

void criterion_7(Criterion& c) {
    testsupport::Rng rng(555);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t words = rng.between(1, 15);
        pp::ScoreRecord rec;
        rec.doc_id = "t";
        rec.subword_map.emplace();
        rec.subword_map->resize(words);
        std::vector<double> expected;
        for (std::size_t w = 0; w < words; ++w) {
            const std::size_t pieces = rng.between(1, 6);
            double sum = 0.0;
            for (std::size_t p = 0; p < pieces; ++p) {
                (*rec.subword_map)[w].push_back(rec.probs.size());
                const double v = rng.unit();
                rec.probs.push_back(v);
                sum += v;
            }
            expected.push_back(sum / static_cast<double>(pieces));
        }
        const auto scored = pp::load_external_scores(rec, words);
        for (std::size_t w = 0; w < words; ++w) {
            worst = std::max(worst, std::abs(scored.probs[w] - expected[w]));
        }
    }
    c.expect(worst <= 1e-12, "aggregation differs from the mean by " + fmt(worst));
    c.note("100 random partitions within " + fmt(worst));
}

// ── Criterion 8: end-to-end pipeline over the CLI ───────────────────────────

int run_cli(const testsupport::TempDir& dir, const std::string& args) {
    const std::string cmd = std::string(PROMPTPRESS_CLI_PATH) + " " + args + " >" +
                            dir.file("stdout.txt").string() + " 2>" +
                            dir.file("stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool rule_keeps(const std::string& word) {
    const std::string key = pp::exact_key(word);
    return key.size() >= 3 && !pp::stopwords().contains(key);
}

void criterion_8(Criterion& c) {
    const auto bundled =
        std::filesystem::path(PROMPTPRESS_SOURCE_DIR) / "data" / "synthetic_corpus.jsonl";
    const auto corpus = pp::read_records<pp::DocRecord>(bundled);
    c.expect(corpus.size() == 100, "bundled corpus should hold 100 documents");
    if (!c.ok) return;

    std::vector<pp::DocRecord> train_docs(corpus.begin(), corpus.begin() + 80);
    std::vector<pp::DocRecord> held_docs(corpus.begin() + 80, corpus.end());

    testsupport::TempDir dir("acceptance-pipeline");
    pp::write_records(train_docs, dir.file("train-docs.jsonl"));
    pp::write_records(held_docs, dir.file("held-docs.jsonl"));

    const auto start = std::chrono::steady_clock::now();
    auto step = [&](const std::string& args) {
        const int code = run_cli(dir, args);
        c.expect(code == 0, "pipeline step failed (exit " + std::to_string(code) +
                                "): " + args.substr(0, args.find(' ')));
        return code == 0;
    };

    if (!step("distill -i " + dir.file("train-docs.jsonl").string() + " -o " +
              dir.file("pairs.jsonl").string() + " --mock drop-stopwords")) {
        return;
    }
    if (!step("annotate -i " + dir.file("pairs.jsonl").string() + " -o " +
              dir.file("annotations.jsonl").string())) {
        return;
    }
    if (!step("qc --pairs " + dir.file("pairs.jsonl").string() + " --annotations " +
              dir.file("annotations.jsonl").string() + " -o " +
              dir.file("reports.jsonl").string() + " --filtered-output " +
              dir.file("filtered.jsonl").string())) {
        return;
    }
    if (!step("train -i " + dir.file("filtered.jsonl").string() + " -o " +
              dir.file("model.json").string() + " --epochs 200 --lr 0.1 --batch 10 --seed 0")) {
        return;
    }
    if (!step("score -i " + dir.file("held-docs.jsonl").string() + " -o " +
              dir.file("scores.jsonl").string() + " --model " +
              dir.file("model.json").string())) {
        return;
    }
    if (!step("compress --docs " + dir.file("held-docs.jsonl").string() + " --scores " +
              dir.file("scores.jsonl").string() + " -o " + dir.file("results.jsonl").string() +
              " --rate 0.5")) {
        return;
    }
    const double elapsed_s = ms_since(start) / 1000.0;
    c.expect(elapsed_s < 60.0, "pipeline took " + fmt(elapsed_s) + " s");

    // token-level F1 of the learned scorer against the mock rule, held out
    const auto scores = pp::read_records<pp::ScoreRecord>(dir.file("scores.jsonl"));
    c.expect(scores.size() == held_docs.size(), "scores missing for held-out documents");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t d = 0; d < scores.size() && c.ok; ++d) {
        const auto words = pp::split_words(held_docs[d].text);
        c.expect(words.size() == scores[d].probs.size(), "probability count mismatch");
        if (!c.ok) return;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const bool predicted = scores[d].probs[i] >= 0.5;
            const bool actual = rule_keeps(words.words[i]);
            tp += predicted && actual ? 1 : 0;
            fp += predicted && !actual ? 1 : 0;
            fn += !predicted && actual ? 1 : 0;
        }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f1 = 2.0 * precision * recall / (precision + recall);
    c.expect(f1 >= 0.90, "held-out token F1 " + fmt(f1));

    // 2x compression keeps exactly round(N/2) words per document
    const auto results = pp::read_records<pp::ResultRecord>(dir.file("results.jsonl"));
    c.expect(results.size() == held_docs.size(), "results missing for held-out documents");
    for (std::size_t d = 0; d < results.size() && c.ok; ++d) {
        const std::size_t n = pp::split_words(held_docs[d].text).size();
        const auto expected = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(0.5 * static_cast<double>(n) + 0.5)));
        c.expect(results[d].kept_indices.size() == expected,
                 "doc " + results[d].doc_id + " kept " +
                     std::to_string(results[d].kept_indices.size()) + " of " +
                     std::to_string(n) + ", expected " + std::to_string(expected));
    }
    c.note("F1 " + fmt(f1) + ", " + fmt(elapsed_s) + " s");
}

// ── Criterion 9: request fidelity and chunker safety ────────────────────────

// expected instruction bytes, restated here independently of the library
const std::string kExpectedSystem =
    "You are an excellent linguist and very good at compressing passages into short "
    "expressions by removing unimportant words, while retaining as much information as "
    "possible.";
const std::string kExpectedPrefix =
    "Compress the given text to short expressions, and such that you (GPT-4) can "
    "reconstruct it as close as possible to the original. Unlike the usual text "
    "compression, I need you to comply with the 5 conditions below:\n"
    "1. You can ONLY remove unimportant words.\n"
    "2. Do not reorder the original words.\n"
    "3. Do not change the original words.\n"
    "4. Do not use abbreviations or emojis.\n"
    "5. Do not add new words or symbols.\n"
    "Compress the origin aggressively by removing words only. Compress the origin as "
    "short as you can, while retaining as much information as possible. If you "
    "understand, please compress the following text:\n";
const std::string kExpectedSuffix = "\nThe compressed text is:";

void criterion_9(Criterion& c) {
    const std::string chunk = "Sample chunk for the request.";
    const auto request = pp::build_compression_request(chunk);
    c.expect(request.system_text == kExpectedSystem, "system instruction bytes differ");
    c.expect(request.user_text == kExpectedPrefix + chunk + kExpectedSuffix,
             "user instruction bytes differ");
    c.expect(request.temperature == 0.3, "temperature is not 0.3");
    c.expect(request.top_p == 1.0, "top_p is not 1.0");
    c.expect(request.max_generation_tokens == 4096, "max generation tokens is not 4096");

    const auto body = pp::chat_request_body(request, "m");
    c.expect(body["messages"][0]["content"] == kExpectedSystem &&
                 body["messages"][1]["content"] == request.user_text,
             "wire body does not carry the instruction bytes");

    testsupport::Rng rng(424242);
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        std::string text;
        const std::size_t sentences = rng.between(1, 15);
        for (std::size_t s = 0; s < sentences; ++s) {
            if (s > 0 && rng.chance(0.9)) text += ' ';
            if (rng.chance(0.08)) {
                // an oversize run with no terminator
                for (int w = 0; w < 40; ++w) text += (w ? " long" : "long");
            } else {
                text += testsupport::generate_sentence(rng);
            }
        }
        const std::size_t budget = rng.between(2, 24);
        const auto chunks = pp::chunk(text, budget, {}, "t");

        std::string reassembled;
        for (const auto& piece : chunks) {
            reassembled += piece.text;
            if (!piece.oversize_split) {
                c.expect(piece.token_count <= budget,
                         "non-flagged chunk of " + std::to_string(piece.token_count) +
                             " tokens exceeds budget " + std::to_string(budget));
            }
        }
        c.expect(reassembled == text, "chunk reassembly lost bytes at trial " +
                                          std::to_string(trial));
    }
    c.note("instruction bytes exact, 1000 documents reassembled losslessly");
}

}  // namespace

int main() {
    struct Entry {
        int number;
        const char* title;
        void (*check)(Criterion&);
    };
    const Entry entries[] = {
        {1, "alignment labels on the meeting-minutes example", criterion_1},
        {2, "quality metrics match a brute-force evaluator", criterion_2},
        {3, "filter drops 1 by variation and 2 by gap from 20", criterion_3},
        {4, "fixed-rate compression matches the sort oracle", criterion_4},
        {5, "dynamic threshold hits corpus retention targets", criterion_5},
        {6, "scorer gradients, uniform loss and separable task", criterion_6},
        {7, "subword probabilities average to word probabilities", criterion_7},
        {8, "mock pipeline recovers the rule end to end", criterion_8},
        {9, "request bytes and chunker budget safety", criterion_9},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        Criterion c;
        try {
            entry.check(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        if (c.ok) {
            std::cout << "PASS " << entry.number << ": " << entry.title;
            if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
            std::cout << '\n';
        } else {
            ++failures;
            std::cout << "FAIL " << entry.number << ": " << entry.title << " — " << c.detail
                      << '\n';
        }
    }
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 9 criteria passed\n";
    return 0;
}
