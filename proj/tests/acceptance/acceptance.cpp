// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "culprit/bundle.hpp"
#include "culprit/embeddings.hpp"
#include "culprit/evaluation.hpp"
#include "culprit/ranker.hpp"
#include "culprit/service.hpp"
#include "culprit/tokenizer.hpp"
#include "culprit/vectorizer.hpp"
#include "test_util.hpp"

using namespace culprit;
using Clock = std::chrono::steady_clock;
using Docs = std::vector<std::vector<std::string>>;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5g", x);
    return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome tfidf_oracle() {
    const auto t0 = Clock::now();
    const Docs docs{
        {"tag", "new", "tag", "backend"},
        {"tag", "product"},
        {"new", "config", "switch"},
        {"backend", "backend", "crash"},
        {"tag", "crash", "metric", "latency"},
    };
    const VocabStats stats = build_stats(docs);
    Outcome o;

    // brute force straight from the definition
    std::map<std::string, int> df;
    for (const auto& d : docs) {
        std::map<std::string, bool> seen;
        for (const auto& w : d) seen[w] = true;
        for (const auto& [w, _] : seen) ++df[w];
    }
    Docs queries = docs;
    queries.push_back({"tag", "tag", "tag", "crash", "unknown"});
    queries.push_back({"backend", "switch", "latency", "latency"});
    double worst = 0.0;
    std::size_t weights = 0;
    for (const auto& q : queries) {
        std::map<std::string, int> freq;
        for (const auto& w : q) ++freq[w];
        const auto v = tfidf_vectorize(q, stats);
        for (const auto& [w, f] : freq) {
            if (!df.count(w)) {
                o.require(v.entries.count(w) == 0, "out-of-vocabulary word weighted");
                continue;
            }
            const double want = (1.0 + std::log(static_cast<double>(f))) * std::log(5.0 / df[w]);
            worst = std::max(worst, std::fabs(v.get(w) - want));
            ++weights;
        }
    }
    // frozen reference weights for the two query documents
    const auto q1 = tfidf_vectorize(queries[5], stats);
    worst = std::max(worst, std::fabs(q1.get("tag") - 1.0720249314018606));
    worst = std::max(worst, std::fabs(q1.get("crash") - 0.9162907318741551));
    const auto q2 = tfidf_vectorize(queries[6], stats);
    worst = std::max(worst, std::fabs(q2.get("latency") - 2.725015263724081));
    worst = std::max(worst, std::fabs(q2.get("switch") - 1.6094379124341003));

    o.require(worst <= 1e-9, "max error " + fmt(worst));
    const double secs = seconds_since(t0);
    o.require(secs < 1.0, "runtime " + fmt(secs) + " s");
    if (o.pass) o.detail = std::to_string(weights) + " weights, max error " + fmt(worst) + ", " + fmt(secs) + " s";
    return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome length_imbalance() {
    const auto t0 = Clock::now();
    SyntheticConfig cfg;
    cfg.n_cases = 200;
    cfg.n_candidates = 50;
    cfg.feature_profile = FeatureProfile::length_imbalance();
    const auto bench = gen_synthetic(cfg);
    const Corpus corpus = bench.training_corpus();

    TrainOptions opt;
    opt.scheme = Scheme::bm25;
    const ModelLocalizer b2c(std::make_shared<const Model>(train_model(corpus, opt)));
    const auto ours = evaluate(b2c, bench.cases);
    const auto locus = evaluate(baseline_locus(corpus), bench.cases);

    Outcome o;
    o.require(ours.top_at.at(1) >= 0.90, "per-feature Top@1 " + fmt(ours.top_at.at(1)) + " < 0.90");
    o.require(locus.top_at.at(1) <= 0.50, "monolithic Top@1 " + fmt(locus.top_at.at(1)) + " > 0.50");
    o.require(ours.top_at.at(5) > locus.top_at.at(5), "Top@5 not strictly better");
    const double secs = seconds_since(t0);
    o.require(secs < 30.0, "runtime " + fmt(secs) + " s");
    const std::string summary = "per-feature BM25 Top@1 " + fmt(ours.top_at.at(1)) + " Top@5 " + fmt(ours.top_at.at(5)) +
                                ", monolithic tf-idf Top@1 " + fmt(locus.top_at.at(1)) + " Top@5 " +
                                fmt(locus.top_at.at(5)) + ", " + fmt(secs) + " s";
    o.detail = o.pass ? summary : o.detail + " (" + summary + ")";
    return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome zero_noise() {
    const auto t0 = Clock::now();
    SyntheticConfig cfg;
    cfg.n_cases = 100;
    cfg.n_candidates = 50;
    cfg.noise_rate = 0.0;
    const auto bench = gen_synthetic(cfg);
    const ModelLocalizer loc(std::make_shared<const Model>(train_model(bench.training_corpus(), {})));
    const auto report = evaluate(loc, bench.cases);
    Outcome o;
    o.require(report.top_at.at(1) == 1.0, "Top@1 " + fmt(report.top_at.at(1)));
    const double secs = seconds_since(t0);
    o.require(secs < 10.0, "runtime " + fmt(secs) + " s");
    if (o.pass) o.detail = "Top@1 1.0 over 100 x 50, " + fmt(secs) + " s";
    return o;
}

// --- 4 ---------------------------------------------------------------------

Outcome embedding_win() {
    const auto t0 = Clock::now();
    SyntheticConfig cfg;
    cfg.n_cases = 50;
    cfg.n_candidates = 20;
    cfg.vocab_size = 300;
    cfg.synonym_pairs = {{"skylark", "starlark"}};
    cfg.synonymize_all = true;
    cfg.feature_profile = FeatureProfile::synonym();
    cfg.rng_seed = 11;
    const auto bench = gen_synthetic(cfg);
    const Corpus corpus = bench.training_corpus();

    std::size_t tokens = 0;
    const Tokenizer tokenizer(train_unigram(corpus, {}), {});
    for (const auto& c : corpus.commits) {
        for (const auto& f : c.features) tokens += tokenizer(f).size();
    }
    for (const auto& b : corpus.bug_reports) {
        for (const auto& f : b.features) tokens += tokenizer(f).size();
    }

    TrainOptions bm25;
    bm25.scheme = Scheme::bm25;
    TrainOptions embed;
    embed.scheme = Scheme::embed;
    embed.skipgram.dim = 50;
    embed.skipgram.epochs = 15;
    embed.skipgram.min_count = 1;
    embed.skipgram.window = 5;

    const auto sparse_model = std::make_shared<const Model>(train_model(corpus, bm25));
    const auto dense_model = std::make_shared<const Model>(train_model(corpus, embed));
    const auto sparse = evaluate(ModelLocalizer(sparse_model), bench.cases);
    const auto dense = evaluate(ModelLocalizer(dense_model), bench.cases);

    bool partner_found = false;
    for (const auto& [w, _] : nearest_neighbors("skylark", *dense_model->embeddings, 5)) {
        partner_found = partner_found || w == "starlark";
    }

    Outcome o;
    o.require(tokens <= 50'000, "corpus has " + std::to_string(tokens) + " tokens");
    o.require(dense.top_at.at(1) > sparse.top_at.at(1), "embedding Top@1 " + fmt(dense.top_at.at(1)) +
                                                            " not above BM25 " + fmt(sparse.top_at.at(1)));
    o.require(partner_found, "partner missing from top-5 neighbours");
    const double secs = seconds_since(t0);
    o.require(secs < 120.0, "runtime " + fmt(secs) + " s");
    const std::string summary = "embed Top@1 " + fmt(dense.top_at.at(1)) + " vs BM25 " + fmt(sparse.top_at.at(1)) +
                                ", " + std::to_string(tokens) + " tokens, " + fmt(secs) + " s";
    o.detail = o.pass ? summary : o.detail + " (" + summary + ")";
    return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome gradient_check() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto vec = [&](std::size_t d) {
        std::vector<double> v(d);
        for (auto& x : v) x = dist(rng);
        return v;
    };
    const double h = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 2 + rng() % 10;
        auto in = vec(d);
        auto out = vec(d);
        std::vector<std::vector<double>> negs(1 + rng() % 5);
        for (auto& n : negs) n = vec(d);
        const auto r = sgns_loss_and_grad(in, out, negs);
        auto numeric = [&](double& x) {
            const double saved = x;
            x = saved + h;
            const double up = sgns_loss_and_grad(in, out, negs).loss;
            x = saved - h;
            const double down = sgns_loss_and_grad(in, out, negs).loss;
            x = saved;
            return (up - down) / (2 * h);
        };
        auto compare = [&](double analytic, double num) {
            worst = std::max(worst, std::fabs(analytic - num) / std::max(1.0, std::fabs(num)));
        };
        for (std::size_t i = 0; i < d; ++i) {
            compare(r.grad_context_in[i], numeric(in[i]));
            compare(r.grad_center_out[i], numeric(out[i]));
            for (std::size_t k = 0; k < negs.size(); ++k) compare(r.grad_negative_out[k][i], numeric(negs[k][i]));
        }
    }
    Outcome o;
    o.require(worst <= 1e-4, "max relative error " + fmt(worst));
    const double secs = seconds_since(t0);
    o.require(secs < 5.0, "runtime " + fmt(secs) + " s");
    if (o.pass) o.detail = "max relative error " + fmt(worst) + ", " + fmt(secs) + " s";
    return o;
}

// --- 6 ---------------------------------------------------------------------

std::vector<std::string> exhaustive_split(const std::string& w, const std::map<std::string, std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (const auto& [_, c] : counts) total += c;
    auto seg = [&](const std::string& s) {
        auto it = counts.find(s);
        if (it != counts.end() && it->second > 0) return std::log(static_cast<double>(it->second) / total);
        return (total == 0 ? 0.0 : -std::log(static_cast<double>(total))) - 2.0 * static_cast<double>(s.size());
    };
    const std::size_t cuts = w.size() - 1;
    std::vector<std::string> best;
    std::vector<std::size_t> best_offsets;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cuts); ++mask) {
        std::vector<std::string> pieces;
        std::vector<std::size_t> offsets;
        double score = 0.0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= cuts; ++i) {
            if (i == cuts || (mask >> i & 1)) {
                pieces.push_back(w.substr(start, i + 1 - start));
                score += seg(pieces.back());
                start = i + 1;
                if (i < cuts) offsets.push_back(start);
            }
        }
        const bool better = score > best_score ||
                            (score == best_score && (pieces.size() < best.size() ||
                                                     (pieces.size() == best.size() && offsets < best_offsets)));
        if (better) {
            best = pieces;
            best_offsets = offsets;
            best_score = score;
        }
    }
    return best;
}

Outcome splitter() {
    const auto t0 = Clock::now();
    Outcome o;
    const std::map<std::string, std::uint64_t> fixture{
        {"new", 50}, {"product", 40}, {"tag", 90}, {"backend", 30}, {"newproducttagbackend", 0},
        {"back", 12}, {"end", 25},    {"pro", 4},  {"duct", 3},     {"switch", 20},
    };
    const std::vector<std::string> want{"new", "product", "tag", "backend"};
    o.require(split_word("newproducttagbackend", UnigramModel(fixture), {}) == want, "fixture split differs");
    o.require(exhaustive_split("newproducttagbackend", fixture) == want, "fixture oracle differs");

    std::mt19937 rng(6);
    const std::string alphabet = "abcd";
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::map<std::string, std::uint64_t> counts;
        const int entries = static_cast<int>(rng() % 15);
        for (int i = 0; i < entries; ++i) {
            std::string w;
            const int len = 1 + static_cast<int>(rng() % 5);
            for (int k = 0; k < len; ++k) w.push_back(alphabet[rng() % alphabet.size()]);
            counts[w] = rng() % 10;
        }
        std::string word;
        const int len = 1 + static_cast<int>(rng() % 12);
        for (int k = 0; k < len; ++k) word.push_back(alphabet[rng() % alphabet.size()]);
        if (split_word(word, UnigramModel(counts), {}) != exhaustive_split(word, counts)) ++mismatches;
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " of 1000 words differ from exhaustive search");
    const double secs = seconds_since(t0);
    o.require(secs < 5.0, "runtime " + fmt(secs) + " s");
    if (o.pass) o.detail = "1000 random words + fixture, " + fmt(secs) + " s";
    return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome metrics() {
    Outcome o;
    const auto r = summarize_ranks(std::vector<int>{1, 3, 10});
    o.require(std::fabs(r.mrr - 0.47778) <= 1e-5, "MRR " + fmt(r.mrr));
    o.require(std::fabs(r.top_at.at(1) - 0.33333) <= 1e-5, "Top@1 " + fmt(r.top_at.at(1)));
    o.require(std::fabs(r.top_at.at(5) - 0.66667) <= 1e-5, "Top@5 " + fmt(r.top_at.at(5)));
    o.require(r.top_at.at(10) == 1.0, "Top@10 " + fmt(r.top_at.at(10)));

    std::mt19937 rng(70);
    const std::vector<int> ks{1, 2, 3, 5, 10, 20, 50};
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> ranks(1 + rng() % 40);
        for (auto& x : ranks) x = 1 + static_cast<int>(rng() % 60);
        const auto s = summarize_ranks(ranks, ks);
        for (std::size_t i = 1; i < ks.size(); ++i) {
            if (s.top_at.at(ks[i - 1]) > s.top_at.at(ks[i])) {
                o.require(false, "Top@k not monotone");
                return o;
            }
        }
    }
    if (o.pass) o.detail = "MRR " + fmt(r.mrr) + ", Top@1/5/10 " + fmt(r.top_at.at(1)) + "/" + fmt(r.top_at.at(5)) + "/" +
                           fmt(r.top_at.at(10));
    return o;
}

// --- 8 ---------------------------------------------------------------------

Outcome explanation_identity() {
    Outcome o;
    std::mt19937 rng(88);
    std::uniform_real_distribution<double> w(0.001, 10.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        SparseVector a, b;
        const int vocab = 5 + static_cast<int>(rng() % 80);
        for (int k = 0; k < vocab; ++k) {
            const std::string word = "w" + std::to_string(k);
            if (rng() % 3) a.entries[word] = w(rng);
            if (rng() % 3) b.entries[word] = w(rng);
        }
        double sum = 0.0;
        for (const auto& c : explain_sparse(a, b, std::numeric_limits<std::size_t>::max())) sum += c.contribution;
        worst = std::max(worst, std::fabs(sum - cosine(a, b)));
    }
    o.require(worst <= 1e-9, "max error " + fmt(worst));
    if (o.pass) o.detail = "100 pairs, max error " + fmt(worst);
    return o;
}

// --- 9 ---------------------------------------------------------------------

Outcome attribution() {
    Outcome o;
    const auto est = attribution_time(0.60, 3.0, BisectSummary{9.0, 18.0});
    o.require(est.median == 3.0, "median " + fmt(est.median));
    if (o.pass) o.detail = "median 3 h (mean " + fmt(est.mean) + " h)";
    return o;
}

// --- 10 --------------------------------------------------------------------

Outcome end_to_end() {
    Outcome o;
    test::TempDir dir("acceptance");

    SyntheticConfig cfg;
    cfg.n_cases = 1;
    cfg.n_candidates = 1000;
    cfg.vocab_size = 4000;
    cfg.noise_rate = 0.3;
    const auto bench = gen_synthetic(cfg);
    const auto& lc = bench.cases.at(0);
    const Corpus corpus = bench.training_corpus();

    {
        std::ofstream commits(dir / "commits.jsonl");
        write_commits(commits, corpus.commits);
        std::ofstream bugs(dir / "bugs.jsonl");
        write_bug_reports(bugs, corpus.bug_reports);
        std::ofstream bug(dir / "bug.jsonl");
        write_bug_reports(bug, std::vector<BugReport>{lc.bug});
        std::ofstream cands(dir / "candidates.jsonl");
        write_commits(cands, lc.candidates);
    }

    const std::string cli = CULPRIT_CLI_PATH;
    const std::string model_dir = (dir / "model").string();
    const auto train = test::run_command(cli + " train --commits " + (dir / "commits.jsonl").string() + " --bugs " +
                                         (dir / "bugs.jsonl").string() + " --out " + model_dir);
    o.require(train.exit_code == 0, "train exited " + std::to_string(train.exit_code));
    if (!o.pass) return o;

    const Model in_memory = train_model(corpus, TrainOptions{});
    const Model loaded = load_bundle(model_dir);
    const LocalizeOptions options{10, true};

    const auto t0 = Clock::now();
    const auto from_disk = localize(loaded, lc.bug, lc.candidates, options);
    const double secs = seconds_since(t0);
    const auto direct = localize(in_memory, lc.bug, lc.candidates, options);
    o.require(from_disk == direct, "loaded model ranks differently from the in-memory model");
    o.require(secs < 5.0, "1000-candidate inference took " + fmt(secs) + " s");

    const auto cli_out = test::run_command(cli + " localize --explain --model " + model_dir + " --bug " +
                                           (dir / "bug.jsonl").string() + " --candidates " +
                                           (dir / "candidates.jsonl").string());
    nlohmann::json req{{"bug", to_json(lc.bug)}, {"top_k", 10}, {"explain", true}, {"candidates", nlohmann::json::array()}};
    for (const auto& c : lc.candidates) req["candidates"].push_back(to_json(c));
    const LocalizationService service(std::make_shared<const Model>(loaded));
    const auto svc_out = service.localize(req.dump());
    o.require(cli_out.exit_code == 0, "localize exited " + std::to_string(cli_out.exit_code));
    o.require(svc_out.status == 200, "service status " + std::to_string(svc_out.status));
    o.require(cli_out.out == svc_out.body, "CLI and service outputs differ");
    o.require(cli_out.out == format_results(direct), "CLI output differs from in-memory results");
    if (o.pass) o.detail = "bitwise round trip, byte parity, 1000 candidates in " + fmt(secs) + " s";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"tf-idf oracle equivalence", tfidf_oracle},
        {"per-feature beats monolithic under length imbalance", length_imbalance},
        {"zero-noise separability", zero_noise},
        {"embedding scheme wins on synonyms", embedding_win},
        {"skip-gram gradient check", gradient_check},
        {"splitter optimality", splitter},
        {"metric machinery", metrics},
        {"explanation identity", explanation_identity},
        {"attribution-time model", attribution},
        {"end-to-end determinism and parity", end_to_end},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("%s AC%zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
