// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

// Command-line front end: train, localize, evaluate, split-word, neighbors,
// serve, gen-synthetic and attribution.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "culprit/bundle.hpp"
#include "culprit/corpus.hpp"
#include "culprit/error.hpp"
#include "culprit/evaluation.hpp"
#include "culprit/ranker.hpp"
#include "culprit/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string default_model_dir() {
    const char* env = std::getenv("CULPRIT_MODEL");
    return env ? env : "";
}

fs::path require_model_dir(const std::string& flag) {
    if (flag.empty()) throw culprit::UsageError("no model given (use --model or set CULPRIT_MODEL)");
    return flag;
}

struct TrainArgs {
    std::string commits;
    std::string bugs;
    std::string scheme = "bm25";
    std::string out;
    std::string document_unit = "feature";
    std::string version = "1";
    std::string created;
    culprit::TrainOptions options;
    bool no_lowercase = false;
    bool no_split = false;
    bool subwords = false;
    culprit::SubwordConfig subword;
};

void add_train(CLI::App& app, TrainArgs& a) {
    auto* cmd = app.add_subcommand("train", "Train a model bundle from commit and bug-report records");
    cmd->add_option("--commits", a.commits, "Commit records (one JSON object per line)")->required();
    cmd->add_option("--bugs", a.bugs, "Bug-report records (optional)");
    cmd->add_option("--scheme", a.scheme, "tfidf | bm25 | embed")->capture_default_str();
    cmd->add_option("--out", a.out, "Bundle output directory")->required();
    cmd->add_option("--document-unit", a.document_unit, "feature | entity")->capture_default_str();
    cmd->add_option("--version-tag", a.version, "Model version recorded in the bundle")->capture_default_str();
    cmd->add_option("--created", a.created, "Creation timestamp to record (default: now, UTC)");
    cmd->add_option("--k1", a.options.bm25.k1, "BM25 k1")->capture_default_str();
    cmd->add_option("--b", a.options.bm25.b, "BM25 b")->capture_default_str();
    cmd->add_flag("--no-lowercase", a.no_lowercase, "Keep token case");
    cmd->add_flag("--no-split", a.no_split, "Disable the identifier splitter");
    cmd->add_option("--min-token-len", a.options.tokenizer.min_token_len)->capture_default_str();
    cmd->add_option("--max-split-len", a.options.tokenizer.max_split_len)->capture_default_str();
    auto& sg = a.options.skipgram;
    cmd->add_option("--dim", sg.dim, "Embedding dimension")->capture_default_str();
    cmd->add_option("--window", sg.window, "Context window")->capture_default_str();
    cmd->add_option("--negatives", sg.negatives, "Negative samples per pair")->capture_default_str();
    cmd->add_option("--epochs", sg.epochs)->capture_default_str();
    cmd->add_option("--lr", sg.learning_rate, "Initial learning rate")->capture_default_str();
    cmd->add_option("--min-count", sg.min_count)->capture_default_str();
    cmd->add_option("--seed", sg.rng_seed)->capture_default_str();
    cmd->add_flag("--subwords", a.subwords, "Add character n-gram vectors");
    cmd->add_option("--minn", a.subword.min_n)->capture_default_str();
    cmd->add_option("--maxn", a.subword.max_n)->capture_default_str();
    cmd->add_option("--buckets", a.subword.buckets)->capture_default_str();
}

int run_train(const TrainArgs& a) {
    auto options = a.options;
    options.scheme = culprit::parse_scheme(a.scheme);
    options.document_unit = culprit::parse_document_unit(a.document_unit);
    options.version = a.version;
    options.tokenizer.lowercase = !a.no_lowercase;
    options.tokenizer.enable_split = !a.no_split;
    if (a.subwords) options.skipgram.subwords = a.subword;
    if (fs::exists(a.out) && !fs::is_directory(a.out)) {
        throw culprit::UsageError(a.out + ": output path exists and is not a directory");
    }

    const auto corpus = culprit::load_corpus(a.commits, a.bugs.empty() ? std::nullopt : std::optional<fs::path>(a.bugs));
    const auto model = culprit::train_model(corpus, options);
    culprit::save_bundle(model, a.out, culprit::corpus_fingerprint(corpus), a.created);
    std::cerr << "wrote " << a.out << " (scheme " << a.scheme << ", " << model.stats.doc_freq.size() << " words, "
              << model.stats.num_docs << " documents)\n";
    return 0;
}

struct LocalizeArgs {
    std::string model = default_model_dir();
    std::string bug;
    std::string candidates;
    std::string scheme;
    std::size_t top_k = 10;
    bool explain = false;
};

void add_localize(CLI::App& app, LocalizeArgs& a) {
    auto* cmd = app.add_subcommand("localize", "Rank candidate commits for one bug report");
    cmd->add_option("--model", a.model, "Model bundle directory (default $CULPRIT_MODEL)");
    cmd->add_option("--bug", a.bug, "File holding one bug-report record")->required();
    cmd->add_option("--candidates", a.candidates, "Candidate commit records")->required();
    cmd->add_option("--top-k", a.top_k)->capture_default_str();
    cmd->add_option("--scheme", a.scheme, "Fail unless the bundle uses this scheme");
    cmd->add_flag("--explain", a.explain, "Include per-word explanations");
}

int run_localize(const LocalizeArgs& a) {
    const auto model = culprit::load_bundle(require_model_dir(a.model));
    if (!a.scheme.empty() && culprit::parse_scheme(a.scheme) != model.scheme) {
        throw culprit::UsageError("bundle scheme is '" + std::string(culprit::to_string(model.scheme)) +
                                  "', not '" + a.scheme + "'");
    }
    const auto bugs = culprit::read_bug_reports_file(a.bug);
    if (bugs.size() != 1) throw culprit::DataError(a.bug + ": expected exactly one bug-report record");
    const auto candidates = culprit::read_commits_file(a.candidates);
    const auto results = culprit::localize(model, bugs.front(), candidates, {a.top_k, a.explain});
    std::cout << culprit::format_results(results) << std::flush;
    return 0;
}

struct EvaluateArgs {
    std::string model;
    std::string baseline;
    std::string cases;
    unsigned threads = 1;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
    auto* cmd = app.add_subcommand("evaluate", "Top@k and MRR over labeled cases");
    auto* model = cmd->add_option("--model", a.model, "Model bundle directory");
    auto* baseline = cmd->add_option("--baseline", a.baseline, "locus | orca");
    model->excludes(baseline);
    cmd->add_option("--cases", a.cases, "Labeled case records")->required();
    cmd->add_option("--threads", a.threads)->capture_default_str();
}

int run_evaluate(const EvaluateArgs& a) {
    const auto cases = culprit::read_cases_file(a.cases);
    if (cases.empty()) throw culprit::DataError(a.cases + ": no cases");
    std::unique_ptr<culprit::Localizer> localizer;
    if (!a.baseline.empty()) {
        const auto pool = culprit::pool_from_cases(cases);
        if (a.baseline == "locus") {
            localizer = std::make_unique<culprit::MonolithicTfidf>(culprit::baseline_locus(pool));
        } else if (a.baseline == "orca") {
            localizer = std::make_unique<culprit::MonolithicTfidf>(culprit::baseline_orca(pool));
        } else {
            throw culprit::UsageError("unknown baseline '" + a.baseline + "' (expected locus or orca)");
        }
    } else {
        const std::string dir = a.model.empty() ? default_model_dir() : a.model;
        auto model = std::make_shared<const culprit::Model>(culprit::load_bundle(require_model_dir(dir)));
        localizer = std::make_unique<culprit::ModelLocalizer>(std::move(model));
    }
    const auto report = culprit::evaluate(*localizer, cases, culprit::kDefaultKs, a.threads);
    std::cout << report.to_json().dump() << std::endl;
    return 0;
}

struct SplitArgs {
    std::string model = default_model_dir();
    std::string word;
};

int run_split(const SplitArgs& a) {
    const auto model = culprit::load_bundle(require_model_dir(a.model));
    const auto pieces = culprit::split_word(a.word, model.tokenizer.model(), model.tokenizer.config());
    std::cout << json(pieces).dump() << std::endl;
    return 0;
}

struct NeighborArgs {
    std::string model = default_model_dir();
    std::string word;
    std::size_t k = 10;
};

int run_neighbors(const NeighborArgs& a) {
    const auto model = culprit::load_bundle(require_model_dir(a.model));
    if (!model.embeddings) throw culprit::UsageError("bundle has no embedding table (train with --scheme embed)");
    for (const auto& [word, cos] : culprit::nearest_neighbors(a.word, *model.embeddings, a.k)) {
        std::cout << json{{"word", word}, {"cosine", cos}}.dump() << '\n';
    }
    std::cout << std::flush;
    return 0;
}

struct ServeArgs {
    std::string model = default_model_dir();
    std::string listen = "127.0.0.1:8080";
    std::string candidates;
};

int run_serve(const ServeArgs& a) {
    auto model = std::make_shared<const culprit::Model>(culprit::load_bundle(require_model_dir(a.model)));
    std::vector<culprit::Commit> pool;
    if (!a.candidates.empty()) pool = culprit::read_commits_file(a.candidates);
    const auto colon = a.listen.rfind(':');
    if (colon == std::string::npos) throw culprit::UsageError("--listen expects HOST:PORT");
    const std::string host = a.listen.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(a.listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw culprit::UsageError("--listen expects HOST:PORT");
    }
    culprit::LocalizationService service(model, std::move(pool));
    std::cerr << "serving model " << model->version << " on " << host << ":" << port << std::endl;
    culprit::run_server(service, host, port);
    return 0;
}

struct SyntheticArgs {
    std::string out;
    std::string config;
    std::string profile = "standard";
    culprit::SyntheticConfig cfg;
};

culprit::FeatureProfile profile_named(const std::string& name) {
    if (name == "standard") return culprit::FeatureProfile::standard();
    if (name == "length_imbalance") return culprit::FeatureProfile::length_imbalance();
    if (name == "synonym") return culprit::FeatureProfile::synonym();
    throw culprit::UsageError("unknown profile '" + name + "' (expected standard, length_imbalance or synonym)");
}

// Keys mirror SyntheticConfig; "feature_profile" is a preset name or an object
// overriding fields of the standard profile.
culprit::SyntheticConfig synthetic_from_json(const json& j) {
    culprit::SyntheticConfig cfg;
    cfg.n_cases = j.value("n_cases", cfg.n_cases);
    cfg.n_candidates = j.value("n_candidates", cfg.n_candidates);
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.signal_terms_per_commit = j.value("signal_terms_per_commit", cfg.signal_terms_per_commit);
    cfg.noise_rate = j.value("noise_rate", cfg.noise_rate);
    cfg.synonymize_all = j.value("synonymize_all", cfg.synonymize_all);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    if (auto s = j.find("synonym_pairs"); s != j.end()) {
        cfg.synonym_pairs = s->get<std::vector<std::pair<std::string, std::string>>>();
    }
    if (auto p = j.find("feature_profile"); p != j.end()) {
        if (p->is_string()) {
            cfg.feature_profile = profile_named(p->get<std::string>());
        } else {
            auto& fp = cfg.feature_profile;
            fp.bug_background_len = p->value("bug_background_len", fp.bug_background_len);
            fp.bug_noise_len = p->value("bug_noise_len", fp.bug_noise_len);
            fp.commit_background_len = p->value("commit_background_len", fp.commit_background_len);
            fp.commit_diff_len = p->value("commit_diff_len", fp.commit_diff_len);
            fp.decoys = p->value("decoys", fp.decoys);
            fp.decoy_diff_len = p->value("decoy_diff_len", fp.decoy_diff_len);
            fp.noise_words_per_case = p->value("noise_words_per_case", fp.noise_words_per_case);
            fp.framework_vocab = p->value("framework_vocab", fp.framework_vocab);
            fp.background_vocab = p->value("background_vocab", fp.background_vocab);
            fp.history_sentences = p->value("history_sentences", fp.history_sentences);
            fp.history_context = p->value("history_context", fp.history_context);
        }
    }
    return cfg;
}

void add_synthetic(CLI::App& app, SyntheticArgs& a) {
    auto* cmd = app.add_subcommand("gen-synthetic", "Write a synthetic benchmark (commits, bugs, cases)");
    cmd->add_option("--out", a.out, "Output directory")->required();
    cmd->add_option("--config", a.config, "JSON config file (flags are ignored when given)");
    cmd->add_option("--cases", a.cfg.n_cases)->capture_default_str();
    cmd->add_option("--candidates", a.cfg.n_candidates)->capture_default_str();
    cmd->add_option("--vocab", a.cfg.vocab_size)->capture_default_str();
    cmd->add_option("--terms", a.cfg.signal_terms_per_commit, "Signal terms per commit")->capture_default_str();
    cmd->add_option("--noise-rate", a.cfg.noise_rate)->capture_default_str();
    cmd->add_option("--profile", a.profile, "standard | length_imbalance | synonym")->capture_default_str();
    cmd->add_flag("--synonymize-all", a.cfg.synonymize_all, "Give every signal word a synonym partner");
    cmd->add_option("--seed", a.cfg.rng_seed)->capture_default_str();
}

int run_synthetic(SyntheticArgs a) {
    culprit::SyntheticConfig cfg = a.cfg;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw culprit::DataError(a.config + ": cannot open file");
        try {
            cfg = synthetic_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw culprit::DataError(a.config + ": " + e.what());
        }
    } else {
        cfg.feature_profile = profile_named(a.profile);
    }
    const auto bench = culprit::gen_synthetic(cfg);
    const fs::path out(a.out);
    if (fs::exists(out) && !fs::is_directory(out)) throw culprit::UsageError(a.out + ": not a directory");
    fs::create_directories(out);
    const auto corpus = bench.training_corpus();
    std::ofstream commits(out / "commits.jsonl");
    culprit::write_commits(commits, corpus.commits);
    std::ofstream bugs(out / "bugs.jsonl");
    culprit::write_bug_reports(bugs, corpus.bug_reports);
    std::ofstream cases(out / "cases.jsonl");
    culprit::write_cases(cases, bench.cases);
    if (!commits || !bugs || !cases) throw culprit::DataError(a.out + ": write failed");
    std::cerr << "wrote " << bench.cases.size() << " cases, " << corpus.commits.size() << " commits to " << a.out
              << "\n";
    return 0;
}

struct AttributionArgs {
    double p_catch = 0.0;
    double step = 0.0;
    double bisect_median = 0.0;
    double bisect_mean = 0.0;
};

int run_attribution(const AttributionArgs& a) {
    const auto est = culprit::attribution_time(a.p_catch, a.step, {a.bisect_median, a.bisect_mean});
    json out{{"median", est.median}, {"mean", est.mean}, {"flags", json::array()}};
    if (est.median_from_summary) out["flags"].push_back("median_from_summary");
    std::cout << out.dump() << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"culprit: commit-level bug localization"};
    app.require_subcommand(1);

    TrainArgs train;
    add_train(app, train);
    LocalizeArgs loc;
    add_localize(app, loc);
    EvaluateArgs eval;
    add_evaluate(app, eval);

    SplitArgs split;
    auto* split_cmd = app.add_subcommand("split-word", "Segment a concatenated identifier");
    split_cmd->add_option("--model", split.model, "Model bundle directory (default $CULPRIT_MODEL)");
    split_cmd->add_option("word", split.word)->required();

    NeighborArgs nn;
    auto* nn_cmd = app.add_subcommand("neighbors", "Nearest words in the embedding space");
    nn_cmd->add_option("--model", nn.model, "Model bundle directory (default $CULPRIT_MODEL)");
    nn_cmd->add_option("-k,--k", nn.k)->capture_default_str();
    nn_cmd->add_option("word", nn.word)->required();

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the localization service");
    serve_cmd->add_option("--model", serve.model, "Model bundle directory (default $CULPRIT_MODEL)");
    serve_cmd->add_option("--listen", serve.listen, "HOST:PORT")->capture_default_str();
    serve_cmd->add_option("--candidates", serve.candidates, "Commit pool for requests that send candidate ids");

    SyntheticArgs synth;
    add_synthetic(app, synth);

    AttributionArgs attr;
    auto* attr_cmd = app.add_subcommand("attribution", "Attribution time with a ranked-candidate shortcut");
    attr_cmd->add_option("--p", attr.p_catch, "Probability the shortcut catches the culprit")->required();
    attr_cmd->add_option("--step", attr.step, "Shortcut step duration (hours)")->required();
    attr_cmd->add_option("--bisect-median", attr.bisect_median)->required();
    attr_cmd->add_option("--bisect-mean", attr.bisect_mean)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (app.got_subcommand("train")) return run_train(train);
        if (app.got_subcommand("localize")) return run_localize(loc);
        if (app.got_subcommand("evaluate")) return run_evaluate(eval);
        if (*split_cmd) return run_split(split);
        if (*nn_cmd) return run_neighbors(nn);
        if (*serve_cmd) return run_serve(serve);
        if (app.got_subcommand("gen-synthetic")) return run_synthetic(synth);
        if (*attr_cmd) return run_attribution(attr);
    } catch (const culprit::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const culprit::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
