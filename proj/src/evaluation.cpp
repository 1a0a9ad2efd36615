// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"

namespace culprit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// case records

LabeledCase case_from_json(const json& record, std::string_view where) {
    auto fail = [&](const std::string& what) -> DataError {
        return DataError(where.empty() ? what : std::string(where) + ": " + what);
    };
    if (!record.is_object()) throw fail("case record is not a JSON object");
    LabeledCase c;
    auto bug = record.find("bug");
    if (bug == record.end()) throw fail("missing field 'bug'");
    const std::string prefix = where.empty() ? std::string() : std::string(where) + ": ";
    c.bug = bug_from_json(*bug, prefix + "bug");
    auto cands = record.find("candidates");
    if (cands == record.end() || !cands->is_array()) throw fail("field 'candidates' must be an array");
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < cands->size(); ++i) {
        c.candidates.push_back(commit_from_json((*cands)[i], prefix + "candidates[" + std::to_string(i) + "]"));
        if (!ids.insert(c.candidates.back().id).second) {
            throw fail("duplicate candidate id '" + c.candidates.back().id + "'");
        }
    }
    auto culprit = record.find("culprit_id");
    if (culprit == record.end() || !culprit->is_string()) throw fail("field 'culprit_id' must be a string");
    c.culprit_id = culprit->get<std::string>();
    if (!ids.contains(c.culprit_id)) throw fail("culprit '" + c.culprit_id + "' is not among the candidates");
    return c;
}

json to_json(const LabeledCase& c) {
    json cands = json::array();
    for (const auto& commit : c.candidates) cands.push_back(to_json(commit));
    return {{"bug", to_json(c.bug)}, {"candidates", std::move(cands)}, {"culprit_id", c.culprit_id}};
}

std::vector<LabeledCase> read_cases(std::istream& in, std::string_view source) {
    std::vector<LabeledCase> cases;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = std::string(source) + ":" + std::to_string(lineno);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": malformed JSON (" + e.what() + ")");
        }
        cases.push_back(case_from_json(record, where));
    }
    return cases;
}

std::vector<LabeledCase> read_cases_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open file");
    return read_cases(in, path.string());
}

void write_cases(std::ostream& out, std::span<const LabeledCase> cases) {
    for (const auto& c : cases) out << to_json(c).dump() << '\n';
}

Corpus pool_from_cases(std::span<const LabeledCase> cases) {
    Corpus corpus;
    std::unordered_set<std::string> seen;
    for (const auto& c : cases) {
        for (const auto& commit : c.candidates) {
            if (seen.insert(commit.id).second) corpus.commits.push_back(commit);
        }
        corpus.bug_reports.push_back(c.bug);
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// localizers

ModelLocalizer::ModelLocalizer(std::shared_ptr<const Model> model, std::string name)
    : model_(std::move(model)), name_(std::move(name)) {
    if (!model_) throw UsageError("ModelLocalizer needs a model");
    if (name_.empty()) name_ = "model-" + std::string(to_string(model_->scheme));
}

std::vector<RankedResult> ModelLocalizer::rank(const BugReport& bug, std::span<const Commit> candidates) const {
    return localize(*model_, bug, candidates, {candidates.size(), false});
}

namespace {

std::vector<Feature> coalesce_features(const std::vector<Feature>& features) {
    if (features.empty()) return {};
    Feature all{"all", {}};
    for (const auto& f : features) all.text.insert(all.text.end(), f.text.begin(), f.text.end());
    return {std::move(all)};
}

} // namespace

Commit coalesce(const Commit& commit) {
    Commit out{commit.id, commit.kind, coalesce_features(commit.features), commit.timestamp};
    return out;
}

BugReport coalesce(const BugReport& bug) {
    return BugReport{bug.id, coalesce_features(bug.features), bug.timestamp};
}

MonolithicTfidf::MonolithicTfidf(std::string name, Model model) : name_(std::move(name)), model_(std::move(model)) {
    model_.validate();
}

std::vector<RankedResult> MonolithicTfidf::rank(const BugReport& bug, std::span<const Commit> candidates) const {
    std::vector<Commit> merged;
    merged.reserve(candidates.size());
    for (const auto& c : candidates) merged.push_back(coalesce(c));
    return localize(model_, coalesce(bug), merged, {merged.size(), false});
}

namespace {

Model monolithic_model(const Corpus& corpus, const Corpus& stats_pool, const TokenizerConfig& cfg) {
    cfg.validate();
    Model model;
    model.scheme = Scheme::tfidf;
    model.version = "baseline";
    model.tokenizer = Tokenizer(train_unigram(corpus, cfg), cfg);
    model.stats = build_stats(stats_pool, model.tokenizer, DocumentUnit::entity);
    return model;
}

} // namespace

MonolithicTfidf baseline_locus(const Corpus& corpus, const TokenizerConfig& cfg) {
    Corpus commits_only{corpus.commits, {}};
    return MonolithicTfidf("locus", monolithic_model(corpus, commits_only, cfg));
}

MonolithicTfidf baseline_orca(const Corpus& corpus, const TokenizerConfig& cfg) {
    return MonolithicTfidf("orca", monolithic_model(corpus, corpus, cfg));
}

// ---------------------------------------------------------------------------
// metrics

json EvalReport::to_json() const {
    json top = json::object();
    for (const auto& [k, v] : top_at) top[std::to_string(k)] = v;
    return {{"cases", case_count}, {"top", std::move(top)}, {"mrr", mrr}, {"ranks", ranks}};
}

EvalReport summarize_ranks(std::span<const int> ranks, std::span<const int> ks) {
    if (ranks.empty()) throw UsageError("no cases to evaluate");
    EvalReport report;
    report.case_count = ranks.size();
    report.ranks.assign(ranks.begin(), ranks.end());
    const double n = static_cast<double>(ranks.size());
    double reciprocal = 0.0;
    for (int r : ranks) {
        if (r < 1) throw UsageError("ranks are 1-based");
        reciprocal += 1.0 / static_cast<double>(r);
    }
    report.mrr = reciprocal / n;
    for (int k : ks) {
        const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](int r) { return r <= k; });
        report.top_at[k] = static_cast<double>(hits) / n;
    }
    return report;
}

EvalReport evaluate(const Localizer& localizer, std::span<const LabeledCase> cases, std::span<const int> ks,
                    unsigned threads) {
    if (cases.empty()) throw UsageError("no cases to evaluate");
    for (const auto& c : cases) {
        const bool found = std::any_of(c.candidates.begin(), c.candidates.end(),
                                       [&](const Commit& commit) { return commit.id == c.culprit_id; });
        if (!found) {
            throw DataError("case '" + c.bug.id + "': culprit '" + c.culprit_id + "' is not among the candidates");
        }
    }

    std::vector<int> ranks(cases.size(), 0);
    auto run = [&](std::size_t i) {
        const auto& c = cases[i];
        const auto ranked = localizer.rank(c.bug, c.candidates);
        for (const auto& r : ranked) {
            if (r.commit_id == c.culprit_id) {
                ranks[i] = r.rank;
                break;
            }
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cases.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < cases.size(); ++i) run(i);
    } else {
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < cases.size(); i += threads) run(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        if (error) std::rethrow_exception(error);
    }
    return summarize_ranks(ranks, ks);
}

std::pair<std::vector<LabeledCase>, std::vector<LabeledCase>> split_chronological(std::span<const LabeledCase> cases,
                                                                                  double train_fraction) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw UsageError("train fraction must lie in [0, 1]");
    std::vector<LabeledCase> ordered(cases.begin(), cases.end());
    const bool timed = std::all_of(ordered.begin(), ordered.end(), [](const auto& c) { return c.bug.timestamp.has_value(); });
    if (timed) {
        std::stable_sort(ordered.begin(), ordered.end(),
                         [](const auto& a, const auto& b) { return *a.bug.timestamp < *b.bug.timestamp; });
    }
    const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(ordered.size()) * train_fraction));
    std::vector<LabeledCase> test(std::make_move_iterator(ordered.begin() + static_cast<std::ptrdiff_t>(cut)),
                                  std::make_move_iterator(ordered.end()));
    ordered.resize(cut);
    return {std::move(ordered), std::move(test)};
}

// ---------------------------------------------------------------------------
// synthetic benchmarks

FeatureProfile FeatureProfile::standard() { return FeatureProfile{}; }

FeatureProfile FeatureProfile::length_imbalance() {
    FeatureProfile p;
    p.bug_background_len = 0;
    p.bug_noise_len = 150;
    p.decoys = 6;
    p.decoy_diff_len = 150;
    return p;
}

FeatureProfile FeatureProfile::synonym() {
    FeatureProfile p;
    p.commit_diff_len = 10;
    p.history_sentences = 4;
    p.history_context = 4;
    return p;
}

void SyntheticConfig::validate() const {
    if (n_candidates < 2) throw UsageError("synthetic benchmark needs at least two candidates");
    if (signal_terms_per_commit < 1) throw UsageError("signal_terms_per_commit must be >= 1");
    if (vocab_size < n_candidates * signal_terms_per_commit) {
        throw UsageError("vocab_size must cover n_candidates * signal_terms_per_commit distinct terms");
    }
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw UsageError("noise_rate must lie in [0, 1]");
    if (synonym_pairs.size() > vocab_size) throw UsageError("more synonym pairs than signal words");
    const auto& p = feature_profile;
    if (p.decoys < 0 || static_cast<std::size_t>(p.decoys) >= n_candidates) {
        throw UsageError("decoys must leave room for the culprit");
    }
    if (p.framework_vocab < 1 || p.background_vocab < 1 || p.noise_words_per_case < 1 ||
        p.noise_words_per_case > p.framework_vocab) {
        throw UsageError("invalid feature profile vocabulary sizes");
    }
}

Corpus SyntheticBenchmark::training_corpus() const {
    Corpus corpus = pool_from_cases(cases);
    corpus.commits.insert(corpus.commits.end(), history.begin(), history.end());
    return corpus;
}

namespace {

class SyntheticRng {
public:
    explicit SyntheticRng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    /// k distinct indices from [0, n)
    std::vector<std::size_t> sample(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + below(n - i)]);
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

// Pronounceable six-letter pseudo-words. Equal lengths keep the identifier
// splitter from reading one generated word as a concatenation of others.
class WordFactory {
public:
    explicit WordFactory(SyntheticRng& rng) : rng_(rng) {}

    void reserve(const std::string& word) { used_.insert(word); }

    std::string next() {
        static constexpr std::string_view consonants = "bcdfghjklmnprstvwz";
        static constexpr std::string_view vowels = "aeiou";
        for (;;) {
            std::string w;
            for (int s = 0; s < 3; ++s) {
                w += consonants[rng_.below(consonants.size())];
                w += vowels[rng_.below(vowels.size())];
            }
            if (used_.insert(w).second) return w;
        }
    }

    std::vector<std::string> take(std::size_t n) {
        std::vector<std::string> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(next());
        return out;
    }

private:
    SyntheticRng& rng_;
    std::unordered_set<std::string> used_;
};

std::string join(const std::vector<std::string>& words, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += sep;
        out += words[i];
    }
    return out;
}

// Splits `words` into lines of at most `per_line` words joined by `sep`.
std::vector<std::string> lines_of(const std::vector<std::string>& words, std::size_t per_line, std::string_view sep) {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < words.size(); i += per_line) {
        std::vector<std::string> chunk(words.begin() + static_cast<std::ptrdiff_t>(i),
                                       words.begin() + static_cast<std::ptrdiff_t>(std::min(words.size(), i + per_line)));
        lines.push_back(join(chunk, sep));
    }
    return lines;
}

std::vector<std::string> draw(SyntheticRng& rng, const std::vector<std::string>& pool, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
    return out;
}

} // namespace

SyntheticBenchmark gen_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    const FeatureProfile& profile = cfg.feature_profile;
    SyntheticRng rng(cfg.rng_seed);
    WordFactory factory(rng);

    std::unordered_map<std::string, std::string> partner;
    for (const auto& [word, syn] : cfg.synonym_pairs) {
        factory.reserve(word);
        factory.reserve(syn);
    }
    std::vector<std::string> signal;
    signal.reserve(cfg.vocab_size);
    for (const auto& [word, syn] : cfg.synonym_pairs) {
        signal.push_back(word);
        partner[word] = syn;
    }
    while (signal.size() < cfg.vocab_size) signal.push_back(factory.next());
    if (cfg.synonymize_all) {
        for (const auto& w : signal) {
            if (!partner.contains(w)) partner[w] = factory.next();
        }
    }
    const auto background = factory.take(static_cast<std::size_t>(profile.background_vocab));
    const auto framework = factory.take(static_cast<std::size_t>(profile.framework_vocab));

    SyntheticBenchmark bench;

    // history text in which each word and its partner share a context
    if (profile.history_sentences > 0) {
        std::size_t hist_id = 0;
        for (const auto& word : signal) {
            auto it = partner.find(word);
            if (it == partner.end()) continue;
            const auto context = factory.take(static_cast<std::size_t>(profile.history_context));
            for (const auto& target : {word, it->second}) {
                for (int r = 0; r < profile.history_sentences; ++r) {
                    auto sentence = context;
                    rng.shuffle(sentence);
                    sentence.insert(sentence.begin() + static_cast<std::ptrdiff_t>(sentence.size() / 2), target);
                    Commit h;
                    h.id = "hist-" + std::to_string(hist_id++);
                    h.kind = CommitKind::code_change;
                    h.timestamp = static_cast<std::int64_t>(hist_id);
                    h.features.push_back({"message", {join(sentence, " ")}});
                    bench.history.push_back(std::move(h));
                }
            }
        }
    }

    const bool needs_case_noise = profile.bug_noise_len > 0 || profile.decoys > 0;
    const std::int64_t epoch = 1'600'000'000;

    for (std::size_t ci = 0; ci < cfg.n_cases; ++ci) {
        const std::string prefix = "case" + std::to_string(ci);
        std::vector<std::string> case_noise;
        if (needs_case_noise) {
            for (auto idx : rng.sample(framework.size(), static_cast<std::size_t>(profile.noise_words_per_case))) {
                case_noise.push_back(framework[idx]);
            }
        }

        const auto term_idx = rng.sample(signal.size(), cfg.n_candidates * cfg.signal_terms_per_commit);
        const std::size_t culprit = rng.below(cfg.n_candidates);
        std::vector<bool> is_decoy(cfg.n_candidates, false);
        {
            std::vector<std::size_t> others;
            for (std::size_t j = 0; j < cfg.n_candidates; ++j) {
                if (j != culprit) others.push_back(j);
            }
            rng.shuffle(others);
            for (int d = 0; d < profile.decoys; ++d) is_decoy[others[static_cast<std::size_t>(d)]] = true;
        }

        LabeledCase lc;
        std::vector<std::string> culprit_terms;
        for (std::size_t j = 0; j < cfg.n_candidates; ++j) {
            std::vector<std::string> terms;
            for (std::size_t t = 0; t < cfg.signal_terms_per_commit; ++t) {
                terms.push_back(signal[term_idx[j * cfg.signal_terms_per_commit + t]]);
            }
            if (j == culprit) culprit_terms = terms;

            Commit c;
            c.id = prefix + "-c" + std::to_string(j);
            c.kind = rng.uniform() < 0.2 ? CommitKind::config_change : CommitKind::code_change;
            c.timestamp = epoch + static_cast<std::int64_t>(ci * 100'000 + j * 60);
            c.features.push_back({"title", {join(terms, " ")}});
            if (profile.commit_background_len > 0) {
                c.features.push_back(
                    {"summary", {join(draw(rng, background, static_cast<std::size_t>(profile.commit_background_len)), " ")}});
            }
            if (is_decoy[j]) {
                c.features.push_back(
                    {"diff", lines_of(draw(rng, case_noise, static_cast<std::size_t>(profile.decoy_diff_len)), 6, "/")});
            } else if (profile.commit_diff_len > 0) {
                c.features.push_back(
                    {"diff", lines_of(draw(rng, framework, static_cast<std::size_t>(profile.commit_diff_len)), 6, "/")});
            }
            lc.candidates.push_back(std::move(c));
        }

        BugReport bug;
        bug.id = prefix + "-bug";
        bug.timestamp = epoch + static_cast<std::int64_t>(ci * 100'000 + 99'000);
        std::vector<std::string> title;
        for (const auto& term : culprit_terms) {
            if (rng.uniform() < cfg.noise_rate) {
                std::string other;
                do {
                    other = signal[rng.below(signal.size())];
                } while (std::find(culprit_terms.begin(), culprit_terms.end(), other) != culprit_terms.end());
                title.push_back(other);
            } else if (auto it = partner.find(term); it != partner.end()) {
                title.push_back(it->second);
            } else {
                title.push_back(term);
            }
        }
        rng.shuffle(title);
        bug.features.push_back({"title", {join(title, " ")}});
        if (profile.bug_background_len > 0) {
            bug.features.push_back(
                {"metric", {join(draw(rng, background, static_cast<std::size_t>(profile.bug_background_len)), "_")}});
        }
        if (profile.bug_noise_len > 0) {
            bug.features.push_back(
                {"stack_trace", lines_of(draw(rng, case_noise, static_cast<std::size_t>(profile.bug_noise_len)), 5, "::")});
        }
        lc.bug = std::move(bug);
        lc.culprit_id = lc.candidates[culprit].id;
        bench.cases.push_back(std::move(lc));
    }
    return bench;
}

// ---------------------------------------------------------------------------
// bisect shortcut

AttributionEstimate attribution_time(double p_catch, double step_hours, const BisectSummary& bisect) {
    if (!(p_catch >= 0.0 && p_catch <= 1.0)) throw UsageError("p_catch must lie in [0, 1]");
    if (!(step_hours >= 0.0)) throw UsageError("step time must be non-negative");
    if (step_hours > bisect.median) throw UsageError("the shortcut step must not exceed the bisect median");

    AttributionEstimate est;
    est.mean = p_catch * step_hours + (1.0 - p_catch) * bisect.mean;
    if (p_catch >= 0.5) {
        // P(time <= step) = p_catch already reaches one half
        est.median = step_hours;
    } else {
        // the true median is the (0.5 - p)/(1 - p) bisect quantile, unknown
        // from summaries alone
        est.median = bisect.median;
        est.median_from_summary = p_catch > 0.0;
    }
    return est;
}

} // namespace culprit
