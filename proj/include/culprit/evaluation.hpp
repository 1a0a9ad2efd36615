// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "culprit/corpus.hpp"
#include "culprit/ranker.hpp"

namespace culprit {

/// One bug report, its candidate pool and the known culprit.
struct LabeledCase {
    BugReport bug;
    std::vector<Commit> candidates;
    std::string culprit_id;
};

// Case files hold one record per line:
//   {"bug": <bug record>, "candidates": [<commit record>...], "culprit_id": str}
LabeledCase case_from_json(const nlohmann::json& record, std::string_view where = {});
nlohmann::json to_json(const LabeledCase& c);
std::vector<LabeledCase> read_cases(std::istream& in, std::string_view source);
std::vector<LabeledCase> read_cases_file(const std::filesystem::path& path);
void write_cases(std::ostream& out, std::span<const LabeledCase> cases);

/// Distinct candidate commits (first occurrence wins) and all bug reports.
Corpus pool_from_cases(std::span<const LabeledCase> cases);

/// Anything that can order a candidate pool for a bug report.
class Localizer {
public:
    virtual ~Localizer() = default;
    virtual std::string_view name() const = 0;
    /// Full ranking of `candidates`, best first.
    virtual std::vector<RankedResult> rank(const BugReport& bug, std::span<const Commit> candidates) const = 0;
};

/// Per-feature ranking with a trained model.
class ModelLocalizer final : public Localizer {
public:
    explicit ModelLocalizer(std::shared_ptr<const Model> model, std::string name = {});
    std::string_view name() const override { return name_; }
    std::vector<RankedResult> rank(const BugReport& bug, std::span<const Commit> candidates) const override;
    const Model& model() const { return *model_; }

private:
    std::shared_ptr<const Model> model_;
    std::string name_;
};

/// Concatenates every feature of an entity into a single feature.
Commit coalesce(const Commit& commit);
BugReport coalesce(const BugReport& bug);

/// Monolithic tf-idf: each entity is one bag of words, one document per
/// entity, cosine ranking with the ranker's tie rule.
class MonolithicTfidf final : public Localizer {
public:
    MonolithicTfidf(std::string name, Model model);
    std::string_view name() const override { return name_; }
    std::vector<RankedResult> rank(const BugReport& bug, std::span<const Commit> candidates) const override;
    const Model& model() const { return model_; }

private:
    std::string name_;
    Model model_;
};

/// Document frequencies over commits only.
MonolithicTfidf baseline_locus(const Corpus& corpus, const TokenizerConfig& cfg = {});
/// Document frequencies over commits and bug reports jointly.
MonolithicTfidf baseline_orca(const Corpus& corpus, const TokenizerConfig& cfg = {});

inline const std::vector<int> kDefaultKs{1, 5, 10};

struct EvalReport {
    std::map<int, double> top_at;
    double mrr = 0.0;
    std::vector<int> ranks;
    std::size_t case_count = 0;

    nlohmann::json to_json() const;
};

/// Top@k and MRR from 1-based culprit ranks. Throws UsageError when empty.
EvalReport summarize_ranks(std::span<const int> ranks, std::span<const int> ks = kDefaultKs);

/// Ranks every case's full candidate pool. Cases run on up to `threads`
/// workers; the report keeps case order. Throws DataError naming a case whose
/// culprit is not among its candidates.
EvalReport evaluate(const Localizer& localizer, std::span<const LabeledCase> cases,
                    std::span<const int> ks = kDefaultKs, unsigned threads = 1);

/// Splits at a chronological point: cases sorted by bug timestamp when every
/// bug has one, input order otherwise. The first floor(n * fraction) cases
/// form the training side.
std::pair<std::vector<LabeledCase>, std::vector<LabeledCase>> split_chronological(std::span<const LabeledCase> cases,
                                                                                  double train_fraction);

// ---------------------------------------------------------------------------
// synthetic benchmarks

/// Per-feature token budgets of generated entities.
struct FeatureProfile {
    int bug_background_len = 4;   ///< "metric" feature of background words
    int bug_noise_len = 0;        ///< "stack_trace" feature; 0 disables it
    int commit_background_len = 8;
    int commit_diff_len = 12;     ///< random framework words per commit
    int decoys = 0;               ///< candidates whose diff mirrors the bug's trace
    int decoy_diff_len = 150;
    int noise_words_per_case = 60;
    int framework_vocab = 120;
    int background_vocab = 50;
    int history_sentences = 0;    ///< per word of each synonym pair
    int history_context = 4;      ///< context words shared by a synonym pair

    static FeatureProfile standard();
    /// Short signal feature plus a long trace that overlaps several decoys.
    static FeatureProfile length_imbalance();
    /// Adds history text where synonym partners share contexts.
    static FeatureProfile synonym();
};

struct SyntheticConfig {
    std::size_t n_cases = 100;
    std::size_t n_candidates = 50;
    std::size_t vocab_size = 2000;
    std::size_t signal_terms_per_commit = 3;
    double noise_rate = 0.0;
    FeatureProfile feature_profile;
    /// (word, partner): bug reports say `partner` where the culprit says `word`.
    std::vector<std::pair<std::string, std::string>> synonym_pairs;
    /// Give every signal word a generated partner.
    bool synonymize_all = false;
    std::uint64_t rng_seed = 7;

    void validate() const;
};

struct SyntheticBenchmark {
    std::vector<LabeledCase> cases;
    /// Extra commits outside every candidate pool (synonym context text).
    std::vector<Commit> history;

    /// Candidates, history and bug reports, as a training pool.
    Corpus training_corpus() const;
};

SyntheticBenchmark gen_synthetic(const SyntheticConfig& cfg);

// ---------------------------------------------------------------------------
// bisect shortcut

struct BisectSummary {
    double median = 0.0; ///< hours
    double mean = 0.0;
};

struct AttributionEstimate {
    double median = 0.0;
    double mean = 0.0;
    /// The median fell back to the bisect median because only summary
    /// statistics of the bisect distribution are known.
    bool median_from_summary = false;
};

/// A ranked-candidate validation step of `step_hours` races the bisect and
/// catches the culprit with probability `p_catch`; a miss costs nothing.
AttributionEstimate attribution_time(double p_catch, double step_hours, const BisectSummary& bisect);

} // namespace culprit
