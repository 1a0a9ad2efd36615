// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "culprit/corpus.hpp"
#include "culprit/embeddings.hpp"
#include "culprit/tokenizer.hpp"
#include "culprit/vectorizer.hpp"

namespace culprit {

/// A trained localization model: everything inference needs.
struct Model {
    Scheme scheme = Scheme::bm25;
    VocabStats stats;
    Bm25Params bm25;
    std::optional<EmbeddingTable> embeddings;
    Tokenizer tokenizer;
    std::string version = "1";

    /// Throws UsageError for an embed model without embeddings or an empty
    /// version string.
    void validate() const;

    Vectorizer vectorizer() const;
};

struct TrainOptions {
    Scheme scheme = Scheme::bm25;
    Bm25Params bm25;
    DocumentUnit document_unit = DocumentUnit::feature;
    TokenizerConfig tokenizer;
    SkipGramConfig skipgram;
    std::string version = "1";
};

/// Unigram counts, vocabulary statistics and (for the embed scheme) word
/// embeddings, all over commits and bug reports jointly.
Model train_model(const Corpus& corpus, const TrainOptions& options);

struct Contribution {
    std::string word;
    double contribution = 0.0;

    bool operator==(const Contribution&) const = default;
};

// Result flags.
inline constexpr const char* kFlagNoFeatures = "no_features";
inline constexpr const char* kFlagZeroVector = "zero_vector";
inline constexpr const char* kFlagDegenerateQuery = "degenerate_query";
inline constexpr const char* kFlagApproximateExplanation = "approximate_explanation";

struct RankedResult {
    std::string commit_id;
    double similarity = 0.0;
    double distance = 1.0; ///< 1 - similarity
    int rank = 0;
    std::vector<std::string> flags;
    std::vector<Contribution> explanation;

    bool operator==(const RankedResult&) const = default;
};

struct LocalizeOptions {
    std::size_t top_k = 10;
    bool explain = false;
};

/// Ranks `candidates` by cosine similarity to `bug`. Ties go to the more
/// recent commit (missing timestamps count as oldest), then to the smaller id.
/// A candidate without features scores 0 and is flagged, not dropped.
std::vector<RankedResult> localize(const Model& model, const BugReport& bug, std::span<const Commit> candidates,
                                   const LocalizeOptions& options = {});

inline constexpr std::size_t kExplanationSize = 20;

/// Exact per-word decomposition of the sparse cosine:
///   contribution(w) = bug(w) * cand(w) / (|bug| |cand|)
/// Descending, truncated to `limit` entries.
std::vector<Contribution> explain_sparse(const SparseVector& bug, const SparseVector& candidate,
                                         std::size_t limit = kExplanationSize);

/// Heuristic attribution for dense vectors: cosine(bug, phi(w)) times the
/// BM25 weight of w in the candidate.
std::vector<Contribution> explain_dense(const DenseVector& bug, const SparseVector& candidate_bm25,
                                        const EmbeddingTable& table, std::size_t limit = kExplanationSize);

/// similarity(rank 1) - similarity(rank 2). Needs at least two results.
double confidence_gap(std::span<const RankedResult> results);

nlohmann::json to_json(const RankedResult& result);

/// One compact JSON record per line, in rank order.
std::string format_results(std::span<const RankedResult> results);

} // namespace culprit
