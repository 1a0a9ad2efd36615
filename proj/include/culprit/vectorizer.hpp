// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "culprit/corpus.hpp"
#include "culprit/embeddings.hpp"
#include "culprit/tokenizer.hpp"

namespace culprit {

enum class Scheme { tfidf, bm25, embed };

std::string_view to_string(Scheme scheme);
/// Accepts "tfidf", "bm25" or "embed"; throws UsageError otherwise.
Scheme parse_scheme(std::string_view name);

/// What counts as one document for N, num(w) and the average length.
enum class DocumentUnit { feature, entity };

std::string_view to_string(DocumentUnit unit);
DocumentUnit parse_document_unit(std::string_view name);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const;
    bool operator==(const Bm25Params&) const = default;
};

/// Corpus statistics shared by every vectorization scheme.
struct VocabStats {
    std::map<std::string, std::int64_t> doc_freq; ///< keys form the vocabulary
    std::int64_t num_docs = 0;
    double avg_feature_len = 0.0; ///< mean token count per document
    DocumentUnit unit = DocumentUnit::feature;

    std::int64_t df(std::string_view word) const;
    bool contains(std::string_view word) const { return df(word) > 0; }

    nlohmann::json to_json() const;
    static VocabStats from_json(const nlohmann::json& j);

    bool operator==(const VocabStats&) const = default;
};

/// Each element of `documents` is one tokenized document.
VocabStats build_stats(std::span<const std::vector<std::string>> documents,
                       DocumentUnit unit = DocumentUnit::feature);

/// Statistics over all commits and bug reports of `corpus`. With
/// DocumentUnit::entity the features of an entity are concatenated first.
VocabStats build_stats(const Corpus& corpus, const Tokenizer& tokenizer,
                       DocumentUnit unit = DocumentUnit::feature);

struct SparseVector {
    std::map<std::string, double> entries;

    double get(std::string_view word) const;
    bool empty() const { return entries.empty(); }
    double norm() const;

    bool operator==(const SparseVector&) const = default;
};

double dot(const SparseVector& u, const SparseVector& v);

// Term weighting, natural log throughout.
double tfidf_tf(std::int64_t freq);
double tfidf_idf(std::int64_t num_docs, std::int64_t doc_freq);
double bm25_tf(std::int64_t freq, double len, double avg_len, const Bm25Params& params);
double bm25_idf(std::int64_t num_docs, std::int64_t doc_freq);

/// Words missing from `stats` are ignored. Throws DataError("empty model")
/// when stats.num_docs == 0.
SparseVector tfidf_vectorize(std::span<const std::string> tokens, const VocabStats& stats);
SparseVector bm25_vectorize(std::span<const std::string> tokens, const VocabStats& stats,
                            const Bm25Params& params);

/// Sum over distinct words of phi(w) * bm25 weight(w). Words without a vector
/// or without statistics are skipped.
DenseVector embed_vectorize(std::span<const std::string> tokens, const VocabStats& stats,
                            const Bm25Params& params, const EmbeddingTable& table);

using Vector = std::variant<SparseVector, DenseVector>;

double cosine(const SparseVector& u, const SparseVector& v);
double cosine(const DenseVector& u, const DenseVector& v);
/// Throws UsageError when one vector is sparse and the other dense.
double cosine(const Vector& u, const Vector& v);

bool is_zero(const Vector& v);

/// Applies one scheme to tokenized features. Holds non-owning references to
/// the statistics and the embedding table.
class Vectorizer {
public:
    Vectorizer(Scheme scheme, const VocabStats& stats, Bm25Params params = {},
               const EmbeddingTable* table = nullptr);

    Scheme scheme() const { return scheme_; }

    Vector vectorize(std::span<const std::string> tokens) const;

    /// Mean of the per-feature vectors; empty features count in the mean.
    /// Throws DataError("entity has no features") for an empty span.
    Vector vectorize_complex(std::span<const std::vector<std::string>> feature_tokens) const;

private:
    Scheme scheme_;
    const VocabStats* stats_;
    Bm25Params params_;
    const EmbeddingTable* table_;
};

/// Tokenizes each feature of an entity.
std::vector<std::vector<std::string>> tokenize_features(std::span<const Feature> features,
                                                        const Tokenizer& tokenizer);

} // namespace culprit
