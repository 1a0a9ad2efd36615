// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "culprit/corpus.hpp"
#include "culprit/tokenizer.hpp"

namespace culprit {

using DenseVector = std::vector<float>;

/// Character n-gram settings. N-grams are taken from "<word>" and hashed
/// (32-bit FNV-1a) into a fixed number of buckets.
struct SubwordConfig {
    int min_n = 3;
    int max_n = 6;
    std::uint32_t buckets = 20000;

    void validate() const;
    bool operator==(const SubwordConfig&) const = default;
};

std::vector<std::uint32_t> subword_buckets(std::string_view word, const SubwordConfig& cfg);

/// Word -> dense vector map (the published input vectors of the trainer).
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(int dim, std::vector<std::string> words, std::vector<float> rows,
                   std::optional<SubwordConfig> subword = std::nullopt,
                   std::vector<float> subword_rows = {});

    int dim() const { return dim_; }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    const std::optional<SubwordConfig>& subword() const { return subword_; }

    std::optional<std::size_t> index_of(std::string_view word) const;
    bool contains(std::string_view word) const { return index_of(word).has_value(); }

    std::span<const float> row(std::size_t index) const;
    std::span<float> mutable_row(std::size_t index);
    std::span<const float> subword_row(std::uint32_t bucket) const;
    std::span<float> mutable_subword_row(std::uint32_t bucket);

    /// phi(word). Without subwords this is the stored row. With subwords it is
    /// the mean of the word row (when present) and its n-gram rows, so unseen
    /// words still resolve. nullopt when nothing is known about the word.
    std::optional<DenseVector> lookup(std::string_view word) const;

    nlohmann::json header_json() const;
    void save(const std::filesystem::path& header, const std::filesystem::path& payload) const;
    static EmbeddingTable load(const std::filesystem::path& header, const std::filesystem::path& payload);

    /// Bitwise equality of words, rows and subword rows.
    bool operator==(const EmbeddingTable& other) const;

private:
    int dim_ = 0;
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> rows_;
    std::optional<SubwordConfig> subword_;
    std::vector<float> subword_rows_;
};

struct SkipGramConfig {
    int dim = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.05;
    int min_count = 2;
    std::optional<SubwordConfig> subwords;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct TrainingReport {
    std::size_t vocabulary = 0;
    std::size_t tokens = 0;
    /// Mean per-pair negative-sampling loss of each epoch.
    std::vector<double> epoch_loss;
};

/// Skip-gram with negative sampling over `sentences` (one tokenized feature
/// each; context windows never cross sentences). Single-threaded and
/// bitwise-reproducible for a given rng_seed and SIMD variant.
EmbeddingTable train_embeddings(std::span<const std::vector<std::string>> sentences,
                                const SkipGramConfig& cfg, TrainingReport* report = nullptr);

EmbeddingTable train_embeddings(const Corpus& corpus, const Tokenizer& tokenizer,
                                const SkipGramConfig& cfg, TrainingReport* report = nullptr);

// Negative-sampling objective for one (context, center) pair:
//   loss = -log s(in . out_center) - sum_k log s(-in . out_neg_k)
// with exact gradients for every vector involved (one slot per negative, so a
// repeated negative word gets one gradient per draw).
struct SgnsResult {
    double loss = 0.0;
    std::vector<double> grad_context_in;
    std::vector<double> grad_center_out;
    std::vector<std::vector<double>> grad_negative_out;
};

SgnsResult sgns_loss_and_grad(std::span<const double> context_in, std::span<const double> center_out,
                              std::span<const std::vector<double>> negative_out);

/// In-place SGD step on float vectors: the trainer's hot path. Applies
/// -lr * gradient (gradients evaluated before any update) and returns the loss.
/// `scratch` must have the same size as `context_in`; on return it holds the
/// delta that was added to `context_in`.
double sgns_step(std::span<float> context_in, std::span<float> center_out,
                 std::span<const std::span<float>> negative_out, float lr, std::span<float> scratch);

/// Top-k words by cosine to phi(word), excluding the word itself; descending
/// with ties broken by word. Throws DataError("out of vocabulary") when the
/// query cannot be resolved.
std::vector<std::pair<std::string, double>> nearest_neighbors(std::string_view word,
                                                              const EmbeddingTable& table, std::size_t k);

/// Cosine of two dense vectors; 0 when either norm is 0.
double dense_cosine(std::span<const float> u, std::span<const float> v);

} // namespace culprit
