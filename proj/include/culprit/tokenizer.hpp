// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "culprit/corpus.hpp"

namespace culprit {

struct TokenizerConfig {
    bool lowercase = true;
    int min_token_len = 2;
    /// Words longer than this are never segmented.
    int max_split_len = 40;
    bool enable_split = true;

    /// Throws UsageError when a bound is out of range.
    void validate() const;

    bool operator==(const TokenizerConfig&) const = default;
};

/// Unigram word counts used by the identifier splitter.
class UnigramModel {
public:
    /// Per-character penalty applied to substrings missing from the counts.
    static constexpr double kUnknownPenaltyPerChar = 2.0;

    UnigramModel() = default;
    /// Zero counts are dropped; a zero-count word is scored as unknown.
    explicit UnigramModel(std::map<std::string, std::uint64_t> counts);

    const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
    std::uint64_t total() const { return total_; }
    std::uint64_t count(std::string_view word) const;

    /// count(w)/total, or 0 when w is unknown.
    double probability(std::string_view word) const;

    /// log(1/total), or 0 for an empty model. The unknown score of a
    /// substring s is unknown_log_prob() - kUnknownPenaltyPerChar * |s|.
    double unknown_log_prob() const;

    /// Score of one segment: log Pr(s) if known, else the unknown score.
    double segment_score(std::string_view segment) const;

    nlohmann::json to_json() const;
    static UnigramModel from_json(const nlohmann::json& j);

    bool operator==(const UnigramModel&) const = default;

private:
    std::map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Splits raw lines on non-alphanumerics, letter/digit boundaries,
/// underscores and CamelCase humps ("HTTPServer" -> HTTP, Server). Bytes of
/// multi-byte UTF-8 sequences are treated as caseless letters.
std::vector<std::string> basic_tokenize(std::span<const std::string> lines, const TokenizerConfig& cfg);

/// Counts basic tokens over every feature of every commit and bug report.
UnigramModel train_unigram(const Corpus& corpus, const TokenizerConfig& cfg);

/// Most likely segmentation of `word` under `model`: maximizes the
/// left-to-right sum of segment scores. Ties go to fewer segments, then to the
/// lexicographically smallest sequence of split offsets.
std::vector<std::string> split_word(std::string_view word, const UnigramModel& model,
                                    const TokenizerConfig& cfg);

std::vector<std::string> tokenize_feature(const Feature& feature, const UnigramModel& model,
                                          const TokenizerConfig& cfg);

/// Bundles a unigram model with its config for repeated use.
class Tokenizer {
public:
    Tokenizer() = default;
    Tokenizer(UnigramModel model, TokenizerConfig cfg);

    std::vector<std::string> operator()(const Feature& feature) const {
        return tokenize_feature(feature, model_, cfg_);
    }

    const UnigramModel& model() const { return model_; }
    const TokenizerConfig& config() const { return cfg_; }

private:
    UnigramModel model_;
    TokenizerConfig cfg_;
};

} // namespace culprit
