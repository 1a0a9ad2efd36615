// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"

namespace culprit {

void TokenizerConfig::validate() const {
    if (min_token_len < 1) throw UsageError("min_token_len must be >= 1");
    if (max_split_len < 1) throw UsageError("max_split_len must be >= 1");
}

// ---------------------------------------------------------------------------
// UnigramModel

UnigramModel::UnigramModel(std::map<std::string, std::uint64_t> counts) {
    for (auto it = counts.begin(); it != counts.end();) {
        if (it->second == 0) {
            it = counts.erase(it);
        } else {
            total_ += it->second;
            ++it;
        }
    }
    counts_ = std::move(counts);
}

std::uint64_t UnigramModel::count(std::string_view word) const {
    auto it = counts_.find(std::string(word));
    return it == counts_.end() ? 0 : it->second;
}

double UnigramModel::probability(std::string_view word) const {
    if (total_ == 0) return 0.0;
    return static_cast<double>(count(word)) / static_cast<double>(total_);
}

double UnigramModel::unknown_log_prob() const {
    return total_ == 0 ? 0.0 : -std::log(static_cast<double>(total_));
}

double UnigramModel::segment_score(std::string_view segment) const {
    const auto c = count(segment);
    if (c > 0) return std::log(static_cast<double>(c) / static_cast<double>(total_));
    return unknown_log_prob() - kUnknownPenaltyPerChar * static_cast<double>(segment.size());
}

nlohmann::json UnigramModel::to_json() const {
    return {{"total", total_}, {"counts", counts_}};
}

UnigramModel UnigramModel::from_json(const nlohmann::json& j) {
    try {
        UnigramModel model(j.at("counts").get<std::map<std::string, std::uint64_t>>());
        if (model.total() != j.at("total").get<std::uint64_t>()) {
            throw DataError("unigram model: 'total' does not match the sum of counts");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("unigram model: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// basic tokenization

namespace {

enum class CharClass { sep, lower, upper, digit, other };

CharClass classify(unsigned char ch) {
    if (ch >= 'a' && ch <= 'z') return CharClass::lower;
    if (ch >= 'A' && ch <= 'Z') return CharClass::upper;
    if (ch >= '0' && ch <= '9') return CharClass::digit;
    if (ch >= 0x80) return CharClass::other;
    return CharClass::sep;
}

void emit(std::string_view token, const TokenizerConfig& cfg, std::vector<std::string>& out) {
    if (token.size() < static_cast<std::size_t>(cfg.min_token_len)) return;
    std::string t(token);
    if (cfg.lowercase) {
        std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) {
            return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : static_cast<char>(ch);
        });
    }
    out.push_back(std::move(t));
}

void tokenize_line(std::string_view line, const TokenizerConfig& cfg, std::vector<std::string>& out) {
    std::size_t start = 0;
    bool in_token = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const CharClass cur = classify(static_cast<unsigned char>(line[i]));
        if (cur == CharClass::sep) {
            if (in_token) emit(line.substr(start, i - start), cfg, out);
            in_token = false;
            continue;
        }
        if (!in_token) {
            start = i;
            in_token = true;
            continue;
        }
        const CharClass prev = classify(static_cast<unsigned char>(line[i - 1]));
        const bool digit_boundary = (cur == CharClass::digit) != (prev == CharClass::digit);
        if (digit_boundary || (prev == CharClass::lower && cur == CharClass::upper)) {
            emit(line.substr(start, i - start), cfg, out);
            start = i;
        } else if (cur == CharClass::lower && prev == CharClass::upper && i - start >= 2 &&
                   classify(static_cast<unsigned char>(line[i - 2])) == CharClass::upper) {
            // "HTTPServer": the last capital of an upper run starts the next word
            emit(line.substr(start, i - 1 - start), cfg, out);
            start = i - 1;
        }
    }
    if (in_token) emit(line.substr(start), cfg, out);
}

} // namespace

std::vector<std::string> basic_tokenize(std::span<const std::string> lines, const TokenizerConfig& cfg) {
    std::vector<std::string> tokens;
    for (const auto& line : lines) tokenize_line(line, cfg, tokens);
    return tokens;
}

UnigramModel train_unigram(const Corpus& corpus, const TokenizerConfig& cfg) {
    std::map<std::string, std::uint64_t> counts;
    auto add = [&](const std::vector<Feature>& features) {
        for (const auto& f : features) {
            for (auto& token : basic_tokenize(f.text, cfg)) ++counts[std::move(token)];
        }
    };
    for (const auto& c : corpus.commits) add(c.features);
    for (const auto& b : corpus.bug_reports) add(b.features);
    return UnigramModel(std::move(counts));
}

// ---------------------------------------------------------------------------
// probabilistic splitter

namespace {

struct Cell {
    double score = -std::numeric_limits<double>::infinity();
    int segments = 0;
    std::size_t from = 0;
};

// Split offsets of the best segmentation of word[0, end), in increasing order.
void split_points(const std::vector<Cell>& best, std::size_t end, std::vector<std::size_t>& out) {
    out.clear();
    while (end > 0) {
        const std::size_t from = best[end].from;
        if (from > 0) out.push_back(from);
        end = from;
    }
    std::reverse(out.begin(), out.end());
}

} // namespace

std::vector<std::string> split_word(std::string_view word, const UnigramModel& model,
                                    const TokenizerConfig& cfg) {
    if (word.empty()) return {};
    if (!cfg.enable_split || word.size() > static_cast<std::size_t>(cfg.max_split_len)) {
        return {std::string(word)};
    }

    const std::size_t n = word.size();
    std::vector<Cell> best(n + 1);
    best[0].score = 0.0;
    std::vector<std::size_t> incumbent;
    std::vector<std::size_t> challenger;

    for (std::size_t end = 1; end <= n; ++end) {
        Cell& cell = best[end];
        bool have = false;
        for (std::size_t from = 0; from < end; ++from) {
            const double score = best[from].score + model.segment_score(word.substr(from, end - from));
            const int segments = best[from].segments + 1;
            bool take = !have || score > cell.score;
            if (have && score == cell.score) {
                if (segments != cell.segments) {
                    take = segments < cell.segments;
                } else {
                    split_points(best, cell.from, incumbent);
                    if (cell.from > 0) incumbent.push_back(cell.from);
                    split_points(best, from, challenger);
                    if (from > 0) challenger.push_back(from);
                    take = challenger < incumbent;
                }
            }
            if (take) {
                cell.score = score;
                cell.segments = segments;
                cell.from = from;
                have = true;
            }
        }
    }

    std::vector<std::string> pieces;
    for (std::size_t end = n; end > 0; end = best[end].from) {
        pieces.emplace_back(word.substr(best[end].from, end - best[end].from));
    }
    std::reverse(pieces.begin(), pieces.end());
    return pieces;
}

std::vector<std::string> tokenize_feature(const Feature& feature, const UnigramModel& model,
                                          const TokenizerConfig& cfg) {
    auto tokens = basic_tokenize(feature.text, cfg);
    if (!cfg.enable_split) return tokens;
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& token : tokens) {
        for (auto& piece : split_word(token, model, cfg)) out.push_back(std::move(piece));
    }
    return out;
}

Tokenizer::Tokenizer(UnigramModel model, TokenizerConfig cfg) : model_(std::move(model)), cfg_(cfg) {
    cfg_.validate();
}

} // namespace culprit
