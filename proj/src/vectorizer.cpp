// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"
#include "culprit/simd.hpp"

namespace culprit {

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
    case Scheme::tfidf: return "tfidf";
    case Scheme::bm25: return "bm25";
    case Scheme::embed: return "embed";
    }
    return "bm25";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "tfidf") return Scheme::tfidf;
    if (name == "bm25") return Scheme::bm25;
    if (name == "embed") return Scheme::embed;
    throw UsageError("unknown scheme '" + std::string(name) + "' (expected tfidf, bm25 or embed)");
}

std::string_view to_string(DocumentUnit unit) {
    return unit == DocumentUnit::entity ? "entity" : "feature";
}

DocumentUnit parse_document_unit(std::string_view name) {
    if (name == "feature") return DocumentUnit::feature;
    if (name == "entity") return DocumentUnit::entity;
    throw UsageError("unknown document unit '" + std::string(name) + "' (expected feature or entity)");
}

void Bm25Params::validate() const {
    if (!(k1 >= 0.0) || !std::isfinite(k1)) throw UsageError("bm25 k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) throw UsageError("bm25 b must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// VocabStats

std::int64_t VocabStats::df(std::string_view word) const {
    auto it = doc_freq.find(std::string(word));
    return it == doc_freq.end() ? 0 : it->second;
}

nlohmann::json VocabStats::to_json() const {
    return {{"num_docs", num_docs},
            {"avg_feature_len", avg_feature_len},
            {"document_unit", to_string(unit)},
            {"doc_freq", doc_freq}};
}

VocabStats VocabStats::from_json(const nlohmann::json& j) {
    VocabStats stats;
    try {
        stats.num_docs = j.at("num_docs").get<std::int64_t>();
        stats.avg_feature_len = j.at("avg_feature_len").get<double>();
        stats.doc_freq = j.at("doc_freq").get<std::map<std::string, std::int64_t>>();
        if (auto it = j.find("document_unit"); it != j.end()) {
            stats.unit = parse_document_unit(it->get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("vocab stats: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("vocab stats: ") + e.what());
    }
    for (const auto& [word, df] : stats.doc_freq) {
        if (df < 1 || df > stats.num_docs) {
            throw DataError("vocab stats: doc_freq of '" + word + "' outside [1, num_docs]");
        }
    }
    return stats;
}

VocabStats build_stats(std::span<const std::vector<std::string>> documents, DocumentUnit unit) {
    VocabStats stats;
    stats.unit = unit;
    stats.num_docs = static_cast<std::int64_t>(documents.size());
    std::size_t total_len = 0;
    std::set<std::string_view> seen;
    for (const auto& doc : documents) {
        total_len += doc.size();
        seen.clear();
        for (const auto& w : doc) {
            if (seen.insert(w).second) ++stats.doc_freq[w];
        }
    }
    if (!documents.empty()) {
        stats.avg_feature_len = static_cast<double>(total_len) / static_cast<double>(documents.size());
    }
    return stats;
}

VocabStats build_stats(const Corpus& corpus, const Tokenizer& tokenizer, DocumentUnit unit) {
    std::vector<std::vector<std::string>> documents;
    auto add = [&](const std::vector<Feature>& features) {
        if (unit == DocumentUnit::feature) {
            for (const auto& f : features) documents.push_back(tokenizer(f));
            return;
        }
        std::vector<std::string> merged;
        for (const auto& f : features) {
            auto tokens = tokenizer(f);
            merged.insert(merged.end(), std::make_move_iterator(tokens.begin()),
                          std::make_move_iterator(tokens.end()));
        }
        documents.push_back(std::move(merged));
    };
    for (const auto& c : corpus.commits) add(c.features);
    for (const auto& b : corpus.bug_reports) add(b.features);
    return build_stats(documents, unit);
}

// ---------------------------------------------------------------------------
// sparse vectors

double SparseVector::get(std::string_view word) const {
    auto it = entries.find(std::string(word));
    return it == entries.end() ? 0.0 : it->second;
}

double SparseVector::norm() const {
    double sq = 0.0;
    for (const auto& [w, x] : entries) sq += x * x;
    return std::sqrt(sq);
}

double dot(const SparseVector& u, const SparseVector& v) {
    double sum = 0.0;
    auto a = u.entries.begin();
    auto b = v.entries.begin();
    while (a != u.entries.end() && b != v.entries.end()) {
        const int c = a->first.compare(b->first);
        if (c < 0) {
            ++a;
        } else if (c > 0) {
            ++b;
        } else {
            sum += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return sum;
}

// ---------------------------------------------------------------------------
// weighting

double tfidf_tf(std::int64_t freq) {
    return freq <= 0 ? 0.0 : 1.0 + std::log(static_cast<double>(freq));
}

double tfidf_idf(std::int64_t num_docs, std::int64_t doc_freq) {
    return std::log(static_cast<double>(num_docs) / static_cast<double>(doc_freq));
}

double bm25_tf(std::int64_t freq, double len, double avg_len, const Bm25Params& params) {
    const double f = static_cast<double>(freq);
    const double rel = avg_len > 0.0 ? len / avg_len : 1.0;
    return f * (params.k1 + 1.0) / (f + params.k1 * (1.0 - params.b + params.b * rel));
}

double bm25_idf(std::int64_t num_docs, std::int64_t doc_freq) {
    const double n = static_cast<double>(num_docs);
    const double df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

namespace {

void require_model(const VocabStats& stats) {
    if (stats.num_docs <= 0) throw DataError("empty model");
}

std::map<std::string_view, std::int64_t> frequencies(std::span<const std::string> tokens) {
    std::map<std::string_view, std::int64_t> freq;
    for (const auto& t : tokens) ++freq[t];
    return freq;
}

} // namespace

SparseVector tfidf_vectorize(std::span<const std::string> tokens, const VocabStats& stats) {
    require_model(stats);
    SparseVector out;
    for (const auto& [word, freq] : frequencies(tokens)) {
        const auto df = stats.df(word);
        if (df == 0) continue;
        const double weight = tfidf_tf(freq) * tfidf_idf(stats.num_docs, df);
        if (weight != 0.0) out.entries.emplace(word, weight);
    }
    return out;
}

SparseVector bm25_vectorize(std::span<const std::string> tokens, const VocabStats& stats,
                            const Bm25Params& params) {
    require_model(stats);
    SparseVector out;
    const double len = static_cast<double>(tokens.size());
    for (const auto& [word, freq] : frequencies(tokens)) {
        const auto df = stats.df(word);
        if (df == 0) continue;
        const double weight =
            bm25_tf(freq, len, stats.avg_feature_len, params) * bm25_idf(stats.num_docs, df);
        if (weight != 0.0) out.entries.emplace(word, weight);
    }
    return out;
}

DenseVector embed_vectorize(std::span<const std::string> tokens, const VocabStats& stats,
                            const Bm25Params& params, const EmbeddingTable& table) {
    require_model(stats);
    if (table.dim() <= 0) throw UsageError("embedding table has no dimensions");
    DenseVector out(static_cast<std::size_t>(table.dim()), 0.0f);
    for (const auto& [word, weight] : bm25_vectorize(tokens, stats, params).entries) {
        if (auto phi = table.lookup(word)) simd::axpy(static_cast<float>(weight), *phi, out);
    }
    return out;
}

// ---------------------------------------------------------------------------
// similarity

double cosine(const SparseVector& u, const SparseVector& v) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double cosine(const DenseVector& u, const DenseVector& v) { return dense_cosine(u, v); }

double cosine(const Vector& u, const Vector& v) {
    if (u.index() != v.index()) throw UsageError("cosine of a sparse and a dense vector");
    if (const auto* su = std::get_if<SparseVector>(&u)) return cosine(*su, std::get<SparseVector>(v));
    return cosine(std::get<DenseVector>(u), std::get<DenseVector>(v));
}

bool is_zero(const Vector& v) {
    if (const auto* s = std::get_if<SparseVector>(&v)) return s->empty();
    const auto& d = std::get<DenseVector>(v);
    return std::all_of(d.begin(), d.end(), [](float x) { return x == 0.0f; });
}

// ---------------------------------------------------------------------------
// Vectorizer

Vectorizer::Vectorizer(Scheme scheme, const VocabStats& stats, Bm25Params params, const EmbeddingTable* table)
    : scheme_(scheme), stats_(&stats), params_(params), table_(table) {
    params_.validate();
    if (scheme_ == Scheme::embed && table_ == nullptr) {
        throw UsageError("the embed scheme requires an embedding table");
    }
}

Vector Vectorizer::vectorize(std::span<const std::string> tokens) const {
    switch (scheme_) {
    case Scheme::tfidf: return tfidf_vectorize(tokens, *stats_);
    case Scheme::bm25: return bm25_vectorize(tokens, *stats_, params_);
    case Scheme::embed: return embed_vectorize(tokens, *stats_, params_, *table_);
    }
    return SparseVector{};
}

Vector Vectorizer::vectorize_complex(std::span<const std::vector<std::string>> feature_tokens) const {
    if (feature_tokens.empty()) throw DataError("entity has no features");
    const double n = static_cast<double>(feature_tokens.size());

    if (scheme_ != Scheme::embed) {
        std::map<std::string, double> sum;
        for (const auto& tokens : feature_tokens) {
            auto v = std::get<SparseVector>(vectorize(tokens));
            for (auto& [w, x] : v.entries) sum[w] += x;
        }
        SparseVector mean;
        for (auto& [w, x] : sum) {
            if (x != 0.0) mean.entries.emplace(w, x / n);
        }
        return mean;
    }

    DenseVector mean(static_cast<std::size_t>(table_->dim()), 0.0f);
    for (const auto& tokens : feature_tokens) {
        auto v = std::get<DenseVector>(vectorize(tokens));
        simd::axpy(1.0f, v, mean);
    }
    simd::scale(static_cast<float>(1.0 / n), mean);
    return mean;
}

std::vector<std::vector<std::string>> tokenize_features(std::span<const Feature> features,
                                                        const Tokenizer& tokenizer) {
    std::vector<std::vector<std::string>> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(tokenizer(f));
    return out;
}

} // namespace culprit
