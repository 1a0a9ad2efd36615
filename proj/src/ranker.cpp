// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/ranker.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"

namespace culprit {

void Model::validate() const {
    if (version.empty()) throw UsageError("model version must be non-empty");
    if (scheme == Scheme::embed && !embeddings) throw UsageError("embed scheme requires an embedding table");
    bm25.validate();
    tokenizer.config().validate();
}

Vectorizer Model::vectorizer() const {
    return Vectorizer(scheme, stats, bm25, embeddings ? &*embeddings : nullptr);
}

Model train_model(const Corpus& corpus, const TrainOptions& options) {
    options.tokenizer.validate();
    options.bm25.validate();
    Model model;
    model.scheme = options.scheme;
    model.bm25 = options.bm25;
    model.version = options.version;
    model.tokenizer = Tokenizer(train_unigram(corpus, options.tokenizer), options.tokenizer);
    model.stats = build_stats(corpus, model.tokenizer, options.document_unit);
    if (options.scheme == Scheme::embed) {
        model.embeddings = train_embeddings(corpus, model.tokenizer, options.skipgram);
    }
    model.validate();
    return model;
}

namespace {

struct Scored {
    const Commit* commit = nullptr;
    double similarity = 0.0;
    std::vector<std::string> flags;
    Vector vector;
};

bool ranks_before(const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    const auto& ta = a.commit->timestamp;
    const auto& tb = b.commit->timestamp;
    if (ta.has_value() != tb.has_value()) return ta.has_value();
    if (ta && *ta != *tb) return *ta > *tb;
    return a.commit->id < b.commit->id;
}

std::vector<Contribution> top_contributions(std::vector<Contribution> out, std::size_t limit) {
    std::sort(out.begin(), out.end(), [](const Contribution& a, const Contribution& b) {
        return a.contribution != b.contribution ? a.contribution > b.contribution : a.word < b.word;
    });
    if (out.size() > limit) out.resize(limit);
    return out;
}

} // namespace

std::vector<RankedResult> localize(const Model& model, const BugReport& bug, std::span<const Commit> candidates,
                                   const LocalizeOptions& options) {
    if (candidates.empty()) throw DataError("empty candidate list");
    if (options.top_k < 1) throw UsageError("top_k must be >= 1");

    const Vectorizer vectorizer = model.vectorizer();
    const Vector bug_vector = vectorizer.vectorize_complex(tokenize_features(bug.features, model.tokenizer));
    const bool degenerate = is_zero(bug_vector);

    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const auto& commit : candidates) {
        Scored s;
        s.commit = &commit;
        if (commit.features.empty()) {
            s.flags.emplace_back(kFlagNoFeatures);
        } else {
            s.vector = vectorizer.vectorize_complex(tokenize_features(commit.features, model.tokenizer));
            if (is_zero(s.vector)) s.flags.emplace_back(kFlagZeroVector);
            s.similarity = cosine(bug_vector, s.vector);
        }
        if (degenerate) s.flags.emplace_back(kFlagDegenerateQuery);
        scored.push_back(std::move(s));
    }

    const std::size_t keep = std::min(options.top_k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), ranks_before);

    std::vector<RankedResult> results;
    results.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        Scored& s = scored[i];
        RankedResult r;
        r.commit_id = s.commit->id;
        r.similarity = s.similarity;
        r.distance = 1.0 - s.similarity;
        r.rank = static_cast<int>(i + 1);
        r.flags = std::move(s.flags);
        if (options.explain && !s.commit->features.empty()) {
            if (model.scheme == Scheme::embed) {
                // explain against the candidate's BM25 weights
                const Vectorizer bm25(Scheme::bm25, model.stats, model.bm25);
                const auto weights = std::get<SparseVector>(
                    bm25.vectorize_complex(tokenize_features(s.commit->features, model.tokenizer)));
                r.explanation = explain_dense(std::get<DenseVector>(bug_vector), weights, *model.embeddings);
                r.flags.emplace_back(kFlagApproximateExplanation);
            } else {
                r.explanation = explain_sparse(std::get<SparseVector>(bug_vector), std::get<SparseVector>(s.vector));
            }
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<Contribution> explain_sparse(const SparseVector& bug, const SparseVector& candidate, std::size_t limit) {
    const double denom = bug.norm() * candidate.norm();
    if (denom == 0.0) return {};
    std::vector<Contribution> out;
    for (const auto& [word, weight] : bug.entries) {
        const double other = candidate.get(word);
        if (other != 0.0) out.push_back({word, weight * other / denom});
    }
    return top_contributions(std::move(out), limit);
}

std::vector<Contribution> explain_dense(const DenseVector& bug, const SparseVector& candidate_bm25,
                                        const EmbeddingTable& table, std::size_t limit) {
    std::vector<Contribution> out;
    for (const auto& [word, weight] : candidate_bm25.entries) {
        const auto phi = table.lookup(word);
        if (!phi) continue;
        const double c = dense_cosine(bug, *phi) * weight;
        if (c != 0.0) out.push_back({word, c});
    }
    return top_contributions(std::move(out), limit);
}

double confidence_gap(std::span<const RankedResult> results) {
    if (results.size() < 2) throw UsageError("confidence gap needs at least two results");
    return results[0].similarity - results[1].similarity;
}

nlohmann::json to_json(const RankedResult& result) {
    nlohmann::json explanation = nlohmann::json::array();
    for (const auto& c : result.explanation) {
        explanation.push_back({{"word", c.word}, {"contribution", c.contribution}});
    }
    return {{"commit_id", result.commit_id},
            {"rank", result.rank},
            {"similarity", result.similarity},
            {"distance", result.distance},
            {"flags", result.flags},
            {"explanation", std::move(explanation)}};
}

std::string format_results(std::span<const RankedResult> results) {
    std::string out;
    for (const auto& r : results) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

} // namespace culprit
