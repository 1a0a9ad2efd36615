// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"
#include "culprit/simd.hpp"

namespace culprit {

void SubwordConfig::validate() const {
    if (min_n < 1 || max_n < min_n) throw UsageError("subword n-gram range must satisfy 1 <= min_n <= max_n");
    if (buckets == 0) throw UsageError("subword bucket count must be positive");
}

std::vector<std::uint32_t> subword_buckets(std::string_view word, const SubwordConfig& cfg) {
    const std::string padded = "<" + std::string(word) + ">";
    std::vector<std::uint32_t> out;
    for (int n = cfg.min_n; n <= cfg.max_n; ++n) {
        if (static_cast<std::size_t>(n) > padded.size()) break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= padded.size(); ++i) {
            std::uint32_t h = 2166136261u;
            for (std::size_t j = i; j < i + static_cast<std::size_t>(n); ++j) {
                h ^= static_cast<std::uint32_t>(static_cast<unsigned char>(padded[j]));
                h *= 16777619u;
            }
            out.push_back(h % cfg.buckets);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(int dim, std::vector<std::string> words, std::vector<float> rows,
                               std::optional<SubwordConfig> subword, std::vector<float> subword_rows)
    : dim_(dim), words_(std::move(words)), rows_(std::move(rows)), subword_(subword),
      subword_rows_(std::move(subword_rows)) {
    if (dim_ < 1) throw UsageError("embedding dimension must be >= 1");
    const auto d = static_cast<std::size_t>(dim_);
    if (rows_.size() != words_.size() * d) throw DataError("embedding rows do not match word count");
    if (subword_) {
        subword_->validate();
        if (subword_rows_.size() != std::size_t{subword_->buckets} * d) {
            throw DataError("subword rows do not match bucket count");
        }
    } else if (!subword_rows_.empty()) {
        throw DataError("subword rows given without a subword config");
    }
    if (!std::all_of(rows_.begin(), rows_.end(), [](float x) { return std::isfinite(x); }) ||
        !std::all_of(subword_rows_.begin(), subword_rows_.end(), [](float x) { return std::isfinite(x); })) {
        throw DataError("embedding table holds non-finite values");
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], i).second) throw DataError("duplicate embedding word '" + words_[i] + "'");
    }
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> EmbeddingTable::row(std::size_t index) const {
    const auto d = static_cast<std::size_t>(dim_);
    return {rows_.data() + index * d, d};
}

std::span<float> EmbeddingTable::mutable_row(std::size_t index) {
    const auto d = static_cast<std::size_t>(dim_);
    return {rows_.data() + index * d, d};
}

std::span<const float> EmbeddingTable::subword_row(std::uint32_t bucket) const {
    const auto d = static_cast<std::size_t>(dim_);
    return {subword_rows_.data() + bucket * d, d};
}

std::span<float> EmbeddingTable::mutable_subword_row(std::uint32_t bucket) {
    const auto d = static_cast<std::size_t>(dim_);
    return {subword_rows_.data() + bucket * d, d};
}

std::optional<DenseVector> EmbeddingTable::lookup(std::string_view word) const {
    const auto idx = index_of(word);
    if (!subword_) {
        if (!idx) return std::nullopt;
        auto r = row(*idx);
        return DenseVector(r.begin(), r.end());
    }
    const auto buckets = subword_buckets(word, *subword_);
    if (!idx && buckets.empty()) return std::nullopt;
    DenseVector out(static_cast<std::size_t>(dim_), 0.0f);
    std::size_t parts = 0;
    if (idx) {
        simd::axpy(1.0f, row(*idx), out);
        ++parts;
    }
    for (auto b : buckets) {
        simd::axpy(1.0f, subword_row(b), out);
        ++parts;
    }
    simd::scale(1.0f / static_cast<float>(parts), out);
    return out;
}

nlohmann::json EmbeddingTable::header_json() const {
    nlohmann::json sub = nullptr;
    if (subword_) sub = {{"min_n", subword_->min_n}, {"max_n", subword_->max_n}, {"buckets", subword_->buckets}};
    return {{"dim", dim_}, {"words", words_}, {"subword", sub}};
}

namespace {

void write_floats(std::ostream& out, const std::vector<float>& values) {
    for (float v : values) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                  static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
}

std::vector<float> read_floats(std::istream& in, std::size_t count, const std::string& what) {
    std::vector<float> values(count);
    unsigned char bytes[4];
    for (std::size_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DataError(what + ": payload is truncated");
        const std::uint32_t bits = std::uint32_t{bytes[0]} | (std::uint32_t{bytes[1]} << 8) |
                                   (std::uint32_t{bytes[2]} << 16) | (std::uint32_t{bytes[3]} << 24);
        values[i] = std::bit_cast<float>(bits);
    }
    return values;
}

} // namespace

void EmbeddingTable::save(const std::filesystem::path& header, const std::filesystem::path& payload) const {
    {
        std::ofstream out(header);
        if (!out) throw DataError(header.string() + ": cannot write");
        out << header_json().dump() << '\n';
    }
    std::ofstream out(payload, std::ios::binary);
    if (!out) throw DataError(payload.string() + ": cannot write");
    write_floats(out, rows_);
    write_floats(out, subword_rows_);
    if (!out) throw DataError(payload.string() + ": write failed");
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& header, const std::filesystem::path& payload) {
    nlohmann::json h;
    {
        std::ifstream in(header);
        if (!in) throw DataError(header.string() + ": cannot open file");
        try {
            in >> h;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(header.string() + ": " + e.what());
        }
    }
    int dim = 0;
    std::vector<std::string> words;
    std::optional<SubwordConfig> sub;
    try {
        dim = h.at("dim").get<int>();
        words = h.at("words").get<std::vector<std::string>>();
        if (const auto& s = h.at("subword"); !s.is_null()) {
            sub = SubwordConfig{s.at("min_n").get<int>(), s.at("max_n").get<int>(), s.at("buckets").get<std::uint32_t>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(header.string() + ": " + e.what());
    }
    if (dim < 1) throw DataError(header.string() + ": 'dim' must be >= 1");

    std::ifstream in(payload, std::ios::binary);
    if (!in) throw DataError(payload.string() + ": cannot open file");
    const auto d = static_cast<std::size_t>(dim);
    auto rows = read_floats(in, words.size() * d, payload.string());
    std::vector<float> sub_rows;
    if (sub) sub_rows = read_floats(in, std::size_t{sub->buckets} * d, payload.string());
    if (in.peek() != std::char_traits<char>::eof()) throw DataError(payload.string() + ": trailing bytes in payload");
    return EmbeddingTable(dim, std::move(words), std::move(rows), sub, std::move(sub_rows));
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
    auto same_bits = [](const std::vector<float>& a, const std::vector<float>& b) {
        return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
    };
    return dim_ == other.dim_ && words_ == other.words_ && subword_ == other.subword_ &&
           same_bits(rows_, other.rows_) && same_bits(subword_rows_, other.subword_rows_);
}

// ---------------------------------------------------------------------------
// objective

void SkipGramConfig::validate() const {
    if (dim < 1) throw UsageError("embedding dim must be >= 1");
    if (window < 1) throw UsageError("window must be >= 1");
    if (negatives < 1) throw UsageError("negatives must be >= 1");
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
    if (min_count < 1) throw UsageError("min_count must be >= 1");
    if (subwords) subwords->validate();
}

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow
double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

SgnsResult sgns_loss_and_grad(std::span<const double> context_in, std::span<const double> center_out,
                              std::span<const std::vector<double>> negative_out) {
    const std::size_t d = context_in.size();
    if (center_out.size() != d) throw UsageError("sgns: vector dimensions differ");
    SgnsResult r;
    r.grad_context_in.assign(d, 0.0);
    r.grad_center_out.assign(d, 0.0);

    // positive pair: d/dx of -log s(x) is -(1 - s(x))
    const double fp = dot(context_in, center_out);
    r.loss = -log_sigmoid(fp);
    const double gp = -(1.0 - sigmoid(fp));
    for (std::size_t i = 0; i < d; ++i) {
        r.grad_context_in[i] += gp * center_out[i];
        r.grad_center_out[i] = gp * context_in[i];
    }
    // negatives: d/dx of -log s(-x) is s(x)
    for (const auto& neg : negative_out) {
        if (neg.size() != d) throw UsageError("sgns: vector dimensions differ");
        const double fn = dot(context_in, neg);
        r.loss -= log_sigmoid(-fn);
        const double gn = sigmoid(fn);
        std::vector<double> g(d);
        for (std::size_t i = 0; i < d; ++i) {
            r.grad_context_in[i] += gn * neg[i];
            g[i] = gn * context_in[i];
        }
        r.grad_negative_out.push_back(std::move(g));
    }
    return r;
}

double sgns_step(std::span<float> context_in, std::span<float> center_out,
                 std::span<const std::span<float>> negative_out, float lr, std::span<float> scratch) {
    std::fill(scratch.begin(), scratch.end(), 0.0f);

    const double fp = simd::dot(context_in, center_out);
    double loss = -log_sigmoid(fp);
    float g = lr * static_cast<float>(1.0 - sigmoid(fp));
    simd::axpy(g, center_out, scratch);
    simd::axpy(g, context_in, center_out);

    for (const auto& neg : negative_out) {
        const double fn = simd::dot(context_in, neg);
        loss -= log_sigmoid(-fn);
        g = -lr * static_cast<float>(sigmoid(fn));
        simd::axpy(g, neg, scratch);
        simd::axpy(g, context_in, neg);
    }
    simd::axpy(1.0f, scratch, context_in);
    return loss;
}

// ---------------------------------------------------------------------------
// training

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace

EmbeddingTable train_embeddings(std::span<const std::vector<std::string>> sentences, const SkipGramConfig& cfg,
                                TrainingReport* report) {
    cfg.validate();

    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& s : sentences) {
        for (const auto& w : s) ++counts[w];
    }
    std::vector<std::pair<std::string, std::size_t>> vocab;
    for (auto& [w, c] : counts) {
        if (c >= static_cast<std::size_t>(cfg.min_count)) vocab.emplace_back(w, c);
    }
    if (vocab.empty()) throw DataError("nothing to train");
    std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    std::vector<std::string> words;
    std::unordered_map<std::string_view, std::uint32_t> ids;
    words.reserve(vocab.size());
    for (const auto& [w, c] : vocab) words.push_back(w);
    for (std::uint32_t i = 0; i < words.size(); ++i) ids.emplace(words[i], i);

    std::vector<std::vector<std::uint32_t>> corpus;
    std::size_t total_tokens = 0;
    for (const auto& s : sentences) {
        std::vector<std::uint32_t> ids_in_sentence;
        for (const auto& w : s) {
            if (auto it = ids.find(w); it != ids.end()) ids_in_sentence.push_back(it->second);
        }
        total_tokens += ids_in_sentence.size();
        if (ids_in_sentence.size() >= 2) corpus.push_back(std::move(ids_in_sentence));
    }

    // unigram^0.75 cumulative distribution for negative draws
    std::vector<double> cdf(vocab.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
        cdf[i] = acc;
    }

    const auto d = static_cast<std::size_t>(cfg.dim);
    Rng rng(cfg.rng_seed);
    const double bound = 0.5 / static_cast<double>(cfg.dim);
    auto init = [&](std::vector<float>& m) {
        for (auto& x : m) x = static_cast<float>((rng.uniform() * 2.0 - 1.0) * bound);
    };
    std::vector<float> input(words.size() * d);
    init(input);
    std::vector<float> sub_input;
    std::vector<std::vector<std::uint32_t>> word_buckets;
    if (cfg.subwords) {
        sub_input.resize(std::size_t{cfg.subwords->buckets} * d);
        init(sub_input);
        word_buckets.reserve(words.size());
        for (const auto& w : words) word_buckets.push_back(subword_buckets(w, *cfg.subwords));
    }
    EmbeddingTable table(cfg.dim, words, std::move(input), cfg.subwords, std::move(sub_input));
    std::vector<float> output(words.size() * d, 0.0f);
    auto out_row = [&](std::uint32_t id) { return std::span<float>(output.data() + id * d, d); };

    if (report) {
        report->vocabulary = words.size();
        report->tokens = total_tokens;
        report->epoch_loss.clear();
    }

    std::vector<float> hidden(d);
    std::vector<float> scratch(d);
    std::vector<std::span<float>> negs;
    negs.reserve(static_cast<std::size_t>(cfg.negatives));
    const double total_work = static_cast<double>(cfg.epochs) * static_cast<double>(total_tokens);
    double done = 0.0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t pairs = 0;
        for (const auto& sentence : corpus) {
            for (std::size_t i = 0; i < sentence.size(); ++i, done += 1.0) {
                const float lr = static_cast<float>(cfg.learning_rate * std::max(1e-4, 1.0 - done / total_work));
                const std::uint32_t center = sentence[i];
                const std::size_t lo = i >= static_cast<std::size_t>(cfg.window) ? i - cfg.window : 0;
                const std::size_t hi = std::min(sentence.size() - 1, i + static_cast<std::size_t>(cfg.window));
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    const std::uint32_t context = sentence[j];

                    negs.clear();
                    for (int k = 0; k < cfg.negatives; ++k) {
                        const double u = rng.uniform() * acc;
                        auto neg = static_cast<std::uint32_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                        if (neg >= cdf.size()) neg = static_cast<std::uint32_t>(cdf.size() - 1);
                        if (neg != center) negs.push_back(out_row(neg));
                    }

                    if (!cfg.subwords) {
                        epoch_loss += sgns_step(table.mutable_row(context), out_row(center), negs, lr, scratch);
                    } else {
                        // hidden = mean(word row, n-gram rows); each row receives the full update
                        const auto& buckets = word_buckets[context];
                        std::fill(hidden.begin(), hidden.end(), 0.0f);
                        simd::axpy(1.0f, table.row(context), hidden);
                        for (auto b : buckets) simd::axpy(1.0f, table.subword_row(b), hidden);
                        simd::scale(1.0f / static_cast<float>(buckets.size() + 1), hidden);
                        epoch_loss += sgns_step(hidden, out_row(center), negs, lr, scratch);
                        simd::axpy(1.0f, scratch, table.mutable_row(context));
                        for (auto b : buckets) simd::axpy(1.0f, scratch, table.mutable_subword_row(b));
                    }
                    ++pairs;
                }
            }
        }
        if (report) report->epoch_loss.push_back(pairs ? epoch_loss / static_cast<double>(pairs) : 0.0);
    }
    return table;
}

EmbeddingTable train_embeddings(const Corpus& corpus, const Tokenizer& tokenizer, const SkipGramConfig& cfg,
                                TrainingReport* report) {
    std::vector<std::vector<std::string>> sentences;
    for (const auto& c : corpus.commits) {
        for (const auto& f : c.features) sentences.push_back(tokenizer(f));
    }
    for (const auto& b : corpus.bug_reports) {
        for (const auto& f : b.features) sentences.push_back(tokenizer(f));
    }
    return train_embeddings(sentences, cfg, report);
}

// ---------------------------------------------------------------------------
// inspection

double dense_cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) throw UsageError("cosine of vectors with different dimensions");
    const double nu = std::sqrt(static_cast<double>(simd::dot(u, u)));
    const double nv = std::sqrt(static_cast<double>(simd::dot(v, v)));
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return std::clamp(static_cast<double>(simd::dot(u, v)) / (nu * nv), -1.0, 1.0);
}

std::vector<std::pair<std::string, double>> nearest_neighbors(std::string_view word, const EmbeddingTable& table,
                                                              std::size_t k) {
    if (k == 0) return {};
    const auto query = table.lookup(word);
    if (!query) throw DataError("out of vocabulary: '" + std::string(word) + "'");

    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(table.size());
    for (const auto& w : table.words()) {
        if (w == word) continue;
        scored.emplace_back(w, dense_cosine(*query, *table.lookup(w)));
    }
    auto better = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    const std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
    scored.resize(keep);
    return scored;
}

} // namespace culprit
