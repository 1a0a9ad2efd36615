// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/bundle.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"

namespace culprit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStatsFile = "vocab_stats.json";
constexpr const char* kUnigramFile = "unigram.json";
constexpr const char* kEmbeddingHeader = "embeddings.json";
constexpr const char* kEmbeddingPayload = "embeddings.bin";

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError(path.string() + ": cannot write");
    out << j.dump() << '\n';
    if (!out) throw DataError(path.string() + ": write failed");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": missing bundle file");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

json BundleManifest::to_json() const {
    return {{"version", version},
            {"scheme", culprit::to_string(scheme)},
            {"tokenizer",
             {{"lowercase", tokenizer.lowercase},
              {"min_token_len", tokenizer.min_token_len},
              {"max_split_len", tokenizer.max_split_len},
              {"enable_split", tokenizer.enable_split}}},
            {"bm25", {{"k1", bm25.k1}, {"b", bm25.b}}},
            {"created", created},
            {"corpus_fingerprint", corpus_fingerprint},
            {"files", files}};
}

BundleManifest BundleManifest::from_json(const json& j) {
    BundleManifest m;
    try {
        m.version = j.at("version").get<std::string>();
        m.scheme = parse_scheme(j.at("scheme").get<std::string>());
        const auto& t = j.at("tokenizer");
        m.tokenizer.lowercase = t.at("lowercase").get<bool>();
        m.tokenizer.min_token_len = t.at("min_token_len").get<int>();
        m.tokenizer.max_split_len = t.at("max_split_len").get<int>();
        m.tokenizer.enable_split = t.at("enable_split").get<bool>();
        m.bm25.k1 = j.at("bm25").at("k1").get<double>();
        m.bm25.b = j.at("bm25").at("b").get<double>();
        m.created = j.value("created", "");
        m.corpus_fingerprint = j.value("corpus_fingerprint", "");
        m.files = j.at("files").get<std::map<std::string, std::string>>();
        m.tokenizer.validate();
        m.bm25.validate();
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("manifest: ") + e.what());
    }
    return m;
}

BundleManifest save_bundle(const Model& model, const fs::path& dir, const std::string& corpus_fingerprint,
                           const std::string& created) {
    model.validate();
    if (fs::exists(dir) && !fs::is_directory(dir)) {
        throw UsageError(dir.string() + ": output path exists and is not a directory");
    }
    fs::create_directories(dir);

    BundleManifest m;
    m.version = model.version;
    m.scheme = model.scheme;
    m.tokenizer = model.tokenizer.config();
    m.bm25 = model.bm25;
    m.created = created.empty() ? utc_now() : created;
    m.corpus_fingerprint = corpus_fingerprint;
    m.files["vocab_stats"] = kStatsFile;
    m.files["unigram"] = kUnigramFile;

    write_json(dir / kStatsFile, model.stats.to_json());
    write_json(dir / kUnigramFile, model.tokenizer.model().to_json());
    if (model.embeddings) {
        m.files["embeddings_header"] = kEmbeddingHeader;
        m.files["embeddings_payload"] = kEmbeddingPayload;
        model.embeddings->save(dir / kEmbeddingHeader, dir / kEmbeddingPayload);
    }
    // manifest last: a bundle without one is incomplete
    write_json(dir / kManifestFile, m.to_json());
    return m;
}

Model load_bundle(const fs::path& dir, BundleManifest* manifest) {
    if (!fs::is_directory(dir)) throw DataError(dir.string() + ": not a model bundle directory");
    const BundleManifest m = BundleManifest::from_json(read_json(dir / kManifestFile));
    for (const auto& [role, file] : m.files) {
        if (!fs::exists(dir / file)) throw DataError((dir / file).string() + ": declared " + role + " file is missing");
    }
    auto file = [&](const char* role) -> fs::path {
        auto it = m.files.find(role);
        if (it == m.files.end()) throw DataError(std::string("manifest: no '") + role + "' file declared");
        return dir / it->second;
    };

    Model model;
    model.scheme = m.scheme;
    model.version = m.version;
    model.bm25 = m.bm25;
    model.stats = VocabStats::from_json(read_json(file("vocab_stats")));
    model.tokenizer = Tokenizer(UnigramModel::from_json(read_json(file("unigram"))), m.tokenizer);
    if (m.files.contains("embeddings_header")) {
        model.embeddings = EmbeddingTable::load(file("embeddings_header"), file("embeddings_payload"));
    }
    try {
        model.validate();
    } catch (const UsageError& e) {
        throw DataError(dir.string() + ": " + e.what());
    }
    if (manifest) *manifest = m;
    return model;
}

} // namespace culprit
