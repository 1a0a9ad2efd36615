// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "culprit/ranker.hpp"

namespace culprit {

// A model bundle is a directory:
//   manifest.json      version, scheme, tokenizer and BM25 settings, corpus
//                      fingerprint, creation time, payload file names
//   vocab_stats.json   {"num_docs", "avg_feature_len", "document_unit", "doc_freq"}
//   unigram.json       {"total", "counts"}
//   embeddings.json    embedding header (embed scheme only)
//   embeddings.bin     little-endian float32 rows

struct BundleManifest {
    std::string version;
    Scheme scheme = Scheme::bm25;
    TokenizerConfig tokenizer;
    Bm25Params bm25;
    std::string created;
    std::string corpus_fingerprint;
    std::map<std::string, std::string> files;

    nlohmann::json to_json() const;
    static BundleManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestFile = "manifest.json";

/// Writes `model` into `dir` (created if missing). Throws UsageError when
/// `dir` exists and is not a directory.
BundleManifest save_bundle(const Model& model, const std::filesystem::path& dir, const std::string& corpus_fingerprint,
                           const std::string& created = {});

/// Loads and validates a bundle. Throws DataError when a declared payload is
/// missing or malformed.
Model load_bundle(const std::filesystem::path& dir, BundleManifest* manifest = nullptr);

} // namespace culprit
