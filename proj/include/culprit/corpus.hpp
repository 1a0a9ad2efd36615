// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace culprit {

/// One named component of a bug report or commit: a stack trace, a metric
/// name, a title, a changed config name. Text lines are kept raw.
struct Feature {
    std::string name;
    std::vector<std::string> text;

    bool operator==(const Feature&) const = default;
};

enum class CommitKind { code_change, config_change };

std::string_view to_string(CommitKind kind);

struct BugReport {
    std::string id;
    std::vector<Feature> features;
    std::optional<std::int64_t> timestamp;

    bool operator==(const BugReport&) const = default;
};

struct Commit {
    std::string id;
    CommitKind kind = CommitKind::code_change;
    std::vector<Feature> features;
    std::optional<std::int64_t> timestamp;

    bool operator==(const Commit&) const = default;
};

struct Corpus {
    std::vector<Commit> commits;
    std::vector<BugReport> bug_reports;
};

// Record (de)serialization. One JSON object per line:
//   {"id": str, "kind": "code_change"|"config_change"|"bug_report",
//    "timestamp": int|null, "features": [{"name": str, "text": [str]}]}
//
// The parse functions throw DataError naming the violated field; `where` is
// prefixed to the message (typically "path:line").
Commit commit_from_json(const nlohmann::json& record, std::string_view where = {});
BugReport bug_from_json(const nlohmann::json& record, std::string_view where = {});
nlohmann::json to_json(const Commit& commit);
nlohmann::json to_json(const BugReport& bug);

/// Reads line-delimited records. Blank lines are skipped and CR is stripped.
/// Duplicate ids are rejected.
std::vector<Commit> read_commits(std::istream& in, std::string_view source);
std::vector<BugReport> read_bug_reports(std::istream& in, std::string_view source);

std::vector<Commit> read_commits_file(const std::filesystem::path& path);
std::vector<BugReport> read_bug_reports_file(const std::filesystem::path& path);

void write_commits(std::ostream& out, std::span<const Commit> commits);
void write_bug_reports(std::ostream& out, std::span<const BugReport> bugs);

Corpus load_corpus(const std::filesystem::path& commits_path,
                   const std::optional<std::filesystem::path>& bugs_path = std::nullopt);

/// Projects the corpus onto `ids`, in the order given. Throws DataError
/// listing every id that is not a commit in the corpus.
std::vector<Commit> select_candidates(const Corpus& corpus, std::span<const std::string> ids);

/// Stable 64-bit FNV-1a digest of the corpus' canonical record serialization,
/// rendered as 16 hex digits.
std::string corpus_fingerprint(const Corpus& corpus);

} // namespace culprit
