// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "culprit/error.hpp"

namespace culprit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view where, const std::string& what) {
    if (where.empty()) throw DataError(what);
    throw DataError(std::string(where) + ": " + what);
}

std::string require_id(const json& record, std::string_view where) {
    if (!record.is_object()) fail(where, "record is not a JSON object");
    auto it = record.find("id");
    if (it == record.end()) fail(where, "missing field 'id'");
    if (!it->is_string()) fail(where, "field 'id' must be a string");
    auto id = it->get<std::string>();
    if (id.empty()) fail(where, "field 'id' must be non-empty");
    return id;
}

std::optional<std::int64_t> read_timestamp(const json& record, std::string_view where) {
    auto it = record.find("timestamp");
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) fail(where, "field 'timestamp' must be an integer or null");
    return it->get<std::int64_t>();
}

std::vector<Feature> read_features(const json& record, std::string_view where) {
    auto it = record.find("features");
    if (it == record.end()) fail(where, "missing field 'features'");
    if (!it->is_array()) fail(where, "field 'features' must be an array");
    if (it->empty()) fail(where, "field 'features' must be non-empty");

    std::vector<Feature> features;
    features.reserve(it->size());
    for (std::size_t i = 0; i < it->size(); ++i) {
        const json& f = (*it)[i];
        const std::string field = "features[" + std::to_string(i) + "]";
        if (!f.is_object()) fail(where, "field '" + field + "' must be an object");
        auto name = f.find("name");
        if (name == f.end() || !name->is_string() || name->get_ref<const std::string&>().empty()) {
            fail(where, "field '" + field + ".name' must be a non-empty string");
        }
        Feature feature{name->get<std::string>(), {}};
        auto text = f.find("text");
        if (text == f.end() || !text->is_array()) {
            fail(where, "field '" + field + ".text' must be an array of strings");
        }
        for (const auto& line : *text) {
            if (!line.is_string()) fail(where, "field '" + field + ".text' must be an array of strings");
            feature.text.push_back(line.get<std::string>());
        }
        features.push_back(std::move(feature));
    }
    return features;
}

json features_to_json(const std::vector<Feature>& features) {
    json out = json::array();
    for (const auto& f : features) {
        out.push_back({{"name", f.name}, {"text", f.text}});
    }
    return out;
}

json timestamp_to_json(const std::optional<std::int64_t>& ts) {
    return ts ? json(*ts) : json(nullptr);
}

template <typename Parse>
auto read_records(std::istream& in, std::string_view source, Parse parse) {
    using Record = decltype(parse(json{}, std::string_view{}));
    std::vector<Record> records;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = std::string(source) + ":" + std::to_string(lineno);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(where, std::string("malformed JSON (") + e.what() + ")");
        }
        Record parsed = parse(record, where);
        if (!seen.insert(parsed.id).second) fail(where, "duplicate id '" + parsed.id + "'");
        records.push_back(std::move(parsed));
    }
    return records;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open file");
    return in;
}

} // namespace

std::string_view to_string(CommitKind kind) {
    switch (kind) {
    case CommitKind::code_change: return "code_change";
    case CommitKind::config_change: return "config_change";
    }
    return "code_change";
}

Commit commit_from_json(const json& record, std::string_view where) {
    Commit commit;
    commit.id = require_id(record, where);
    auto kind = record.find("kind");
    if (kind == record.end()) fail(where, "missing field 'kind'");
    if (*kind == "code_change") {
        commit.kind = CommitKind::code_change;
    } else if (*kind == "config_change") {
        commit.kind = CommitKind::config_change;
    } else {
        fail(where, "field 'kind' must be \"code_change\" or \"config_change\"");
    }
    commit.timestamp = read_timestamp(record, where);
    commit.features = read_features(record, where);
    return commit;
}

BugReport bug_from_json(const json& record, std::string_view where) {
    BugReport bug;
    bug.id = require_id(record, where);
    auto kind = record.find("kind");
    if (kind != record.end() && !kind->is_null() && *kind != "bug_report") {
        fail(where, "field 'kind' must be \"bug_report\"");
    }
    bug.timestamp = read_timestamp(record, where);
    bug.features = read_features(record, where);
    return bug;
}

json to_json(const Commit& commit) {
    return {{"id", commit.id},
            {"kind", to_string(commit.kind)},
            {"timestamp", timestamp_to_json(commit.timestamp)},
            {"features", features_to_json(commit.features)}};
}

json to_json(const BugReport& bug) {
    return {{"id", bug.id},
            {"kind", "bug_report"},
            {"timestamp", timestamp_to_json(bug.timestamp)},
            {"features", features_to_json(bug.features)}};
}

std::vector<Commit> read_commits(std::istream& in, std::string_view source) {
    return read_records(in, source, [](const json& r, std::string_view w) { return commit_from_json(r, w); });
}

std::vector<BugReport> read_bug_reports(std::istream& in, std::string_view source) {
    return read_records(in, source, [](const json& r, std::string_view w) { return bug_from_json(r, w); });
}

std::vector<Commit> read_commits_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_commits(in, path.string());
}

std::vector<BugReport> read_bug_reports_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_bug_reports(in, path.string());
}

void write_commits(std::ostream& out, std::span<const Commit> commits) {
    for (const auto& c : commits) out << to_json(c).dump() << '\n';
}

void write_bug_reports(std::ostream& out, std::span<const BugReport> bugs) {
    for (const auto& b : bugs) out << to_json(b).dump() << '\n';
}

Corpus load_corpus(const std::filesystem::path& commits_path,
                   const std::optional<std::filesystem::path>& bugs_path) {
    Corpus corpus;
    corpus.commits = read_commits_file(commits_path);
    if (bugs_path) corpus.bug_reports = read_bug_reports_file(*bugs_path);
    return corpus;
}

std::vector<Commit> select_candidates(const Corpus& corpus, std::span<const std::string> ids) {
    std::unordered_map<std::string_view, const Commit*> by_id;
    by_id.reserve(corpus.commits.size());
    for (const auto& c : corpus.commits) by_id.emplace(c.id, &c);

    std::vector<Commit> selected;
    selected.reserve(ids.size());
    std::vector<std::string> unknown;
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            unknown.push_back(id);
        } else {
            selected.push_back(*it->second);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown candidate id(s):";
        for (const auto& id : unknown) msg += " " + id;
        throw DataError(msg);
    }
    return selected;
}

std::string corpus_fingerprint(const Corpus& corpus) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&hash](const std::string& s) {
        for (unsigned char ch : s) {
            hash ^= ch;
            hash *= 0x100000001b3ULL;
        }
        hash ^= '\n';
        hash *= 0x100000001b3ULL;
    };
    for (const auto& c : corpus.commits) mix(to_json(c).dump());
    mix("--");
    for (const auto& b : corpus.bug_reports) mix(to_json(b).dump());

    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace culprit
