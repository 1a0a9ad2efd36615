// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include <catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "culprit/corpus.hpp"
#include "culprit/error.hpp"
#include "test_util.hpp"

using namespace culprit;
using culprit::test::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

Corpus two_commits() {
    Corpus c;
    c.commits.push_back(test::commit("c1", {test::feature("title", {"fix"})}));
    c.commits.push_back(test::commit("c2", {test::feature("title", {"add"})}));
    return c;
}

} // namespace

TEST_CASE("empty file loads as an empty corpus", "[corpus]") {
    TempDir dir("corpus");
    write_file(dir / "c.jsonl", "");
    const Corpus c = load_corpus(dir / "c.jsonl");
    CHECK(c.commits.empty());
    CHECK(c.bug_reports.empty());
}

TEST_CASE("features keep file order", "[corpus]") {
    TempDir dir("corpus");
    write_file(dir / "c.jsonl",
               R"({"id":"abc","kind":"config_change","timestamp":17,"features":[)"
               R"({"name":"config_name","text":["switch_x"]},{"name":"title","text":["Flip it","again"]}]})"
               "\r\n\n");
    const Corpus c = load_corpus(dir / "c.jsonl");
    REQUIRE(c.commits.size() == 1);
    const Commit& commit = c.commits[0];
    CHECK(commit.id == "abc");
    CHECK(commit.kind == CommitKind::config_change);
    CHECK(commit.timestamp == 17);
    REQUIRE(commit.features.size() == 2);
    CHECK(commit.features[0].name == "config_name");
    CHECK(commit.features[1].name == "title");
    CHECK(commit.features[1].text == std::vector<std::string>{"Flip it", "again"});
}

TEST_CASE("malformed records name file, line and field", "[corpus]") {
    TempDir dir("corpus");
    const auto path = dir / "c.jsonl";

    write_file(path, R"({"id":"a","kind":"code_change","features":[{"name":"t","text":[]}]})"
                     "\n"
                     R"({"id":"b","kind":"code_change","features":[]})"
                     "\n");
    auto msg = error_of([&] { read_commits_file(path); });
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("c.jsonl:2"));
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("features"));

    write_file(path, R"({"id":"a","kind":"merge","features":[{"name":"t","text":[]}]})");
    msg = error_of([&] { read_commits_file(path); });
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring(":1"));
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("kind"));

    write_file(path, "{not json\n");
    CHECK_THROWS_AS(read_commits_file(path), DataError);

    write_file(path, R"({"id":"a","kind":"code_change","features":[{"name":"","text":[]}]})");
    msg = error_of([&] { read_commits_file(path); });
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("name"));

    CHECK_THROWS_AS(read_commits_file(dir / "missing.jsonl"), DataError);
}

TEST_CASE("duplicate ids are rejected", "[corpus]") {
    std::istringstream in(R"({"id":"abc","kind":"code_change","features":[{"name":"t","text":["x"]}]})"
                          "\n"
                          R"({"id":"abc","kind":"code_change","features":[{"name":"t","text":["y"]}]})"
                          "\n");
    const auto msg = error_of([&] { read_commits(in, "mem"); });
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("abc"));
}

TEST_CASE("bug reports accept an absent or explicit bug kind", "[corpus]") {
    std::istringstream in(R"({"id":"b1","features":[{"name":"metric","text":["cpu"]}]})"
                          "\n"
                          R"({"id":"b2","kind":"bug_report","timestamp":null,"features":[{"name":"m","text":[]}]})"
                          "\n");
    const auto bugs = read_bug_reports(in, "mem");
    REQUIRE(bugs.size() == 2);
    CHECK_FALSE(bugs[1].timestamp.has_value());

    std::istringstream bad(R"({"id":"b3","kind":"code_change","features":[{"name":"m","text":[]}]})");
    CHECK_THROWS_AS(read_bug_reports(bad, "mem"), DataError);
}

TEST_CASE("select_candidates projects in the requested order", "[corpus]") {
    const Corpus c = two_commits();
    CHECK(select_candidates(c, std::vector<std::string>{}).empty());

    const auto picked = select_candidates(c, std::vector<std::string>{"c2", "c1"});
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].id == "c2");
    CHECK(picked[1].id == "c1");

    const auto msg = error_of([&] { select_candidates(c, std::vector<std::string>{"c3", "c1", "c9"}); });
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("c3"));
    CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("c9"));
}

TEST_CASE("serialization round-trips random corpora", "[corpus][property]") {
    std::mt19937 rng(99);
    auto word = [&] {
        std::string s;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(" aZ_:9\"\\\t"[rng() % 9]));
        return s;
    };
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Commit> commits;
        std::vector<BugReport> bugs;
        const int n = static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            Commit c;
            c.id = "c" + std::to_string(i);
            c.kind = rng() % 2 ? CommitKind::code_change : CommitKind::config_change;
            if (rng() % 2) c.timestamp = static_cast<std::int64_t>(rng());
            const int nf = 1 + static_cast<int>(rng() % 3);
            for (int f = 0; f < nf; ++f) {
                Feature feat{"f" + std::to_string(f), {}};
                const int lines = static_cast<int>(rng() % 3);
                for (int l = 0; l < lines; ++l) feat.text.push_back(word());
                c.features.push_back(feat);
            }
            commits.push_back(c);
            bugs.push_back(BugReport{"b" + std::to_string(i), c.features, c.timestamp});
        }

        std::stringstream cs, bs;
        write_commits(cs, commits);
        write_bug_reports(bs, bugs);
        CHECK(read_commits(cs, "mem") == commits);
        CHECK(read_bug_reports(bs, "mem") == bugs);
    }
}

TEST_CASE("fingerprint tracks content", "[corpus]") {
    Corpus a = two_commits();
    const auto fp = corpus_fingerprint(a);
    CHECK(fp.size() == 16);
    CHECK(corpus_fingerprint(two_commits()) == fp);
    a.commits[1].features[0].text[0] = "remove";
    CHECK(corpus_fingerprint(a) != fp);
}
