#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "moodassoc/ingest.hpp"
#include "moodassoc/random.hpp"

using namespace moodassoc;

namespace {

MoodLexicon lex_of(std::initializer_list<const char*> terms) {
    MoodLexicon lex;
    for (const char* t : terms) lex.moods.push_back(make_mood(t, PartOfSpeech::Adjective));
    lex.rebuild_index();
    return lex;
}

// independent phrase-match oracle: collect every consecutive token n-gram of
// each field and test the term's token sequence for membership
std::set<std::string> ngram_oracle(const PlaylistRecord& p, const MoodLexicon& lex) {
    std::set<std::vector<std::string>> ngrams;
    auto add_field = [&](const std::string& text) {
        std::vector<std::string> toks = tokenize(text);
        for (size_t i = 0; i < toks.size(); ++i) {
            for (size_t len = 1; i + len <= toks.size(); ++len) {
                ngrams.insert(std::vector<std::string>(toks.begin() + i,
                                                       toks.begin() + i + len));
            }
        }
    };
    add_field(p.title);
    if (p.description) add_field(*p.description);
    std::set<std::string> hit;
    for (const Mood& m : lex.moods) {
        if (ngrams.count(m.term_tokens)) hit.insert(m.term);
    }
    return hit;
}

std::set<std::string> matched_terms(const PlaylistRecord& p, const MoodLexicon& lex) {
    std::set<std::string> out;
    for (const Mood* m : match_moods(p, lex)) out.insert(m->term);
    return out;
}

}  // namespace

TEST_CASE("parse_playlists yields records in input order") {
    std::istringstream in(
        R"({"id":"p1","title":"sad vibes","tracks":["s1","s2"]})"
        "\n"
        R"({"id":"p2","title":"mix","description":"for studying","tracks":[]})"
        "\n");
    ParseReport report;
    auto records = parse_playlists(in, &report);
    REQUIRE(records.size() == 2);
    CHECK(records[0].playlist_id == "p1");
    CHECK(records[0].title == "sad vibes");
    CHECK_FALSE(records[0].description.has_value());
    CHECK(records[0].track_ids == std::vector<std::string>{"s1", "s2"});
    CHECK(records[1].description == "for studying");
    CHECK(records[1].track_ids.empty());
    CHECK(report.issues.empty());
    CHECK(report.records_parsed == 2);
}

TEST_CASE("parse_playlists records malformed lines and continues") {
    std::istringstream in(
        R"({"title":"no id","tracks":[]})"
        "\n"
        R"({"id":"p2","title":"ok","tracks":["s1"]})"
        "\nnot json at all\n");
    ParseReport report;
    auto records = parse_playlists(in, &report);
    REQUIRE(records.size() == 1);
    CHECK(records[0].playlist_id == "p2");
    REQUIRE(report.issues.size() == 2);
    CHECK(report.issues[0].line == 1);
    CHECK(report.issues[1].line == 3);

    std::ostringstream csv;
    write_error_report(csv, report);
    CHECK(csv.str().rfind("line,reason\n1,", 0) == 0);
}

TEST_CASE("strict parsing turns the first malformed line fatal") {
    std::istringstream in("{\"bad\":1}\n");
    CHECK_THROWS_WITH(parse_playlists(in, nullptr, true),
                      Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("parse_playlists of an empty stream is empty") {
    std::istringstream in("");
    CHECK(parse_playlists(in).empty());
}

TEST_CASE("parse_songs reads lyrics and optional acoustic features") {
    std::ostringstream obj;
    obj << R"({"id":"s1","lyrics":"la la"})" << '\n'
        << R"({"id":"s2","lyrics":"oh","acoustic":{)";
    const auto& names = AcousticFeatures::names();
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) obj << ',';
        obj << '"' << names[i] << "\":" << (0.1 * static_cast<double>(i));
    }
    obj << "}}\n";
    std::istringstream in(obj.str());
    ParseReport report;
    auto songs = parse_songs(in, &report);
    REQUIRE(songs.size() == 2);
    CHECK_FALSE(songs[0].acoustic.has_value());
    REQUIRE(songs[1].acoustic.has_value());
    CHECK(songs[1].acoustic->bounciness == Catch::Approx(0.1));
    CHECK(report.issues.empty());
}

TEST_CASE("parse_songs flags incomplete acoustic objects") {
    std::istringstream in(R"({"id":"s1","lyrics":"x","acoustic":{"tempo":120}})" "\n");
    ParseReport report;
    auto songs = parse_songs(in, &report);
    CHECK(songs.empty());
    REQUIRE(report.issues.size() == 1);
    CHECK_THAT(report.issues[0].reason, Catch::Matchers::ContainsSubstring("missing field"));
}

TEST_CASE("match_moods finds whole-token matches only") {
    MoodLexicon lex = lex_of({"chill", "sad"});
    PlaylistRecord p;
    p.title = "chill study beats";
    CHECK(matched_terms(p, lex) == std::set<std::string>{"chill"});

    p.title = "Chilling out";
    CHECK(matched_terms(p, lex).empty());

    p.title = "CHILL & sad classics";
    CHECK(matched_terms(p, lex) == std::set<std::string>{"chill", "sad"});
}

TEST_CASE("match_moods matches multiword phrases as consecutive tokens") {
    MoodLexicon lex = lex_of({"good vibes"});
    PlaylistRecord p;
    p.title = "good vibes playlist";
    CHECK(matched_terms(p, lex) == std::set<std::string>{"good vibes"});

    p.title = "good clean vibes";  // not consecutive
    CHECK(matched_terms(p, lex).empty());

    p.title = "something";
    p.description = "only good vibes here";
    CHECK(matched_terms(p, lex) == std::set<std::string>{"good vibes"});
}

TEST_CASE("match_moods agrees with the n-gram oracle on random titles") {
    MoodLexicon lex = lex_of({"chill", "sad", "good vibes", "late night drive"});
    const char* pool[] = {"chill",  "chilling", "sad",   "good",  "vibes", "late",
                          "night",  "drive",    "beats", "study", "mix",   "the"};
    Rng rng(2024, "title-oracle");
    for (int round = 0; round < 300; ++round) {
        PlaylistRecord p;
        size_t n = 1 + rng.uniform_int(6);
        for (size_t i = 0; i < n; ++i) {
            if (i) p.title += ' ';
            p.title += pool[rng.uniform_int(12)];
        }
        if (rng.bernoulli(0.5)) {
            std::string desc;
            size_t m = rng.uniform_int(5);
            for (size_t i = 0; i < m; ++i) {
                if (i) desc += ' ';
                desc += pool[rng.uniform_int(12)];
            }
            p.description = desc;
        }
        CHECK(matched_terms(p, lex) == ngram_oracle(p, lex));
    }
}

TEST_CASE("match_moods is invariant under swapping title and description") {
    MoodLexicon lex = lex_of({"chill", "good vibes"});
    PlaylistRecord p;
    p.title = "good vibes only";
    p.description = "chill afternoon";
    PlaylistRecord swapped;
    swapped.title = *p.description;
    swapped.description = p.title;
    CHECK(matched_terms(p, lex) == matched_terms(swapped, lex));
}

TEST_CASE("dedupe keeps the first instance per song id") {
    std::vector<SongRecord> songs;
    songs.push_back({"s1", "lyrics a", std::nullopt});
    songs.push_back({"s1", "lyrics b", std::nullopt});
    songs.push_back({"s2", "lyrics c", std::nullopt});
    auto out = dedupe_songs(songs);
    REQUIRE(out.size() == 2);
    CHECK(out[0].song_id == "s1");
    CHECK(out[0].lyrics == "lyrics a");
    CHECK(out[1].song_id == "s2");

    auto again = dedupe_songs(out);
    CHECK(again.size() == out.size());  // idempotent

    CHECK(dedupe_songs({}).empty());
}

TEST_CASE("split_train_test validates its fraction") {
    CHECK_THROWS_AS(split_train_test({"a"}, 1.5, 0), ConfigError);
    CHECK_THROWS_AS(split_train_test({"a"}, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(split_train_test({}, 0.75, 0), ConfigError);
}

TEST_CASE("split_train_test is deterministic and near the requested fraction") {
    std::vector<std::string> ids;
    ids.reserve(100000);
    for (int i = 0; i < 100000; ++i) ids.push_back("song-" + std::to_string(i));
    CorpusSplit a = split_train_test(ids, 0.75, 7);
    CorpusSplit b = split_train_test(ids, 0.75, 7);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.test_ids == b.test_ids);
    CHECK(a.train_ids.size() + a.test_ids.size() == ids.size());
    CHECK(a.train_ids.size() >= 74000);
    CHECK(a.train_ids.size() <= 76000);

    // different seed reshuffles
    CorpusSplit c = split_train_test(ids, 0.75, 8);
    CHECK(c.train_ids != a.train_ids);
}

TEST_CASE("adding songs never reassigns existing ones") {
    std::vector<std::string> ids;
    for (int i = 0; i < 1000; ++i) ids.push_back("id" + std::to_string(i));
    CorpusSplit before = split_train_test(ids, 0.6, 99);
    std::vector<std::string> grown = ids;
    for (int i = 0; i < 500; ++i) grown.push_back("new" + std::to_string(i));
    CorpusSplit after = split_train_test(grown, 0.6, 99);
    for (const std::string& id : ids) {
        CHECK(before.is_train(id) == after.is_train(id));
    }
}

TEST_CASE("split CSV round-trips") {
    CorpusSplit split = split_train_test({"a", "b", "c", "d"}, 0.5, 3);
    std::ostringstream out;
    write_split_csv(out, split);
    std::istringstream in(out.str());
    CorpusSplit loaded = read_split_csv(in);
    CHECK(loaded.train_ids == split.train_ids);
    CHECK(loaded.test_ids == split.test_ids);
}
