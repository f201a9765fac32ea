#include "commscore/transcript.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace commscore;
using testing_support::load_fixture;

namespace {

std::vector<std::size_t> indices(std::span<const Utterance> us) {
    std::vector<std::size_t> out;
    for (const auto& u : us) out.push_back(u.index);
    return out;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::Io;
}

} // namespace

TEST(ParseTranscript, ParsesConversationLine) {
    auto t = parse_transcript("012 - [113.055:113.855] SPEAKER_00 Zyra is doing golem.\n");
    ASSERT_EQ(t.size(), 1u);
    const auto& u = t.utterances()[0];
    EXPECT_EQ(u.index, 12u);
    EXPECT_DOUBLE_EQ(u.start_s, 113.055);
    EXPECT_DOUBLE_EQ(u.end_s, 113.855);
    EXPECT_EQ(u.speaker, "SPEAKER_00");
    EXPECT_EQ(u.text, "Zyra is doing golem.");
}

TEST(ParseTranscript, EmptyInput) {
    auto t = parse_transcript("");
    EXPECT_EQ(t.size(), 0u);
    EXPECT_TRUE(t.speakers().empty());
    EXPECT_EQ(parse_transcript("\n  \n\r\n").size(), 0u);
}

TEST(ParseTranscript, VariableTimestampWidths) {
    auto t = parse_transcript("009 - [73.259:0074.4] SPEAKER_01 I think you should base and I'll stay.\n"
                              "010 - [074.86:76.141] SPEAKER_01 I can get BF in two waves.\n");
    EXPECT_DOUBLE_EQ(t.utterances()[0].end_s, 74.4);
    EXPECT_DOUBLE_EQ(t.utterances()[1].start_s, 74.86);
}

TEST(ParseTranscript, AcceptsCrlfAndLooseSpacing) {
    auto t = parse_transcript("  7-[1.5:2] A  hello there  \r\n");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.utterances()[0].index, 7u);
    EXPECT_EQ(t.utterances()[0].speaker, "A");
    EXPECT_EQ(t.utterances()[0].text, "hello there");
}

TEST(ParseTranscript, MalformedLineReportsLineNumber) {
    try {
        parse_transcript("000 - [1:2] A ok\n\nthis is not a log line\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        ASSERT_TRUE(e.line());
        EXPECT_EQ(*e.line(), 3u);
    }
    EXPECT_EQ(kind_of([] { parse_transcript("000 - [1.2.3:4] A text\n"); }), ErrorKind::Parse);
}

TEST(ParseTranscript, ValidationErrors) {
    EXPECT_EQ(kind_of([] { parse_transcript("000 - [5:4] A backwards\n"); }), ErrorKind::Validation);
    EXPECT_EQ(kind_of([] { parse_transcript("000 - [1:2] A\n"); }), ErrorKind::Validation);
    EXPECT_EQ(kind_of([] { parse_transcript("000 - [1:2] A    \n"); }), ErrorKind::Validation);
    EXPECT_EQ(kind_of([] { parse_transcript("003 - [1:2] A x\n002 - [3:4] A y\n"); }), ErrorKind::Validation);
}

TEST(ParseTranscript, LenientModeSkipsAndCounts) {
    std::istringstream in(testing_support::read_file(testing_support::data_path("conversation_snippet.log")));
    auto r = parse_transcript_lenient(in);
    EXPECT_EQ(r.skipped(), 1u); // the elision line
    EXPECT_EQ(r.issues[0].line, 7u);
    EXPECT_EQ(r.issues[0].kind, ErrorKind::Parse);
    EXPECT_EQ(r.transcript.size(), 12u);
}

TEST(ParseTranscript, StrictModeRejectsElision) {
    EXPECT_EQ(kind_of([] { load_fixture("conversation_snippet.log"); }), ErrorKind::Parse);
}

TEST(ParseTranscript, GameLogs) {
    auto a = load_fixture("game_a.log");
    EXPECT_EQ(a.size(), 25u);
    EXPECT_EQ(a.speakers(), std::set<std::string>{"SPEAKER_01"});
    auto c = load_fixture("game_c.log");
    EXPECT_EQ(c.size(), 23u);
}

TEST(SpeakerView, Counts) {
    EXPECT_EQ(speaker_view(load_fixture("game_a.log"), "SPEAKER_01").size(), 25u);
    EXPECT_EQ(speaker_view(load_fixture("game_c.log"), "SPEAKER_00").size(), 23u);
    auto t = parse_transcript("000 - [1:2] X only\n001 - [2:3] Y other\n");
    auto v = speaker_view(t, "X");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v.utterances()[0].text, "only");
}

TEST(SpeakerView, UnknownSpeaker) {
    EXPECT_EQ(kind_of([] { speaker_view(load_fixture("game_a.log"), "SPEAKER_09"); }), ErrorKind::NotFound);
}

TEST(SpeakerView, RejectsOutOfOrderStarts) {
    auto t = parse_transcript("000 - [10:11] X late\n001 - [5:6] X early\n");
    EXPECT_EQ(kind_of([&] { speaker_view(t, "X"); }), ErrorKind::Validation);
}

TEST(WindowBefore, Sentence12) {
    auto v = speaker_view(load_fixture("game_a.log"), "SPEAKER_01");
    const auto& u = *std::find_if(v.utterances().begin(), v.utterances().end(), [](auto& x) { return x.index == 12; });
    auto w = window_before(v, u, 15.0);
    EXPECT_EQ(indices(w), (std::vector<std::size_t>{7, 8, 9, 10, 11}));
    EXPECT_DOUBLE_EQ(w.front().start_s, 69.556);
    EXPECT_DOUBLE_EQ(w.back().start_s, 77.482);
}

TEST(WindowBefore, Sentence16) {
    auto v = speaker_view(load_fixture("game_a.log"), "SPEAKER_01");
    auto w = window_before(v, v.utterances()[16], 15.0);
    EXPECT_EQ(indices(w), (std::vector<std::size_t>{10, 11, 12, 13, 14, 15}));
}

TEST(WindowBefore, FirstUtteranceIsEmpty) {
    auto v = speaker_view(load_fixture("game_a.log"), "SPEAKER_01");
    EXPECT_TRUE(window_before(v, v.utterances()[0], 15.0).empty());
}

TEST(WindowBefore, BoundaryTies) {
    // 20 - 5 == 15 exactly: included. Same start: excluded.
    auto t = parse_transcript("000 - [5:6] X a\n001 - [20:20.5] X b\n002 - [20:21] X c\n");
    auto v = speaker_view(t, "X");
    EXPECT_EQ(indices(window_before(v, v.utterances()[1], 15.0)), (std::vector<std::size_t>{0}));
    EXPECT_EQ(indices(window_before(v, v.utterances()[2], 15.0)), (std::vector<std::size_t>{0}));
    EXPECT_TRUE(window_before(v, v.utterances()[1], 14.999).empty());
}

TEST(WindowBefore, Errors) {
    auto t = parse_transcript("000 - [5:6] X a\n001 - [7:8] Y b\n");
    auto v = speaker_view(t, "X");
    EXPECT_EQ(kind_of([&] { window_before(v, t.utterances()[1], 15.0); }), ErrorKind::Invariant);
    EXPECT_EQ(kind_of([&] { window_before(v, v.utterances()[0], 0.0); }), ErrorKind::Argument);
}

TEST(TranscriptProperties, RoundTrip) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        auto t = testing_support::random_transcript(rng);
        EXPECT_EQ(parse_transcript(format_transcript(t)), t);
    }
    auto a = load_fixture("game_a.log");
    EXPECT_EQ(parse_transcript(format_transcript(a)), a);
}

TEST(TranscriptProperties, WindowInvariants) {
    std::mt19937_64 rng(11);
    const double windows[] = {0.5, 3.0, 7.5, 15.0, 40.0};
    for (int iter = 0; iter < 100; ++iter) {
        auto t = testing_support::random_transcript(rng);
        for (const auto& speaker : t.speakers()) {
            auto v = speaker_view(t, speaker);
            for (const auto& u : v.utterances()) {
                std::vector<std::size_t> prev;
                for (double w : windows) {
                    auto win = window_before(v, u, w);
                    auto ids = indices(win);
                    for (const auto& s : win) {
                        EXPECT_NE(s.index, u.index);
                        EXPECT_EQ(s.speaker, speaker);
                        EXPECT_GE(u.start_s - s.start_s, 0.0);
                        EXPECT_LE(u.start_s - s.start_s, w);
                    }
                    // Monotone in W.
                    EXPECT_TRUE(std::includes(ids.begin(), ids.end(), prev.begin(), prev.end()));
                    prev = ids;
                }
            }
        }
    }
}
