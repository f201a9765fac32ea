#include "commscore/duplicate_scorer.hpp"
#include "commscore/mock_provider.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace commscore;
using namespace testing_support;

namespace {

const DuplicateScore& by_index(const std::vector<DuplicateScore>& scores, std::size_t index) {
    for (const auto& s : scores)
        if (s.utterance_index == index) return s;
    throw std::out_of_range("no score for utterance " + std::to_string(index));
}

} // namespace

TEST(ScoreTranscript, MatchesBruteForceOracle) {
    std::mt19937_64 rng(101);
    for (std::size_t dim : {16u, 64u}) {
        HashedBagProvider mock(dim);
        for (int iter = 0; iter < 60; ++iter) {
            auto t = random_transcript(rng);
            DuplicateConfig cfg{iter % 3 == 0 ? 5.0 : 15.0, 0.6};
            auto got = score_transcript(t, cfg, mock);
            auto want = brute_force_duplicates(t, cfg.window_s, cfg.threshold, dim);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                EXPECT_EQ(got[i].utterance_index, want[i].utterance_index);
                EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
                EXPECT_EQ(got[i].best_match_index, want[i].best);
                EXPECT_EQ(got[i].flagged, want[i].flagged);
                EXPECT_EQ(got[i].speaker, t.utterances()[i].speaker);
            }
        }
    }
}

TEST(ScoreTranscript, IdenticalTextInWindowScoresOne) {
    HashedBagProvider mock;
    auto c = score_transcript(load_fixture("game_c.log"), {}, mock);
    EXPECT_NEAR(by_index(c, 19).score, 1.0, 1e-6); // "I'll stop him." twice
    EXPECT_EQ(by_index(c, 19).best_match_index, 18u);
    EXPECT_TRUE(by_index(c, 19).flagged);

    auto a = score_transcript(load_fixture("game_a.log"), {}, mock);
    EXPECT_NEAR(by_index(a, 22).score, 1.0, 1e-6); // "Okay." 13.3 s after 019
    EXPECT_EQ(by_index(a, 22).best_match_index, 19u);
}

TEST(ScoreTranscript, TwoUtteranceCases) {
    HashedBagProvider mock;
    auto same = score_transcript(parse_transcript("000 - [0:1] A Push base.\n001 - [3:4] A Push base.\n"), {}, mock);
    EXPECT_DOUBLE_EQ(same[0].score, 0.0);
    EXPECT_FALSE(same[0].best_match_index);
    EXPECT_NEAR(same[1].score, 1.0, 1e-12);
    EXPECT_TRUE(same[1].flagged);

    // Out of the window: nothing to compare with.
    auto far = score_transcript(parse_transcript("000 - [0:1] A Push base.\n001 - [30:31] A Push base.\n"), {}, mock);
    EXPECT_DOUBLE_EQ(far[1].score, 0.0);
    EXPECT_FALSE(far[1].best_match_index);
    EXPECT_FALSE(far[1].flagged);

    // Other speakers never count.
    auto other = score_transcript(parse_transcript("000 - [0:1] A Push base.\n001 - [3:4] B Push base.\n"), {}, mock);
    EXPECT_DOUBLE_EQ(other[1].score, 0.0);
}

TEST(ScoreTranscript, GameAWithMock) {
    HashedBagProvider mock;
    auto a = score_transcript(load_fixture("game_a.log"), {}, mock);
    ASSERT_EQ(a.size(), 25u);
    EXPECT_DOUBLE_EQ(a[0].score, 0.0);
    EXPECT_FALSE(a[0].flagged);
    for (const auto& s : a) {
        EXPECT_EQ(s.speaker, "SPEAKER_01");
        EXPECT_GE(s.score, 0.0);
        EXPECT_LE(s.score, 1.0);
    }
    // "we can't" links 012 back to 011.
    EXPECT_EQ(by_index(a, 12).best_match_index, 11u);
}

TEST(ScoreTranscript, EmptyWindowMeansZero) {
    std::mt19937_64 rng(5);
    HashedBagProvider mock;
    for (int iter = 0; iter < 50; ++iter) {
        auto t = random_transcript(rng);
        auto scores = score_transcript(t, {}, mock);
        std::set<std::string> seen;
        for (const auto& s : scores) {
            if (seen.insert(s.speaker).second) {
                EXPECT_DOUBLE_EQ(s.score, 0.0);
                EXPECT_FALSE(s.flagged);
                EXPECT_FALSE(s.best_match_index);
            }
        }
    }
}

TEST(ScoreTranscript, MonotoneInWindow) {
    std::mt19937_64 rng(9);
    HashedBagProvider mock;
    for (int iter = 0; iter < 40; ++iter) {
        auto t = random_transcript(rng);
        auto narrow = score_transcript(t, {5.0, 0.6}, mock);
        auto wide = score_transcript(t, {20.0, 0.6}, mock);
        for (std::size_t i = 0; i < narrow.size(); ++i) EXPECT_GE(wide[i].score + 1e-12, narrow[i].score);
    }
}

TEST(ScoreTranscript, SpeakerIsolation) {
    std::mt19937_64 rng(13);
    HashedBagProvider mock;
    for (int iter = 0; iter < 30; ++iter) {
        auto t = random_transcript(rng);
        auto all = score_transcript(t, {}, mock);
        for (const auto& speaker : t.speakers()) {
            std::vector<Utterance> only;
            for (const auto& u : t.utterances())
                if (u.speaker == speaker) only.push_back(u);
            auto alone = score_transcript(Transcript(only), {}, mock);
            for (const auto& s : alone) EXPECT_EQ(s, by_index(all, s.utterance_index));
        }
    }
}

TEST(ScoreTranscript, TiesKeepEarliestMatch) {
    HashedBagProvider mock;
    auto t = parse_transcript("000 - [0:1] A go top\n001 - [1:2] A go top\n002 - [2:3] A go top\n");
    auto s = score_transcript(t, {}, mock);
    EXPECT_EQ(s[2].best_match_index, 0u);
}

TEST(ScoreTranscript, AgreesWithPerUtteranceScoring) {
    HashedBagProvider mock;
    auto t = load_fixture("game_a.log");
    auto v = speaker_view(t, "SPEAKER_01");
    auto all = score_transcript(t, {}, mock);
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto one = score_utterance(v, v.utterances()[i], {}, mock);
        EXPECT_EQ(one.best_match_index, all[i].best_match_index);
        EXPECT_NEAR(one.score, all[i].score, 1e-12);
        EXPECT_EQ(one.flagged, all[i].flagged);
    }
}

TEST(ScoreTranscript, FailureNamesSpeakerAndUtterances) {
    FailingProvider failing;
    auto t = parse_transcript("000 - [0:1] A fine\n001 - [1:2] B FAIL here\n002 - [2:3] B ok\n003 - [3:4] B FAIL here\n");
    try {
        score_transcript(t, {}, failing);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Batch);
        EXPECT_NE(std::string(e.what()).find("speaker B"), std::string::npos) << e.what();
        EXPECT_EQ(e.positions(), (std::vector<std::size_t>{1, 3}));
    }
}

TEST(ScoreTranscript, EmptyTranscript) {
    HashedBagProvider mock;
    EXPECT_TRUE(score_transcript(Transcript(std::vector<Utterance>{}), {}, mock).empty());
    EXPECT_TRUE(duplicate_summary({}).empty());
}

TEST(DuplicateConfig, Validation) {
    HashedBagProvider mock;
    auto t = load_fixture("game_a.log");
    EXPECT_THROW(score_transcript(t, {0.0, 0.6}, mock), Error);
    EXPECT_THROW(score_transcript(t, {15.0, 0.0}, mock), Error);
    EXPECT_THROW(score_transcript(t, {15.0, 1.5}, mock), Error);
    EXPECT_NO_THROW(score_transcript(t, {15.0, 1.0}, mock));
}

TEST(DuplicateSummary, QuarterFlagged) {
    std::vector<DuplicateScore> s{{0, "A", 0.0, std::nullopt, false},
                                  {1, "A", 0.9, 0, true},
                                  {2, "A", 0.3, 1, false},
                                  {3, "A", 0.2, 2, false}};
    auto sum = duplicate_summary(s);
    ASSERT_EQ(sum.size(), 1u);
    EXPECT_EQ(sum["A"].count, 4u);
    EXPECT_EQ(sum["A"].flagged_count, 1u);
    EXPECT_DOUBLE_EQ(sum["A"].flagged_ratio, 0.25);
    EXPECT_NEAR(sum["A"].mean_score, 0.35, 1e-12);
}

TEST(DuplicateSummary, GameARecount) {
    HashedBagProvider mock;
    auto t = load_fixture("game_a.log");
    auto sum = duplicate_summary(score_transcript(t, {}, mock));
    auto oracle = brute_force_duplicates(t, 15.0, 0.6, 64);
    std::size_t flagged = 0;
    double total = 0;
    for (const auto& o : oracle) {
        flagged += o.flagged ? 1 : 0;
        total += o.score;
    }
    const auto& agg = sum.at("SPEAKER_01");
    EXPECT_EQ(agg.count, 25u);
    EXPECT_EQ(agg.flagged_count, flagged);
    EXPECT_DOUBLE_EQ(agg.flagged_ratio, static_cast<double>(flagged) / 25.0);
    EXPECT_NEAR(agg.mean_score, total / 25.0, 1e-12);
}
