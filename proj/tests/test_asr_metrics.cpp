#include "wimp/asr_metrics.hpp"
#include "wimp/rng.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace wimp;
using Catch::Approx;
using V = std::vector<std::string>;

namespace {

V random_words(Rng& rng, std::size_t max_len, std::size_t min_len = 0) {
    static const char* alphabet[] = {"a", "b", "c"};
    V out(min_len + rng.below(max_len - min_len + 1));
    for (auto& w : out) w = alphabet[rng.below(3)];
    return out;
}

std::vector<EditKind> kinds(const Alignment& a) {
    std::vector<EditKind> out;
    for (const auto& op : a) out.push_back(op.kind);
    return out;
}

} // namespace

TEST_CASE("align: examples") {
    const V abc{"a", "b", "c"};
    CHECK(kinds(align(abc, abc)) == std::vector{EditKind::match, EditKind::match, EditKind::match});
    CHECK(kinds(align(abc, V{"a", "x", "c"})) == std::vector{EditKind::match, EditKind::substitute, EditKind::match});
    CHECK(kinds(align(abc, V{})) == std::vector{EditKind::del, EditKind::del, EditKind::del});
    CHECK_THROWS_AS(align(V{}, abc), DomainError);
}

TEST_CASE("align: op invariants") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const auto ref = random_words(rng, 8, 1);
        const auto hyp = random_words(rng, 8);
        const auto a = align(ref, hyp);
        std::size_t r = 0, h = 0;
        for (const auto& op : a) {
            switch (op.kind) {
            case EditKind::match:
                REQUIRE(op.ref_index == r);
                REQUIRE(op.hyp_index == h);
                CHECK(ref[r] == hyp[h]);
                ++r, ++h;
                break;
            case EditKind::substitute:
                REQUIRE(op.ref_index == r);
                REQUIRE(op.hyp_index == h);
                CHECK(ref[r] != hyp[h]);
                ++r, ++h;
                break;
            case EditKind::del:
                REQUIRE(op.ref_index == r);
                REQUIRE_FALSE(op.hyp_index);
                ++r;
                break;
            case EditKind::insert:
                REQUIRE_FALSE(op.ref_index);
                REQUIRE(op.hyp_index == h);
                ++h;
                break;
            }
        }
        CHECK(r == ref.size());
        CHECK(h == hyp.size());
        CHECK(count_edits(a).errors() == oracle::levenshtein(ref, hyp));
    }
}

TEST_CASE("wer") {
    CHECK(wer(align(V{"a", "b"}, V{"a", "b"})) == 0.0);
    CHECK(wer(align(V{"a", "b", "c"}, V{"a", "x", "c"})) == Approx(1.0 / 3.0));
    CHECK(wer(align(V{"a"}, V{"x", "y", "z"})) == 3.0);
}

TEST_CASE("weighted_wer: examples") {
    const V ref{"a", "b", "c"};
    SECTION("uniform importance reduces to (S+D+I)/(N+I)") {
        const std::vector<double> ones(3, 1.0);
        const auto a = align(ref, V{"a", "x", "c", "d"});  // 1 sub, 1 ins
        CHECK(weighted_wer(a, ones) == Approx(2.0 / 4.0));
        const auto b = align(ref, V{"a", "x"});  // 1 sub, 1 del
        CHECK(weighted_wer(b, ones) == wer(b));
    }
    SECTION("errors only on zero-importance words") {
        const auto a = align(ref, V{"a", "x", "c"});
        CHECK(weighted_wer(a, std::vector<double>{0.9, 0.0, 0.9}) == 0.0);
        CHECK(wer(a) > 0.0);
    }
    SECTION("hand evaluation") {
        const auto a = align(ref, V{"a", "x", "c"});
        CHECK(weighted_wer(a, std::vector<double>{0.9, 0.1, 0.9}) == Approx(0.1 / 1.9).margin(1e-15));
        CHECK(weighted_wer(a, std::vector<double>{0.9, 0.1, 0.9}) == Approx(0.0526).margin(1e-4));
    }
    SECTION("no importance at all") {
        CHECK(weighted_wer(align(ref, V{"x"}), std::vector<double>{0, 0, 0}) == 0.0);
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(weighted_wer(align(ref, ref), std::vector<double>{1, 1}), DomainError);
        ScoredReference sr{{{"a", 0}, {"b", 1}}, {0.5}};
        CHECK_THROWS_AS(weighted_wer(align(ref, ref), sr), DomainError);
    }
}

TEST_CASE("weighted_wer: properties") {
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto ref = random_words(rng, 8, 1);
        const auto hyp = random_words(rng, 8);
        const auto a = align(ref, hyp);
        std::vector<double> w(ref.size());
        for (auto& v : w) v = rng.uniform();
        const double ww = weighted_wer(a, w);
        CHECK(ww >= 0.0);
        CHECK(ww <= 1.0);

        if (count_edits(a).insertions == 0) {
            const std::vector<double> uniform(ref.size(), 0.35);
            CHECK(std::abs(weighted_wer(a, uniform) - wer(a)) < 1e-12);
        }
        // raising an errorful word's importance never lowers the rate
        for (const auto& op : a) {
            if (op.kind == EditKind::substitute || op.kind == EditKind::del) {
                auto more = w;
                more[*op.ref_index] = std::min(1.0, more[*op.ref_index] + 0.3);
                CHECK(weighted_wer(a, more) >= ww - 1e-15);
                break;
            }
        }
    }
}

TEST_CASE("scoring_tokens lowercases and splits on whitespace") {
    CHECK(scoring_tokens("  Okay\tthen,  Dallas ") == V{"okay", "then,", "dallas"});
}
