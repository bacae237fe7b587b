#include "wimp/agreement.hpp"
#include "wimp/rng.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace wimp;
using Catch::Approx;

TEST_CASE("summary_stats") {
    const std::vector<double> a{0.2, 0.4};
    auto s = summary_stats(a);
    CHECK(s.mean == Approx(0.3).margin(1e-15));
    CHECK(s.sd == Approx(0.1).margin(1e-15));
    const std::vector<double> b{5};
    s = summary_stats(b);
    CHECK(s.mean == 5.0);
    CHECK(s.sd == 0.0);
    const std::vector<double> c{0, 0, 1, 1};
    s = summary_stats(c);
    CHECK(s.mean == 0.5);
    CHECK(s.sd == 0.5);
    CHECK_THROWS_AS(summary_stats(std::vector<double>{}), DomainError);
}

TEST_CASE("pearson") {
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 1.0);
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == -1.0);
    CHECK_THROWS_AS(pearson(std::vector<double>{0, 0, 0}, std::vector<double>{1, 2, 3}), DegenerateVarianceError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), DomainError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), DomainError);
}

TEST_CASE("concordance: hand cases") {
    CHECK(concordance(std::vector<double>{0.1, 0.5, 0.9}, std::vector<double>{0.1, 0.5, 0.9}).ccc == 1.0);
    CHECK(concordance(std::vector<double>{0.2, 0.4}, std::vector<double>{0.4, 0.2}).ccc == -1.0);
    const auto s = concordance(std::vector<double>{0, 0, 1, 1}, std::vector<double>{0.05, 0.05, 0.95, 0.95});
    CHECK(s.pearson == Approx(1.0).margin(1e-15));
    CHECK(s.sd_x == Approx(0.5));
    CHECK(s.sd_y == Approx(0.45));
    // 2 * 0.5 * 0.45 / (0.25 + 0.2025)
    CHECK(s.ccc == Approx(0.45 / 0.4525).margin(1e-12));
    CHECK(s.ccc == Approx(0.9945).margin(5e-5));
    CHECK(s.n == 4);
    CHECK_THROWS_AS(concordance(std::vector<double>{0.5, 0.5}, std::vector<double>{0.1, 0.2}),
                    DegenerateVarianceError);
}

TEST_CASE("concordance: matches the squared-difference oracle") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(50), y(50);
        for (auto& v : x) v = rng.uniform();
        for (auto& v : y) v = rng.uniform();
        const auto s = concordance(x, y);
        REQUIRE(std::abs(s.ccc - oracle::ccc(x, y)) < 1e-10);
    }
}

TEST_CASE("concordance: properties") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(20), y(20);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform();
            y[i] = 0.6 * x[i] + 0.4 * rng.uniform();
        }
        const auto xy = concordance(x, y);
        const auto yx = concordance(y, x);
        CHECK(std::abs(xy.ccc - yx.ccc) < 1e-12);
        CHECK(std::abs(xy.ccc) <= std::abs(xy.pearson) + 1e-15);
        CHECK(xy.ccc >= -1.0);
        CHECK(xy.ccc <= 1.0);

        auto shifted = y;
        for (auto& v : shifted) v += 0.1;
        const auto sh = concordance(x, shifted);
        CHECK(sh.pearson == Approx(xy.pearson).margin(1e-12));
        const auto further = concordance(x, [&] {
            auto s = shifted;
            for (auto& v : s) v += 0.1;
            return s;
        }());
        CHECK(std::abs(further.ccc) < std::abs(sh.ccc));
    }
}

TEST_CASE("concordance equals pearson when means and spreads agree") {
    // y is a permutation of x: same mean, same SD
    const std::vector<double> x{0.1, 0.4, 0.35, 0.9, 0.6};
    const std::vector<double> y{0.4, 0.1, 0.9, 0.35, 0.6};
    const auto s = concordance(x, y);
    CHECK(s.ccc == Approx(s.pearson).margin(1e-15));
    // and differs once the means move apart
    auto moved = y;
    for (auto& v : moved) v *= 0.5;
    const auto m = concordance(x, moved);
    CHECK(std::abs(m.ccc) < std::abs(m.pearson));
}

TEST_CASE("pool concatenates in order") {
    std::vector<ScorePair> pairs{{"u1", {0.1, 0.2}, {0.3, 0.4}}, {"u2", {0.5}, {0.6}}};
    const auto p = pool(pairs);
    CHECK(p.x == std::vector<double>{0.1, 0.2, 0.5});
    CHECK(p.y == std::vector<double>{0.3, 0.4, 0.6});
}
