#pragma once

// Independent reference implementations used to check the library. None of
// these share code with include/wimp; they are written the slow, obvious way.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

// Concordance through the mean-squared-difference identity
//   E[(Y - X)^2] = (mu_y - mu_x)^2 + sx^2 + sy^2 - 2 r sx sy
// so ccc = 1 - E[(Y - X)^2] / ((mu_y - mu_x)^2 + sx^2 + sy^2).
inline double ccc(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double vx = 0, vy = 0, msd = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
        msd += (y[i] - x[i]) * (y[i] - x[i]);
    }
    vx /= n;
    vy /= n;
    msd /= n;
    return static_cast<double>(1.0L - msd / ((my - mx) * (my - mx) + vx + vy));
}

// Row-major (T x K) emissions and (K+2 x K+2) transitions, start = K, stop = K+1.
struct CrfInstance {
    std::size_t T = 0, K = 0;
    std::vector<double> emit;
    std::vector<double> trans;

    double e(std::size_t t, std::size_t k) const { return emit[t * K + k]; }
    double tr(std::size_t i, std::size_t j) const { return trans[i * (K + 2) + j]; }

    double path_score(const std::vector<std::size_t>& y) const {
        double s = tr(K, y[0]) + e(0, y[0]);
        for (std::size_t t = 1; t < T; ++t) s += tr(y[t - 1], y[t]) + e(t, y[t]);
        return s + tr(y[T - 1], K + 1);
    }

    // Calls f on each of the K^T paths, in lexicographic order.
    void for_each_path(const std::function<void(const std::vector<std::size_t>&)>& f) const {
        std::vector<std::size_t> y(T, 0);
        while (true) {
            f(y);
            std::size_t t = T;
            while (t > 0 && ++y[t - 1] == K) y[--t] = 0;
            if (t == 0) return;
        }
    }

    double log_partition() const {
        std::vector<double> scores;
        for_each_path([&](const std::vector<std::size_t>& y) { scores.push_back(path_score(y)); });
        const double m = *std::max_element(scores.begin(), scores.end());
        double s = 0;
        for (double v : scores) s += std::exp(v - m);
        return m + std::log(s);
    }

    std::pair<std::vector<std::size_t>, double> best_path() const {
        std::vector<std::size_t> best;
        double best_score = -std::numeric_limits<double>::infinity();
        for_each_path([&](const std::vector<std::size_t>& y) {
            const double s = path_score(y);
            if (s > best_score) {
                best_score = s;
                best = y;
            }
        });
        return {best, best_score};
    }
};

// Plain recursive Levenshtein distance (memoised so length 8 stays cheap).
inline std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
    std::function<long(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> long {
        if (i == 0) return static_cast<long>(j);
        if (j == 0) return static_cast<long>(i);
        long& m = memo[i][j];
        if (m >= 0) return m;
        const long sub = d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
        m = std::min({sub, d(i - 1, j) + 1, d(i, j - 1) + 1});
        return m;
    };
    return static_cast<std::size_t>(d(a.size(), b.size()));
}

} // namespace oracle
