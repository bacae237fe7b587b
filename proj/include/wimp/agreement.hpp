#pragma once

#include "wimp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wimp {

// Two aligned score sequences over the same tokens: annotator A vs B, or
// human vs model. `x` is the measurement under test, `y` the reference.
struct ScorePair {
    std::string utterance_id;
    std::vector<double> x;
    std::vector<double> y;

    friend bool operator==(const ScorePair&, const ScorePair&) = default;
};

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;
};

struct AgreementStats {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sd_x = 0.0;
    double sd_y = 0.0;
    double pearson = 0.0;
    double ccc = 0.0;
    std::size_t n = 0;
};

// Mean and population (divide-by-n) standard deviation.
inline SummaryStats summary_stats(std::span<const double> values) {
    if (values.empty()) throw DomainError("summary_stats: empty sequence");
    const double n = static_cast<double>(values.size());
    double s = 0.0;
    for (double v : values) s += v;
    const double mean = s / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y, const char* who) {
    if (x.size() != y.size()) {
        throw DomainError(std::string(who) + ": sequences differ in length (" + std::to_string(x.size()) +
                          " vs " + std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) throw DomainError(std::string(who) + ": need at least 2 aligned values");
}

inline double population_cov(std::span<const double> x, std::span<const double> y, double mx, double my) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size());
}

inline double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

} // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y, "pearson");
    const auto sx = summary_stats(x);
    const auto sy = summary_stats(y);
    if (sx.sd == 0.0 || sy.sd == 0.0) {
        throw DegenerateVarianceError("pearson: zero variance in " + std::string(sx.sd == 0.0 ? "x" : "y"));
    }
    return detail::clamp_unit(detail::population_cov(x, y, sx.mean, sy.mean) / (sx.sd * sy.sd));
}

inline double pearson(const ScorePair& pair) { return pearson(pair.x, pair.y); }

// Lin's concordance correlation coefficient:
//   ccc = 2 r Sx Sy / ((mean_y - mean_x)^2 + Sx^2 + Sy^2)
// with population standard deviations and r the Pearson correlation.
inline AgreementStats concordance(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y, "concordance");
    const auto sx = summary_stats(x);
    const auto sy = summary_stats(y);
    AgreementStats out;
    out.n = x.size();
    out.mean_x = sx.mean;
    out.mean_y = sy.mean;
    out.sd_x = sx.sd;
    out.sd_y = sy.sd;
    out.pearson = pearson(x, y);
    const double shift = sy.mean - sx.mean;
    const double denom = shift * shift + sx.sd * sx.sd + sy.sd * sy.sd;
    out.ccc = detail::clamp_unit(2.0 * out.pearson * sx.sd * sy.sd / denom);
    return out;
}

inline AgreementStats concordance(const ScorePair& pair) { return concordance(pair.x, pair.y); }

// All pairs concatenated into one token-level pair.
inline ScorePair pool(std::span<const ScorePair> pairs) {
    ScorePair out;
    out.utterance_id = "*";
    for (const auto& p : pairs) {
        if (p.x.size() != p.y.size()) {
            throw AlignmentError("pair " + p.utterance_id + " has mismatched lengths");
        }
        out.x.insert(out.x.end(), p.x.begin(), p.x.end());
        out.y.insert(out.y.end(), p.y.begin(), p.y.end());
    }
    return out;
}

} // namespace wimp
