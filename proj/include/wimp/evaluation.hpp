#pragma once

// Test-set measures: pooled RMS, 6-class macro-F1, row-normalised confusion
// matrix and model-vs-human concordance.

#include "wimp/agreement.hpp"
#include "wimp/corpus.hpp"
#include "wimp/error.hpp"
#include "wimp/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wimp {

using ClassMatrix = std::array<std::array<double, kNumClasses>, kNumClasses>;

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};
    ClassMatrix normalized{};
};

struct F1Scores {
    double macro = 0.0;
    std::array<double, kNumClasses> per_class{};
};

struct EvalReport {
    std::size_t tokens = 0;
    double rms = 0.0;
    double macro_f1 = 0.0;
    std::array<double, kNumClasses> per_class_f1{};
    ConfusionMatrix confusion;
    // Unset when either side has zero variance.
    std::optional<double> ccc_vs_human;
};

// sqrt(mean((pred - gold)^2)) over all tokens.
inline double rms(std::span<const double> pred, std::span<const double> gold) {
    if (pred.size() != gold.size()) {
        throw DomainError("rms: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(gold.size()) +
                          " references");
    }
    if (pred.empty()) throw DomainError("rms: empty sequence");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - gold[i]) * (pred[i] - gold[i]);
    return std::sqrt(s / static_cast<double>(pred.size()));
}

inline std::vector<ImportanceClass> classes_from_ids(std::span<const std::size_t> ids) {
    std::vector<ImportanceClass> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(class_from_index(id));
    return out;
}

inline ConfusionMatrix confusion(std::span<const ImportanceClass> pred, std::span<const ImportanceClass> gold) {
    if (pred.size() != gold.size()) throw DomainError("confusion: prediction and reference lengths differ");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < pred.size(); ++i) ++m.counts[class_index(gold[i])][class_index(pred[i])];
    for (std::size_t r = 0; r < kNumClasses; ++r) {
        std::size_t support = 0;
        for (auto c : m.counts[r]) support += c;
        if (support == 0) continue;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            m.normalized[r][c] = static_cast<double>(m.counts[r][c]) / static_cast<double>(support);
        }
    }
    return m;
}

// Per-class F1 with undefined precision or recall counted as 0; macro is the
// unweighted mean over all six classes.
inline F1Scores macro_f1(std::span<const ImportanceClass> pred, std::span<const ImportanceClass> gold) {
    const auto m = confusion(pred, gold);
    F1Scores out;
    double total = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        const double tp = static_cast<double>(m.counts[k][k]);
        double predicted = 0.0, actual = 0.0;
        for (std::size_t j = 0; j < kNumClasses; ++j) {
            predicted += static_cast<double>(m.counts[j][k]);
            actual += static_cast<double>(m.counts[k][j]);
        }
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = actual > 0 ? tp / actual : 0.0;
        out.per_class[k] = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
        total += out.per_class[k];
    }
    out.macro = total / static_cast<double>(kNumClasses);
    return out;
}

// Report over pooled token-level predictions. Pairs are summed in sorted
// order, so the result does not depend on utterance order.
inline EvalReport make_report(std::span<const double> pred_scores, std::span<const ImportanceClass> pred_classes,
                              std::span<const double> gold_scores) {
    if (pred_scores.size() != gold_scores.size() || pred_classes.size() != gold_scores.size()) {
        throw DomainError("make_report: prediction and reference lengths differ");
    }
    if (gold_scores.empty()) throw DomainError("make_report: empty test set");

    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(gold_scores.size());
    for (std::size_t i = 0; i < gold_scores.size(); ++i) pairs.emplace_back(pred_scores[i], gold_scores[i]);
    std::sort(pairs.begin(), pairs.end());
    std::vector<double> p, g;
    for (auto [a, b] : pairs) {
        p.push_back(a);
        g.push_back(b);
    }

    std::vector<ImportanceClass> gold_classes;
    for (double s : gold_scores) gold_classes.push_back(discretize(s));

    EvalReport r;
    r.tokens = gold_scores.size();
    r.rms = rms(p, g);
    const auto f1 = macro_f1(pred_classes, gold_classes);
    r.macro_f1 = f1.macro;
    r.per_class_f1 = f1.per_class;
    r.confusion = confusion(pred_classes, gold_classes);
    if (p.size() >= 2) {
        try {
            r.ccc_vs_human = concordance(p, g).ccc;
        } catch (const DegenerateVarianceError&) {
            r.ccc_vs_human.reset();
        }
    }
    return r;
}

// Score `test` with `model`. `head` must match the model's head.
inline EvalReport evaluate(const Model& model, HeadKind head, const std::vector<AnnotatedUtterance>& test) {
    if (model.head() != head) {
        throw ConfigError("evaluate: model has a " + to_string(model.head()) + " head, asked for " + to_string(head));
    }
    if (test.empty()) throw DomainError("evaluate: empty test set");
    std::vector<double> pred, gold;
    std::vector<ImportanceClass> classes;
    for (const auto& a : test) {
        const auto p = model.predict(a.utterance.tokens);
        pred.insert(pred.end(), p.scores.begin(), p.scores.end());
        classes.insert(classes.end(), p.classes.begin(), p.classes.end());
        for (auto s : a.scores) gold.push_back(s.value());
    }
    return make_report(pred, classes, gold);
}

inline EvalReport evaluate(const Model& model, const std::vector<AnnotatedUtterance>& test) {
    return evaluate(model, model.head(), test);
}

// Arithmetic mean of several runs' reports: rms, F1s, normalised confusion
// cells and ccc are averaged (ccc only if every run defines it); counts and
// token totals are summed.
inline EvalReport average_reports(std::span<const EvalReport> reports) {
    if (reports.empty()) throw DomainError("average_reports: no reports");
    const double n = static_cast<double>(reports.size());
    EvalReport out;
    double ccc = 0.0;
    bool ccc_defined = true;
    for (const auto& r : reports) {
        out.tokens += r.tokens;
        out.rms += r.rms / n;
        out.macro_f1 += r.macro_f1 / n;
        for (std::size_t k = 0; k < kNumClasses; ++k) out.per_class_f1[k] += r.per_class_f1[k] / n;
        for (std::size_t i = 0; i < kNumClasses; ++i)
            for (std::size_t j = 0; j < kNumClasses; ++j) {
                out.confusion.counts[i][j] += r.confusion.counts[i][j];
                out.confusion.normalized[i][j] += r.confusion.normalized[i][j] / n;
            }
        if (r.ccc_vs_human) {
            ccc += *r.ccc_vs_human / n;
        } else {
            ccc_defined = false;
        }
    }
    if (ccc_defined) out.ccc_vs_human = ccc;
    return out;
}

namespace detail {

inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace detail

// key=value lines.
inline void write_report_text(std::ostream& out, const EvalReport& r) {
    out << "tokens=" << r.tokens << '\n';
    out << "rms=" << detail::fixed(r.rms) << '\n';
    out << "macro_f1=" << detail::fixed(r.macro_f1) << '\n';
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        out << "f1_" << class_name(class_from_index(k)) << '=' << detail::fixed(r.per_class_f1[k]) << '\n';
    }
    out << "ccc_vs_human=" << (r.ccc_vs_human ? detail::fixed(*r.ccc_vs_human) : "undefined") << '\n';
}

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Same numbers as the text form, rounded to the same 6 decimals.
inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["tokens"] = r.tokens;
    j["rms"] = round6(r.rms);
    j["macro_f1"] = round6(r.macro_f1);
    j["per_class_f1"] = nlohmann::json::array();
    for (double f : r.per_class_f1) j["per_class_f1"].push_back(round6(f));
    j["ccc_vs_human"] = r.ccc_vs_human ? nlohmann::json(round6(*r.ccc_vs_human)) : nlohmann::json(nullptr);
    j["confusion"] = r.confusion.counts;
    return j;
}

inline void write_report_json(std::ostream& out, const EvalReport& r) { out << report_to_json(r).dump() << '\n'; }

// Header row then one row per true class of normalised values.
inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) {
    out << "true\\pred";
    for (std::size_t k = 0; k < kNumClasses; ++k) out << ',' << class_name(class_from_index(k));
    out << '\n';
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        out << class_name(class_from_index(i));
        for (std::size_t j = 0; j < kNumClasses; ++j) out << ',' << detail::fixed(m.normalized[i][j]);
        out << '\n';
    }
}

} // namespace wimp
