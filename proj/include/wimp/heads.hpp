#pragma once

// Output layers on top of the encoder: a linear-chain CRF over importance
// classes and a sigmoid regression unit.

#include "wimp/autodiff.hpp"
#include "wimp/encoder.hpp"
#include "wimp/error.hpp"
#include "wimp/rng.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace wimp {

using TagSequence = std::vector<std::size_t>;

// Transitions into the virtual start state and out of the virtual stop state
// are never read by the recursions below; they hold this value so the matrix
// stays finite.
inline constexpr double kMaskedTransition = -1e4;

// Transition layout: rows are "from", columns "to". Index K is the virtual
// start state and K + 1 the virtual stop state.
struct CRFParams {
    ad::Var emission_proj;  // (D x K)
    ad::Var transition;     // (K+2 x K+2)
    std::size_t num_classes = 0;

    std::vector<ad::Var> parameters() const { return {emission_proj, transition}; }
};

inline ad::Tensor masked_transition(std::size_t k) {
    ad::Tensor t({k + 2, k + 2}, 0.0);
    for (std::size_t i = 0; i < k + 2; ++i) {
        t(i, k) = kMaskedTransition;
        t(k + 1, i) = kMaskedTransition;
    }
    return t;
}

inline CRFParams make_crf(std::size_t input_dim, std::size_t num_classes, Rng& rng) {
    if (num_classes < 2) throw ConfigError("CRF needs at least 2 classes");
    return {ad::parameter(glorot_uniform(input_dim, num_classes, rng), "crf.emission_proj"),
            ad::parameter(masked_transition(num_classes), "crf.transition"), num_classes};
}

namespace detail {

inline std::size_t crf_classes(const ad::Tensor& emissions, const ad::Tensor& transition) {
    if (emissions.rank() != 2 || transition.rank() != 2) throw ShapeError("crf: rank-2 operands required");
    const std::size_t k = emissions.cols();
    if (transition.rows() != k + 2 || transition.cols() != k + 2) {
        throw ShapeError("crf: emissions " + ad::shape_string(emissions.shape()) + " need a transition of (" +
                         std::to_string(k + 2) + "x" + std::to_string(k + 2) + "), got " +
                         ad::shape_string(transition.shape()));
    }
    return k;
}

} // namespace detail

inline ad::Var crf_emissions(const ad::Var& encoded, const CRFParams& crf) {
    return ad::matmul(encoded, crf.emission_proj);
}

// log sum over all K^T tag paths of exp(path score), by the forward recursion
//   alpha_0[j] = start[j] + e_0[j]
//   alpha_t[j] = logsumexp_i(alpha_{t-1}[i] + trans[i][j]) + e_t[j]
//   logZ      = logsumexp_j(alpha_{T-1}[j] + stop[j])
inline ad::Var crf_log_partition(const ad::Var& emissions, const ad::Var& transition) {
    const std::size_t k = detail::crf_classes(emissions.value(), transition.value());
    const std::size_t T = emissions.value().rows();
    auto from_to = ad::slice(transition, 0, k, 0, k);
    auto to_from = ad::transpose(from_to);  // row j holds trans[.][j]
    auto start = ad::slice(transition, k, k + 1, 0, k);
    auto stop = ad::transpose(ad::slice(transition, 0, k, k + 1, k + 2));

    auto alpha = ad::add(start, ad::row(emissions, 0));
    for (std::size_t t = 1; t < T; ++t) {
        auto scores = ad::add(to_from, alpha);  // [j][i] = trans[i][j] + alpha[i]
        alpha = ad::add(ad::transpose(ad::logsumexp(scores)), ad::row(emissions, t));
    }
    return ad::logsumexp(ad::add(alpha, stop));
}

inline double crf_log_partition(const ad::Tensor& emissions, const ad::Tensor& transition) {
    if (emissions.empty()) throw DomainError("crf_log_partition: empty sequence");
    return crf_log_partition(ad::constant(emissions), ad::constant(transition)).item();
}

// start -> y_0, y_{t-1} -> y_t, y_{T-1} -> stop, plus the chosen emissions.
inline ad::Var crf_path_score(const ad::Var& emissions, const ad::Var& transition, const TagSequence& tags) {
    const std::size_t k = detail::crf_classes(emissions.value(), transition.value());
    const std::size_t T = emissions.value().rows();
    if (tags.size() != T) {
        throw DomainError("crf: tag sequence length " + std::to_string(tags.size()) + " != sequence length " +
                          std::to_string(T));
    }
    std::vector<std::pair<std::size_t, std::size_t>> emit, trans;
    std::size_t prev = k;
    for (std::size_t t = 0; t < T; ++t) {
        if (tags[t] >= k) {
            throw DomainError("crf: tag id " + std::to_string(tags[t]) + " out of range for " + std::to_string(k) +
                              " classes");
        }
        emit.emplace_back(t, tags[t]);
        trans.emplace_back(prev, tags[t]);
        prev = tags[t];
    }
    trans.emplace_back(prev, k + 1);
    return ad::add(ad::sum(ad::select(emissions, std::move(emit))), ad::sum(ad::select(transition, std::move(trans))));
}

// Negative log-likelihood of the gold path.
inline ad::Var crf_nll(const ad::Var& emissions, const ad::Var& transition, const TagSequence& gold) {
    auto gold_score = crf_path_score(emissions, transition, gold);
    return ad::sub(crf_log_partition(emissions, transition), gold_score);
}

struct ViterbiResult {
    TagSequence tags;
    double score = 0.0;
};

// Highest-scoring path. Ties resolve to the lowest class index, both at each
// backpointer and for the final state.
inline ViterbiResult viterbi_decode(const ad::Tensor& emissions, const ad::Tensor& transition) {
    const std::size_t k = detail::crf_classes(emissions, transition);
    const std::size_t T = emissions.rows();
    std::vector<double> score(k), next(k);
    std::vector<std::size_t> back(T * k, 0);
    for (std::size_t j = 0; j < k; ++j) score[j] = transition(k, j) + emissions(0, j);
    for (std::size_t t = 1; t < T; ++t) {
        for (std::size_t j = 0; j < k; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t i = 0; i < k; ++i) {
                const double s = score[i] + transition(i, j);
                if (s > best) {
                    best = s;
                    arg = i;
                }
            }
            next[j] = best + emissions(t, j);
            back[t * k + j] = arg;
        }
        std::swap(score, next);
    }
    double best = -std::numeric_limits<double>::infinity();
    std::size_t last = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double s = score[j] + transition(j, k + 1);
        if (s > best) {
            best = s;
            last = j;
        }
    }
    ViterbiResult out;
    out.score = best;
    out.tags.assign(T, 0);
    out.tags[T - 1] = last;
    for (std::size_t t = T - 1; t > 0; --t) out.tags[t - 1] = back[t * k + out.tags[t]];
    return out;
}

struct SigmoidHead {
    ad::Var proj;  // (D x 1)
    ad::Var bias;  // (1 x 1)

    std::vector<ad::Var> parameters() const { return {proj, bias}; }
};

inline SigmoidHead make_sigmoid_head(std::size_t input_dim, Rng& rng) {
    return {ad::parameter(glorot_uniform(input_dim, 1, rng), "sig.proj"),
            ad::parameter(ad::Tensor({1, 1}, 0.0), "sig.bias")};
}

// sigmoid(C_i . proj + bias) for each row -> (T x 1).
inline ad::Var sigmoid_scores(const ad::Var& encoded, const SigmoidHead& head) {
    return ad::sigmoid(ad::add(ad::matmul(encoded, head.proj), head.bias));
}

inline std::vector<double> sigmoid_predict(const std::vector<EncodedToken>& encoded, const SigmoidHead& head) {
    if (encoded.empty()) throw DomainError("sigmoid_predict: empty sentence");
    auto scores = sigmoid_scores(stack_encodings(encoded), head);
    return scores.value().vec();
}

// mean over tokens of (pred - gold)^2.
inline ad::Var squared_loss(const ad::Var& pred, const std::vector<double>& gold) {
    if (pred.value().size() != gold.size()) {
        throw DomainError("squared_loss: " + std::to_string(pred.value().size()) + " predictions vs " +
                          std::to_string(gold.size()) + " targets");
    }
    if (gold.empty()) throw DomainError("squared_loss: empty sequence");
    auto diff = ad::sub(pred, ad::constant(ad::Tensor(pred.shape(), gold)));
    return ad::scale(ad::sum(ad::mul(diff, diff)), 1.0 / static_cast<double>(gold.size()));
}

inline double squared_loss(const std::vector<double>& pred, const std::vector<double>& gold) {
    if (pred.empty()) throw DomainError("squared_loss: empty sequence");
    return squared_loss(ad::constant(ad::Tensor::row(pred)), gold).item();
}

} // namespace wimp
