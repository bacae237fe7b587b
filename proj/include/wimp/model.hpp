#pragma once

// A complete word-importance tagger: encoder plus one of the two heads.

#include "wimp/autodiff.hpp"
#include "wimp/corpus.hpp"
#include "wimp/encoder.hpp"
#include "wimp/error.hpp"
#include "wimp/heads.hpp"
#include "wimp/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wimp {

enum class HeadKind : std::uint8_t { crf = 0, sig = 1 };

inline std::string to_string(HeadKind h) { return h == HeadKind::crf ? "crf" : "sig"; }

inline HeadKind parse_head(std::string_view name) {
    if (name == "crf") return HeadKind::crf;
    if (name == "sig") return HeadKind::sig;
    throw ConfigError("unknown head '" + std::string(name) + "' (expected crf or sig)");
}

struct ModelConfig {
    EncoderDims encoder;
    HeadKind head = HeadKind::sig;
    std::size_t num_classes = kNumClasses;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Lowercased words of `train` (after any pretrained words), and every
// character seen in `train`, in first-appearance order.
inline Vocabulary build_vocabulary(const std::vector<AnnotatedUtterance>& train,
                                   const PretrainedEmbeddings* pretrained = nullptr) {
    Vocabulary vocab;
    if (pretrained) {
        for (const auto& w : pretrained->words) vocab.add_word(detail::lower_ascii(w));
    }
    for (const auto& a : train) {
        for (const auto& t : a.utterance.tokens) {
            vocab.add_word(detail::lower_ascii(t.text));
            for (char32_t c : utf8_code_points(t.text)) vocab.add_char(c);
        }
    }
    return vocab;
}

struct Prediction {
    std::vector<double> scores;
    std::vector<ImportanceClass> classes;
};

class Model {
public:
    Model(ModelConfig config, Vocabulary vocab, Rng& rng, const PretrainedEmbeddings* pretrained = nullptr)
        : config_(config), vocab_(std::move(vocab)) {
        if (config_.num_classes != kNumClasses && config_.head == HeadKind::crf) {
            throw ConfigError("CRF head is defined over the " + std::to_string(kNumClasses) + " importance classes");
        }
        encoder_ = make_encoder(config_.encoder, vocab_, rng, pretrained);
        if (config_.head == HeadKind::crf) {
            crf_ = make_crf(config_.encoder.output_dim(), config_.num_classes, rng);
        } else {
            sig_ = make_sigmoid_head(config_.encoder.output_dim(), rng);
        }
    }

    // Parameters are shared handles, so copies would alias; move only.
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    const ModelConfig& config() const noexcept { return config_; }
    HeadKind head() const noexcept { return config_.head; }
    const Vocabulary& vocab() const noexcept { return vocab_; }
    const EncoderParams& encoder() const noexcept { return encoder_; }
    const CRFParams& crf() const { return crf_.value(); }
    const SigmoidHead& sigmoid_head() const { return sig_.value(); }

    // Every learnable tensor, in a fixed order. Handles share storage with the
    // model.
    std::vector<ad::Var> parameters() const {
        auto out = encoder_.parameters();
        const auto head = crf_ ? crf_->parameters() : sig_->parameters();
        out.insert(out.end(), head.begin(), head.end());
        return out;
    }

    std::vector<ad::Tensor> snapshot() const {
        std::vector<ad::Tensor> out;
        for (const auto& p : parameters()) out.push_back(p.value());
        return out;
    }

    void restore(const std::vector<ad::Tensor>& values) {
        auto params = parameters();
        if (values.size() != params.size()) throw ConfigError("restore: parameter count mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (values[i].shape() != params[i].shape()) {
                throw ShapeError("restore: " + params[i].name() + " expects " + ad::shape_string(params[i].shape()) +
                                 ", got " + ad::shape_string(values[i].shape()));
            }
            params[i].mutable_value() = values[i];
        }
    }

    // Head output before any loss: CRF emissions (T x K) or sigmoid scores (T x 1).
    ad::Var forward(const std::vector<Token>& tokens, bool training, double dropout_p, Rng& rng) const {
        auto encoded = stack_encodings(encode_sentence(tokens, vocab_, encoder_, dropout_p, training, rng));
        return crf_ ? crf_emissions(encoded, *crf_) : sigmoid_scores(encoded, *sig_);
    }

    // CRF: NLL of the discretized gold classes. SIG: mean squared error.
    ad::Var sentence_loss(const AnnotatedUtterance& example, bool training, double dropout_p, Rng& rng) const {
        auto out = forward(example.utterance.tokens, training, dropout_p, rng);
        if (crf_) {
            TagSequence gold;
            for (auto s : example.scores) gold.push_back(class_index(discretize(s)));
            return crf_nll(out, crf_->transition, gold);
        }
        return squared_loss(out, example.score_values());
    }

    // Inference. CRF scores are the midpoints of the decoded classes.
    Prediction predict(const std::vector<Token>& tokens) const {
        Rng unused(0);
        auto out = forward(tokens, false, 0.0, unused);
        Prediction p;
        if (crf_) {
            for (auto tag : viterbi_decode(out.value(), crf_->transition.value()).tags) {
                p.classes.push_back(class_from_index(tag));
                p.scores.push_back(class_midpoint(p.classes.back()));
            }
        } else {
            p.scores = out.value().vec();
            for (double s : p.scores) p.classes.push_back(discretize(s));
        }
        return p;
    }

private:
    ModelConfig config_;
    Vocabulary vocab_;
    EncoderParams encoder_;
    std::optional<CRFParams> crf_;
    std::optional<SigmoidHead> sig_;
};

} // namespace wimp
