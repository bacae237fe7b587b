#pragma once

// Token sequences to context-aware vectors.
//
// Each token is represented by concat(word embedding, char BiLSTM summary).
// A word-level BiLSTM runs over those inputs; C_i = concat(L_i, R_i).

#include "wimp/autodiff.hpp"
#include "wimp/corpus.hpp"
#include "wimp/error.hpp"
#include "wimp/rng.hpp"

#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wimp {

inline constexpr std::string_view kUnkWord = "<unk>";
inline constexpr char32_t kUnkChar = 0xFFFD;

// Decode UTF-8; malformed sequences become U+FFFD.
inline std::vector<char32_t> utf8_code_points(std::string_view s) {
    std::vector<char32_t> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back(kUnkChar);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline std::string utf8_encode(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

// Word and character id maps. Ids are dense from 0 and each side has an
// explicit unknown id. Word lookup lowercases; characters keep their case.
class Vocabulary {
public:
    Vocabulary() {
        unk_word_id_ = add_word(std::string(kUnkWord));
        unk_char_id_ = add_char(kUnkChar);
    }

    // Build from explicit id-ordered lists (checkpoint loading). The lists
    // must contain the unknown entries.
    static Vocabulary from_lists(std::vector<std::string> words, std::vector<char32_t> chars) {
        Vocabulary v(Empty{});
        for (auto& w : words) {
            if (v.word_to_id_.contains(w)) throw ConfigError("vocabulary: duplicate word '" + w + "'");
            v.add_word(std::move(w));
        }
        for (auto c : chars) {
            if (v.char_to_id_.contains(c)) throw ConfigError("vocabulary: duplicate character");
            v.add_char(c);
        }
        auto wit = v.word_to_id_.find(std::string(kUnkWord));
        auto cit = v.char_to_id_.find(kUnkChar);
        if (wit == v.word_to_id_.end() || cit == v.char_to_id_.end()) {
            throw ConfigError("vocabulary: missing unknown-word or unknown-char entry");
        }
        v.unk_word_id_ = wit->second;
        v.unk_char_id_ = cit->second;
        return v;
    }

    // Returns the existing id if present.
    std::size_t add_word(std::string word) {
        auto [it, inserted] = word_to_id_.try_emplace(word, words_.size());
        if (inserted) words_.push_back(std::move(word));
        return it->second;
    }

    std::size_t add_char(char32_t c) {
        auto [it, inserted] = char_to_id_.try_emplace(c, chars_.size());
        if (inserted) chars_.push_back(c);
        return it->second;
    }

    bool contains_word(std::string_view lowered) const { return word_to_id_.contains(std::string(lowered)); }

    std::size_t word_id(std::string_view token) const {
        auto it = word_to_id_.find(detail::lower_ascii(token));
        return it == word_to_id_.end() ? unk_word_id_ : it->second;
    }

    std::vector<std::size_t> char_ids(std::string_view token) const {
        std::vector<std::size_t> out;
        for (char32_t c : utf8_code_points(token)) {
            auto it = char_to_id_.find(c);
            out.push_back(it == char_to_id_.end() ? unk_char_id_ : it->second);
        }
        return out;
    }

    std::size_t word_count() const noexcept { return words_.size(); }
    std::size_t char_count() const noexcept { return chars_.size(); }
    std::size_t unk_word_id() const noexcept { return unk_word_id_; }
    std::size_t unk_char_id() const noexcept { return unk_char_id_; }
    const std::vector<std::string>& words() const noexcept { return words_; }
    const std::vector<char32_t>& chars() const noexcept { return chars_; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.words_ == b.words_ && a.chars_ == b.chars_ && a.unk_word_id_ == b.unk_word_id_ &&
               a.unk_char_id_ == b.unk_char_id_;
    }

private:
    struct Empty {};
    explicit Vocabulary(Empty) {}

    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> word_to_id_;
    std::vector<char32_t> chars_;
    std::map<char32_t, std::size_t> char_to_id_;
    std::size_t unk_word_id_ = 0;
    std::size_t unk_char_id_ = 0;
};

struct EmbeddingTable {
    ad::Tensor matrix;
    std::size_t dim = 0;
    bool trainable = true;
};

struct PretrainedEmbeddings {
    std::vector<std::string> words;  // row order; the unknown row follows these
    EmbeddingTable table;
    std::size_t unk_row = 0;
};

// Text embeddings: `<token> <f1> ... <fd>` per line. Rows keep file order and
// an unknown-word row drawn uniformly from [-0.25, 0.25] is appended.
inline PretrainedEmbeddings load_pretrained_embeddings(std::istream& source, std::size_t expected_dim, Rng& rng) {
    if (expected_dim == 0) throw DomainError("load_pretrained_embeddings: dimension must be positive");
    PretrainedEmbeddings out;
    std::vector<double> data;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        const auto fields = detail::split_ws(line);
        if (fields.size() != expected_dim + 1) {
            throw ParseError(lineno, "expected a token and " + std::to_string(expected_dim) + " values, got " +
                                         std::to_string(fields.size() - 1) + " values");
        }
        std::string word(fields[0]);
        if (!seen.emplace(word, lineno).second) throw ParseError(lineno, "duplicate token '" + word + "'");
        for (std::size_t k = 1; k < fields.size(); ++k) {
            auto v = detail::parse_double(fields[k]);
            if (!v) throw ParseError(lineno, "non-numeric embedding value '" + std::string(fields[k]) + "'");
            data.push_back(*v);
        }
        out.words.push_back(std::move(word));
    }
    for (std::size_t k = 0; k < expected_dim; ++k) data.push_back(rng.uniform(-0.25, 0.25));
    out.unk_row = out.words.size();
    out.table.dim = expected_dim;
    out.table.matrix = ad::Tensor({out.words.size() + 1, expected_dim}, std::move(data));
    return out;
}

inline PretrainedEmbeddings load_pretrained_embeddings(const std::string& text, std::size_t expected_dim, Rng& rng) {
    std::istringstream in(text);
    return load_pretrained_embeddings(in, expected_dim, rng);
}

// Uniform Glorot range for a (fan_in x fan_out) weight.
inline ad::Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    ad::Tensor t({fan_in, fan_out});
    for (auto& v : t.data()) v = rng.uniform(-limit, limit);
    return t;
}

// Gate-stacked LSTM weights: columns are [input | forget | cell | output],
// each `hidden` wide.
struct LSTMCell {
    ad::Var input_weights;      // (input x 4H)
    ad::Var recurrent_weights;  // (H x 4H)
    ad::Var biases;             // (1 x 4H)
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;

    static LSTMCell create(std::size_t input, std::size_t hidden, Rng& rng, const std::string& name) {
        LSTMCell cell;
        cell.input_size = input;
        cell.hidden_size = hidden;
        cell.input_weights = ad::parameter(glorot_uniform(input, 4 * hidden, rng), name + ".W");
        cell.recurrent_weights = ad::parameter(glorot_uniform(hidden, 4 * hidden, rng), name + ".U");
        ad::Tensor b({1, 4 * hidden}, 0.0);
        for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
        cell.biases = ad::parameter(std::move(b), name + ".b");
        return cell;
    }

    std::vector<ad::Var> parameters() const { return {input_weights, recurrent_weights, biases}; }
};

struct LSTMState {
    ad::Var h;
    ad::Var c;
};

inline LSTMState zero_state(std::size_t hidden) {
    return {ad::constant(ad::Tensor({1, hidden}, 0.0)), ad::constant(ad::Tensor({1, hidden}, 0.0))};
}

inline LSTMState lstm_step(const LSTMCell& cell, const ad::Var& x, const ad::Var& h_prev, const ad::Var& c_prev) {
    const std::size_t H = cell.hidden_size;
    if (h_prev.shape() != ad::Shape{1, H} || c_prev.shape() != ad::Shape{1, H}) {
        throw ShapeError("lstm_step: state shapes " + ad::shape_string(h_prev.shape()) + " and " +
                         ad::shape_string(c_prev.shape()) + " do not match hidden size " + std::to_string(H));
    }
    auto gates = ad::add(ad::add(ad::matmul(x, cell.input_weights), ad::matmul(h_prev, cell.recurrent_weights)),
                         cell.biases);
    auto i = ad::sigmoid(ad::cols(gates, 0, H));
    auto f = ad::sigmoid(ad::cols(gates, H, 2 * H));
    auto g = ad::tanh(ad::cols(gates, 2 * H, 3 * H));
    auto o = ad::sigmoid(ad::cols(gates, 3 * H, 4 * H));
    auto c = ad::add(ad::mul(f, c_prev), ad::mul(i, g));
    auto h = ad::mul(o, ad::tanh(c));
    return {h, c};
}

// Hidden states of a unidirectional pass over the rows of `inputs`, in input
// order. `reverse` runs right to left but still returns states indexed by
// input position.
inline std::vector<ad::Var> run_lstm(const LSTMCell& cell, const ad::Var& inputs, bool reverse) {
    const std::size_t T = inputs.value().rows();
    std::vector<ad::Var> hs(T);
    auto state = zero_state(cell.hidden_size);
    for (std::size_t k = 0; k < T; ++k) {
        const std::size_t t = reverse ? T - 1 - k : k;
        state = lstm_step(cell, ad::row(inputs, t), state.h, state.c);
        hs[t] = state.h;
    }
    return hs;
}

// concat(final forward state, final backward state) over a token's characters.
inline ad::Var encode_chars(const std::vector<std::size_t>& char_ids, const ad::Var& char_table,
                            const LSTMCell& forward, const LSTMCell& backward) {
    if (char_ids.empty()) throw DomainError("encode_chars: empty token");
    auto inputs = ad::gather_rows(char_table, char_ids);
    auto fw = run_lstm(forward, inputs, false);
    auto bw = run_lstm(backward, inputs, true);
    return ad::concat({fw.back(), bw.front()});
}

struct EncoderDims {
    std::size_t word_dim = 100;
    std::size_t char_dim = 100;
    std::size_t char_hidden = 100;
    std::size_t word_hidden = 300;

    std::size_t output_dim() const { return 2 * word_hidden; }

    friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

struct EncoderParams {
    EncoderDims dims;
    ad::Var word_table;  // (|words| x word_dim)
    ad::Var char_table;  // (|chars| x char_dim)
    LSTMCell char_forward;
    LSTMCell char_backward;
    LSTMCell word_forward;
    LSTMCell word_backward;

    std::vector<ad::Var> parameters() const {
        std::vector<ad::Var> out{word_table, char_table};
        for (const auto* cell : {&char_forward, &char_backward, &word_forward, &word_backward}) {
            for (auto& p : cell->parameters()) out.push_back(p);
        }
        return out;
    }
};

// Fresh encoder over `vocab`. Rows present in `pretrained` are copied from it
// (matched by word); all other weights are Glorot-uniform.
inline EncoderParams make_encoder(const EncoderDims& dims, const Vocabulary& vocab, Rng& rng,
                                  const PretrainedEmbeddings* pretrained = nullptr) {
    if (dims.word_dim == 0 || dims.char_dim == 0 || dims.char_hidden == 0 || dims.word_hidden == 0) {
        throw ConfigError("encoder dimensions must be positive");
    }
    EncoderParams p;
    p.dims = dims;
    ad::Tensor words = glorot_uniform(vocab.word_count(), dims.word_dim, rng);
    if (pretrained) {
        if (pretrained->table.dim != dims.word_dim) {
            throw ConfigError("pretrained embedding dimension " + std::to_string(pretrained->table.dim) +
                              " does not match word_dim " + std::to_string(dims.word_dim));
        }
        auto copy_row = [&](std::size_t src, std::size_t dst) {
            for (std::size_t j = 0; j < dims.word_dim; ++j) words(dst, j) = pretrained->table.matrix(src, j);
        };
        for (std::size_t r = 0; r < pretrained->words.size(); ++r) {
            const auto id = vocab.word_id(pretrained->words[r]);
            if (id != vocab.unk_word_id()) copy_row(r, id);
        }
        copy_row(pretrained->unk_row, vocab.unk_word_id());
    }
    p.word_table = ad::parameter(std::move(words), "word_embeddings");
    p.char_table = ad::parameter(glorot_uniform(vocab.char_count(), dims.char_dim, rng), "char_embeddings");
    p.char_forward = LSTMCell::create(dims.char_dim, dims.char_hidden, rng, "char_lstm_fw");
    p.char_backward = LSTMCell::create(dims.char_dim, dims.char_hidden, rng, "char_lstm_bw");
    const std::size_t word_input = dims.word_dim + 2 * dims.char_hidden;
    p.word_forward = LSTMCell::create(word_input, dims.word_hidden, rng, "word_lstm_fw");
    p.word_backward = LSTMCell::create(word_input, dims.word_hidden, rng, "word_lstm_bw");
    return p;
}

struct EncodedToken {
    ad::Var l;  // forward state
    ad::Var r;  // backward state
    ad::Var c;  // concat(l, r)
};

// Dropout (inverted, probability `dropout_p`) hits the word embeddings only,
// and only when `training` is set; inference never touches `rng`.
inline std::vector<EncodedToken> encode_sentence(const std::vector<Token>& tokens, const Vocabulary& vocab,
                                                 const EncoderParams& params, double dropout_p, bool training,
                                                 Rng& rng) {
    if (tokens.empty()) throw DomainError("encode_sentence: empty token list");
    std::vector<std::size_t> word_ids;
    std::vector<ad::Var> char_reps;
    for (const auto& t : tokens) {
        word_ids.push_back(vocab.word_id(t.text));
        char_reps.push_back(
            encode_chars(vocab.char_ids(t.text), params.char_table, params.char_forward, params.char_backward));
    }
    ad::Var words = ad::gather_rows(params.word_table, word_ids);
    if (training) words = ad::dropout(words, dropout_p, rng);
    auto inputs = ad::concat({words, ad::stack_rows(char_reps)});

    auto ls = run_lstm(params.word_forward, inputs, false);
    auto rs = run_lstm(params.word_backward, inputs, true);
    std::vector<EncodedToken> out;
    out.reserve(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) out.push_back({ls[t], rs[t], ad::concat({ls[t], rs[t]})});
    return out;
}

// (T x 2H) matrix of C_i rows.
inline ad::Var stack_encodings(const std::vector<EncodedToken>& encoded) {
    std::vector<ad::Var> rows;
    rows.reserve(encoded.size());
    for (const auto& e : encoded) rows.push_back(e.c);
    return ad::stack_rows(rows);
}

} // namespace wimp
