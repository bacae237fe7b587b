#include "wimp/encoder.hpp"
#include "wimp/model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace wimp;
using Catch::Approx;

namespace {

std::vector<Token> toks(std::initializer_list<const char*> words) {
    std::vector<Token> out;
    for (const char* w : words) out.push_back({w, out.size()});
    return out;
}

LSTMCell zero_cell(std::size_t in, std::size_t h) {
    Rng rng(0);
    auto cell = LSTMCell::create(in, h, rng, "z");
    for (auto& p : cell.parameters()) p.mutable_value().fill(0.0);
    return cell;
}

Vocabulary small_vocab() {
    Vocabulary v;
    for (const char* w : {"okay", "then", "dallas", "ab", "ba"}) {
        v.add_word(w);
        for (char32_t c : utf8_code_points(w)) v.add_char(c);
    }
    return v;
}

const EncoderDims kTiny{5, 3, 3, 4};

} // namespace

TEST_CASE("utf8 decoding") {
    CHECK(utf8_code_points("ab") == std::vector<char32_t>{'a', 'b'});
    CHECK(utf8_code_points("\xc3\xa9") == std::vector<char32_t>{0xE9});
    CHECK(utf8_code_points("\xe2\x82\xac") == std::vector<char32_t>{0x20AC});
    CHECK(utf8_code_points("\xf0\x9f\x98\x80") == std::vector<char32_t>{0x1F600});
    // malformed bytes decode to the replacement character rather than failing
    CHECK(utf8_code_points("\xff") == std::vector<char32_t>{kUnkChar});
    CHECK(utf8_encode(0x20AC) == "\xe2\x82\xac");
}

TEST_CASE("vocabulary") {
    auto v = small_vocab();
    CHECK(v.unk_word_id() == 0);
    CHECK(v.unk_char_id() == 0);
    CHECK(v.word_id("OKAY") == v.word_id("okay"));
    CHECK(v.word_id("okay") != v.unk_word_id());
    CHECK(v.word_id("never-seen") == v.unk_word_id());
    CHECK(v.char_ids("\xe2\x82\xac")[0] == v.unk_char_id());
    // characters keep case
    CHECK(v.char_ids("O")[0] == v.unk_char_id());
    const auto copy = Vocabulary::from_lists(v.words(), v.chars());
    CHECK(copy == v);
}

TEST_CASE("load_pretrained_embeddings") {
    Rng rng(1);
    SECTION("two lines of dim 4") {
        const auto e = load_pretrained_embeddings(std::string("the 0.1 0.2 0.3 0.4\ncar 1 2 3 4\n"), 4, rng);
        CHECK(e.table.matrix.shape() == ad::Shape{3, 4});
        CHECK(e.words == std::vector<std::string>{"the", "car"});
        CHECK(e.table.matrix(1, 3) == 4.0);
        CHECK(e.unk_row == 2);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(e.table.matrix(2, j) >= -0.25);
            CHECK(e.table.matrix(2, j) <= 0.25);
        }
    }
    SECTION("dimension mismatch names the line") {
        try {
            load_pretrained_embeddings(std::string("the 0.1 0.2 0.3 0.4\ncar 1 2 3\n"), 4, rng);
            FAIL("no throw");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SECTION("empty stream") {
        const auto e = load_pretrained_embeddings(std::string(), 4, rng);
        CHECK(e.table.matrix.shape() == ad::Shape{1, 4});
        CHECK(e.words.empty());
    }
    SECTION("unk row comes from the seeded stream") {
        Rng a(9), b(9);
        CHECK(load_pretrained_embeddings(std::string(), 3, a).table.matrix ==
              load_pretrained_embeddings(std::string(), 3, b).table.matrix);
    }
}

TEST_CASE("lstm_step: zero cell") {
    auto cell = zero_cell(2, 1);
    auto x = ad::constant(ad::Tensor::row({0.3, -0.2}));
    SECTION("zero state stays zero") {
        auto s = lstm_step(cell, x, ad::constant(ad::Tensor::row({0})), ad::constant(ad::Tensor::row({0})));
        CHECK(s.h.item() == 0.0);
        CHECK(s.c.item() == 0.0);
    }
    SECTION("carried cell is halved by the forget gate") {
        auto s = lstm_step(cell, x, ad::constant(ad::Tensor::row({0})), ad::constant(ad::Tensor::row({1})));
        CHECK(s.c.item() == 0.5);
        CHECK(s.h.item() == Approx(0.5 * std::tanh(0.5)).margin(1e-15));
        CHECK(s.h.item() == Approx(0.2311).margin(1e-4));
    }
    SECTION("shape mismatch") {
        CHECK_THROWS_AS(lstm_step(cell, x, ad::constant(ad::Tensor::row({0, 0})), ad::constant(ad::Tensor::row({0}))),
                        ShapeError);
    }
}

TEST_CASE("LSTM cell initialisation") {
    Rng rng(3);
    auto cell = LSTMCell::create(6, 4, rng, "c");
    const auto& b = cell.biases.value();
    for (std::size_t j = 0; j < 16; ++j) CHECK(b[j] == ((j >= 4 && j < 8) ? 1.0 : 0.0));
    const double limit = std::sqrt(6.0 / (6 + 16));
    for (double v : cell.input_weights.value().data()) CHECK(std::abs(v) <= limit);
    CHECK(cell.input_weights.name() == "c.W");
}

TEST_CASE("lstm_step: gradient check") {
    Rng rng(4);
    auto cell = LSTMCell::create(3, 2, rng, "g");
    auto x = ad::parameter(ad::Tensor::row({0.4, -0.1, 0.7}), "x");
    auto h0 = ad::parameter(ad::Tensor::row({0.2, -0.3}), "h0");
    auto c0 = ad::parameter(ad::Tensor::row({0.5, 0.1}), "c0");
    auto params = cell.parameters();
    params.insert(params.end(), {x, h0, c0});
    auto loss = [&] {
        auto s = lstm_step(cell, x, h0, c0);
        auto s2 = lstm_step(cell, x, s.h, s.c);
        return ad::sum(ad::add(ad::mul(s2.h, s2.h), s2.c));
    };
    CHECK(ad::gradient_check(loss, params, 1e-5) < 1e-4);
}

TEST_CASE("encode_chars") {
    Rng rng(5);
    const auto v = small_vocab();
    auto table = ad::parameter(glorot_uniform(v.char_count(), 3, rng));
    auto fw = LSTMCell::create(3, 2, rng, "f");
    auto bw = LSTMCell::create(3, 2, rng, "b");
    SECTION("single character: one step per direction") {
        const auto ids = v.char_ids("a");
        auto out = encode_chars(ids, table, fw, bw);
        CHECK(out.shape() == ad::Shape{1, 4});
        auto x = ad::gather_rows(table, ids);
        auto z = zero_state(2);
        auto f = lstm_step(fw, x, z.h, z.c).h;
        auto b = lstm_step(bw, x, z.h, z.c).h;
        CHECK(out.value() == ad::concat({f, b}).value());
    }
    SECTION("zero cells give zero output") {
        auto out = encode_chars(v.char_ids("dallas"), table, zero_cell(3, 2), zero_cell(3, 2));
        for (double x : out.value().data()) CHECK(x == 0.0);
    }
    SECTION("order sensitive") {
        CHECK(encode_chars(v.char_ids("ab"), table, fw, bw).value() !=
              encode_chars(v.char_ids("ba"), table, fw, bw).value());
    }
    SECTION("empty token") { CHECK_THROWS_AS(encode_chars({}, table, fw, bw), DomainError); }
}

TEST_CASE("encode_sentence") {
    Rng rng(6);
    const auto v = small_vocab();
    auto params = make_encoder(kTiny, v, rng);

    SECTION("shapes") {
        Rng r(0);
        const auto out = encode_sentence(toks({"okay", "then", "dallas"}), v, params, 0.5, false, r);
        REQUIRE(out.size() == 3);
        for (const auto& e : out) {
            CHECK(e.l.shape() == ad::Shape{1, 4});
            CHECK(e.r.shape() == ad::Shape{1, 4});
            CHECK(e.c.shape() == ad::Shape{1, kTiny.output_dim()});
            CHECK(e.c.value() == ad::concat({e.l, e.r}).value());
        }
    }
    SECTION("default dimensions give 600-wide outputs") {
        Rng r(0);
        auto full = make_encoder(EncoderDims{}, v, r);
        const auto out = encode_sentence(toks({"okay", "then"}), v, full, 0.5, false, r);
        CHECK(out[0].c.shape() == ad::Shape{1, 600});
    }
    SECTION("one token: one step each way") {
        Rng r(0);
        const auto out = encode_sentence(toks({"okay"}), v, params, 0.0, false, r);
        auto words = ad::gather_rows(params.word_table, {v.word_id("okay")});
        auto chars = encode_chars(v.char_ids("okay"), params.char_table, params.char_forward, params.char_backward);
        auto x = ad::concat({words, chars});
        auto z = zero_state(4);
        CHECK(out[0].l.value() == lstm_step(params.word_forward, x, z.h, z.c).h.value());
        CHECK(out[0].r.value() == lstm_step(params.word_backward, x, z.h, z.c).h.value());
    }
    SECTION("inference ignores the dropout stream") {
        Rng r1(1), r2(999);
        const auto a = encode_sentence(toks({"okay", "then"}), v, params, 0.5, false, r1);
        const auto b = encode_sentence(toks({"okay", "then"}), v, params, 0.5, false, r2);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].c.value() == b[i].c.value());
    }
    SECTION("training is seed-deterministic and actually drops") {
        Rng r1(1), r2(1), r3(2), r4(0);
        const auto a = encode_sentence(toks({"okay", "then"}), v, params, 0.5, true, r1);
        const auto b = encode_sentence(toks({"okay", "then"}), v, params, 0.5, true, r2);
        const auto c = encode_sentence(toks({"okay", "then"}), v, params, 0.5, true, r3);
        const auto inf = encode_sentence(toks({"okay", "then"}), v, params, 0.5, false, r4);
        bool differs = false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].c.value() == b[i].c.value());
            differs |= a[i].c.value() != c[i].c.value() || a[i].c.value() != inf[i].c.value();
        }
        CHECK(differs);
    }
    SECTION("reversal swaps directions when the two word LSTMs share weights") {
        auto tied = params;
        tied.word_backward = tied.word_forward;
        Rng r(0);
        const auto fwd = encode_sentence(toks({"okay", "then", "dallas", "ab"}), v, tied, 0.0, false, r);
        const auto rev = encode_sentence(toks({"ab", "dallas", "then", "okay"}), v, tied, 0.0, false, r);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(fwd[i].l.value() == rev[3 - i].r.value());
            CHECK(fwd[i].r.value() == rev[3 - i].l.value());
        }
    }
    SECTION("unseen words and characters encode through unk") {
        Rng r(0);
        const auto out = encode_sentence(toks({"\xe6\x97\xa5\xe6\x9c\xac", "Zzz", "\xf0\x9f\x98\x80"}), v, params,
                                         0.5, true, r);
        CHECK(out.size() == 3);
        for (const auto& e : out) CHECK(e.c.value().all_finite());
    }
    SECTION("empty sentence") {
        Rng r(0);
        CHECK_THROWS_AS(encode_sentence({}, v, params, 0.0, false, r), DomainError);
    }
}

TEST_CASE("pretrained rows seed the word table") {
    Rng rng(2);
    const auto pre = load_pretrained_embeddings(std::string("Okay 1 2 3 4 5\nzebra 5 4 3 2 1\n"), 5, rng);
    AnnotatedUtterance a{{"sw2001", "sw2001A-0001", Speaker::A, toks({"okay", "then"})},
                         {ImportanceScore::annotated(0.5), ImportanceScore::annotated(0.5)},
                         "x"};
    const auto vocab = build_vocabulary({a}, &pre);
    CHECK(vocab.words() == std::vector<std::string>{"<unk>", "okay", "zebra", "then"});
    auto enc = make_encoder(kTiny, vocab, rng, &pre);
    const auto& w = enc.word_table.value();
    CHECK(w(vocab.word_id("okay"), 0) == 1.0);
    CHECK(w(vocab.word_id("zebra"), 4) == 1.0);
    CHECK(w(vocab.unk_word_id(), 2) == pre.table.matrix(pre.unk_row, 2));

    EncoderDims wrong = kTiny;
    wrong.word_dim = 6;
    CHECK_THROWS_AS(make_encoder(wrong, vocab, rng, &pre), ConfigError);
}

TEST_CASE("end-to-end gradient check through encode_sentence") {
    Rng rng(8);
    const auto v = small_vocab();
    auto params = make_encoder(kTiny, v, rng);
    auto ps = params.parameters();
    auto loss = [&] {
        Rng r(0);
        auto enc = stack_encodings(encode_sentence(toks({"okay", "then", "ab", "dallas"}), v, params, 0.0, false, r));
        return ad::sum(ad::mul(enc, enc));
    };
    const auto report = ad::gradient_check_report(loss, ps, 1e-5);
    INFO(report.worst_param << "[" << report.worst_index << "] analytic " << report.analytic << " numeric "
                            << report.numeric);
    CHECK(report.max_rel_error < 1e-4);
}
