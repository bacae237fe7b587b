#pragma once

// Transcript and word-importance annotation ingestion.
//
// Transcript lines:   <utterance_id> <start> <end> <tok1> <tok2> ...
//   utterance_id is sw<conversation><A|B>-<seq>, e.g. sw2001A-0001.
// Annotation TSV:     conversation_id  utterance_id  token_index  token  score  annotator_id
//   with that header line first. One row per scored token.

#include "wimp/agreement.hpp"
#include "wimp/error.hpp"
#include "wimp/rng.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

namespace wimp {

enum class Speaker : std::uint8_t { A, B };

struct Token {
    std::string text;
    std::size_t index = 0;

    friend bool operator==(const Token&, const Token&) = default;
};

struct Utterance {
    std::string conversation_id;
    std::string utterance_id;
    Speaker speaker = Speaker::A;
    std::vector<Token> tokens;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

inline constexpr double kScoreGrid = 0.05;
inline constexpr double kGridTolerance = 1e-9;

inline bool on_score_grid(double v) {
    return std::abs(v - kScoreGrid * std::round(v / kScoreGrid)) <= kGridTolerance;
}

// A word-importance value in [0, 1]. Annotated scores must also lie on the
// 0.05 grid; model predictions only need the range.
class ImportanceScore {
public:
    constexpr ImportanceScore() = default;

    static ImportanceScore prediction(double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("importance score " + std::to_string(v) + " outside [0, 1]");
        return ImportanceScore(v);
    }

    static ImportanceScore annotated(double v) {
        auto s = prediction(v);
        if (!on_score_grid(v)) throw DomainError("importance score " + std::to_string(v) + " is not a multiple of 0.05");
        return s;
    }

    constexpr double value() const noexcept { return value_; }

    friend bool operator==(const ImportanceScore&, const ImportanceScore&) = default;

private:
    constexpr explicit ImportanceScore(double v) : value_(v) {}
    double value_ = 0.0;
};

struct AnnotatedUtterance {
    Utterance utterance;
    std::vector<ImportanceScore> scores;
    std::string annotator_id;

    std::vector<double> score_values() const {
        std::vector<double> out;
        out.reserve(scores.size());
        for (auto s : scores) out.push_back(s.value());
        return out;
    }

    friend bool operator==(const AnnotatedUtterance&, const AnnotatedUtterance&) = default;
};

// Six importance bands: [0,.1) [.1,.3) [.3,.5) [.5,.7) [.7,.9) [.9,1].
enum class ImportanceClass : std::uint8_t { c1 = 0, c2, c3, c4, c5, c6 };

inline constexpr std::size_t kNumClasses = 6;
inline constexpr std::array<double, kNumClasses - 1> kClassLowerBounds{0.1, 0.3, 0.5, 0.7, 0.9};
// Representative score of each class, used to turn class predictions into scores.
inline constexpr std::array<double, kNumClasses> kClassMidpoints{0.05, 0.2, 0.4, 0.6, 0.8, 0.95};

inline constexpr std::size_t class_index(ImportanceClass c) { return static_cast<std::size_t>(c); }

inline ImportanceClass class_from_index(std::size_t i) {
    if (i >= kNumClasses) throw DomainError("class id " + std::to_string(i) + " out of range (0-5)");
    return static_cast<ImportanceClass>(i);
}

inline std::string class_name(ImportanceClass c) { return "c" + std::to_string(class_index(c) + 1); }

inline double class_midpoint(ImportanceClass c) { return kClassMidpoints[class_index(c)]; }

// A value within the grid tolerance below a boundary counts as on it, so
// 6 * 0.05 computed in floating point still lands in c3.
inline ImportanceClass discretize(double score) {
    std::size_t k = 0;
    while (k < kClassLowerBounds.size() && score >= kClassLowerBounds[k] - kGridTolerance) ++k;
    return static_cast<ImportanceClass>(k);
}

inline ImportanceClass discretize(ImportanceScore score) { return discretize(score.value()); }

struct DatasetSplit {
    std::vector<AnnotatedUtterance> train;
    std::vector<AnnotatedUtterance> dev;
    std::vector<AnnotatedUtterance> test;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

struct UtteranceKey {
    std::string conversation_id;
    std::string speaker;
    std::string sequence;
};

// sw<digits><A|B>-<digits>
inline std::optional<UtteranceKey> parse_utterance_id(std::string_view id) {
    if (id.size() < 6 || id.substr(0, 2) != "sw") return std::nullopt;
    std::size_t i = 2;
    while (i < id.size() && id[i] >= '0' && id[i] <= '9') ++i;
    if (i == 2 || i + 2 >= id.size()) return std::nullopt;
    const char spk = id[i];
    if ((spk != 'A' && spk != 'B') || id[i + 1] != '-') return std::nullopt;
    const auto seq = id.substr(i + 2);
    for (char c : seq) {
        if (c < '0' || c > '9') return std::nullopt;
    }
    return UtteranceKey{std::string(id.substr(0, i)), std::string(1, spk), std::string(seq)};
}

inline std::string format_number(double v) {
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

} // namespace detail

inline std::vector<Utterance> parse_transcript(std::istream& source) {
    std::vector<Utterance> out;
    std::map<std::pair<std::string, std::string>, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(source, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        const auto fields = detail::split_ws(line);
        if (fields.size() < 4) {
            throw ParseError(lineno, "expected <utterance_id> <start> <end> <token>..., got " +
                                         std::to_string(fields.size()) + " field(s)");
        }
        const auto key = detail::parse_utterance_id(fields[0]);
        if (!key) throw ParseError(lineno, "malformed utterance id '" + std::string(fields[0]) + "'");
        const auto start = detail::parse_double(fields[1]);
        const auto end = detail::parse_double(fields[2]);
        if (!start || !end) throw ParseError(lineno, "non-numeric time field");
        if (*end < *start) throw ParseError(lineno, "end time precedes start time");

        Utterance u;
        u.conversation_id = key->conversation_id;
        u.utterance_id = std::string(fields[0]);
        u.speaker = key->speaker == "A" ? Speaker::A : Speaker::B;
        for (std::size_t i = 3; i < fields.size(); ++i) u.tokens.push_back({std::string(fields[i]), i - 3});
        if (!seen.emplace(std::pair{u.conversation_id, u.utterance_id}, lineno).second) {
            throw ParseError(lineno, "duplicate utterance id '" + u.utterance_id + "'");
        }
        out.push_back(std::move(u));
    }
    return out;
}

inline std::vector<Utterance> parse_transcript(const std::string& text) {
    std::istringstream in(text);
    return parse_transcript(in);
}

// Timing is not retained, so both time fields are written as 0.
inline void write_transcript(std::ostream& out, const std::vector<Utterance>& utterances) {
    for (const auto& u : utterances) {
        out << u.utterance_id << " 0 0";
        for (const auto& t : u.tokens) out << ' ' << t.text;
        out << '\n';
    }
}

inline constexpr std::string_view kAnnotationHeader =
    "conversation_id\tutterance_id\ttoken_index\ttoken\tscore\tannotator_id";

struct AnnotationOptions {
    // Off for model predictions, which are continuous.
    bool require_grid = true;
};

// Attach TSV score rows to transcript tokens. Every token of an annotated
// utterance must be scored exactly once. Output follows first appearance of
// each (annotator, utterance) in the file.
inline std::vector<AnnotatedUtterance> parse_annotations(std::istream& source, const std::vector<Utterance>& transcript,
                                                         AnnotationOptions options = {}) {
    std::map<std::pair<std::string, std::string>, const Utterance*> lookup;
    for (const auto& u : transcript) lookup[{u.conversation_id, u.utterance_id}] = &u;

    struct Pending {
        const Utterance* utterance;
        std::string annotator;
        std::vector<std::optional<double>> scores;
        std::size_t first_line;
    };
    std::vector<Pending> pending;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> slot;

    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(source, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        auto fields = detail::split_tabs(line);
        if (!header_seen) {
            std::string joined(line);
            if (!joined.empty() && joined.back() == '\r') joined.pop_back();
            if (joined != kAnnotationHeader) {
                throw ParseError(lineno, "missing annotation header '" + std::string(kAnnotationHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 6) {
            throw ParseError(lineno, "expected 6 tab-separated fields, got " + std::to_string(fields.size()));
        }
        const std::string conv(fields[0]), utt(fields[1]), annotator(fields[5]);
        const auto index = detail::parse_index(fields[2]);
        if (!index) throw ParseError(lineno, "malformed token_index '" + std::string(fields[2]) + "'");
        const auto score = detail::parse_double(fields[4]);
        if (!score) throw ParseError(lineno, "malformed score '" + std::string(fields[4]) + "'");
        if (*score < 0.0 || *score > 1.0) {
            throw ValidationError(lineno, "score " + std::string(fields[4]) + " outside [0, 1]");
        }
        if (options.require_grid && !on_score_grid(*score)) {
            throw ValidationError(lineno, "score " + std::string(fields[4]) + " is not a multiple of 0.05");
        }
        if (annotator.empty()) throw ParseError(lineno, "empty annotator_id");

        auto it = lookup.find({conv, utt});
        if (it == lookup.end()) {
            throw ReferenceError("line " + std::to_string(lineno) + ": utterance " + conv + "/" + utt +
                                 " not found in transcript");
        }
        const Utterance& u = *it->second;
        if (*index >= u.tokens.size()) {
            throw AlignmentError("line " + std::to_string(lineno) + ": token_index " + std::to_string(*index) +
                                 " out of range for " + utt + " (" + std::to_string(u.tokens.size()) + " tokens)");
        }
        if (detail::lower_ascii(fields[3]) != detail::lower_ascii(u.tokens[*index].text)) {
            throw AlignmentError("line " + std::to_string(lineno) + ": token '" + std::string(fields[3]) +
                                 "' does not match transcript token '" + u.tokens[*index].text + "' at " + utt +
                                 "[" + std::to_string(*index) + "]");
        }

        auto [sit, inserted] = slot.try_emplace({annotator, conv, utt}, pending.size());
        if (inserted) {
            pending.push_back({&u, annotator, std::vector<std::optional<double>>(u.tokens.size()), lineno});
        }
        auto& p = pending[sit->second];
        if (p.scores[*index]) {
            throw AlignmentError("line " + std::to_string(lineno) + ": duplicate score for " + utt + "[" +
                                 std::to_string(*index) + "] by " + annotator);
        }
        p.scores[*index] = *score;
    }

    std::vector<AnnotatedUtterance> out;
    out.reserve(pending.size());
    for (auto& p : pending) {
        AnnotatedUtterance a;
        a.utterance = *p.utterance;
        a.annotator_id = p.annotator;
        for (std::size_t i = 0; i < p.scores.size(); ++i) {
            if (!p.scores[i]) {
                throw AlignmentError("utterance " + p.utterance->utterance_id + " (annotator " + p.annotator +
                                     ", first row at line " + std::to_string(p.first_line) +
                                     ") has no score for token " + std::to_string(i));
            }
            a.scores.push_back(ImportanceScore::prediction(*p.scores[i]));
        }
        out.push_back(std::move(a));
    }
    return out;
}

inline std::vector<AnnotatedUtterance> parse_annotations(const std::string& text, const std::vector<Utterance>& transcript,
                                                         AnnotationOptions options = {}) {
    std::istringstream in(text);
    return parse_annotations(in, transcript, options);
}

inline void write_annotations(std::ostream& out, const std::vector<AnnotatedUtterance>& data) {
    out << kAnnotationHeader << '\n';
    for (const auto& a : data) {
        const auto& u = a.utterance;
        for (std::size_t i = 0; i < u.tokens.size(); ++i) {
            out << u.conversation_id << '\t' << u.utterance_id << '\t' << i << '\t' << u.tokens[i].text << '\t'
                << detail::format_number(a.scores[i].value()) << '\t' << a.annotator_id << '\n';
        }
    }
}

// One pair per utterance scored in both lists, x from `a` and y from `b`, in
// the order of `a`.
inline std::vector<ScorePair> extract_overlap(const std::vector<AnnotatedUtterance>& a,
                                              const std::vector<AnnotatedUtterance>& b) {
    std::map<std::pair<std::string, std::string>, const AnnotatedUtterance*> index;
    for (const auto& item : b) index.try_emplace({item.utterance.conversation_id, item.utterance.utterance_id}, &item);

    std::vector<ScorePair> out;
    for (const auto& item : a) {
        auto it = index.find({item.utterance.conversation_id, item.utterance.utterance_id});
        if (it == index.end()) continue;
        const auto& other = *it->second;
        if (item.scores.size() != other.scores.size()) {
            throw AlignmentError("utterance " + item.utterance.utterance_id + " has " +
                                 std::to_string(item.scores.size()) + " scores from " + item.annotator_id + " but " +
                                 std::to_string(other.scores.size()) + " from " + other.annotator_id);
        }
        out.push_back({item.utterance.utterance_id, item.score_values(), other.score_values()});
    }
    return out;
}

// Seeded shuffle, then 80/10/10 by utterance count. Dev and test each get
// round(n / 10); train takes the remainder.
inline DatasetSplit split_dataset(const std::vector<AnnotatedUtterance>& data, std::uint64_t seed) {
    if (data.size() < 10) {
        throw DomainError("split_dataset: need at least 10 utterances, got " + std::to_string(data.size()));
    }
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t n = data.size();
    const std::size_t held = (n + 5) / 10;
    const std::size_t n_train = n - 2 * held;
    DatasetSplit split;
    split.seed = seed;
    for (std::size_t k = 0; k < n; ++k) {
        auto& dst = k < n_train ? split.train : (k < n_train + held ? split.dev : split.test);
        dst.push_back(data[order[k]]);
    }
    return split;
}

} // namespace wimp
