// wimp: word-importance toolkit.
//
//   wimp agreement  --a A.tsv --b B.tsv --transcript T.txt
//   wimp train      --transcript T.txt --annotations A.tsv --head crf|sig --out model.ckpt
//   wimp evaluate   --checkpoint model.ckpt --transcript T.txt --annotations A.tsv
//   wimp predict    --checkpoint model.ckpt --transcript T.txt
//   wimp score-asr  --reference R.tsv --hypothesis H.txt
//   wimp render     --transcript T.txt --annotations A.tsv [--format html|terminal]
//
// Exit codes: 0 success, 2 data error, 64 usage error. Every failure prints
// one line starting with "wimp: error[<kind>]:" to stderr.

#include "wimp/wimp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitData = 2;
constexpr int kExitUsage = 64;

class UsageError : public wimp::Error {
public:
    explicit UsageError(const std::string& what) : wimp::Error("usage", what) {}
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wimp::Error("io", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Prefix a library error with the file it came from.
template <typename F>
auto with_file(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const wimp::Error& e) {
        throw wimp::Error(e.kind(), path + ": " + e.what());
    }
}

std::vector<wimp::Utterance> load_transcript(const std::string& path) {
    const auto text = read_file(path);
    return with_file(path, [&] { return wimp::parse_transcript(text); });
}

std::vector<wimp::AnnotatedUtterance> load_annotations(const std::string& path,
                                                       const std::vector<wimp::Utterance>& transcript,
                                                       bool require_grid = true) {
    const auto text = read_file(path);
    return with_file(path, [&] { return wimp::parse_annotations(text, transcript, {require_grid}); });
}

// Rebuild the reference transcript from the token columns of a score TSV.
std::vector<wimp::AnnotatedUtterance> load_scored_reference(const std::string& path) {
    const auto text = read_file(path);
    return with_file(path, [&] {
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        std::map<std::pair<std::string, std::string>, std::map<std::size_t, std::string>> rows;
        std::vector<std::pair<std::string, std::string>> order;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto f = wimp::detail::split_tabs(line);
            if (f.size() != 6) throw wimp::ParseError(lineno, "expected 6 tab-separated fields");
            auto idx = wimp::detail::parse_index(f[2]);
            if (!idx) throw wimp::ParseError(lineno, "malformed token_index");
            std::pair key{std::string(f[0]), std::string(f[1])};
            if (!rows.contains(key)) order.push_back(key);
            rows[key].emplace(*idx, std::string(f[3]));
        }
        std::vector<wimp::Utterance> transcript;
        for (const auto& key : order) {
            const auto& toks = rows[key];
            auto parsed = wimp::detail::parse_utterance_id(key.second);
            if (!parsed) throw wimp::ReferenceError("malformed utterance id '" + key.second + "'");
            wimp::Utterance u;
            u.conversation_id = key.first;
            u.utterance_id = key.second;
            u.speaker = parsed->speaker == "A" ? wimp::Speaker::A : wimp::Speaker::B;
            std::size_t expect = 0;
            for (const auto& [i, t] : toks) {
                if (i != expect++) {
                    throw wimp::AlignmentError("utterance " + key.second + " is missing token " +
                                               std::to_string(expect - 1));
                }
                u.tokens.push_back({t, i});
            }
            transcript.push_back(std::move(u));
        }
        return wimp::parse_annotations(text, transcript, {false});
    });
}

// First annotation per utterance, optionally restricted to one annotator.
std::vector<wimp::AnnotatedUtterance> first_per_utterance(std::vector<wimp::AnnotatedUtterance> data,
                                                          const std::string& annotator) {
    std::vector<wimp::AnnotatedUtterance> out;
    std::map<std::string, bool> seen;
    for (auto& a : data) {
        if (!annotator.empty() && a.annotator_id != annotator) continue;
        if (seen.emplace(a.utterance.utterance_id, true).second) out.push_back(std::move(a));
    }
    return out;
}

std::string fixed(double v) { return wimp::detail::fixed(v); }

std::ostream& open_output(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
    if (path.empty() || path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*holder) throw wimp::Error("io", "cannot open '" + path + "' for writing");
    return *holder;
}

// ---------------------------------------------------------------- agreement

struct AgreementArgs {
    std::string a, b, transcript, format = "text";
};

int cmd_agreement(const AgreementArgs& args) {
    const auto transcript = load_transcript(args.transcript);
    const auto a = load_annotations(args.a, transcript);
    const auto b = load_annotations(args.b, transcript);
    const auto pairs = wimp::extract_overlap(a, b);
    if (pairs.empty()) throw wimp::DomainError("empty overlap: no utterance is annotated in both files");
    const auto pooled = wimp::pool(pairs);
    const auto s = wimp::concordance(pooled);
    if (args.format == "json") {
        nlohmann::json j{{"utterances", pairs.size()}, {"n", s.n},
                         {"mean_x", s.mean_x},         {"mean_y", s.mean_y},
                         {"sd_x", s.sd_x},             {"sd_y", s.sd_y},
                         {"pearson", s.pearson},       {"ccc", s.ccc}};
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "utterances=" << pairs.size() << '\n'
                  << "n=" << s.n << '\n'
                  << "mean_x=" << fixed(s.mean_x) << '\n'
                  << "mean_y=" << fixed(s.mean_y) << '\n'
                  << "sd_x=" << fixed(s.sd_x) << '\n'
                  << "sd_y=" << fixed(s.sd_y) << '\n'
                  << "pearson=" << fixed(s.pearson) << '\n'
                  << "ccc=" << fixed(s.ccc) << '\n';
    }
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    std::string transcript, annotations, head, out, embeddings, history;
    bool no_split = false;
    wimp::TrainConfig config;
    wimp::EncoderDims dims;
};

int cmd_train(const TrainArgs& args) {
    try {
        args.config.validate();
    } catch (const wimp::ConfigError& e) {
        throw UsageError(e.what());
    }
    const auto transcript = load_transcript(args.transcript);
    const auto data = load_annotations(args.annotations, transcript);
    if (data.empty()) throw wimp::DomainError(args.annotations + ": no annotated utterances");

    wimp::DatasetSplit split;
    if (args.no_split) {
        split.train = data;
        split.dev = data;
        split.seed = args.config.seed;
    } else {
        split = wimp::split_dataset(data, args.config.seed);
    }

    wimp::Rng init_rng(args.config.seed);
    std::optional<wimp::PretrainedEmbeddings> pretrained;
    if (!args.embeddings.empty()) {
        const auto text = read_file(args.embeddings);
        pretrained = with_file(args.embeddings,
                               [&] { return wimp::load_pretrained_embeddings(text, args.dims.word_dim, init_rng); });
    }
    const wimp::PretrainedEmbeddings* pre = pretrained ? &*pretrained : nullptr;
    wimp::ModelConfig mc{args.dims, wimp::parse_head(args.head), wimp::kNumClasses};
    wimp::Model model(mc, wimp::build_vocabulary(split.train, pre), init_rng, pre);

    std::unique_ptr<std::ofstream> history_file;
    if (!args.history.empty()) {
        history_file = std::make_unique<std::ofstream>(args.history, std::ios::trunc);
        if (!*history_file) throw wimp::Error("io", "cannot open '" + args.history + "' for writing");
        wimp::write_history_header(*history_file);
    }
    wimp::write_history_header(std::cout);
    const auto result = wimp::train(model, split, args.config, [&](const wimp::EpochRecord& r) {
        wimp::write_history_record(std::cout, r);
        std::cout.flush();
        if (history_file) wimp::write_history_record(*history_file, r);
    });
    wimp::save_checkpoint(args.out, model, args.config);
    std::cerr << "best epoch " << result.best_epoch << " (dev " << wimp::detail::format_number(result.best_dev_metric)
              << "), checkpoint written to " << args.out << '\n';
    return 0;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string checkpoint, transcript, annotations, subset = "all", head, format = "text", confusion_csv;
    std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateArgs& args) {
    auto ckpt = with_file(args.checkpoint, [&] { return wimp::load_checkpoint(args.checkpoint); });
    const auto transcript = load_transcript(args.transcript);
    auto data = load_annotations(args.annotations, transcript);
    if (args.subset == "test") data = wimp::split_dataset(data, args.seed).test;
    if (data.empty()) throw wimp::DomainError(args.annotations + ": no annotated utterances to evaluate");
    if (!args.head.empty() && wimp::parse_head(args.head) != ckpt.model.head()) {
        throw UsageError("--head " + args.head + " does not match the checkpoint's " +
                         wimp::to_string(ckpt.model.head()) + " head");
    }
    const auto report = wimp::evaluate(ckpt.model, data);
    if (args.format == "json") {
        wimp::write_report_json(std::cout, report);
    } else {
        wimp::write_report_text(std::cout, report);
    }
    if (!args.confusion_csv.empty()) {
        std::unique_ptr<std::ofstream> holder;
        wimp::write_confusion_csv(open_output(args.confusion_csv, holder), report.confusion);
    }
    return 0;
}

// ------------------------------------------------------------------ predict

struct PredictArgs {
    std::string checkpoint, transcript, out;
};

int cmd_predict(const PredictArgs& args) {
    auto ckpt = with_file(args.checkpoint, [&] { return wimp::load_checkpoint(args.checkpoint); });
    const auto transcript = load_transcript(args.transcript);
    std::vector<wimp::AnnotatedUtterance> predicted;
    for (const auto& u : transcript) {
        wimp::AnnotatedUtterance a;
        a.utterance = u;
        a.annotator_id = "model";
        for (double s : ckpt.model.predict(u.tokens).scores) a.scores.push_back(wimp::ImportanceScore::prediction(s));
        predicted.push_back(std::move(a));
    }
    std::unique_ptr<std::ofstream> holder;
    wimp::write_annotations(open_output(args.out, holder), predicted);
    return 0;
}

// ---------------------------------------------------------------- score-asr

struct ScoreAsrArgs {
    std::string reference, hypothesis, annotator, format = "text";
};

int cmd_score_asr(const ScoreAsrArgs& args) {
    const auto reference = first_per_utterance(load_scored_reference(args.reference), args.annotator);
    std::map<std::string, std::vector<std::string>> hyps;
    {
        const auto text = read_file(args.hypothesis);
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto f = wimp::detail::split_ws(line);
            if (f.empty()) continue;
            std::vector<std::string> toks;
            for (std::size_t i = 1; i < f.size(); ++i) toks.push_back(wimp::detail::lower_ascii(f[i]));
            if (!hyps.emplace(std::string(f[0]), std::move(toks)).second) {
                throw wimp::ParseError(lineno, args.hypothesis + ": duplicate hypothesis for '" + std::string(f[0]) +
                                                   "'");
            }
        }
    }

    nlohmann::json rows = nlohmann::json::array();
    std::size_t errors = 0, ref_words = 0;
    double charged = 0.0, total = 0.0;
    if (args.format == "text") std::cout << "utterance_id\tN\tS\tD\tI\twer\tweighted_wer\n";
    for (const auto& a : reference) {
        auto it = hyps.find(a.utterance.utterance_id);
        if (it == hyps.end()) {
            throw wimp::ReferenceError(args.hypothesis + ": no hypothesis for utterance '" +
                                       a.utterance.utterance_id + "'");
        }
        std::vector<std::string> ref;
        for (const auto& t : a.utterance.tokens) ref.push_back(wimp::detail::lower_ascii(t.text));
        const auto alignment = wimp::align(ref, it->second);
        const auto counts = wimp::count_edits(alignment);
        const auto w = wimp::weighted_errors(alignment, a.score_values());
        errors += counts.errors();
        ref_words += counts.reference_length();
        charged += w.charged;
        total += w.total;
        const double u_wer = wimp::wer(alignment);
        if (args.format == "json") {
            rows.push_back({{"utterance_id", a.utterance.utterance_id},
                            {"N", counts.reference_length()},
                            {"S", counts.substitutions},
                            {"D", counts.deletions},
                            {"I", counts.insertions},
                            {"wer", u_wer},
                            {"weighted_wer", wimp::weighted_wer(alignment, a.score_values())}});
        } else {
            std::cout << a.utterance.utterance_id << '\t' << counts.reference_length() << '\t' << counts.substitutions
                      << '\t' << counts.deletions << '\t' << counts.insertions << '\t' << fixed(u_wer) << '\t'
                      << fixed(wimp::weighted_wer(alignment, a.score_values())) << '\n';
        }
        hyps.erase(it);
    }
    if (!hyps.empty()) {
        throw wimp::ReferenceError(args.hypothesis + ": hypothesis '" + hyps.begin()->first +
                                   "' has no reference utterance");
    }
    const double corpus_wer = ref_words ? static_cast<double>(errors) / static_cast<double>(ref_words) : 0.0;
    const double corpus_wwer = total > 0.0 ? charged / total : 0.0;
    if (args.format == "json") {
        nlohmann::json j{{"utterances", rows},
                         {"corpus", {{"N", ref_words}, {"errors", errors}, {"wer", corpus_wer},
                                     {"weighted_wer", corpus_wwer}}}};
        std::cout << j.dump() << '\n';
    } else {
        std::cout << "corpus\t" << ref_words << "\t\t\t\t" << fixed(corpus_wer) << '\t' << fixed(corpus_wwer) << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------- render

struct RenderArgs {
    std::string transcript, annotations, annotator, format = "html", out;
};

int cmd_render(const RenderArgs& args) {
    const auto transcript = load_transcript(args.transcript);
    const auto data = first_per_utterance(load_annotations(args.annotations, transcript, false), args.annotator);
    std::unique_ptr<std::ofstream> holder;
    auto& out = open_output(args.out, holder);
    if (args.format == "html") {
        wimp::render_html(out, data);
    } else {
        wimp::render_terminal(out, data, args.format == "terminal");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wimp: word-importance annotation, modelling and weighted ASR scoring"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for every random choice (splits, init, dropout)");

    const std::vector<std::string> text_formats{"text", "json"};

    AgreementArgs ag;
    auto* agreement = app.add_subcommand("agreement", "Inter-annotator concordance over the overlap set");
    agreement->add_option("--a", ag.a, "First annotator's score TSV")->required();
    agreement->add_option("--b", ag.b, "Second annotator's score TSV")->required();
    agreement->add_option("--transcript", ag.transcript, "Transcript file")->required();
    agreement->add_option("--format", ag.format)->check(CLI::IsMember(text_formats));

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train an LSTM-CRF or LSTM-SIG model");
    train->add_option("--transcript", tr.transcript)->required();
    train->add_option("--annotations", tr.annotations)->required();
    train->add_option("--head", tr.head, "crf or sig")->required()->check(CLI::IsMember({"crf", "sig"}));
    train->add_option("--out", tr.out, "Checkpoint path")->required();
    train->add_option("--embeddings", tr.embeddings, "Pretrained text embeddings (token f1 ... fd)");
    train->add_option("--history", tr.history, "Also write epoch history CSV here");
    train->add_flag("--no-split", tr.no_split, "Train and select on all data instead of an 80/10/10 split");
    train->add_option("--lr", tr.config.lr0);
    train->add_option("--lr-decay", tr.config.lr_decay);
    train->add_option("--batch-size", tr.config.batch_size);
    train->add_option("--dropout", tr.config.dropout_p);
    train->add_option("--max-epochs", tr.config.max_epochs);
    train->add_option("--patience", tr.config.patience);
    train->add_option("--clip", tr.config.clip_norm, "Global gradient-norm clip (0 disables)");
    train->add_option("--word-dim", tr.dims.word_dim);
    train->add_option("--char-dim", tr.dims.char_dim);
    train->add_option("--char-hidden", tr.dims.char_hidden);
    train->add_option("--hidden", tr.dims.word_hidden);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "RMS, macro-F1, confusion matrix and model-human ccc");
    evaluate->add_option("--checkpoint", ev.checkpoint)->required();
    evaluate->add_option("--transcript", ev.transcript)->required();
    evaluate->add_option("--annotations", ev.annotations)->required();
    evaluate->add_option("--subset", ev.subset, "all, or test (the --seed split's test part)")
        ->check(CLI::IsMember({"all", "test"}));
    evaluate->add_option("--head", ev.head, "Expected head; must match the checkpoint")
        ->check(CLI::IsMember({"crf", "sig"}));
    evaluate->add_option("--format", ev.format)->check(CLI::IsMember(text_formats));
    evaluate->add_option("--confusion-csv", ev.confusion_csv, "Write the normalised confusion matrix here");

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "Write model scores for a transcript as a score TSV");
    predict->add_option("--checkpoint", pr.checkpoint)->required();
    predict->add_option("--transcript", pr.transcript)->required();
    predict->add_option("--out", pr.out, "Output path (default stdout)");

    ScoreAsrArgs sa;
    auto* score = app.add_subcommand("score-asr", "WER and importance-weighted WER of ASR hypotheses");
    score->add_option("--reference", sa.reference, "Score TSV of the reference words")->required();
    score->add_option("--hypothesis", sa.hypothesis, "<utterance_id> <tok>... per line")->required();
    score->add_option("--annotator", sa.annotator, "Use this annotator's scores");
    score->add_option("--format", sa.format)->check(CLI::IsMember(text_formats));

    RenderArgs rn;
    auto* render = app.add_subcommand("render", "Visualise importance scores");
    render->add_option("--transcript", rn.transcript)->required();
    render->add_option("--annotations", rn.annotations, "Score TSV (annotations or predictions)")->required();
    render->add_option("--annotator", rn.annotator);
    render->add_option("--format", rn.format, "html, terminal (ANSI colour) or plain")
        ->check(CLI::IsMember({"html", "terminal", "plain"}));
    render->add_option("--out", rn.out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "wimp: error[usage]: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*agreement) return cmd_agreement(ag);
        if (*train) {
            tr.config.seed = seed;
            return cmd_train(tr);
        }
        if (*evaluate) {
            ev.seed = seed;
            return cmd_evaluate(ev);
        }
        if (*predict) return cmd_predict(pr);
        if (*score) return cmd_score_asr(sa);
        if (*render) return cmd_render(rn);
    } catch (const UsageError& e) {
        std::cerr << "wimp: error[usage]: " << e.what() << '\n';
        return kExitUsage;
    } catch (const wimp::Error& e) {
        std::cerr << "wimp: error[" << e.kind() << "]: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "wimp: error[internal]: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
