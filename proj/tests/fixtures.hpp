#pragma once

// Shared access to the files under tests/data and the small configurations
// the tests train with.

#include "wimp/wimp.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fixture {

inline std::string path(const std::string& name) { return std::string(WIMP_TEST_DATA) + "/" + name; }

inline std::string slurp(const std::string& name) {
    std::ifstream in(path(name), std::ios::binary);
    if (!in) throw wimp::Error("io", "missing fixture " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<wimp::Utterance> transcript() { return wimp::parse_transcript(slurp("synthetic_transcript.txt")); }

// The 20 annotated sentences.
inline std::vector<wimp::AnnotatedUtterance> synthetic() {
    return wimp::parse_annotations(slurp("synthetic_annotations.tsv"), transcript());
}

inline wimp::EncoderDims tiny_dims() { return {8, 4, 4, 8}; }

// Small enough to memorise the fixture quickly.
inline wimp::TrainConfig overfit_config(std::uint64_t seed = 1) {
    wimp::TrainConfig c;
    c.lr0 = 0.02;
    c.lr_decay = 1.0;
    c.batch_size = 4;
    c.dropout_p = 0.0;
    c.max_epochs = 200;
    c.patience = 200;
    c.seed = seed;
    return c;
}

inline wimp::DatasetSplit all_as_train(const std::vector<wimp::AnnotatedUtterance>& data, std::uint64_t seed) {
    wimp::DatasetSplit s;
    s.train = data;
    s.dev = data;
    s.seed = seed;
    return s;
}

} // namespace fixture
