#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kxdoc {

enum class SignalChannel { Text, Context, Both };

std::string to_string(SignalChannel c);
SignalChannel signal_channel_from_string(const std::string& s);

// Desk-scale corpus generator. Every positive bag's relation is recoverable
// from a bridge co-occurrence pattern tagged with a relation token (text
// channel) and/or a knowledge-graph path whose property label names the
// relation (context channel). planted_strength is the probability that a
// positive bag actually carries its signal.
struct SynthConfig {
    int bags = 50;      // train split size
    int dev_bags = 20;  // held-out split size
    int relations = 5;
    double na_fraction = 0.4;
    int paths_min = 1;
    int paths_max = 3;
    int filler_sentences = 2;  // per document, placed before the signal sentence
    int tokens_per_sentence = 6;
    int filler_vocab = 200;
    double planted_strength = 1.0;
    SignalChannel signal_channel = SignalChannel::Both;
    std::uint64_t seed = 7;
};

struct SynthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes train.jsonl, dev.jsonl, relations.txt, docs.jsonl, kg_triples.tsv,
// kg_labels.tsv, kg_types.tsv, and manifest.json into out_dir. Reproducible:
// the same config and seed produce byte-identical files.
void synthesize_corpus(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace kxdoc
