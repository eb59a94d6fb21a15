#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace monotone_rl {

// Independent stream per key tuple, e.g. {trial_seed, tag, iteration}.
inline std::mt19937_64 make_stream(std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    words.reserve(key.size() * 2);
    for (std::uint64_t k : key) {
        words.push_back(static_cast<std::uint32_t>(k));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

// 53-bit uniform in [0,1); spelled out so results do not depend on the
// standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse-CDF draw from a discrete distribution.
inline std::size_t sample_index(std::span<const double> probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // Rounding left u above the final partial sum: take the last nonzero entry.
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return i;
    return probs.size() - 1;
}

// Stream tags; keep values stable, they are part of the output contract.
enum class StreamTag : std::uint64_t {
    transitions = 1,
    actions = 2,
    evaluation = 3,
    features = 4,
    retry_transitions = 5,
    retry_actions = 6,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace monotone_rl
