#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

namespace cellshot {

/// Boost's engine and distributions are used instead of <random> so that a
/// seed reproduces the same draws across standard libraries.
using Rng = boost::random::mt19937_64;

/// Mixes a base seed with stream indices (replicate, contamination level, ...)
/// into an independent seed via splitmix64.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream);

double draw_normal(Rng& rng, double mean = 0.0, double sd = 1.0);

/// `count` distinct indices from [0, n), by partial Fisher-Yates.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count);

} // namespace cellshot
