#include "cellshot/rng.hpp"

#include <numeric>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "cellshot/errors.hpp"

namespace cellshot {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t s : stream) {
    h = splitmix64(h ^ splitmix64(s + 0x632be59bd9b4e019ULL));
  }
  return h;
}

double draw_normal(Rng& rng, double mean, double sd) {
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t count) {
  if (count > n) {
    throw ArgumentError("cannot sample more indices than available");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

} // namespace cellshot
