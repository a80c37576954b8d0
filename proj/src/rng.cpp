#include "npglab/rng.hpp"

#include "npglab/errors.hpp"

namespace npglab {
namespace {

// SplitMix64 finalizer; full-avalanche bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash3(std::uint64_t key, std::uint64_t stream, std::uint64_t index) {
  // Two mixing rounds so that nearby (stream, index) pairs decorrelate.
  return mix64(mix64(key ^ stream * 0xd6e8feb86659fd93ULL) + index);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t run_id)
    : key_(mix64(mix64(seed) ^ run_id * 0xa0761d6478bd642fULL)) {}

std::uint64_t CounterRng::raw(RngStream stream) {
  auto s = static_cast<std::uint64_t>(stream);
  return hash3(key_, s, cursor_[s]++);
}

double CounterRng::uniform(RngStream stream) {
  // 53 mantissa bits -> uniform on [0, 1).
  return static_cast<double>(raw(stream) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::cursor(RngStream stream) const {
  return cursor_[static_cast<std::uint64_t>(stream)];
}

std::size_t sample_categorical(std::span<const double> probs, double u) {
  if (probs.empty()) throw InvalidArgument("sample_categorical: empty vector");
  double acc = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    acc += probs[i];
    if (u < acc && probs[i] > 0.0) return i;
  }
  // u landed in the round-off gap behind the last positive entry.
  if (last_positive == probs.size())
    throw InvalidArgument("sample_categorical: all probabilities zero");
  return last_positive;
}

}  // namespace npglab
