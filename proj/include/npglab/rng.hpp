#pragma once

#include <cstdint>
#include <span>

namespace npglab {

// Counter-based deterministic generator. Draws are pure functions of
// (seed, run id, stream, index), so a run produces the same numbers no
// matter how runs are scheduled across threads, and algorithms that share
// a stream consume identical values at identical step indices.
enum class RngStream : std::uint64_t {
  kState = 1,   // s_t draws (MDP state sampling)
  kAction = 2,  // a_t draws (on-policy action sampling)
  kReward = 3,  // x_t draws (reward observation sampling)
  kGeneric = 4, // test / oracle helpers
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t run_id);

  // Uniform in [0, 1) from the given stream; advances that stream only.
  double uniform(RngStream stream);

  std::uint64_t raw(RngStream stream);

  // Index of the next draw on the given stream.
  std::uint64_t cursor(RngStream stream) const;

 private:
  std::uint64_t key_;
  std::uint64_t cursor_[5] = {0, 0, 0, 0, 0};
};

// Inverse-CDF draw from a probability vector using a single uniform.
// Entries with zero probability are never selected.
std::size_t sample_categorical(std::span<const double> probs, double u);

}  // namespace npglab
