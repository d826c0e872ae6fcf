#include "berrywave/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace berrywave {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    auto lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

counter_stream::counter_stream(std::uint64_t seed, std::uint32_t replication, std::uint32_t field, std::uint32_t tag)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      replication_(replication),
      field_(field),
      tag_(tag) {}

std::array<std::uint32_t, 4> counter_stream::block(std::uint32_t i) const {
  return philox4x32({i, replication_, field_, tag_}, key_);
}

double counter_stream::uniform(std::uint32_t i, int slot) const {
  auto b = block(i);
  std::uint64_t hi = b[2 * slot] >> 5;
  std::uint64_t lo = b[2 * slot + 1] >> 6;
  return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

double counter_stream::uniform_open0(std::uint32_t i, int slot) const {
  return 1.0 - uniform(i, slot);
}

std::uint64_t counter_stream::id() const {
  std::uint64_t h = (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  h = mix(h ^ replication_);
  h = mix(h ^ (static_cast<std::uint64_t>(field_) << 32 | tag_));
  return h;
}

double stream_cursor::uniform() {
  double u = stream_.uniform(block_, slot_);
  if (++slot_ == 2) {
    slot_ = 0;
    ++block_;
  }
  return u;
}

double stream_cursor::normal() {
  // Box-Muller with the cosine branch only; keeps the draw count fixed.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint32_t tag_of(double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  bits ^= bits >> 33;
  bits *= 0xFF51AFD7ED558CCDull;
  bits ^= bits >> 33;
  return static_cast<std::uint32_t>(bits);
}

}  // namespace berrywave
