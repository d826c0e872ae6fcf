#pragma once

#include <array>
#include <cstdint>

namespace berrywave {

// Philox4x32-10 (Salmon et al.): a keyed bijection on 128-bit counters.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Stream identified by (seed, replication, field, tag); draws are indexed, not sequential state.
class counter_stream {
 public:
  counter_stream(std::uint64_t seed, std::uint32_t replication, std::uint32_t field, std::uint32_t tag = 0);

  // Four 32-bit words for block i.
  std::array<std::uint32_t, 4> block(std::uint32_t i) const;

  // Uniform on [0, 1) with 53 random bits, from slot 0 or 1 of block i.
  double uniform(std::uint32_t i, int slot) const;
  // Uniform on (0, 1].
  double uniform_open0(std::uint32_t i, int slot) const;

  std::uint64_t id() const;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t replication_;
  std::uint32_t field_;
  std::uint32_t tag_;
};

// Sequential convenience wrapper for draws of uniforms and normals.
class stream_cursor {
 public:
  explicit stream_cursor(const counter_stream& s) : stream_(s) {}

  double uniform();
  double normal();

 private:
  const counter_stream& stream_;
  std::uint32_t block_ = 0;
  int slot_ = 0;
};

// 32-bit tag of a double's bit pattern (keys energy levels into streams).
std::uint32_t tag_of(double value);

}  // namespace berrywave
