#include "subcond/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace subcond {

namespace {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(mix64(seed + kGamma)), state_(0) {}

Rng Rng::split(std::string_view label) const {
  Rng child(0);
  child.key_ = mix64(key_ ^ fnv1a(label));
  child.state_ = 0;
  return child;
}

Rng Rng::split(std::uint64_t index) const {
  Rng child(0);
  // Distinct domain from string labels: tag indexed children.
  child.key_ = mix64(key_ ^ mix64(index + 0x632BE59BD9B4E019ULL));
  child.state_ = 0;
  return child;
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix64(key_ ^ state_);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::next_below: bound must be positive");
  // Rejection sampling over the largest multiple of bound.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % bound;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
  // Box-Muller; u1 shifted into (0, 1] so log stays finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

void Rng::fill_normal(std::span<double> out, double mean, double stddev) {
  for (double& v : out) v = normal(mean, stddev);
}

}  // namespace subcond
