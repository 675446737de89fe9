/**
 * Copyright 2026 The biasaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace biasaudit {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Keyed hashes used for every seed derivation in the toolkit. They depend only
// on the byte content of their arguments, never on platform or library state.
constexpr std::uint64_t hash64(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(mix64(seed) ^ (value * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL));
}

constexpr std::uint64_t hash64(std::uint64_t seed, std::string_view text) noexcept {
  return hash64(seed, fnv1a64(text));
}

/// Fixed-width lowercase hex, 16 characters.
std::string hex64(std::uint64_t value);

}  // namespace biasaudit
