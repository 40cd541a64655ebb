#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace latpos {

using Rng = std::mt19937_64;

/// Splits one root seed into named, independent substreams so that adding
/// draws to one component never shifts the draws seen by another.
class SeedTree {
public:
  explicit SeedTree(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const noexcept { return root_; }

  std::uint64_t seed(std::string_view name, std::uint64_t index = 0) const;

  Rng stream(std::string_view name, std::uint64_t index = 0) const {
    return Rng(seed(name, index));
  }

private:
  std::uint64_t root_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace latpos
