#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warpimm/forms.hpp"

namespace warpimm::harness {

struct CorpusItem {
  std::string family;
  forms::SymmetricBilinearForm beta;
};

/// Seeded forms with n ≤ 8, p ≤ 3 cycling through families with planted
/// nullity structure (generic, common kernel, low-rank member, block split,
/// composition type, umbilic plus low rank). The normal space is rotated so
/// no planted direction is a coordinate axis.
std::vector<CorpusItem> nullityCorpus(int count, std::uint64_t seed);

/// Random form with n×n shape operators of entries of order 1.
forms::SymmetricBilinearForm randomForm(int n, int p, std::uint64_t seed);

}  // namespace warpimm::harness
