#pragma once

// Structural detection of the multisets with no zero permutational sum:
// "homogeneous" (even m, all elements sharing one odd residue mod 2^k) and
// "inhomogeneous" ({a x (m-2), a+b, a-b} with gcd(b, m) = 1; a even when m
// is even). Everything else admits a zero arrangement.

#include <optional>

#include "permsum/multiset.hpp"

namespace permsum {

struct ExceptionalStructure {
    enum class Kind { Homogeneous, Inhomogeneous };
    Kind kind;
    i64 m = 0;
    i64 c = 0;  // homogeneous: the odd residue mod 2^k
    i64 a = 0;  // inhomogeneous: majority value
    i64 b = 0;  // inhomogeneous: offset, normalized to min(b, m-b)

    bool operator==(const ExceptionalStructure&) const = default;
};

// nullopt means non-exceptional (a zero permutational sum exists).
using ClassifyResult = std::optional<ExceptionalStructure>;

ClassifyResult classify(const ZMultiset& M);

// Classify a size-d multiset with its elements reduced mod d (the block
// case: blocks of d elements viewed in Z_d). Throws if values.size() != d.
ClassifyResult classify_values_mod(const std::vector<i64>& values, i64 d);

ClassifyResult classify_mod(const ZMultiset& M, i64 d);

// What an exceptional structure forces about the spectrum.
struct ForcedSum {
    bool zero_excluded = true;          // 0 is never a permutational sum
    bool all_nonzero_attained = false;  // odd m inhomogeneous: spectrum = Z_m \ {0}
    std::optional<i64> attainable;      // even m: m/2 is attainable
    // homogeneous: every permutational sum is congruent to
    // forced_residue mod forced_modulus (= c * 2^(k-1) mod 2^k)
    std::optional<i64> forced_modulus;
    std::optional<i64> forced_residue;
};

ForcedSum forced_sum(const ExceptionalStructure& e);

}  // namespace permsum
