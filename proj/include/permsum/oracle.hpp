#pragma once

// Ground truth for small m: exact achievable-sum sets by dynamic programming
// over element multiplicities, independent of the classifier and solver.

#include <atomic>

#include "permsum/multiset.hpp"

namespace permsum {

inline constexpr i64 kDefaultOracleCap = 20;
inline constexpr i64 kHardOracleCap = 22;  // 2^22 DP states is the memory ceiling

// Effective cap: PERMSUM_ORACLE_CAP env var overrides the default, clamped
// to [1, kHardOracleCap].
i64 oracle_cap_from_env();

struct Spectrum {
    i64 m = 1;
    u64 mask = 0;  // bit r set iff r is an achievable permutational sum

    bool contains(i64 r) const { return (mask >> mod_norm(r, m)) & 1; }
    std::vector<i64> values() const;
    i64 count() const { return __builtin_popcountll(mask); }
};

// Exact achievable set. Coefficients 1..m are assigned by increasing count;
// the DP state is how many copies of each distinct value are already placed,
// so equal elements cost nothing extra. Throws "oracle cap" when m > cap.
Spectrum spectrum(const ZMultiset& M, i64 cap = kDefaultOracleCap);

// Concrete arrangement achieving `target`, or nullopt when unachievable.
std::optional<SumCertificate> witness(const ZMultiset& M, i64 target,
                                      i64 cap = kDefaultOracleCap);

bool has_zero(const ZMultiset& M, i64 cap = kDefaultOracleCap);

// The dumb second oracle: literal enumeration of all distinct orders.
// Guards the DP; only sensible for m <= 9.
Spectrum naive_spectrum(const ZMultiset& M);

// Number of spectrum/witness/has_zero calls since process start. The
// performance harness uses this to prove the solver ran oracle-free.
i64 oracle_invocations();

}  // namespace permsum
