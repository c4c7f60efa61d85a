#include "permsum/classify.hpp"

#include <algorithm>

namespace permsum {

namespace {

// The two patterns have no meaning below m = 3; both tiny orders are settled
// by inspection. {1,1} is the single zero-free multiset at m = 2 and matches
// the homogeneous pattern, which is the variant reported.
ClassifyResult classify_tiny(const std::vector<i64>& sorted, i64 m) {
    if (m == 1) return std::nullopt;
    // m == 2: sums are a1 + 2*a2 = a1 mod 2; only {1,1} never hits zero.
    if (sorted[0] == 1 && sorted[1] == 1) {
        ExceptionalStructure e;
        e.kind = ExceptionalStructure::Kind::Homogeneous;
        e.m = 2;
        e.c = 1;
        return e;
    }
    return std::nullopt;
}

ClassifyResult classify_sorted(const std::vector<i64>& sorted, const Modulus& mod) {
    i64 m = mod.m;
    if (m <= 2) return classify_tiny(sorted, m);

    // Homogeneous: even m, all elements share one odd residue mod 2^k.
    if (mod.k >= 1) {
        i64 twok = i64(1) << mod.k;
        i64 c = sorted[0] % twok;
        if (c % 2 == 1) {
            bool all = true;
            for (i64 v : sorted)
                if (v % twok != c) { all = false; break; }
            if (all) {
                ExceptionalStructure e;
                e.kind = ExceptionalStructure::Kind::Homogeneous;
                e.m = m;
                e.c = c;
                return e;
            }
        }
    }

    // Inhomogeneous: some value a of multiplicity >= m-2, the two leftovers
    // summing to 2a with a unit offset. At most three distinct values can
    // occur, so only a handful of candidate decompositions exist.
    std::vector<std::pair<i64, i64>> runs;  // (value, count)
    for (size_t i = 0; i < sorted.size();) {
        size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        runs.emplace_back(sorted[i], (i64)(j - i));
        i = j;
    }
    if ((i64)runs.size() > 3) return std::nullopt;
    for (auto& [a, cnt] : runs) {
        if (cnt < m - 2) continue;
        // collect the two elements left after removing m-2 copies of a
        std::vector<i64> left;
        i64 drop = m - 2;
        for (auto& [v, c2] : runs) {
            i64 use = (v == a) ? c2 - drop : c2;
            for (i64 t = 0; t < use; ++t) left.push_back(v);
        }
        if (left.size() != 2) continue;
        i64 x = left[0], y = left[1];
        if (mod_norm(x + y, m) != mod_norm(2 * a, m)) continue;
        i64 b = mod_norm(x - a, m);
        if (b == 0 || gcd(b, m) != 1) continue;
        if (mod.k >= 1 && a % 2 != 0) continue;  // even m needs a even
        ExceptionalStructure e;
        e.kind = ExceptionalStructure::Kind::Inhomogeneous;
        e.m = m;
        e.a = a;
        e.b = std::min(b, m - b);
        return e;
    }
    return std::nullopt;
}

}  // namespace

ClassifyResult classify(const ZMultiset& M) {
    return classify_sorted(M.elems, M.mod);
}

ClassifyResult classify_values_mod(const std::vector<i64>& values, i64 d) {
    if ((i64)values.size() != d)
        throw std::invalid_argument("classify_values_mod: need exactly d values");
    std::vector<i64> reduced(values.size());
    for (size_t i = 0; i < values.size(); ++i) reduced[i] = mod_norm(values[i], d);
    std::sort(reduced.begin(), reduced.end());
    return classify_sorted(reduced, factorize_cached(d));
}

ClassifyResult classify_mod(const ZMultiset& M, i64 d) {
    if (d < 1 || M.mod.m % d != 0)
        throw std::invalid_argument("classify_mod: d must divide m");
    return classify_values_mod(M.elems, d);
}

ForcedSum forced_sum(const ExceptionalStructure& e) {
    ForcedSum f;
    Modulus mod = factorize(e.m);
    if (mod.odd()) {
        f.all_nonzero_attained = true;
        return f;
    }
    f.attainable = e.m / 2;
    if (e.kind == ExceptionalStructure::Kind::Homogeneous) {
        i64 twok = i64(1) << mod.k;
        f.forced_modulus = twok;
        f.forced_residue = mod_norm(e.c * (twok / 2), twok);
    }
    return f;
}

}  // namespace permsum
