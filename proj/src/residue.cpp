#include "permsum/residue.hpp"

#include <unordered_map>

namespace permsum {

Modulus factorize(i64 m) {
    if (m < 1) throw std::invalid_argument("factorize: m must be >= 1");
    Modulus out;
    out.m = m;
    i64 rest = m;
    for (i64 p = 2; p * p <= rest; p += (p == 2 ? 1 : 2)) {
        if (rest % p) continue;
        int e = 0;
        while (rest % p == 0) { rest /= p; ++e; }
        out.factors.emplace_back(p, e);
    }
    if (rest > 1) out.factors.emplace_back(rest, 1);
    out.k = 0;
    out.n = m;
    if (!out.factors.empty() && out.factors.front().first == 2) {
        out.k = out.factors.front().second;
        out.n = m >> out.k;
    }
    return out;
}

const Modulus& factorize_cached(i64 m) {
    thread_local std::unordered_map<i64, Modulus> cache;
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, factorize(m)).first;
    return it->second;
}

i64 inv_mod(i64 a, i64 m) {
    a = mod_norm(a, m);
    i64 g = m, x = 0, x1 = 1, a1 = a;
    while (a1) {
        i64 q = g / a1;
        g -= q * a1; std::swap(g, a1);
        x -= q * x1; std::swap(x, x1);
    }
    if (g != 1) throw std::invalid_argument("inv_mod: not a unit");
    return mod_norm(x, m);
}

Residue triangular_sum_mod(const Modulus& mod) {
    i64 m = mod.m;
    // m(m+1)/2 mod m without overflow: one of m, m+1 is even
    i64 half = (m % 2 == 0) ? mul_mod(m / 2, m + 1, m) : mul_mod(m, (m + 1) / 2, m);
    return Residue(half, m);
}

}  // namespace permsum
