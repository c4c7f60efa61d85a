#include "permsum/multiset.hpp"

#include <algorithm>

namespace permsum {

ZMultiset ZMultiset::from_values(const Modulus& mod, std::vector<i64> values) {
    if ((i64)values.size() != mod.m)
        throw std::invalid_argument("ZMultiset: need exactly m elements");
    for (auto& v : values) v = mod_norm(v, mod.m);
    std::sort(values.begin(), values.end());
    return ZMultiset{mod, std::move(values)};
}

Arrangement Arrangement::from_sequence(const Modulus& mod, std::vector<i64> seq) {
    if ((i64)seq.size() != mod.m)
        throw std::invalid_argument("Arrangement: need exactly m elements");
    for (auto& v : seq) v = mod_norm(v, mod.m);
    return Arrangement{mod, std::move(seq)};
}

Arrangement Arrangement::of(const ZMultiset& M, std::vector<i64> seq) {
    Arrangement a = from_sequence(M.mod, std::move(seq));
    auto sorted = a.seq;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != M.elems)
        throw std::invalid_argument("Arrangement: sequence is not an order of the multiset");
    return a;
}

i64 perm_sum_span(const i64* vals, i64 len, i64 q) {
    i128 acc = 0;
    for (i64 i = 0; i < len; ++i) {
        acc += (i128)(i + 1) * mod_norm(vals[i], q);
        if ((i & 0xfff) == 0xfff) acc %= q;
    }
    return (i64)(acc % q);
}

Residue perm_sum(const Arrangement& a) {
    return Residue(perm_sum_span(a.seq.data(), (i64)a.seq.size(), a.mod.m), a.mod.m);
}

ZMultiset translate(const ZMultiset& M, i64 c) {
    std::vector<i64> vals = M.elems;
    for (auto& v : vals) v = mod_norm(v + c, M.mod.m);
    return ZMultiset::from_values(M.mod, std::move(vals));
}

ZMultiset dilate(const ZMultiset& M, i64 c) {
    c = mod_norm(c, M.mod.m);
    if (gcd(c, M.mod.m) != 1)
        throw std::invalid_argument("dilate: c must be a unit mod m");
    std::vector<i64> vals = M.elems;
    for (auto& v : vals) v = mul_mod(v, c, M.mod.m);
    return ZMultiset::from_values(M.mod, std::move(vals));
}

namespace {

int prime_exponent(const Modulus& mod, i64 p) {
    for (auto& [q, e] : mod.factors)
        if (q == p) return e;
    return 0;
}

}  // namespace

Arrangement separable_order(const ZMultiset& M, i64 p) {
    int k = prime_exponent(M.mod, p);
    if (k == 0) throw std::invalid_argument("separable_order: p does not divide m");
    std::vector<i64> seq = M.elems;
    std::vector<i64> pw(k);
    pw[0] = p;
    for (int l = 1; l < k; ++l) pw[l] = pw[l - 1] * p;
    std::sort(seq.begin(), seq.end(), [&](i64 a, i64 b) {
        for (int l = 0; l < k; ++l) {
            i64 ra = a % pw[l], rb = b % pw[l];
            if (ra != rb) return ra < rb;
        }
        return a < b;
    });
    return Arrangement{M.mod, std::move(seq)};
}

bool is_separable_cyclic(const Arrangement& a, i64 p) {
    int k = prime_exponent(a.mod, p);
    if (k == 0) throw std::invalid_argument("is_separable_cyclic: p does not divide m");
    i64 m = a.mod.m;
    // Each residue class mod p^l must form one cyclic arc: the number of
    // cyclic adjacent class changes equals the number of distinct classes.
    i64 pl = 1;
    for (int l = 1; l <= k; ++l) {
        pl *= p;
        std::vector<char> seen(pl, 0);
        i64 classes = 0, changes = 0;
        for (i64 i = 0; i < m; ++i) {
            i64 c = a.seq[i] % pl;
            if (!seen[c]) { seen[c] = 1; ++classes; }
            i64 d = a.seq[(i + 1) % m] % pl;
            if (c != d) ++changes;
        }
        if (classes > 1 && changes != classes) return false;
    }
    return true;
}

BlockDecomposition decompose(const Arrangement& a, i64 p) {
    i64 m = a.mod.m;
    if (p < 1 || m % p != 0) throw std::invalid_argument("decompose: p must divide m");
    BlockDecomposition d;
    d.p = p;
    d.m_star = m / p;
    d.block_sums.resize(p);
    d.inner_sums.resize(p);
    i128 rtot = 0;
    for (i64 b = 0; b < p; ++b) {
        const i64* base = a.seq.data() + b * d.m_star;
        i128 s = 0, r = 0;
        for (i64 j = 0; j < d.m_star; ++j) {
            s += base[j];
            r += (i128)(j + 1) * base[j];
        }
        d.block_sums[b] = (i64)(s % m);
        d.inner_sums[b] = (i64)(r % m);
        rtot += d.inner_sums[b];
    }
    d.R = (i64)(rtot % m);
    if (d.R % d.m_star == 0) d.R_prime = mod_norm(d.R / d.m_star, p);
    return d;
}

std::pair<Arrangement, Residue> braid_transpose(const Arrangement& a, i64 i, i64 x) {
    i64 m = a.mod.m;
    if (i < 1 || i + x < 1 || i > m || i + x > m)
        throw std::invalid_argument("braid_transpose: positions out of range");
    Arrangement out = a;
    std::swap(out.seq[i - 1], out.seq[i + x - 1]);
    i64 delta = mul_mod(mod_norm(x, m), mod_norm(a.seq[i - 1] - a.seq[i + x - 1], m), m);
    return {std::move(out), Residue(delta, m)};
}

Arrangement rotate(const Arrangement& a, i64 r) {
    i64 m = a.mod.m;
    r = mod_norm(r, m);
    Arrangement out = a;
    std::rotate(out.seq.begin(), out.seq.begin() + r, out.seq.end());
    return out;
}

bool verify(const SumCertificate& cert, const ZMultiset& parent) {
    if (cert.arrangement.mod.m != parent.mod.m) return false;
    auto sorted = cert.arrangement.seq;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != parent.elems) return false;
    return perm_sum(cert.arrangement).value() == mod_norm(cert.value, parent.mod.m);
}

}  // namespace permsum
