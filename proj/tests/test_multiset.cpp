#include <doctest.h>

#include <algorithm>
#include <random>

#include "permsum/multiset.hpp"
#include "permsum/residue.hpp"

using namespace permsum;

namespace {

Arrangement arr(i64 m, std::vector<i64> seq) { return Arrangement::from_sequence(m, std::move(seq)); }

}  // namespace

TEST_CASE("perm_sum evaluates sum i*a_i") {
    CHECK(perm_sum(arr(5, {0, 0, 0, 0, 0})).value() == 0);
    CHECK(perm_sum(arr(3, {0, 1, 2})).value() == 2);
    CHECK(perm_sum(arr(4, {1, 1, 1, 1})).value() == 2);
}

TEST_CASE("translate and dilate act elementwise") {
    auto M = ZMultiset::from_values(5, {0, 0, 1, 2, 4});
    auto T = translate(M, 1);
    CHECK(T.elems == std::vector<i64>{0, 1, 1, 2, 3});
    auto M3 = ZMultiset::from_values(3, {0, 1, 4});
    auto D = dilate(M3, 2);
    CHECK(D.elems == std::vector<i64>{0, 2, 2});
    CHECK(dilate(M, 1).elems == M.elems);
    CHECK_THROWS_AS(dilate(ZMultiset::from_values(4, {0, 1, 2, 3}), 2), std::invalid_argument);
}

TEST_CASE("perm_sum transformation laws") {
    std::mt19937_64 rng(7);
    for (i64 m : {3, 4, 5, 6, 7, 9, 12}) {
        i64 tri = triangular_sum_mod(factorize(m)).value();
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<i64> seq(m);
            for (auto& v : seq) v = (i64)(rng() % (u64)m);
            auto a = arr(m, seq);
            i64 phi = perm_sum(a).value();
            i64 c = (i64)(rng() % (u64)m);
            std::vector<i64> tseq = seq;
            for (auto& v : tseq) v = mod_norm(v + c, m);
            CHECK(perm_sum(arr(m, tseq)).value() == mod_norm(phi + c * tri, m));
            i64 u = 1 + (i64)(rng() % (u64)(m - 1));
            if (gcd(u, m) == 1) {
                std::vector<i64> dseq = seq;
                for (auto& v : dseq) v = mul_mod(v, u, m);
                CHECK(perm_sum(arr(m, dseq)).value() == mul_mod(u, phi, m));
            }
        }
    }
}

TEST_CASE("separable order groups residue classes contiguously") {
    auto M = ZMultiset::from_values(9, {0, 3, 6, 1, 4, 7, 2, 5, 8});
    auto a = separable_order(M, 3);
    CHECK(a.seq == std::vector<i64>{0, 3, 6, 1, 4, 7, 2, 5, 8});
    CHECK(is_separable_cyclic(a, 3));

    auto M4 = ZMultiset::from_values(4, {1, 1, 3, 3});
    CHECK(is_separable_cyclic(arr(4, {1, 1, 3, 3}), 2));
    CHECK(!is_separable_cyclic(arr(4, {1, 3, 1, 3}), 2));
    CHECK(is_separable_cyclic(arr(4, {2, 2, 2, 2}), 2));
    CHECK(separable_order(M4, 2).seq == std::vector<i64>{1, 1, 3, 3});
    CHECK_THROWS_AS(separable_order(M4, 3), std::invalid_argument);

    std::mt19937_64 rng(11);
    for (i64 m : {8, 9, 12, 18, 27}) {
        auto f = factorize(m);
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<i64> vals(m);
            for (auto& v : vals) v = (i64)(rng() % (u64)m);
            auto Z = ZMultiset::from_values(m, vals);
            for (auto& [p, e] : f.factors) CHECK(is_separable_cyclic(separable_order(Z, p), p));
        }
    }
}

TEST_CASE("decompose satisfies the reconstruction identity") {
    auto a = arr(6, {1, 1, 2, 2, 0, 0});
    auto d = decompose(a, 3);
    CHECK(d.m_star == 2);
    CHECK(d.block_sums == std::vector<i64>{2, 4, 0});
    CHECK(d.inner_sums == std::vector<i64>{3, 0, 0});
    CHECK(d.R == 3);

    auto z = decompose(arr(4, {0, 0, 0, 0}), 2);
    CHECK(z.block_sums == std::vector<i64>{0, 0});
    CHECK(z.R == 0);

    std::mt19937_64 rng(3);
    for (i64 m : {6, 8, 9, 12, 15}) {
        auto f = factorize(m);
        for (int rep = 0; rep < 60; ++rep) {
            std::vector<i64> seq(m);
            for (auto& v : seq) v = (i64)(rng() % (u64)m);
            auto ar = arr(m, seq);
            for (auto& [p, e] : f.factors) {
                auto dd = decompose(ar, p);
                i128 acc = dd.R;
                for (i64 i = 0; i < p; ++i) acc += (i128)dd.m_star * i % m * dd.block_sums[i];
                CHECK((i64)(acc % m) == perm_sum(ar).value());
            }
        }
    }
}

TEST_CASE("braid transposition changes the sum by x(a_i - a_{i+x})") {
    auto a = arr(6, {1, 1, 1, 1, 1, 2});
    auto [b, delta] = braid_transpose(a, 3, 3);
    CHECK(delta.value() == 3);
    CHECK(perm_sum(b).value() == mod_norm(perm_sum(a).value() + delta.value(), 6));

    auto [c, d0] = braid_transpose(arr(5, {2, 2, 2, 2, 2}), 1, 2);
    CHECK(d0.value() == 0);

    CHECK_THROWS_AS(braid_transpose(a, 5, 3), std::invalid_argument);

    // exhaustive check at small m
    std::mt19937_64 rng(19);
    for (i64 m = 2; m <= 8; ++m) {
        for (int rep = 0; rep < 40; ++rep) {
            std::vector<i64> seq(m);
            for (auto& v : seq) v = (i64)(rng() % (u64)m);
            auto base = arr(m, seq);
            i64 phi = perm_sum(base).value();
            for (i64 i = 1; i <= m; ++i)
                for (i64 x = 1 - i; x <= m - i; ++x) {
                    if (x == 0) continue;
                    auto [nb, dl] = braid_transpose(base, i, x);
                    CHECK(perm_sum(nb).value() == mod_norm(phi + dl.value(), m));
                    CHECK(dl.value() == mul_mod(mod_norm(x, m),
                                                mod_norm(seq[i - 1] - seq[i + x - 1], m), m));
                }
        }
    }
}

TEST_CASE("exchangeable swap keeps R intact when residues differ mod p") {
    // pairs at distance m* in the same in-block position
    auto a = arr(6, {1, 4, 2, 5, 0, 3});
    auto before = decompose(a, 3);
    auto [b, delta] = braid_transpose(a, 2, 2);
    auto after = decompose(b, 3);
    CHECK(before.R == after.R);
    (void)delta;
}

TEST_CASE("verify accepts exactly the truthful certificates") {
    auto M = ZMultiset::from_values(6, {0, 1, 1, 1, 1, 2});
    auto good = Arrangement::of(M, {1, 1, 2, 1, 1, 0});
    SumCertificate cert{good, perm_sum(good).value()};
    CHECK(verify(cert, M));

    SumCertificate off{good, mod_norm(cert.value + 1, 6)};
    CHECK(!verify(off, M));

    auto tampered = good;
    tampered.seq[0] = 5;
    CHECK(!verify(SumCertificate{tampered, cert.value}, M));
}

TEST_CASE("rotation is cyclic") {
    auto a = arr(5, {0, 1, 2, 3, 4});
    CHECK(rotate(a, 2).seq == std::vector<i64>{2, 3, 4, 0, 1});
    CHECK(rotate(a, 0).seq == a.seq);
    CHECK(rotate(a, 5).seq == a.seq);
}

TEST_CASE("consecutive-block property of separable translates") {
    // split a separable arrangement into >= 3 blocks: a residue class present
    // in every block leaves at most two blocks containing anything else
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        i64 m = 9;
        std::vector<i64> vals(m);
        for (auto& v : vals) v = (i64)(rng() % (u64)m);
        auto Z = ZMultiset::from_values(m, vals);
        auto a = separable_order(Z, 3);
        // rearrange inside blocks of size 3
        for (int b = 0; b < 3; ++b)
            std::shuffle(a.seq.begin() + 3 * b, a.seq.begin() + 3 * (b + 1), rng);
        for (i64 pl : {3, 9}) {
            for (i64 r = 0; r < pl; ++r) {
                bool in_all = true;
                for (int b = 0; b < 3 && in_all; ++b) {
                    bool found = false;
                    for (int t = 0; t < 3; ++t) found |= mod_norm(a.seq[3 * b + t], pl) == r;
                    in_all &= found;
                }
                if (!in_all) continue;
                int blocks_with_other = 0;
                for (int b = 0; b < 3; ++b) {
                    bool other = false;
                    for (int t = 0; t < 3; ++t) other |= mod_norm(a.seq[3 * b + t], pl) != r;
                    blocks_with_other += other;
                }
                CHECK(blocks_with_other <= 2);
            }
        }
    }
}
