#include <doctest.h>

#include <random>

#include "permsum/classify.hpp"
#include "permsum/oracle.hpp"

using namespace permsum;

namespace {

ZMultiset mk(i64 m, std::vector<i64> v) { return ZMultiset::from_values(m, std::move(v)); }

}  // namespace

TEST_CASE("classify recognizes the two structures") {
    auto r1 = classify(mk(5, {1, 1, 1, 2, 0}));
    REQUIRE(r1.has_value());
    CHECK(r1->kind == ExceptionalStructure::Kind::Inhomogeneous);
    CHECK(r1->a == 1);
    CHECK(r1->b == 1);

    CHECK(!classify(mk(4, {1, 1, 3, 3})).has_value());

    auto r2 = classify(mk(6, {1, 1, 1, 1, 1, 1}));
    REQUIRE(r2.has_value());
    CHECK(r2->kind == ExceptionalStructure::Kind::Homogeneous);
    CHECK(r2->c == 1);

    auto r3 = classify(mk(6, {0, 0, 0, 0, 1, 5}));
    REQUIRE(r3.has_value());
    CHECK(r3->kind == ExceptionalStructure::Kind::Inhomogeneous);
    CHECK(r3->a == 0);
    CHECK(r3->b == 1);

    CHECK(!classify(mk(5, {0, 0, 0, 0, 0})).has_value());

    // inhomogeneous with even m requires an even majority value
    CHECK(!classify(mk(6, {1, 1, 1, 1, 2, 0})).has_value());

    // m = 12, all ones: k = 2, every element is 1 mod 4
    auto r4 = classify(mk(12, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}));
    REQUIRE(r4.has_value());
    CHECK(r4->kind == ExceptionalStructure::Kind::Homogeneous);
    CHECK(r4->c == 1);
}

TEST_CASE("classify_mod reduces blocks into Z_d") {
    CHECK(!classify_values_mod({7, 7, 12}, 3).has_value());
    CHECK(!classify_values_mod({2, 2, 2}, 3).has_value());
    auto r = classify_values_mod({0, 1, 2}, 3);
    REQUIRE(r.has_value());
    CHECK(r->kind == ExceptionalStructure::Kind::Inhomogeneous);
    CHECK(r->a == 0);
    CHECK(r->b == 1);
    CHECK_THROWS_AS(classify_values_mod({0, 1}, 3), std::invalid_argument);

    auto M15 = mk(15, {2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 9, 10});
    CHECK_THROWS_AS(classify_mod(M15, 4), std::invalid_argument);
}

TEST_CASE("forced sums per structure") {
    ExceptionalStructure inh5{ExceptionalStructure::Kind::Inhomogeneous, 5, 0, 0, 1};
    auto f1 = forced_sum(inh5);
    CHECK(f1.zero_excluded);
    CHECK(f1.all_nonzero_attained);

    ExceptionalStructure hom6{ExceptionalStructure::Kind::Homogeneous, 6, 1, 0, 0};
    auto f2 = forced_sum(hom6);
    CHECK(f2.attainable == 3);
    CHECK(f2.forced_modulus == 2);
    CHECK(f2.forced_residue == 1);

    ExceptionalStructure hom4{ExceptionalStructure::Kind::Homogeneous, 4, 1, 0, 0};
    auto f3 = forced_sum(hom4);
    CHECK(f3.attainable == 2);
    CHECK(f3.forced_modulus == 4);
    CHECK(f3.forced_residue == 2);
}

TEST_CASE("classifier matches the oracle exhaustively for small m") {
    for (i64 m = 1; m <= 8; ++m) {
        std::vector<i64> vals(m, 0);
        bool done = false;
        while (!done) {
            ZMultiset M = mk(m, vals);
            bool exc = classify(M).has_value();
            bool zero = has_zero(M);
            CHECK(exc == !zero);
            // next nondecreasing sequence
            i64 i = m - 1;
            while (i >= 0 && vals[i] == m - 1) --i;
            if (i < 0) done = true;
            else {
                ++vals[i];
                for (i64 j = i + 1; j < m; ++j) vals[j] = vals[i];
            }
        }
    }
}

TEST_CASE("classification is equivariant under dilation and odd translation") {
    std::mt19937_64 rng(5);
    for (i64 m : {5, 7, 9, 6, 8, 12}) {
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<i64> vals(m);
            for (auto& v : vals) v = (i64)(rng() % (u64)m);
            ZMultiset M = mk(m, vals);
            auto base = classify(M);
            for (i64 u = 1; u < m; ++u) {
                if (gcd(u, m) != 1) continue;
                CHECK(classify(dilate(M, u)).has_value() == base.has_value());
            }
            if (m % 2 == 1) {
                i64 c = (i64)(rng() % (u64)m);
                auto shifted = classify(translate(M, c));
                CHECK(shifted.has_value() == base.has_value());
                if (base && base->kind == ExceptionalStructure::Kind::Inhomogeneous) {
                    REQUIRE(shifted.has_value());
                    CHECK(shifted->a == mod_norm(base->a + c, m));
                    CHECK(shifted->b == base->b);
                }
            } else {
                i64 c = 2 * (i64)(rng() % (u64)(m / 2));
                CHECK(classify(translate(M, c)).has_value() == base.has_value());
            }
        }
    }
}

TEST_CASE("homogeneous forced congruence holds on sampled permutations") {
    std::mt19937_64 rng(17);
    for (i64 m : {6, 8, 12}) {
        Modulus f = factorize(m);
        i64 twok = i64(1) << f.k;
        // build a homogeneous multiset: all elements c mod 2^k
        for (int rep = 0; rep < 20; ++rep) {
            i64 c = 1 + 2 * (i64)(rng() % (u64)(twok / 2));
            std::vector<i64> vals(m);
            for (auto& v : vals) v = mod_norm(c + twok * (i64)(rng() % 4), m);
            ZMultiset M = mk(m, vals);
            auto cls = classify(M);
            REQUIRE(cls.has_value());
            auto fs = forced_sum(*cls);
            std::vector<i64> seq = M.elems;
            for (int s = 0; s < 30; ++s) {
                std::shuffle(seq.begin(), seq.end(), rng);
                i64 phi = perm_sum_span(seq.data(), m, m);
                CHECK(mod_norm(phi, *fs.forced_modulus) == *fs.forced_residue);
            }
        }
    }
}
