#include <doctest.h>

#include "permsum/residue.hpp"

using namespace permsum;

TEST_CASE("factorize recomposes and splits the 2-part") {
    auto f1 = factorize(1);
    CHECK(f1.factors.empty());
    CHECK(f1.k == 0);
    CHECK(f1.n == 1);

    auto f12 = factorize(12);
    REQUIRE(f12.factors.size() == 2);
    CHECK(f12.factors[0] == std::pair<i64, int>{2, 2});
    CHECK(f12.factors[1] == std::pair<i64, int>{3, 1});
    CHECK(f12.k == 2);
    CHECK(f12.n == 3);

    auto f45 = factorize(45);
    REQUIRE(f45.factors.size() == 2);
    CHECK(f45.factors[0] == std::pair<i64, int>{3, 2});
    CHECK(f45.factors[1] == std::pair<i64, int>{5, 1});
    CHECK(f45.k == 0);
    CHECK(f45.n == 45);

    CHECK_THROWS_AS(factorize(0), std::invalid_argument);

    for (i64 m = 1; m <= 2000; ++m) {
        auto f = factorize(m);
        i64 prod = 1;
        i64 last = 1;
        for (auto& [p, e] : f.factors) {
            CHECK(p > last);
            last = p;
            CHECK(e >= 1);
            for (int t = 0; t < e; ++t) prod *= p;
        }
        CHECK(prod == m);
        CHECK(m == (i64(1) << f.k) * f.n);
        CHECK(f.n % 2 == 1);
    }
}

TEST_CASE("gcd behaves like the coprimality predicate") {
    CHECK(gcd(0, 7) == 7);
    CHECK(gcd(6, 4) == 2);
    CHECK(gcd(5, 12) == 1);
    CHECK(gcd(0, 0) == 0);
    for (i64 a = 0; a < 40; ++a)
        for (i64 b = 0; b < 40; ++b) {
            i64 g = gcd(a, b);
            CHECK(gcd(a, b) == gcd(b, a));
            if (g != 0) {
                CHECK(a % g == 0);
                CHECK(b % g == 0);
            }
        }
}

TEST_CASE("triangular sum is zero exactly for odd m") {
    CHECK(triangular_sum_mod(factorize(5)).value() == 0);
    CHECK(triangular_sum_mod(factorize(6)).value() == 3);
    CHECK(triangular_sum_mod(factorize(2)).value() == 1);
    for (i64 m = 1; m <= 300; ++m) {
        i64 direct = 0;
        for (i64 i = 1; i <= m; ++i) direct = (direct + i) % m;
        auto r = triangular_sum_mod(factorize(m));
        CHECK(r.value() == direct);
        CHECK((r.value() == 0) == (m % 2 == 1));
    }
}

TEST_CASE("residues normalize and stay in range") {
    Residue r(-3, 7);
    CHECK(r.value() == 4);
    CHECK((r + Residue(5, 7)).value() == 2);
    CHECK((r * Residue(3, 7)).value() == 5);
    CHECK((-Residue(0, 5)).value() == 0);
    CHECK(inv_mod(5, 12) == 5);
    CHECK_THROWS_AS(inv_mod(4, 12), std::invalid_argument);
}
