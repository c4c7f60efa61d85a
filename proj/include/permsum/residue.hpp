#pragma once

// Exact modular arithmetic for cyclic groups Z_m, m in a 64-bit word.
// Everything here is a value type; operations are pure.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace permsum {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

// Normalize x into [0, m).
inline i64 mod_norm(i64 x, i64 m) {
    i64 r = x % m;
    return r < 0 ? r + m : r;
}

inline i64 mul_mod(i64 a, i64 b, i64 m) {
    return static_cast<i64>((i128)mod_norm(a, m) * mod_norm(b, m) % m);
}

// Inverse of a mod m, requires gcd(a, m) = 1.
i64 inv_mod(i64 a, i64 m);

// Group order together with its prime factorization and 2-adic split m = 2^k * n.
struct Modulus {
    i64 m = 1;
    std::vector<std::pair<i64, int>> factors;  // (prime, exponent), primes ascending
    int k = 0;                                 // exponent of 2
    i64 n = 1;                                 // odd part

    bool odd() const { return k == 0; }
};

// Trial division; group orders in scope stay well below 2^32 so this is plenty.
Modulus factorize(i64 m);

// Memoized per thread; the solver factors the same block moduli constantly.
const Modulus& factorize_cached(i64 m);

inline i64 gcd(i64 a, i64 b) { return std::gcd(a, b); }

// An element of Z_m, normalized to [0, m) at construction.
class Residue {
  public:
    Residue(i64 value, i64 modulus) : m_(modulus), v_(mod_norm(value, modulus)) {
        if (modulus < 1) throw std::invalid_argument("Residue: modulus must be positive");
    }
    i64 value() const { return v_; }
    i64 modulus() const { return m_; }

    Residue operator+(const Residue& o) const { return {v_ + o.v_, m_}; }
    Residue operator-(const Residue& o) const { return {v_ - o.v_, m_}; }
    Residue operator*(const Residue& o) const { return {mul_mod(v_, o.v_, m_), m_}; }
    Residue operator-() const { return {-v_, m_}; }
    bool operator==(const Residue& o) const { return v_ == o.v_ && m_ == o.m_; }

  private:
    i64 m_;
    i64 v_;
};

// (1 + 2 + ... + m) mod m: 0 for odd m, m/2 for even m.
Residue triangular_sum_mod(const Modulus& mod);

}  // namespace permsum
