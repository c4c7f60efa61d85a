#pragma once

// Problem instances: multisets of exactly m residues of Z_m, ordered
// arrangements of them, permutational-sum certificates, and the block
// machinery the constructive solver manipulates.
//
// Positions are 1-based throughout so that the permutational sum reads
// literally as sum_{i=1..m} i * a_i.

#include <optional>
#include <vector>

#include "permsum/residue.hpp"

namespace permsum {

struct ZMultiset {
    Modulus mod;
    std::vector<i64> elems;  // sorted ascending, size == mod.m, values in [0, m)

    static ZMultiset from_values(const Modulus& mod, std::vector<i64> values);
    static ZMultiset from_values(i64 m, std::vector<i64> values) {
        return from_values(factorize(m), std::move(values));
    }
};

struct Arrangement {
    Modulus mod;
    std::vector<i64> seq;  // size == mod.m, values in [0, m)

    static Arrangement from_sequence(const Modulus& mod, std::vector<i64> seq);
    static Arrangement from_sequence(i64 m, std::vector<i64> seq) {
        return from_sequence(factorize(m), std::move(seq));
    }
    // Arrangement of M in the given order; verifies the multisets agree.
    static Arrangement of(const ZMultiset& M, std::vector<i64> seq);
};

struct SumCertificate {
    Arrangement arrangement;
    i64 value = 0;  // claimed permutational sum
};

// p consecutive blocks of m* = m/p elements:
//   S_i = block element sums, R_i = in-block permutational sums,
//   Phi = R + m* * sum_{i=0..p-1} i * S_{i+1}.
struct BlockDecomposition {
    i64 p = 1;
    i64 m_star = 1;
    std::vector<i64> block_sums;  // S_i mod m
    std::vector<i64> inner_sums;  // R_i mod m
    i64 R = 0;                    // sum of R_i mod m
    std::optional<i64> R_prime;   // R / m* mod p, present when m* | R
};

// sum_{i=1..m} i * a_i mod m
Residue perm_sum(const Arrangement& a);

// Raw helper used throughout the solver: sum over a value span, 1-based
// coefficients, reduced mod q.
i64 perm_sum_span(const i64* vals, i64 len, i64 q);

ZMultiset translate(const ZMultiset& M, i64 c);
// requires gcd(c, m) = 1
ZMultiset dilate(const ZMultiset& M, i64 c);

// Deterministic separable order relative to prime p | m: radix grouping by
// residue mod p, then mod p^2, ..., mod p^k, ties broken by value.
Arrangement separable_order(const ZMultiset& M, i64 p);

// True iff some cyclic translate of the sequence has, for every l <= k,
// each residue class mod p^l occupying a contiguous cyclic arc.
bool is_separable_cyclic(const Arrangement& a, i64 p);

// requires p | m
BlockDecomposition decompose(const Arrangement& a, i64 p);

// Swap a_i and a_{i+x} (1-based); delta = x*(a_i - a_{i+x}) mod m and
// perm_sum(new) = perm_sum(old) + delta.
std::pair<Arrangement, Residue> braid_transpose(const Arrangement& a, i64 i, i64 x);

// Cyclic rotation: element at position r+1 becomes first.
Arrangement rotate(const Arrangement& a, i64 r);

// Recomputes the sum and the multiset equality against the stated parent.
bool verify(const SumCertificate& cert, const ZMultiset& parent);

}  // namespace permsum
