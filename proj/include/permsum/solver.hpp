#pragma once

// Constructive solver: produce a zero-sum arrangement or the exceptional
// classification for arbitrary m, by induction on the number of prime
// factors. Near-linear: no step enumerates more than O(m) candidates, and
// the spectrum oracle is never consulted on the constructive path (the only
// exceptions are the safety net and sub-cap quarter-value decisions).
//
// Every mutation of the working sequence is a recorded permutation step, so
// a solve is replayable and auditable.

#include <variant>

#include "permsum/classify.hpp"
#include "permsum/multiset.hpp"
#include "permsum/oracle.hpp"

namespace permsum {

enum class StepOp { Note, Swap, Rotate, Reverse, BlockPerm, Permute };

struct TraceStep {
    std::string tag;         // behavior-named rule, e.g. "braid-column-swap"
    StepOp op = StepOp::Note;
    i64 lo = 0, len = 0;     // affected subrange (0-based lo)
    i64 i = 0, j = 0;        // swap positions (absolute 0-based) or rotate amount in i
    std::vector<i64> perm;   // Permute/BlockPerm payload; may be elided in light mode
    i64 phi_after = 0;       // full-sequence permutational sum mod m after the step
};

struct Trace {
    std::vector<TraceStep> steps;
    bool replayable = true;  // false once a payload was elided
};

enum class SolveStatus { Solved, Exceptional, Failed };

struct SolveOptions {
    u64 seed = 1;
    i64 oracle_cap = kDefaultOracleCap;
    i64 full_trace_limit = 200000;  // permutation payloads recorded when m <= limit
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::Failed;
    std::optional<SumCertificate> certificate;      // present iff Solved, value 0
    std::optional<ExceptionalStructure> exception;  // present iff Exceptional
    Trace trace;
    bool fallback_used = false;  // safety net fired (answer still correct)
    std::string diagnostic;      // set when Failed
};

SolveOutcome solve(const ZMultiset& M, const SolveOptions& opts = {});

// Shape-restricted entry points.
SolveOutcome solve_prime(const ZMultiset& M, const SolveOptions& opts = {});
SolveOutcome solve_odd(const ZMultiset& M, const SolveOptions& opts = {});
SolveOutcome solve_even(const ZMultiset& M, const SolveOptions& opts = {});

// Two even elements, the other m-2 odd and congruent mod 2^(k-1); m = 2^k n > 4,
// k > 1. Always yields a zero certificate. Throws when the hypothesis fails.
SumCertificate solve_atlast(const ZMultiset& M, const SolveOptions& opts = {});

// All elements congruent mod p: signals the divide-through reduction.
struct UniformResidues {
    i64 prime = 0;
    i64 residue = 0;
};

// Rigid endpoint of the mod-p^l ladder: all elements share t mod p^exponent
// except two singletons.
struct RigidWitness {
    i64 prime = 0;
    int exponent = 0;
    i64 t = 0;
};

// Repair steps of the third stage, exposed for direct testing. Both expect an
// arrangement whose p-block decomposition already has m* | R.
std::variant<Arrangement, UniformResidues> fix_R_nonzero(const Arrangement& a, i64 p,
                                                         u64 seed = 1);
std::variant<Arrangement, RigidWitness> fix_R_zero(const Arrangement& a, i64 p,
                                                   u64 seed = 1);

struct MultiprimeWitness {
    i64 prime = 0;
    int exponent = 0;
    i64 t = 0;  // shared residue mod prime^exponent
};

// Coefficient assignment for odd m with >= 2 prime factors where, for every
// prime, all elements share t_i mod p_i^{k_i} except zero or two. Throws when
// M does not match the witnesses.
SolveOutcome finish_multiprime(const ZMultiset& M,
                               const std::vector<MultiprimeWitness>& witnesses);

// Re-applies a replayable trace to M's sorted order.
std::optional<Arrangement> replay_trace(const ZMultiset& M, const Trace& trace);

// Safety-net activations since process start.
i64 solver_fallback_activations();

}  // namespace permsum
