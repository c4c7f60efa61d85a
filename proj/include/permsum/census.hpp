#pragma once

// Exhaustive and randomized experiment driver: sweep multisets of Z_m, run
// classifier/solver/oracle side by side, check the full-spectrum prediction,
// and persist machine-readable reports.

#include <functional>
#include <string>

#include "permsum/solver.hpp"

namespace permsum {

struct CensusOptions {
    int workers = 1;              // identical reports for any worker count
    i64 oracle_cap = kDefaultOracleCap;
    u64 seed = 1;                 // solver seed
    bool reduce_symmetry = false; // orbit representatives only (odd m: translate+dilate)
    bool with_spectrum = true;    // compute spectra (required for conjecture checks)
};

struct CensusAnomaly {
    std::string kind;  // "mismatch" or "violation"
    std::vector<i64> multiset;
    std::string details;
};

struct CensusReport {
    i64 m = 0;
    i64 total = 0;          // multisets examined
    i64 orbit_total = 0;    // full count reconstructed from orbit sizes (== total without reduction)
    i64 zero_solved = 0;
    i64 homogeneous = 0;
    i64 inhomogeneous = 0;
    i64 mismatches = 0;     // solver vs oracle vs classifier disagreements
    i64 fallbacks = 0;      // safety-net activations
    i64 conjecture_violations = 0;
    double seconds = 0.0;
    std::vector<CensusAnomaly> anomalies;
};

// Number of multisets of size m over Z_m: C(2m-1, m).
i64 count_multisets(i64 m);

// Lexicographic rank <-> nondecreasing sequence, for deterministic work splits.
std::vector<i64> unrank_multiset(i64 m, i64 rank);

// Visit all multisets in lexicographic order (ranks [from, to)).
void enumerate_multisets(i64 m, i64 from, i64 to,
                         const std::function<void(const std::vector<i64>&)>& fn);

// The full-spectrum prediction: every value is attained unless the multiset
// is {a,...,a,a+b,a-b} or all elements agree mod some prime divisor of m.
bool conjecture_predicts_full(const std::vector<i64>& sorted_vals, const Modulus& mod);

CensusReport run_census(i64 m, const CensusOptions& opts = {});

// Multisets violating the prediction (expected empty).
std::vector<std::vector<i64>> conjecture_check(i64 m, const CensusOptions& opts = {});

// Seeded random tier for m beyond exhaustive reach: classifier and solver
// against the oracle on `count` uniform multisets. Returns a report with
// total = count and the same mismatch accounting.
CensusReport random_census(i64 m, i64 count, const CensusOptions& opts = {});

// Report files: census-m<NN>.jsonl (summary line plus one line per anomaly)
// and an appended row in census-summary.csv.
void write_report_jsonl(const CensusReport& rep, const std::string& dir);
void append_summary_csv(const CensusReport& rep, const std::string& dir);

}  // namespace permsum
