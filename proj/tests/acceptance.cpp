// Acceptance suite: every criterion runs at its stated scale and prints one
// PASS/FAIL line. The exit code is the number of failed criteria.
//
//  1  solver/oracle dichotomy, exhaustive over all multisets for m = 1..12
//  2  classifier <=> oracle on the same sweep, plus seeded random tier at
//     m = 13..18 with 1e5 instances each
//  3  odd inhomogeneous spectra equal Z_m minus zero
//  4  even exceptional spectra attain m/2 and never zero
//  5  homogeneous spectra satisfy the forced congruence mod 2^k
//  6  braid transposition delta law, 1e5 random triples, m in 2..64
//  7  full-spectrum prediction verified for m = 1..12
//  8  certificate fuzz: 1e6 solves across m in 2..1e4, all certificates
//     verify and all traces replay
//  9  m = 1e6 solves: <= 10 s each, median <= 2 s, oracle untouched
// 10  subset-DP spectra equal factorial enumeration for every m <= 7

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "permsum/census.hpp"
#include "permsum/classify.hpp"
#include "permsum/io.hpp"
#include "permsum/oracle.hpp"
#include "permsum/solver.hpp"

using namespace permsum;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// enumerate all size-m multisets over the given sorted value set
void multisets_over(const std::vector<i64>& values, i64 m,
                    const std::function<void(const std::vector<i64>&)>& fn) {
    std::vector<i64> cur;
    std::function<void(size_t)> rec = [&](size_t idx) {
        if ((i64)cur.size() == m) {
            fn(cur);
            return;
        }
        if (idx >= values.size()) return;
        i64 room = m - (i64)cur.size();
        for (i64 take = room; take >= 0; --take) {
            for (i64 t = 0; t < take; ++t) cur.push_back(values[idx]);
            rec(idx + 1);
            for (i64 t = 0; t < take; ++t) cur.pop_back();
        }
    };
    rec(0);
}

struct SweepTotals {
    i64 total = 0;
    i64 mism_solver = 0;   // solver vs oracle
    i64 mism_classify = 0; // classifier vs oracle
    i64 fallbacks = 0;
    i64 violations = 0;
};

SweepTotals exhaustive_sweep(i64 m) {
    SweepTotals t;
    Modulus mod = factorize(m);
    enumerate_multisets(m, 0, count_multisets(m), [&](const std::vector<i64>& vals) {
        ZMultiset M{mod, vals};
        auto cls = classify(M);
        auto out = solve(M);
        auto spec = spectrum(M);
        bool oracle_zero = spec.contains(0);
        bool solver_zero = out.status == SolveStatus::Solved &&
                           verify(*out.certificate, M) && out.certificate->value == 0;
        if (out.fallback_used) ++t.fallbacks;
        if (solver_zero != oracle_zero || out.status == SolveStatus::Failed) ++t.mism_solver;
        if (cls.has_value() == oracle_zero) ++t.mism_classify;
        if (conjecture_predicts_full(vals, mod) && spec.count() != m) ++t.violations;
        ++t.total;
    });
    return t;
}

std::vector<ZMultiset> even_exceptional_multisets(i64 m) {
    std::vector<ZMultiset> out;
    Modulus mod = factorize(m);
    i64 twok = i64(1) << mod.k;
    for (i64 c = 1; c < twok; c += 2) {
        std::vector<i64> values;
        for (i64 v = c; v < m; v += twok) values.push_back(v);
        multisets_over(values, m, [&](const std::vector<i64>& vals) {
            out.push_back(ZMultiset::from_values(m, vals));
        });
    }
    for (i64 a = 0; a < m; a += 2) {
        for (i64 b = 1; 2 * b <= m; ++b) {
            if (gcd(b, m) != 1) continue;
            std::vector<i64> vals(m - 2, a);
            vals.push_back(mod_norm(a + b, m));
            vals.push_back(mod_norm(a - b, m));
            out.push_back(ZMultiset::from_values(m, std::move(vals)));
        }
    }
    return out;
}

}  // namespace

int main() {
    std::printf("zero permutational sum acceptance suite\n");

    // ---- criteria 1, 2 (exhaustive part), 7: one sweep per m ----
    {
        double t0 = now();
        SweepTotals all;
        bool ok = true;
        for (i64 m = 1; m <= 12; ++m) {
            auto t = exhaustive_sweep(m);
            all.total += t.total;
            all.mism_solver += t.mism_solver;
            all.mism_classify += t.mism_classify;
            all.fallbacks += t.fallbacks;
            all.violations += t.violations;
            ok &= (t.mism_solver == 0 && t.fallbacks == 0);
        }
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "(%lld multisets, %lld solver mismatches, %lld fallbacks, %.1fs)",
                      (long long)all.total, (long long)all.mism_solver, (long long)all.fallbacks,
                      now() - t0);
        report(1, ok && all.mism_solver == 0 && all.fallbacks == 0, buf);

        // criterion 2, exhaustive part now; random tier appended below
        bool c2_exhaustive = all.mism_classify == 0;

        std::snprintf(buf, sizeof buf, "(%lld conjecture violations over m=1..12)",
                      (long long)all.violations);
        report(7, all.violations == 0, buf);

        // ---- criterion 2 random tier: m = 13..18, 1e5 seeded instances each ----
        double t1 = now();
        i64 mism = 0, checked = 0;
        for (i64 m = 13; m <= 18; ++m) {
            std::mt19937_64 rng(1000 + m);
            std::vector<i64> vals(m);
            for (i64 it = 0; it < 100000; ++it) {
                for (auto& v : vals) v = (i64)(rng() % (u64)m);
                ZMultiset M = ZMultiset::from_values(m, vals);
                bool oracle_zero = has_zero(M);
                if (classify(M).has_value() == oracle_zero) ++mism;
                auto out = solve(M);
                bool solver_zero = out.status == SolveStatus::Solved;
                if (solver_zero != oracle_zero) ++mism;
                ++checked;
            }
        }
        std::snprintf(buf, sizeof buf,
                      "(exhaustive sweep + %lld random at m=13..18, %lld mismatches, %.1fs)",
                      (long long)checked, (long long)mism, now() - t1);
        report(2, c2_exhaustive && mism == 0, buf);
    }

    // ---- criterion 3: odd inhomogeneous spectra are Z_m minus zero ----
    {
        i64 bad = 0, total = 0;
        for (i64 m = 3; m <= 11; m += 2) {
            for (i64 a = 0; a < m; ++a) {
                for (i64 b = 1; 2 * b <= m - 1; ++b) {
                    if (gcd(b, m) != 1) continue;
                    std::vector<i64> vals(m - 2, a);
                    vals.push_back(mod_norm(a + b, m));
                    vals.push_back(mod_norm(a - b, m));
                    ZMultiset M = ZMultiset::from_values(m, std::move(vals));
                    auto spec = spectrum(M);
                    u64 want = ((m >= 64 ? ~0ull : (1ull << m) - 1)) & ~1ull;
                    if (spec.mask != want) ++bad;
                    ++total;
                }
            }
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "(%lld structures, %lld wrong spectra)", (long long)total,
                      (long long)bad);
        report(3, bad == 0, buf);
    }

    // ---- criteria 4, 5: even exceptional spectra ----
    {
        i64 bad4 = 0, bad5 = 0, total = 0, homog = 0;
        for (i64 m = 2; m <= 12; m += 2) {
            Modulus mod = factorize(m);
            i64 twok = i64(1) << mod.k;
            for (auto& M : even_exceptional_multisets(m)) {
                auto spec = spectrum(M);
                if (!spec.contains(m / 2) || spec.contains(0)) ++bad4;
                auto cls = classify(M);
                if (cls && cls->kind == ExceptionalStructure::Kind::Homogeneous) {
                    ++homog;
                    i64 forced = mod_norm(cls->c * (twok / 2), twok);
                    for (i64 v : spec.values())
                        if (mod_norm(v, twok) != forced) ++bad5;
                }
                ++total;
            }
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "(%lld exceptional multisets, %lld bad)", (long long)total,
                      (long long)bad4);
        report(4, bad4 == 0, buf);
        std::snprintf(buf, sizeof buf, "(%lld homogeneous multisets, %lld stray values)",
                      (long long)homog, (long long)bad5);
        report(5, bad5 == 0, buf);
    }

    // ---- criterion 6: braid delta law on 1e5 random triples ----
    {
        std::mt19937_64 rng(6006);
        i64 bad = 0;
        for (int it = 0; it < 100000; ++it) {
            i64 m = 2 + (i64)(rng() % 63);
            std::vector<i64> seq(m);
            for (auto& v : seq) v = (i64)(rng() % (u64)m);
            Arrangement a = Arrangement::from_sequence(m, seq);
            i64 i = 1 + (i64)(rng() % (u64)m);
            i64 x = (i64)(rng() % (u64)m) - (i - 1);
            if (x == 0 || i + x < 1 || i + x > m) { --it; continue; }
            auto [b, delta] = braid_transpose(a, i, x);
            i64 want = mul_mod(mod_norm(x, m), mod_norm(seq[i - 1] - seq[i + x - 1], m), m);
            if (delta.value() != want) ++bad;
            if (perm_sum(b).value() != mod_norm(perm_sum(a).value() + delta.value(), m)) ++bad;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "(100000 triples, %lld violations)", (long long)bad);
        report(6, bad == 0, buf);
    }

    // ---- criterion 8: certificate fuzz across m in 2..1e4 ----
    {
        double t0 = now();
        std::mt19937_64 rng(8008);
        const i64 calls = 1000000;
        i64 bad_cert = 0, bad_replay = 0, failed = 0, solved = 0, exceptional = 0;
        double lo = std::log(2.0), hi = std::log(10000.0);
        for (i64 it = 0; it < calls; ++it) {
            double u = (double)(rng() % (1ull << 52)) / (double)(1ull << 52);
            i64 m = (i64)std::llround(std::exp(lo + u * (hi - lo)));
            m = std::max<i64>(2, std::min<i64>(10000, m));
            std::vector<i64> vals(m);
            for (auto& v : vals) v = (i64)(rng() % (u64)m);
            ZMultiset M = ZMultiset::from_values(m, std::move(vals));
            SolveOptions opts;
            opts.seed = rng();
            auto out = solve(M, opts);
            if (out.status == SolveStatus::Failed) {
                ++failed;
                continue;
            }
            if (out.status == SolveStatus::Exceptional) {
                ++exceptional;
                continue;
            }
            ++solved;
            if (!verify(*out.certificate, M) || out.certificate->value != 0) ++bad_cert;
            auto replayed = replay_trace(M, out.trace);
            if (!replayed || replayed->seq != out.certificate->arrangement.seq) ++bad_replay;
        }
        char buf[224];
        std::snprintf(buf, sizeof buf,
                      "(%lld calls: %lld zero, %lld exceptional, %lld failed, %lld bad "
                      "certificates, %lld bad replays, %.0fs)",
                      (long long)calls, (long long)solved, (long long)exceptional,
                      (long long)failed, (long long)bad_cert, (long long)bad_replay, now() - t0);
        report(8, bad_cert == 0 && bad_replay == 0 && failed == 0, buf);
    }

    // ---- criterion 9: five solves at m = 1e6 ----
    {
        std::mt19937_64 rng(9009);
        const i64 m = 1000000;
        std::vector<double> times;
        i64 oracle_before = oracle_invocations();
        bool all_ok = true;
        for (int it = 0; it < 5; ++it) {
            std::vector<i64> vals(m);
            for (auto& v : vals) v = (i64)(rng() % (u64)m);
            ZMultiset M = ZMultiset::from_values(m, std::move(vals));
            double t0 = now();
            auto out = solve(M);
            times.push_back(now() - t0);
            all_ok &= out.status == SolveStatus::Solved && verify(*out.certificate, M);
        }
        i64 oracle_calls = oracle_invocations() - oracle_before;
        std::sort(times.begin(), times.end());
        double median = times[times.size() / 2], worst = times.back();
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "(median %.2fs, worst %.2fs, oracle calls %lld)", median, worst,
                      (long long)oracle_calls);
        report(9, all_ok && worst <= 10.0 && median <= 2.0 && oracle_calls == 0, buf);
    }

    // ---- criterion 10: DP spectra against factorial enumeration, m <= 7 ----
    {
        i64 bad = 0, total = 0;
        for (i64 m = 1; m <= 7; ++m) {
            enumerate_multisets(m, 0, count_multisets(m), [&](const std::vector<i64>& vals) {
                ZMultiset M = ZMultiset::from_values(m, vals);
                if (spectrum(M).mask != naive_spectrum(M).mask) ++bad;
                ++total;
            });
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "(%lld multisets, %lld disagreements)", (long long)total,
                      (long long)bad);
        report(10, bad == 0, buf);
    }

    std::printf("%s (%d criterion failures)\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                failures);
    return failures;
}
