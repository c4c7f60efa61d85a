#include "permsum/census.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <json.hpp>

#include "permsum/classify.hpp"
#include "permsum/io.hpp"
#include "permsum/oracle.hpp"

namespace permsum {

namespace {

// C(n, k) without overflow for the sizes in scope
i64 binom(i64 n, i64 k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i128 r = 1;
    for (i64 i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return (i64)r;
}

struct Tally {
    i64 total = 0;
    i64 orbit_total = 0;
    i64 zero_solved = 0;
    i64 homogeneous = 0;
    i64 inhomogeneous = 0;
    i64 mismatches = 0;
    i64 fallbacks = 0;
    i64 conjecture_violations = 0;
    std::vector<CensusAnomaly> anomalies;

    void merge(Tally&& o) {
        total += o.total;
        orbit_total += o.orbit_total;
        zero_solved += o.zero_solved;
        homogeneous += o.homogeneous;
        inhomogeneous += o.inhomogeneous;
        mismatches += o.mismatches;
        fallbacks += o.fallbacks;
        conjecture_violations += o.conjecture_violations;
        for (auto& a : o.anomalies) anomalies.push_back(std::move(a));
    }
};

std::string join_vals(const std::vector<i64>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

// canonical orbit representative under unit dilation (all m) and translation
// (odd m only); returns orbit size as well
std::pair<std::vector<i64>, i64> orbit_canonical(const std::vector<i64>& sorted_vals,
                                                 const Modulus& mod) {
    i64 m = mod.m;
    std::vector<i64> units;
    for (i64 u = 1; u < m; ++u)
        if (gcd(u, m) == 1) units.push_back(u);
    if (m == 1) units.push_back(0);
    std::vector<i64> best = sorted_vals;
    std::vector<std::vector<i64>> seen;
    std::vector<i64> tmp(sorted_vals.size());
    i64 shifts = mod.odd() ? m : 1;
    for (i64 u : units) {
        for (i64 c = 0; c < shifts; ++c) {
            for (size_t t = 0; t < sorted_vals.size(); ++t)
                tmp[t] = mod_norm(mul_mod(u, sorted_vals[t] + c, m), m);
            std::sort(tmp.begin(), tmp.end());
            if (tmp < best) best = tmp;
            if (std::find(seen.begin(), seen.end(), tmp) == seen.end()) seen.push_back(tmp);
        }
    }
    return {best, (i64)seen.size()};
}

void examine(const std::vector<i64>& vals, i64 m, const Modulus& mod, const CensusOptions& opts,
             Tally& tally, i64 orbit_weight) {
    ZMultiset M{mod, vals};
    auto cls = classify(M);
    SolveOptions sopts;
    sopts.seed = opts.seed;
    sopts.oracle_cap = opts.oracle_cap;
    auto outcome = solve(M, sopts);

    bool solver_zero = outcome.status == SolveStatus::Solved;
    bool classifier_exc = cls.has_value();
    if (outcome.fallback_used) ++tally.fallbacks;

    bool oracle_zero = solver_zero;  // placeholder when spectra are disabled
    std::optional<Spectrum> spec;
    if (opts.with_spectrum) {
        spec = spectrum(M, opts.oracle_cap);
        oracle_zero = spec->contains(0);
    }

    bool mism = false;
    if (solver_zero == classifier_exc) mism = true;  // dichotomy broken
    if (opts.with_spectrum && oracle_zero != solver_zero) mism = true;
    if (outcome.status == SolveStatus::Failed) mism = true;
    if (solver_zero && !verify(*outcome.certificate, M)) mism = true;
    if (mism) {
        ++tally.mismatches;
        tally.anomalies.push_back({"mismatch", vals,
                                   "solver=" + std::string(solver_zero ? "zero" : "blocked") +
                                       " classifier=" + (classifier_exc ? "exceptional" : "none") +
                                       (opts.with_spectrum
                                            ? std::string(" oracle=") + (oracle_zero ? "zero" : "nonzero")
                                            : std::string())});
    }

    if (classifier_exc) {
        if (cls->kind == ExceptionalStructure::Kind::Homogeneous) tally.homogeneous += orbit_weight;
        else tally.inhomogeneous += orbit_weight;
    } else {
        tally.zero_solved += orbit_weight;
    }

    if (opts.with_spectrum) {
        bool full = spec->count() == m;
        bool predicted_full = conjecture_predicts_full(vals, mod);
        if (predicted_full && !full) {
            ++tally.conjecture_violations;
            tally.anomalies.push_back({"violation", vals, "spectrum=" + join_vals(spec->values())});
        }
    }

    ++tally.total;
    tally.orbit_total += orbit_weight;
}

}  // namespace

i64 count_multisets(i64 m) { return binom(2 * m - 1, m); }

std::vector<i64> unrank_multiset(i64 m, i64 rank) {
    // nondecreasing sequences of length m over [0, m); lexicographic order
    std::vector<i64> out(m);
    i64 prev = 0;
    for (i64 i = 0; i < m; ++i) {
        for (i64 v = prev; v < m; ++v) {
            // sequences remaining if position i takes value v: choose m-i-1
            // values from [v, m) with repetition
            i64 left = m - i - 1;
            i64 cnt = binom((m - v) + left - 1, left);
            if (rank < cnt) {
                out[i] = v;
                prev = v;
                break;
            }
            rank -= cnt;
        }
    }
    return out;
}

void enumerate_multisets(i64 m, i64 from, i64 to,
                         const std::function<void(const std::vector<i64>&)>& fn) {
    if (from >= to) return;
    std::vector<i64> cur = unrank_multiset(m, from);
    for (i64 r = from; r < to; ++r) {
        fn(cur);
        // next nondecreasing sequence
        i64 i = m - 1;
        while (i >= 0 && cur[i] == m - 1) --i;
        if (i < 0) break;
        ++cur[i];
        for (i64 j = i + 1; j < m; ++j) cur[j] = cur[i];
    }
}

bool conjecture_predicts_full(const std::vector<i64>& sorted_vals, const Modulus& mod) {
    i64 m = mod.m;
    if (m == 1) return true;
    // pattern {a,...,a,a+b,a-b} for any b != 0
    std::vector<std::pair<i64, i64>> runs;
    for (size_t i = 0; i < sorted_vals.size();) {
        size_t j = i;
        while (j < sorted_vals.size() && sorted_vals[j] == sorted_vals[i]) ++j;
        runs.emplace_back(sorted_vals[i], (i64)(j - i));
        i = j;
    }
    if ((i64)runs.size() <= 3) {
        for (auto& run : runs) {
            if (run.second < m - 2) continue;
            std::vector<i64> left;
            for (auto& other : runs) {
                i64 use = (other.first == run.first) ? other.second - (m - 2) : other.second;
                for (i64 t = 0; t < use; ++t) left.push_back(other.first);
            }
            if (left.size() != 2) continue;
            if (mod_norm(left[0] + left[1], m) == mod_norm(2 * run.first, m) &&
                mod_norm(left[0] - run.first, m) != 0)
                return false;
        }
    }
    // all elements congruent mod some prime divisor
    for (auto& fac : mod.factors) {
        i64 p = fac.first;
        bool same = true;
        for (i64 v : sorted_vals)
            if (mod_norm(v - sorted_vals[0], p) != 0) { same = false; break; }
        if (same) return false;
    }
    return true;
}

CensusReport run_census(i64 m, const CensusOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    Modulus mod = factorize(m);
    i64 total = count_multisets(m);
    int workers = std::max(1, opts.workers);

    std::vector<Tally> tallies(workers);
    auto run_range = [&](int wi, i64 from, i64 to) {
        Tally& tally = tallies[wi];
        enumerate_multisets(m, from, to, [&](const std::vector<i64>& vals) {
            if (opts.reduce_symmetry) {
                auto [canon, orbit] = orbit_canonical(vals, mod);
                if (canon != vals) return;
                examine(vals, m, mod, opts, tally, orbit);
            } else {
                examine(vals, m, mod, opts, tally, 1);
            }
        });
    };

    if (workers == 1) {
        run_range(0, 0, total);
    } else {
        std::vector<std::thread> threads;
        i64 chunk = (total + workers - 1) / workers;
        for (int wi = 0; wi < workers; ++wi) {
            i64 from = std::min<i64>(total, wi * chunk);
            i64 to = std::min<i64>(total, (wi + 1) * chunk);
            threads.emplace_back(run_range, wi, from, to);
        }
        for (auto& th : threads) th.join();
    }

    Tally sum;
    for (auto& t : tallies) sum.merge(std::move(t));
    std::sort(sum.anomalies.begin(), sum.anomalies.end(),
              [](const CensusAnomaly& a, const CensusAnomaly& b) {
                  return std::tie(a.kind, a.multiset) < std::tie(b.kind, b.multiset);
              });

    CensusReport rep;
    rep.m = m;
    rep.total = sum.total;
    rep.orbit_total = sum.orbit_total;
    rep.zero_solved = sum.zero_solved;
    rep.homogeneous = sum.homogeneous;
    rep.inhomogeneous = sum.inhomogeneous;
    rep.mismatches = sum.mismatches;
    rep.fallbacks = sum.fallbacks;
    rep.conjecture_violations = sum.conjecture_violations;
    rep.anomalies = std::move(sum.anomalies);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<std::vector<i64>> conjecture_check(i64 m, const CensusOptions& opts) {
    CensusReport rep = run_census(m, opts);
    std::vector<std::vector<i64>> out;
    for (auto& a : rep.anomalies)
        if (a.kind == "violation") out.push_back(a.multiset);
    return out;
}

CensusReport random_census(i64 m, i64 count, const CensusOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    Modulus mod = factorize(m);
    int workers = std::max(1, opts.workers);
    std::vector<Tally> tallies(workers);

    auto run_part = [&](int wi, i64 n_items) {
        Tally& tally = tallies[wi];
        std::mt19937_64 rng(opts.seed * 0x9e3779b97f4a7c15ull + wi + 1);
        std::vector<i64> vals(m);
        for (i64 it = 0; it < n_items; ++it) {
            for (i64 t = 0; t < m; ++t) vals[t] = (i64)(rng() % (u64)m);
            std::sort(vals.begin(), vals.end());
            examine(vals, m, mod, opts, tally, 1);
        }
    };

    if (workers == 1) {
        run_part(0, count);
    } else {
        std::vector<std::thread> threads;
        i64 chunk = count / workers;
        for (int wi = 0; wi < workers; ++wi) {
            i64 n_items = (wi == workers - 1) ? count - chunk * (workers - 1) : chunk;
            threads.emplace_back(run_part, wi, n_items);
        }
        for (auto& th : threads) th.join();
    }

    Tally sum;
    for (auto& t : tallies) sum.merge(std::move(t));
    CensusReport rep;
    rep.m = m;
    rep.total = sum.total;
    rep.orbit_total = sum.orbit_total;
    rep.zero_solved = sum.zero_solved;
    rep.homogeneous = sum.homogeneous;
    rep.inhomogeneous = sum.inhomogeneous;
    rep.mismatches = sum.mismatches;
    rep.fallbacks = sum.fallbacks;
    rep.conjecture_violations = sum.conjecture_violations;
    rep.anomalies = std::move(sum.anomalies);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void write_report_jsonl(const CensusReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    char name[64];
    std::snprintf(name, sizeof(name), "census-m%02lld.jsonl", (long long)rep.m);
    std::ofstream out(fs::path(dir) / name);
    nlohmann::json summary;
    summary["type"] = "summary";
    summary["m"] = rep.m;
    summary["total"] = rep.total;
    summary["orbit_total"] = rep.orbit_total;
    summary["zero_solved"] = rep.zero_solved;
    summary["homogeneous"] = rep.homogeneous;
    summary["inhomogeneous"] = rep.inhomogeneous;
    summary["mismatches"] = rep.mismatches;
    summary["fallbacks"] = rep.fallbacks;
    summary["conjecture_violations"] = rep.conjecture_violations;
    summary["seconds"] = rep.seconds;
    out << summary.dump() << "\n";
    for (const auto& a : rep.anomalies) {
        nlohmann::json j;
        j["type"] = a.kind;
        j["m"] = rep.m;
        j["multiset"] = a.multiset;
        j["details"] = a.details;
        out << j.dump() << "\n";
    }
}

void append_summary_csv(const CensusReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    fs::path path = fs::path(dir) / "census-summary.csv";
    bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (fresh)
        out << "m,total,zero_solved,homogeneous,inhomogeneous,mismatches,fallbacks,"
               "conjecture_violations,seconds\n";
    out << rep.m << "," << rep.total << "," << rep.zero_solved << "," << rep.homogeneous << ","
        << rep.inhomogeneous << "," << rep.mismatches << "," << rep.fallbacks << ","
        << rep.conjecture_violations << "," << rep.seconds << "\n";
}

}  // namespace permsum
