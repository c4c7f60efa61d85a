#include "permsum/solver.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <random>

// The engine works on one value sequence in place. Every rearrangement is a
// recorded permutation primitive, so a trace replays and each step's sum can
// be re-audited. Recursive sub-problems (blocks) are subranges arranged so
// that their local 1-based permutational sum hits a target modulo a divisor
// of m. States the classification dichotomy excludes raise SolverStall;
// solve() converts a stall into the counted safety-net fallback.

namespace permsum {

namespace {

std::atomic<i64> g_fallbacks{0};

struct SolverStall : std::runtime_error {
    explicit SolverStall(const std::string& what) : std::runtime_error(what) {}
};

// recoverable within one solve: retried with a re-salted separable order
struct RetryStall : SolverStall {
    explicit RetryStall(const std::string& what) : SolverStall(what) {}
};

void require(bool cond, const char* what) {
    if (!cond) throw SolverStall(what);
}

struct Work {
    i64 m = 1;  // modulus used for the recorded running sum
    std::vector<i64> vals;
    std::vector<i64> idx;  // original slot of each element (aux works only)
    Trace* trace = nullptr;
    bool payload = true;
    i64 phi = 0;  // perm sum of the full sequence mod m
    std::mt19937_64 rng{1};
};

// ---- span helpers ---------------------------------------------------------

i64 span_phi_contrib(const Work& w, i64 lo, i64 len) {
    i128 acc = 0;
    for (i64 t = 0; t < len; ++t) {
        acc += (i128)(lo + t + 1) * w.vals[lo + t];
        if ((t & 0xfff) == 0xfff) acc %= w.m;
    }
    return (i64)(acc % w.m);
}

i64 span_sum_mod(const Work& w, i64 lo, i64 len, i64 q) {
    i128 acc = 0;
    for (i64 t = 0; t < len; ++t) acc += mod_norm(w.vals[lo + t], q);
    return (i64)(acc % q);
}

// local permutational sum, 1-based coefficients, mod q
i64 span_psum_mod(const Work& w, i64 lo, i64 len, i64 q) {
    i128 acc = 0;
    for (i64 t = 0; t < len; ++t) {
        acc += (i128)(t + 1) * mod_norm(w.vals[lo + t], q);
        if ((t & 0xfff) == 0xfff) acc %= q;
    }
    return (i64)(acc % q);
}

bool span_constant_mod(const Work& w, i64 lo, i64 len, i64 q) {
    i64 r = mod_norm(w.vals[lo], q);
    for (i64 t = 1; t < len; ++t)
        if (mod_norm(w.vals[lo + t], q) != r) return false;
    return true;
}

ClassifyResult classify_span(const Work& w, i64 lo, i64 q) {
    std::vector<i64> v(w.vals.begin() + lo, w.vals.begin() + lo + q);
    return classify_values_mod(v, q);
}

// ---- recorded primitives --------------------------------------------------

void record(Work& w, TraceStep st) {
    st.phi_after = w.phi;
    w.trace->steps.push_back(std::move(st));
}

void note(Work& w, const char* tag) {
    if (!w.trace) return;
    TraceStep st;
    st.tag = tag;
    record(w, std::move(st));
}

void op_swap(Work& w, i64 i, i64 j, const char* tag) {
    if (i == j) return;
    i64 delta = mul_mod(mod_norm(j - i, w.m), mod_norm(w.vals[i] - w.vals[j], w.m), w.m);
    std::swap(w.vals[i], w.vals[j]);
    if (!w.idx.empty()) std::swap(w.idx[i], w.idx[j]);
    w.phi = mod_norm(w.phi + delta, w.m);
    if (w.trace) {
        TraceStep st;
        st.tag = tag;
        st.op = StepOp::Swap;
        st.i = i;
        st.j = j;
        record(w, std::move(st));
    }
}

// perm[t] = source offset inside [lo, lo+len)
void op_permute(Work& w, i64 lo, const std::vector<i64>& perm, const char* tag) {
    i64 len = (i64)perm.size();
    i64 before = span_phi_contrib(w, lo, len);
    std::vector<i64> nv(len);
    for (i64 t = 0; t < len; ++t) nv[t] = w.vals[lo + perm[t]];
    std::copy(nv.begin(), nv.end(), w.vals.begin() + lo);
    if (!w.idx.empty()) {
        std::vector<i64> ni(len);
        for (i64 t = 0; t < len; ++t) ni[t] = w.idx[lo + perm[t]];
        std::copy(ni.begin(), ni.end(), w.idx.begin() + lo);
    }
    i64 after = span_phi_contrib(w, lo, len);
    w.phi = mod_norm(w.phi + after - before, w.m);
    if (w.trace) {
        TraceStep st;
        st.tag = tag;
        st.op = StepOp::Permute;
        st.lo = lo;
        st.len = len;
        if (w.payload)
            st.perm = perm;
        else
            w.trace->replayable = false;
        record(w, std::move(st));
    }
}

void op_rotate(Work& w, i64 lo, i64 len, i64 r, const char* tag) {
    r = mod_norm(r, len);
    if (r == 0) return;
    i64 before = span_phi_contrib(w, lo, len);
    std::rotate(w.vals.begin() + lo, w.vals.begin() + lo + r, w.vals.begin() + lo + len);
    if (!w.idx.empty())
        std::rotate(w.idx.begin() + lo, w.idx.begin() + lo + r, w.idx.begin() + lo + len);
    i64 after = span_phi_contrib(w, lo, len);
    w.phi = mod_norm(w.phi + after - before, w.m);
    if (w.trace) {
        TraceStep st;
        st.tag = tag;
        st.op = StepOp::Rotate;
        st.lo = lo;
        st.len = len;
        st.i = r;
        record(w, std::move(st));
    }
}

void op_reverse(Work& w, i64 lo, i64 len, const char* tag) {
    i64 before = span_phi_contrib(w, lo, len);
    std::reverse(w.vals.begin() + lo, w.vals.begin() + lo + len);
    if (!w.idx.empty()) std::reverse(w.idx.begin() + lo, w.idx.begin() + lo + len);
    i64 after = span_phi_contrib(w, lo, len);
    w.phi = mod_norm(w.phi + after - before, w.m);
    if (w.trace) {
        TraceStep st;
        st.tag = tag;
        st.op = StepOp::Reverse;
        st.lo = lo;
        st.len = len;
        record(w, std::move(st));
    }
}

// bperm[slot] = source block index; blocks of size bs inside [lo, lo+g*bs)
void op_block_perm(Work& w, i64 lo, i64 bs, const std::vector<i64>& bperm, const char* tag) {
    i64 g = (i64)bperm.size();
    i64 len = g * bs;
    i64 before = span_phi_contrib(w, lo, len);
    std::vector<i64> nv(len);
    for (i64 s = 0; s < g; ++s)
        std::copy(w.vals.begin() + lo + bperm[s] * bs, w.vals.begin() + lo + (bperm[s] + 1) * bs,
                  nv.begin() + s * bs);
    std::copy(nv.begin(), nv.end(), w.vals.begin() + lo);
    if (!w.idx.empty()) {
        std::vector<i64> ni(len);
        for (i64 s = 0; s < g; ++s)
            std::copy(w.idx.begin() + lo + bperm[s] * bs, w.idx.begin() + lo + (bperm[s] + 1) * bs,
                      ni.begin() + s * bs);
        std::copy(ni.begin(), ni.end(), w.idx.begin() + lo);
    }
    i64 after = span_phi_contrib(w, lo, len);
    w.phi = mod_norm(w.phi + after - before, w.m);
    if (w.trace) {
        TraceStep st;
        st.tag = tag;
        st.op = StepOp::BlockPerm;
        st.lo = lo;
        st.len = len;
        st.i = bs;
        st.perm = bperm;
        record(w, std::move(st));
    }
}

template <class Key>
void sort_range_by(Work& w, i64 lo, i64 len, Key key, const char* tag) {
    using K = decltype(key(i64{}));
    std::vector<std::pair<K, i64>> keyed(len);
    for (i64 t = 0; t < len; ++t) keyed[t] = {key(w.vals[lo + t]), t};
    std::sort(keyed.begin(), keyed.end());  // index tiebreak keeps it stable
    std::vector<i64> perm(len);
    for (i64 t = 0; t < len; ++t) perm[t] = keyed[t].second;
    op_permute(w, lo, perm, tag);
}

i64 find_residue(const Work& w, i64 lo, i64 len, i64 r, i64 q) {
    for (i64 t = 0; t < len; ++t)
        if (mod_norm(w.vals[lo + t], q) == r) return t;
    throw SolverStall("expected residue not found in span");
}

// ---- forward declarations of the mutually recursive pieces -----------------

struct SubResult {
    bool solved = false;
    ClassifyResult exc;
};

struct EngineCtx {
    i64 cap = kDefaultOracleCap;  // quarter decisions below this size use the oracle
};

SubResult solve_range(Work& w, EngineCtx& ctx, i64 lo, i64 q);
// post-gate dispatch: the caller already knows the span is non-exceptional
void solve_range_inner(Work& w, EngineCtx& ctx, i64 lo, i64 q);
bool solve_even_range(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf, i64 target);
void solve_odd_range(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf);
void atlast_range(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf);
void one_even_half(Work& w, EngineCtx& ctx, i64 lo, i64 theta);
void one_even_zero(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf);
std::optional<std::pair<i64, ExceptionalStructure>> make_blocks_zero(Work& w, EngineCtx& ctx,
                                                                     i64 lo, i64 g, i64 bq,
                                                                     bool allow_rot, int depth);

// ---- exact micro search -----------------------------------------------------
// Mixed-radix DP with witness for tiny subproblems; coefficient of the t-th
// placed element is t + coeff_base. This is the solver's own base-case
// engine, independent of the spectrum oracle.

std::optional<std::vector<i64>> micro_dp_perm(const std::vector<i64>& raw, i64 q, i64 target,
                                              i64 coeff_base) {
    i64 n = (i64)raw.size();
    if (q > 60 || n > 24) return std::nullopt;
    std::vector<std::pair<i64, i64>> order(n);
    for (i64 t = 0; t < n; ++t) order[t] = {mod_norm(raw[t], q), t};
    std::sort(order.begin(), order.end());

    std::vector<i64> value, count, stride;
    std::vector<std::vector<i64>> sources;
    i64 states = 1;
    for (i64 t = 0; t < n;) {
        i64 u = t;
        std::vector<i64> src;
        while (u < n && order[u].first == order[t].first) src.push_back(order[u++].second);
        value.push_back(order[t].first);
        count.push_back(u - t);
        stride.push_back(states);
        states *= (u - t) + 1;
        sources.push_back(std::move(src));
        t = u;
    }
    u64 full = (q >= 64) ? ~0ull : ((1ull << q) - 1);
    auto rot = [&](u64 x, i64 r) { return r == 0 ? x : (((x << r) | (x >> (q - r))) & full); };

    std::vector<u64> dp(states, 0);
    dp[0] = 1;
    std::vector<i64> digit(value.size(), 0);
    i64 t_at = 0;
    for (i64 s = 0; s < states; ++s) {
        if (dp[s] && t_at < n) {
            for (size_t j = 0; j < value.size(); ++j)
                if (digit[j] < count[j])
                    dp[s + stride[j]] |= rot(dp[s], mod_norm((t_at + coeff_base) * value[j], q));
        }
        for (size_t j = 0; j < value.size() && s + 1 < states; ++j) {
            ++digit[j];
            ++t_at;
            if (digit[j] <= count[j]) break;
            t_at -= digit[j];
            digit[j] = 0;
        }
    }
    target = mod_norm(target, q);
    if (!((dp[states - 1] >> target) & 1)) return std::nullopt;

    std::vector<i64> perm(n);
    std::vector<i64> left = count;
    i64 s = states - 1, tau = target;
    for (i64 t = n - 1; t >= 0; --t) {
        bool step = false;
        for (size_t j = 0; j < value.size(); ++j) {
            if (left[j] == 0) continue;
            i64 prev = s - stride[j];
            i64 tp = mod_norm(tau - (t + coeff_base) * value[j], q);
            if ((dp[prev] >> tp) & 1) {
                --left[j];
                perm[t] = sources[j][left[j]];
                s = prev;
                tau = tp;
                step = true;
                break;
            }
        }
        if (!step) return std::nullopt;
    }
    return perm;
}

void tiny_target(Work& w, i64 lo, i64 q, i64 target, const char* tag) {
    std::vector<i64> v(w.vals.begin() + lo, w.vals.begin() + lo + q);
    auto perm = micro_dp_perm(v, q, target, 1);
    require(perm.has_value(), "tiny case has no arrangement for target");
    op_permute(w, lo, *perm, tag);
}

// ---- prime base case --------------------------------------------------------
// Permutation with sum_{t=0..p-1} t * v_{perm(t)} = target (mod p), p prime.
// Sorted start; one rotation when the element sum is a unit; otherwise a
// single transposition located through run intervals; micro DP below 14;
// seeded reshuffles above.

std::optional<std::vector<i64>> prime_perm_target(const std::vector<i64>& raw, i64 p, i64 target,
                                                  std::mt19937_64& rng) {
    i64 n = p;
    target = mod_norm(target, p);
    std::vector<i64> vals(n);
    for (i64 t = 0; t < n; ++t) vals[t] = mod_norm(raw[t], p);

    std::vector<i64> src(n);
    std::iota(src.begin(), src.end(), 0);
    std::stable_sort(src.begin(), src.end(), [&](i64 a, i64 b) { return vals[a] < vals[b]; });
    std::vector<i64> work(n);
    for (i64 t = 0; t < n; ++t) work[t] = vals[src[t]];

    auto cur_sum = [&]() {
        i128 acc = 0;
        for (i64 t = 0; t < n; ++t) acc += (i128)t * work[t];
        return (i64)(acc % p);
    };
    i64 sigma = 0;
    for (i64 t = 0; t < n; ++t) sigma = (sigma + work[t]) % p;

    for (int attempt = 0; attempt < 8; ++attempt) {
        i64 cur = cur_sum();
        if (cur == target) return src;
        if (sigma != 0) {
            i64 r = mul_mod(mod_norm(cur - target, p), inv_mod(sigma, p), p);
            std::rotate(work.begin(), work.begin() + r, work.end());
            std::rotate(src.begin(), src.begin() + r, src.end());
            if (cur_sum() == target) return src;
            return std::nullopt;
        }
        i64 d = mod_norm(target - cur, p);
        if (attempt == 0) {
            struct Run { i64 val, lo, hi; };
            std::vector<Run> runs;
            for (i64 t = 0; t < n;) {
                i64 u = t;
                while (u < n && work[u] == work[t]) ++u;
                runs.push_back({work[t], t, u - 1});
                t = u;
            }
            for (size_t a = 0; a < runs.size(); ++a) {
                for (size_t b = a + 1; b < runs.size(); ++b) {
                    i64 vd = mod_norm(runs[a].val - runs[b].val, p);
                    i64 D = mul_mod(d, inv_mod(vd, p), p);
                    i64 dlo = runs[b].lo - runs[a].hi, dhi = runs[b].hi - runs[a].lo;
                    if (D < dlo || D > dhi) continue;
                    i64 i = std::max(runs[a].lo, runs[b].lo - D);
                    i64 j = i + D;
                    std::swap(work[i], work[j]);
                    std::swap(src[i], src[j]);
                    return src;
                }
            }
        } else {
            std::map<i64, std::vector<i64>> pos;
            for (i64 t = 0; t < n; ++t) pos[work[t]].push_back(t);
            std::vector<i64> keys;
            for (auto& kv : pos) keys.push_back(kv.first);
            i64 tested = 0, limit = 4 * (i64)keys.size() + 64;
            for (size_t a = 0; a < keys.size() && tested < limit; ++a) {
                for (size_t b = a + 1; b < keys.size() && tested < limit; ++b) {
                    ++tested;
                    i64 vd = mod_norm(keys[a] - keys[b], p);
                    i64 D = mul_mod(d, inv_mod(vd, p), p);
                    for (i64 want : {D, D - p}) {
                        auto &A = pos[keys[a]], &B = pos[keys[b]];
                        size_t ia = 0, ib = 0;
                        while (ia < A.size() && ib < B.size()) {
                            i64 diff = B[ib] - A[ia];
                            if (diff == want) {
                                i64 i = A[ia], j = B[ib];
                                std::swap(work[i], work[j]);
                                std::swap(src[i], src[j]);
                                return src;
                            }
                            if (diff < want) ++ib;
                            else ++ia;
                        }
                    }
                }
            }
        }
        if (p <= 13) return micro_dp_perm(raw, p, target, 0);
        for (int tries = 0; tries < 32; ++tries) {
            i64 i = (i64)(rng() % n), j = (i64)(rng() % n);
            if (work[i] != work[j]) {
                std::swap(work[i], work[j]);
                std::swap(src[i], src[j]);
                break;
            }
        }
    }
    return std::nullopt;
}

void solve_prime_range(Work& w, i64 lo, i64 p) {
    std::vector<i64> span(w.vals.begin() + lo, w.vals.begin() + lo + p);
    i64 sigma = 0;
    for (i64 v : span) sigma = (sigma + mod_norm(v, p)) % p;
    auto perm = prime_perm_target(span, p, mod_norm(-sigma, p), w.rng);
    require(perm.has_value(), "prime base case found no zero arrangement");
    op_permute(w, lo, *perm, "prime-arrangement");
    require(span_psum_mod(w, lo, p, p) == 0, "prime arrangement does not check out");
}

// ---- exceptional block placements ------------------------------------------

// {a x (q-2), a+b, a-b}: local sum = target (nonzero). Odd q, or even q with a even.
void place_inhom_target(Work& w, i64 lo, i64 q, i64 a, i64 b, i64 target) {
    target = mod_norm(target, q);
    require(target != 0, "exceptional block cannot reach zero");
    i64 delta = mul_mod(target, inv_mod(b, q), q);
    i64 sp = find_residue(w, lo, q, mod_norm(a + b, q), q);
    i64 sm = find_residue(w, lo, q, mod_norm(a - b, q), q);
    std::vector<i64> rest;
    for (i64 t = 0; t < q; ++t)
        if (t != sp && t != sm) rest.push_back(t);
    std::sort(rest.begin(), rest.end(),
              [&](i64 x, i64 y) { return w.vals[lo + x] < w.vals[lo + y]; });
    std::vector<i64> perm(q);
    perm[0] = sm;
    perm[delta] = sp;
    size_t r = 0;
    for (i64 t = 0; t < q; ++t)
        if (t != 0 && t != delta) perm[t] = rest[r++];
    op_permute(w, lo, perm, "exceptional-value-placement");
    require(span_psum_mod(w, lo, q, q) == target, "exceptional placement missed its target");
}

// Exceptional block over even modulus bq arranged to bq/2.
void remark_half_target(Work& w, EngineCtx& ctx, i64 lo, i64 bq, const ExceptionalStructure& e) {
    if (e.kind == ExceptionalStructure::Kind::Inhomogeneous) {
        place_inhom_target(w, lo, bq, e.a, e.b, bq / 2);
        return;
    }
    const Modulus& f = factorize_cached(bq);
    i64 twok = i64(1) << f.k;
    if (f.n > 1) {
        std::vector<i64> tv(bq);
        for (i64 t = 0; t < bq; ++t) tv[t] = mod_norm(w.vals[lo + t] - e.c, bq) / twok;
        Work aux;
        aux.m = f.n;
        aux.vals = std::move(tv);
        aux.idx.resize(bq);
        std::iota(aux.idx.begin(), aux.idx.end(), 0);
        aux.rng.seed(w.rng());
        aux.phi = span_phi_contrib(aux, 0, bq);
        make_blocks_zero(aux, ctx, 0, twok, f.n, true, 0);
        op_permute(w, lo, aux.idx, "homogeneous-half-target");
    }
    require(span_psum_mod(w, lo, bq, bq) == bq / 2, "homogeneous block missed bq/2");
}

// ---- second step -------------------------------------------------------------
// g consecutive blocks of size bq (odd): cancel the sum of their local
// permutational sums mod bq. Returns the obstruction (one exceptional block,
// all the others constant) only when rotation is forbidden.

std::optional<std::pair<i64, ExceptionalStructure>> make_blocks_zero(Work& w, EngineCtx& ctx,
                                                                     i64 lo, i64 g, i64 bq,
                                                                     bool allow_rot, int depth) {
    if (bq == 1) return std::nullopt;
    std::vector<ClassifyResult> cls(g);
    std::vector<char> constant(g);
    std::vector<i64> exc;
    for (i64 b = 0; b < g; ++b) {
        cls[b] = classify_span(w, lo + b * bq, bq);
        constant[b] = span_constant_mod(w, lo + b * bq, bq, bq);
        if (cls[b]) exc.push_back(b);
    }
    if (exc.empty()) {
        for (i64 b = 0; b < g; ++b)
            if (!constant[b]) solve_range_inner(w, ctx, lo + b * bq, bq);
    } else if ((i64)exc.size() >= 2) {
        for (i64 b = 0; b < g; ++b)
            if (!cls[b] && !constant[b]) solve_range_inner(w, ctx, lo + b * bq, bq);
        i64 e = (i64)exc.size();
        i64 x = 1, y = mod_norm(-(e - 2) - 1, bq);
        if (y == 0) { x = 2; y = mod_norm(-(e - 2) - 2, bq); }
        for (i64 t = 0; t < e; ++t) {
            i64 target = (t < e - 2) ? 1 : (t == e - 2 ? x : y);
            auto& s = *cls[exc[t]];
            place_inhom_target(w, lo + exc[t] * bq, bq, s.a, s.b, target);
        }
    } else {
        i64 E = exc[0];
        i64 other = -1;
        for (i64 b = 0; b < g; ++b)
            if (b != E && !constant[b]) other = b;
        if (other >= 0) {
            for (i64 b = 0; b < g; ++b)
                if (b != E && !constant[b]) solve_range_inner(w, ctx, lo + b * bq, bq);
            i64 obase = lo + other * bq;
            i64 at = -1;
            for (i64 t = 0; t + 1 < bq; ++t)
                if (mod_norm(w.vals[obase + t] - w.vals[obase + t + 1], bq) != 0) { at = t; break; }
            require(at >= 0, "non-constant block with no adjacent difference");
            i64 delta = mod_norm(w.vals[obase + at] - w.vals[obase + at + 1], bq);
            op_swap(w, obase + at, obase + at + 1, "nonzero-nudge");
            auto& s = *cls[E];
            place_inhom_target(w, lo + E * bq, bq, s.a, s.b, mod_norm(-delta, bq));
        } else {
            if (!allow_rot) return std::make_pair(E, *cls[E]);
            require(depth == 0, "rotation fix did not break the block structure");
            auto& s = *cls[E];
            i64 vnext = mod_norm(w.vals[lo + ((E + 1) % g) * bq], bq);
            i64 X = mod_norm(s.a + s.b, bq) != vnext ? mod_norm(s.a + s.b, bq)
                                                     : mod_norm(s.a - s.b, bq);
            i64 ebase = lo + E * bq;
            i64 xs = find_residue(w, ebase, bq, X, bq);
            std::vector<i64> perm(bq);
            perm[0] = xs;
            std::vector<i64> rest;
            for (i64 t = 0; t < bq; ++t)
                if (t != xs) rest.push_back(t);
            std::sort(rest.begin(), rest.end(),
                      [&](i64 a2, i64 b2) { return w.vals[ebase + a2] < w.vals[ebase + b2]; });
            for (i64 t = 1; t < bq; ++t) perm[t] = rest[t - 1];
            op_permute(w, ebase, perm, "exceptional-block-align");
            op_rotate(w, lo, g * bq, E * bq + 1, "rotation-fix");
            return make_blocks_zero(w, ctx, lo, g, bq, allow_rot, depth + 1);
        }
    }
    i64 total = 0;
    for (i64 b = 0; b < g; ++b) total = (total + span_psum_mod(w, lo + b * bq, bq, bq)) % bq;
    require(total == 0, "block sums do not cancel");
    return std::nullopt;
}

// ---- third step helpers -------------------------------------------------------

std::vector<i64> block_sums(const Work& w, i64 lo, i64 g, i64 bq, i64 q) {
    std::vector<i64> s(g);
    for (i64 b = 0; b < g; ++b) s[b] = span_sum_mod(w, lo + b * bq, bq, q);
    return s;
}

i64 inner_sum_total(const Work& w, i64 lo, i64 g, i64 bq, i64 q) {
    i64 r = 0;
    for (i64 b = 0; b < g; ++b) r = (r + span_psum_mod(w, lo + b * bq, bq, q)) % q;
    return r;
}

// all elements congruent to t mod p: divide through and arrange the quotient
void quotient_reduce(Work& w, EngineCtx& ctx, i64 lo, i64 q, i64 p, i64 t) {
    i64 mstar = q / p;
    std::vector<i64> bvals(q);
    for (i64 j = 0; j < q; ++j) bvals[j] = mod_norm(w.vals[lo + j] - t, q) / p;
    Work aux;
    aux.m = mstar;
    aux.vals = std::move(bvals);
    aux.idx.resize(q);
    std::iota(aux.idx.begin(), aux.idx.end(), 0);
    aux.rng.seed(w.rng());
    aux.phi = span_phi_contrib(aux, 0, q);
    make_blocks_zero(aux, ctx, 0, p, mstar, true, 0);
    op_permute(w, lo, aux.idx, "quotient-arrangement");
    require(span_psum_mod(w, lo, q, q) == 0, "quotient arrangement missed zero");
}

// R' != 0 (mod p): realize block-order sum -R'. Returns the shared residue
// when every element is congruent mod p.
std::optional<i64> fix_R_nonzero_range(Work& w, i64 lo, i64 q, i64 p, i64 mstar) {
    for (int round = 0; round < 3; ++round) {
        i64 R = inner_sum_total(w, lo, p, mstar, q);
        require(R % mstar == 0, "inner sums lost divisibility");
        i64 Rp = (R / mstar) % p;
        require(Rp != 0, "fix_R_nonzero called with R' = 0");
        i64 target = mod_norm(-Rp, p);
        auto S = block_sums(w, lo, p, mstar, q);
        std::vector<i64> sb(p);
        for (i64 b = 0; b < p; ++b) sb[b] = mod_norm(S[b], p);
        i64 W = 0;
        for (i64 b = 0; b < p; ++b) W = (W + mul_mod(b, sb[b], p)) % p;
        if (W == target) {
            require(span_psum_mod(w, lo, q, q) == 0, "phi not zero after block order");
            return std::nullopt;
        }
        i64 b1 = -1, b2 = -1;
        for (i64 a = 0; a < p && b1 < 0; ++a)
            for (i64 b = a + 1; b < p; ++b)
                if (sb[a] != sb[b]) { b1 = a; b2 = b; break; }
        if (b1 >= 0) {
            if (W == 0) {
                std::vector<i64> perm(p);
                std::iota(perm.begin(), perm.end(), 0);
                std::swap(perm[b1], perm[b2]);
                op_block_perm(w, lo, mstar, perm, "block-swap");
                S = block_sums(w, lo, p, mstar, q);
                W = 0;
                for (i64 b = 0; b < p; ++b) W = (W + mul_mod(b, mod_norm(S[b], p), p)) % p;
                require(W != 0, "block swap failed to move the order sum");
            }
            i64 u = mul_mod(target, inv_mod(W, p), p);
            if (u != 1) {
                std::vector<i64> perm(p);
                for (i64 b = 0; b < p; ++b) perm[mul_mod(u, b, p)] = b;
                op_block_perm(w, lo, mstar, perm, "block-dilation");
            }
            require(span_psum_mod(w, lo, q, q) == 0, "dilated block order missed zero");
            return std::nullopt;
        }
        bool swapped = false;
        for (i64 s = 0; s < mstar && !swapped; ++s) {
            i64 r0 = mod_norm(w.vals[lo + s], p);
            for (i64 b = 1; b < p; ++b) {
                if (mod_norm(w.vals[lo + b * mstar + s], p) != r0) {
                    op_swap(w, lo + s, lo + b * mstar + s, "braid-column-swap");
                    swapped = true;
                    break;
                }
            }
        }
        if (!swapped) {
            i64 t = mod_norm(w.vals[lo], p);
            for (i64 j = 0; j < q; ++j)
                require(mod_norm(w.vals[lo + j], p) == t, "uniform columns but mixed residues");
            return t;
        }
    }
    throw SolverStall("fix_R_nonzero did not converge");
}

struct ZeroFixResult {
    bool solved = false;
    RigidWitness witness;
};

// R' == 0 (mod p): zero the block order sum, or return the rigid witness
// (only for moduli with further prime factors). When the block sums make an
// exceptional multiset, every consistent (baseline, offset) labeling of the
// witness pair is tried: over Z_3 the pattern has three readings.
ZeroFixResult fix_R_zero_range(Work& w, i64 lo, i64 q, i64 p, int e, i64 mstar) {
    i64 nprime = q;
    for (int t = 0; t < e; ++t) nprime /= p;
    const bool prime_power = (nprime == 1);

    auto reorder_blocks_zero = [&]() {
        auto S2 = block_sums(w, lo, p, mstar, q);
        auto perm = prime_perm_target(S2, p, 0, w.rng);
        require(perm.has_value(), "block order multiset defied the prime base case");
        op_block_perm(w, lo, mstar, *perm, "block-reorder");
        require(span_psum_mod(w, lo, q, q) == 0, "block reorder missed zero");
    };

    auto S = block_sums(w, lo, p, mstar, q);
    auto clsS = classify_values_mod(S, p);
    if (!clsS) {
        reorder_blocks_zero();
        return {true, {}};
    }

    std::vector<i64> sb(p);
    for (i64 b = 0; b < p; ++b) sb[b] = mod_norm(S[b], p);

    // place blocks so the order sum hits -R' (the sums attain every nonzero value)
    auto reorder_to = [&](i64 Rp) {
        auto S2 = block_sums(w, lo, p, mstar, q);
        auto cls2 = classify_values_mod(S2, p);
        require(cls2.has_value(), "block sums lost the exceptional shape");
        i64 tp = -1, tm = -1;
        for (i64 b = 0; b < p; ++b) {
            i64 r = mod_norm(S2[b], p);
            if (r == mod_norm(cls2->a + cls2->b, p) && tp < 0) tp = b;
            else if (r == mod_norm(cls2->a - cls2->b, p) && tm < 0) tm = b;
        }
        require(tp >= 0 && tm >= 0, "reorder: special blocks missing");
        i64 delta = mul_mod(mod_norm(-Rp, p), inv_mod(cls2->b, p), p);
        std::vector<i64> perm(p, -1);
        perm[0] = tm;
        perm[delta] = tp;
        i64 fill = 0;
        for (i64 slot = 0; slot < p; ++slot) {
            if (perm[slot] >= 0) continue;
            while (fill == tp || fill == tm) ++fill;
            perm[slot] = fill++;
        }
        op_block_perm(w, lo, mstar, perm, "exceptional-block-placement");
        require(span_psum_mod(w, lo, q, q) == 0, "exceptional block placement missed zero");
    };

    // candidate labelings (baseline A, offset B, T+, T-) consistent with sb
    struct Labeling { i64 B, bplus, bminus; };
    std::vector<Labeling> labelings;
    {
        std::map<i64, i64> mult;
        for (i64 b = 0; b < p; ++b) ++mult[sb[b]];
        for (auto& kv : mult) {
            if (kv.second < p - 2) continue;
            i64 A = kv.first;
            std::vector<i64> others;
            for (i64 b = 0; b < p; ++b)
                if (mult[sb[b]] == kv.second && sb[b] == A) continue;
            for (i64 b = 0; b < p; ++b)
                if (sb[b] != A) others.push_back(b);
            if (others.size() == 2) {
                i64 x = others[0], y = others[1];
                if (mod_norm(sb[x] + sb[y] - 2 * A, p) != 0) continue;
                i64 B = mod_norm(sb[x] - A, p);
                if (B == 0 || gcd(B, p) != 1) continue;
                labelings.push_back({B, x, y});
                labelings.push_back({mod_norm(-B, p), y, x});
            }
        }
        require(!labelings.empty(), "exceptional block sums without a witness labeling");
    }

    for (auto& lab : labelings) {
        i64 B = lab.B, bplus = lab.bplus, bminus = lab.bminus;

        // column survey under this labeling: uniform / special / irregular
        std::vector<i64> special_cols, irregular_cols;
        for (i64 s = 0; s < mstar; ++s) {
            i64 tcol = -1;
            for (i64 b = 0; b < p; ++b)
                if (b != bplus && b != bminus) {
                    tcol = mod_norm(w.vals[lo + b * mstar + s], p);
                    break;
                }
            bool uniform = true, special = true;
            i64 first = mod_norm(w.vals[lo + s], p);
            for (i64 b = 0; b < p; ++b) {
                i64 r = mod_norm(w.vals[lo + b * mstar + s], p);
                if (r != first) uniform = false;
                i64 want = tcol;
                if (b == bplus) want = mod_norm(tcol + B, p);
                if (b == bminus) want = mod_norm(tcol - B, p);
                if (r != want) special = false;
            }
            if (uniform) continue;
            if (special) special_cols.push_back(s);
            else irregular_cols.push_back(s);
        }

        if (!irregular_cols.empty()) {
            i64 tested = 0;
            for (i64 s : irregular_cols) {
                for (i64 b1 = 0; b1 < p; ++b1) {
                    for (i64 b2 = b1 + 1; b2 < p; ++b2) {
                        if (++tested > 200000)
                            throw SolverStall("structure break search exhausted");
                        i64 v1 = mod_norm(w.vals[lo + b1 * mstar + s], p);
                        i64 v2 = mod_norm(w.vals[lo + b2 * mstar + s], p);
                        if (v1 == v2) continue;
                        auto tmp = sb;
                        tmp[b1] = mod_norm(tmp[b1] + v2 - v1, p);
                        tmp[b2] = mod_norm(tmp[b2] + v1 - v2, p);
                        if (classify_values_mod(tmp, p)) continue;
                        op_swap(w, lo + b1 * mstar + s, lo + b2 * mstar + s,
                                "braid-structure-break");
                        reorder_blocks_zero();
                        return {true, {}};
                    }
                }
            }
            continue;  // no destroying swap under this labeling; try the next
        }

        // two swaps against a common helper block cancel the +-B offsets
        // whenever a +B column and a -B column exist at distinct positions
        bool paired = false;
        for (i64 helper = 0; helper < p && !paired; ++helper) {
            if (helper == bplus || helper == bminus) continue;
            i64 s_plus = -1, s_minus = -1;
            for (i64 s = 0; s < mstar; ++s) {
                i64 hv = mod_norm(w.vals[lo + helper * mstar + s], p);
                if (s_plus < 0 &&
                    mod_norm(w.vals[lo + bplus * mstar + s] - hv, p) == mod_norm(B, p))
                    s_plus = s;
                if (mod_norm(w.vals[lo + bminus * mstar + s] - hv, p) == mod_norm(-B, p) &&
                    s != s_plus)
                    s_minus = s;
            }
            if (s_plus >= 0 && s_minus >= 0) {
                op_swap(w, lo + bplus * mstar + s_plus, lo + helper * mstar + s_plus,
                        "structure-break-pair");
                op_swap(w, lo + bminus * mstar + s_minus, lo + helper * mstar + s_minus,
                        "structure-break-pair");
                require(span_psum_mod(w, lo, q, q) == 0, "balanced block sums but phi nonzero");
                paired = true;
            }
        }
        if (paired) return {true, {}};
        if (special_cols.size() != 1) continue;

        i64 scol = special_cols[0];
        i64 posP = lo + bplus * mstar + scol;
        i64 posM = lo + bminus * mstar + scol;
        i64 tbase = -1;
        for (i64 b = 0; b < p; ++b)
            if (b != bplus && b != bminus) {
                tbase = mod_norm(w.vals[lo + b * mstar + scol], p);
                break;
            }
        bool consistent = true;
        for (i64 j = 0; j < q && consistent; ++j) {
            if (lo + j == posP || lo + j == posM) continue;
            consistent = mod_norm(w.vals[lo + j], p) == tbase;
        }
        if (!consistent) continue;

        // mod-p^l ladder
        i64 pl = p;
        bool diverged = false;
        for (int l = 2; l <= e && !diverged; ++l) {
            pl *= p;
            i64 xoff = nprime;
            for (int t = 0; t < e - l; ++t) xoff *= p;
            i64 rows = q / xoff;
            bool hit = false;
            for (i64 cidx = 0; cidx < xoff && !hit; ++cidx) {
                std::vector<std::pair<i64, i64>> entries;
                entries.reserve(rows);
                for (i64 r = 0; r < rows; ++r) {
                    i64 posa = lo + cidx + r * xoff;
                    if (posa == posP || posa == posM) continue;
                    entries.push_back({r, mod_norm(w.vals[posa], pl)});
                }
                if (entries.size() < 2) continue;
                i64 r0 = entries[0].first, v0 = entries[0].second;
                i64 a_r = -1, b_r = -1;
                for (auto& en : entries)
                    if (en.second != v0 && mod_norm(en.first - r0, p) != 0) {
                        a_r = en.first;
                        b_r = r0;
                        break;
                    }
                if (a_r < 0) {
                    i64 diff_r = -1;
                    for (auto& en : entries)
                        if (en.second != v0) { diff_r = en.first; break; }
                    if (diff_r >= 0) {
                        for (auto& en : entries)
                            if (en.second == v0 && mod_norm(en.first - diff_r, p) != 0) {
                                a_r = diff_r;
                                b_r = en.first;
                                break;
                            }
                    }
                }
                if (a_r >= 0) {
                    op_swap(w, lo + cidx + b_r * xoff, lo + cidx + a_r * xoff, "ladder-swap");
                    hit = true;
                }
            }
            if (hit) {
                i64 R = inner_sum_total(w, lo, p, mstar, q);
                require(R % mstar == 0, "ladder swap broke block divisibility");
                i64 Rp = (R / mstar) % p;
                require(Rp != 0, "ladder swap left R' at zero");
                reorder_to(Rp);
                return {true, {}};
            }
            i64 tl = -1;
            for (i64 j = 0; j < q && !diverged; ++j) {
                if (lo + j == posP || lo + j == posM) continue;
                i64 v = mod_norm(w.vals[lo + j], pl);
                if (tl < 0) tl = v;
                diverged = (v != tl);
            }
            tbase = tl;
        }
        if (diverged) continue;

        if (prime_power) {
            // broken-rigid endpoint: place the two singletons directly
            i64 u = mod_norm(w.vals[posP] - tbase, q);
            i64 v = mod_norm(w.vals[posM] - tbase, q);
            i64 wsum = mod_norm(u + v, q);
            require(wsum != 0, "exceptional multiset slipped through the gate");
            int j0 = 0;
            i64 ww = wsum;
            while (ww % p == 0) { ww /= p; ++j0; }
            i64 pj0 = 1;
            for (int t = 0; t < j0; ++t) pj0 *= p;
            i64 step = q / pj0;
            i64 i1 = mod_norm(mul_mod(mod_norm(v, step), inv_mod(mod_norm(ww, step), step), step),
                              step);
            if (i1 == 0) i1 = step;
            while (i1 <= pj0) i1 += step;
            i64 j1 = i1 - pj0;
            require(i1 <= q && j1 >= 1 && i1 != j1, "direct placement positions out of range");
            i64 srcP = posP - lo, srcM = posM - lo;
            std::vector<i64> rest;
            for (i64 t = 0; t < q; ++t)
                if (t != srcP && t != srcM) rest.push_back(t);
            std::sort(rest.begin(), rest.end(),
                      [&](i64 x, i64 y) { return w.vals[lo + x] < w.vals[lo + y]; });
            std::vector<i64> perm(q, -1);
            perm[i1 - 1] = srcP;
            perm[j1 - 1] = srcM;
            size_t rr = 0;
            for (i64 t = 0; t < q; ++t)
                if (perm[t] < 0) perm[t] = rest[rr++];
            op_permute(w, lo, perm, "direct-pair-placement");
            require(span_psum_mod(w, lo, q, q) == 0, "direct pair placement missed zero");
            return {true, {}};
        }
        return {false, RigidWitness{p, e, mod_norm(tbase, pl)}};
    }
    throw RetryStall("no labeling of the block sums led anywhere");
}

// coefficient assignment after the common translate
void multiprime_finish_range(Work& w, i64 lo, i64 q, const Modulus& qf,
                             const std::vector<MultiprimeWitness>& wits) {
    i64 c = 0, mod_acc = 1;
    for (auto& wit : wits) {
        i64 pe = 1;
        for (int t = 0; t < wit.exponent; ++t) pe *= wit.prime;
        i64 want = mod_norm(-wit.t, pe);
        i64 diff = mod_norm(want - c, pe);
        i64 adjust = mul_mod(diff, inv_mod(mod_acc % pe, pe), pe);
        c += mod_acc * adjust;
        mod_acc *= pe;
    }
    require(mod_acc == q, "multiprime witnesses do not cover q");
    c = mod_norm(c, q);

    struct Entry { i64 slot, xv, g; };
    std::vector<Entry> nonzero;
    for (i64 t = 0; t < q; ++t) {
        i64 xv = mod_norm(w.vals[lo + t] + c, q);
        if (xv != 0) nonzero.push_back({t, xv, gcd(xv, q)});
    }
    require((i64)nonzero.size() <= 2 * (i64)qf.factors.size(),
            "too many residues escaped the witnesses");

    std::map<i64, std::vector<Entry>> groups;
    for (auto& en : nonzero) groups[en.g].push_back(en);
    std::vector<char> used(q + 1, 0);
    std::vector<i64> perm(q, -1);  // slot (coeff-1) <- source offset
    auto assign = [&](i64 coeff, i64 src) {
        require(coeff >= 1 && coeff <= q && !used[coeff], "coefficient collision");
        used[coeff] = 1;
        perm[coeff - 1] = src;
    };

    std::vector<Entry> units;
    for (auto& kv : groups) {
        auto& list = kv.second;
        require((i64)list.size() <= 2, "three elements share a gcd class");
        if (kv.first == 1) {
            units = list;
            continue;
        }
        i64 base = q / kv.first;
        assign(base, list[0].slot);
        if (list.size() == 2) assign(q - base, list[1].slot);
    }
    if (units.size() == 1) {
        assign(q, units[0].slot);
    } else if (units.size() == 2) {
        i64 u1 = units[0].xv, u2 = units[1].xv;
        require(mod_norm(u1 + u2, q) != 0, "unit pair forms the exceptional multiset");
        bool done = false;
        for (i64 c2 = 1; c2 <= q && !done; ++c2) {
            if (used[c2]) continue;
            i64 c1 = mul_mod(mod_norm(-c2, q), mul_mod(u2, inv_mod(u1, q), q), q);
            i64 c1res = (c1 == 0) ? q : c1;
            if (c1res == c2 || used[c1res]) continue;
            assign(c2, units[1].slot);
            assign(c1res, units[0].slot);
            done = true;
        }
        require(done, "no coefficient pair for the two units");
    }
    std::vector<char> taken(q, 0);
    for (i64 t = 0; t < q; ++t)
        if (perm[t] >= 0) taken[perm[t]] = 1;
    std::vector<i64> rest;
    for (i64 t = 0; t < q; ++t)
        if (!taken[t]) rest.push_back(t);
    size_t rr = 0;
    for (i64 t = 0; t < q; ++t)
        if (perm[t] < 0) perm[t] = rest[rr++];
    op_permute(w, lo, perm, "coefficient-assignment");
    require(span_psum_mod(w, lo, q, q) == 0, "coefficient assignment missed zero");
}

// lexicographic by (v mod p, v mod p^2, ..., v mod p^e, v) = digit-reversed low
// part, then the value. A nonzero salt reorders distinct values inside each
// residue class; separability is untouched and retries see fresh columns.
void separable_sort_range(Work& w, i64 lo, i64 q, i64 p, int e, const char* tag, u64 salt = 0) {
    i64 pk = 1;
    for (int l = 0; l < e; ++l) pk *= p;
    auto mix = [&](i64 v) {
        if (!salt) return v;
        u64 x = (u64)v + salt + 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return (i64)(x ^ (x >> 31)) & 0x7fffffffffffffff;
    };
    sort_range_by(w, lo, q,
                  [&](i64 v) {
                      i64 r = mod_norm(v, q) % pk;
                      i64 rev = 0;
                      for (int l = 0; l < e; ++l) {
                          rev = rev * p + r % p;
                          r /= p;
                      }
                      return std::make_pair(rev, mix(v));
                  },
                  tag);
}

void solve_odd_pass(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf, u64 salt) {
    std::vector<MultiprimeWitness> wits;
    for (auto& fac : qf.factors) {
        i64 p = fac.first;
        int e = fac.second;
        separable_sort_range(w, lo, q, p, e, "separable-sort", salt);
        i64 mstar = q / p;
        make_blocks_zero(w, ctx, lo, p, mstar, true, 0);
        i64 R = inner_sum_total(w, lo, p, mstar, q);
        require(R % mstar == 0, "second step failed to divide R");
        i64 Rp = (R / mstar) % p;
        if (Rp != 0) {
            auto uniform = fix_R_nonzero_range(w, lo, q, p, mstar);
            if (uniform) quotient_reduce(w, ctx, lo, q, p, *uniform);
            return;
        }
        auto res = fix_R_zero_range(w, lo, q, p, e, mstar);
        if (res.solved) return;
        wits.push_back({res.witness.prime, res.witness.exponent, res.witness.t});
    }
    require(qf.factors.size() >= 2, "prime power escaped the ladder");
    multiprime_finish_range(w, lo, q, qf, wits);
}

void solve_odd_range(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf) {
    for (int attempt = 0;; ++attempt) {
        try {
            solve_odd_pass(w, ctx, lo, q, qf, attempt == 0 ? 0 : w.rng() | 1);
            return;
        } catch (const RetryStall&) {
            if (attempt >= 3) throw;
        }
    }
}

// ---- even order ----------------------------------------------------------------

std::optional<i64> scan_parity_pair(const Work& w, i64 lo, i64 half) {
    for (i64 t = 0; t < half; ++t)
        if (((w.vals[lo + t] ^ w.vals[lo + half + t]) & 1) != 0) return t;
    return std::nullopt;
}

// generic greedy slot filler: perm[slot] = source offset of a chosen value
struct SlotFiller {
    const Work& w;
    i64 lo, len;
    std::vector<i64> perm;
    std::vector<char> used;
    SlotFiller(const Work& w_, i64 lo_, i64 len_)
        : w(w_), lo(lo_), len(len_), perm(len_, -1), used(len_, 0) {}
    void place_value(i64 slot, i64 value) {
        for (i64 t = 0; t < len; ++t)
            if (!used[t] && w.vals[lo + t] == value) {
                used[t] = 1;
                perm[slot] = t;
                return;
            }
        throw SolverStall("slot filler: value vanished");
    }
    void place_offset(i64 slot, i64 off) {
        require(!used[off], "slot filler: offset reused");
        used[off] = 1;
        perm[slot] = off;
    }
    // fill remaining slots with the remaining offsets sorted by value
    void finish_sorted() {
        std::vector<i64> rest;
        for (i64 t = 0; t < len; ++t)
            if (!used[t]) rest.push_back(t);
        std::sort(rest.begin(), rest.end(),
                  [&](i64 x, i64 y) { return w.vals[lo + x] < w.vals[lo + y]; });
        size_t r = 0;
        for (i64 t = 0; t < len; ++t)
            if (perm[t] < 0) perm[t] = rest[r++];
    }
};

// Flip the running sum by q/2 while keeping divisibility by n: a pair at
// distance 1 or d*n whose swap delta is exactly q/2. Constant-mod-n blocks
// holding both 2^k-types are realigned first so such a pair goes adjacent.
bool flip_by_half(Work& w, i64 lo, i64 q, const Modulus& qf) {
    i64 n = qf.n;
    i64 half = q / 2;
    auto try_dist = [&](i64 dist) {
        for (i64 t = 0; t + dist < q; ++t) {
            i64 delta = mul_mod(dist, mod_norm(w.vals[lo + t] - w.vals[lo + t + dist], q), q);
            if (delta == half) {
                op_swap(w, lo + t, lo + t + dist, "half-flip-swap");
                return true;
            }
        }
        return false;
    };
    if (try_dist(1)) return true;
    for (i64 d = 1; d * n < q; ++d)
        if (try_dist(d * n)) return true;
    // realign a mixed constant block so two different 2^k-types go adjacent
    i64 twok = i64(1) << qf.k;
    i64 g = q / n;
    for (i64 b = 0; b < g; ++b) {
        i64 base = lo + b * n;
        if (!span_constant_mod(w, base, n, n)) continue;
        i64 tA = -1, tB = -1;
        for (i64 t = 0; t < n; ++t) {
            i64 v = w.vals[base + t];
            if (v % 2 == 0) continue;
            if (tA < 0) { tA = t; continue; }
            if (mod_norm(v - w.vals[base + tA], twok) != 0) { tB = t; break; }
        }
        if (tB < 0) continue;
        if (tB - tA != 1) {
            std::vector<i64> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::swap(perm[tA + 1], perm[tB]);
            op_permute(w, base, perm, "mixed-block-align");
            tB = tA + 1;
        }
        i64 delta = mul_mod(1, mod_norm(w.vals[base + tA] - w.vals[base + tB], q), q);
        if (delta != half) continue;
        op_swap(w, base + tA, base + tB, "half-flip-swap");
        return true;
    }
    return false;
}

// Two even elements, the rest odd and congruent mod 2^(k-1): always zero.
void atlast_range(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf) {
    int k = qf.k;
    i64 n = qf.n;
    i64 twok = i64(1) << k;
    i64 halfmod = twok / 2;
    require(k >= 2 && q > 4, "two-even endgame needs k > 1 and m > 4");

    std::vector<i64> evens, odds;
    for (i64 t = 0; t < q; ++t)
        (w.vals[lo + t] % 2 == 0 ? evens : odds).push_back(w.vals[lo + t]);
    require(evens.size() == 2, "two-even endgame needs exactly two even elements");
    i64 codd = mod_norm(odds[0], halfmod);
    for (i64 v : odds) require(mod_norm(v, halfmod) == codd, "odd residues not aligned");

    i64 cA = mod_norm(odds[0], twok);
    i64 countA = 0, countB = 0;
    for (i64 v : odds) (mod_norm(v, twok) == cA ? countA : countB)++;
    if (countB > countA) {
        cA = mod_norm(cA + halfmod, twok);
        std::swap(countA, countB);
    }

    if (n == 1) {
        SlotFiller f(w, lo, q);
        f.place_value(q / 2 - 1, evens[0]);
        f.place_value(q - 1, evens[1]);
        if (countB > 0) {
            i64 va = -1, vb = -1;
            for (i64 v : odds)
                if (mod_norm(v, twok) == cA) { va = v; break; }
            for (i64 v : odds)
                if (mod_norm(v, twok) != cA) { vb = v; break; }
            f.place_value(0, va);
            f.place_value(1, vb);
        }
        f.finish_sorted();
        op_permute(w, lo, f.perm, "two-even-placement");
        i64 phi = span_psum_mod(w, lo, q, q);
        if (phi == 0) return;
        require(phi == q / 2 && countB > 0, "two-even placement: unexpected phi");
        op_swap(w, lo, lo + 1, "type-swap");
        require(span_psum_mod(w, lo, q, q) == 0, "type swap missed zero");
        return;
    }

    // evens first, then the majority type, then the minority; equal values adjacent
    sort_range_by(w, lo, q,
                  [&](i64 v) {
                      int group = (v % 2 == 0) ? 0 : (mod_norm(v, twok) == cA ? 1 : 2);
                      return std::make_pair(group, v);
                  },
                  "two-even-initial");

    // shared even-placement congruence finisher, used whenever the blocks
    // carry zero inner sums mod n with the evens still in block 0
    auto even_shift_finish = [&]() {
        i64 f = -1, g2 = -1;
        for (i64 t = 0; t < n; ++t)
            if (w.vals[lo + t] % 2 == 0) (f < 0 ? f : g2) = t;
        require(f >= 0 && g2 >= 0, "even elements drifted out of the first block");
        i64 phi0 = span_psum_mod(w, lo, q, q);
        i64 q1 = w.vals[lo + f];
        i64 l = mul_mod(
            mod_norm(-phi0, twok),
            inv_mod(mod_norm(mul_mod(mod_norm(q1 - cA, twok), n % twok, twok), twok), twok),
            twok);
        if (l > 0) op_swap(w, lo + f, lo + f + l * n, "even-shift-swap");
        i64 phi1 = span_psum_mod(w, lo, q, q);
        if (phi1 == 0) return;
        require(phi1 == q / 2, "even shift left phi off the half");
        require(flip_by_half(w, lo, q, qf), "no half flip available");
        require(span_psum_mod(w, lo, q, q) == 0, "half flip missed zero");
    };

    auto obstruction = make_blocks_zero(w, ctx, lo, twok, n, false, 0);
    if (!obstruction) {
        even_shift_finish();
        return;
    }

    // Case 2: one exceptional block (mod n), every other block constant.
    // Break the structure with an odd cross-block swap when one exists.
    for (int attempt = 0; attempt < 8 && obstruction; ++attempt) {
        i64 E = obstruction->first;
        bool done2 = false;
        for (i64 xo = 0; xo < n && !done2; ++xo) {
            i64 xpos = lo + E * n + xo;
            if (w.vals[xpos] % 2 == 0) continue;
            for (i64 b = 0; b < twok && !done2; ++b) {
                if (b == E) continue;
                for (i64 yo = 0; yo < n; ++yo) {
                    i64 ypos = lo + b * n + yo;
                    if (w.vals[ypos] % 2 == 0) continue;
                    if (mod_norm(w.vals[xpos] - w.vals[ypos], n) == 0) continue;
                    std::vector<i64> eb(w.vals.begin() + lo + E * n,
                                        w.vals.begin() + lo + (E + 1) * n);
                    eb[xo] = w.vals[ypos];
                    if (classify_values_mod(eb, n)) continue;
                    op_swap(w, xpos, ypos, "structure-break-swap");
                    done2 = true;
                    break;
                }
            }
        }
        if (!done2) break;
        obstruction = make_blocks_zero(w, ctx, lo, twok, n, false, 0);
    }
    if (!obstruction) {
        even_shift_finish();
        return;
    }

    // rigid shape: the evens' block is the exceptional one and every other
    // non-even element of the first two blocks carries one shared value
    require(obstruction->first == 0, "two-even rigid case away from the first block");
    i64 e1pos = -1, e2pos = -1;
    for (i64 t = 0; t < n; ++t)
        if (w.vals[lo + t] % 2 == 0) (e1pos < 0 ? e1pos : e2pos) = t;
    require(e1pos >= 0 && e2pos >= 0, "rigid case: evens not in the first block");
    i64 ev1 = w.vals[lo + e1pos], ev2 = w.vals[lo + e2pos];
    i64 shared = -1;
    for (i64 t = 0; t < 2 * n; ++t) {
        i64 v = mod_norm(w.vals[lo + t], q);
        if (t < n && (t == e1pos || t == e2pos)) continue;
        if (shared < 0) shared = v;
        require(v == shared, "rigid case: first two blocks are not uniform");
    }

    // surgery: one even ends block 0, the other ends block 1; inner sums are
    // then zero automatically since everything else in the two blocks agrees
    SlotFiller f2(w, lo, 2 * n);
    f2.place_value(n - 1, ev1);
    f2.place_value(2 * n - 1, ev2);
    f2.finish_sorted();
    op_permute(w, lo, f2.perm, "case2-placement");

    // block order: block 0 -> slot 2^(k-1)-1, block 1 -> slot 2^k-1, so the
    // evens land on positions q/2 and q
    std::vector<i64> bperm(twok, -1);
    bperm[halfmod - 1] = 0;
    bperm[twok - 1] = 1;
    i64 fill = 2;
    for (i64 slot = 0; slot < twok; ++slot) {
        if (bperm[slot] >= 0) continue;
        bperm[slot] = fill++;
    }
    op_block_perm(w, lo, n, bperm, "case2-block-order");

    i64 phi = span_psum_mod(w, lo, q, q);
    if (phi == 0) return;
    require(phi == q / 2, "case2: phi off the half");
    require(flip_by_half(w, lo, q, qf), "case2: no half flip available");
    require(span_psum_mod(w, lo, q, q) == 0, "case2: half flip missed zero");
}

// One even element among odds sharing a residue mod 2^{v2(theta)}: the local
// sum reaches theta/2 by recursive halving; the even element against any odd
// at half distance flips the sum by exactly theta/2.
void one_even_half(Work& w, EngineCtx& ctx, i64 lo, i64 theta) {
    const Modulus& f = factorize_cached(theta);
    i64 n = f.n;
    sort_range_by(w, lo, theta,
                  [&](i64 v) { return std::make_pair(v % 2 == 0 ? 0 : 1, v); },
                  "even-first-sort");
    require(w.vals[lo] % 2 == 0 && (theta < 2 || w.vals[lo + 1] % 2 == 1),
            "one-even shape expected");
    if (f.k == 1) {
        make_blocks_zero(w, ctx, lo, 2, n, true, 0);
        i64 phi = span_psum_mod(w, lo, theta, theta);
        if (phi != theta / 2) {
            require(phi == 0, "one-even base: phi off the lattice");
            i64 j = -1;
            for (i64 t = 0; t < theta; ++t)
                if (w.vals[lo + t] % 2 == 0) { j = t; break; }
            i64 partner = (j + n < theta) ? j + n : j - n;
            op_swap(w, lo + j, lo + partner, "half-flip-swap");
        }
        require(span_psum_mod(w, lo, theta, theta) == theta / 2, "one-even base missed half");
        return;
    }
    i64 mstar = theta / 2;
    auto cls2 = classify_span(w, lo + mstar, mstar);
    require(cls2.has_value() && cls2->kind == ExceptionalStructure::Kind::Homogeneous,
            "one-even: second half should be homogeneous");
    remark_half_target(w, ctx, lo + mstar, mstar, *cls2);
    one_even_half(w, ctx, lo, mstar);
    i64 phi = span_psum_mod(w, lo, theta, theta);
    if (phi != theta / 2) {
        require(phi == 0, "one-even: phi off the half lattice");
        i64 j = -1;
        for (i64 t = 0; t < mstar; ++t)
            if (w.vals[lo + t] % 2 == 0) { j = t; break; }
        require(j >= 0, "one-even: even element lost");
        op_swap(w, lo + j, lo + j + mstar, "half-flip-swap");
    }
    require(span_psum_mod(w, lo, theta, theta) == theta / 2, "one-even missed half");
}

void one_even_zero(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf) {
    i64 mstar = q / 2;
    sort_range_by(w, lo, q, [&](i64 v) { return std::make_pair(v % 2 == 0 ? 0 : 1, v); },
                  "even-first-sort");
    auto cls2 = classify_span(w, lo + mstar, mstar);
    require(cls2.has_value() && cls2->kind == ExceptionalStructure::Kind::Homogeneous,
            "one-even: second half should be homogeneous");
    remark_half_target(w, ctx, lo + mstar, mstar, *cls2);
    one_even_half(w, ctx, lo, mstar);
    i64 phi = span_psum_mod(w, lo, q, q);
    if (phi != 0) {
        require(phi == mstar, "one-even zero: phi off the lattice");
        i64 j = -1;
        for (i64 t = 0; t < mstar; ++t)
            if (w.vals[lo + t] % 2 == 0) { j = t; break; }
        require(j >= 0, "one-even zero: even element lost");
        op_swap(w, lo + j, lo + j + mstar, "half-flip-swap");
    }
    require(span_psum_mod(w, lo, q, q) == 0, "one-even zero missed");
    (void)qf;
}

bool try_quarter(Work& w, EngineCtx& ctx, i64 lo, i64 mu);

// Second block inhomogeneous mod m* and no quarter value for the first:
// all elements of the first block share one parity.
void inhom_partner_endgame(Work& w, i64 lo, i64 q, i64 theta, i64 q1v, i64 q2v) {
    // T1 all congruent to a mod m* and even; q's to slots 1 and 1+m*, the two
    // residue lifts mod q grouped with one adjacent mixed pair when both occur
    i64 q1off = find_residue(w, lo + theta, theta, q1v, theta) + theta;
    i64 q2off = find_residue(w, lo + theta, theta, q2v, theta) + theta;
    std::vector<i64> lift0, lift1;  // source offsets by residue class mod q
    i64 r0 = -1;
    for (i64 t = 0; t < q; ++t) {
        if (t == q1off || t == q2off) continue;
        i64 r = mod_norm(w.vals[lo + t], q);
        if (r0 < 0) r0 = r;
        if (r == r0) lift0.push_back(t);
        else lift1.push_back(t);
    }
    for (size_t i = 1; i < lift1.size(); ++i)
        require(mod_norm(w.vals[lo + lift1[i]], q) == mod_norm(w.vals[lo + lift1[0]], q),
                "inhom endgame: more than two lifts");
    if (lift1.size() > lift0.size()) std::swap(lift0, lift1);
    std::vector<i64> perm(q, -1);
    perm[0] = q1off;
    perm[theta] = q2off;
    std::vector<i64> order;  // one minority first so slots 1 and 2 mix the lifts
    if (!lift1.empty()) order.push_back(lift1[0]);
    for (i64 t : lift0) order.push_back(t);
    for (size_t i = 1; i < lift1.size(); ++i) order.push_back(lift1[i]);
    size_t oi = 0;
    for (i64 slot = 0; slot < q; ++slot) {
        if (slot == 0 || slot == theta) continue;
        perm[slot] = order[oi++];
    }
    op_permute(w, lo, perm, "even-endgame-placement");
    i64 phi = span_psum_mod(w, lo, q, q);
    if (phi == 0) return;
    require(phi == theta && !lift1.empty(), "inhom endgame: unexpected phi");
    op_swap(w, lo + 1, lo + 2, "lift-swap");
    require(span_psum_mod(w, lo, q, q) == 0, "lift swap missed zero");
}

void inhom_partner_path(Work& w, EngineCtx& ctx, i64 lo, i64 q, i64 theta, const ExceptionalStructure& cls2) {
    i64 alpha = cls2.a;
    i64 q1v = mod_norm(cls2.a + cls2.b, theta), q2v = mod_norm(cls2.a - cls2.b, theta);
    bool t1_odd = (mod_norm(w.vals[lo], 2) == 1);
    for (i64 t = 0; t < theta; ++t)
        require(mod_norm(w.vals[lo + t], 2) == (t1_odd ? 1 : 0), "inhom partner: first block parity-mixed");

    auto classify_after = [&](i64 xoff, i64 yoff) {
        std::vector<i64> t1(w.vals.begin() + lo, w.vals.begin() + lo + theta);
        std::vector<i64> t2(w.vals.begin() + lo + theta, w.vals.begin() + lo + 2 * theta);
        std::swap(t1[xoff], t2[yoff]);
        return !classify_values_mod(t1, theta) && !classify_values_mod(t2, theta);
    };

    bool committed = false;
    if (t1_odd) {
        for (i64 yv : {q1v, q2v}) {
            i64 yoff = find_residue(w, lo + theta, theta, yv, theta);
            for (i64 xoff = 0; xoff < theta && !committed; ++xoff) {
                if (mod_norm(w.vals[lo + xoff] - yv, theta) == 0) continue;
                if (!classify_after(xoff, yoff)) continue;
                op_swap(w, lo + xoff, lo + theta + yoff, "cross-block-exchange");
                committed = true;
            }
            if (committed) break;
        }
        require(committed, "inhom partner: no admissible odd exchange");
    } else {
        i64 yoff = find_residue(w, lo + theta, theta, mod_norm(alpha, theta), theta);
        for (i64 xoff = 0; xoff < theta && !committed; ++xoff) {
            if (mod_norm(w.vals[lo + xoff] - alpha, theta) == 0) continue;
            if (!classify_after(xoff, yoff)) continue;
            op_swap(w, lo + xoff, lo + theta + yoff, "cross-block-exchange");
            committed = true;
        }
        if (!committed) {
            inhom_partner_endgame(w, lo, q, theta, q1v, q2v);
            return;
        }
    }
    solve_range_inner(w, ctx, lo, theta);
    solve_range_inner(w, ctx, lo + theta, theta);
    i64 phi = span_psum_mod(w, lo, q, q);
    if (phi == 0) return;
    require(phi == theta, "inhom partner: phi not a multiple of m*");
    auto t = scan_parity_pair(w, lo, theta);
    require(t.has_value(), "inhom partner: no parity pair after exchange");
    op_swap(w, lo + *t, lo + theta + *t, "parity-swap");
    require(span_psum_mod(w, lo, q, q) == 0, "inhom partner: parity swap missed zero");
}

// Second block homogeneous mod 2^(k-1).
void homog_partner_path(Work& w, EngineCtx& ctx, i64 lo, i64 q, i64 theta, const Modulus& qf,
            const ExceptionalStructure& cls2) {
    i64 halfmod = i64(1) << (qf.k - 1);
    i64 c = cls2.c;
    i64 cpr_off = -1;
    for (i64 t = 0; t < theta; ++t) {
        i64 v = w.vals[lo + t];
        if (v % 2 == 1 && mod_norm(v, halfmod) != c) { cpr_off = t; break; }
    }
    if (cpr_off >= 0) {
        // a stray odd residue exists: push it into the homogeneous block
        op_swap(w, lo + cpr_off, lo + theta, "cross-block-exchange");
        auto cls1p = classify_span(w, lo, theta);
        auto stray_in_block2 = [&]() {
            for (i64 t = 0; t < theta; ++t) {
                i64 v = w.vals[lo + theta + t];
                if (v % 2 == 1 && mod_norm(v, halfmod) != c) return t;
            }
            throw SolverStall("stray-residue push: element vanished");
        };
        if (!cls1p) {
            solve_range_inner(w, ctx, lo, theta);
            solve_range_inner(w, ctx, lo + theta, theta);
        } else {
            remark_half_target(w, ctx, lo, theta, *cls1p);
            solve_range_inner(w, ctx, lo + theta, theta);
            i64 tpos = stray_in_block2();
            i64 d = mod_norm(w.vals[lo + theta + tpos] - c, halfmod);
            int j0 = 0;
            while (d % 2 == 0 && d != 0) { d /= 2; ++j0; }
            require(j0 >= 1 && j0 <= qf.k - 2, "stray-residue push: valuation out of range");
            i64 D = (i64(1) << (qf.k - 2 - j0)) * qf.n;
            i64 partner = (tpos + D < theta) ? tpos + D : tpos - D;
            require(partner >= 0 && partner < theta, "stray-residue push: no partner at the quarter distance");
            op_swap(w, lo + theta + tpos, lo + theta + partner, "half-braid-swap");
            require(span_psum_mod(w, lo + theta, theta, theta) == theta / 2,
                    "stray-residue push: block missed m*/2");
        }
        i64 phi = span_psum_mod(w, lo, q, q);
        if (phi == 0) return;
        require(phi == theta, "stray-residue push: phi not a multiple of m*");
        i64 tpos = stray_in_block2();
        i64 d = mod_norm(w.vals[lo + theta + tpos] - c, halfmod);
        int j0 = 0;
        while (d % 2 == 0 && d != 0) { d /= 2; ++j0; }
        require(j0 >= 1 && j0 <= qf.k - 2, "stray-residue push: valuation out of range");
        i64 Dp = (i64(1) << (qf.k - 1 - j0)) * qf.n;
        i64 partner = (tpos + Dp < theta) ? tpos + Dp : tpos - Dp;
        require(partner >= 0 && partner < theta, "stray-residue push: no partner at the half distance");
        op_swap(w, lo + theta + tpos, lo + theta + partner, "ladder-swap-even");
        require(span_psum_mod(w, lo, q, q) == 0, "stray-residue push: final swap missed zero");
        return;
    }

    // every odd of the first block matches c, so it must contain even elements
    std::vector<i64> evens1;
    for (i64 t = 0; t < theta; ++t)
        if (w.vals[lo + t] % 2 == 0) evens1.push_back(t);
    require(!evens1.empty(), "homog partner: first block has no even element");
    bool committed = false;
    for (i64 xo : evens1) {
        for (i64 yo = 0; yo < theta && !committed; ++yo) {
            std::vector<i64> t1(w.vals.begin() + lo, w.vals.begin() + lo + theta);
            std::vector<i64> t2(w.vals.begin() + lo + theta, w.vals.begin() + lo + 2 * theta);
            std::swap(t1[xo], t2[yo]);
            if (classify_values_mod(t1, theta) || classify_values_mod(t2, theta)) continue;
            op_swap(w, lo + xo, lo + theta + yo, "cross-block-exchange");
            committed = true;
        }
        if (committed) break;
    }
    if (!committed) {
        // a single even element makes every exchange leave T1 homogeneous
        i64 evens_total = 0;
        for (i64 t = 0; t < q; ++t) evens_total += (w.vals[lo + t] % 2 == 0);
        require(evens_total == 1, "homog partner: no admissible exchange");
        one_even_zero(w, ctx, lo, q, qf);
        return;
    }
    solve_range_inner(w, ctx, lo, theta);
    solve_range_inner(w, ctx, lo + theta, theta);
    i64 phi = span_psum_mod(w, lo, q, q);
    if (phi == 0) return;
    require(phi == theta, "homog partner: phi not a multiple of m*");
    if (auto t = scan_parity_pair(w, lo, theta)) {
        op_swap(w, lo + *t, lo + theta + *t, "parity-swap");
        require(span_psum_mod(w, lo, q, q) == 0, "homog partner: parity swap missed zero");
        return;
    }
    i64 evens = 0;
    for (i64 t = 0; t < q; ++t) evens += (w.vals[lo + t] % 2 == 0);
    require(evens == 2, "homog partner: parity exhaustion without the two-even shape");
    atlast_range(w, ctx, lo, q, qf);
}

// best-effort: arrange the span to local sum mu/2 (mod mu)
bool try_quarter(Work& w, EngineCtx& ctx, i64 lo, i64 mu) {
    if (mu <= ctx.cap) {
        std::vector<i64> v(w.vals.begin() + lo, w.vals.begin() + lo + mu);
        ZMultiset Z = ZMultiset::from_values(mu, v);
        auto wit = witness(Z, mu / 2, ctx.cap);
        if (!wit) return false;
        // witness values are reduced mod mu; match span slots by residue
        std::vector<i64> perm(mu, -1);
        std::vector<char> used(mu, 0);
        for (i64 t = 0; t < mu; ++t) {
            i64 want = wit->arrangement.seq[t];
            for (i64 s = 0; s < mu; ++s)
                if (!used[s] && mod_norm(w.vals[lo + s], mu) == want) {
                    used[s] = 1;
                    perm[t] = s;
                    break;
                }
            require(perm[t] >= 0, "quarter witness does not match the span");
        }
        op_permute(w, lo, perm, "quarter-target");
        require(span_psum_mod(w, lo, mu, mu) == mu / 2, "oracle quarter witness failed");
        return true;
    }
    if (mu <= 4) {
        std::vector<i64> v(w.vals.begin() + lo, w.vals.begin() + lo + mu);
        auto perm = micro_dp_perm(v, mu, mu / 2, 1);
        if (!perm) return false;
        op_permute(w, lo, *perm, "quarter-target");
        return true;
    }
    Work aux;
    aux.m = mu;
    aux.vals.assign(w.vals.begin() + lo, w.vals.begin() + lo + mu);
    for (auto& v : aux.vals) v = mod_norm(v, mu);
    aux.idx.resize(mu);
    std::iota(aux.idx.begin(), aux.idx.end(), 0);
    aux.rng.seed(w.rng());
    aux.phi = span_phi_contrib(aux, 0, mu);
    bool ok = false;
    try {
        ok = solve_even_range(aux, ctx, 0, mu, factorize_cached(mu), mu / 2);
    } catch (const SolverStall&) {
        ok = false;
    }
    if (!ok) return false;
    op_permute(w, lo, aux.idx, "quarter-target");
    require(span_psum_mod(w, lo, mu, mu) == mu / 2, "quarter arrangement failed");
    return true;
}

bool solve_even_k1(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf, i64 target);

// the obstructed two-block case of the initial even step (m = 2n)
void k1_obstructed(Work& w, EngineCtx& ctx, i64 lo, i64 q, i64 n, i64 E, i64 C,
                   const ExceptionalStructure& clsE) {
    i64 alpha = clsE.a;
    i64 q1v = mod_norm(clsE.a + clsE.b, n), q2v = mod_norm(clsE.a - clsE.b, n);
    auto restore = [&]() {
        sort_range_by(w, lo, q, [&](i64 v) { return std::make_pair(mod_norm(v, 2), v); },
                      "parity-sort");
    };

    // candidate cross exchanges: a lift of the constant against a special
    for (int round = 0;; ++round) {
        i64 cbase = lo + C * n, ebase = lo + E * n;
        std::vector<i64> lifts;
        for (i64 t = 0; t < n; ++t) {
            i64 v = w.vals[cbase + t];
            bool seen = false;
            for (i64 u : lifts) seen |= (u == v);
            if (!seen) lifts.push_back(v);
        }
        int pick = 0;
        bool committed = false;
        for (i64 liftv : lifts) {
            for (i64 specv : {q1v, q2v}) {
                if (mod_norm(liftv - specv, n) == 0) continue;
                if (pick++ < round) continue;
                std::vector<i64> e1(w.vals.begin() + ebase, w.vals.begin() + ebase + n);
                std::vector<i64> c1(w.vals.begin() + cbase, w.vals.begin() + cbase + n);
                i64 spos = find_residue(w, ebase, n, specv, n);
                i64 lpos = -1;
                for (i64 t = 0; t < n; ++t)
                    if (w.vals[cbase + t] == liftv) { lpos = t; break; }
                std::swap(e1[spos], c1[lpos]);
                if (classify_values_mod(e1, n) || classify_values_mod(c1, n)) continue;
                op_swap(w, ebase + spos, cbase + lpos, "cross-block-exchange");
                committed = true;
                break;
            }
            if (committed) break;
        }
        if (!committed) break;
        solve_range_inner(w, ctx, lo, n);
        solve_range_inner(w, ctx, lo + n, n);
        i64 phi = span_psum_mod(w, lo, q, q);
        if (phi == 0) return;
        require(phi == n, "two-block endgame: phi not a multiple of n");
        if (auto t = scan_parity_pair(w, lo, n)) {
            op_swap(w, lo + *t, lo + n + *t, "parity-swap");
            require(span_psum_mod(w, lo, q, q) == 0, "parity swap missed zero");
            return;
        }
        // the whole multiset is unchanged: the parity sort restores the
        // pristine partition for the next candidate
        restore();
        if (round > 4) break;
    }
    restore();

    // rigid remainder: identify the two specials by residue
    std::vector<i64> all(w.vals.begin() + lo, w.vals.begin() + lo + q);
    std::sort(all.begin(), all.end());
    i64 spv1 = -1, spv2 = -1;
    std::vector<i64> rest;
    for (i64 v : all) {
        if (spv1 < 0 && mod_norm(v - q1v, n) == 0) { spv1 = v; continue; }
        if (spv2 < 0 && mod_norm(v - q2v, n) == 0) { spv2 = v; continue; }
        rest.push_back(v);
    }
    require(spv1 >= 0 && spv2 >= 0, "two-block rigid: specials missing");
    bool all_alpha = true;
    for (i64 v : rest) all_alpha &= (mod_norm(v - alpha, n) == 0);

    if (!all_alpha) {
        // c != a mod n: repartition into {a..a, c, c} and {c..c, q1, q2}
        std::vector<i64> avals, cvals;
        for (i64 v : rest)
            (mod_norm(v - alpha, n) == 0 ? avals : cvals).push_back(v);
        require((i64)avals.size() == n - 2 && (i64)cvals.size() == n,
                "two-block rigid: unexpected shape");
        i64 cres = mod_norm(cvals[0], n);
        for (i64 v : cvals) require(mod_norm(v, n) == cres, "two-block rigid: mixed constant block");
        SlotFiller f(w, lo, q);
        i64 slot = 0;
        for (i64 t = 0; t < n - 2; ++t) f.place_value(slot++, avals[t]);
        f.place_value(slot++, cvals[0]);
        f.place_value(slot++, cvals[1]);
        for (size_t t = 2; t < cvals.size(); ++t) f.place_value(slot++, cvals[t]);
        f.place_value(slot++, spv1);
        f.place_value(slot++, spv2);
        require(slot == q, "two-block rigid: repartition sizes off");
        op_permute(w, lo, f.perm, "block-repartition");
        require(!classify_span(w, lo, n) && !classify_span(w, lo + n, n),
                "k1 repartition left an exceptional block");
        solve_range_inner(w, ctx, lo, n);
        solve_range_inner(w, ctx, lo + n, n);
        i64 phi = span_psum_mod(w, lo, q, q);
        if (phi == 0) return;
        require(phi == n, "two-block repartition: phi not multiple of n");
        auto t = scan_parity_pair(w, lo, n);
        require(t.has_value(), "two-block repartition: no parity pair");
        op_swap(w, lo + *t, lo + n + *t, "parity-swap");
        require(span_psum_mod(w, lo, q, q) == 0, "parity swap missed zero");
        return;
    }

    // c = a mod n: specials to positions n and 2n; an even special takes
    // position n so the half-index contribution vanishes. A leftover n-shift
    // is repaired by swapping two adjacent elements from different lifts.
    if (spv1 % 2 == 1 && spv2 % 2 == 0) std::swap(spv1, spv2);
    std::vector<i64> lift0, lift1;  // split the majority class by residue mod q
    i64 rbase = mod_norm(rest[0], q);
    for (i64 v : rest) (mod_norm(v, q) == rbase ? lift0 : lift1).push_back(v);
    for (i64 v : lift1)
        require(mod_norm(v, q) == mod_norm(lift1[0], q), "two-block rigid: more than two lifts");
    if (lift1.size() > lift0.size()) std::swap(lift0, lift1);
    SlotFiller f(w, lo, q);
    f.place_value(n - 1, spv1);
    f.place_value(q - 1, spv2);
    std::vector<i64> order;
    if (!lift1.empty()) {
        order.push_back(lift1[0]);
        for (i64 v : lift0) order.push_back(v);
        for (size_t t = 1; t < lift1.size(); ++t) order.push_back(lift1[t]);
    } else {
        order = lift0;
    }
    size_t oi = 0;
    for (i64 slot = 0; slot < q; ++slot) {
        if (slot == n - 1 || slot == q - 1) continue;
        f.place_value(slot, order[oi++]);
    }
    op_permute(w, lo, f.perm, "half-index-placement");
    i64 phi = span_psum_mod(w, lo, q, q);
    if (phi == 0) return;
    require(phi == n && !lift1.empty(), "two-block rigid: phi stuck off zero");
    op_swap(w, lo, lo + 1, "lift-swap");
    require(span_psum_mod(w, lo, q, q) == 0, "lift swap missed zero");
}

bool solve_even_k1(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf, i64 target) {
    i64 n = qf.n;
    sort_range_by(w, lo, q, [&](i64 v) { return std::make_pair(mod_norm(v, 2), v); },
                  "parity-sort");
    auto clsX = classify_span(w, lo, n);
    auto clsY = classify_span(w, lo + n, n);
    if (!clsX && !clsY) {
        if (!span_constant_mod(w, lo, n, n)) solve_range_inner(w, ctx, lo, n);
        if (!span_constant_mod(w, lo + n, n, n)) solve_range_inner(w, ctx, lo + n, n);
    } else if (clsX && clsY) {
        place_inhom_target(w, lo, n, clsX->a, clsX->b, 1);
        place_inhom_target(w, lo + n, n, clsY->a, clsY->b, n - 1);
    } else {
        i64 E = clsX ? 0 : 1;
        i64 C = 1 - E;
        auto& clsE = clsX ? *clsX : *clsY;
        if (span_constant_mod(w, lo + C * n, n, n)) {
            if (target != 0) return false;
            k1_obstructed(w, ctx, lo, q, n, E, C, clsE);
            return true;
        }
        solve_range_inner(w, ctx, lo + C * n, n);
        i64 obase = lo + C * n;
        i64 at = -1;
        for (i64 t = 0; t + 1 < n; ++t)
            if (mod_norm(w.vals[obase + t] - w.vals[obase + t + 1], n) != 0) { at = t; break; }
        require(at >= 0, "two-block step: non-constant block without adjacent difference");
        i64 delta = mod_norm(w.vals[obase + at] - w.vals[obase + at + 1], n);
        op_swap(w, obase + at, obase + at + 1, "nonzero-nudge");
        place_inhom_target(w, lo + E * n, n, clsE.a, clsE.b, mod_norm(-delta, n));
    }
    i64 phi = span_psum_mod(w, lo, q, q);
    require(phi % n == 0, "two-block step: lost divisibility by n");
    if (phi == target) return true;
    require(mod_norm(phi - target, q) == n, "two-block step: phi and target differ oddly");
    if (auto t = scan_parity_pair(w, lo, n)) {
        op_swap(w, lo + *t, lo + n + *t, "parity-swap");
        require(span_psum_mod(w, lo, q, q) == target, "parity swap missed the target");
        return true;
    }
    if (target != 0) return false;
    throw SolverStall("two-block step: no parity pair though phi is odd");
}

bool solve_even_range(Work& w, EngineCtx& ctx, i64 lo, i64 q, const Modulus& qf, i64 target) {
    if (qf.k == 1) return solve_even_k1(w, ctx, lo, q, qf, target);

    i64 mstar = q / 2;
    if (target == 0) {
        // the one- and two-even shapes have dedicated total endgames
        i64 evens = 0;
        for (i64 t = 0; t < q; ++t) evens += (w.vals[lo + t] % 2 == 0);
        if (evens == 1 || evens == 2) {
            i64 halfmod = (i64(1) << qf.k) / 2;
            i64 codd = -1;
            bool aligned = true;
            for (i64 t = 0; t < q && aligned; ++t) {
                i64 v = w.vals[lo + t];
                if (v % 2 == 0) continue;
                if (codd < 0) codd = mod_norm(v, halfmod);
                aligned = mod_norm(v, halfmod) == codd;
            }
            if (aligned && evens == 2) {
                atlast_range(w, ctx, lo, q, qf);
                return true;
            }
            if (aligned && evens == 1) {
                one_even_zero(w, ctx, lo, q, qf);
                return true;
            }
        }
    }
    separable_sort_range(w, lo, q, 2, qf.k, "separable-sort");
    auto cls1 = classify_span(w, lo, mstar);
    auto cls2 = classify_span(w, lo + mstar, mstar);
    if (cls1 && !cls2) {
        op_reverse(w, lo, q, "reverse-normalize");
        std::swap(cls1, cls2);
    }
    if (!cls1 && !cls2) {
        if (!span_constant_mod(w, lo, mstar, mstar)) solve_range_inner(w, ctx, lo, mstar);
        if (!span_constant_mod(w, lo + mstar, mstar, mstar))
            solve_range_inner(w, ctx, lo + mstar, mstar);
    } else if (cls1 && cls2) {
        remark_half_target(w, ctx, lo, mstar, *cls1);
        remark_half_target(w, ctx, lo + mstar, mstar, *cls2);
    } else {
        if (target != 0) return false;
        if (try_quarter(w, ctx, lo, mstar)) {
            remark_half_target(w, ctx, lo + mstar, mstar, *cls2);
        } else if (cls2->kind == ExceptionalStructure::Kind::Inhomogeneous) {
            inhom_partner_path(w, ctx, lo, q, mstar, *cls2);
            return true;
        } else {
            homog_partner_path(w, ctx, lo, q, mstar, qf, *cls2);
            return true;
        }
    }
    i64 phi = span_psum_mod(w, lo, q, q);
    require(phi % mstar == 0, "even step lost divisibility by m*");
    if (phi == target) return true;
    require(mod_norm(phi - target, q) == mstar, "even step: phi and target differ oddly");

    // braid cascade: offsets 2^(k-s) n, values differing mod 2^s
    for (int s = 1; s <= qf.k; ++s) {
        i64 xoff = (i64(1) << (qf.k - s)) * qf.n;
        i64 twos = i64(1) << s;
        for (i64 t = 0; t + xoff < q; ++t) {
            if (mod_norm(w.vals[lo + t] - w.vals[lo + t + xoff], twos) != 0) {
                op_swap(w, lo + t, lo + t + xoff, "halving-braid");
                require(span_psum_mod(w, lo, q, q) == target, "halving braid missed the target");
                return true;
            }
        }
        // no pair at this offset: everything must agree mod 2^s
        i64 r0 = mod_norm(w.vals[lo], twos);
        bool uniform = true;
        for (i64 t = 1; t < q; ++t)
            if (mod_norm(w.vals[lo + t], twos) != r0) { uniform = false; break; }
        if (uniform) continue;
        // odd multiples of the offset still flip by q/2
        bool fixed = false;
        for (i64 mult = 3; mult * xoff < q && !fixed; mult += 2) {
            i64 off = mult * xoff;
            for (i64 t = 0; t + off < q; ++t) {
                if (mod_norm(w.vals[lo + t] - w.vals[lo + t + off], twos) != 0) {
                    op_swap(w, lo + t, lo + t + off, "halving-braid");
                    require(span_psum_mod(w, lo, q, q) == target,
                            "halving braid missed the target");
                    fixed = true;
                    break;
                }
            }
        }
        if (fixed) return true;
        if (target != 0) return false;
        throw SolverStall("even cascade: mixed residues but no braid pair");
    }
    if (target != 0) return false;
    throw SolverStall("even cascade exhausted without reaching zero");
}

// ---- dispatcher ------------------------------------------------------------------

void solve_range_inner(Work& w, EngineCtx& ctx, i64 lo, i64 q) {
    if (q == 1) {
        note(w, "trivial-modulus");
        return;
    }
    if (span_constant_mod(w, lo, q, q)) {
        note(w, "constant-block");
        require(span_psum_mod(w, lo, q, q) == 0, "constant non-exceptional block not at zero");
        return;
    }
    if (q <= 4) {
        tiny_target(w, lo, q, 0, "tiny-enumeration");
        return;
    }
    const Modulus& qf = factorize_cached(q);
    if (qf.factors.size() == 1 && qf.factors[0].second == 1) {
        solve_prime_range(w, lo, q);
    } else if (qf.odd()) {
        solve_odd_range(w, ctx, lo, q, qf);
    } else {
        require(solve_even_range(w, ctx, lo, q, qf, 0), "even solver returned without zero");
    }
    require(span_psum_mod(w, lo, q, q) == 0, "sub-solve finished off target");
}

SubResult solve_range(Work& w, EngineCtx& ctx, i64 lo, i64 q) {
    if (q == 1) {
        note(w, "trivial-modulus");
        return {true, std::nullopt};
    }
    auto cls = classify_span(w, lo, q);
    if (cls) return {false, cls};
    solve_range_inner(w, ctx, lo, q);
    return {true, std::nullopt};
}

// ---- public API --------------------------------------------------------------------

SolveOutcome run_engine(const ZMultiset& M, const SolveOptions& opts) {
    SolveOutcome out;
    i64 m = M.mod.m;
    out.trace.replayable = m <= opts.full_trace_limit;

    auto cls = classify(M);
    if (cls) {
        out.status = SolveStatus::Exceptional;
        out.exception = cls;
        TraceStep st;
        st.tag = "classified-exceptional";
        st.phi_after = perm_sum_span(M.elems.data(), m, m);
        out.trace.steps.push_back(std::move(st));
        return out;
    }

    Work w;
    w.m = m;
    w.vals = M.elems;
    w.trace = &out.trace;
    w.payload = out.trace.replayable;
    w.phi = perm_sum_span(M.elems.data(), m, m);
    w.rng.seed(opts.seed);
    EngineCtx ctx;
    ctx.cap = std::min(opts.oracle_cap, kHardOracleCap);

    try {
        auto r = solve_range(w, ctx, 0, m);
        require(r.solved, "solver and classifier disagree");
        require(w.phi == 0 && span_psum_mod(w, 0, m, m) == 0, "final sum is not zero");
        SumCertificate cert{Arrangement{M.mod, w.vals}, 0};
        require(verify(cert, M), "certificate failed verification");
        out.status = SolveStatus::Solved;
        out.certificate = std::move(cert);
        return out;
    } catch (const SolverStall& stall) {
        g_fallbacks.fetch_add(1, std::memory_order_relaxed);
        out.fallback_used = true;
        out.trace.replayable = false;
        TraceStep st;
        st.tag = "oracle-fallback";
        out.trace.steps.push_back(std::move(st));
        if (m <= std::min(opts.oracle_cap, kHardOracleCap)) {
            auto wit = witness(M, 0, opts.oracle_cap);
            if (wit && verify(*wit, M)) {
                out.status = SolveStatus::Solved;
                out.certificate = std::move(wit);
                return out;
            }
            out.status = SolveStatus::Failed;
            out.diagnostic = std::string("oracle found no zero after the gate: ") + stall.what();
            return out;
        }
        out.status = SolveStatus::Failed;
        out.diagnostic = stall.what();
        return out;
    }
}

}  // namespace

SolveOutcome solve(const ZMultiset& M, const SolveOptions& opts) { return run_engine(M, opts); }

SolveOutcome solve_prime(const ZMultiset& M, const SolveOptions& opts) {
    Modulus f = M.mod;
    if (!(f.factors.size() == 1 && f.factors[0].second == 1))
        throw std::invalid_argument("solve_prime: m is not prime");
    return run_engine(M, opts);
}

SolveOutcome solve_odd(const ZMultiset& M, const SolveOptions& opts) {
    if (!M.mod.odd() || (M.mod.factors.size() == 1 && M.mod.factors[0].second == 1))
        throw std::invalid_argument("solve_odd: m is not an odd composite");
    return run_engine(M, opts);
}

SolveOutcome solve_even(const ZMultiset& M, const SolveOptions& opts) {
    if (M.mod.odd()) throw std::invalid_argument("solve_even: m is odd");
    return run_engine(M, opts);
}

SumCertificate solve_atlast(const ZMultiset& M, const SolveOptions& opts) {
    const Modulus& f = M.mod;
    if (f.k < 2 || f.m <= 4) throw std::invalid_argument("solve_atlast: need m = 2^k n > 4, k > 1");
    i64 halfmod = (i64(1) << f.k) / 2;
    i64 evens = 0;
    std::optional<i64> codd;
    for (i64 v : M.elems) {
        if (v % 2 == 0) { ++evens; continue; }
        if (!codd) codd = mod_norm(v, halfmod);
        if (mod_norm(v, halfmod) != *codd)
            throw std::invalid_argument("solve_atlast: odd residues not aligned");
    }
    if (evens != 2 || !codd)
        throw std::invalid_argument("solve_atlast: need exactly two even elements");

    Trace trace;
    Work w;
    w.m = f.m;
    w.vals = M.elems;
    w.trace = &trace;
    w.payload = f.m <= opts.full_trace_limit;
    w.phi = perm_sum_span(M.elems.data(), f.m, f.m);
    w.rng.seed(opts.seed);
    EngineCtx ctx;
    ctx.cap = std::min(opts.oracle_cap, kHardOracleCap);
    atlast_range(w, ctx, 0, f.m, f);
    SumCertificate cert{Arrangement{f, w.vals}, 0};
    if (!verify(cert, M)) throw std::logic_error("solve_atlast: certificate broken");
    return cert;
}

std::variant<Arrangement, UniformResidues> fix_R_nonzero(const Arrangement& a, i64 p, u64 seed) {
    auto d = decompose(a, p);
    if (!d.R_prime || *d.R_prime == 0)
        throw std::invalid_argument("fix_R_nonzero: needs m* | R and R' != 0");
    Work w;
    w.m = a.mod.m;
    w.vals = a.seq;
    w.rng.seed(seed);
    w.phi = perm_sum(a).value();
    auto uniform = fix_R_nonzero_range(w, 0, a.mod.m, p, a.mod.m / p);
    if (uniform) return UniformResidues{p, *uniform};
    return Arrangement{a.mod, w.vals};
}

std::variant<Arrangement, RigidWitness> fix_R_zero(const Arrangement& a, i64 p, u64 seed) {
    auto d = decompose(a, p);
    if (!d.R_prime || *d.R_prime != 0)
        throw std::invalid_argument("fix_R_zero: needs m* | R and R' = 0");
    int e = 0;
    for (auto& fac : a.mod.factors)
        if (fac.first == p) e = fac.second;
    if (e == 0) throw std::invalid_argument("fix_R_zero: p does not divide m");
    Work w;
    w.m = a.mod.m;
    w.vals = a.seq;
    w.rng.seed(seed);
    w.phi = perm_sum(a).value();
    auto res = fix_R_zero_range(w, 0, a.mod.m, p, e, a.mod.m / p);
    if (res.solved) return Arrangement{a.mod, w.vals};
    return res.witness;
}

SolveOutcome finish_multiprime(const ZMultiset& M, const std::vector<MultiprimeWitness>& wits) {
    const Modulus& f = M.mod;
    if (!f.odd() || f.factors.size() < 2)
        throw std::invalid_argument("finish_multiprime: m must be odd with >= 2 prime factors");
    if (wits.size() != f.factors.size())
        throw std::invalid_argument("finish_multiprime: one witness per prime required");
    for (size_t i = 0; i < wits.size(); ++i) {
        if (wits[i].prime != f.factors[i].first || wits[i].exponent != f.factors[i].second)
            throw std::invalid_argument("finish_multiprime: witnesses do not match the primes");
        i64 pe = 1;
        for (int t = 0; t < wits[i].exponent; ++t) pe *= wits[i].prime;
        i64 stray = 0;
        for (i64 v : M.elems)
            if (mod_norm(v - wits[i].t, pe) != 0) ++stray;
        if (stray != 0 && stray != 2)
            throw std::invalid_argument("finish_multiprime: prime " + std::to_string(wits[i].prime) +
                                        " has " + std::to_string(stray) + " stray elements");
    }
    SolveOutcome out;
    out.trace.replayable = true;
    Work w;
    w.m = f.m;
    w.vals = M.elems;
    w.trace = &out.trace;
    w.phi = perm_sum_span(M.elems.data(), f.m, f.m);
    try {
        multiprime_finish_range(w, 0, f.m, f, wits);
    } catch (const SolverStall&) {
        // the only legitimate failure is the unit pair {c, -c}: exceptional
        auto cls = classify(M);
        if (cls) {
            out.status = SolveStatus::Exceptional;
            out.exception = cls;
            return out;
        }
        throw;
    }
    SumCertificate cert{Arrangement{f, w.vals}, 0};
    if (!verify(cert, M)) throw std::logic_error("finish_multiprime: certificate broken");
    out.status = SolveStatus::Solved;
    out.certificate = std::move(cert);
    return out;
}

std::optional<Arrangement> replay_trace(const ZMultiset& M, const Trace& trace) {
    if (!trace.replayable) return std::nullopt;
    std::vector<i64> vals = M.elems;
    for (const auto& st : trace.steps) {
        switch (st.op) {
            case StepOp::Note:
                break;
            case StepOp::Swap:
                std::swap(vals[st.i], vals[st.j]);
                break;
            case StepOp::Rotate:
                std::rotate(vals.begin() + st.lo, vals.begin() + st.lo + st.i,
                            vals.begin() + st.lo + st.len);
                break;
            case StepOp::Reverse:
                std::reverse(vals.begin() + st.lo, vals.begin() + st.lo + st.len);
                break;
            case StepOp::BlockPerm: {
                i64 bs = st.i;
                std::vector<i64> nv(st.len);
                for (size_t s = 0; s < st.perm.size(); ++s)
                    std::copy(vals.begin() + st.lo + st.perm[s] * bs,
                              vals.begin() + st.lo + (st.perm[s] + 1) * bs, nv.begin() + s * bs);
                std::copy(nv.begin(), nv.end(), vals.begin() + st.lo);
                break;
            }
            case StepOp::Permute: {
                if ((i64)st.perm.size() != st.len) return std::nullopt;
                std::vector<i64> nv(st.len);
                for (i64 t = 0; t < st.len; ++t) nv[t] = vals[st.lo + st.perm[t]];
                std::copy(nv.begin(), nv.end(), vals.begin() + st.lo);
                break;
            }
        }
    }
    return Arrangement{M.mod, std::move(vals)};
}

i64 solver_fallback_activations() { return g_fallbacks.load(std::memory_order_relaxed); }

}  // namespace permsum
