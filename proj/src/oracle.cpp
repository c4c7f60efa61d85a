#include "permsum/oracle.hpp"

#include <algorithm>
#include <cstdlib>

namespace permsum {

namespace {

std::atomic<i64> g_oracle_calls{0};

inline u64 rotl_m(u64 x, i64 r, i64 m, u64 full) {
    if (r == 0) return x;
    return ((x << r) | (x >> (m - r))) & full;
}

struct DpLayout {
    std::vector<i64> value;   // distinct values ascending
    std::vector<i64> count;   // multiplicities
    std::vector<i64> stride;  // mixed-radix strides
    i64 states = 1;
};

DpLayout layout_of(const ZMultiset& M) {
    DpLayout L;
    for (size_t i = 0; i < M.elems.size();) {
        size_t j = i;
        while (j < M.elems.size() && M.elems[j] == M.elems[i]) ++j;
        L.value.push_back(M.elems[i]);
        L.count.push_back((i64)(j - i));
        i = j;
    }
    L.stride.resize(L.value.size());
    for (size_t j = 0; j < L.value.size(); ++j) {
        L.stride[j] = L.states;
        L.states *= L.count[j] + 1;
    }
    return L;
}

void check_cap(i64 m, i64 cap) {
    cap = std::min(cap, kHardOracleCap);
    if (m > cap)
        throw std::invalid_argument("oracle cap exceeded: m=" + std::to_string(m) +
                                    " > cap=" + std::to_string(cap));
}

// Full table, dp[s] = bitmask of sums achievable with the digit profile s.
std::vector<u64> run_dp(const ZMultiset& M, const DpLayout& L) {
    i64 m = M.mod.m;
    u64 full = (m >= 64) ? ~0ull : ((1ull << m) - 1);
    size_t d = L.value.size();
    // rot[t][j] = ((t+1) * value[j]) mod m for the element placed as t+1-th
    std::vector<i64> rot(m * d);
    for (i64 t = 0; t < m; ++t)
        for (size_t j = 0; j < d; ++j)
            rot[t * d + j] = mul_mod(t + 1, L.value[j], m);

    std::vector<u64> dp(L.states, 0);
    dp[0] = 1;
    std::vector<i64> digit(d, 0);
    i64 t = 0;  // sum of digits at state s
    for (i64 s = 0; s < L.states; ++s) {
        u64 cur = dp[s];
        if (t < m && cur) {
            const i64* r = rot.data() + t * d;
            for (size_t j = 0; j < d; ++j)
                if (digit[j] < L.count[j])
                    dp[s + L.stride[j]] |= rotl_m(cur, r[j], m, full);
        }
        // odometer
        for (size_t j = 0; j < d && s + 1 < L.states; ++j) {
            ++digit[j];
            ++t;
            if (digit[j] <= L.count[j]) break;
            t -= digit[j];
            digit[j] = 0;
        }
    }
    return dp;
}

}  // namespace

i64 oracle_cap_from_env() {
    if (const char* s = std::getenv("PERMSUM_ORACLE_CAP")) {
        i64 v = std::atoll(s);
        if (v >= 1) return std::min(v, kHardOracleCap);
    }
    return kDefaultOracleCap;
}

std::vector<i64> Spectrum::values() const {
    std::vector<i64> out;
    for (i64 r = 0; r < m; ++r)
        if ((mask >> r) & 1) out.push_back(r);
    return out;
}

Spectrum spectrum(const ZMultiset& M, i64 cap) {
    check_cap(M.mod.m, cap);
    g_oracle_calls.fetch_add(1, std::memory_order_relaxed);
    DpLayout L = layout_of(M);
    auto dp = run_dp(M, L);
    return Spectrum{M.mod.m, dp[L.states - 1]};
}

std::optional<SumCertificate> witness(const ZMultiset& M, i64 target, i64 cap) {
    check_cap(M.mod.m, cap);
    g_oracle_calls.fetch_add(1, std::memory_order_relaxed);
    i64 m = M.mod.m;
    target = mod_norm(target, m);
    DpLayout L = layout_of(M);
    auto dp = run_dp(M, L);
    if (!((dp[L.states - 1] >> target) & 1)) return std::nullopt;

    // Walk back: find which value received coefficient t.
    std::vector<i64> seq(m);
    std::vector<i64> digit = L.count;
    i64 s = L.states - 1, tau = target;
    for (i64 t = m; t >= 1; --t) {
        bool step = false;
        for (size_t j = 0; j < L.value.size(); ++j) {
            if (digit[j] == 0) continue;
            i64 prev = s - L.stride[j];
            i64 tp = mod_norm(tau - mul_mod(t, L.value[j], m), m);
            if ((dp[prev] >> tp) & 1) {
                seq[t - 1] = L.value[j];
                --digit[j];
                s = prev;
                tau = tp;
                step = true;
                break;
            }
        }
        if (!step) throw std::logic_error("oracle witness: backtrack failed");
    }
    SumCertificate cert{Arrangement::of(M, std::move(seq)), target};
    return cert;
}

bool has_zero(const ZMultiset& M, i64 cap) {
    return spectrum(M, cap).contains(0);
}

Spectrum naive_spectrum(const ZMultiset& M) {
    i64 m = M.mod.m;
    if (m > 9) throw std::invalid_argument("naive_spectrum: m too large");
    std::vector<i64> seq = M.elems;
    u64 mask = 0;
    do {
        mask |= 1ull << perm_sum_span(seq.data(), m, m);
    } while (std::next_permutation(seq.begin(), seq.end()));
    return Spectrum{m, mask};
}

i64 oracle_invocations() { return g_oracle_calls.load(std::memory_order_relaxed); }

}  // namespace permsum
