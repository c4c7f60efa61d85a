#include "permsum/io.hpp"

#include <cctype>
#include <sstream>

namespace permsum {

using nlohmann::json;

namespace {

std::string strip(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

i64 parse_int(const std::string& tok, const char* what) {
    std::string t = strip(tok);
    if (t.empty()) throw std::invalid_argument(std::string(what) + ": empty token");
    size_t pos = 0;
    i64 v = 0;
    try {
        v = std::stoll(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": bad token '" + t + "'");
    }
    if (pos != t.size())
        throw std::invalid_argument(std::string(what) + ": bad token '" + t + "'");
    return v;
}

}  // namespace

ZMultiset parse_multiset(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("multiset: missing ':' separator");
    i64 m = parse_int(text.substr(0, colon), "modulus");
    if (m < 1) throw std::invalid_argument("modulus: must be positive");
    std::vector<i64> vals;
    std::string rest = text.substr(colon + 1);
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(parse_int(tok, "element"));
    if ((i64)vals.size() != m)
        throw std::invalid_argument("cardinality: got " + std::to_string(vals.size()) +
                                    " elements, need exactly " + std::to_string(m));
    return ZMultiset::from_values(m, std::move(vals));
}

std::string format_multiset(const ZMultiset& M) {
    std::string out = std::to_string(M.mod.m) + ": ";
    for (size_t i = 0; i < M.elems.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(M.elems[i]);
    }
    return out;
}

json certificate_to_json(const SumCertificate& cert, const ZMultiset& parent) {
    json j;
    j["v"] = 1;
    j["m"] = parent.mod.m;
    j["multiset"] = parent.elems;
    j["arrangement"] = cert.arrangement.seq;
    j["value"] = cert.value;
    return j;
}

json exception_to_json(const ExceptionalStructure& e) {
    json j;
    j["v"] = 1;
    j["m"] = e.m;
    if (e.kind == ExceptionalStructure::Kind::Homogeneous) {
        j["kind"] = "homogeneous";
        j["c"] = e.c;
    } else {
        j["kind"] = "inhomogeneous";
        j["a"] = e.a;
        j["b"] = e.b;
    }
    return j;
}

json trace_to_json(const Trace& trace) {
    json steps = json::array();
    for (const auto& st : trace.steps) {
        json s;
        s["step"] = st.tag;
        switch (st.op) {
            case StepOp::Note: s["anchor"] = "note"; s["positions"] = json::array(); break;
            case StepOp::Swap:
                s["anchor"] = "transposition";
                s["positions"] = {st.i + 1, st.j + 1};
                break;
            case StepOp::Rotate:
                s["anchor"] = "cyclic-rotation";
                s["positions"] = {st.lo + 1, st.lo + st.len, st.i};
                break;
            case StepOp::Reverse:
                s["anchor"] = "reversal";
                s["positions"] = {st.lo + 1, st.lo + st.len};
                break;
            case StepOp::BlockPerm:
                s["anchor"] = "block-reorder";
                s["positions"] = {st.lo + 1, st.lo + st.len, st.i};
                break;
            case StepOp::Permute:
                s["anchor"] = "subrange-permutation";
                s["positions"] = {st.lo + 1, st.lo + st.len};
                break;
        }
        s["phi_after"] = st.phi_after;
        steps.push_back(std::move(s));
    }
    json j;
    j["v"] = 1;
    j["replayable"] = trace.replayable;
    j["steps"] = std::move(steps);
    return j;
}

json outcome_to_json(const SolveOutcome& out, const ZMultiset& M, bool include_trace) {
    json j;
    j["v"] = 1;
    j["m"] = M.mod.m;
    j["multiset"] = M.elems;
    j["fallback"] = out.fallback_used;
    switch (out.status) {
        case SolveStatus::Solved:
            j["outcome"] = "zero";
            j["arrangement"] = out.certificate->arrangement.seq;
            j["value"] = out.certificate->value;
            break;
        case SolveStatus::Exceptional:
            j["outcome"] = "exceptional";
            j["exception"] = exception_to_json(*out.exception);
            break;
        case SolveStatus::Failed:
            j["outcome"] = "failed";
            j["diagnostic"] = out.diagnostic;
            break;
    }
    if (include_trace) j["trace"] = trace_to_json(out.trace);
    return j;
}

bool verify_json(const json& doc) {
    if (!doc.contains("v") || doc["v"].get<int>() != 1)
        throw std::invalid_argument("verify: unsupported document version");
    i64 m = doc.at("m").get<i64>();
    std::vector<i64> mvals = doc.at("multiset").get<std::vector<i64>>();
    ZMultiset M = ZMultiset::from_values(m, std::move(mvals));

    std::string outcome = doc.contains("outcome") ? doc["outcome"].get<std::string>() : "zero";
    if (outcome == "zero") {
        std::vector<i64> arr = doc.at("arrangement").get<std::vector<i64>>();
        i64 value = doc.at("value").get<i64>();
        SumCertificate cert{Arrangement::from_sequence(M.mod, std::move(arr)), value};
        return verify(cert, M) && mod_norm(value, m) == 0;
    }
    if (outcome == "exceptional") {
        auto cls = classify(M);
        if (!cls) return false;
        const json& e = doc.at("exception");
        std::string kind = e.at("kind").get<std::string>();
        if (kind == "homogeneous")
            return cls->kind == ExceptionalStructure::Kind::Homogeneous &&
                   cls->c == e.at("c").get<i64>();
        if (kind == "inhomogeneous")
            return cls->kind == ExceptionalStructure::Kind::Inhomogeneous &&
                   cls->a == e.at("a").get<i64>() && cls->b == e.at("b").get<i64>();
        throw std::invalid_argument("verify: unknown exception kind");
    }
    return false;
}

}  // namespace permsum
