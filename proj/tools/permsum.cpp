// permsum: solve, classify, and survey zero permutational sums on Z_m.
//
// Input multisets use the format "m: a1,a2,...,am". Exit codes: 0 for a
// solved instance (or a clean verify/census), 2 when the multiset is
// exceptional, 1 on errors.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "permsum/census.hpp"
#include "permsum/io.hpp"
#include "permsum/oracle.hpp"

using namespace permsum;
using nlohmann::json;

namespace {

std::string read_input(const std::string& inline_text, const std::string& file) {
    if (!inline_text.empty() && !file.empty())
        throw std::invalid_argument("give the multiset inline or with --file, not both");
    if (!inline_text.empty()) return inline_text;
    if (!file.empty()) {
        if (file == "-") {
            std::stringstream ss;
            ss << std::cin.rdbuf();
            return ss.str();
        }
        std::ifstream in(file);
        if (!in) throw std::invalid_argument("cannot open " + file);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
}

std::string exception_line(const ExceptionalStructure& e) {
    if (e.kind == ExceptionalStructure::Kind::Homogeneous) {
        Modulus f = factorize(e.m);
        return "HOMOGENEOUS c=" + std::to_string(e.c) + " mod " + std::to_string(i64(1) << f.k);
    }
    return "INHOMOGENEOUS a=" + std::to_string(e.a) + " b=" + std::to_string(e.b);
}

void print_trace(const Trace& trace) {
    for (const auto& st : trace.steps) {
        std::cout << "  " << st.tag;
        switch (st.op) {
            case StepOp::Swap: std::cout << " swap(" << st.i + 1 << "," << st.j + 1 << ")"; break;
            case StepOp::Rotate:
                std::cout << " rotate[" << st.lo + 1 << ".." << st.lo + st.len << "] by " << st.i;
                break;
            case StepOp::Reverse:
                std::cout << " reverse[" << st.lo + 1 << ".." << st.lo + st.len << "]";
                break;
            case StepOp::BlockPerm:
                std::cout << " blocks[" << st.lo + 1 << ".." << st.lo + st.len << "] size " << st.i;
                break;
            case StepOp::Permute:
                std::cout << " permute[" << st.lo + 1 << ".." << st.lo + st.len << "]";
                break;
            case StepOp::Note: break;
        }
        std::cout << "  phi=" << st.phi_after << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero permutational sums on cyclic groups"};
    app.require_subcommand(1);
    app.fallthrough();

    u64 seed = 1;
    i64 oracle_cap = oracle_cap_from_env();
    int workers = 1;
    app.add_option("--seed", seed, "solver seed")->capture_default_str();
    app.add_option("--oracle-cap", oracle_cap, "oracle size cap")->capture_default_str();
    app.add_option("--workers", workers, "census worker threads")->capture_default_str();

    std::string input, file;
    bool as_json = false, explain = false;

    auto add_input = [&](CLI::App* cmd) {
        cmd->add_option("multiset", input, "inline multiset 'm: a1,...,am'");
        cmd->add_option("-f,--file", file, "read the multiset from a file ('-' for stdin)");
        cmd->add_flag("--json", as_json, "emit JSON");
    };

    auto* c_solve = app.add_subcommand("solve", "find a zero-sum arrangement or classify");
    add_input(c_solve);
    c_solve->add_flag("--explain", explain, "print the proof trace");

    auto* c_classify = app.add_subcommand("classify", "structural classification only");
    add_input(c_classify);

    auto* c_spectrum = app.add_subcommand("spectrum", "exact achievable-sum set (oracle)");
    add_input(c_spectrum);

    auto* c_verify = app.add_subcommand("verify", "re-check a serialized certificate");
    std::string cert_file;
    c_verify->add_option("certificate", cert_file, "certificate JSON file ('-' for stdin)")
        ->required();

    auto* c_census = app.add_subcommand("census", "exhaustive sweep of all multisets of Z_m");
    i64 census_m = 0;
    std::string out_dir = ".";
    bool reduce_symmetry = false;
    i64 random_count = 0;
    c_census->add_option("m", census_m, "group order")->required();
    c_census->add_option("--out", out_dir, "report directory")->capture_default_str();
    c_census->add_flag("--reduce-symmetry", reduce_symmetry, "orbit representatives only");
    c_census->add_option("--random", random_count,
                         "sample this many random multisets instead of enumerating");

    auto* c_bench = app.add_subcommand("bench", "random-instance solve throughput");
    i64 bench_m = 0, bench_count = 100;
    c_bench->add_option("m", bench_m, "group order")->required();
    c_bench->add_option("count", bench_count, "instances")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_solve->parsed()) {
            ZMultiset M = parse_multiset(read_input(input, file));
            SolveOptions opts;
            opts.seed = seed;
            opts.oracle_cap = oracle_cap;
            auto out = solve(M, opts);
            if (as_json) {
                std::cout << outcome_to_json(out, M, explain).dump() << "\n";
            } else if (out.status == SolveStatus::Solved) {
                std::cout << "ZERO ";
                for (size_t i = 0; i < out.certificate->arrangement.seq.size(); ++i)
                    std::cout << (i ? "," : "") << out.certificate->arrangement.seq[i];
                std::cout << "\n";
                if (explain) print_trace(out.trace);
            } else if (out.status == SolveStatus::Exceptional) {
                std::cout << exception_line(*out.exception) << "\n";
                if (explain) print_trace(out.trace);
            } else {
                std::cerr << "FAILED: " << out.diagnostic << "\n";
                return 1;
            }
            return out.status == SolveStatus::Exceptional ? 2 : 0;
        }
        if (c_classify->parsed()) {
            ZMultiset M = parse_multiset(read_input(input, file));
            auto cls = classify(M);
            if (as_json) {
                json j;
                j["v"] = 1;
                j["m"] = M.mod.m;
                j["exceptional"] = cls.has_value();
                if (cls) j["exception"] = exception_to_json(*cls);
                std::cout << j.dump() << "\n";
            } else {
                std::cout << (cls ? exception_line(*cls) : std::string("NONE")) << "\n";
            }
            return cls ? 2 : 0;
        }
        if (c_spectrum->parsed()) {
            ZMultiset M = parse_multiset(read_input(input, file));
            Spectrum s = spectrum(M, oracle_cap);
            if (as_json) {
                json j;
                j["v"] = 1;
                j["m"] = M.mod.m;
                j["spectrum"] = s.values();
                std::cout << j.dump() << "\n";
            } else {
                std::cout << "{";
                auto vals = s.values();
                for (size_t i = 0; i < vals.size(); ++i) std::cout << (i ? ", " : "") << vals[i];
                std::cout << "}\n";
            }
            return 0;
        }
        if (c_verify->parsed()) {
            std::string text = read_input("", cert_file);
            json doc = json::parse(text);
            bool ok = verify_json(doc);
            std::cout << (ok ? "VALID" : "INVALID") << "\n";
            return ok ? 0 : 1;
        }
        if (c_census->parsed()) {
            CensusOptions opts;
            opts.workers = workers;
            opts.oracle_cap = oracle_cap;
            opts.seed = seed;
            opts.reduce_symmetry = reduce_symmetry;
            CensusReport rep = random_count > 0 ? random_census(census_m, random_count, opts)
                                                : run_census(census_m, opts);
            write_report_jsonl(rep, out_dir);
            append_summary_csv(rep, out_dir);
            std::cout << "m=" << rep.m << " total=" << rep.total << " zero=" << rep.zero_solved
                      << " homogeneous=" << rep.homogeneous
                      << " inhomogeneous=" << rep.inhomogeneous
                      << " mismatches=" << rep.mismatches << " fallbacks=" << rep.fallbacks
                      << " violations=" << rep.conjecture_violations << " seconds=" << rep.seconds
                      << "\n";
            return (rep.mismatches == 0 && rep.conjecture_violations == 0) ? 0 : 1;
        }
        if (c_bench->parsed()) {
            std::mt19937_64 rng(seed);
            std::vector<double> times;
            times.reserve(bench_count);
            SolveOptions opts;
            opts.seed = seed;
            opts.oracle_cap = oracle_cap;
            i64 solved = 0, exceptional = 0;
            auto t0 = std::chrono::steady_clock::now();
            for (i64 i = 0; i < bench_count; ++i) {
                std::vector<i64> vals(bench_m);
                for (auto& v : vals) v = (i64)(rng() % (u64)bench_m);
                ZMultiset M = ZMultiset::from_values(bench_m, std::move(vals));
                auto s0 = std::chrono::steady_clock::now();
                auto out = solve(M, opts);
                times.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count());
                if (out.status == SolveStatus::Solved) ++solved;
                if (out.status == SolveStatus::Exceptional) ++exceptional;
            }
            double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::sort(times.begin(), times.end());
            auto at = [&](double f) { return times[(size_t)(f * (times.size() - 1))]; };
            std::cout << "m=" << bench_m << " instances=" << bench_count
                      << " solved=" << solved << " exceptional=" << exceptional
                      << " rate=" << (bench_count / wall) << "/s p50=" << at(0.5)
                      << "s p99=" << at(0.99) << "s\n";
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
