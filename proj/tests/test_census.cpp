#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "permsum/census.hpp"

using namespace permsum;

TEST_CASE("multiset counting and unranking") {
    CHECK(count_multisets(2) == 3);
    CHECK(count_multisets(3) == 10);
    CHECK(count_multisets(10) == 92378);

    for (i64 m : {2, 3, 4, 5}) {
        i64 total = count_multisets(m);
        std::vector<std::vector<i64>> listed;
        enumerate_multisets(m, 0, total, [&](const std::vector<i64>& v) { listed.push_back(v); });
        CHECK((i64)listed.size() == total);
        for (i64 r = 0; r < total; ++r) {
            CHECK(unrank_multiset(m, r) == listed[r]);
            for (i64 t = 1; t < m; ++t) CHECK(listed[r][t - 1] <= listed[r][t]);
        }
        // strictly increasing lexicographically
        for (i64 r = 1; r < total; ++r) CHECK(listed[r - 1] < listed[r]);
    }
}

TEST_CASE("census m=2 hand-checked") {
    auto rep = run_census(2);
    CHECK(rep.total == 3);
    CHECK(rep.zero_solved == 2);
    CHECK(rep.homogeneous == 1);
    CHECK(rep.inhomogeneous == 0);
    CHECK(rep.mismatches == 0);
    CHECK(rep.fallbacks == 0);
    CHECK(rep.conjecture_violations == 0);
}

TEST_CASE("census m=5 matches the closed-form pattern count") {
    auto rep = run_census(5);
    CHECK(rep.total == 126);
    CHECK(rep.inhomogeneous == 10);  // 5 choices of a, b in {1, 2}
    CHECK(rep.homogeneous == 0);
    CHECK(rep.zero_solved == 116);
    CHECK(rep.mismatches == 0);
    CHECK(rep.fallbacks == 0);
    CHECK(rep.conjecture_violations == 0);
}

TEST_CASE("census m=6 homogeneous count is stars-and-bars") {
    auto rep = run_census(6);
    CHECK(rep.total == count_multisets(6));
    CHECK(rep.homogeneous == 28);  // multisets over the three odd residues
    CHECK(rep.mismatches == 0);
    CHECK(rep.fallbacks == 0);
    CHECK(rep.conjecture_violations == 0);
}

TEST_CASE("conjecture check is empty for small m") {
    CHECK(conjecture_check(3).empty());
    CHECK(conjecture_check(4).empty());
}

TEST_CASE("worker count does not change the report") {
    CensusOptions one;
    one.workers = 1;
    CensusOptions four;
    four.workers = 4;
    auto a = run_census(6, one);
    auto b = run_census(6, four);
    CHECK(a.total == b.total);
    CHECK(a.zero_solved == b.zero_solved);
    CHECK(a.homogeneous == b.homogeneous);
    CHECK(a.inhomogeneous == b.inhomogeneous);
    CHECK(a.mismatches == b.mismatches);
    CHECK(a.conjecture_violations == b.conjecture_violations);
}

TEST_CASE("symmetry-reduced census reconstructs the full counts for odd m") {
    CensusOptions opts;
    opts.reduce_symmetry = true;
    auto red = run_census(5, opts);
    auto full = run_census(5);
    CHECK(red.orbit_total == full.total);
    CHECK(red.zero_solved == full.zero_solved);
    CHECK(red.inhomogeneous == full.inhomogeneous);
    CHECK(red.total < full.total);
}

TEST_CASE("random census tier runs clean") {
    CensusOptions opts;
    opts.seed = 9;
    auto rep = random_census(13, 300, opts);
    CHECK(rep.total == 300);
    CHECK(rep.mismatches == 0);
    CHECK(rep.fallbacks == 0);
    CHECK(rep.conjecture_violations == 0);
}

TEST_CASE("report files land on disk") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "permsum-census-test";
    fs::remove_all(dir);
    auto rep = run_census(4);
    write_report_jsonl(rep, dir.string());
    append_summary_csv(rep, dir.string());
    CHECK(fs::exists(dir / "census-m04.jsonl"));
    CHECK(fs::exists(dir / "census-summary.csv"));
    std::ifstream in(dir / "census-m04.jsonl");
    std::string line;
    std::getline(in, line);
    CHECK(line.find("\"summary\"") != std::string::npos);
    CHECK(line.find("\"mismatches\":0") != std::string::npos);
    fs::remove_all(dir);
}
