#include <doctest.h>

#include "permsum/io.hpp"
#include "permsum/oracle.hpp"

using namespace permsum;
using nlohmann::json;

TEST_CASE("multiset parsing and its error messages") {
    auto M = parse_multiset("6: 1,1,1,1,2,0");
    CHECK(M.mod.m == 6);
    CHECK(M.elems == std::vector<i64>{0, 1, 1, 1, 1, 2});

    // whitespace-insensitive; values reduced mod m
    auto M2 = parse_multiset("  5 :  7 , -1 , 0, 2,4 ");
    CHECK(M2.elems == std::vector<i64>{0, 2, 2, 4, 4});

    CHECK_THROWS_WITH_AS(parse_multiset("6: 1,1,1,1,1"), doctest::Contains("cardinality"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_multiset("6: 1,1,1,1,x,0"), doctest::Contains("'x'"),
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_multiset("nope"), std::invalid_argument);
    CHECK_THROWS_AS(parse_multiset("0:"), std::invalid_argument);

    CHECK(parse_multiset(format_multiset(M)).elems == M.elems);
}

TEST_CASE("solve json round-trips through verify") {
    for (const char* text : {"6: 1,1,1,1,2,0", "6: 1,1,1,1,1,1", "5: 1,1,1,2,0", "9: 0,0,0,3,3,3,6,6,6"}) {
        ZMultiset M = parse_multiset(text);
        auto out = solve(M);
        json j = outcome_to_json(out, M, true);
        CHECK(j["v"] == 1);
        CHECK(verify_json(j));
    }
}

TEST_CASE("verify rejects tampered certificates") {
    ZMultiset M = parse_multiset("6: 1,1,1,1,2,0");
    auto out = solve(M);
    REQUIRE(out.status == SolveStatus::Solved);
    json j = certificate_to_json(*out.certificate, M);
    CHECK(verify_json(j));

    json off = j;
    off["value"] = 1;
    CHECK(!verify_json(off));

    json swapped = j;
    swapped["arrangement"][0] = mod_norm(j["arrangement"][0].get<i64>() + 1, 6);
    CHECK(!verify_json(swapped));

    json badver = j;
    badver["v"] = 2;
    CHECK_THROWS_AS(verify_json(badver), std::invalid_argument);
}

TEST_CASE("exceptional outcomes verify against the classifier") {
    ZMultiset M = parse_multiset("6: 1,1,1,1,1,1");
    auto out = solve(M);
    REQUIRE(out.status == SolveStatus::Exceptional);
    json j = outcome_to_json(out, M, false);
    CHECK(verify_json(j));
    j["exception"]["c"] = 3;
    CHECK(!verify_json(j));
}

TEST_CASE("trace json carries the step schema") {
    ZMultiset M = parse_multiset("6: 1,1,1,1,2,0");
    auto out = solve(M);
    json j = trace_to_json(out.trace);
    REQUIRE(j["steps"].is_array());
    REQUIRE(!j["steps"].empty());
    for (auto& s : j["steps"]) {
        CHECK(s.contains("step"));
        CHECK(s.contains("anchor"));
        CHECK(s.contains("positions"));
        CHECK(s.contains("phi_after"));
    }
}
