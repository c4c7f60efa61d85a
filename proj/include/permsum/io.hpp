#pragma once

// Text and JSON surfaces: the `m: a1,a2,...,am` multiset format and the
// versioned JSON encodings consumed by the command line tool.

#include <string>

#include <json.hpp>

#include "permsum/solver.hpp"

namespace permsum {

// Grammar: <m> ':' <int> (',' <int>)*  -- whitespace-insensitive, 64-bit
// integers reduced mod m. Throws std::invalid_argument naming the offending
// token on malformed input or a cardinality mismatch.
ZMultiset parse_multiset(const std::string& text);

std::string format_multiset(const ZMultiset& M);

nlohmann::json certificate_to_json(const SumCertificate& cert, const ZMultiset& parent);
nlohmann::json exception_to_json(const ExceptionalStructure& e);
nlohmann::json trace_to_json(const Trace& trace);
nlohmann::json outcome_to_json(const SolveOutcome& out, const ZMultiset& M, bool include_trace);

// Re-checks a serialized certificate or solve outcome: a "zero" outcome must
// verify against its multiset, an "exceptional" one must match the
// classifier. Returns false on any mismatch; throws on malformed documents.
bool verify_json(const nlohmann::json& doc);

}  // namespace permsum
