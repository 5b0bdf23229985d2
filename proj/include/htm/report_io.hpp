#pragma once

#include <string>

#include "htm/lvalue.hpp"
#include "htm/moments.hpp"

namespace htm {

// All floating-point output is printed with 17 significant digits so that
// parse(emit(x)) == x bit-for-bit.
std::string format_double(double x);

// JSON document for one moment run.  Timings are included only when
// with_timings is set (they are wall-clock and would break the byte-identity
// guarantee across thread counts).
std::string moment_report_to_json(const MomentReport& r, bool with_timings = false);
MomentReport moment_report_from_json(const std::string& json_text);

std::string lvalue_result_to_json(const LValueResult& r, double fe_residual_value);

// Frozen CSV schema for q-range sweeps.  Header:
//   # schema=1
//   q,direct,double_sum,diagonal,off_diagonal,small_div,large_div,main_term,
//   ratio,condition_lhs,condition_rhs,divisor_condition_sum
std::string moment_csv_header();
std::string moment_csv_row(const MomentReport& r);

// Equality on every deterministic field (round-trip checks).
bool reports_equal(const MomentReport& a, const MomentReport& b);

}  // namespace htm
