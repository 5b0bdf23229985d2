#include "htm/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace htm {

std::string format_double(double x) {
    char buf[40];
    if (std::isnan(x)) return "null";
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

void put(std::ostringstream& os, const char* key, double v, bool comma = true) {
    os << "\"" << key << "\": " << format_double(v);
    if (comma) os << ",\n  ";
}

void put_u64(std::ostringstream& os, const char* key, std::uint64_t v, bool comma = true) {
    os << "\"" << key << "\": " << v;
    if (comma) os << ",\n  ";
}

double num_or_nan(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j[key].get<double>();
}

}  // namespace

std::string moment_report_to_json(const MomentReport& r, bool with_timings) {
    std::ostringstream os;
    os << "{\n  ";
    put_u64(os, "q", r.q);
    put(os, "direct", r.direct);
    put(os, "double_sum", r.double_sum);
    put(os, "diagonal_part", r.diagonal_part);
    put(os, "off_diagonal_part", r.off_diagonal_part);
    put(os, "small_divisor_part", r.small_divisor_part);
    put(os, "large_divisor_part", r.large_divisor_part);
    put(os, "main_term", r.main_term);
    put(os, "K_used", r.K_used);
    put(os, "ratio", r.ratio);
    put(os, "diagonal_leading", r.diagonal_leading);
    put(os, "neglected_mass", r.neglected_mass);
    put_u64(os, "small_divisor_count", static_cast<std::uint64_t>(r.small_divisor_count));
    put(os, "condition_x", r.condition_x);
    put(os, "condition_lhs", r.condition_lhs);
    put(os, "condition_rhs", r.condition_rhs);
    os << "\"condition_holds\": " << (r.condition_holds ? "true" : "false") << ",\n  ";
    put(os, "divisor_condition_sum", r.divisor_condition_sum);
    if (r.ratio_with_K_override) put(os, "ratio_with_K_override", *r.ratio_with_K_override);
    put(os, "tol", r.tol);
    put_u64(os, "truncation_N", r.truncation_N);
    if (with_timings) {
        put_u64(os, "table_length", r.table_length);
        os << "\"runtime_seconds\": {";
        bool first = true;
        for (const auto& [k, v] : r.runtime_seconds) {
            if (!first) os << ", ";
            os << "\"" << k << "\": " << format_double(v);
            first = false;
        }
        os << "}\n}";
    } else {
        put_u64(os, "table_length", r.table_length, false);
        os << "\n}";
    }
    return os.str();
}

MomentReport moment_report_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    MomentReport r;
    r.q = j["q"].get<std::uint64_t>();
    r.direct = j["direct"].get<double>();
    r.double_sum = j["double_sum"].get<double>();
    r.diagonal_part = j["diagonal_part"].get<double>();
    r.off_diagonal_part = j["off_diagonal_part"].get<double>();
    r.small_divisor_part = j["small_divisor_part"].get<double>();
    r.large_divisor_part = j["large_divisor_part"].get<double>();
    r.main_term = j["main_term"].get<double>();
    r.K_used = j["K_used"].get<double>();
    r.ratio = j["ratio"].get<double>();
    r.diagonal_leading = j["diagonal_leading"].get<double>();
    r.neglected_mass = j["neglected_mass"].get<double>();
    r.small_divisor_count = j["small_divisor_count"].get<int>();
    r.condition_x = num_or_nan(j, "condition_x");
    r.condition_lhs = num_or_nan(j, "condition_lhs");
    r.condition_rhs = num_or_nan(j, "condition_rhs");
    r.condition_holds = j["condition_holds"].get<bool>();
    r.divisor_condition_sum = j["divisor_condition_sum"].get<double>();
    if (j.contains("ratio_with_K_override"))
        r.ratio_with_K_override = j["ratio_with_K_override"].get<double>();
    r.tol = j["tol"].get<double>();
    r.truncation_N = j["truncation_N"].get<std::uint64_t>();
    r.table_length = j["table_length"].get<std::uint64_t>();
    return r;
}

std::string lvalue_result_to_json(const LValueResult& r, double fe_residual_value) {
    std::ostringstream os;
    os << "{\n  ";
    put_u64(os, "q", r.q);
    put(os, "value_re", r.value.real());
    put(os, "value_im", r.value.imag());
    put(os, "abs_value", std::abs(r.value));
    put(os, "s_im", r.s.imag());
    put_u64(os, "truncation_N", r.truncation_N);
    put(os, "tail_bound", r.tail_bound);
    put(os, "epsilon_trunc", r.epsilon_trunc);
    put(os, "contour_c", r.contour_c);
    put(os, "contour_T", r.contour_T);
    put(os, "contour_h", r.contour_h);
    put(os, "fe_residual", fe_residual_value, false);
    os << "\n}";
    return os.str();
}

std::string moment_csv_header() {
    return "# schema=1\n"
           "q,direct,double_sum,diagonal,off_diagonal,small_div,large_div,main_term,ratio,"
           "condition_lhs,condition_rhs,divisor_condition_sum\n";
}

std::string moment_csv_row(const MomentReport& r) {
    std::ostringstream os;
    auto nv = [](double v) { return std::isnan(v) ? std::string("nan") : format_double(v); };
    os << r.q << ',' << format_double(r.direct) << ',' << format_double(r.double_sum) << ','
       << format_double(r.diagonal_part) << ',' << format_double(r.off_diagonal_part) << ','
       << format_double(r.small_divisor_part) << ',' << format_double(r.large_divisor_part) << ','
       << format_double(r.main_term) << ',' << format_double(r.ratio) << ','
       << nv(r.condition_lhs) << ',' << nv(r.condition_rhs) << ','
       << format_double(r.divisor_condition_sum) << '\n';
    return os.str();
}

bool reports_equal(const MomentReport& a, const MomentReport& b) {
    auto eq = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    bool override_eq =
        a.ratio_with_K_override.has_value() == b.ratio_with_K_override.has_value() &&
        (!a.ratio_with_K_override || eq(*a.ratio_with_K_override, *b.ratio_with_K_override));
    return a.q == b.q && eq(a.direct, b.direct) && eq(a.double_sum, b.double_sum) &&
           eq(a.diagonal_part, b.diagonal_part) && eq(a.off_diagonal_part, b.off_diagonal_part) &&
           eq(a.small_divisor_part, b.small_divisor_part) &&
           eq(a.large_divisor_part, b.large_divisor_part) && eq(a.main_term, b.main_term) &&
           eq(a.K_used, b.K_used) && eq(a.ratio, b.ratio) &&
           eq(a.diagonal_leading, b.diagonal_leading) && eq(a.neglected_mass, b.neglected_mass) &&
           a.small_divisor_count == b.small_divisor_count && eq(a.condition_x, b.condition_x) &&
           eq(a.condition_lhs, b.condition_lhs) && eq(a.condition_rhs, b.condition_rhs) &&
           a.condition_holds == b.condition_holds &&
           eq(a.divisor_condition_sum, b.divisor_condition_sum) && override_eq &&
           eq(a.tol, b.tol) && a.truncation_N == b.truncation_N &&
           a.table_length == b.table_length;
}

}  // namespace htm
