// htm: central values of Dirichlet twists L(f x chi, 1/2) for a level-1
// eigenform (delta by default) and second-moment experiments over primitive
// characters.
//
// Subcommands:
//   coeffs   write tau(n)/a(n) tables (CSV + binary cache)
//   chars    character table for one modulus
//   lvalue   one central L-value with functional-equation residual
//   moment   full moment report (single q: JSON; ranges: CSV)
//   predict  main term K P_q(1) psi(q) q log q only
//   check    sparse-prime condition and divisor-sum diagnostics
//
// Exit codes: 0 ok, 1 config error, 2 I/O error, 3 resource budget.

#include <algorithm>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "htm/arith.hpp"
#include "htm/characters.hpp"
#include "htm/eigenform.hpp"
#include "htm/lvalue.hpp"
#include "htm/moments.hpp"
#include "htm/parallel.hpp"
#include "htm/report_io.hpp"

namespace {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::uint64_t q = 0;
    std::string q_range;
    std::uint64_t N = 0;  // coefficient table length (0 = auto)
    int weight = 12;
    std::string coeff_file;   // prime a_f(p) list; empty = builtin delta
    std::string tau_cache;    // binary tau cache to load/store
    double tol = 0.0;         // 0 = per-command default
    unsigned threads = htm::default_thread_count();
    std::string format = "json";
    std::string output;       // empty = stdout
    std::optional<double> K_override;
    std::uint64_t char_index = 0;
    double s_im = 0.0;
    bool with_timings = false;
    std::uint64_t max_table = 10000000;  // budget on table length
};

// line-based "key = value" config file; flags given on the command line win
void apply_config_file(const std::string& path, Options& opt, const CLI::App& app) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string line;
    auto given = [&](const std::string& flag) { return app.count(flag) > 0; };
    while (std::getline(in, line)) {
        std::size_t pos = line.find_first_not_of(" \t");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw IoError("malformed config line: " + line);
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key == "tol" && !given("--tol")) opt.tol = std::stod(val);
        else if (key == "threads" && !given("--threads")) opt.threads = std::stoul(val);
        else if (key == "format" && !given("--format")) opt.format = val;
        else if (key == "weight" && !given("--weight")) opt.weight = std::stoi(val);
        else if (key == "N" && !given("--N")) opt.N = std::stoull(val);
        else if (key == "coeff-file" && !given("--coeff-file")) opt.coeff_file = val;
        else if (key == "tau-cache" && !given("--tau-cache")) opt.tau_cache = val;
        else if (key == "K" && !given("--K")) opt.K_override = std::stod(val);
        else if (key == "max-table" && !given("--max-table")) opt.max_table = std::stoull(val);
        // unknown keys ignored
    }
}

void validate(const Options& opt) {
    if (opt.tol < 1e-12 || opt.tol > 1e-3)
        throw std::invalid_argument("tol must lie in [1e-12, 1e-3]");
    if (opt.threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (opt.format != "json" && opt.format != "csv")
        throw std::invalid_argument("format must be json or csv");
}

htm::EigenformCoefficients load_coefficients(const Options& opt, std::uint64_t needed) {
    if (needed > opt.max_table)
        throw BudgetError("required coefficient table (" + std::to_string(needed) +
                          ") exceeds the configured budget (" + std::to_string(opt.max_table) + ")");
    if (!opt.coeff_file.empty()) {
        auto primes = htm::load_prime_coefficients(opt.coeff_file);
        std::vector<std::uint64_t> warn;
        auto coeffs = htm::hecke_extend(primes, needed, opt.weight, &warn);
        for (auto p : warn)
            std::cerr << "warning: |a(" << p << ")| exceeds the Ramanujan bound 2\n";
        return coeffs;
    }
    if (!opt.tau_cache.empty()) {
        std::ifstream probe(opt.tau_cache);
        if (probe.good()) {
            auto cached = htm::load_tau_cache(opt.tau_cache);
            if (cached.length() >= needed && cached.weight == opt.weight) return cached;
        }
    }
    auto coeffs = htm::delta_coefficients(needed);
    if (!opt.tau_cache.empty()) htm::save_tau_cache(opt.tau_cache, coeffs);
    return coeffs;
}

void write_out(const Options& opt, const std::string& text) {
    if (opt.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.output);
    if (!out) throw IoError("cannot open output file " + opt.output);
    out << text;
    if (!out) throw IoError("write failed for " + opt.output);
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
    std::size_t colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("range must be lo:hi");
    std::uint64_t lo = std::stoull(text.substr(0, colon));
    std::uint64_t hi = std::stoull(text.substr(colon + 1));
    if (lo < 3 || hi < lo) throw std::invalid_argument("range must satisfy 3 <= lo <= hi");
    return {lo, hi};
}

std::string int128_str(__int128 t) {
    bool neg = t < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(t) : t;
    std::string digits;
    do {
        digits += char('0' + int(u % 10));
        u /= 10;
    } while (u);
    if (neg) digits += '-';
    std::reverse(digits.begin(), digits.end());
    return digits;
}

int cmd_coeffs(const Options& opt) {
    if (opt.N == 0) throw std::invalid_argument("coeffs: --N must be positive");
    auto coeffs = load_coefficients(opt, opt.N);
    std::ostringstream os;
    os << "# schema=1\nn,tau,a\n";
    for (std::uint64_t n = 1; n <= opt.N; ++n) {
        if (coeffs.has_exact_tau())
            os << n << ',' << int128_str(coeffs.tau[n]) << ',' << htm::format_double(coeffs.a[n])
               << '\n';
        else
            os << n << ",," << htm::format_double(coeffs.a[n]) << '\n';
    }
    write_out(opt, os.str());
    return 0;
}

int cmd_chars(const Options& opt) {
    if (opt.q == 0) throw std::invalid_argument("chars: --q required");
    htm::CharacterGroup G(opt.q);
    std::ostringstream os;
    os << "# schema=1\nindex,conductor,primitive,real,parity,gauss_re,gauss_im\n";
    for (std::uint64_t i = 0; i < G.order(); ++i) {
        auto chi = G.character(i);
        os << i << ',' << chi.conductor() << ',' << (chi.is_primitive() ? 1 : 0) << ','
           << (chi.is_real() ? 1 : 0) << ',' << chi.parity() << ','
           << htm::format_double(chi.gauss_sum().real()) << ','
           << htm::format_double(chi.gauss_sum().imag()) << '\n';
    }
    write_out(opt, os.str());
    return 0;
}

int cmd_lvalue(const Options& opt) {
    if (opt.q == 0) throw std::invalid_argument("lvalue: --q required");
    htm::CharacterGroup G(opt.q);
    if (opt.char_index >= G.order())
        throw std::invalid_argument("lvalue: character index out of range");
    auto chi = G.character(opt.char_index);
    if (!chi.is_primitive())
        throw std::invalid_argument("lvalue: character is not primitive (conductor " +
                                    std::to_string(chi.conductor()) + ")");
    std::complex<double> s(0.0, opt.s_im);
    std::uint64_t needed = htm::afe_required_length(opt.q, s, opt.tol, opt.weight);
    auto coeffs = load_coefficients(opt, needed);
    auto result = htm::l_value_afe(coeffs, chi, s, opt.tol);
    double residual = htm::fe_residual(coeffs, chi, s, opt.tol);
    write_out(opt, htm::lvalue_result_to_json(result, residual) + "\n");
    return 0;
}

htm::EigenformCoefficients coeffs_for_moment(const Options& opt, std::uint64_t q_max) {
    std::uint64_t needed = std::max<std::uint64_t>(
        htm::moment_required_length(q_max, opt.tol, opt.weight), 400000);
    // the double-sum route wants the whole V support when it fits the budget
    double support = htm::v_table(opt.weight).support_limit(1e-14);
    double want = support * static_cast<double>(q_max) * static_cast<double>(q_max);
    std::uint64_t cap = opt.max_table;
    if (opt.coeff_file.empty())  // exact tau overflows int128 past ~6.5e6
        cap = std::min<std::uint64_t>(cap, 6500000);
    needed = std::max(needed, static_cast<std::uint64_t>(
                                  std::min(want, static_cast<double>(cap))));
    needed = std::min(needed, cap);
    if (opt.N > 0) needed = std::max(needed, opt.N);
    return load_coefficients(opt, needed);
}

int cmd_moment(const Options& opt) {
    if (opt.q == 0 && opt.q_range.empty())
        throw std::invalid_argument("moment: --q or --q-range required");
    if (!opt.q_range.empty()) {
        auto [lo, hi] = parse_range(opt.q_range);
        auto coeffs = coeffs_for_moment(opt, hi);
        std::ostringstream os;
        os << htm::moment_csv_header();
        for (std::uint64_t q = lo; q <= hi; ++q) {
            auto rep = htm::moment_report(coeffs, q, opt.tol, opt.threads, opt.K_override);
            os << htm::moment_csv_row(rep);
        }
        write_out(opt, os.str());
        return 0;
    }
    if (opt.q < 3) throw std::invalid_argument("moment: q must be >= 3");
    auto coeffs = coeffs_for_moment(opt, opt.q);
    auto rep = htm::moment_report(coeffs, opt.q, opt.tol, opt.threads, opt.K_override);
    if (opt.format == "csv")
        write_out(opt, htm::moment_csv_header() + htm::moment_csv_row(rep));
    else
        write_out(opt, htm::moment_report_to_json(rep, opt.with_timings) + "\n");
    return 0;
}

int cmd_predict(const Options& opt) {
    if (opt.q == 0 && opt.q_range.empty())
        throw std::invalid_argument("predict: --q or --q-range required");
    auto coeffs = load_coefficients(opt, 400000);
    std::ostringstream os;
    std::uint64_t lo = opt.q, hi = opt.q;
    if (!opt.q_range.empty()) std::tie(lo, hi) = parse_range(opt.q_range);
    os << "# schema=1\nq,main_term,K_used,P_q1,psi\n";
    double K_default = htm::estimate_K_extrapolated(coeffs, 400000);
    for (std::uint64_t q = lo; q <= hi; ++q) {
        auto qf = htm::factorize(q);
        double K = opt.K_override ? *opt.K_override : K_default;
        double p1 = htm::euler_product_P(qf, 1.0, coeffs).at_s.real();
        os << q << ',' << htm::format_double(htm::main_term(coeffs, q, opt.K_override)) << ','
           << htm::format_double(K) << ',' << htm::format_double(p1) << ','
           << htm::format_double(htm::psi(qf).to_double()) << '\n';
    }
    write_out(opt, os.str());
    return 0;
}

int cmd_check(const Options& opt) {
    if (opt.q == 0) throw std::invalid_argument("check: --q required");
    if (opt.q < 3) throw std::invalid_argument("check: q must be >= 3");
    auto qf = htm::factorize(opt.q);
    std::ostringstream os;
    os << "{\n  \"q\": " << opt.q << ",\n  ";
    if (opt.q >= 17) {
        auto cr = htm::check_assumption(qf);
        os << "\"condition_x\": " << htm::format_double(cr.x_threshold) << ",\n  "
           << "\"condition_lhs\": " << htm::format_double(cr.lhs) << ",\n  "
           << "\"condition_rhs\": " << htm::format_double(cr.rhs) << ",\n  "
           << "\"condition_holds\": " << (cr.holds ? "true" : "false") << ",\n  ";
    } else {
        os << "\"condition_x\": null,\n  \"condition_lhs\": null,\n  "
           << "\"condition_rhs\": null,\n  \"condition_holds\": false,\n  ";
    }
    os << "\"divisor_condition_sum\": " << htm::format_double(htm::divisor_condition_sum(qf))
       << "\n}\n";
    write_out(opt, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirichlet twists of a level-1 eigenform: central L-values and second moments"};
    app.require_subcommand(1);

    Options opt;
    std::string config_path;
    double k_override_val = 0.0;
    CLI::Option* k_opt = nullptr;
    CLI::Option* k_opt2 = nullptr;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file");
        sub->add_option("--tol", opt.tol, "truncation tolerance");
        sub->add_option("--threads", opt.threads, "worker thread count (or HTM_THREADS)");
        sub->add_option("--format", opt.format, "output format: json|csv");
        sub->add_option("-o,--output", opt.output, "output path (default stdout)");
        sub->add_option("--N", opt.N, "coefficient table length");
        sub->add_option("--weight", opt.weight, "eigenform weight");
        sub->add_option("--coeff-file", opt.coeff_file, "prime coefficient file (p a_f(p) lines)");
        sub->add_option("--tau-cache", opt.tau_cache, "binary tau cache path");
        sub->add_option("--max-table", opt.max_table, "coefficient table budget");
    };

    CLI::App* c_coeffs = app.add_subcommand("coeffs", "write coefficient tables");
    add_common(c_coeffs);

    CLI::App* c_chars = app.add_subcommand("chars", "character table mod q");
    add_common(c_chars);
    c_chars->add_option("--q", opt.q, "modulus");

    CLI::App* c_lvalue = app.add_subcommand("lvalue", "one central L-value");
    add_common(c_lvalue);
    c_lvalue->add_option("--q", opt.q, "modulus");
    c_lvalue->add_option("--char", opt.char_index, "character index");
    c_lvalue->add_option("--s-im", opt.s_im, "imaginary part of s");

    CLI::App* c_moment = app.add_subcommand("moment", "second moment report");
    add_common(c_moment);
    c_moment->add_option("--q", opt.q, "modulus");
    c_moment->add_option("--q-range", opt.q_range, "inclusive range lo:hi");
    k_opt = c_moment->add_option("--K", k_override_val, "override the K constant");
    c_moment->add_flag("--timings", opt.with_timings, "include wall-clock timings in JSON");

    CLI::App* c_predict = app.add_subcommand("predict", "main term only");
    add_common(c_predict);
    c_predict->add_option("--q", opt.q, "modulus");
    c_predict->add_option("--q-range", opt.q_range, "inclusive range lo:hi");
    k_opt2 = c_predict->add_option("--K", k_override_val, "override the K constant");

    CLI::App* c_check = app.add_subcommand("check", "condition diagnostics");
    add_common(c_check);
    c_check->add_option("--q", opt.q, "modulus");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_path.empty()) apply_config_file(config_path, opt, *sub);
        if ((k_opt && k_opt->count()) || (k_opt2 && k_opt2->count()))
            opt.K_override = k_override_val;
        if (opt.tol == 0.0)
            opt.tol = (sub == c_moment || sub == c_predict) ? 1e-5 : 1e-8;
        validate(opt);
        if (sub == c_coeffs) return cmd_coeffs(opt);
        if (sub == c_chars) return cmd_chars(opt);
        if (sub == c_lvalue) return cmd_lvalue(opt);
        if (sub == c_moment) return cmd_moment(opt);
        if (sub == c_predict) return cmd_predict(opt);
        if (sub == c_check) return cmd_check(opt);
        return 1;
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
