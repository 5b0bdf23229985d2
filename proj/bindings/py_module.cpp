// Python bindings for the main operations: coefficients, characters,
// kernels, L-values and moment reports.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "htm/arith.hpp"
#include "htm/characters.hpp"
#include "htm/eigenform.hpp"
#include "htm/lvalue.hpp"
#include "htm/moments.hpp"
#include "htm/report_io.hpp"
#include "htm/special_functions.hpp"

namespace py = pybind11;
using namespace htm;

namespace {

py::object tau_as_int(const EigenformCoefficients& c, std::uint64_t n) {
    if (!c.has_exact_tau() || n == 0 || n > c.length())
        throw py::index_error("tau index out of range");
    __int128 t = c.tau[n];
    bool neg = t < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(t) : t;
    std::uint64_t lo = static_cast<std::uint64_t>(u);
    std::uint64_t hi = static_cast<std::uint64_t>(u >> 64);
    py::object v = py::cast(hi);
    v = v.attr("__lshift__")(64).attr("__or__")(py::cast(lo));
    if (neg) v = v.attr("__neg__")();
    return v;
}

py::dict report_to_dict(const MomentReport& r) {
    py::dict d;
    d["q"] = r.q;
    d["direct"] = r.direct;
    d["double_sum"] = r.double_sum;
    d["diagonal_part"] = r.diagonal_part;
    d["off_diagonal_part"] = r.off_diagonal_part;
    d["small_divisor_part"] = r.small_divisor_part;
    d["large_divisor_part"] = r.large_divisor_part;
    d["main_term"] = r.main_term;
    d["K_used"] = r.K_used;
    d["ratio"] = r.ratio;
    d["diagonal_leading"] = r.diagonal_leading;
    d["neglected_mass"] = r.neglected_mass;
    d["small_divisor_count"] = r.small_divisor_count;
    d["condition_lhs"] = r.condition_lhs;
    d["condition_rhs"] = r.condition_rhs;
    d["condition_holds"] = r.condition_holds;
    d["divisor_condition_sum"] = r.divisor_condition_sum;
    d["tol"] = r.tol;
    d["truncation_N"] = r.truncation_N;
    d["table_length"] = r.table_length;
    return d;
}

}  // namespace

PYBIND11_MODULE(htmoments, m) {
    m.doc() = "Dirichlet twists of a level-1 eigenform: central L-values and second moments";

    m.def("factorize", [](std::uint64_t n) {
        Factorization f = factorize(n);
        return f.factors;
    });
    m.def("psi", [](std::uint64_t q) {
        Rational r = psi(factorize(q));
        return py::make_tuple(r.num, r.den);
    });
    m.def("primitive_character_count",
          [](std::uint64_t q) { return primitive_character_count(factorize(q)); });
    m.def("divisor_condition_sum",
          [](std::uint64_t q) { return divisor_condition_sum(factorize(q)); });
    m.def("check_assumption", [](std::uint64_t q) {
        ConditionReport c = check_assumption(factorize(q));
        py::dict d;
        d["q"] = c.q;
        d["x"] = c.x_threshold;
        d["lhs"] = c.lhs;
        d["rhs"] = c.rhs;
        d["holds"] = c.holds;
        return d;
    });

    py::class_<EigenformCoefficients>(m, "EigenformCoefficients")
        .def_property_readonly("weight", [](const EigenformCoefficients& c) { return c.weight; })
        .def_property_readonly("length", &EigenformCoefficients::length)
        .def("tau", &tau_as_int)
        .def("a", [](const EigenformCoefficients& c, std::uint64_t n) {
            if (n == 0 || n > c.length()) throw py::index_error("index out of range");
            return c.a[n];
        });
    m.def("delta_coefficients", &delta_coefficients, py::arg("N"));
    m.def("estimate_K", &estimate_K, py::arg("coeffs"), py::arg("cutoff"));
    m.def("verify_deligne", &verify_deligne);

    py::class_<DirichletCharacter>(m, "DirichletCharacter")
        .def_property_readonly("modulus", &DirichletCharacter::modulus)
        .def_property_readonly("index", &DirichletCharacter::index)
        .def_property_readonly("conductor", &DirichletCharacter::conductor)
        .def_property_readonly("is_primitive", &DirichletCharacter::is_primitive)
        .def_property_readonly("is_real", &DirichletCharacter::is_real)
        .def_property_readonly("gauss_sum", &DirichletCharacter::gauss_sum)
        .def_property_readonly("parity", &DirichletCharacter::parity)
        .def("conjugate", &DirichletCharacter::conjugate)
        .def("__call__",
             [](const DirichletCharacter& chi, std::int64_t n) { return chi(n); });

    py::class_<CharacterGroup>(m, "CharacterGroup")
        .def(py::init<std::uint64_t>(), py::arg("q"))
        .def_property_readonly("modulus", &CharacterGroup::modulus)
        .def_property_readonly("order", &CharacterGroup::order)
        .def("character", &CharacterGroup::character)
        .def("primitive_count", &CharacterGroup::primitive_count_by_enumeration);
    m.def("root_number", &root_number, py::arg("chi"), py::arg("weight"));
    m.def("orthogonality_rhs", [](std::int64_t n, std::int64_t m, std::uint64_t q) {
        return orthogonality_rhs(n, m, factorize(q));
    });

    m.def("kernel_v",
          [](double x, int weight) { return kernel_v(x, weight); },
          py::arg("x"), py::arg("weight") = 12);
    m.def("kernel_w",
          [](std::complex<double> s, double x, int weight) { return kernel_w(s, x, weight); },
          py::arg("s"), py::arg("x"), py::arg("weight") = 12);
    m.def("log_gamma", &log_gamma);

    m.def(
        "l_value",
        [](const EigenformCoefficients& coeffs, std::uint64_t q, std::uint64_t index,
           std::complex<double> s, double tol) {
            CharacterGroup G(q);
            auto chi = G.character(index);
            LValueResult r = l_value_afe(coeffs, chi, s, tol);
            py::dict d;
            d["value"] = r.value;
            d["truncation_N"] = r.truncation_N;
            d["tail_bound"] = r.tail_bound;
            d["fe_residual"] = fe_residual(coeffs, chi, s, tol);
            return d;
        },
        py::arg("coeffs"), py::arg("q"), py::arg("index"),
        py::arg("s") = std::complex<double>(0.0, 0.0), py::arg("tol") = 1e-8);

    m.def("second_moment_direct", &second_moment_direct, py::arg("coeffs"), py::arg("q"),
          py::arg("tol") = 1e-6, py::arg("threads") = 1);
    m.def(
        "moment_report",
        [](const EigenformCoefficients& coeffs, std::uint64_t q, double tol, unsigned threads) {
            return report_to_dict(moment_report(coeffs, q, tol, threads));
        },
        py::arg("coeffs"), py::arg("q"), py::arg("tol") = 1e-6, py::arg("threads") = 1);
    m.def("main_term",
          [](const EigenformCoefficients& coeffs, std::uint64_t q) { return main_term(coeffs, q); },
          py::arg("coeffs"), py::arg("q"));

#ifdef VERSION_INFO
#define STR2(x) #x
#define STR(x) STR2(x)
    m.attr("__version__") = STR(VERSION_INFO);
#else
    m.attr("__version__") = "0.1.0";
#endif
}
