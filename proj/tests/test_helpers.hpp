#pragma once

#include <cstdint>
#include <random>

#include "htm/eigenform.hpp"

// Shared delta table for the unit suite, built once.
inline const htm::EigenformCoefficients& test_delta() {
    static htm::EigenformCoefficients coeffs = htm::delta_coefficients(1200000);
    return coeffs;
}

// Deterministic RNG for property-style tests.
inline std::mt19937_64& test_rng() {
    static std::mt19937_64 rng(0x5eed5eedULL);
    return rng;
}
