#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace qac {

/// Exact integer fraction with a strictly positive denominator.
///
/// Fractions are deliberately NOT reduced: a node that has merged two
/// half-sums holds 12/2, not 6/1, and traces must show it that way.
/// Equality is mathematical (cross-multiplication), so 12/2 == 24/4.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den < 1) throw std::invalid_argument("Fraction: denominator must be >= 1");
    }
};

/// Cross-multiplication equality. 128-bit intermediates, so the declared
/// value bounds (|num| <= ~1e13, den <= 1e4) are nowhere near overflow.
inline bool frac_eq(const Fraction& a, const Fraction& b) {
    return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
}

inline bool operator==(const Fraction& a, const Fraction& b) { return frac_eq(a, b); }
inline bool operator!=(const Fraction& a, const Fraction& b) { return !frac_eq(a, b); }

inline std::string to_string(const Fraction& f) {
    return std::to_string(f.num) + "/" + std::to_string(f.den);
}

/// Sum of the initial values over the node count, unreduced.
inline Fraction exact_average(std::span<const std::int64_t> initial_values) {
    if (initial_values.empty())
        throw std::invalid_argument("exact_average: empty value list");
    std::int64_t sum = 0;
    for (std::int64_t v : initial_values) sum += v;
    return Fraction(sum, static_cast<std::int64_t>(initial_values.size()));
}

/// S written uniquely as S = n*L + R with 0 <= R < n (floored division,
/// so the constraint holds for negative S too).
struct AverageDecomposition {
    std::int64_t sum = 0;        // S
    std::int64_t count = 1;      // n
    std::int64_t quotient = 0;   // L
    std::int64_t remainder = 0;  // R

    std::int64_t floor_average() const { return quotient; }
    std::int64_t ceil_average() const { return remainder == 0 ? quotient : quotient + 1; }
};

inline AverageDecomposition decompose(std::int64_t sum, std::int64_t count) {
    if (count < 1) throw std::invalid_argument("decompose: count must be >= 1");
    std::int64_t q = sum / count;
    std::int64_t r = sum % count;
    if (r < 0) {
        q -= 1;
        r += count;
    }
    return AverageDecomposition{sum, count, q, r};
}

} // namespace qac
