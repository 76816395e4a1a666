#pragma once

#include <cstdint>
#include <vector>

namespace guessbound {

// Geometric probability grid x_1 > ... > x_l with ratio q and floor
// x_l = 1 / (10^4 * n_ref).
struct Mesh {
    std::vector<double> values;  // strictly decreasing, values[0] = x_1
    double q = 0.0;
    std::size_t l = 0;
    std::uint64_t n_ref = 0;

    double x(std::size_t j) const { return values[j - 1]; }  // 1-based, as in x_j
    double floor_value() const { return values.back(); }
};

Mesh build_mesh(std::uint64_t n, double q);

// Binomial pmf C(n,i) x^i (1-x)^(n-i), evaluated in log space.
// Underflow below exp(-700) returns exactly 0.
double bpdf(std::uint64_t i, std::uint64_t n, double x);
double log_bpdf(std::uint64_t i, std::uint64_t n, double x);

// eps3 = q^-(i+1) * ((1-xhat)/(1-q*xhat))^(n-i) - 1, in log space.
// Throws if the result leaves (0,1); callers should pick a different xhat.
double derive_eps3(double q, double xhat, std::uint64_t n, std::uint64_t i);

}  // namespace guessbound
