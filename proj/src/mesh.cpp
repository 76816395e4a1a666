#include "guessbound/mesh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace guessbound {

Mesh build_mesh(std::uint64_t n, double q) {
    if (n < 1) throw std::invalid_argument("corpus size must be >= 1");
    if (!(q > 1.0)) throw std::invalid_argument("mesh ratio q must be > 1");
    Mesh mesh;
    mesh.q = q;
    mesh.n_ref = n;
    const double log_xl = -std::log(1e4 * double(n));
    const double log_q = std::log(q);
    mesh.l = std::size_t(std::floor(-log_xl / log_q)) + 1;
    mesh.values.resize(mesh.l);
    // x_j = q^(l-j) * x_l, largest first; log-space keeps the ratio exact
    for (std::size_t j = 1; j <= mesh.l; ++j)
        mesh.values[j - 1] = std::exp(double(mesh.l - j) * log_q + log_xl);
    return mesh;
}

double log_bpdf(std::uint64_t i, std::uint64_t n, double x) {
    if (i > n) throw std::invalid_argument("bpdf requires i <= n");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("bpdf requires x in [0,1]");
    if (x == 0.0) return i == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (x == 1.0) return i == n ? 0.0 : -std::numeric_limits<double>::infinity();
    const double nd = double(n), id = double(i);
    const double log_choose =
        std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0);
    return log_choose + id * std::log(x) + (nd - id) * std::log1p(-x);
}

double bpdf(std::uint64_t i, std::uint64_t n, double x) {
    const double lv = log_bpdf(i, n, x);
    if (lv < -700.0) return 0.0;  // underflow floor
    return std::exp(lv);
}

double derive_eps3(double q, double xhat, std::uint64_t n, std::uint64_t i) {
    if (!(q > 1.0)) throw std::invalid_argument("q must be > 1");
    if (!(q * xhat < 1.0)) throw std::invalid_argument("derive_eps3 requires q*xhat < 1");
    if (!(xhat >= double(i + 1) / double(n + 1)))
        throw std::invalid_argument("derive_eps3 requires xhat >= (i+1)/(n+1)");
    const double log_ratio = std::log1p(-xhat) - std::log1p(-q * xhat);
    const double eps3 =
        std::expm1(-double(i + 1) * std::log(q) + (double(n) - double(i)) * log_ratio);
    if (!(eps3 > 0.0 && eps3 < 1.0))
        throw std::domain_error(
            "eps3 = " + std::to_string(eps3) +
            " outside (0,1); choose a different xhat (got xhat*n = " +
            std::to_string(xhat * double(n)) + ")");
    return eps3;
}

}  // namespace guessbound
