#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "guessbound/corpus.hpp"
#include "guessbound/lp.hpp"
#include "guessbound/mesh.hpp"
#include "guessbound/oracle.hpp"
#include "guessbound/schedule.hpp"

using namespace guessbound;

TEST_CASE("mesh invariants") {
    auto mesh = build_mesh(1000, 1.05);
    CHECK(mesh.floor_value() == doctest::Approx(1e-7).epsilon(1e-12));
    CHECK(mesh.values.front() <= 1.0);
    CHECK(mesh.values.front() > 1.0 / 1.05);  // one more step would exceed 1
    for (std::size_t j = 0; j + 1 < mesh.l; ++j)
        CHECK(mesh.values[j] / mesh.values[j + 1] == doctest::Approx(1.05).epsilon(1e-12));
    CHECK(mesh.x(mesh.l) == mesh.floor_value());
}

TEST_CASE("mesh frozen sizes") {
    // l = floor(ln(10^4 n) / ln q) + 1
    CHECK(build_mesh(1, 10.0).l == 5);            // ln(1e4)/ln(10) = 4
    CHECK(build_mesh(1, 10.0).x(1) == doctest::Approx(1.0));
    CHECK(build_mesh(100000, 1.05).l == 425);
    auto big = build_mesh(15268903, 1.002);
    CHECK(big.l == 12889);
    CHECK(big.floor_value() == doctest::Approx(6.549244e-12).epsilon(1e-6));
}

TEST_CASE("bpdf normalizes and matches closed forms") {
    for (std::uint64_t n : {10ull, 100ull, 1000ull}) {
        for (double x : {1e-6, 0.3, 0.99}) {
            double total = 0.0;
            for (std::uint64_t i = 0; i <= n; ++i) total += bpdf(i, n, x);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK(bpdf(0, 5, 0.5) == doctest::Approx(1.0 / 32.0));
    CHECK(bpdf(2, 4, 0.5) == doctest::Approx(6.0 / 16.0));
    // tiny-x regime: bpdf(0,n,x) = (1-x)^n without catastrophic cancellation
    const double x = 1e-8;
    const double n = 1e8;
    CHECK(bpdf(0, std::uint64_t(n), x) ==
          doctest::Approx(std::pow(1.0 - x, n)).epsilon(1e-6));
    CHECK(bpdf(0, 10, 0.0) == doctest::Approx(1.0));
    CHECK(bpdf(3, 10, 0.0) == doctest::Approx(0.0));
    CHECK(bpdf(10, 10, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("derive_eps3 behaves like the closed form and stays in (0,1)") {
    const std::uint64_t n = 100000;
    const double q = 1.002;
    for (std::size_t i = 0; i <= 4; ++i) {
        const double xhat = (7.0 + 3.0 * double(i)) / double(n);
        const double eps = derive_eps3(q, xhat, n, i);
        const double direct = std::pow(q, -double(i + 1)) *
                                  std::pow((1.0 - xhat) / (1.0 - q * xhat),
                                           double(n - i)) -
                              1.0;
        CHECK(eps == doctest::Approx(direct).epsilon(1e-9));
        CHECK(eps > 0.0);
        CHECK(eps < 1.0);
    }
    // eps3 grows with xhat at fixed i
    CHECK(derive_eps3(q, 20.0 / double(n), n, 0) >
          derive_eps3(q, 10.0 / double(n), n, 0));
    // too-small xhat is rejected outright
    CHECK_THROWS(derive_eps3(q, 1e-12, n, 0));
}

namespace {

FrequencyEncoding toy_encoding() {
    // 10000 samples: 4000 unique, 1500 pairs, 500 appearing 6 times
    FrequencyEncoding enc;
    enc.f_of_f = {{1, 4000}, {2, 1500}, {6, 500}};
    enc.n = 10000;
    enc.distinct = 6000;
    enc.unique = 4000;
    return enc;
}

LpParams toy_params(std::uint64_t n, double q) {
    return LpParams::make(n, q, 4, {0.00009, 0.000165, 0.00175, 0.00175, 0.0012},
                          {7.0, 11.0, 14.0, 16.3, 18.5});
}

}  // namespace

TEST_CASE("task structure: variables, rows, objective") {
    auto enc = toy_encoding();
    auto mesh = build_mesh(enc.n, 1.05);
    auto params = toy_params(enc.n, 1.05);

    auto lp1 = build_lp1(50, 1, mesh, enc, 3, params);
    CHECK(lp1.num_vars() == mesh.l + 1);  // h_1..h_l, c
    // budget + (i'+1) boxed bands + mass + c-coupling
    CHECK(lp1.rows.size() == 1 + 5 + 1 + 1);
    CHECK(lp1.rows[0].lo == doctest::Approx(50.0));
    CHECK(lp1.rows[0].up == doctest::Approx(50.0));
    CHECK(lp1.rows[0].coeffs[0] == 1.0);  // h_1 (j < idx)
    CHECK(lp1.rows[0].coeffs[1] == 1.0);  // h_2
    CHECK(lp1.rows[0].coeffs[2] == 0.0);  // h_3 not in the budget
    CHECK(lp1.rows[0].coeffs[mesh.l] == 1.0);  // c
    CHECK(lp1.objective[0] == doctest::Approx(mesh.x(1)));
    CHECK(lp1.objective[mesh.l] == doctest::Approx(mesh.x(3)));

    auto lower = build_lp_lower(50, mesh, enc, 3, params);
    CHECK(lower.num_vars() == mesh.l + 2);  // + p
    // budget + 2 rows per band + 2 mass rows + c-coupling
    CHECK(lower.rows.size() == 1 + 10 + 2 + 1);
    CHECK(lower.var_up[mesh.l + 1] == doctest::Approx(1.0));  // p in [0,1]

    auto upper = build_lp_upper(50, mesh, enc, 3, params);
    CHECK(upper.sense == LpSense::maximize);
    CHECK(lower.sense == LpSense::minimize);
}

TEST_CASE("b=-1 flips the task-1 objective") {
    auto enc = toy_encoding();
    auto mesh = build_mesh(enc.n, 1.05);
    auto params = toy_params(enc.n, 1.05);
    auto plus = build_lp1(30, 1, mesh, enc, 2, params);
    auto minus = build_lp1(30, -1, mesh, enc, 2, params);
    for (std::size_t v = 0; v < plus.num_vars(); ++v)
        CHECK(minus.objective[v] == doctest::Approx(-plus.objective[v]));
    // constraints identical
    REQUIRE(minus.rows.size() == plus.rows.size());
    for (std::size_t r = 0; r < plus.rows.size(); ++r) {
        if (std::isfinite(plus.rows[r].lo))
            CHECK(minus.rows[r].lo == doctest::Approx(plus.rows[r].lo));
        else
            CHECK(minus.rows[r].lo == plus.rows[r].lo);
        if (std::isfinite(plus.rows[r].up))
            CHECK(minus.rows[r].up == doctest::Approx(plus.rows[r].up));
        else
            CHECK(minus.rows[r].up == plus.rows[r].up);
    }
}

TEST_CASE("idx=l+1 convention: no coupling row, c capped at G, x varies by task") {
    auto enc = toy_encoding();
    auto mesh = build_mesh(enc.n, 1.05);
    auto params = toy_params(enc.n, 1.05);
    const std::size_t l = mesh.l;

    auto lo = build_lp_lower(40, mesh, enc, l + 1, params);
    CHECK(lo.var_up[l] == doctest::Approx(40.0));
    CHECK(lo.rows.size() == 1 + 10 + 2);  // no c-coupling row
    CHECK(lo.objective[l] == doctest::Approx(0.0));  // x_{l+1} = 0 for the lower task

    auto up = build_lp_upper(40, mesh, enc, l + 1, params);
    CHECK(up.objective[l] == doctest::Approx(mesh.floor_value()));

    auto a_minus = build_lp1a(40, -1, mesh, enc, l + 1, params);
    CHECK(a_minus.objective[l] == doctest::Approx(-mesh.floor_value()));
    auto a_plus = build_lp1a(40, 1, mesh, enc, l + 1, params);
    CHECK(a_plus.objective[l] == doctest::Approx(0.0));

    CHECK_THROWS_AS(build_lp1(40, 1, mesh, enc, l + 1, params),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_lp_lower(40, mesh, enc, l + 2, params),
                    std::invalid_argument);
}

TEST_CASE("band rows transcribe the good-turing targets") {
    auto enc = toy_encoding();
    auto mesh = build_mesh(enc.n, 1.05);
    auto params = toy_params(enc.n, 1.05);
    const double n = double(enc.n);

    auto lp1 = build_lp1(10, 1, mesh, enc, 1, params);
    // band i: rows[1+i], scaled by N/(i+1); unscaled box is
    // gt - eps2 - (i+1)/(N-i) .. gt + eps2 with gt = (i+1) F_{i+1} / (N-i)
    for (std::size_t i = 0; i <= 4; ++i) {
        const double scale = n / double(i + 1);
        std::uint64_t f_next = 0;
        if (i + 1 == 1) f_next = 4000;
        if (i + 1 == 2) f_next = 1500;
        if (i + 1 == 6) f_next = 500;
        const double gt = double(i + 1) * double(f_next) / (n - double(i));
        const auto& row = lp1.rows[1 + i];
        CHECK(row.lo / scale ==
              doctest::Approx(gt - params.eps2[i] - double(i + 1) / (n - double(i))));
        CHECK(row.up / scale == doctest::Approx(gt + params.eps2[i]));
        // coefficient on h_j is x_j bpdf(i, N, x_j)
        const double xj = mesh.x(3);
        CHECK(row.coeffs[2] / scale == doctest::Approx(xj * bpdf(i, enc.n, xj)));
    }

    // LPlower band i=0: lower row divides through by q, p enters at 1/q;
    // upper row scales by (1+eps3) with the bpdf(0,N,x-hat) offset.
    auto lower = build_lp_lower(10, mesh, enc, 1, params);
    const double q = mesh.q;
    const double scale0 = n / 1.0;
    const double gt0 = 1.0 * 4000.0 / n;
    const auto& lo_row = lower.rows[1];
    CHECK(lo_row.lo / scale0 ==
          doctest::Approx((gt0 - params.eps2[0] - 1.0 / n) / q));
    CHECK(lo_row.coeffs[mesh.l + 1] / scale0 == doctest::Approx(1.0 / q));
    const auto& up_row = lower.rows[2];
    const double sf = 1.0 + params.eps3[0];
    CHECK(up_row.up / scale0 ==
          doctest::Approx(sf * (gt0 + params.eps2[0]) + bpdf(0, enc.n, params.xhat3[0])));
    CHECK(up_row.coeffs[mesh.l + 1] / scale0 ==
          doctest::Approx(sf * bpdf(0, enc.n, q * mesh.floor_value())));

    // band i=1 lower row: p coefficient uses bpdf(1, N, q x_l) / q^2
    const auto& lo_row1 = lower.rows[3];
    const double scale1 = n / 2.0;
    CHECK(lo_row1.coeffs[mesh.l + 1] / scale1 ==
          doctest::Approx(bpdf(1, enc.n, q * mesh.floor_value()) / (q * q)));

    // LPupper mass rows: 1 - p <= sum h x <= q (1 - p)
    auto upper = build_lp_upper(10, mesh, enc, 1, params);
    const auto& mass_lo = upper.rows[11];
    const auto& mass_up = upper.rows[12];
    CHECK(mass_lo.coeffs[mesh.l + 1] == doctest::Approx(1.0));
    CHECK(mass_lo.lo == doctest::Approx(1.0));
    CHECK(mass_up.coeffs[mesh.l + 1] == doctest::Approx(q));
    CHECK(mass_up.up == doctest::Approx(q));
}

TEST_CASE("mesh-aligned truth: lp bounds bracket the exact curve") {
    // Mesh floor 1e-10 so the greedy fill below lands within 1e-9 of mass 1.
    auto mesh = build_mesh(1000000, 1.05);
    std::vector<std::uint64_t> hist(mesh.l, 0);
    double mass = 0.0;
    // Greedy fill front-to-back: after the first slot each step adds at most
    // floor(q) = 1 token, and the final remainder is below the mesh floor.
    for (std::size_t j = 40; j < mesh.l; ++j) {
        const auto add = std::uint64_t((1.0 - mass) / mesh.values[j]);
        hist[j] += add;
        mass += double(add) * mesh.values[j];
    }
    REQUIRE(std::fabs(mass - 1.0) <= 1e-9);

    auto dist = make_mesh_aligned(mesh, hist);
    auto corpus = sample(dist, 2000, 7);
    auto enc = frequency_encoding(FrequencyTable::from_samples(corpus));
    auto params = toy_params(2000, 1.05);
    SimplexSolver solver;

    for (std::uint64_t g : {1ull, 3ull, 10ull, 100ull}) {
        const double truth = exact_lambda(dist, g);
        auto lo = lp_lower_bound(g, mesh, enc, params, solver);
        auto hi = lp_upper_bound(g, mesh, enc, params, solver);
        CHECK(lo.value <= truth + 1e-9);
        CHECK(hi.value >= truth - 1e-9);
        CHECK(lo.value <= hi.value + 1e-9);
    }
}

TEST_CASE("duplicated corpus is flagged as iid-inconsistent") {
    // a singleton-heavy base makes duplication provable: tripling turns
    // F_1 into F_3, so 3*F_3/N is near 1 while no mixture of binomial pmfs
    // can push the i=2 Good-Turing moment above max_x bpdf(2,N,x) ~ 0.27
    auto dist = make_uniform(1000000);
    auto base = sample(dist, 20000, 11);
    SampleCorpus tripled;
    for (const auto& s : base.samples)
        for (int k = 0; k < 3; ++k) tripled.samples.push_back(s);
    auto enc = frequency_encoding(FrequencyTable::from_samples(tripled));
    auto mesh = build_mesh(enc.n, 1.05);
    auto params = toy_params(enc.n, 1.05);
    SimplexSolver solver;
    auto report = check_iid_consistency(enc, mesh, params, solver);
    CHECK_FALSE(report.consistent);

    auto honest = frequency_encoding(FrequencyTable::from_samples(sample(dist, 60000, 12)));
    auto honest_report = check_iid_consistency(honest, build_mesh(60000, 1.05),
                                               toy_params(60000, 1.05), solver);
    CHECK(honest_report.consistent);
}

TEST_CASE("lp text dump is syntactically plausible") {
    auto enc = toy_encoding();
    auto mesh = build_mesh(enc.n, 1.05);
    auto params = toy_params(enc.n, 1.05);
    auto prob = build_lp_lower(5, mesh, enc, 2, params);
    auto text = to_lp_format(prob);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
    CHECK(text.find("h1") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("schedule audit and derived parameters") {
    auto derived = default_schedule(100000);
    CHECK(derived.schedule.lp_delta() == doctest::Approx(0.00991));
    CHECK(derived.schedule.lp_delta() <= 0.01);
    CHECK(derived.lp.delta == doctest::Approx(0.00991).epsilon(1e-6));
    CHECK(derived.eps1 == doctest::Approx(mcdiarmid_epsilon(100000, 0.00009)));
    CHECK(derived.split.d == 25000);
    CHECK(derived.split.delta == doctest::Approx(0.01 - 0.00009));
    CHECK(derived.audit_text.find("frequency_ub") != std::string::npos);

    Schedule bad;
    bad.delta1 = 0.5;
    bad.delta3 = 0.6;
    CHECK_THROWS_AS(bad.audit(), std::runtime_error);
}
