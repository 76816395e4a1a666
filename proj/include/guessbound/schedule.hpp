#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guessbound/bounds.hpp"
#include "guessbound/lp.hpp"

namespace guessbound {

// Default error-probability allocation. Every composed bound's total delta
// must stay at or below 1 - target_confidence; audit() recomputes and
// asserts that at load.
struct Schedule {
    double delta1 = 0.00009;           // McDiarmid shift between lambda_G and lambda(S,G)
    std::uint64_t d = 25000;           // holdout size for the split bounds
    double delta3 = 0.01 - 0.00009;    // split-bound error probability
    double q = 1.002;                  // mesh ratio
    std::size_t i_max = 4;             // i'
    std::vector<double> delta4 = {0.00009, 0.000165, 0.00175, 0.00175, 0.0012};
    std::vector<double> xhat3_multipliers = {7.0, 11.0, 14.0, 16.3, 18.5};
    std::uint64_t prior_j_min = 2;
    std::uint64_t prior_j_max = 1000;
    double target_confidence = 0.99;

    double delta2(std::uint64_t /*j*/) const { return 0.01 - delta1; }
    double lp_delta() const;  // 2 * sum(delta4)

    // Throws when any method's total delta exceeds 1 - target_confidence.
    void audit() const;
};

struct DerivedSchedule {
    Schedule schedule;
    double eps1 = 0.0;  // mcdiarmid_epsilon(n, delta1)
    SplitBoundParams split;
    LpParams lp;
    std::string audit_text;  // per-method total-delta breakdown
};

// Derives all epsilons and slacks for a corpus of size n and audits the
// per-method delta totals. Throws when a derived eps3 leaves (0,1) with a
// message naming the offending xhat.
DerivedSchedule default_schedule(std::uint64_t n, const Schedule& base = Schedule{});

}  // namespace guessbound
