#include "guessbound/schedule.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace guessbound {

double Schedule::lp_delta() const {
    return 2.0 * std::accumulate(delta4.begin(), delta4.end(), 0.0);
}

void Schedule::audit() const {
    const double budget = 1.0 - target_confidence;
    auto check = [&](const char* method, double total) {
        if (total > budget + 1e-12) {
            std::ostringstream msg;
            msg << method << " total delta " << total << " exceeds budget " << budget;
            throw std::runtime_error(msg.str());
        }
    };
    check("frequency_ub", delta1);
    check("prior_lb", delta1 + delta2(2));
    check("sampling_lb", delta1 + delta3);
    check("extended_lb", delta1 + delta3);
    check("lp bounds", lp_delta());
}

DerivedSchedule default_schedule(std::uint64_t n, const Schedule& base) {
    if (n < 2) throw std::invalid_argument("corpus size must be >= 2");
    base.audit();

    DerivedSchedule derived;
    derived.schedule = base;
    derived.eps1 = mcdiarmid_epsilon(n, base.delta1);
    derived.split = SplitBoundParams::from_delta(base.d, base.delta3);
    derived.lp = LpParams::make(n, base.q, base.i_max, base.delta4,
                                base.xhat3_multipliers);

    std::ostringstream audit;
    audit.precision(6);
    const double budget = 1.0 - base.target_confidence;
    audit << "delta audit (budget " << budget << " per method):\n"
          << "  frequency_ub: " << base.delta1 << "\n"
          << "  prior_lb:     " << base.delta1 + base.delta2(2) << "\n"
          << "  sampling_lb:  " << base.delta1 + base.delta3 << "\n"
          << "  extended_lb:  " << base.delta1 + base.delta3 << "\n"
          << "  lp bounds:    " << derived.lp.delta << "\n";
    derived.audit_text = audit.str();

    if (derived.lp.delta > budget + 1e-12)
        throw std::runtime_error("derived LP delta exceeds the confidence budget");
    return derived;
}

}  // namespace guessbound
