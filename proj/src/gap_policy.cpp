#include "fdenergy/gap_policy.hpp"

#include <stdexcept>

namespace fdenergy {

GapDecision gap_policy(const Rational& power_watts, const Rational& switch_seconds, const Rational& gap_seconds,
                       const Rational& idle_fraction) {
   if (gap_seconds < 0) throw std::invalid_argument("gap must be nonnegative");
   const Rational cost_on = idle_fraction * power_watts * gap_seconds;
   const Rational cost_off_on = 2 * power_watts * switch_seconds;
   if (cost_on <= cost_off_on || gap_seconds < 2 * switch_seconds) return {GapAction::StayOn, cost_on};
   return {GapAction::OffOn, cost_off_on};
}

}  // namespace fdenergy
