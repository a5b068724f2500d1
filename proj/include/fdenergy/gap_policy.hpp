#pragma once

#include "fdenergy/rational.hpp"

namespace fdenergy {

enum class GapAction { StayOn, OffOn };

struct GapDecision {
   GapAction action;
   Rational joules;  // energy charged for the gap
};

/// On/off rule for an inactive period of `gap_seconds` between two
/// activities of a host with nominal power `power_watts` and switch time
/// `switch_seconds`.
///
/// Staying on costs idle_fraction * P * gap; an off/on cycle costs 2 * P * alpha.
/// The host stays on when that is no more expensive, or when the gap is too
/// short to complete an off/on cycle (gap < 2 * alpha).
GapDecision gap_policy(const Rational& power_watts, const Rational& switch_seconds, const Rational& gap_seconds,
                       const Rational& idle_fraction = Rational(1));

}  // namespace fdenergy
