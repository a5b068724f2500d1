#pragma once

#include "fdenergy/model.hpp"

#include <cstdint>

namespace fdenergy {

enum class FormulaId { LowerBoundK1, OptimalK1, OptimalBlockCount, LowerBoundK, TwoDownload };

const char* to_string(FormulaId id);

struct BoundResult {
   Rational joules;
   FormulaId formula_id;
};

/// Minimum energy of any scheme when d = u:
/// beta*(delta_S + sum delta_i) + max(0, n - beta) * min(delta_S, delta_0).
/// Throws std::invalid_argument when k != 1.
BoundResult lower_bound_k1(const SystemSpec& spec);

/// Energy of the optimal schemes for d = u; equal to lower_bound_k1.
BoundResult optimal_energy_k1(const SystemSpec& spec);

/// n*(beta+1)*delta: minimum energy for an energy-homogeneous system with k > 1.
BoundResult lower_bound_homogeneous(std::uint64_t n, std::uint64_t beta, const Rational& delta);

/// (n*(beta+1) + floor(beta/n) + beta mod n - 1) * delta: energy of the
/// two-download scheme. Throws std::invalid_argument when beta <= n.
BoundResult alg4_energy(std::uint64_t n, std::uint64_t beta, const Rational& delta);

/// Energy of an optimal d = u scheme in an energy-homogeneous system as a
/// function of the block count:
/// (n*beta + max(n, beta)) * (P*B/(u*beta) + delta).
Rational homogeneous_opt_energy(const Rational& power_watts, const Rational& file_bits, const Rational& upload_bps,
                                const Rational& per_block_joules, std::uint64_t n, std::uint64_t beta);

struct OptimalBlockCount {
   std::uint64_t beta;
   /// delta = 0: energy keeps falling with beta; the host count is returned.
   bool unbounded;
};

/// Block count minimising homogeneous_opt_energy: sqrt(P*B/(u*delta)) rounded
/// to the cheaper neighbour (ties to the smaller), clamped to [1, n].
OptimalBlockCount optimal_block_count(const Rational& power_watts, const Rational& file_bits,
                                      const Rational& upload_bps, const Rational& per_block_joules, std::uint64_t n);

}  // namespace fdenergy
