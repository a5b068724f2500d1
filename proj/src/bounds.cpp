#include "fdenergy/bounds.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdenergy {

const char* to_string(FormulaId id) {
   switch (id) {
      case FormulaId::LowerBoundK1: return "lower-bound-k1";
      case FormulaId::OptimalK1: return "optimal-k1";
      case FormulaId::OptimalBlockCount: return "optimal-block-count";
      case FormulaId::LowerBoundK: return "lower-bound-k";
      case FormulaId::TwoDownload: return "two-download";
   }
   return "?";
}

BoundResult lower_bound_k1(const SystemSpec& spec) {
   if (spec.k() != 1) throw std::invalid_argument("bound requires d = u (k = 1)");
   const auto n = spec.n();
   const auto beta = spec.block_count();
   Rational sum = spec.delta(HostId::server());
   for (std::size_t i = 0; i < n; ++i) sum += spec.delta(HostId::client(static_cast<std::uint32_t>(i)));
   Rational energy = sum * beta;
   if (n > beta) {
      const auto& cheapest = std::min(spec.delta(HostId::server()), spec.delta(spec.ranked(0)));
      energy += cheapest * (n - beta);
   }
   return {energy, FormulaId::LowerBoundK1};
}

BoundResult optimal_energy_k1(const SystemSpec& spec) { return {lower_bound_k1(spec).joules, FormulaId::OptimalK1}; }

BoundResult lower_bound_homogeneous(std::uint64_t n, std::uint64_t beta, const Rational& delta) {
   return {delta * (n * (beta + 1)), FormulaId::LowerBoundK};
}

BoundResult alg4_energy(std::uint64_t n, std::uint64_t beta, const Rational& delta) {
   if (n == 0 || beta <= n) throw std::invalid_argument("two-download scheme needs beta > n >= 1");
   const std::uint64_t count = n * (beta + 1) + beta / n + beta % n - 1;
   return {delta * count, FormulaId::TwoDownload};
}

Rational homogeneous_opt_energy(const Rational& power_watts, const Rational& file_bits, const Rational& upload_bps,
                                const Rational& per_block_joules, std::uint64_t n, std::uint64_t beta) {
   if (beta == 0) throw std::invalid_argument("beta must be positive");
   const Rational delta = power_watts * file_bits / (upload_bps * beta) + per_block_joules;
   return delta * (n * beta + std::max(n, beta));
}

OptimalBlockCount optimal_block_count(const Rational& power_watts, const Rational& file_bits,
                                      const Rational& upload_bps, const Rational& per_block_joules, std::uint64_t n) {
   if (n == 0) throw std::invalid_argument("n must be positive");
   if (power_watts < 0 || file_bits <= 0 || upload_bps <= 0 || per_block_joules < 0) {
      throw std::invalid_argument("optimal block count needs P >= 0, B > 0, u > 0, delta >= 0");
   }
   if (per_block_joules == 0) return {n, true};

   const Rational target = power_watts * file_bits / (upload_bps * per_block_joules);
   const BigInt root = floor_sqrt(target);
   if (root >= n) return {n, false};

   const auto lower = std::max<std::uint64_t>(1, root.convert_to<std::uint64_t>());
   const std::uint64_t upper = Rational(root * root) == target ? lower : root.convert_to<std::uint64_t>() + 1;
   if (upper == lower) return {lower, false};
   const auto energy = [&](std::uint64_t beta) {
      return homogeneous_opt_energy(power_watts, file_bits, upload_bps, per_block_joules, n, beta);
   };
   return {energy(upper) < energy(lower) ? upper : lower, false};
}

}  // namespace fdenergy
