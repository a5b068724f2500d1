#include "fdenergy/energy.hpp"

#include "fdenergy/gap_policy.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <limits>
#include <numeric>
#include <sstream>

namespace fdenergy {

void EnergyModel::validate() const {
   if (duplex_fraction != 1) throw std::invalid_argument("duplex fraction must be 1");
   if (idle_fraction < 0 || idle_fraction > single_fraction || single_fraction > duplex_fraction) {
      throw std::invalid_argument("power fractions must satisfy 0 <= idle <= single <= duplex");
   }
}

Rational EnergyModel::active_fraction(bool uploads, bool downloads) const {
   if (variant == Variant::TwoState) return Rational(1);
   return uploads && downloads ? duplex_fraction : single_fraction;
}

Rational EnergyModel::idle() const { return variant == Variant::TwoState ? Rational(1) : idle_fraction; }

const char* EnergyModel::name() const { return variant == Variant::TwoState ? "two-state" : "four-state"; }

EnergyModel parse_energy_model(std::string_view name) {
   if (name == "two-state" || name == "two" || name == "2") return EnergyModel::two_state();
   if (name == "four-state" || name == "four" || name == "4") return EnergyModel::four_state();
   throw std::invalid_argument("unknown energy model '" + std::string(name) + "' (two-state|four-state)");
}

Rational delta_per_slot(const HostSpec& host, const SystemSpec& spec) {
   if (!spec.is_uniform()) throw NonUniformCapacity();
   return host.power_watts * Rational(spec.file_bits(), spec.upload_bps() * spec.block_count()) +
          host.per_block_joules;
}

Rational slot_cost(const SystemSpec& spec, const Scheme& scheme, std::size_t slot) {
   if (slot == 0 || slot > scheme.slots.size()) {
      throw std::out_of_range("slot " + std::to_string(slot) + " outside 1.." + std::to_string(scheme.slots.size()));
   }
   std::vector<HostId> active;
   for (const auto& t : scheme.slots[slot - 1].transfers) {
      active.push_back(t.from);
      active.push_back(t.to);
   }
   std::sort(active.begin(), active.end());
   active.erase(std::unique(active.begin(), active.end()), active.end());
   Rational cost;
   for (auto id : active) cost += spec.delta(id);
   return cost;
}

std::vector<BlockCostEntry> block_costs(const SystemSpec& spec, const Scheme& scheme) {
   require_valid(spec, scheme);
   constexpr auto none = std::numeric_limits<std::uint32_t>::max();
   std::vector<std::uint32_t> min_download(spec.host_count(), none);
   std::vector<BlockCostEntry> entries;
   entries.reserve(scheme.transfer_count());

   for (std::size_t index = 0; index < scheme.slots.size(); ++index) {
      const auto& transfers = scheme.slots[index].transfers;
      for (const auto& t : transfers) {
         auto& m = min_download[t.to.dense()];
         m = std::min(m, t.block);
      }
      for (const auto& t : transfers) {
         const int d = min_download[t.to.dense()] == t.block ? 1 : 0;
         const int u = min_download[t.from.dense()] == none ? 1 : 0;
         Rational cost;
         if (d) cost += spec.delta(t.to);
         if (u) cost += spec.delta(t.from);
         entries.push_back({t.block, t.to, index + 1, d, u, t.from, std::move(cost)});
      }
      for (const auto& t : transfers) min_download[t.to.dense()] = none;
   }
   return entries;
}

EnergyReport scheme_energy(const SystemSpec& spec, const Scheme& scheme, const EnergyModel& model,
                           const EnergyOptions& options) {
   model.validate();
   require_valid(spec, scheme);

   const std::size_t hosts = spec.host_count();
   const Rational gamma = spec.slot_seconds();

   // Cost of one active slot per host and role: index 0 single, 1 duplex.
   std::vector<std::array<Rational, 2>> active_cost(hosts);
   for (std::size_t h = 0; h < hosts; ++h) {
      const auto& host = spec.host(HostId::from_dense(h));
      const Rational base = host.power_watts * gamma;
      active_cost[h][0] = model.active_fraction(true, false) * base + host.per_block_joules;
      active_cost[h][1] = model.active_fraction(true, true) * base + host.per_block_joules;
   }

   EnergyReport report;
   report.makespan_slots = scheme.makespan();
   report.per_slot_joules.assign(scheme.makespan(), Rational(0));
   report.per_host_joules.assign(hosts, Rational(0));

   std::vector<std::uint8_t> role(hosts, 0);  // bit 0 uploads, bit 1 downloads
   std::vector<std::size_t> touched;
   std::vector<std::vector<std::size_t>> active_slots(hosts);
   std::vector<std::array<std::uint64_t, 2>> role_counts(hosts, {0, 0});

   for (std::size_t index = 0; index < scheme.slots.size(); ++index) {
      touched.clear();
      for (const auto& t : scheme.slots[index].transfers) {
         for (auto [id, bit] : {std::pair{t.from, std::uint8_t{1}}, std::pair{t.to, std::uint8_t{2}}}) {
            auto& r = role[id.dense()];
            if (r == 0) touched.push_back(id.dense());
            r |= bit;
         }
      }
      auto& slot_total = report.per_slot_joules[index];
      for (auto h : touched) {
         const int duplex = role[h] == 3 ? 1 : 0;
         slot_total += active_cost[h][duplex];
         ++role_counts[h][duplex];
         active_slots[h].push_back(index);
         role[h] = 0;
      }
   }

   for (std::size_t h = 0; h < hosts; ++h) {
      report.per_host_joules[h] = active_cost[h][0] * role_counts[h][0] + active_cost[h][1] * role_counts[h][1];
   }
   report.transfer_joules = std::accumulate(report.per_host_joules.begin(), report.per_host_joules.end(), Rational(0));

   if (options.switch_seconds_enabled) {
      const Rational idle = model.idle();
      for (std::size_t h = 0; h < hosts; ++h) {
         const auto& slots = active_slots[h];
         if (slots.empty()) continue;
         const auto& host = spec.host(HostId::from_dense(h));
         auto charge = [&](std::size_t slot_index, const Rational& joules, bool is_switch) {
            report.per_slot_joules[slot_index] += joules;
            report.per_host_joules[h] += joules;
            (is_switch ? report.switch_joules : report.idle_joules) += joules;
         };
         for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
            const auto gap_slots = slots[i + 1] - slots[i] - 1;
            if (gap_slots == 0) continue;
            const auto decision = gap_policy(host.power_watts, host.switch_seconds, gamma * gap_slots, idle);
            const bool off = decision.action == GapAction::OffOn;
            charge(slots[i], decision.joules, off);
            if (off) report.switch_events += 2;
         }
         // Switch on before the first activity and off after the last.
         charge(slots.back(), 2 * host.power_watts * host.switch_seconds, true);
         report.switch_events += 2;
      }
   }

   for (const auto& c : report.per_slot_joules) report.total_joules += c;
   assert(report.total_joules ==
          std::accumulate(report.per_host_joules.begin(), report.per_host_joules.end(), Rational(0)));
   report.delivered_bits = spec.n() * spec.file_bits();
   report.energy_per_bit = report.total_joules / Rational(report.delivered_bits);
   return report;
}

bool verify_block_slot_consistency(const SystemSpec& spec, const Scheme& scheme,
                                   std::span<const BlockCostEntry> costs) {
   std::vector<Rational> sums(scheme.slots.size(), Rational(0));
   for (const auto& entry : costs) {
      if (entry.slot == 0 || entry.slot > sums.size()) return false;
      sums[entry.slot - 1] += entry.cost_joules;
   }
   for (std::size_t slot = 1; slot <= sums.size(); ++slot) {
      if (sums[slot - 1] != slot_cost(spec, scheme, slot)) return false;
   }
   return true;
}

bool verify_block_slot_consistency(const SystemSpec& spec, const Scheme& scheme) {
   const auto costs = block_costs(spec, scheme);
   return verify_block_slot_consistency(spec, scheme, costs);
}

//---------------------------------------------------------------------------

std::string energy_csv_header() { return "scheme,n,beta,file_bits,model,total_j,makespan_slots,energy_per_bit_j"; }

std::string energy_csv_row(std::string_view scheme_name, const SystemSpec& spec, const EnergyModel& model,
                           const EnergyReport& report) {
   std::ostringstream out;
   out << scheme_name << ',' << spec.n() << ',' << spec.block_count() << ',' << spec.file_bits() << ','
       << model.name() << ',' << format_decimal(report.total_joules) << ',' << report.makespan_slots << ','
       << format_decimal(report.energy_per_bit);
   return out.str();
}

}  // namespace fdenergy
