#pragma once

#include "fdenergy/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace fdenergy {

/// Host power states. TwoState: on hosts draw nominal power. FourState: idle,
/// transmit-or-receive and transmit-and-receive draw fixed fractions of it.
struct EnergyModel {
   enum class Variant { TwoState, FourState };

   Variant variant = Variant::TwoState;
   Rational idle_fraction{4, 5};
   Rational single_fraction{9, 10};
   Rational duplex_fraction{1};

   static EnergyModel two_state() { return {}; }
   static EnergyModel four_state() { return {Variant::FourState}; }

   /// Throws std::invalid_argument unless 0 <= idle <= single <= duplex = 1.
   void validate() const;
   /// Fraction of nominal power drawn by a host that uploads and/or downloads.
   Rational active_fraction(bool uploads, bool downloads) const;
   /// Fraction drawn while on without transfers.
   Rational idle() const;
   const char* name() const;
};

EnergyModel parse_energy_model(std::string_view name);

/// Cost of one delivery: d_indicator * delta(receiver) + u_indicator * delta(sender).
///
/// d_indicator is 1 for the lowest-index block a receiver gets in the slot,
/// u_indicator is 1 when the sender downloads nothing in that slot.
struct BlockCostEntry {
   std::uint32_t block;
   HostId receiver;
   std::size_t slot;  // 1-based
   int d_indicator;
   int u_indicator;
   HostId server_of_block;
   Rational cost_joules;
};

struct EnergyReport {
   Rational total_joules;
   std::vector<Rational> per_host_joules;  // indexed by HostId::dense()
   std::vector<Rational> per_slot_joules;  // per_slot_joules[t - 1] for slot t
   std::size_t makespan_slots = 0;
   std::uint64_t delivered_bits = 0;
   Rational energy_per_bit;

   // Breakdown of total_joules.
   Rational transfer_joules;
   Rational idle_joules;
   Rational switch_joules;
   std::size_t switch_events = 0;

   const Rational& host(HostId id) const { return per_host_joules.at(id.dense()); }
};

struct EnergyOptions {
   /// Charge each host's switch time through the gap policy. When false,
   /// hosts switch off and on instantly and for free.
   bool switch_seconds_enabled = false;
};

/// P*B/(u*beta) + delta for `host` placed in `spec`. Throws NonUniformCapacity.
Rational delta_per_slot(const HostSpec& host, const SystemSpec& spec);

/// Sum of delta over the hosts active in slot `slot` (1-based). Throws
/// std::out_of_range.
Rational slot_cost(const SystemSpec& spec, const Scheme& scheme, std::size_t slot);

/// One entry per delivery, in slot order. Throws InvalidScheme.
std::vector<BlockCostEntry> block_costs(const SystemSpec& spec, const Scheme& scheme);

/// Energy of a slotted scheme. Active hosts pay fraction * P * gamma + delta
/// per slot; with switching enabled every host also pays one off/on cycle
/// plus whatever the gap policy charges between its active slots. The
/// cycle and gap charges are booked to the slot the host goes idle in.
/// Throws InvalidScheme.
EnergyReport scheme_energy(const SystemSpec& spec, const Scheme& scheme,
                           const EnergyModel& model = EnergyModel::two_state(), const EnergyOptions& options = {});

/// True iff per-slot block costs add up to the slot cost in every slot.
bool verify_block_slot_consistency(const SystemSpec& spec, const Scheme& scheme);
bool verify_block_slot_consistency(const SystemSpec& spec, const Scheme& scheme,
                                   std::span<const BlockCostEntry> costs);

//---------------------------------------------------------------------------
// CSV
//---------------------------------------------------------------------------

std::string energy_csv_header();
std::string energy_csv_row(std::string_view scheme_name, const SystemSpec& spec, const EnergyModel& model,
                           const EnergyReport& report);

}  // namespace fdenergy
