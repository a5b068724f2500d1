#pragma once

// Partition gadget: a file-distribution instance whose cheapest schedules
// stay under a power threshold exactly when a set of integers splits into
// two halves of equal sum.

#include "fdenergy/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fdenergy {

struct PartitionInput {
   std::vector<std::uint64_t> values;

   std::uint64_t sum() const;
};

/// Throws std::invalid_argument unless there are at least two values, all
/// positive, with an even sum.
void check_partition_input(const PartitionInput& input);

/// Hosts are encoded in a SystemSpec: the server is S, client 0 is T,
/// client 1 is R and client i+2 is H_i. Blocks are one bit and the slot is
/// one second, so capacities read as blocks per slot. Per-block and switch
/// energies are zero. R never uploads; its upload capacity is nominal.
struct ReductionInstance {
   PartitionInput input;
   Rational power;        // P: every host but R
   Rational power_r;      // P' = 2P(2k+1) + P
   Rational threshold;    // 3P'
   SystemSpec spec;

   std::size_t k() const { return input.values.size(); }
   std::uint64_t blocks() const { return spec.block_count(); }
   static HostId t() { return HostId::client(0); }
   static HostId r() { return HostId::client(1); }
   static HostId h(std::size_t i) { return HostId::client(static_cast<std::uint32_t>(i + 2)); }
};

ReductionInstance build_instance(const PartitionInput& input, const Rational& power);

//---------------------------------------------------------------------------
// Schedules with per-host capacities
//---------------------------------------------------------------------------

/// One upload carrying several blocks in the same slot.
struct BulkTransfer {
   HostId from;
   HostId to;
   std::vector<std::uint32_t> blocks;
};

struct BulkSlot {
   std::vector<BulkTransfer> transfers;
};

struct BulkScheme {
   std::vector<BulkSlot> slots;
};

/// Rules for capacity-weighted slots. A host uploads to at most one host per
/// slot and always at full capacity (exactly its upload capacity in blocks);
/// a host receives at most its download capacity; senders hold what they
/// send at the start of the slot; nobody receives a block twice; every
/// client ends with the whole file. Rule names are those of validate_scheme
/// plus "partial-upload".
ValidationReport validate_bulk_scheme(const SystemSpec& spec, const BulkScheme& scheme);

/// Sum over slots of the power of every host that sends or receives, times
/// the slot length, plus per-block energies.
Rational bulk_energy(const SystemSpec& spec, const BulkScheme& scheme);

struct Witness {
   BulkScheme scheme;
   Rational energy_joules;
};

/// S sends the file to T, T sends it to each H_i in turn, then the hosts of
/// the subset send R half the file in each of two slots. `subset` holds
/// indices into the input values. Throws std::invalid_argument when the
/// subset does not sum to M/2 or repeats an index.
Witness witness_schedule(const ReductionInstance& instance, const std::vector<std::size_t>& subset);

/// 2P + 2Pk + 2(|A'|P + P').
Rational witness_energy_formula(const ReductionInstance& instance, std::size_t subset_size);

/// Lexicographically first index set summing to M/2, by depth-first search.
/// Throws std::invalid_argument for more than 24 values.
std::optional<std::vector<std::size_t>> decide_small(const PartitionInput& input);

/// Checks both directions for one input: a subset found by decide_small
/// must give a valid witness under the threshold, and when none is found an
/// independent enumeration of all 2^k subsets must find no half-sum either.
/// For positive inputs, up to `trials` further half-sum subsets from the
/// enumeration are also turned into witnesses and checked.
bool check_iff(const PartitionInput& input, const Rational& power, std::size_t trials = 16);

}  // namespace fdenergy
