#include "fdenergy/reduction.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fdenergy {

std::uint64_t PartitionInput::sum() const { return std::accumulate(values.begin(), values.end(), std::uint64_t{0}); }

void check_partition_input(const PartitionInput& input) {
   if (input.values.size() < 2) throw std::invalid_argument("partition input needs at least two values");
   for (auto v : input.values) {
      if (v == 0) throw std::invalid_argument("partition values must be positive");
   }
   if (input.sum() % 2 != 0) {
      throw std::invalid_argument("partition values must have an even sum (got " + std::to_string(input.sum()) + ")");
   }
}

ReductionInstance build_instance(const PartitionInput& input, const Rational& power) {
   check_partition_input(input);
   if (power <= 0) throw std::invalid_argument("power must be positive");
   const std::uint64_t m = input.sum();
   const std::size_t k = input.values.size();

   auto host = [&](const Rational& p, std::uint64_t up, std::uint64_t down) {
      HostSpec h;
      h.power_watts = p;
      h.per_block_joules = 0;
      h.switch_seconds = 0;
      h.upload_bps = up;
      h.download_bps = down;
      return h;
   };
   const Rational power_r = 2 * power * (2 * k + 1) + power;
   std::vector<HostSpec> clients;
   clients.push_back(host(power, m, m));        // T
   clients.push_back(host(power_r, 1, m / 2));  // R
   for (auto x : input.values) clients.push_back(host(power, x, m));
   // The server never downloads; its download capacity is unused.
   SystemSpec spec(host(power, m, m), std::move(clients), m, m);
   return {input, power, power_r, 3 * power_r, std::move(spec)};
}

//---------------------------------------------------------------------------

namespace {

/// Blocks per one-second slot.
std::uint64_t per_slot(const SystemSpec& spec, std::uint64_t bps) { return bps / spec.block_bits(); }

}  // namespace

ValidationReport validate_bulk_scheme(const SystemSpec& spec, const BulkScheme& scheme) {
   ValidationReport report;
   auto fail = [&](std::size_t slot, std::string rule, std::string detail) {
      report.violations.push_back({slot, std::move(rule), std::move(detail)});
   };
   const std::size_t hosts = spec.host_count();
   const auto beta = spec.block_count();
   std::vector<std::vector<char>> held(hosts, std::vector<char>(beta, 0));
   std::fill(held[0].begin(), held[0].end(), 1);

   for (std::size_t index = 0; index < scheme.slots.size(); ++index) {
      const std::size_t slot = index + 1;
      std::vector<std::size_t> uploads(hosts, 0);
      std::vector<std::uint64_t> received(hosts, 0);
      auto incoming = held;
      for (const auto& t : scheme.slots[index].transfers) {
         const std::string edge = t.from.to_string() + "->" + t.to.to_string();
         if (!spec.contains(t.from) || !spec.contains(t.to)) {
            fail(slot, "unknown-host", edge);
            continue;
         }
         if (t.from == t.to) fail(slot, "self-transfer", edge);
         if (t.to.is_server()) fail(slot, "server-download", edge);
         if (++uploads[t.from.dense()] == 2) fail(slot, "upload-degree", t.from.to_string() + " uploads to two hosts");
         const auto& sender = spec.host(t.from);
         if (t.blocks.size() != per_slot(spec, sender.upload_bps)) {
            fail(slot, "partial-upload",
                 edge + " carries " + std::to_string(t.blocks.size()) + " blocks, capacity " +
                    std::to_string(per_slot(spec, sender.upload_bps)));
         }
         received[t.to.dense()] += t.blocks.size();
         for (auto b : t.blocks) {
            if (b >= beta) {
               fail(slot, "block-out-of-range", edge + " block " + std::to_string(b));
               continue;
            }
            if (!held[t.from.dense()][b]) fail(slot, "block-not-held", edge + " block " + std::to_string(b));
            if (incoming[t.to.dense()][b]) fail(slot, "duplicate-delivery", edge + " block " + std::to_string(b));
            incoming[t.to.dense()][b] = 1;
         }
      }
      for (std::size_t h = 1; h < hosts; ++h) {
         const auto cap = per_slot(spec, spec.host(HostId::from_dense(h)).download_bps);
         if (received[h] > cap) {
            fail(slot, "download-degree",
                 HostId::from_dense(h).to_string() + " receives " + std::to_string(received[h]) + " blocks, capacity " +
                    std::to_string(cap));
         }
      }
      held = std::move(incoming);
   }
   for (std::size_t h = 1; h < hosts; ++h) {
      if (std::find(held[h].begin(), held[h].end(), 0) != held[h].end()) {
         fail(0, "incomplete-client", HostId::from_dense(h).to_string() + " lacks blocks");
      }
   }
   return report;
}

Rational bulk_energy(const SystemSpec& spec, const BulkScheme& scheme) {
   Rational energy;
   std::vector<char> active(spec.host_count());
   for (const auto& slot : scheme.slots) {
      std::fill(active.begin(), active.end(), 0);
      for (const auto& t : slot.transfers) {
         active[t.from.dense()] = active[t.to.dense()] = 1;
         energy += (spec.host(t.from).per_block_joules + spec.host(t.to).per_block_joules) * t.blocks.size();
      }
      for (std::size_t h = 0; h < active.size(); ++h) {
         if (active[h]) energy += spec.host(HostId::from_dense(h)).power_watts;
      }
   }
   return energy;
}

Rational witness_energy_formula(const ReductionInstance& instance, std::size_t subset_size) {
   const Rational& p = instance.power;
   return 2 * p + 2 * p * instance.k() + 2 * (p * subset_size + instance.power_r);
}

Witness witness_schedule(const ReductionInstance& instance, const std::vector<std::size_t>& subset) {
   const auto& values = instance.input.values;
   std::vector<char> used(values.size(), 0);
   std::uint64_t total = 0;
   for (auto i : subset) {
      if (i >= values.size()) throw std::invalid_argument("subset index " + std::to_string(i) + " out of range");
      if (used[i]) throw std::invalid_argument("subset repeats index " + std::to_string(i));
      used[i] = 1;
      total += values[i];
   }
   const std::uint64_t m = instance.blocks();
   if (2 * total != m) {
      throw std::invalid_argument("subset sums to " + std::to_string(total) + ", not " + std::to_string(m / 2));
   }

   std::vector<std::uint32_t> all(m);
   std::iota(all.begin(), all.end(), 0u);
   BulkScheme scheme;
   scheme.slots.push_back({{{HostId::server(), instance.t(), all}}});
   for (std::size_t i = 0; i < values.size(); ++i) scheme.slots.push_back({{{instance.t(), instance.h(i), all}}});
   // Each chosen host sends x_i fresh blocks per slot; half the file per slot.
   std::uint32_t next = 0;
   for (int half = 0; half < 2; ++half) {
      BulkSlot slot;
      for (auto i : subset) {
         BulkTransfer t{instance.h(i), instance.r(), {}};
         for (std::uint64_t j = 0; j < values[i]; ++j) t.blocks.push_back(next++);
         slot.transfers.push_back(std::move(t));
      }
      scheme.slots.push_back(std::move(slot));
   }

   const auto report = validate_bulk_scheme(instance.spec, scheme);
   if (!report.ok()) throw InvalidScheme(report);
   Rational energy = bulk_energy(instance.spec, scheme);
   if (energy != witness_energy_formula(instance, subset.size())) {
      throw std::logic_error("witness energy disagrees with the closed form");
   }
   return {std::move(scheme), std::move(energy)};
}

std::optional<std::vector<std::size_t>> decide_small(const PartitionInput& input) {
   check_partition_input(input);
   if (input.values.size() > 24) throw std::invalid_argument("exhaustive search is limited to 24 values");
   const auto& values = input.values;
   const std::uint64_t target = input.sum() / 2;

   std::vector<std::size_t> chosen;
   // Trying "take i" before "skip i" visits index sets in lexicographic order.
   auto search = [&](auto&& self, std::size_t i, std::uint64_t sum) -> bool {
      if (sum == target) return true;
      if (i == values.size()) return false;
      if (sum + values[i] <= target) {
         chosen.push_back(i);
         if (self(self, i + 1, sum + values[i])) return true;
         chosen.pop_back();
      }
      return self(self, i + 1, sum);
   };
   if (search(search, 0, 0)) return chosen;
   return std::nullopt;
}

bool check_iff(const PartitionInput& input, const Rational& power, std::size_t trials) {
   const auto instance = build_instance(input, power);
   const auto found = decide_small(input);
   const auto& values = input.values;
   const std::uint64_t target = input.sum() / 2;

   auto below_threshold = [&](const std::vector<std::size_t>& subset) {
      const auto witness = witness_schedule(instance, subset);
      return witness.energy_joules < instance.threshold;
   };

   if (found) {
      std::uint64_t sum = 0;
      for (auto i : *found) sum += values[i];
      if (sum != target || !below_threshold(*found)) return false;
   }

   std::size_t matches = 0;
   const std::uint64_t masks = std::uint64_t{1} << values.size();
   for (std::uint64_t mask = 1; mask + 1 < masks; ++mask) {
      std::uint64_t sum = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
         if (mask >> i & 1) sum += values[i];
      }
      if (sum != target) continue;
      if (matches++ >= trials) continue;
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < values.size(); ++i) {
         if (mask >> i & 1) subset.push_back(i);
      }
      if (!below_threshold(subset)) return false;
   }
   return (matches > 0) == found.has_value();
}

}  // namespace fdenergy
