#pragma once

// Test-only generators of valid schemes and specs, built directly from the
// model rules (never from the schedulers).

#include "fdenergy/model.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace fdenergy::testing {

/// Uniform capacities with d = k*u; per-host power and per-block energy drawn
/// as small exact fractions.
inline SystemSpec random_spec(std::mt19937_64& rng, std::size_t n, std::uint64_t beta, std::uint64_t k,
                              bool homogeneous = false) {
   std::uniform_int_distribution<int> power(1, 200);
   std::uniform_int_distribution<int> per_block(0, 40);
   auto draw = [&] {
      HostSpec h;
      h.power_watts = Rational(power(rng), 4);
      h.per_block_joules = Rational(per_block(rng), 8);
      h.upload_bps = 1000;
      h.download_bps = 1000 * k;
      return h;
   };
   const HostSpec first = draw();
   std::vector<HostSpec> clients;
   for (std::size_t i = 0; i < n; ++i) clients.push_back(homogeneous ? first : draw());
   return SystemSpec(homogeneous ? first : draw(), std::move(clients), beta * 512, beta);
}

/// Random valid scheme: each slot lets a random subset of holders upload a
/// random block they already hold to a random client that lacks it, subject
/// to the degree limits, until every client has the file. Slots need not be
/// connected.
inline Scheme random_valid_scheme(std::mt19937_64& rng, const SystemSpec& spec, double upload_probability = 0.6) {
   const std::size_t hosts = spec.host_count();
   const auto beta = static_cast<std::uint32_t>(spec.block_count());
   const auto k = spec.k();
   std::vector<std::vector<char>> held(hosts, std::vector<char>(beta, 0));
   std::fill(held[0].begin(), held[0].end(), 1);
   std::size_t missing = (hosts - 1) * beta;

   std::bernoulli_distribution uploads(upload_probability);
   std::vector<std::size_t> order(hosts);
   Scheme scheme;
   while (missing > 0) {
      SlotSchedule slot;
      std::vector<std::uint64_t> in_degree(hosts, 0);
      std::vector<std::vector<char>> incoming(hosts, std::vector<char>(beta, 0));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (auto sender : order) {
         if (!uploads(rng)) continue;
         std::vector<std::pair<std::size_t, std::uint32_t>> options;
         for (std::size_t r = 1; r < hosts; ++r) {
            if (r == sender || in_degree[r] >= k) continue;
            for (std::uint32_t b = 0; b < beta; ++b) {
               if (held[sender][b] && !held[r][b] && !incoming[r][b]) options.emplace_back(r, b);
            }
         }
         if (options.empty()) continue;
         const auto [r, b] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
         ++in_degree[r];
         incoming[r][b] = 1;
         slot.transfers.push_back({HostId::from_dense(sender), HostId::from_dense(r), b});
      }
      if (slot.transfers.empty()) {
         // Guarantee progress through the server.
         for (std::size_t r = 1; r < hosts && slot.transfers.empty(); ++r) {
            for (std::uint32_t b = 0; b < beta; ++b) {
               if (!held[r][b]) {
                  slot.transfers.push_back({HostId::server(), HostId::from_dense(r), b});
                  break;
               }
            }
         }
      }
      for (const auto& t : slot.transfers) {
         held[t.to.dense()][t.block] = 1;
         --missing;
      }
      scheme.slots.push_back(std::move(slot));
   }
   return scheme;
}

}  // namespace fdenergy::testing
