#include "fdenergy/schedulers.hpp"

#include <stdexcept>

namespace fdenergy {

const char* to_string(SchemeKind kind) {
   switch (kind) {
      case SchemeKind::Opt: return "opt";
      case SchemeKind::Alg4: return "alg4";
      case SchemeKind::Serial: return "serial";
      case SchemeKind::Parallel: return "parallel";
   }
   return "?";
}

SchemeKind parse_scheme_kind(std::string_view name) {
   if (name == "opt" || name == "Opt") return SchemeKind::Opt;
   if (name == "alg4" || name == "Alg4") return SchemeKind::Alg4;
   if (name == "serial" || name == "Serial") return SchemeKind::Serial;
   if (name == "parallel" || name == "Parallel") return SchemeKind::Parallel;
   throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (opt|alg4|serial|parallel)");
}

namespace {

std::int64_t mod(std::int64_t value, std::int64_t modulus) {
   const auto r = value % modulus;
   return r < 0 ? r + modulus : r;
}

/// Emits slots while placing clients by energy rank.
class SchemeBuilder {
public:
   explicit SchemeBuilder(const SystemSpec& spec) : spec_(spec) {}

   void begin_slot() { scheme_.slots.emplace_back(); }
   void server_to(std::int64_t to_rank, std::int64_t block) { add(HostId::server(), client(to_rank), block); }
   void send(std::int64_t from_rank, std::int64_t to_rank, std::int64_t block) {
      add(client(from_rank), client(to_rank), block);
   }
   void send(HostId from, std::int64_t to_rank, std::int64_t block) { add(from, client(to_rank), block); }
   HostId client(std::int64_t rank) const { return spec_.ranked(static_cast<std::size_t>(rank)); }

   Scheme take() { return std::move(scheme_); }

private:
   void add(HostId from, HostId to, std::int64_t block) {
      scheme_.slots.back().transfers.push_back({from, to, static_cast<std::uint32_t>(block)});
   }

   const SystemSpec& spec_;
   Scheme scheme_;
};

void seed_diagonal(SchemeBuilder& out, std::int64_t count) {
   for (std::int64_t j = 0; j < count; ++j) {
      out.begin_slot();
      out.server_to(j, j);
   }
}

/// Chain and ring phases of the beta > n scheme over `beta` blocks numbered
/// from `offset`. Requires client rank i to hold block offset + i.
void chain_and_ring(SchemeBuilder& out, std::int64_t n, std::int64_t beta, std::int64_t offset) {
   for (std::int64_t j = n; j <= beta - 1; ++j) {
      out.begin_slot();
      out.server_to(n - 1, offset + j);
      for (std::int64_t i = 1; i <= n - 1; ++i) out.send(i, i - 1, offset + i + j - n);
   }
   for (std::int64_t j = beta; j <= beta + n - 2; ++j) {
      out.begin_slot();
      for (std::int64_t i = 1; i <= n; ++i) out.send(i % n, i - 1, offset + mod(i + j - n, beta));
   }
}

void require_k1(const SystemSpec& spec) {
   if (spec.k() != 1) throw std::invalid_argument("optimal scheme requires d = u (k = 1)");
}

}  // namespace

Scheme opt_schedule(const SystemSpec& spec) {
   require_k1(spec);
   const auto n = static_cast<std::int64_t>(spec.n());
   const auto beta = static_cast<std::int64_t>(spec.block_count());
   SchemeBuilder out(spec);

   if (beta == n) {
      seed_diagonal(out, n);
      for (std::int64_t j = n; j <= 2 * n - 2; ++j) {
         out.begin_slot();
         for (std::int64_t i = 0; i <= n - 1; ++i) out.send(i, mod(i - 1, n), mod(i + j, n));
      }
   } else if (beta > n) {
      seed_diagonal(out, n);
      chain_and_ring(out, n, beta, 0);
   } else {
      seed_diagonal(out, beta);
      // Ties go to the client so the server can switch off after seeding.
      const HostId cheapest =
         spec.delta(HostId::server()) < spec.delta(out.client(0)) ? HostId::server() : out.client(0);
      for (std::int64_t j = beta; j <= n - 1; ++j) {
         out.begin_slot();
         out.send(cheapest, j + 1 - beta, 0);
         for (std::int64_t i = 1; i <= beta - 1; ++i) out.send(i + j - beta, i + j + 1 - beta, i);
      }
      for (std::int64_t j = n; j <= n + beta - 2; ++j) {
         out.begin_slot();
         out.send(2 * n - (j + 1), n + beta - (j + 2), beta - 1);
         for (std::int64_t i = 0; i <= beta - 2; ++i) out.send(mod(n + i - j, n), mod(n + i - j - 1, n), i);
      }
   }
   return out.take();
}

Scheme alg4_schedule(const SystemSpec& spec) {
   if (spec.k() < 2) throw std::invalid_argument("two-download scheme requires k >= 2");
   const auto n = static_cast<std::int64_t>(spec.n());
   const auto beta = static_cast<std::int64_t>(spec.block_count());
   if (beta <= n) throw std::invalid_argument("two-download scheme requires beta > n; use the optimal scheme");
   const std::int64_t groups = beta / n;
   const std::int64_t rest = beta % n;
   SchemeBuilder out(spec);

   seed_diagonal(out, n);
   // Corner block of every later group goes to the first client.
   for (std::int64_t j = 1; j <= groups - 1; ++j) {
      out.begin_slot();
      out.server_to(0, n * j);
   }
   // Ring over group l while the server seeds the diagonal of group l+1.
   for (std::int64_t l = 0; l <= groups - 2; ++l) {
      for (std::int64_t j = 0; j <= n - 2; ++j) {
         out.begin_slot();
         out.server_to(j + 1, (l + 1) * n + j + 1);
         for (std::int64_t i = 0; i <= n - 1; ++i) out.send(i, mod(i - 1, n), l * n + mod(i + j, n));
      }
   }
   chain_and_ring(out, n, n + rest, beta - (n + rest));
   return out.take();
}

Scheme serial_schedule(const SystemSpec& spec) {
   const auto n = spec.n();
   const auto beta = spec.block_count();
   Scheme scheme;
   scheme.slots.reserve(n * beta);
   for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = 0; j < beta; ++j) {
         scheme.slots.push_back({{{HostId::server(), HostId::client(i), j}}});
      }
   }
   return scheme;
}

Scheme build_scheme(SchemeKind kind, const SystemSpec& spec) {
   switch (kind) {
      case SchemeKind::Opt: return opt_schedule(spec);
      case SchemeKind::Alg4: return alg4_schedule(spec);
      case SchemeKind::Serial: return serial_schedule(spec);
      case SchemeKind::Parallel: break;
   }
   throw std::invalid_argument("parallel distribution is not slotted; use parallel_schedule");
}

//---------------------------------------------------------------------------

ContinuousPlan parallel_schedule(const SystemSpec& spec) {
   const auto n = spec.n();
   ContinuousPlan plan;
   plan.duration_seconds = Rational(n * spec.file_bits(), spec.upload_bps());
   plan.intervals.resize(spec.host_count());
   plan.blocks_served.assign(spec.host_count(), 0);
   plan.blocks_received.assign(spec.host_count(), 0);
   plan.intervals[0].push_back({Rational(0), plan.duration_seconds, PlanRole::Upload});
   plan.blocks_served[0] = n * spec.block_count();
   for (std::size_t h = 1; h <= n; ++h) {
      plan.intervals[h].push_back({Rational(0), plan.duration_seconds, PlanRole::Download});
      plan.blocks_received[h] = spec.block_count();
   }
   return plan;
}

EnergyReport plan_energy(const SystemSpec& spec, const ContinuousPlan& plan, const EnergyModel& model) {
   model.validate();
   EnergyReport report;
   report.per_host_joules.assign(spec.host_count(), Rational(0));
   for (std::size_t h = 0; h < spec.host_count(); ++h) {
      const auto& host = spec.host(HostId::from_dense(h));
      Rational joules = host.per_block_joules * (plan.blocks_served.at(h) + plan.blocks_received.at(h));
      for (const auto& interval : plan.intervals.at(h)) {
         const bool up = interval.role == PlanRole::Upload;
         joules += model.active_fraction(up, !up) * host.power_watts * (interval.end_seconds - interval.start_seconds);
      }
      report.per_host_joules[h] = joules;
      report.total_joules += joules;
   }
   report.transfer_joules = report.total_joules;
   // Whole nominal slots covered by the plan.
   const Rational slots = plan.duration_seconds / Rational(spec.block_bits(), spec.upload_bps());
   report.makespan_slots = static_cast<std::size_t>((numerator(slots) + denominator(slots) - 1) / denominator(slots));
   report.delivered_bits = spec.n() * spec.file_bits();
   report.energy_per_bit = report.total_joules / Rational(report.delivered_bits);
   return report;
}

}  // namespace fdenergy
