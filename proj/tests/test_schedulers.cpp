#include "doctest.h"

#include "fdenergy/bounds.hpp"
#include "fdenergy/interchange.hpp"
#include "fdenergy/schedulers.hpp"

#include <algorithm>
#include <fstream>
#include <random>

using namespace fdenergy;

namespace {

SystemSpec unit_spec(std::size_t n, std::uint64_t beta, std::uint64_t k = 1) {
   HostSpec host;
   host.power_watts = 0;
   host.per_block_joules = 1;
   host.download_bps = host.upload_bps * k;
   return SystemSpec::homogeneous(n, beta, beta * 64, host);
}

SystemSpec spec_with_deltas(const Rational& server, const std::vector<Rational>& clients, std::uint64_t beta) {
   HostSpec s;
   s.power_watts = 0;
   s.per_block_joules = server;
   std::vector<HostSpec> hosts;
   for (const auto& d : clients) {
      HostSpec c = s;
      c.per_block_joules = d;
      hosts.push_back(c);
   }
   return SystemSpec(s, hosts, beta * 64, beta);
}

std::uint64_t max_downloads(const Scheme& scheme) {
   std::uint64_t most = 0;
   for (const auto& slot : scheme.slots) {
      std::vector<std::uint64_t> count;
      for (const auto& t : slot.transfers) {
         if (count.size() <= t.to.dense()) count.resize(t.to.dense() + 1, 0);
         most = std::max(most, ++count[t.to.dense()]);
      }
   }
   return most;
}

}  // namespace

TEST_CASE("optimal scheme for n = 3, beta = 4 matches the hand trace") {
   const auto spec = unit_spec(3, 4);
   std::ifstream file(std::string(FDENERGY_TEST_DATA) + "/opt_n3_beta4.txt");
   REQUIRE(file);
   const auto golden = read_scheme(file);
   const auto scheme = opt_schedule(spec);
   CHECK(format_scheme(scheme) == format_scheme(golden));
   CHECK(scheme_energy(spec, scheme).total_joules == 16);
}

TEST_CASE("optimal scheme for n = beta = 2") {
   const auto spec = unit_spec(2, 2);
   const auto scheme = opt_schedule(spec);
   CHECK(scheme.makespan() == 3);
   CHECK(scheme_energy(spec, scheme).total_joules == 6);
   CHECK(is_normal(spec, scheme).normal);
}

TEST_CASE("optimal scheme for beta < n picks the cheapest pusher") {
   SUBCASE("cheap client") {
      const auto spec = spec_with_deltas(5, {1, 1, 1}, 2);
      const auto scheme = opt_schedule(spec);
      REQUIRE(scheme.makespan() >= 3);
      const auto& slot3 = scheme.slots[2].transfers;
      CHECK(std::any_of(slot3.begin(), slot3.end(), [&](const Transfer& t) {
         return t.from == spec.ranked(0) && t.block == 0;
      }));
      CHECK(scheme_energy(spec, scheme).total_joules == lower_bound_k1(spec).joules);
   }
   SUBCASE("cheap server") {
      const auto spec = spec_with_deltas(Rational(1, 2), {1, 1, 1, 1}, 2);
      const auto scheme = opt_schedule(spec);
      const auto& slot3 = scheme.slots[2].transfers;
      CHECK(std::any_of(slot3.begin(), slot3.end(), [](const Transfer& t) {
         return t.from == HostId::server() && t.block == 0;
      }));
      CHECK(scheme_energy(spec, scheme).total_joules == 10);
   }
   SUBCASE("tie goes to the client") {
      const auto spec = spec_with_deltas(1, {1, 1, 1}, 2);
      const auto& slot3 = opt_schedule(spec).slots[2].transfers;
      CHECK(std::none_of(slot3.begin(), slot3.end(), [](const Transfer& t) { return t.from == HostId::server(); }));
   }
}

TEST_CASE("optimal scheme is valid, normal and meets the lower bound") {
   for (std::size_t n = 1; n <= 12; ++n) {
      for (std::uint64_t beta = 1; beta <= 14; ++beta) {
         const auto spec = unit_spec(n, beta);
         const auto scheme = opt_schedule(spec);
         CAPTURE(n);
         CAPTURE(beta);
         CHECK(validate_scheme(spec, scheme).ok());
         CHECK(is_normal(spec, scheme).normal);
         CHECK(scheme.makespan() == n + beta - 1);
         CHECK(scheme_energy(spec, scheme).total_joules == lower_bound_k1(spec).joules);
         CHECK(lower_bound_k1(spec).joules == homogeneous_opt_energy(0, 64 * beta, 1, 1, n, beta));
      }
   }
}

TEST_CASE("optimal scheme on heterogeneous hosts meets the lower bound") {
   std::mt19937_64 rng(11);
   std::uniform_int_distribution<int> pick(1, 60);
   for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + trial % 9;
      const std::uint64_t beta = 1 + (trial / 9) % 11;
      std::vector<Rational> clients;
      for (std::size_t i = 0; i < n; ++i) clients.emplace_back(pick(rng), 7);
      const auto spec = spec_with_deltas(Rational(pick(rng), 7), clients, beta);
      const auto scheme = opt_schedule(spec);
      CHECK(validate_scheme(spec, scheme).ok());
      CHECK(scheme_energy(spec, scheme).total_joules == lower_bound_k1(spec).joules);
   }
}

TEST_CASE("optimal energy depends only on the sum when beta >= n") {
   std::mt19937_64 rng(13);
   const std::vector<Rational> base{1, 2, 3, 4, 10};
   const auto reference = scheme_energy(spec_with_deltas(2, base, 6), opt_schedule(spec_with_deltas(2, base, 6)));
   for (int trial = 0; trial < 20; ++trial) {
      auto shuffled = base;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      // Move mass between two clients, keeping the sum.
      shuffled[0] += Rational(1, 3);
      shuffled[1] -= Rational(1, 3);
      const auto spec = spec_with_deltas(2, shuffled, 6);
      CHECK(scheme_energy(spec, opt_schedule(spec)).total_joules == reference.total_joules);
   }
}

TEST_CASE("optimal scheme rejects k > 1") {
   CHECK_THROWS_AS(opt_schedule(unit_spec(3, 4, 2)), std::invalid_argument);
}

TEST_CASE("two-download scheme") {
   CHECK(scheme_energy(unit_spec(3, 7, 2), alg4_schedule(unit_spec(3, 7, 2))).total_joules == 26);
   CHECK(scheme_energy(unit_spec(3, 6, 2), alg4_schedule(unit_spec(3, 6, 2))).total_joules == 22);
   CHECK(scheme_energy(unit_spec(2, 4, 2), alg4_schedule(unit_spec(2, 4, 2))).total_joules == 11);
   CHECK_THROWS_AS(alg4_schedule(unit_spec(3, 3, 2)), std::invalid_argument);
   CHECK_THROWS_AS(alg4_schedule(unit_spec(3, 7, 1)), std::invalid_argument);

   for (std::size_t n = 1; n <= 9; ++n) {
      for (std::uint64_t beta = n + 1; beta <= 30; ++beta) {
         for (std::uint64_t k : {2, 3}) {
            const auto spec = unit_spec(n, beta, k);
            const auto scheme = alg4_schedule(spec);
            CAPTURE(n);
            CAPTURE(beta);
            CHECK(validate_scheme(spec, scheme).ok());
            CHECK(is_normal(spec, scheme).normal);
            CHECK(max_downloads(scheme) <= 2);
            CHECK(scheme.makespan() == n + beta - 1);
            CHECK(scheme_energy(spec, scheme).total_joules == alg4_energy(n, beta, 1).joules);
         }
      }
   }
}

TEST_CASE("serial scheme") {
   const auto spec = unit_spec(2, 2);
   const auto scheme = serial_schedule(spec);
   CHECK(scheme.makespan() == 4);
   CHECK(scheme.slots[2].transfers == std::vector<Transfer>{{HostId::server(), HostId::client(1), 0}});
   CHECK(scheme_energy(spec, scheme).total_joules == 8);
   CHECK(validate_scheme(spec, scheme).ok());

   // Each client is active only during its own beta slots.
   const auto big = unit_spec(4, 5);
   const auto serial = serial_schedule(big);
   for (std::size_t t = 0; t < serial.makespan(); ++t) {
      CHECK(serial.slots[t].transfers.front().to == HostId::client(static_cast<std::uint32_t>(t / 5)));
   }

   // Half the energy of the serial scheme, up to (n+1)/n.
   const auto large = unit_spec(200, 200);
   const Rational ratio = scheme_energy(large, opt_schedule(large)).total_joules /
                          scheme_energy(large, serial_schedule(large)).total_joules;
   CHECK(ratio == Rational(201, 400));
}

TEST_CASE("parallel plan") {
   HostSpec host;
   host.per_block_joules = 0;
   const std::uint64_t n = 200, beta = 200;
   const auto spec = SystemSpec::homogeneous(n, beta, beta * 2'097'152, host);
   const auto plan = parallel_schedule(spec);
   CHECK(plan.duration_seconds == Rational(n * spec.file_bits(), spec.upload_bps()));
   const auto parallel = plan_energy(spec, plan);
   const auto serial = scheme_energy(spec, serial_schedule(spec));
   CHECK(parallel.total_joules / serial.total_joules == Rational(n + 1, 2));
   CHECK(parallel.delivered_bits == n * spec.file_bits());
   CHECK(parallel.makespan_slots == n * beta);

   // With delta > 0 the ratio formula still holds exactly.
   HostSpec with_delta;
   const auto s2 = SystemSpec::homogeneous(20, 8, 8 * 1'000'000, with_delta);
   const Rational p = 80, b = s2.file_bits(), u = s2.upload_bps();
   const Rational expected = (Rational(21) * p * 20 * b / u + Rational(2 * 20 * 8)) / (s2.delta(HostId::server()) * (2 * 20 * 8));
   CHECK(plan_energy(s2, parallel_schedule(s2)).total_joules / scheme_energy(s2, serial_schedule(s2)).total_joules ==
         expected);

   // n = 1: same as serial.
   const auto one = SystemSpec::homogeneous(1, 8, 8 * 1'000'000, with_delta);
   CHECK(plan_energy(one, parallel_schedule(one)).total_joules ==
         scheme_energy(one, serial_schedule(one)).total_joules);
   CHECK(plan_energy(one, parallel_schedule(one)).total_joules ==
         2 * p * Rational(one.file_bits(), one.upload_bps()) + 2 * 8);

   // Four-state: every host is single-direction.
   const auto four = plan_energy(one, parallel_schedule(one), EnergyModel::four_state());
   CHECK(four.total_joules == Rational(9, 10) * 2 * p * Rational(one.file_bits(), one.upload_bps()) + 2 * 8);
}

TEST_CASE("scheme kind names") {
   for (auto kind : {SchemeKind::Opt, SchemeKind::Alg4, SchemeKind::Serial, SchemeKind::Parallel}) {
      CHECK(parse_scheme_kind(to_string(kind)) == kind);
   }
   CHECK_THROWS_AS(parse_scheme_kind("fast"), std::invalid_argument);
   CHECK_THROWS_AS(build_scheme(SchemeKind::Parallel, unit_spec(2, 2)), std::invalid_argument);
   CHECK(build_scheme(SchemeKind::Serial, unit_spec(2, 2)).makespan() == 4);
}
