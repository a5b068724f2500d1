#pragma once

#include "fdenergy/energy.hpp"
#include "fdenergy/model.hpp"

#include <string_view>
#include <vector>

namespace fdenergy {

enum class SchemeKind { Opt, Alg4, Serial, Parallel };

const char* to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(std::string_view name);

/// Optimal scheme for d = u. Dispatches on n versus beta:
///  - beta == n: server seeds one block per client, then n-1 ring slots.
///  - beta >  n: server keeps feeding the last client while clients pass
///               blocks down a chain, then n-1 ring slots.
///  - beta <  n: after seeding, the cheaper of the server and the cheapest
///               client pushes block 0 to each client still empty while the
///               other blocks shift along; beta-1 rotation slots finish.
/// Hosts are placed by ascending per-slot energy. Throws std::invalid_argument
/// when k != 1 and NonUniformCapacity for non-uniform capacities.
Scheme opt_schedule(const SystemSpec& spec);

/// Two-download scheme for beta > n: n-by-n block groups are distributed in
/// ring slots while the server seeds the next group's diagonal; the last
/// group of n + beta mod n blocks reuses the beta > n chain-and-ring tail.
/// No host receives more than two blocks per slot. Throws std::invalid_argument
/// when k < 2 or beta <= n.
Scheme alg4_schedule(const SystemSpec& spec);

/// Server uploads the whole file to client 0, then client 1, ...:
/// slot i*beta + j + 1 is {S -> H_i : b_j}.
Scheme serial_schedule(const SystemSpec& spec);

/// Opt, Alg4 or Serial.
Scheme build_scheme(SchemeKind kind, const SystemSpec& spec);

//---------------------------------------------------------------------------
// Continuous (non-slotted) plans
//---------------------------------------------------------------------------

enum class PlanRole { Upload, Download };

struct PlanInterval {
   Rational start_seconds;
   Rational end_seconds;
   PlanRole role;
};

/// Host activity outside the slot formalism. Indexed by HostId::dense().
struct ContinuousPlan {
   std::vector<std::vector<PlanInterval>> intervals;
   std::vector<std::uint64_t> blocks_served;
   std::vector<std::uint64_t> blocks_received;
   Rational duration_seconds;
};

/// Every client downloads from the server at once, sharing its upload
/// capacity equally, so all n+1 hosts are on for n*B/u seconds.
ContinuousPlan parallel_schedule(const SystemSpec& spec);

/// Energy of a continuous plan: each host draws fraction * P over its
/// intervals and delta per block served and per block received.
EnergyReport plan_energy(const SystemSpec& spec, const ContinuousPlan& plan,
                         const EnergyModel& model = EnergyModel::two_state());

}  // namespace fdenergy
