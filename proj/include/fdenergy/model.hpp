#pragma once

#include "fdenergy/rational.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdenergy {

//---------------------------------------------------------------------------
// Hosts
//---------------------------------------------------------------------------

/// Identifies the server or a client by the caller's client index.
class HostId {
public:
   static constexpr HostId server() { return HostId(0); }
   static constexpr HostId client(std::uint32_t index) { return HostId(index + 1); }
   /// Inverse of dense(): 0 is the server, i+1 is client i.
   static constexpr HostId from_dense(std::size_t dense) { return HostId(static_cast<std::uint32_t>(dense)); }

   constexpr bool is_server() const { return code_ == 0; }
   constexpr std::uint32_t client_index() const { return code_ - 1; }
   constexpr std::size_t dense() const { return code_; }

   friend constexpr auto operator<=>(HostId, HostId) = default;

   /// "S" or "H<i>".
   std::string to_string() const;

private:
   constexpr explicit HostId(std::uint32_t code) : code_(code) {}
   std::uint32_t code_;
};

struct HostSpec {
   Rational power_watts{80};
   Rational per_block_joules{1};
   Rational switch_seconds{0};
   std::uint64_t upload_bps = 10'000'000;
   std::uint64_t download_bps = 10'000'000;
};

class ModelError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

class NonUniformCapacity : public ModelError {
public:
   NonUniformCapacity() : ModelError("operation requires uniform upload/download capacities with d/u integral") {}
};

/// A complete problem instance: one server, n >= 1 clients, a file of
/// file_bits split into block_count equal blocks.
///
/// Clients keep the caller's indices in every HostId. Internally they are
/// also ranked by ascending per-slot energy (ties by index); schedulers place
/// hosts by rank, so rank 0 is the cheapest client.
class SystemSpec {
public:
   SystemSpec(HostSpec server, std::vector<HostSpec> clients, std::uint64_t file_bits, std::uint64_t block_count);

   static SystemSpec homogeneous(std::size_t n, std::uint64_t block_count, std::uint64_t file_bits,
                                 const HostSpec& host = {});

   std::size_t n() const { return clients_.size(); }
   std::size_t host_count() const { return clients_.size() + 1; }
   std::uint64_t file_bits() const { return file_bits_; }
   std::uint64_t block_count() const { return block_count_; }
   std::uint64_t block_bits() const { return file_bits_ / block_count_; }

   const HostSpec& server() const { return server_; }
   const HostSpec& client(std::size_t index) const { return clients_.at(index); }
   const HostSpec& host(HostId id) const;
   bool contains(HostId id) const { return id.dense() < host_count(); }

   /// All hosts share upload u and download d with d = k*u.
   bool is_uniform() const { return uniform_; }
   std::uint64_t upload_bps() const;
   std::uint64_t download_bps() const;
   std::uint64_t k() const;
   /// s / u.
   Rational slot_seconds() const;

   /// Energy of one active slot: P*s/u + delta.
   const Rational& delta(HostId id) const;
   /// All hosts share power and per-block energy.
   bool is_energy_homogeneous() const;

   /// Caller index of the client at ascending-energy rank r.
   std::uint32_t client_at_rank(std::size_t rank) const { return by_rank_.at(rank); }
   HostId ranked(std::size_t rank) const { return HostId::client(client_at_rank(rank)); }

private:
   HostSpec server_;
   std::vector<HostSpec> clients_;
   std::uint64_t file_bits_;
   std::uint64_t block_count_;
   bool uniform_ = false;
   std::vector<Rational> deltas_;  // dense host order
   std::vector<std::uint32_t> by_rank_;
};

//---------------------------------------------------------------------------
// Schedules
//---------------------------------------------------------------------------

struct Transfer {
   HostId from;
   HostId to;
   std::uint32_t block;

   friend auto operator<=>(const Transfer&, const Transfer&) = default;
};

struct SlotSchedule {
   std::vector<Transfer> transfers;

   bool empty() const { return transfers.empty(); }
   friend bool operator==(const SlotSchedule&, const SlotSchedule&) = default;
};

/// Slot 1 is slots[0]; the makespan is slots.size().
struct Scheme {
   std::vector<SlotSchedule> slots;

   std::size_t makespan() const { return slots.size(); }
   std::size_t transfer_count() const;
   friend bool operator==(const Scheme&, const Scheme&) = default;
};

struct HostState {
   std::vector<std::uint32_t> blocks_held;  // sorted

   bool holds(std::uint32_t block) const;
   friend bool operator==(const HostState&, const HostState&) = default;
};

enum class SlotKind { Tree, Unicyclic };

const char* to_string(SlotKind kind);

//---------------------------------------------------------------------------
// Validation
//---------------------------------------------------------------------------

/// slot is 1-based; 0 marks a whole-scheme failure such as an incomplete client.
struct Violation {
   std::size_t slot = 0;
   std::string rule;
   std::string detail;
};

struct ValidationReport {
   std::vector<Violation> violations;

   bool ok() const { return violations.empty(); }
   bool has(std::string_view rule) const;
};

class InvalidScheme : public ModelError {
public:
   explicit InvalidScheme(ValidationReport report);
   const ValidationReport& report() const { return report_; }

private:
   ValidationReport report_;
};

class DisconnectedSlot : public ModelError {
public:
   DisconnectedSlot() : ModelError("disconnected-slot: transfer graph is not connected") {}
};

/// Checks degree limits, that every served block was received in an earlier
/// slot, that no delivery repeats, and that every client ends with the file.
/// Every failure is reported.
ValidationReport validate_scheme(const SystemSpec& spec, const Scheme& scheme);

/// Throws InvalidScheme when validate_scheme fails.
void require_valid(const SystemSpec& spec, const Scheme& scheme);

/// Tree iff the slot's transfer graph is connected and acyclic, Unicyclic iff
/// connected with one cycle. Throws DisconnectedSlot, or ModelError when the
/// slot is empty or has more edges than vertices.
SlotKind classify_slot(const SystemSpec& spec, const SlotSchedule& slot);

struct NormalityReport {
   bool normal = true;
   std::vector<Violation> violations;
};

/// Normal schemes have no empty slots and only connected slots. Idle hosts
/// cannot be expressed: a host is on in a slot iff it appears in a transfer.
NormalityReport is_normal(const SystemSpec& spec, const Scheme& scheme);

/// states[t][host.dense()] is the host's state after slot t; t = 0 is the
/// initial state. Throws InvalidScheme.
std::vector<std::vector<HostState>> replay_states(const SystemSpec& spec, const Scheme& scheme);

}  // namespace fdenergy
