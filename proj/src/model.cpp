#include "fdenergy/model.hpp"

#include <algorithm>
#include <numeric>

namespace fdenergy {

std::string HostId::to_string() const {
   return is_server() ? std::string("S") : "H" + std::to_string(client_index());
}

const char* to_string(SlotKind kind) { return kind == SlotKind::Tree ? "tree" : "unicyclic"; }

//---------------------------------------------------------------------------
namespace {

void check_host(const HostSpec& host, const std::string& name) {
   if (host.power_watts < 0) throw ModelError(name + ": power must be nonnegative");
   if (host.per_block_joules < 0) throw ModelError(name + ": per-block energy must be nonnegative");
   if (host.switch_seconds < 0) throw ModelError(name + ": switch time must be nonnegative");
   if (host.upload_bps == 0 || host.download_bps == 0) throw ModelError(name + ": capacities must be positive");
}

}  // namespace
//---------------------------------------------------------------------------

SystemSpec::SystemSpec(HostSpec server, std::vector<HostSpec> clients, std::uint64_t file_bits,
                       std::uint64_t block_count)
   : server_(std::move(server)), clients_(std::move(clients)), file_bits_(file_bits), block_count_(block_count) {
   if (clients_.empty()) throw ModelError("at least one client is required");
   if (file_bits_ == 0) throw ModelError("file size must be positive");
   if (block_count_ == 0) throw ModelError("block count must be positive");
   if (file_bits_ % block_count_ != 0) {
      throw ModelError("block count " + std::to_string(block_count_) + " does not divide file size " +
                       std::to_string(file_bits_) + " bits; pad the file");
   }
   check_host(server_, "server");
   for (std::size_t i = 0; i < clients_.size(); ++i) check_host(clients_[i], "client " + std::to_string(i));

   // The server never downloads, so its download capacity is not constrained.
   const auto u = server_.upload_bps;
   const auto d = clients_.front().download_bps;
   uniform_ = d % u == 0 && std::all_of(clients_.begin(), clients_.end(), [&](const HostSpec& h) {
                 return h.upload_bps == u && h.download_bps == d;
              });

   by_rank_.resize(clients_.size());
   std::iota(by_rank_.begin(), by_rank_.end(), 0u);
   if (uniform_) {
      const Rational gamma(block_bits(), u);
      deltas_.reserve(host_count());
      deltas_.push_back(server_.power_watts * gamma + server_.per_block_joules);
      for (const auto& c : clients_) deltas_.push_back(c.power_watts * gamma + c.per_block_joules);
      std::stable_sort(by_rank_.begin(), by_rank_.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return deltas_[a + 1] < deltas_[b + 1]; });
   }
}

SystemSpec SystemSpec::homogeneous(std::size_t n, std::uint64_t block_count, std::uint64_t file_bits,
                                   const HostSpec& host) {
   return SystemSpec(host, std::vector<HostSpec>(n, host), file_bits, block_count);
}

const HostSpec& SystemSpec::host(HostId id) const {
   if (id.is_server()) return server_;
   return clients_.at(id.client_index());
}

std::uint64_t SystemSpec::upload_bps() const {
   if (!uniform_) throw NonUniformCapacity();
   return server_.upload_bps;
}

std::uint64_t SystemSpec::download_bps() const {
   if (!uniform_) throw NonUniformCapacity();
   return clients_.front().download_bps;
}

std::uint64_t SystemSpec::k() const { return download_bps() / upload_bps(); }

Rational SystemSpec::slot_seconds() const { return Rational(block_bits(), upload_bps()); }

const Rational& SystemSpec::delta(HostId id) const {
   if (!uniform_) throw NonUniformCapacity();
   return deltas_.at(id.dense());
}

bool SystemSpec::is_energy_homogeneous() const {
   return std::all_of(clients_.begin(), clients_.end(), [&](const HostSpec& h) {
      return h.power_watts == server_.power_watts && h.per_block_joules == server_.per_block_joules;
   });
}

std::size_t Scheme::transfer_count() const {
   std::size_t total = 0;
   for (const auto& slot : slots) total += slot.transfers.size();
   return total;
}

bool HostState::holds(std::uint32_t block) const {
   return std::binary_search(blocks_held.begin(), blocks_held.end(), block);
}

bool ValidationReport::has(std::string_view rule) const {
   return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

namespace {

std::string summarize(const ValidationReport& report) {
   std::string text = "invalid scheme";
   if (!report.violations.empty()) {
      const auto& first = report.violations.front();
      text += ": " + first.rule + " (slot " + std::to_string(first.slot) + ") " + first.detail;
      if (report.violations.size() > 1) text += " and " + std::to_string(report.violations.size() - 1) + " more";
   }
   return text;
}

}  // namespace

InvalidScheme::InvalidScheme(ValidationReport report) : ModelError(summarize(report)), report_(std::move(report)) {}

//---------------------------------------------------------------------------
// Validation
//---------------------------------------------------------------------------

ValidationReport validate_scheme(const SystemSpec& spec, const Scheme& scheme) {
   ValidationReport report;
   auto fail = [&](std::size_t slot, const char* rule, std::string detail) {
      report.violations.push_back({slot, rule, std::move(detail)});
   };
   if (!spec.is_uniform()) {
      fail(0, "non-uniform-capacity", "degree limits need d = k*u for every host");
      return report;
   }

   const std::size_t hosts = spec.host_count();
   const std::uint64_t beta = spec.block_count();
   const std::uint64_t k = spec.k();
   // held[dense * beta + block]; the server row is always full.
   std::vector<std::uint8_t> held(hosts * beta, 0);
   std::fill_n(held.begin(), beta, 1);
   std::vector<std::uint32_t> uploads(hosts);
   std::vector<std::uint32_t> downloads(hosts);

   for (std::size_t index = 0; index < scheme.slots.size(); ++index) {
      const std::size_t slot = index + 1;
      const auto& transfers = scheme.slots[index].transfers;
      std::fill(uploads.begin(), uploads.end(), 0);
      std::fill(downloads.begin(), downloads.end(), 0);
      std::vector<const Transfer*> accepted;
      accepted.reserve(transfers.size());

      for (const auto& t : transfers) {
         const std::string label = t.from.to_string() + "->" + t.to.to_string() + ":b" + std::to_string(t.block);
         if (!spec.contains(t.from) || !spec.contains(t.to)) {
            fail(slot, "unknown-host", label);
            continue;
         }
         if (t.block >= beta) {
            fail(slot, "block-out-of-range", label);
            continue;
         }
         if (t.from == t.to) {
            fail(slot, "self-transfer", label);
            continue;
         }
         if (t.to.is_server()) {
            fail(slot, "server-download", label);
            continue;
         }
         ++uploads[t.from.dense()];
         ++downloads[t.to.dense()];
         if (!held[t.from.dense() * beta + t.block]) fail(slot, "block-not-held", label);
         if (held[t.to.dense() * beta + t.block]) fail(slot, "duplicate-delivery", label);
         accepted.push_back(&t);
      }
      for (std::size_t h = 0; h < hosts; ++h) {
         const auto name = HostId::from_dense(h).to_string();
         if (uploads[h] > 1) fail(slot, "upload-degree", name + " uploads " + std::to_string(uploads[h]) + " blocks");
         if (downloads[h] > k) {
            fail(slot, "download-degree", name + " downloads " + std::to_string(downloads[h]) + " blocks, k=" +
                                              std::to_string(k));
         }
      }
      // Same block to the same receiver twice within one slot.
      std::sort(accepted.begin(), accepted.end(), [](const Transfer* a, const Transfer* b) {
         return std::pair(a->to, a->block) < std::pair(b->to, b->block);
      });
      for (std::size_t i = 1; i < accepted.size(); ++i) {
         if (accepted[i]->to == accepted[i - 1]->to && accepted[i]->block == accepted[i - 1]->block) {
            fail(slot, "duplicate-delivery",
                 accepted[i]->to.to_string() + " receives b" + std::to_string(accepted[i]->block) + " twice");
         }
      }
      for (const Transfer* t : accepted) held[t->to.dense() * beta + t->block] = 1;
   }

   for (std::size_t h = 1; h < hosts; ++h) {
      const auto first = held.begin() + static_cast<std::ptrdiff_t>(h * beta);
      const auto missing = std::count(first, first + static_cast<std::ptrdiff_t>(beta), 0);
      if (missing > 0) {
         fail(0, "incomplete-client",
              HostId::from_dense(h).to_string() + " is missing " + std::to_string(missing) + " blocks");
      }
   }
   return report;
}

void require_valid(const SystemSpec& spec, const Scheme& scheme) {
   auto report = validate_scheme(spec, scheme);
   if (!report.ok()) throw InvalidScheme(std::move(report));
}

//---------------------------------------------------------------------------
// Transfer graphs
//---------------------------------------------------------------------------

namespace {

struct DisjointSets {
   std::vector<std::size_t> parent;

   explicit DisjointSets(std::size_t size) : parent(size) { std::iota(parent.begin(), parent.end(), 0); }
   std::size_t find(std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
   }
   void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

SlotKind classify_slot(const SystemSpec& spec, const SlotSchedule& slot) {
   if (slot.empty()) throw ModelError("empty-slot: cannot classify a slot without transfers");
   std::vector<std::size_t> vertices;
   for (const auto& t : slot.transfers) {
      if (!spec.contains(t.from) || !spec.contains(t.to)) throw ModelError("unknown-host in slot");
      vertices.push_back(t.from.dense());
      vertices.push_back(t.to.dense());
   }
   std::sort(vertices.begin(), vertices.end());
   vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());

   DisjointSets sets(spec.host_count());
   for (const auto& t : slot.transfers) sets.unite(t.from.dense(), t.to.dense());
   const auto root = sets.find(vertices.front());
   for (auto v : vertices) {
      if (sets.find(v) != root) throw DisconnectedSlot();
   }
   const std::size_t edges = slot.transfers.size();
   if (edges + 1 == vertices.size()) return SlotKind::Tree;
   if (edges == vertices.size()) return SlotKind::Unicyclic;
   throw ModelError("slot has more transfers than hosts; some host uploads twice");
}

NormalityReport is_normal(const SystemSpec& spec, const Scheme& scheme) {
   NormalityReport report;
   for (std::size_t index = 0; index < scheme.slots.size(); ++index) {
      const auto& slot = scheme.slots[index];
      if (slot.empty()) {
         report.violations.push_back({index + 1, "empty-slot", "no active hosts"});
         continue;
      }
      try {
         classify_slot(spec, slot);
      } catch (const DisconnectedSlot&) {
         report.violations.push_back({index + 1, "disconnected-slot", "transfer graph has several components"});
      }
   }
   report.normal = report.violations.empty();
   return report;
}

std::vector<std::vector<HostState>> replay_states(const SystemSpec& spec, const Scheme& scheme) {
   require_valid(spec, scheme);
   const std::size_t hosts = spec.host_count();
   const auto beta = static_cast<std::uint32_t>(spec.block_count());

   std::vector<HostState> current(hosts);
   current[0].blocks_held.resize(beta);
   std::iota(current[0].blocks_held.begin(), current[0].blocks_held.end(), 0u);

   std::vector<std::vector<HostState>> history;
   history.reserve(scheme.slots.size() + 1);
   history.push_back(current);
   for (const auto& slot : scheme.slots) {
      for (const auto& t : slot.transfers) {
         auto& blocks = current[t.to.dense()].blocks_held;
         blocks.insert(std::upper_bound(blocks.begin(), blocks.end(), t.block), t.block);
      }
      history.push_back(current);
   }
   return history;
}

}  // namespace fdenergy
