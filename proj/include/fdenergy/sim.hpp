#pragma once

#include "fdenergy/energy.hpp"
#include "fdenergy/schedulers.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace fdenergy {

//---------------------------------------------------------------------------
// Configuration
//---------------------------------------------------------------------------

struct PowerDistribution {
   enum class Kind { Fixed, Gaussian, Exponential };
   Kind kind = Kind::Fixed;
   Rational mean{80};
   double std_dev = 0;  // Gaussian only
};

struct RateDistribution {
   enum class Kind { Fixed, ExponentialNominal };
   Kind kind = Kind::Fixed;
   std::uint64_t mean_bps = 10'000'000;
};

/// Multiplicative link-rate noise with mean 1; std_dev = 0 disables it.
struct Congestion {
   double std_dev = 0;
   bool enabled() const { return std_dev > 0; }
};

enum class BlockPolicy { Fixed, OptimalBeta };

const char* to_string(BlockPolicy policy);

/// One simulated distribution. With BlockPolicy::Fixed the file is cut into
/// blocks of block_bits, which must divide file_bits. With OptimalBeta the
/// block count minimising the homogeneous optimal energy (at the mean power)
/// is used and the file is padded up to a multiple of it.
struct SimConfig {
   SchemeKind scheme = SchemeKind::Opt;
   EnergyModel energy_model = EnergyModel::two_state();
   Rational switch_seconds{0};
   PowerDistribution power;
   RateDistribution rate;
   Congestion congestion;
   std::uint64_t seed = 42;
   std::size_t n = 200;
   std::uint64_t file_bits = 100ull * 1024 * 1024 * 8;
   std::uint64_t block_bits = 256ull * 1024 * 8;
   BlockPolicy block_policy = BlockPolicy::Fixed;
   Rational per_block_joules{1};
   std::uint64_t k = 1;

   /// Throws std::invalid_argument naming the offending field.
   void validate() const;
   /// (file bits after padding, block count).
   std::pair<std::uint64_t, std::uint64_t> layout() const;
};

/// Flat JSON object with keys scheme, energy_model, switch_seconds,
/// power_dist, power_mean, power_std, rate_dist, rate_mean_bps,
/// congestion_std, seed, n, file_bits, block_bits, and optionally delta,
/// k and block_policy. Missing keys keep their defaults; unknown keys are
/// rejected. Rational-valued keys accept numbers or decimal strings.
SimConfig parse_sim_config(std::string_view json_text);
SimConfig load_sim_config(const std::string& path);

//---------------------------------------------------------------------------
// Randomness
//---------------------------------------------------------------------------

/// Independent generator for (seed, purpose, index): the seed, purpose and
/// index are mixed through SplitMix64 and the result seeds an mt19937_64.
/// Purposes: 1 host power, 2 host rate, 3 congestion.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

/// Uniform in (0, 1] from the top 53 bits of one draw.
double uniform_open0(std::mt19937_64& rng);
/// Box-Muller, one normal per pair of uniforms.
double normal(std::mt19937_64& rng, double mean, double std_dev);
/// Inverse CDF.
double exponential(std::mt19937_64& rng, double mean);

/// Hosts in dense order (server first): power from the power distribution,
/// upload rate from the rate distribution with download = k * upload, and the
/// configured per-block energy and switch time. Non-positive draws are
/// redrawn. Each host uses its own streams, so host i's values do not
/// depend on n.
std::vector<HostSpec> sample_hosts(const SimConfig& config, std::uint64_t seed);

//---------------------------------------------------------------------------
// Simulation
//---------------------------------------------------------------------------

struct OnInterval {
   double start_seconds;
   double end_seconds;
};

/// energy.per_slot_joules is left empty; every other EnergyReport field is
/// filled. Transfer, idle and switch energies add up to the total.
struct SimReport {
   EnergyReport energy;
   std::vector<std::vector<OnInterval>> on_intervals;  // dense host order
   Rational wall_seconds;
   SchemeKind scheme = SchemeKind::Opt;
   std::string model;
   std::size_t n = 0;
   std::uint64_t block_count = 0;
   std::uint64_t file_bits = 0;  // after padding
   std::uint64_t seed = 0;
};

/// Samples hosts, builds the schedule on nominal uniform rates and replays
/// it. Slots run in lock step: a slot lasts as long as its slowest
/// transfer, and a transfer takes block_bits / min(sender's effective
/// upload, receiver's effective download / parallel downloads). Hosts pay
/// their state's power only while transferring; other time goes through the
/// gap policy, and each host pays one switch-on plus one switch-off.
SimReport simulate(const SimConfig& config);

/// As simulate, with the host list supplied instead of sampled.
SimReport simulate_hosts(const SimConfig& config, const std::vector<HostSpec>& hosts);

//---------------------------------------------------------------------------
// Sweeps
//---------------------------------------------------------------------------

struct FileSizeAxis { std::vector<std::uint64_t> file_bits; };
struct HostCountAxis { std::vector<std::size_t> n; };
struct SwitchSecondsAxis { std::vector<Rational> seconds; };
struct BlockPolicyAxis { std::vector<BlockPolicy> policies; };

using SweepAxis = std::variant<FileSizeAxis, HostCountAxis, SwitchSecondsAxis, BlockPolicyAxis>;

struct SweepRow {
   std::string axis;
   std::string value;
   SimReport report;
};

/// One row per (axis value, seed), axis values outer. File sizes that do not
/// divide into blocks are padded. Rows run on up to `threads` threads
/// (0: hardware concurrency); the result does not depend on the count.
std::vector<SweepRow> sweep(const SimConfig& base, const SweepAxis& axis, const std::vector<std::uint64_t>& seeds,
                            unsigned threads = 0);

/// The energy CSV columns plus switch_events, switch_j, seed.
std::string sim_csv_header();
std::string sim_csv_row(const SimReport& report);

}  // namespace fdenergy
