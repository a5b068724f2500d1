#include "fdenergy/sim.hpp"

#include "fdenergy/bounds.hpp"
#include "fdenergy/gap_policy.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fdenergy {

const char* to_string(BlockPolicy policy) {
   return policy == BlockPolicy::Fixed ? "fixed" : "optimal-beta";
}

void SimConfig::validate() const {
   auto require = [](bool ok, const std::string& message) {
      if (!ok) throw std::invalid_argument(message);
   };
   energy_model.validate();
   require(n >= 1, "n must be at least 1");
   require(file_bits > 0, "file_bits must be positive");
   require(block_bits > 0, "block_bits must be positive");
   require(block_policy != BlockPolicy::Fixed || file_bits % block_bits == 0,
           "block_bits " + std::to_string(block_bits) + " does not divide file_bits " + std::to_string(file_bits));
   require(switch_seconds >= 0, "switch_seconds must be nonnegative");
   require(power.mean > 0, "power_mean must be positive");
   require(power.std_dev >= 0, "power_std must be nonnegative");
   require(rate.mean_bps > 0, "rate_mean_bps must be positive");
   require(congestion.std_dev >= 0, "congestion_std must be nonnegative");
   require(per_block_joules >= 0, "delta must be nonnegative");
   require(k >= 1, "k must be at least 1");
   require(scheme != SchemeKind::Opt || k == 1, "scheme opt requires k = 1");
}

std::pair<std::uint64_t, std::uint64_t> SimConfig::layout() const {
   if (block_policy == BlockPolicy::Fixed) return {file_bits, file_bits / block_bits};
   const auto beta =
      optimal_block_count(power.mean, Rational(file_bits), Rational(rate.mean_bps), per_block_joules, n).beta;
   return {(file_bits + beta - 1) / beta * beta, beta};
}

//---------------------------------------------------------------------------

namespace {

using nlohmann::json;

Rational json_rational(const json& value, const std::string& key) {
   if (value.is_string()) return parse_rational(value.get<std::string>());
   if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
   if (value.is_number()) return parse_rational(value.dump());
   throw std::invalid_argument("config key '" + key + "' must be a number");
}

std::uint64_t json_count(const json& value, const std::string& key) {
   if (value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
      return value.get<std::uint64_t>();
   }
   if (value.is_number_float()) {
      const double d = value.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
   }
   throw std::invalid_argument("config key '" + key + "' must be a nonnegative integer");
}

std::string json_text(const json& value, const std::string& key) {
   if (!value.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
   return value.get<std::string>();
}

}  // namespace

SimConfig parse_sim_config(std::string_view json_text_in) {
   json doc;
   try {
      doc = json::parse(json_text_in);
   } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
   }
   if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");

   SimConfig config;
   std::string power_dist = "fixed", rate_dist = "fixed";
   for (const auto& [key, value] : doc.items()) {
      if (key == "scheme") config.scheme = parse_scheme_kind(json_text(value, key));
      else if (key == "energy_model") config.energy_model = parse_energy_model(json_text(value, key));
      else if (key == "switch_seconds") config.switch_seconds = json_rational(value, key);
      else if (key == "power_dist") power_dist = json_text(value, key);
      else if (key == "power_mean") config.power.mean = json_rational(value, key);
      else if (key == "power_std") config.power.std_dev = to_double(json_rational(value, key));
      else if (key == "rate_dist") rate_dist = json_text(value, key);
      else if (key == "rate_mean_bps") config.rate.mean_bps = json_count(value, key);
      else if (key == "congestion_std") config.congestion.std_dev = to_double(json_rational(value, key));
      else if (key == "seed") config.seed = json_count(value, key);
      else if (key == "n") config.n = json_count(value, key);
      else if (key == "file_bits") config.file_bits = json_count(value, key);
      else if (key == "block_bits") config.block_bits = json_count(value, key);
      else if (key == "delta") config.per_block_joules = json_rational(value, key);
      else if (key == "k") config.k = json_count(value, key);
      else if (key == "block_policy") {
         const auto policy = json_text(value, key);
         if (policy == "fixed") config.block_policy = BlockPolicy::Fixed;
         else if (policy == "optimal-beta") config.block_policy = BlockPolicy::OptimalBeta;
         else throw std::invalid_argument("block_policy must be fixed or optimal-beta");
      } else {
         throw std::invalid_argument("unknown config key '" + key + "'");
      }
   }
   if (power_dist == "fixed") config.power.kind = PowerDistribution::Kind::Fixed;
   else if (power_dist == "gaussian") config.power.kind = PowerDistribution::Kind::Gaussian;
   else if (power_dist == "exponential") config.power.kind = PowerDistribution::Kind::Exponential;
   else throw std::invalid_argument("power_dist must be fixed, gaussian or exponential");
   if (rate_dist == "fixed") config.rate.kind = RateDistribution::Kind::Fixed;
   else if (rate_dist == "exponential") config.rate.kind = RateDistribution::Kind::ExponentialNominal;
   else throw std::invalid_argument("rate_dist must be fixed or exponential");
   config.validate();
   return config;
}

SimConfig load_sim_config(const std::string& path) {
   std::ifstream in(path);
   if (!in) throw std::invalid_argument("cannot open config file " + path);
   std::ostringstream text;
   text << in.rdbuf();
   return parse_sim_config(text.str());
}

//---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
   x += 0x9E3779B97F4A7C15ull;
   x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
   x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
   return x ^ (x >> 31);
}

constexpr std::uint64_t kPowerStream = 1;
constexpr std::uint64_t kRateStream = 2;
constexpr std::uint64_t kCongestionStream = 3;

/// Congestion factor: normal around 1, redrawn until positive.
double congestion_factor(std::mt19937_64& rng, double std_dev) {
   for (;;) {
      const double f = normal(rng, 1.0, std_dev);
      if (f > 0) return f;
   }
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
   std::uint64_t s = splitmix64(seed);
   s = splitmix64(s ^ purpose);
   s = splitmix64(s ^ index);
   return std::mt19937_64(s);
}

double uniform_open0(std::mt19937_64& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

double normal(std::mt19937_64& rng, double mean, double std_dev) {
   const double u1 = uniform_open0(rng);
   const double u2 = uniform_open0(rng);
   return mean + std_dev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double exponential(std::mt19937_64& rng, double mean) { return -mean * std::log(uniform_open0(rng)); }

std::vector<HostSpec> sample_hosts(const SimConfig& config, std::uint64_t seed) {
   config.validate();
   std::vector<HostSpec> hosts(config.n + 1);
   const double power_mean = to_double(config.power.mean);
   for (std::size_t h = 0; h < hosts.size(); ++h) {
      auto& host = hosts[h];
      auto power_rng = make_stream(seed, kPowerStream, h);
      switch (config.power.kind) {
         case PowerDistribution::Kind::Fixed: host.power_watts = config.power.mean; break;
         case PowerDistribution::Kind::Gaussian: {
            double p;
            do p = normal(power_rng, power_mean, config.power.std_dev);
            while (p <= 0);
            host.power_watts = from_double(p);
            break;
         }
         case PowerDistribution::Kind::Exponential: {
            double p;
            do p = exponential(power_rng, power_mean);
            while (p <= 0);
            host.power_watts = from_double(p);
            break;
         }
      }
      std::uint64_t up = config.rate.mean_bps;
      if (config.rate.kind == RateDistribution::Kind::ExponentialNominal) {
         auto rate_rng = make_stream(seed, kRateStream, h);
         double r;
         do r = std::round(exponential(rate_rng, static_cast<double>(config.rate.mean_bps)));
         while (r < 1);
         up = static_cast<std::uint64_t>(r);
      }
      host.upload_bps = up;
      host.download_bps = up * config.k;
      host.per_block_joules = config.per_block_joules;
      host.switch_seconds = config.switch_seconds;
   }
   return hosts;
}

//---------------------------------------------------------------------------

namespace {

/// Per-host timeline in nominal-slot units. Integral when nothing is
/// perturbed, so converting through from_double stays exact.
struct Timeline {
   bool started = false;
   double last_end = 0;
   std::vector<OnInterval> intervals;  // in units until finish()
};

class Accountant {
public:
   Accountant(const SimConfig& config, const std::vector<HostSpec>& hosts, Rational gamma)
      : config_(config), hosts_(hosts), gamma_(std::move(gamma)), timelines_(hosts.size()),
        units_(hosts.size(), {0.0, 0.0}), active_slots_(hosts.size(), 0) {}

   /// Host h is busy over [start, end) units with the given state.
   void activity(std::size_t h, double start, double end, bool duplex, std::uint64_t blocks_charged,
                 EnergyReport& report) {
      auto& line = timelines_[h];
      if (!line.started) {
         line.started = true;
         line.intervals.push_back({start, end});
      } else {
         const double gap = start - line.last_end;
         if (gap > 0) {
            const auto& host = hosts_[h];
            const auto decision = gap_policy(host.power_watts, host.switch_seconds, from_double(gap) * gamma_,
                                             config_.energy_model.idle());
            report.per_host_joules[h] += decision.joules;
            if (decision.action == GapAction::OffOn) {
               report.switch_joules += decision.joules;
               report.switch_events += 2;
               line.intervals.push_back({start, end});
            } else {
               report.idle_joules += decision.joules;
            }
         }
         line.intervals.back().end_seconds = std::max(line.intervals.back().end_seconds, end);
      }
      line.last_end = std::max(line.last_end, end);
      units_[h][duplex ? 1 : 0] += end - start;
      active_slots_[h] += blocks_charged;
   }

   /// Adds active-state energy and the per-host start/stop cycle.
   void finish(EnergyReport& report, std::vector<std::vector<OnInterval>>& intervals) {
      const auto& model = config_.energy_model;
      const Rational single = model.active_fraction(true, false);
      const Rational duplex = model.active_fraction(true, true);
      const double gamma_seconds = to_double(gamma_);
      intervals.assign(hosts_.size(), {});
      for (std::size_t h = 0; h < hosts_.size(); ++h) {
         const auto& host = hosts_[h];
         if (!timelines_[h].started) continue;
         const Rational active = host.power_watts * gamma_ *
                                    (single * from_double(units_[h][0]) + duplex * from_double(units_[h][1])) +
                                 host.per_block_joules * active_slots_[h];
         const Rational cycle = 2 * host.power_watts * host.switch_seconds;
         report.transfer_joules += active;
         report.switch_joules += cycle;
         report.switch_events += 2;
         report.per_host_joules[h] += active + cycle;
         for (const auto& iv : timelines_[h].intervals) {
            intervals[h].push_back({iv.start_seconds * gamma_seconds, iv.end_seconds * gamma_seconds});
         }
      }
      for (const auto& e : report.per_host_joules) report.total_joules += e;
   }

private:
   const SimConfig& config_;
   const std::vector<HostSpec>& hosts_;
   Rational gamma_;
   std::vector<Timeline> timelines_;
   std::vector<std::array<double, 2>> units_;
   std::vector<std::uint64_t> active_slots_;
};

void simulate_slotted(const SimConfig& config, const std::vector<HostSpec>& hosts, std::uint64_t file_bits,
                      std::uint64_t beta, const Rational& gamma, SimReport& report) {
   const std::size_t count = hosts.size();
   const auto u_nominal = static_cast<double>(config.rate.mean_bps);

   std::vector<HostSpec> nominal = hosts;
   for (auto& h : nominal) {
      h.upload_bps = config.rate.mean_bps;
      h.download_bps = config.rate.mean_bps * config.k;
   }
   const SystemSpec spec(nominal.front(), std::vector<HostSpec>(nominal.begin() + 1, nominal.end()), file_bits, beta);
   const Scheme scheme = build_scheme(config.scheme, spec);
   require_valid(spec, scheme);

   std::vector<std::mt19937_64> noise;
   if (config.congestion.enabled()) {
      for (std::size_t h = 0; h < count; ++h) noise.push_back(make_stream(config.seed, kCongestionStream, h));
   }

   Accountant accountant(config, hosts, gamma);
   std::vector<std::uint8_t> role(count, 0);
   std::vector<std::uint32_t> in_degree(count, 0);
   std::vector<double> factor(count, 1.0), busy(count, 0.0);
   std::vector<std::size_t> touched;
   double clock = 0;

   for (const auto& slot : scheme.slots) {
      touched.clear();
      for (const auto& t : slot.transfers) {
         for (auto [id, bit] : {std::pair{t.from, std::uint8_t{1}}, std::pair{t.to, std::uint8_t{2}}}) {
            auto& r = role[id.dense()];
            if (r == 0) touched.push_back(id.dense());
            r |= bit;
         }
         ++in_degree[t.to.dense()];
      }
      std::sort(touched.begin(), touched.end());
      for (auto h : touched) factor[h] = noise.empty() ? 1.0 : congestion_factor(noise[h], config.congestion.std_dev);

      double length = 0;
      for (const auto& t : slot.transfers) {
         const auto from = t.from.dense(), to = t.to.dense();
         const double up = static_cast<double>(hosts[from].upload_bps) * factor[from];
         const double down = static_cast<double>(hosts[to].download_bps) * factor[to] / in_degree[to];
         const double units = u_nominal / std::min(up, down);
         busy[from] = std::max(busy[from], units);
         busy[to] = std::max(busy[to], units);
         length = std::max(length, units);
      }
      for (auto h : touched) {
         accountant.activity(h, clock, clock + busy[h], role[h] == 3, 1, report.energy);
         role[h] = 0;
         in_degree[h] = 0;
         busy[h] = 0;
      }
      clock += length;
   }

   accountant.finish(report.energy, report.on_intervals);
   report.energy.makespan_slots = scheme.makespan();
   report.wall_seconds = from_double(clock) * gamma;
}

/// All clients download at once; each gets min(server upload / n, own
/// download), and the server stays on until the slowest client finishes.
void simulate_parallel(const SimConfig& config, const std::vector<HostSpec>& hosts, std::uint64_t beta,
                       const Rational& gamma, SimReport& report) {
   const std::size_t n = hosts.size() - 1;
   const auto u_nominal = static_cast<double>(config.rate.mean_bps);
   std::vector<double> factor(hosts.size(), 1.0);
   if (config.congestion.enabled()) {
      for (std::size_t h = 0; h < hosts.size(); ++h) {
         auto rng = make_stream(config.seed, kCongestionStream, h);
         factor[h] = congestion_factor(rng, config.congestion.std_dev);
      }
   }
   const double server_up = static_cast<double>(hosts[0].upload_bps) * factor[0];
   const double per_block_server = static_cast<double>(n) * u_nominal / server_up;

   Accountant accountant(config, hosts, gamma);
   double longest = 0;
   for (std::size_t h = 1; h <= n; ++h) {
      const double per_block_client = u_nominal / (static_cast<double>(hosts[h].download_bps) * factor[h]);
      const double units = static_cast<double>(beta) * std::max(per_block_server, per_block_client);
      accountant.activity(h, 0, units, false, beta, report.energy);
      longest = std::max(longest, units);
   }
   accountant.activity(0, 0, longest, false, n * beta, report.energy);
   accountant.finish(report.energy, report.on_intervals);
   report.energy.makespan_slots = static_cast<std::size_t>(std::ceil(longest));
   report.wall_seconds = from_double(longest) * gamma;
}

}  // namespace

SimReport simulate_hosts(const SimConfig& config, const std::vector<HostSpec>& hosts) {
   config.validate();
   if (hosts.size() != config.n + 1) {
      throw std::invalid_argument("expected " + std::to_string(config.n + 1) + " hosts, got " +
                                  std::to_string(hosts.size()));
   }
   const auto [file_bits, beta] = config.layout();

   SimReport report;
   report.scheme = config.scheme;
   report.model = config.energy_model.name();
   report.n = config.n;
   report.block_count = beta;
   report.file_bits = file_bits;
   report.seed = config.seed;
   report.energy.per_host_joules.assign(hosts.size(), Rational(0));

   const Rational gamma(file_bits / beta, config.rate.mean_bps);
   if (config.scheme == SchemeKind::Parallel) {
      simulate_parallel(config, hosts, beta, gamma, report);
   } else {
      simulate_slotted(config, hosts, file_bits, beta, gamma, report);
   }
   report.energy.delivered_bits = config.n * file_bits;
   report.energy.energy_per_bit = report.energy.total_joules / Rational(report.energy.delivered_bits);
   return report;
}

SimReport simulate(const SimConfig& config) { return simulate_hosts(config, sample_hosts(config, config.seed)); }

//---------------------------------------------------------------------------

std::vector<SweepRow> sweep(const SimConfig& base, const SweepAxis& axis, const std::vector<std::uint64_t>& seeds,
                            unsigned threads) {
   if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
   struct Job {
      std::string axis, value;
      SimConfig config;
   };
   std::vector<Job> jobs;
   auto add = [&](const std::string& name, const std::string& value, const SimConfig& config) {
      for (auto seed : seeds) {
         SimConfig c = config;
         c.seed = seed;
         if (c.block_policy == BlockPolicy::Fixed && c.file_bits % c.block_bits != 0) {
            c.file_bits = (c.file_bits / c.block_bits + 1) * c.block_bits;
         }
         jobs.push_back({name, value, std::move(c)});
      }
   };
   std::visit(
      [&](const auto& a) {
         using A = std::decay_t<decltype(a)>;
         SimConfig c = base;
         if constexpr (std::is_same_v<A, FileSizeAxis>) {
            if (a.file_bits.empty()) throw std::invalid_argument("empty file size list");
            for (auto v : a.file_bits) {
               c.file_bits = v;
               add("file_bits", std::to_string(v), c);
            }
         } else if constexpr (std::is_same_v<A, HostCountAxis>) {
            if (a.n.empty()) throw std::invalid_argument("empty host count list");
            for (auto v : a.n) {
               c.n = v;
               add("n", std::to_string(v), c);
            }
         } else if constexpr (std::is_same_v<A, SwitchSecondsAxis>) {
            if (a.seconds.empty()) throw std::invalid_argument("empty switch time list");
            for (const auto& v : a.seconds) {
               c.switch_seconds = v;
               add("switch_seconds", format_decimal(v), c);
            }
         } else {
            if (a.policies.empty()) throw std::invalid_argument("empty block policy list");
            for (auto v : a.policies) {
               c.block_policy = v;
               add("block_policy", to_string(v), c);
            }
         }
      },
      axis);
   for (const auto& job : jobs) job.config.validate();

   std::vector<std::optional<SweepRow>> rows(jobs.size());
   std::vector<std::exception_ptr> errors(jobs.size());
   std::atomic<std::size_t> next{0};
   auto worker = [&] {
      for (std::size_t i; (i = next++) < jobs.size();) {
         try {
            rows[i] = SweepRow{jobs[i].axis, jobs[i].value, simulate(jobs[i].config)};
         } catch (...) {
            errors[i] = std::current_exception();
         }
      }
   };
   if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
   threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
   if (threads <= 1) {
      worker();
   } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
   }
   std::vector<SweepRow> out;
   out.reserve(jobs.size());
   for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      out.push_back(std::move(*rows[i]));
   }
   return out;
}

std::string sim_csv_header() { return energy_csv_header() + ",switch_events,switch_j,seed"; }

std::string sim_csv_row(const SimReport& report) {
   std::ostringstream out;
   out << to_string(report.scheme) << ',' << report.n << ',' << report.block_count << ',' << report.file_bits << ','
       << report.model << ',' << format_decimal(report.energy.total_joules) << ',' << report.energy.makespan_slots
       << ',' << format_decimal(report.energy.energy_per_bit) << ',' << report.energy.switch_events << ','
       << format_decimal(report.energy.switch_joules) << ',' << report.seed;
   return out.str();
}

}  // namespace fdenergy
