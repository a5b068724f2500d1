#include "fdenergy/cli.hpp"

#include "fdenergy/bounds.hpp"
#include "fdenergy/interchange.hpp"
#include "fdenergy/reduction.hpp"
#include "fdenergy/schedulers.hpp"
#include "fdenergy/sim.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fdenergy::cli {

namespace {

constexpr std::uint64_t kBlockBits = 256ull * 1024 * 8;

struct SpecFlags {
   std::size_t n = 3;
   std::uint64_t beta = 4;
   std::uint64_t k = 1;
   std::string power = "80";
   std::string delta = "1";
   std::uint64_t u = 10'000'000;
   std::optional<std::uint64_t> file_bits;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
   cmd->add_option("--n", f.n, "number of clients")->check(CLI::PositiveNumber);
   cmd->add_option("--beta", f.beta, "number of blocks")->check(CLI::PositiveNumber);
   cmd->add_option("--k", f.k, "download/upload capacity ratio")->check(CLI::PositiveNumber);
   cmd->add_option("--P", f.power, "nominal power in watts");
   cmd->add_option("--delta", f.delta, "energy per block in joules");
   cmd->add_option("--u", f.u, "upload capacity in bit/s")->check(CLI::PositiveNumber);
   cmd->add_option("--B", f.file_bits, "file size in bits (default beta * 256 kB)")->check(CLI::PositiveNumber);
}

SystemSpec make_spec(const SpecFlags& f) {
   HostSpec host;
   host.power_watts = parse_rational(f.power);
   host.per_block_joules = parse_rational(f.delta);
   host.upload_bps = f.u;
   host.download_bps = f.u * f.k;
   return SystemSpec::homogeneous(f.n, f.beta, f.file_bits.value_or(f.beta * kBlockBits), host);
}

struct SimFlags {
   std::optional<std::string> config;
   std::optional<std::string> scheme, model, switch_seconds, power_dist, power_mean, rate_dist, delta, block_policy;
   std::optional<double> power_std, congestion_std;
   std::optional<std::uint64_t> rate_mean, file_bits, block_bits, k, seed;
   std::optional<std::size_t> n;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f, bool with_scheme) {
   cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
   if (with_scheme) cmd->add_option("--scheme", f.scheme, "opt|alg4|serial|parallel");
   cmd->add_option("--model", f.model, "two-state|four-state");
   cmd->add_option("--n", f.n, "number of clients")->check(CLI::PositiveNumber);
   cmd->add_option("--file-bits", f.file_bits, "file size in bits")->check(CLI::PositiveNumber);
   cmd->add_option("--block-bits", f.block_bits, "block size in bits")->check(CLI::PositiveNumber);
   cmd->add_option("--block-policy", f.block_policy, "fixed|optimal-beta");
   cmd->add_option("--switch-seconds", f.switch_seconds, "on/off switch time");
   cmd->add_option("--power-dist", f.power_dist, "fixed|gaussian|exponential");
   cmd->add_option("--power-mean", f.power_mean, "mean nominal power in watts");
   cmd->add_option("--power-std", f.power_std, "standard deviation of the Gaussian power");
   cmd->add_option("--rate-dist", f.rate_dist, "fixed|exponential");
   cmd->add_option("--rate-mean", f.rate_mean, "(mean) upload rate in bit/s")->check(CLI::PositiveNumber);
   cmd->add_option("--congestion-std", f.congestion_std, "congestion factor deviation (0: off)");
   cmd->add_option("--delta", f.delta, "energy per block in joules");
   cmd->add_option("--k", f.k, "download/upload capacity ratio")->check(CLI::PositiveNumber);
   cmd->add_option("--seed", f.seed, "random seed (default 42)");
}

/// Config file first, then flags, through the config parser so both paths
/// share one set of rules.
SimConfig make_sim_config(const SimFlags& f) {
   nlohmann::json doc = nlohmann::json::object();
   if (f.config) {
      std::ifstream in(*f.config);
      try {
         doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
         throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
      }
      if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
   }
   auto set = [&](const char* key, const auto& value) {
      if (value) doc[key] = *value;
   };
   set("scheme", f.scheme);
   set("energy_model", f.model);
   set("switch_seconds", f.switch_seconds);
   set("power_dist", f.power_dist);
   set("power_mean", f.power_mean);
   set("power_std", f.power_std);
   set("rate_dist", f.rate_dist);
   set("rate_mean_bps", f.rate_mean);
   set("congestion_std", f.congestion_std);
   set("seed", f.seed);
   set("n", f.n);
   set("file_bits", f.file_bits);
   set("block_bits", f.block_bits);
   set("delta", f.delta);
   set("k", f.k);
   set("block_policy", f.block_policy);
   return parse_sim_config(doc.dump());
}

/// Standard output, or the file named by --out.
class Sink {
public:
   Sink(std::ostream& fallback, const std::string& path) : out_(&fallback) {
      if (!path.empty()) {
         file_.open(path);
         if (!file_) throw std::invalid_argument("cannot write " + path);
         out_ = &file_;
      }
   }
   std::ostream& get() { return *out_; }

private:
   std::ofstream file_;
   std::ostream* out_;
};

std::string exact(const Rational& value) { return value.str(); }

//---------------------------------------------------------------------------
// Sweep presets, one per figure of the evaluation.

struct Series {
   std::string label;
   SimConfig config;
};

std::vector<Series> preset_series(int figure, const SimConfig& base) {
   std::vector<Series> out;
   auto with = [&](SchemeKind kind) {
      SimConfig c = base;
      c.scheme = kind;
      return c;
   };
   const std::string opt = "opt", serial = "serial";
   switch (figure) {
      case 3:
         for (auto kind : {SchemeKind::Opt, SchemeKind::Serial, SchemeKind::Parallel}) {
            out.push_back({to_string(kind), with(kind)});
         }
         break;
      case 4:
         for (auto policy : {BlockPolicy::Fixed, BlockPolicy::OptimalBeta}) {
            auto c = with(SchemeKind::Opt);
            c.block_policy = policy;
            out.push_back({opt + "/" + to_string(policy), c});
         }
         out.push_back({serial, with(SchemeKind::Serial)});
         break;
      case 5:
         for (auto kind : {SchemeKind::Opt, SchemeKind::Serial}) {
            for (int alpha : {0, 2, 4}) {
               auto c = with(kind);
               c.switch_seconds = alpha;
               out.push_back({std::string(to_string(kind)) + "/alpha=" + std::to_string(alpha), c});
            }
         }
         break;
      case 6:
         for (auto kind : {SchemeKind::Opt, SchemeKind::Serial}) {
            for (auto model : {EnergyModel::two_state(), EnergyModel::four_state()}) {
               auto c = with(kind);
               c.energy_model = model;
               out.push_back({std::string(to_string(kind)) + "/" + model.name(), c});
            }
         }
         break;
      case 7:
         for (auto kind : {SchemeKind::Opt, SchemeKind::Serial}) {
            for (auto dist : {PowerDistribution::Kind::Fixed, PowerDistribution::Kind::Gaussian,
                              PowerDistribution::Kind::Exponential}) {
               auto c = with(kind);
               c.power.kind = dist;
               c.power.std_dev = dist == PowerDistribution::Kind::Gaussian ? 20 : 0;
               const char* name = dist == PowerDistribution::Kind::Fixed      ? "homogeneous"
                                  : dist == PowerDistribution::Kind::Gaussian ? "gaussian"
                                                                              : "exponential";
               out.push_back({std::string(to_string(kind)) + "/" + name, c});
            }
         }
         break;
      case 8:
         for (auto kind : {SchemeKind::Opt, SchemeKind::Serial}) {
            out.push_back({std::string(to_string(kind)) + "/homogeneous", with(kind)});
            auto c = with(kind);
            c.rate.kind = RateDistribution::Kind::ExponentialNominal;
            c.congestion.std_dev = 0.07;
            out.push_back({std::string(to_string(kind)) + "/variable-network", c});
         }
         break;
      default: throw std::invalid_argument("unknown preset fig" + std::to_string(figure) + " (fig3..fig8)");
   }
   return out;
}

std::vector<std::uint64_t> log_spaced_bits(std::uint64_t min_bytes, std::uint64_t max_bytes, std::size_t points) {
   if (points == 0 || min_bytes == 0 || max_bytes < min_bytes) {
      throw std::invalid_argument("file size range needs points >= 1 and 0 < min <= max");
   }
   std::vector<std::uint64_t> bits;
   const double ratio = static_cast<double>(max_bytes) / static_cast<double>(min_bytes);
   for (std::size_t i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
      bits.push_back(8 * static_cast<std::uint64_t>(std::llround(static_cast<double>(min_bytes) * std::pow(ratio, t))));
   }
   return bits;
}

void write_rows(std::ostream& out, const std::string& series, const std::vector<SweepRow>& rows) {
   for (const auto& row : rows) out << series << ',' << row.axis << ',' << row.value << ',' << sim_csv_row(row.report) << '\n';
}

void report_invalid(std::ostream& err, const ValidationReport& report) {
   err << "error: invalid scheme\n";
   for (const auto& v : report.violations) {
      err << "  " << (v.slot ? "slot " + std::to_string(v.slot) : std::string("scheme")) << ": " << v.rule << ": "
          << v.detail << '\n';
   }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
   CLI::App app{"Energy-aware slotted file distribution: schedules, energies, bounds and simulation"};
   app.name("fdenergy");
   app.require_subcommand(1);
   std::string out_path;
   app.add_option("--out", out_path, "write results to this file instead of standard output");

   // schedule
   auto* schedule = app.add_subcommand("schedule", "emit a scheme in the interchange format");
   SpecFlags schedule_spec;
   std::string schedule_kind = "opt";
   schedule->add_option("--kind", schedule_kind, "opt|alg4|serial")->check(CLI::IsMember({"opt", "alg4", "serial"}));
   add_spec_flags(schedule, schedule_spec);
   schedule->add_option("--out", out_path, "output file");

   // energy
   auto* energy = app.add_subcommand("energy", "energy of a scheme file or a generated scheme");
   SpecFlags energy_spec;
   std::optional<std::string> energy_file, energy_kind, energy_name;
   std::string energy_model = "two-state";
   std::optional<std::string> energy_switch;
   auto* file_opt = energy->add_option("--scheme", energy_file, "interchange file ('-' for standard input)");
   energy->add_option("--kind", energy_kind, "opt|alg4|serial|parallel")
      ->check(CLI::IsMember({"opt", "alg4", "serial", "parallel"}))
      ->excludes(file_opt);
   energy->add_option("--name", energy_name, "scheme column value");
   energy->add_option("--model", energy_model, "two-state|four-state");
   energy->add_option("--switch-seconds", energy_switch, "charge on/off switching with this switch time");
   add_spec_flags(energy, energy_spec);
   energy->add_option("--out", out_path, "output file");

   // bounds
   auto* bounds = app.add_subcommand("bounds", "closed-form energy bounds for a homogeneous system");
   SpecFlags bounds_spec;
   add_spec_flags(bounds, bounds_spec);
   bounds->add_option("--out", out_path, "output file");

   // optimal-beta
   auto* optimal = app.add_subcommand("optimal-beta", "energy-minimising number of blocks");
   std::string ob_power = "80", ob_delta = "1", ob_file;
   std::uint64_t ob_u = 10'000'000;
   std::size_t ob_n = 200;
   optimal->add_option("--P", ob_power, "nominal power in watts");
   optimal->add_option("--B", ob_file, "file size in bits")->required();
   optimal->add_option("--u", ob_u, "upload capacity in bit/s")->check(CLI::PositiveNumber);
   optimal->add_option("--delta", ob_delta, "energy per block in joules");
   optimal->add_option("--n", ob_n, "number of clients")->check(CLI::PositiveNumber);
   optimal->add_option("--out", out_path, "output file");

   // simulate
   auto* simulate_cmd = app.add_subcommand("simulate", "simulate one distribution");
   SimFlags sim_flags;
   add_sim_flags(simulate_cmd, sim_flags, true);
   simulate_cmd->add_option("--out", out_path, "output file");

   // sweep
   auto* sweep_cmd = app.add_subcommand("sweep", "simulate over a parameter axis or a figure preset");
   SimFlags sweep_flags;
   add_sim_flags(sweep_cmd, sweep_flags, true);
   std::optional<std::string> preset, axis;
   std::vector<std::string> axis_values;
   std::optional<std::size_t> seed_count;
   std::size_t points = 10;
   std::uint64_t min_bytes = 1ull << 20, max_bytes = 1ull << 30;
   unsigned threads = 0;
   auto* preset_opt = sweep_cmd->add_option("--preset", preset, "fig3|fig4|fig5|fig6|fig7|fig8")
                         ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6", "fig7", "fig8"}));
   sweep_cmd->add_option("--axis", axis, "file-bits|n|switch-seconds|block-policy")
      ->check(CLI::IsMember({"file-bits", "n", "switch-seconds", "block-policy"}))
      ->excludes(preset_opt);
   sweep_cmd->add_option("--values", axis_values, "axis values")->delimiter(',');
   sweep_cmd->add_option("--seeds", seed_count, "number of seeds, starting at --seed")->check(CLI::PositiveNumber);
   sweep_cmd->add_option("--points", points, "preset file sizes")->check(CLI::PositiveNumber);
   sweep_cmd->add_option("--min-bytes", min_bytes, "smallest preset file size in bytes")->check(CLI::PositiveNumber);
   sweep_cmd->add_option("--max-bytes", max_bytes, "largest preset file size in bytes")->check(CLI::PositiveNumber);
   sweep_cmd->add_option("--threads", threads, "worker threads (0: all cores)");
   sweep_cmd->add_option("--out", out_path, "output file, or a directory to receive figN.csv");

   // nphard
   auto* nphard = app.add_subcommand("nphard", "partition reduction workbench");
   nphard->require_subcommand(1);
   std::vector<std::uint64_t> np_values;
   std::string np_power = "1";
   std::size_t np_trials = 16;
   auto* gen = nphard->add_subcommand("gen", "build the instance for a partition input");
   gen->add_option("--values", np_values, "positive integers")->delimiter(',')->required();
   gen->add_option("--P", np_power, "host power");
   gen->add_option("--out", out_path, "output file");
   auto* check = nphard->add_subcommand("check", "check the reduction on a partition input");
   check->add_option("--values", np_values, "positive integers")->delimiter(',')->required();
   check->add_option("--P", np_power, "host power");
   check->add_option("--trials", np_trials, "extra half-sum subsets to turn into witnesses");
   check->add_option("--out", out_path, "output file");

   try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
   } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return e.get_exit_code() == 0 ? kOk : kUsageError;
   }

   try {
      if (schedule->parsed()) {
         const auto spec = make_spec(schedule_spec);
         const auto kind = parse_scheme_kind(schedule_kind);
         Sink sink(out, out_path);
         std::ostringstream comment;
         comment << schedule_kind << " scheme, n = " << spec.n() << ", beta = " << spec.block_count()
                 << ", k = " << spec.k();
         write_scheme(sink.get(), build_scheme(kind, spec), comment.str());
         return kOk;
      }

      if (energy->parsed()) {
         const auto spec = make_spec(energy_spec);
         const auto model = parse_energy_model(energy_model);
         EnergyOptions options;
         SystemSpec used = spec;
         if (energy_switch) {
            HostSpec host = spec.server();
            host.switch_seconds = parse_rational(*energy_switch);
            used = SystemSpec::homogeneous(spec.n(), spec.block_count(), spec.file_bits(), host);
            options.switch_seconds_enabled = true;
         }
         EnergyReport report;
         std::string name = energy_name.value_or(energy_kind.value_or("scheme"));
         if (energy_kind && *energy_kind == "parallel") {
            report = plan_energy(used, parallel_schedule(used), model);
         } else {
            Scheme scheme;
            if (energy_file) {
               if (*energy_file == "-") {
                  scheme = read_scheme(std::cin);
               } else {
                  std::ifstream in(*energy_file);
                  if (!in) throw std::invalid_argument("cannot open scheme file " + *energy_file);
                  scheme = read_scheme(in);
               }
            } else {
               scheme = build_scheme(parse_scheme_kind(energy_kind.value_or("opt")), used);
            }
            const auto validation = validate_scheme(used, scheme);
            if (!validation.ok()) {
               report_invalid(err, validation);
               return kValidationError;
            }
            report = scheme_energy(used, scheme, model, options);
         }
         Sink sink(out, out_path);
         sink.get() << energy_csv_header() << '\n' << energy_csv_row(name, used, model, report) << '\n';
         return kOk;
      }

      if (bounds->parsed()) {
         const auto spec = make_spec(bounds_spec);
         Sink sink(out, out_path);
         auto& o = sink.get();
         o << "formula,n,beta,k,joules,joules_exact\n";
         auto row = [&](const BoundResult& r) {
            o << to_string(r.formula_id) << ',' << spec.n() << ',' << spec.block_count() << ',' << spec.k() << ','
              << format_decimal(r.joules) << ',' << exact(r.joules) << '\n';
         };
         if (spec.k() == 1) {
            row(lower_bound_k1(spec));
            row(optimal_energy_k1(spec));
         } else {
            const auto& delta = spec.delta(HostId::server());
            row(lower_bound_homogeneous(spec.n(), spec.block_count(), delta));
            if (spec.block_count() > spec.n()) row(alg4_energy(spec.n(), spec.block_count(), delta));
         }
         return kOk;
      }

      if (optimal->parsed()) {
         const auto result = optimal_block_count(parse_rational(ob_power), parse_rational(ob_file), Rational(ob_u),
                                                 parse_rational(ob_delta), ob_n);
         if (result.unbounded) err << "note: delta = 0, energy decreases with beta; capped at n\n";
         Sink sink(out, out_path);
         sink.get() << "beta\n" << result.beta << '\n';
         return kOk;
      }

      if (simulate_cmd->parsed()) {
         const auto config = make_sim_config(sim_flags);
         const auto report = simulate(config);
         Sink sink(out, out_path);
         sink.get() << sim_csv_header() << '\n' << sim_csv_row(report) << '\n';
         return kOk;
      }

      if (sweep_cmd->parsed()) {
         if (!preset && !axis) throw std::invalid_argument("sweep needs --preset or --axis");
         SimFlags flags = sweep_flags;
         if (preset && !flags.scheme) flags.scheme = "opt";
         const auto base = make_sim_config(flags);
         std::vector<std::uint64_t> seeds;
         const std::size_t count = seed_count.value_or(preset && (*preset == "fig7" || *preset == "fig8") ? 10 : 1);
         for (std::size_t i = 0; i < count; ++i) seeds.push_back(base.seed + i);

         std::string target = out_path;
         if (preset && !target.empty() && std::filesystem::is_directory(target)) {
            target = (std::filesystem::path(target) / (*preset + ".csv")).string();
         }
         const std::string header = "series,axis,value," + sim_csv_header() + '\n';
         if (preset) {
            const int figure = std::stoi(preset->substr(3));
            const FileSizeAxis sizes{log_spaced_bits(min_bytes, max_bytes, points)};
            std::vector<std::pair<std::string, std::vector<SweepRow>>> results;
            for (const auto& series : preset_series(figure, base)) {
               results.emplace_back(series.label, sweep(series.config, sizes, seeds, threads));
            }
            Sink sink(out, target);
            sink.get() << header;
            for (const auto& [label, rows] : results) write_rows(sink.get(), label, rows);
            return kOk;
         }
         if (axis_values.empty()) throw std::invalid_argument("--axis needs --values");
         SweepAxis sweep_axis;
         if (*axis == "file-bits") {
            FileSizeAxis a;
            for (const auto& v : axis_values) a.file_bits.push_back(std::stoull(v));
            sweep_axis = a;
         } else if (*axis == "n") {
            HostCountAxis a;
            for (const auto& v : axis_values) a.n.push_back(std::stoull(v));
            sweep_axis = a;
         } else if (*axis == "switch-seconds") {
            SwitchSecondsAxis a;
            for (const auto& v : axis_values) a.seconds.push_back(parse_rational(v));
            sweep_axis = a;
         } else {
            BlockPolicyAxis a;
            for (const auto& v : axis_values) {
               if (v == "fixed") a.policies.push_back(BlockPolicy::Fixed);
               else if (v == "optimal-beta") a.policies.push_back(BlockPolicy::OptimalBeta);
               else throw std::invalid_argument("block policy must be fixed or optimal-beta");
            }
            sweep_axis = a;
         }
         const auto rows = sweep(base, sweep_axis, seeds, threads);
         Sink sink(out, target);
         sink.get() << header;
         write_rows(sink.get(), to_string(base.scheme), rows);
         return kOk;
      }

      if (gen->parsed()) {
         const auto instance = build_instance({np_values}, parse_rational(np_power));
         Sink sink(out, out_path);
         auto& o = sink.get();
         o << "k,blocks,P,P_prime,threshold\n"
           << instance.k() << ',' << instance.blocks() << ',' << exact(instance.power) << ','
           << exact(instance.power_r) << ',' << exact(instance.threshold) << "\n\n";
         o << "host,role,upload_blocks,download_blocks,power_w\n";
         auto host_row = [&](HostId id, const std::string& role, bool uploads, bool downloads) {
            const auto& h = instance.spec.host(id);
            o << id.to_string() << ',' << role << ',' << (uploads ? std::to_string(h.upload_bps) : "0") << ','
              << (downloads ? std::to_string(h.download_bps) : "0") << ',' << exact(h.power_watts) << '\n';
         };
         host_row(HostId::server(), "S", true, false);
         host_row(ReductionInstance::t(), "T", true, true);
         host_row(ReductionInstance::r(), "R", false, true);
         for (std::size_t i = 0; i < instance.k(); ++i) host_row(ReductionInstance::h(i), "x" + std::to_string(i), true, true);
         return kOk;
      }

      if (check->parsed()) {
         const PartitionInput input{np_values};
         const Rational power = parse_rational(np_power);
         const auto instance = build_instance(input, power);
         const auto subset = decide_small(input);
         const bool holds = check_iff(input, power, np_trials);
         Sink sink(out, out_path);
         auto& o = sink.get();
         o << "values,sum,subset,witness_j,threshold_j,verdict\n";
         for (std::size_t i = 0; i < np_values.size(); ++i) o << (i ? ";" : "") << np_values[i];
         o << ',' << input.sum() << ',';
         if (subset) {
            for (std::size_t i = 0; i < subset->size(); ++i) o << (i ? ";" : "") << (*subset)[i];
            o << ',' << exact(witness_schedule(instance, *subset).energy_joules);
         } else {
            o << "none,none";
         }
         o << ',' << exact(instance.threshold) << ',' << (holds ? "holds" : "fails") << '\n';
         return holds ? kOk : kValidationError;
      }
   } catch (const InvalidScheme& e) {
      report_invalid(err, e.report());
      return kValidationError;
   } catch (const ParseError& e) {
      err << "error: line " << e.line() << ": " << e.what() << '\n';
      return kValidationError;
   } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kValidationError;
   }
   return kUsageError;
}

}  // namespace fdenergy::cli
