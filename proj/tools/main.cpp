// iptvq: analysis, simulation and capacity planning for unicast IPTV in one
// AMC cell.  Exit codes: 0 success, 2 invalid input, 3 runtime failure.

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>

#include "iptvq/commands.hpp"
#include "iptvq/kernels/kernels.hpp"

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

iptvq::AlphaPolicy parse_alpha(const std::string& text) {
  if (text == "fitted") return iptvq::FittedAlpha{};
  double value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !(value >= 0 && value <= 1)) {
    throw iptvq::ValidationError("--alpha expects 'fitted' or a number in [0, 1], got '" + text + "'");
  }
  return iptvq::FixedAlpha{value};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blocking, dropping and bandwidth of unicast IPTV over an AMC cell"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path = "-";
  std::string engine = "auto";
  std::string alpha;
  std::string points_path;
  std::string write_scenario;
  std::string isa;
  iptvq::CommandOptions options;

  auto common = [&](CLI::App* sub, bool needs_scenario) {
    if (needs_scenario) {
      sub->add_option("--scenario", scenario_path, "Scenario document (JSON)")->required();
    }
    sub->add_option("--out", out_path, "Output CSV path, '-' for stdout")->capture_default_str();
    sub->add_option("--isa", isa, "Kernel instruction set: scalar or avx2 (default: best available)");
    sub->add_flag("--timing", options.timing, "Fill the wall_seconds column");
  };
  auto sim_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", options.seed, "Base seed")->capture_default_str();
    sub->add_option("--reps", options.replications, "Replications")->capture_default_str();
    sub->add_option("--horizon-min", options.horizon_minutes, "End of each replication, minutes")
        ->capture_default_str();
    sub->add_option("--warmup-min", options.warmup_minutes,
                    "Warmup excluded from statistics (default 10 mean watch times)");
    sub->add_option("--engine", engine, "Mobility engine: markov or random-walk")
        ->check(CLI::IsMember({"auto", "markov", "random-walk"}));
    sub->add_option("--threads", options.threads, "Replications run concurrently")->capture_default_str();
  };
  auto alpha_flag = [&](CLI::App* sub) {
    sub->add_option("--alpha", alpha, "Averaging factor: fitted or a value in [0, 1]");
  };

  auto* analyze = app.add_subcommand("analyze", "Closed-form metrics for each sweep value");
  common(analyze, true);
  alpha_flag(analyze);
  sim_flags(analyze);  // used when rates must be measured first

  auto* simulate = app.add_subcommand("simulate", "Simulation with 99% confidence intervals");
  common(simulate, true);
  alpha_flag(simulate);
  sim_flags(simulate);

  auto* plan = app.add_subcommand("plan", "Smallest K meeting a blocking target");
  common(plan, true);
  alpha_flag(plan);
  sim_flags(plan);
  plan->add_option("--target-pb", options.target_pb, "Blocking target")->capture_default_str();
  plan->add_option("--k-min", options.k_min, "Smallest K scanned")->capture_default_str();
  plan->add_option("--k-max", options.k_max, "Largest K scanned")->capture_default_str();
  plan->add_flag("--confirm", options.confirm, "Simulate at the chosen K");

  auto* fit = app.add_subcommand("fit-alpha", "Quadratic fit of (mu*w, alpha) points");
  common(fit, false);
  fit->add_option("--points", points_path, "CSV of mu_w,alpha pairs")->required();
  bool ordinary = false;
  fit->add_flag("--ordinary", ordinary, "Plain quadratic least squares instead of the capped model");

  auto* measure = app.add_subcommand("measure-mobility", "Zone transition rates under the random walk");
  common(measure, true);
  sim_flags(measure);
  measure->add_option("--write-scenario", write_scenario,
                      "Also write the scenario with the measured explicit rates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationExit;
  }

  try {
    if (!isa.empty()) {
      if (isa == "scalar") {
        iptvq::kernels::set_active_isa(iptvq::kernels::Isa::kScalar);
      } else if (isa == "avx2") {
        iptvq::kernels::set_active_isa(iptvq::kernels::Isa::kAvx2);
      } else {
        throw iptvq::ValidationError("--isa expects scalar or avx2");
      }
    }
    if (engine == "markov") options.engine = iptvq::EngineChoice::kMarkov;
    if (engine == "random-walk") options.engine = iptvq::EngineChoice::kRandomWalk;
    if (!alpha.empty()) options.alpha = parse_alpha(alpha);
    if (!write_scenario.empty()) options.write_scenario = write_scenario;

    std::unique_ptr<std::ofstream> file;
    std::ostream* out = &std::cout;
    if (out_path != "-" && out_path != "stdout") {
      file = std::make_unique<std::ofstream>(out_path);
      if (!*file) throw std::runtime_error("cannot open " + out_path + " for writing");
      out = file.get();
    }

    if (fit->parsed()) {
      iptvq::cmd_fit_alpha(points_path, ordinary, *out, std::cerr);
      return 0;
    }
    const auto doc = iptvq::load_scenario(scenario_path);
    if (analyze->parsed()) {
      iptvq::cmd_analyze(doc, options, *out, std::cerr);
    } else if (simulate->parsed()) {
      iptvq::cmd_simulate(doc, options, *out, std::cerr);
    } else if (plan->parsed()) {
      iptvq::cmd_plan(doc, options, *out, std::cerr);
    } else if (measure->parsed()) {
      iptvq::cmd_measure_mobility(doc, options, *out, std::cerr);
    }
    out->flush();
    return 0;
  } catch (const std::invalid_argument& e) {  // ValidationError and bad arguments
    std::cerr << "error: " << e.what() << "\n";
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
}
