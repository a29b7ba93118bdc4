#pragma once

// Argument parsing for the fracmap executable.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracmap/cli.hpp"

namespace fracmap::cli {

namespace detail {

// Raw option text, converted after parsing so malformed values become config errors.
struct RawOptions {
  std::string mu, r, x0_list, controller, history = "hold", format = "csv";
  double p = 0.0, k = 0.0;
  bool seedless = false;
};

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : io::split_fields(text)) {
    const auto v = io::parse_double(field);
    if (!v) throw std::invalid_argument("malformed number '" + field + "' in --x0-list");
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.  `args` excludes argv[0].
inline int cli_main(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Fractional-order generalized logistic map: trajectories, sweeps, control and synchronization.\n"
               "No random numbers are used anywhere; identical options give byte-identical output.",
               "fracmap"};
  app.require_subcommand(1);

  RunConfig cfg;
  detail::RawOptions raw;

  struct Subcommand {
    Command command;
    const char* help;
  };
  const std::vector<Subcommand> subcommands = {
      {Command::Trajectory, "simulate one trajectory (columns t,x)"},
      {Command::Bifurcation1d, "1D bifurcation sweep over mu or r (columns param,tail_index,x,class,period)"},
      {Command::Phase2d, "mu-r phase diagram of asymptotic classes (columns mu,r,class,period)"},
      {Command::StabilityRegion, "analytic stability raster of one equilibrium (columns mu,r,verdict)"},
      {Command::FeedbackRegion, "boundary of the delayed-feedback control region (columns piece,t_or_b,a,b)"},
      {Command::Control, "trajectory with delayed feedback b*x(t-tau) (columns t,x)"},
      {Command::Sync, "master-slave synchronization (columns t,x,y,e)"},
      {Command::Multistability, "classes reached from several initial conditions (columns mu,x0,class,period,tail_index,x)"},
  };

  for (const auto& sc : subcommands) {
    CLI::App* sub = app.add_subcommand(to_string(sc.command), sc.help);
    sub->callback([&cfg, c = sc.command] { cfg.command = c; });
    sub->add_option("--alpha", cfg.alpha, "fractional order in (0,1]");
    sub->add_option("-o,--output", cfg.output, "output file, '-' for stdout");
    sub->add_option("--format", raw.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--seedless", raw.seedless, "assert the run uses no random numbers (always true)");
    if (sc.command == Command::FeedbackRegion) {
      sub->add_option("--samples", cfg.samples, "samples of the parametric boundary on [0, 2pi]")->capture_default_str();
      continue;
    }
    sub->add_option("--mu", raw.mu, "value or grid lo:hi:count");
    sub->add_option("--r", raw.r, "value or grid lo:hi:count");
    if (sc.command == Command::StabilityRegion) {
      sub->add_option("--which", cfg.which, "equilibrium index 1, 2 or 3")->capture_default_str();
      continue;
    }
    if (sc.command == Command::Multistability) {
      sub->add_option("--x0-list", raw.x0_list, "comma-separated initial conditions")->required();
    } else {
      sub->add_option("--x0", cfg.x0, "initial state")->capture_default_str();
    }
    sub->add_option("--steps", cfg.sim.steps, "iterations")->capture_default_str();
    sub->add_option("--bound", cfg.sim.engine.divergence_bound, "divergence bound on |x|")->capture_default_str();
    sub->add_option("--memory-window", cfg.sim.engine.memory_window, "keep only the L most recent lags (0 = full memory)")
        ->capture_default_str();
    sub->add_option("--transient", cfg.sim.classifier.transient, "states discarded before classification")
        ->capture_default_str();
    sub->add_option("--tail", cfg.sim.classifier.tail, "states used for classification")->capture_default_str();
    sub->add_option("--pmax", cfg.sim.classifier.p_max, "largest period tested")->capture_default_str();
    sub->add_option("--tol", cfg.sim.classifier.tol, "relative period tolerance")->capture_default_str();
    if (sc.command == Command::Bifurcation1d || sc.command == Command::Phase2d ||
        sc.command == Command::Multistability) {
      sub->add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
      sub->add_option("--retain", cfg.sim.retain, "tail values written per grid point")->capture_default_str();
    }
    if (sc.command == Command::Control) {
      sub->add_option("--b", cfg.control.b, "feedback gain")->capture_default_str();
      sub->add_option("--tau", cfg.control.tau, "feedback delay in steps")->capture_default_str();
      sub->add_option("--history", raw.history, "x(s) for s<0: hold (= x0) or zero")
          ->check(CLI::IsMember({"hold", "zero"}));
      sub->add_option("--resolution", cfg.resolution, "accuracy of the reported control interval")
          ->capture_default_str();
    }
    if (sc.command == Command::Sync) {
      sub->add_option("--y0", cfg.y0, "slave initial state")->capture_default_str();
      sub->add_option("--controller", raw.controller, "H1, H2, H3 or H4")->required();
      sub->add_option("--p", raw.p, "controller parameter (default: mu)");
      sub->add_option("--k", raw.k, "coupling gain")->required();
    }
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (!raw.mu.empty()) cfg.mu = io::parse_grid(raw.mu);
    if (!raw.r.empty()) cfg.r = io::parse_grid(raw.r);
    if (!raw.x0_list.empty()) cfg.x0_list = detail::parse_list(raw.x0_list);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  cfg.format = raw.format == "json" ? Format::Json : Format::Csv;
  cfg.control.history = raw.history == "zero" ? HistoryRule::Zero : HistoryRule::HoldInitial;
  if (cfg.command == Command::Sync) {
    const auto c = parse_controller(raw.controller);
    if (!c) {
      err << "error: unknown controller '" << raw.controller << "', expected H1, H2, H3 or H4\n";
      return kConfigError;
    }
    cfg.controller = *c;
    cfg.k = raw.k;
    CLI::App* sub = app.get_subcommand("sync");
    if (sub->count("--p") > 0) cfg.p = raw.p;
  }
  return run(cfg, out, err);
}

inline int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(std::move(args));
}

}  // namespace fracmap::cli
