// Command-line surface: every computation behind JSON input/output with
// deterministic seeding.
//
// Exit codes (stable contract):
//   0 success
//   2 input error (unreadable/invalid config, bad flag values)
//   3 trap or scan instability
//   4 model-assumption violation (override with --force)
//   5 Fock-register truncation
//   6 quasi-static continuation failure (step index reported on stderr)

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ionsim/errors.hpp>
#include <ionsim/io/json_io.hpp>
#include <ionsim/modes.hpp>
#include <ionsim/random.hpp>
#include <ionsim/rates.hpp>
#include <ionsim/reorder.hpp>
#include <ionsim/scan.hpp>

namespace {

using ionsim::Json;
using ionsim::RunManifest;

struct Options {
  std::string config;
  std::string laser;
  std::string axis = "y";
  double min = 0.0;
  double max = 0.0;
  int points = 0;
  bool shift = false;
  bool as_json = false;
  bool as_csv = false;
  bool force = false;
  std::uint64_t seed = 0;
  int trajectories = 0; // 0 = not given
  bool seed_given = false;
  bool trajectories_given = false;
};

int axis_index(const std::string& name) {
  if (name == "x")
    return 0;
  if (name == "y")
    return 1;
  if (name == "z")
    return 2;
  throw std::invalid_argument("--axis must be x, y, or z");
}

void require_one_output_form(const Options& opt) {
  if (opt.as_json && opt.as_csv)
    throw std::invalid_argument("choose one of --json and --csv");
}

std::string dash_label(const std::vector<ionsim::IonSpecies>& order) {
  std::string label;
  for (const ionsim::IonSpecies& species : order) {
    if (!label.empty())
      label += '-';
    label += species.name;
  }
  return label;
}

// --- modes ---------------------------------------------------------------

void run_modes(const Options& opt, RunManifest& manifest) {
  const std::string text = ionsim::read_text_file(opt.config);
  const ionsim::ChainInput input =
      ionsim::chain_input_from_json(ionsim::parse_json(text, opt.config));
  manifest.input_digest = ionsim::input_digest({text});

  const ionsim::NormalModeSet modes =
      ionsim::solve_modes(input.trap, input.species);

  if (opt.as_json) {
    Json doc = ionsim::modes_to_json(modes);
    doc["manifest"] = manifest.document_fields();
    doc["schema_version"] = ionsim::kSchemaVersion;
    std::cout << ionsim::canonical_json(doc);
  } else if (opt.as_csv) {
    std::cout << ionsim::mode_table_csv(modes);
  } else {
    std::cout << ionsim::mode_table_text(modes);
  }
}

// --- scan ----------------------------------------------------------------

void run_scan(const Options& opt, RunManifest& manifest) {
  if (!(opt.min < opt.max))
    throw std::invalid_argument("--min must be below --max");
  if (opt.points < 2)
    throw std::invalid_argument("--points must be at least 2");
  if (opt.shift && opt.as_json)
    throw std::invalid_argument("--shift applies to the CSV output form");
  const int axis = axis_index(opt.axis);

  const std::string text = ionsim::read_text_file(opt.config);
  const ionsim::ChainInput input =
      ionsim::chain_input_from_json(ionsim::parse_json(text, opt.config));
  manifest.input_digest = ionsim::input_digest({text});

  const ionsim::VecX grid =
      ionsim::VecX::LinSpaced(opt.points, opt.min, opt.max);
  const ionsim::ModeScanResult result =
      ionsim::scan_field(input.trap, input.species, axis, grid);
  if (!result.complete)
    throw ionsim::InstabilityError(
        "scan aborted at grid index " + std::to_string(result.failed_index) +
            " (" + opt.axis + " field " +
            ionsim::format_double(grid[result.failed_index]) +
            " V/m): " + result.failure,
        axis);

  if (opt.as_json) {
    Json doc;
    doc["axis"] = opt.axis;
    Json branches = Json::array();
    const int points = static_cast<int>(result.branch_frequency_hz.rows());
    const int count = static_cast<int>(result.branch_frequency_hz.cols());
    for (int b = 0; b < count; ++b) {
      Json branch = Json::array();
      for (int p = 0; p < points; ++p)
        branch.push_back(result.branch_frequency_hz(p, b) / 1e6);
      branches.push_back(branch);
    }
    doc["branches"] = branches;
    doc["complete"] = result.complete;
    Json fields = Json::array();
    for (int p = 0; p < result.field_values.size(); ++p)
      fields.push_back(result.field_values[p]);
    doc["field_V_per_m"] = fields;
    doc["manifest"] = manifest.document_fields();
    doc["schema_version"] = ionsim::kSchemaVersion;
    std::cout << ionsim::canonical_json(doc);
  } else {
    std::cout << ionsim::scan_csv(result, opt.shift);
  }
}

// --- cooling -------------------------------------------------------------

void run_cooling(const Options& opt, RunManifest& manifest) {
  const std::string chain_text = ionsim::read_text_file(opt.config);
  const std::string laser_text = ionsim::read_text_file(opt.laser);
  const ionsim::ChainInput input = ionsim::chain_input_from_json(
      ionsim::parse_json(chain_text, opt.config));
  const Json laser_doc = ionsim::parse_json(laser_text, opt.laser);
  const ionsim::LaserInput laser = ionsim::laser_from_json(
      laser_doc, static_cast<int>(input.species.size()));
  manifest.input_digest = ionsim::input_digest({chain_text, laser_text});

  const ionsim::NormalModeSet modes =
      ionsim::solve_modes(input.trap, input.species);

  std::string violators;
  for (int alpha = 0; alpha < modes.omega_sq.size(); ++alpha)
    if (laser.laser.linewidth < modes.frequencies[alpha]) {
      if (!violators.empty())
        violators += ", ";
      violators += ionsim::format_double(modes.frequency_hz(alpha) / 1e6);
    }
  if (!violators.empty() && !opt.force)
    throw ionsim::AssumptionError(
        "the rate equations assume a linewidth well above the mode "
        "frequencies, but modes at [" +
        violators + "] MHz exceed it; pass --force to compute anyway");

  Json reports = Json::array();
  for (int alpha = 0; alpha < modes.omega_sq.size(); ++alpha)
    reports.push_back(ionsim::cooling_report_to_json(ionsim::cooling_report(
        modes, laser.laser, laser.target_ion, alpha, laser.occupation)));

  Json doc;
  doc["laser"] = laser_doc;
  doc["manifest"] = manifest.document_fields();
  doc["reports"] = reports;
  doc["schema_version"] = ionsim::kSchemaVersion;
  doc["target_ion"] = laser.target_ion;
  std::cout << ionsim::canonical_json(doc);
}

// --- qls -----------------------------------------------------------------

void run_qls(const Options& opt, RunManifest& manifest) {
  const std::string text = ionsim::read_text_file(opt.config);
  ionsim::QlsRunSpec spec =
      ionsim::qls_spec_from_json(ionsim::parse_json(text, opt.config));
  if (opt.seed_given)
    spec.seed = opt.seed;
  if (opt.trajectories_given) {
    if (opt.trajectories < 1)
      throw std::invalid_argument("--trajectories must be at least 1");
    spec.trajectories = opt.trajectories;
  }
  manifest.input_digest = ionsim::input_digest({text});
  manifest.seed = spec.seed;

  Json results;
  results["trajectories"] = spec.trajectories;
  Json record; // embedded for single-trajectory readout runs
  bool have_record = false;

  if (spec.protocol == "qnd" || spec.protocol == "schmidt") {
    const std::string first_state =
        spec.protocol == "qnd" ? spec.qnd.bright_state : "g";
    const std::string second_state =
        spec.protocol == "qnd" ? spec.qnd.dark_state : "e";

    int correct = 0;
    int correct_single_round = 0;
    int timeouts = 0;
    long long total_rounds = 0;
    std::vector<int> rounds_histogram;
    std::vector<std::vector<double>> posterior_true;

    for (int i = 0; i < spec.trajectories; ++i) {
      const std::string truth =
          spec.true_state == "alternate"
              ? (i % 2 == 0 ? first_state : second_state)
              : spec.true_state;
      const int truth_index = truth == first_state ? 0 : 1;
      std::mt19937_64 rng = ionsim::trajectory_rng(spec.seed, i);

      ionsim::ReadoutRecord trajectory_record;
      std::string inferred;
      if (spec.protocol == "qnd") {
        trajectory_record = ionsim::run_qnd_readout(truth, spec.qnd, rng);
        inferred = trajectory_record.decision;
      } else {
        ionsim::SchmidtResult result = ionsim::run_schmidt_readout(
            truth, spec.schmidt, spec.schmidt_detection, rng);
        trajectory_record = result.record;
        inferred = result.inferred;
      }

      correct += inferred == truth;
      timeouts += trajectory_record.timed_out;
      total_rounds += trajectory_record.rounds;
      if (static_cast<int>(rounds_histogram.size()) <=
          trajectory_record.rounds)
        rounds_histogram.resize(trajectory_record.rounds + 1, 0);
      ++rounds_histogram[trajectory_record.rounds];

      std::vector<double> truth_posterior;
      for (const ionsim::VecX& posterior : trajectory_record.posteriors)
        truth_posterior.push_back(posterior[truth_index]);
      if (!truth_posterior.empty()) {
        const double first = truth_posterior.front();
        const int guess_index = first >= 0.5 ? truth_index
                                             : 1 - truth_index;
        correct_single_round += guess_index == truth_index;
      }
      posterior_true.push_back(std::move(truth_posterior));

      if (spec.trajectories == 1) {
        record = ionsim::readout_record_to_json(trajectory_record);
        have_record = true;
      }
    }

    std::size_t horizon = 0;
    for (const auto& history : posterior_true)
      horizon = std::max(horizon, history.size());
    Json posterior_mean = Json::array();
    for (std::size_t round = 0; round < horizon; ++round) {
      double sum = 0.0;
      for (const auto& history : posterior_true)
        sum += history.empty()
                   ? 0.0
                   : history[std::min(round, history.size() - 1)];
      posterior_mean.push_back(sum / spec.trajectories);
    }

    results["accuracy"] = static_cast<double>(correct) / spec.trajectories;
    results["single_round_accuracy"] =
        static_cast<double>(correct_single_round) / spec.trajectories;
    results["mean_rounds"] =
        static_cast<double>(total_rounds) / spec.trajectories;
    results["timeouts"] = timeouts;
    results["rounds_histogram"] = rounds_histogram;
    results["posterior_true_mean"] = posterior_mean;
  } else if (spec.protocol == "dicke") {
    double sum = 0.0;
    double minimum = 1.0;
    double maximum = 0.0;
    std::vector<std::string> warnings;
    for (int i = 0; i < spec.trajectories; ++i) {
      std::mt19937_64 rng = ionsim::trajectory_rng(spec.seed, i);
      const ionsim::DickeResult result =
          ionsim::run_dicke_preparation(spec.dicke, rng);
      sum += result.fidelity;
      minimum = std::min(minimum, result.fidelity);
      maximum = std::max(maximum, result.fidelity);
      for (const std::string& warning : result.warnings)
        if (std::find(warnings.begin(), warnings.end(), warning) ==
            warnings.end())
          warnings.push_back(warning);
    }
    results["fidelity_mean"] = sum / spec.trajectories;
    results["fidelity_min"] = minimum;
    results["fidelity_max"] = maximum;
    results["warnings"] = warnings;
  } else { // pumping
    ionsim::VecX sum = ionsim::VecX::Zero(2 * spec.pumping_steps + 1);
    for (int i = 0; i < spec.trajectories; ++i) {
      std::mt19937_64 rng = ionsim::trajectory_rng(spec.seed, i);
      sum += ionsim::run_pumping_ladder(spec.pumping_steps,
                                        spec.pumping_angle_error, rng);
    }
    Json populations = Json::array();
    for (int i = 0; i < sum.size(); ++i)
      populations.push_back(sum[i] / spec.trajectories);
    results["populations_mean"] = populations;
  }

  Json doc;
  doc["manifest"] = manifest.document_fields();
  doc["protocol"] = spec.protocol;
  doc["results"] = results;
  if (have_record)
    doc["record"] = record;
  doc["schema_version"] = ionsim::kSchemaVersion;
  std::cout << ionsim::canonical_json(doc);
}

// --- reorder ---------------------------------------------------------------

void run_reorder(const Options& opt, RunManifest& manifest) {
  const std::string text = ionsim::read_text_file(opt.config);
  const ionsim::ReorderSpec spec =
      ionsim::reorder_spec_from_json(ionsim::parse_json(text, opt.config));
  manifest.input_digest = ionsim::input_digest({text});

  std::vector<ionsim::ReorderRunRecord> runs;
  for (const std::vector<ionsim::IonSpecies>& order : spec.start_orders) {
    ionsim::ReorderRunRecord run;
    run.start_order = dash_label(order);
    if (spec.kind == "ramp") {
      const ionsim::ChainConfiguration initial =
          ionsim::relax_linear_order(spec.schedule.snapshots.front(), order);
      run.trajectory = ionsim::ramp_and_relax(spec.schedule, order, initial);
    } else {
      ionsim::AsymmetricReorderResult result = ionsim::run_asymmetric_reorder(
          spec.trap, order, spec.field_v_m, spec.twist_coeff);
      run.asymmetric = true;
      run.aligned = result.aligned;
      run.sub_critical = result.sub_critical;
      run.trajectory = std::move(result.trajectory);
    }
    run.final_order = run.trajectory.final_class.order;
    run.final_geometry = run.trajectory.final_class.geometry;
    run.steps =
        static_cast<int>(run.trajectory.configurations.size()) - 1;
    std::cerr << "reorder: " << run.start_order << " -> "
              << (run.final_order.empty() ? run.final_geometry
                                          : run.final_order)
              << (run.sub_critical ? " [sub-critical]" : "") << '\n';
    runs.push_back(std::move(run));
  }

  if (opt.as_json) {
    Json list = Json::array();
    for (const ionsim::ReorderRunRecord& run : runs)
      list.push_back(ionsim::reorder_run_to_json(run));
    Json doc;
    doc["kind"] = spec.kind;
    doc["manifest"] = manifest.document_fields();
    doc["runs"] = list;
    doc["schema_version"] = ionsim::kSchemaVersion;
    std::cout << ionsim::canonical_json(doc);
  } else {
    std::cout << ionsim::reorder_csv(runs);
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Mixed-species ion chains in mass-dependent traps: normal modes, "
      "field scans, cooling rates, quantum-logic readout Monte Carlo, and "
      "deterministic reordering"};
  app.require_subcommand(1);

  Options opt;

  CLI::App* modes_cmd = app.add_subcommand(
      "modes", "Equilibrium and normal modes of a chain configuration");
  modes_cmd->add_option("--config", opt.config, "chain JSON file")->required();
  modes_cmd->add_flag("--json", opt.as_json, "emit the full JSON document");
  modes_cmd->add_flag("--csv", opt.as_csv, "emit the mode table as CSV");
  modes_cmd->add_option("--seed", opt.seed, "seed echoed in the manifest");

  CLI::App* scan_cmd = app.add_subcommand(
      "scan", "Mode frequencies versus a uniform field along one axis");
  scan_cmd->add_option("--config", opt.config, "chain JSON file")->required();
  scan_cmd->add_option("--axis", opt.axis, "x, y, or z")->required();
  scan_cmd->add_option("--min", opt.min, "first field value (V/m)")
      ->required();
  scan_cmd->add_option("--max", opt.max, "last field value (V/m)")->required();
  scan_cmd->add_option("--points", opt.points, "grid points (>= 2)")
      ->required();
  scan_cmd->add_flag("--shift", opt.shift,
                     "append shift-relative-to-zero-field columns");
  scan_cmd->add_flag("--json", opt.as_json, "emit JSON instead of CSV");
  scan_cmd->add_flag("--csv", opt.as_csv, "emit CSV (the default)");
  scan_cmd->add_option("--seed", opt.seed, "seed echoed in the manifest");

  CLI::App* cooling_cmd = app.add_subcommand(
      "cooling", "Per-mode cooling/heating rates for a laser on one ion");
  cooling_cmd->add_option("--config", opt.config, "chain JSON file")
      ->required();
  cooling_cmd->add_option("--laser", opt.laser, "laser JSON file")->required();
  cooling_cmd->add_flag("--force", opt.force,
                        "compute even when the rate-equation assumption "
                        "(linewidth above the mode frequencies) fails");
  cooling_cmd->add_flag("--json", opt.as_json, "emit JSON (the default)");
  cooling_cmd->add_option("--seed", opt.seed, "seed echoed in the manifest");

  CLI::App* qls_cmd = app.add_subcommand(
      "qls", "Monte Carlo quantum-logic readout and preparation protocols");
  qls_cmd->add_option("--config", opt.config, "protocol JSON file")
      ->required();
  CLI::Option* seed_option =
      qls_cmd->add_option("--seed", opt.seed, "override the protocol seed");
  CLI::Option* trajectories_option = qls_cmd->add_option(
      "--trajectories", opt.trajectories, "override the trajectory count");
  qls_cmd->add_flag("--json", opt.as_json, "emit JSON (the default)");

  CLI::App* reorder_cmd = app.add_subcommand(
      "reorder", "Quasi-static reordering schedules and their outcomes");
  reorder_cmd->add_option("--config", opt.config, "schedule JSON file")
      ->required();
  reorder_cmd->add_flag("--json", opt.as_json,
                        "emit the run summary as JSON");
  reorder_cmd->add_flag("--csv", opt.as_csv,
                        "emit per-step positions as CSV (the default)");
  reorder_cmd->add_option("--seed", opt.seed, "seed echoed in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    std::cerr << "ionsim: error: " << error.what() << '\n';
    return 2;
  }
  opt.seed_given = seed_option->count() > 0;
  opt.trajectories_given = trajectories_option->count() > 0;

  RunManifest manifest;
  manifest.seed = opt.seed;
  const auto started = std::chrono::steady_clock::now();
  try {
    require_one_output_form(opt);
    if (modes_cmd->parsed()) {
      manifest.command = "modes";
      run_modes(opt, manifest);
    } else if (scan_cmd->parsed()) {
      manifest.command = "scan";
      run_scan(opt, manifest);
    } else if (cooling_cmd->parsed()) {
      manifest.command = "cooling";
      run_cooling(opt, manifest);
    } else if (qls_cmd->parsed()) {
      manifest.command = "qls";
      run_qls(opt, manifest);
    } else if (reorder_cmd->parsed()) {
      manifest.command = "reorder";
      run_reorder(opt, manifest);
    }
  } catch (const ionsim::InstabilityError& error) {
    std::cerr << "ionsim: error: " << error.what() << '\n';
    return 3;
  } catch (const ionsim::ContinuationError& error) {
    std::cerr << "ionsim: error: " << error.what() << " (step "
              << error.step() << ")\n";
    return 6;
  } catch (const ionsim::AssumptionError& error) {
    std::cerr << "ionsim: error: " << error.what() << '\n';
    return 4;
  } catch (const ionsim::TruncationError& error) {
    std::cerr << "ionsim: error: " << error.what() << '\n'
              << "ionsim: advice: enlarge the Fock register (n_max) or "
                 "reduce the displacement so the wave packet fits\n";
    return 5;
  } catch (const std::exception& error) {
    std::cerr << "ionsim: error: " << error.what() << '\n';
    return 2;
  }

  manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::cerr << "manifest: " << manifest.full().dump() << '\n';
  return 0;
}
