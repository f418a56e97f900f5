#include "ionsim/io/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ionsim/constants.hpp"

namespace ionsim {

namespace {

namespace k = constants;

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw std::invalid_argument(context + ": " + message);
}

std::string quoted(const char* key) {
  return std::string("\"") + key + "\"";
}

const Json& member(const Json& doc, const char* key,
                   const std::string& context) {
  if (!doc.is_object())
    fail(context, "expected a JSON object");
  auto it = doc.find(key);
  if (it == doc.end())
    fail(context, "missing required key " + quoted(key));
  return *it;
}

double number_at(const Json& doc, const char* key,
                 const std::string& context) {
  const Json& value = member(doc, key, context);
  if (!value.is_number())
    fail(context, quoted(key) + " must be a number");
  return value.get<double>();
}

double number_or(const Json& doc, const char* key, double fallback,
                 const std::string& context) {
  if (!doc.is_object() || !doc.contains(key))
    return fallback;
  return number_at(doc, key, context);
}

long long integer_at(const Json& doc, const char* key,
                     const std::string& context) {
  const Json& value = member(doc, key, context);
  if (!value.is_number_integer() && !value.is_number_unsigned())
    fail(context, quoted(key) + " must be an integer");
  return value.get<long long>();
}

long long integer_or(const Json& doc, const char* key, long long fallback,
                     const std::string& context) {
  if (!doc.is_object() || !doc.contains(key))
    return fallback;
  return integer_at(doc, key, context);
}

std::string string_at(const Json& doc, const char* key,
                      const std::string& context) {
  const Json& value = member(doc, key, context);
  if (!value.is_string())
    fail(context, quoted(key) + " must be a string");
  return value.get<std::string>();
}

Vec3 vec3_at(const Json& doc, const char* key, const std::string& context) {
  const Json& value = member(doc, key, context);
  if (!value.is_array() || value.size() != 3)
    fail(context, quoted(key) + " must be an array of three numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!value[i].is_number())
      fail(context, quoted(key) + " must be an array of three numbers");
    out[i] = value[i].get<double>();
  }
  return out;
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> allowed,
                    const std::string& context) {
  if (!doc.is_object())
    return;
  for (const auto& item : doc.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      fail(context, "unknown key " + quoted(item.key().c_str()));
  }
}

void require_schema_version(const Json& doc, const std::string& context) {
  const long long version = integer_at(doc, "schema_version", context);
  if (version != kSchemaVersion)
    fail(context, "unsupported schema_version " + std::to_string(version) +
                      " (this build reads version " +
                      std::to_string(kSchemaVersion) + ")");
}

Json vec3_to_json(const Vec3& v) {
  return Json::array({v[0], v[1], v[2]});
}

std::string dash_to_commas(const std::string& label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), '-', ',');
  return out;
}

} // namespace

// --- files and canonical text ------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof())
    throw std::runtime_error("failed reading file: " + path);
  return buffer.str();
}

Json parse_json(const std::string& text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& error) {
    throw std::invalid_argument(context + ": " + error.what());
  }
}

std::string canonical_json(const Json& document) {
  return document.dump(2) + "\n";
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

// --- digests and the run manifest --------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char byte : bytes) {
    state ^= byte;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string input_digest(const std::vector<std::string>& documents) {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  for (const std::string& document : documents) {
    state = fnv1a64(document, state);
    // Fold in the length so document boundaries are part of the digest.
    std::uint64_t size = document.size();
    char size_bytes[8];
    for (int i = 0; i < 8; ++i)
      size_bytes[i] = static_cast<char>((size >> (8 * i)) & 0xff);
    state = fnv1a64(std::string_view(size_bytes, 8), state);
  }
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(state));
  return buffer;
}

Json RunManifest::document_fields() const {
  Json doc;
  doc["command"] = command;
  doc["input_digest"] = input_digest;
  doc["seed"] = seed;
  doc["tool_version"] = tool_version;
  return doc;
}

Json RunManifest::full() const {
  Json doc = document_fields();
  doc["wall_time_s"] = wall_time_s;
  return doc;
}

// --- core model types ---------------------------------------------------------

Json species_to_json(const IonSpecies& species) {
  Json doc;
  doc["charge"] = species.charge;
  doc["mass_amu"] = species.mass_amu;
  doc["name"] = species.name;
  return doc;
}

IonSpecies species_from_json(const Json& doc) {
  const std::string context = "species";
  reject_unknown(doc, {"charge", "mass_amu", "name"}, context);
  const std::string name = string_at(doc, "name", context);
  const double mass = number_at(doc, "mass_amu", context);
  const long long charge = integer_or(doc, "charge", 1, context);
  if (charge < 1 || charge > std::numeric_limits<int>::max())
    fail(context, "\"charge\" must be a positive integer");
  return IonSpecies(name, mass, static_cast<int>(charge));
}

Json trap_to_json(const TrapModel& trap) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["rf_coeff_x_SI"] = trap.rf_coeff[0];
  doc["rf_coeff_y_SI"] = trap.rf_coeff[1];
  doc["rf_coeff_z_SI"] = trap.rf_coeff[2];
  doc["static_coeff_x_SI"] = trap.static_coeff[0];
  doc["static_coeff_y_SI"] = trap.static_coeff[1];
  doc["static_coeff_z_SI"] = trap.static_coeff[2];
  doc["rf_drive_2pi_MHz"] = trap.rf_drive / (k::two_pi * 1e6);
  doc["uniform_field_V_per_m"] = vec3_to_json(trap.uniform_field);
  doc["axial_gradient_eV_per_m"] = trap.axial_gradient / k::elementary_charge;
  doc["reference_mass_amu"] = trap.reference_mass / k::atomic_mass_unit;
  doc["cubic_scale_um"] =
      trap.cubic_scale ? Json(*trap.cubic_scale * 1e6) : Json(nullptr);
  doc["twist_coeff_V_per_m2"] = trap.twist_coeff;
  return doc;
}

namespace {

bool has_coefficient_keys(const Json& doc) {
  for (const char* key :
       {"rf_coeff_x_SI", "rf_coeff_y_SI", "rf_coeff_z_SI", "static_coeff_x_SI",
        "static_coeff_y_SI", "static_coeff_z_SI", "rf_drive_2pi_MHz"})
    if (doc.contains(key))
      return true;
  return false;
}

} // namespace

TrapModel trap_from_json(const Json& doc) {
  const std::string context = "trap";
  if (!doc.is_object())
    fail(context, "expected a JSON object");
  reject_unknown(doc,
                 {"schema_version", "fit_from_reference", "retune",
                  "rf_coeff_x_SI", "rf_coeff_y_SI", "rf_coeff_z_SI",
                  "static_coeff_x_SI", "static_coeff_y_SI",
                  "static_coeff_z_SI", "rf_drive_2pi_MHz",
                  "uniform_field_V_per_m", "axial_gradient_eV_per_m",
                  "reference_mass_amu", "cubic_scale_um",
                  "twist_coeff_V_per_m2"},
                 context);
  require_schema_version(doc, context);

  const bool fit_form = doc.contains("fit_from_reference");
  const bool retune_form = doc.contains("retune");
  const bool coeff_form = has_coefficient_keys(doc);
  if (fit_form + retune_form + coeff_form != 1)
    fail(context,
         "give exactly one of the coefficient keys, \"fit_from_reference\", "
         "or \"retune\"");

  TrapModel trap;
  double default_reference_mass = 0.0;
  if (fit_form) {
    const Json& fit = doc["fit_from_reference"];
    const std::string fit_context = context + ".fit_from_reference";
    reject_unknown(fit,
                   {"species_a", "freqs_a_MHz", "species_b", "freqs_b_MHz",
                    "rf_drive_2pi_MHz"},
                   fit_context);
    const IonSpecies a = species_from_json(member(fit, "species_a", fit_context));
    const IonSpecies b = species_from_json(member(fit, "species_b", fit_context));
    const Vec3 freqs_a = vec3_at(fit, "freqs_a_MHz", fit_context) * 1e6;
    const Vec3 freqs_b = vec3_at(fit, "freqs_b_MHz", fit_context) * 1e6;
    const double drive =
        number_at(fit, "rf_drive_2pi_MHz", fit_context) * k::two_pi * 1e6;
    trap = fit_trap_from_reference(a, freqs_a, b, freqs_b, drive).trap;
    default_reference_mass = std::min(a.mass_kg(), b.mass_kg());
  } else if (retune_form) {
    const Json& retune = doc["retune"];
    const std::string retune_context = context + ".retune";
    reject_unknown(retune, {"base", "species", "freqs_MHz"}, retune_context);
    const TrapModel base = trap_from_json(member(retune, "base", retune_context));
    const IonSpecies species =
        species_from_json(member(retune, "species", retune_context));
    const Vec3 freqs = vec3_at(retune, "freqs_MHz", retune_context) * 1e6;
    trap = with_static_retuned(base, species, freqs);
  } else {
    trap.rf_coeff = Vec3(number_at(doc, "rf_coeff_x_SI", context),
                         number_at(doc, "rf_coeff_y_SI", context),
                         number_at(doc, "rf_coeff_z_SI", context));
    trap.static_coeff = Vec3(number_at(doc, "static_coeff_x_SI", context),
                             number_at(doc, "static_coeff_y_SI", context),
                             number_at(doc, "static_coeff_z_SI", context));
    trap.rf_drive = number_at(doc, "rf_drive_2pi_MHz", context) * k::two_pi * 1e6;
  }

  if (doc.contains("uniform_field_V_per_m"))
    trap.uniform_field = vec3_at(doc, "uniform_field_V_per_m", context);
  if (doc.contains("axial_gradient_eV_per_m"))
    trap.axial_gradient = number_at(doc, "axial_gradient_eV_per_m", context) *
                          k::elementary_charge;
  if (doc.contains("reference_mass_amu"))
    trap.reference_mass =
        number_at(doc, "reference_mass_amu", context) * k::atomic_mass_unit;
  if (doc.contains("cubic_scale_um")) {
    const Json& scale = doc["cubic_scale_um"];
    if (scale.is_null())
      trap.cubic_scale.reset();
    else if (scale.is_number())
      trap.cubic_scale = scale.get<double>() * 1e-6;
    else
      fail(context, "\"cubic_scale_um\" must be a number or null");
  }
  if (doc.contains("twist_coeff_V_per_m2"))
    trap.twist_coeff = number_at(doc, "twist_coeff_V_per_m2", context);

  const bool needs_reference =
      trap.axial_gradient != 0.0 || trap.cubic_scale.has_value();
  if (needs_reference && !(trap.reference_mass > 0.0)) {
    if (default_reference_mass > 0.0)
      trap.reference_mass = default_reference_mass;
    else
      fail(context,
           "axial_gradient_eV_per_m / cubic_scale_um require "
           "reference_mass_amu");
  }
  return trap;
}

ChainInput chain_input_from_json(const Json& doc) {
  const std::string context = "chain input";
  reject_unknown(doc, {"schema_version", "trap", "species"}, context);
  require_schema_version(doc, context);
  ChainInput input;
  input.trap = trap_from_json(member(doc, "trap", context));
  const Json& species = member(doc, "species", context);
  if (!species.is_array() || species.empty())
    fail(context, "\"species\" must be a non-empty array");
  for (const Json& entry : species)
    input.species.push_back(species_from_json(entry));
  return input;
}

Json chain_to_json(const ChainConfiguration& config) {
  Json doc;
  doc["converged"] = config.converged;
  doc["gradient_norm_N"] = config.gradient_norm;
  Json positions = Json::array();
  const int ions = static_cast<int>(config.species.size());
  for (int j = 0; j < ions; ++j)
    positions.push_back(Json::array({config.positions[3 * j] * 1e6,
                                     config.positions[3 * j + 1] * 1e6,
                                     config.positions[3 * j + 2] * 1e6}));
  doc["positions_um"] = positions;
  doc["potential_energy_J"] = config.potential_energy;
  Json species = Json::array();
  for (const IonSpecies& s : config.species)
    species.push_back(species_to_json(s));
  doc["species"] = species;
  return doc;
}

Json modes_to_json(const NormalModeSet& modes) {
  Json doc;
  doc["chain"] = chain_to_json(modes.config);
  Json list = Json::array();
  const int count = static_cast<int>(modes.omega_sq.size());
  for (int alpha = 0; alpha < count; ++alpha) {
    Json mode;
    mode["frequency_MHz"] = modes.frequency_hz(alpha) / 1e6;
    mode["stable"] = static_cast<bool>(modes.stable[alpha]);
    Json vector = Json::array();
    for (int i = 0; i < count; ++i)
      vector.push_back(modes.eigenvectors(i, alpha));
    mode["eigenvector"] = vector;
    list.push_back(mode);
  }
  doc["modes"] = list;
  doc["warnings"] = modes.warnings;
  return doc;
}

// --- laser input ---------------------------------------------------------------

LaserInput laser_from_json(const Json& doc, int ion_count) {
  const std::string context = "laser";
  reject_unknown(doc,
                 {"schema_version", "direction", "wavelength_nm",
                  "linewidth_2pi_MHz", "detuning_over_linewidth", "saturation",
                  "target_ion", "occupation"},
                 context);
  require_schema_version(doc, context);

  const Vec3 direction = vec3_at(doc, "direction", context);
  if (!(direction.norm() > 0.0))
    fail(context, "\"direction\" must be a non-zero vector");
  const double wavelength = number_at(doc, "wavelength_nm", context);
  if (!(wavelength > 0.0))
    fail(context, "\"wavelength_nm\" must be positive");
  const double linewidth = number_at(doc, "linewidth_2pi_MHz", context);
  if (!(linewidth > 0.0))
    fail(context, "\"linewidth_2pi_MHz\" must be positive");
  const double detuning = number_at(doc, "detuning_over_linewidth", context);
  const double saturation = number_at(doc, "saturation", context);
  if (!(saturation >= 0.0))
    fail(context, "\"saturation\" must be non-negative");
  const long long ion = integer_at(doc, "target_ion", context);
  if (ion < 0 || ion >= ion_count)
    fail(context, "\"target_ion\" must index an ion of the chain (0.." +
                      std::to_string(ion_count - 1) + ")");
  const double occupation = number_or(doc, "occupation", 0.0, context);
  if (!(occupation >= 0.0))
    fail(context, "\"occupation\" must be non-negative");

  LaserInput input;
  input.laser.wavevector =
      (k::two_pi / (wavelength * 1e-9)) * direction.normalized();
  input.laser.linewidth = linewidth * k::two_pi * 1e6;
  input.laser.detuning = detuning * input.laser.linewidth;
  input.laser.rabi_frequency = input.laser.linewidth * std::sqrt(saturation / 2.0);
  input.target_ion = static_cast<int>(ion);
  input.occupation = occupation;
  return input;
}

Json cooling_report_to_json(const CoolingReport& report) {
  Json doc;
  doc["detuning_over_linewidth"] = report.detuning_over_linewidth;
  doc["doppler_rate_quanta_per_s"] = report.doppler_rate;
  doc["equilibrium_occupation"] = std::isfinite(report.equilibrium_n)
                                      ? Json(report.equilibrium_n)
                                      : Json(nullptr);
  doc["eta"] = report.eta;
  doc["frequency_MHz"] = report.mode_frequency_hz / 1e6;
  doc["ion"] = report.ion;
  doc["mode"] = report.mode;
  doc["notes"] = report.notes;
  doc["occupation"] = report.occupation;
  doc["recoil_heating_quanta_per_s"] = report.recoil_rate;
  doc["saturation"] = report.saturation;
  doc["warnings"] = report.warnings;
  return doc;
}

// --- Monte Carlo protocol input --------------------------------------------------

namespace {

DetectionModel detection_from(const Json& doc, const std::string& context) {
  const Json& means = member(doc, "mean_counts", context);
  if (!means.is_array() || means.size() < 2)
    fail(context, "\"mean_counts\" must be an array of at least two numbers");
  DetectionModel model;
  model.mean_counts = VecX(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (!means[i].is_number())
      fail(context, "\"mean_counts\" must be an array of numbers");
    model.mean_counts[static_cast<int>(i)] = means[i].get<double>();
  }
  model.window_s = number_at(doc, "window_ms", context) * 1e-3;
  if (!(model.window_s > 0.0))
    fail(context, "\"window_ms\" must be positive");
  return model;
}

std::string true_state_at(const Json& doc, const std::string& context,
                          std::initializer_list<const char*> states) {
  const std::string value = string_at(doc, "true_state", context);
  if (value == "alternate")
    return value;
  for (const char* state : states)
    if (value == state)
      return value;
  std::string allowed = "\"alternate\"";
  for (const char* state : states)
    allowed += std::string(", ") + quoted(state);
  fail(context, "\"true_state\" must be one of " + allowed);
}

} // namespace

QlsRunSpec qls_spec_from_json(const Json& doc) {
  const std::string context = "protocol";
  require_schema_version(doc, context);
  QlsRunSpec spec;
  spec.protocol = string_at(doc, "protocol", context);

  if (doc.contains("seed")) {
    const Json& seed = doc["seed"];
    if (!seed.is_number_unsigned() &&
        !(seed.is_number_integer() && seed.get<long long>() >= 0))
      fail(context, "\"seed\" must be a non-negative integer");
    spec.seed = seed.get<std::uint64_t>();
  }
  const long long trajectories = integer_or(doc, "trajectories", 1, context);
  if (trajectories < 1)
    fail(context, "\"trajectories\" must be a positive integer");
  spec.trajectories = static_cast<int>(trajectories);

  if (spec.protocol == "qnd") {
    reject_unknown(doc,
                   {"schema_version", "protocol", "seed", "trajectories",
                    "true_state", "mean_counts", "window_ms",
                    "mapping_fidelity", "p_des", "max_rounds",
                    "upper_lifetime_s", "round_duration_ms"},
                   context);
    spec.true_state = true_state_at(doc, context, {"S", "P0"});
    spec.qnd.detection = detection_from(doc, context);
    spec.qnd.mapping_fidelity =
        number_or(doc, "mapping_fidelity", 1.0, context);
    spec.qnd.p_des = number_or(doc, "p_des", spec.qnd.p_des, context);
    spec.qnd.max_rounds = static_cast<int>(
        integer_or(doc, "max_rounds", spec.qnd.max_rounds, context));
    spec.qnd.upper_lifetime_s =
        number_or(doc, "upper_lifetime_s", spec.qnd.upper_lifetime_s, context);
    spec.qnd.round_duration_s =
        number_or(doc, "round_duration_ms", 0.0, context) * 1e-3;
  } else if (spec.protocol == "schmidt") {
    reject_unknown(doc,
                   {"schema_version", "protocol", "seed", "trajectories",
                    "true_state", "mean_counts", "window_ms", "nbar_init",
                    "angle_error"},
                   context);
    spec.true_state = true_state_at(doc, context, {"g", "e"});
    spec.schmidt_detection = detection_from(doc, context);
    spec.schmidt.nbar_init = number_or(doc, "nbar_init", 0.0, context);
    spec.schmidt.angle_error = number_or(doc, "angle_error", 0.0, context);
  } else if (spec.protocol == "dicke") {
    reject_unknown(doc,
                   {"schema_version", "protocol", "seed", "trajectories",
                    "eta", "eta_imbalance", "intensity_noise_rms", "nbar_init",
                    "n_max"},
                   context);
    spec.dicke.eta = number_or(doc, "eta", spec.dicke.eta, context);
    spec.dicke.eta_imbalance =
        number_or(doc, "eta_imbalance", 0.0, context);
    spec.dicke.intensity_noise_rms =
        number_or(doc, "intensity_noise_rms", 0.0, context);
    spec.dicke.nbar_init = number_or(doc, "nbar_init", 0.0, context);
    spec.dicke.n_max =
        static_cast<int>(integer_or(doc, "n_max", spec.dicke.n_max, context));
  } else if (spec.protocol == "pumping") {
    reject_unknown(doc,
                   {"schema_version", "protocol", "seed", "trajectories",
                    "steps", "pulse_angle_error"},
                   context);
    const long long steps = integer_at(doc, "steps", context);
    if (steps < 1)
      fail(context, "\"steps\" must be a positive integer");
    spec.pumping_steps = static_cast<int>(steps);
    spec.pumping_angle_error =
        number_or(doc, "pulse_angle_error", 0.0, context);
  } else {
    fail(context,
         "\"protocol\" must be one of \"qnd\", \"schmidt\", \"dicke\", "
         "\"pumping\"");
  }
  return spec;
}

Json readout_record_to_json(const ReadoutRecord& record) {
  Json doc;
  doc["counts"] = record.counts;
  doc["decision"] = record.decision;
  Json posteriors = Json::array();
  for (const VecX& posterior : record.posteriors) {
    Json row = Json::array();
    for (int i = 0; i < posterior.size(); ++i)
      row.push_back(posterior[i]);
    posteriors.push_back(row);
  }
  doc["posteriors"] = posteriors;
  doc["rounds"] = record.rounds;
  doc["state_trace"] = record.state_trace;
  doc["timed_out"] = record.timed_out;
  return doc;
}

// --- reordering schedule input ----------------------------------------------------

namespace {

std::vector<IonSpecies> resolve_order(const Json& names,
                                      const std::vector<IonSpecies>& species,
                                      const std::string& context) {
  if (!names.is_array() || names.size() != species.size())
    fail(context, "\"start_order\" must list one name per ion or be \"all\"");
  std::vector<IonSpecies> pool = species;
  std::vector<IonSpecies> order;
  for (const Json& entry : names) {
    if (!entry.is_string())
      fail(context, "\"start_order\" entries must be species names");
    const std::string name = entry.get<std::string>();
    auto it = std::find_if(pool.begin(), pool.end(),
                           [&](const IonSpecies& s) { return s.name == name; });
    if (it == pool.end())
      fail(context, "\"start_order\" name " + quoted(name.c_str()) +
                        " does not match the species list");
    order.push_back(*it);
    pool.erase(it);
  }
  return order;
}

} // namespace

ReorderSpec reorder_spec_from_json(const Json& doc) {
  const std::string context = "schedule";
  require_schema_version(doc, context);
  ReorderSpec spec;
  spec.kind = string_at(doc, "kind", context);

  const Json& species = member(doc, "species", context);
  if (!species.is_array() || species.empty())
    fail(context, "\"species\" must be a non-empty array");
  for (const Json& entry : species)
    spec.species.push_back(species_from_json(entry));

  const Json& start = member(doc, "start_order", context);
  if (start.is_string() && start.get<std::string>() == "all")
    spec.start_orders = enumerate_orders(spec.species);
  else
    spec.start_orders = {resolve_order(start, spec.species, context)};

  if (spec.kind == "ramp") {
    reject_unknown(doc,
                   {"schema_version", "kind", "species", "start_order",
                    "snapshots", "steps"},
                   context);
    const Json& snapshots = member(doc, "snapshots", context);
    if (!snapshots.is_array() || snapshots.size() < 2)
      fail(context, "\"snapshots\" must be an array of at least two traps");
    for (const Json& snapshot : snapshots)
      spec.schedule.snapshots.push_back(trap_from_json(snapshot));
    if (doc.contains("steps")) {
      const Json& steps = doc["steps"];
      if (!steps.is_array())
        fail(context, "\"steps\" must be an array of integers");
      for (const Json& step : steps) {
        if (!step.is_number_integer() && !step.is_number_unsigned())
          fail(context, "\"steps\" must be an array of integers");
        spec.schedule.steps.push_back(step.get<int>());
      }
    }
    spec.schedule.validate();
  } else if (spec.kind == "asymmetric") {
    reject_unknown(doc,
                   {"schema_version", "kind", "species", "start_order", "trap",
                    "field_V_per_m", "twist_coeff_V_per_m2"},
                   context);
    if (spec.species.size() != 2)
      fail(context, "asymmetric reordering is defined for two-ion chains");
    spec.trap = trap_from_json(member(doc, "trap", context));
    spec.field_v_m = number_at(doc, "field_V_per_m", context);
    spec.twist_coeff = number_at(doc, "twist_coeff_V_per_m2", context);
  } else {
    fail(context, "\"kind\" must be \"ramp\" or \"asymmetric\"");
  }
  return spec;
}

Json reorder_run_to_json(const ReorderRunRecord& run) {
  Json doc;
  doc["final_geometry"] = run.final_geometry;
  doc["final_order"] = run.final_order.empty()
                           ? Json(nullptr)
                           : Json(dash_to_commas(run.final_order));
  doc["start_order"] = dash_to_commas(run.start_order);
  doc["steps"] = run.steps;
  if (run.asymmetric) {
    doc["aligned"] = run.aligned;
    doc["sub_critical"] = run.sub_critical;
  }
  return doc;
}

// --- tables and CSV matrices --------------------------------------------------------

namespace {

std::string centered(const std::string& text, int width) {
  const int length = static_cast<int>(text.size());
  if (length >= width)
    return text;
  const int left = (width - length) / 2;
  return std::string(left, ' ') + text +
         std::string(width - length - left, ' ');
}

} // namespace

std::string mode_table_text(const NormalModeSet& modes) {
  const int count = static_cast<int>(modes.omega_sq.size());
  const int ions = static_cast<int>(modes.config.species.size());
  std::ostringstream out;
  char cell[64];

  out << std::string(8, ' ');
  for (int j = 0; j < ions; ++j)
    out << centered(modes.config.species[j].name + "(" + std::to_string(j) +
                        ")",
                    24);
  out << '\n';
  std::snprintf(cell, sizeof(cell), "%8s", "f/MHz");
  out << cell;
  for (int j = 0; j < ions; ++j) {
    std::snprintf(cell, sizeof(cell), "%8s%8s%8s", "e'x", "e'y", "e'z");
    out << cell;
  }
  out << '\n';

  for (int row = 0; row < count; ++row) {
    const int alpha = count - 1 - row; // descending frequency
    std::snprintf(cell, sizeof(cell), "%8.2f", modes.frequency_hz(alpha) / 1e6);
    out << cell;
    for (int i = 0; i < count; ++i) {
      double entry = modes.eigenvectors(i, alpha);
      if (entry == 0.0)
        entry = 0.0; // normalize -0
      std::snprintf(cell, sizeof(cell), "%8.3f", entry);
      out << cell;
    }
    if (!modes.stable[alpha])
      out << "  [unstable]";
    out << '\n';
  }
  for (const std::string& warning : modes.warnings)
    out << "# " << warning << '\n';
  return out.str();
}

std::string mode_table_csv(const NormalModeSet& modes) {
  const int count = static_cast<int>(modes.omega_sq.size());
  const int ions = static_cast<int>(modes.config.species.size());
  std::ostringstream out;
  out << "mode,frequency_MHz,stable";
  for (int j = 0; j < ions; ++j)
    for (const char* axis : {"x", "y", "z"})
      out << ",e_" << axis << "_ion" << j;
  out << '\n';
  for (int row = 0; row < count; ++row) {
    const int alpha = count - 1 - row;
    out << (row + 1) << ',' << format_double(modes.frequency_hz(alpha) / 1e6)
        << ',' << (modes.stable[alpha] ? 1 : 0);
    for (int i = 0; i < count; ++i)
      out << ',' << format_double(modes.eigenvectors(i, alpha));
    out << '\n';
  }
  return out.str();
}

std::string scan_csv(const ModeScanResult& scan, bool with_shift) {
  const int points = static_cast<int>(scan.branch_frequency_hz.rows());
  const int branches = static_cast<int>(scan.branch_frequency_hz.cols());

  int zero_row = -1;
  if (with_shift) {
    for (int p = 0; p < points; ++p)
      if (std::abs(scan.field_values[p]) <= 1e-12) {
        zero_row = p;
        break;
      }
    if (zero_row < 0)
      throw std::invalid_argument(
          "shift columns are relative to zero field: include field 0 in the "
          "scan range");
  }

  std::ostringstream out;
  out << "field_V_per_m";
  for (int b = 0; b < branches; ++b)
    out << ",f_mode" << (b + 1) << "_MHz";
  if (with_shift)
    for (int b = 0; b < branches; ++b)
      out << ",shift_mode" << (b + 1) << "_MHz";
  out << '\n';

  for (int p = 0; p < points; ++p) {
    out << format_double(scan.field_values[p]);
    for (int b = 0; b < branches; ++b)
      out << ',' << format_double(scan.branch_frequency_hz(p, b) / 1e6);
    if (with_shift)
      for (int b = 0; b < branches; ++b)
        out << ','
            << format_double((scan.branch_frequency_hz(p, b) -
                              scan.branch_frequency_hz(zero_row, b)) /
                             1e6);
    out << '\n';
  }
  return out.str();
}

std::string reorder_csv(const std::vector<ReorderRunRecord>& runs) {
  std::ostringstream out;
  int ions = 0;
  for (const ReorderRunRecord& run : runs)
    if (!run.trajectory.configurations.empty())
      ions = static_cast<int>(run.trajectory.configurations[0].species.size());
  out << "run,step,order";
  for (int j = 0; j < ions; ++j)
    out << ",x" << j << "_um,y" << j << "_um,z" << j << "_um";
  out << '\n';

  for (const ReorderRunRecord& run : runs) {
    const auto& steps = run.trajectory.configurations;
    for (std::size_t step = 0; step < steps.size(); ++step) {
      const ConfigurationClass label = classify(steps[step]);
      out << run.start_order << ',' << step << ','
          << (label.kind == ConfigurationKind::linear ? label.order
                                                      : label.geometry);
      for (int i = 0; i < 3 * ions; ++i)
        out << ',' << format_double(steps[step].positions[i] * 1e6);
      out << '\n';
    }
  }
  return out.str();
}

// --- schema validation -----------------------------------------------------------------

namespace {

bool type_matches(const Json& doc, const std::string& type) {
  if (type == "object")
    return doc.is_object();
  if (type == "array")
    return doc.is_array();
  if (type == "string")
    return doc.is_string();
  if (type == "integer")
    return doc.is_number_integer() || doc.is_number_unsigned();
  if (type == "number")
    return doc.is_number();
  if (type == "boolean")
    return doc.is_boolean();
  if (type == "null")
    return doc.is_null();
  return false;
}

void validate_node(const Json& doc, const Json& schema, const std::string& path,
                   std::vector<std::string>& errors) {
  const std::string where = path.empty() ? "/" : path;

  if (schema.contains("type")) {
    const Json& type = schema["type"];
    bool ok = false;
    if (type.is_string())
      ok = type_matches(doc, type.get<std::string>());
    else if (type.is_array())
      for (const Json& option : type)
        ok = ok || type_matches(doc, option.get<std::string>());
    if (!ok) {
      errors.push_back(where + ": expected type " + type.dump());
      return; // the remaining keywords assume the type
    }
  }

  if (schema.contains("enum")) {
    bool ok = false;
    for (const Json& option : schema["enum"])
      ok = ok || doc == option;
    if (!ok)
      errors.push_back(where + ": value not in enum " + schema["enum"].dump());
  }

  if (doc.is_number()) {
    if (schema.contains("minimum") &&
        doc.get<double>() < schema["minimum"].get<double>())
      errors.push_back(where + ": below minimum " + schema["minimum"].dump());
    if (schema.contains("maximum") &&
        doc.get<double>() > schema["maximum"].get<double>())
      errors.push_back(where + ": above maximum " + schema["maximum"].dump());
  }

  if (doc.is_array()) {
    if (schema.contains("minItems") &&
        doc.size() < schema["minItems"].get<std::size_t>())
      errors.push_back(where + ": fewer than " + schema["minItems"].dump() +
                       " items");
    if (schema.contains("maxItems") &&
        doc.size() > schema["maxItems"].get<std::size_t>())
      errors.push_back(where + ": more than " + schema["maxItems"].dump() +
                       " items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < doc.size(); ++i)
        validate_node(doc[i], schema["items"], path + "/" + std::to_string(i),
                      errors);
  }

  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const Json& key : schema["required"])
        if (!doc.contains(key.get<std::string>()))
          errors.push_back(where + ": missing required key \"" +
                           key.get<std::string>() + "\"");
    const Json* properties =
        schema.contains("properties") ? &schema["properties"] : nullptr;
    if (properties)
      for (const auto& item : doc.items())
        if (properties->contains(item.key()))
          validate_node(item.value(), (*properties)[item.key()],
                        path + "/" + item.key(), errors);
    if (schema.contains("additionalProperties") &&
        schema["additionalProperties"].is_boolean() &&
        !schema["additionalProperties"].get<bool>())
      for (const auto& item : doc.items())
        if (!properties || !properties->contains(item.key()))
          errors.push_back(where + ": unknown key \"" + item.key() + "\"");
  }

  if (schema.contains("oneOf")) {
    int matches = 0;
    for (const Json& option : schema["oneOf"]) {
      std::vector<std::string> scratch;
      validate_node(doc, option, path, scratch);
      if (scratch.empty())
        ++matches;
    }
    if (matches != 1)
      errors.push_back(where + ": matches " + std::to_string(matches) +
                       " of " + std::to_string(schema["oneOf"].size()) +
                       " oneOf branches (need exactly 1)");
  }
}

} // namespace

std::vector<std::string> schema_errors(const Json& document,
                                       const Json& schema) {
  std::vector<std::string> errors;
  validate_node(document, schema, "", errors);
  return errors;
}

} // namespace ionsim
