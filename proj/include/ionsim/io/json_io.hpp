#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ionsim/qls/protocols.hpp"
#include "ionsim/rates.hpp"
#include "ionsim/reorder.hpp"
#include "ionsim/scan.hpp"

namespace ionsim {

using Json = nlohmann::json;

// Version stamps shared by every serialized document.
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "ionsim 1.0.0";

// --- files and canonical text ------------------------------------------------

// Whole file as bytes; throws std::runtime_error naming the path.
std::string read_text_file(const std::string& path);

// Parse with errors rephrased as std::invalid_argument naming `context`.
Json parse_json(const std::string& text, const std::string& context);

// The one serialization used for emitted documents: two-space indent,
// sorted keys (object storage order), trailing newline. Rerunning a
// command with identical inputs reproduces these bytes exactly.
std::string canonical_json(const Json& document);

// Numbers in CSV cells and text tables: %.12g.
std::string format_double(double value);

// --- digests and the run manifest --------------------------------------------

// FNV-1a 64-bit over raw bytes; pure integer arithmetic, so the digest is
// identical on every platform.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

// 16-hex-digit digest of the input documents, chained in argument order.
std::string input_digest(const std::vector<std::string>& documents);

// Provenance block embedded in every output document. The wall time is
// reported on stderr only: keeping it out of the document is what lets a
// rerun with the same inputs and seed be byte-identical.
struct RunManifest {
  std::string command;
  std::string input_digest;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  double wall_time_s = 0.0;

  Json document_fields() const; // command, digest, seed, version
  Json full() const;            // the above plus wall_time_s
};

// --- core model types ---------------------------------------------------------

Json species_to_json(const IonSpecies& species);
IonSpecies species_from_json(const Json& doc);

// Trap documents carry explicit unit-suffixed keys and a schema_version.
// trap_to_json emits the coefficient form; trap_from_json additionally
// accepts two constructor forms, discriminated by key:
//
//   {"fit_from_reference": {"species_a", "freqs_a_MHz", "species_b",
//                           "freqs_b_MHz", "rf_drive_2pi_MHz"}}
//   {"retune": {"base": <trap document>, "species", "freqs_MHz"}}
//
// The optional perturbation keys (uniform_field_V_per_m,
// axial_gradient_eV_per_m, reference_mass_amu, cubic_scale_um,
// twist_coeff_V_per_m2) apply to every form, after construction. In the
// fit form a gradient or cubic term without an explicit reference mass
// defaults it to the lighter reference species.
Json trap_to_json(const TrapModel& trap);
TrapModel trap_from_json(const Json& doc);

// Chain input document: {"schema_version", "trap", "species": [...]}.
struct ChainInput {
  TrapModel trap;
  std::vector<IonSpecies> species;
};
ChainInput chain_input_from_json(const Json& doc);

Json chain_to_json(const ChainConfiguration& config); // positions in um
Json modes_to_json(const NormalModeSet& modes);       // MHz, ascending

// --- laser input ---------------------------------------------------------------

// {"schema_version", "direction", "wavelength_nm", "linewidth_2pi_MHz",
//  "detuning_over_linewidth", "saturation", "target_ion",
//  "occupation" (optional, default 0)}
struct LaserInput {
  LaserField laser;
  int target_ion = 0;
  double occupation = 0.0;
};
LaserInput laser_from_json(const Json& doc, int ion_count);

Json cooling_report_to_json(const CoolingReport& report);

// --- Monte Carlo protocol input --------------------------------------------------

// {"schema_version", "protocol", "seed", "trajectories", ...} with the
// remaining keys fixed per protocol; see schemas/qls_protocol.v1.json.
struct QlsRunSpec {
  std::string protocol; // "qnd", "schmidt", "dicke", "pumping"
  std::uint64_t seed = 0;
  int trajectories = 1;
  std::string true_state; // qnd/schmidt; "alternate" cycles per trajectory

  QndModel qnd;
  SchmidtImperfections schmidt;
  DetectionModel schmidt_detection;
  DickeOptions dicke;
  int pumping_steps = 0;
  double pumping_angle_error = 0.0;
};
QlsRunSpec qls_spec_from_json(const Json& doc);

Json readout_record_to_json(const ReadoutRecord& record);

// --- reordering schedule input ----------------------------------------------------

// Two schedule kinds:
//   {"kind": "ramp", "species": [...], "start_order": [names] | "all",
//    "snapshots": [<trap document>, ...], "steps": [...] (optional)}
//   {"kind": "asymmetric", "species": [two], "start_order": [names] | "all",
//    "trap": <trap document>, "field_V_per_m", "twist_coeff_V_per_m2"}
struct ReorderSpec {
  std::string kind; // "ramp" or "asymmetric"
  std::vector<IonSpecies> species;
  std::vector<std::vector<IonSpecies>> start_orders;
  RampSchedule schedule;  // ramp
  TrapModel trap;         // asymmetric
  double field_v_m = 0.0;
  double twist_coeff = 0.0;
};
ReorderSpec reorder_spec_from_json(const Json& doc);

// One completed continuation, however it was produced.
struct ReorderRunRecord {
  std::string start_order;    // dash-joined labels, e.g. "Mg-Be"
  std::string final_order;    // empty when the endpoint is off-axis
  std::string final_geometry; // "chain", "diamond", or "off-axis"
  int steps = 0;
  bool asymmetric = false; // aligned/sub_critical meaningful only if set
  bool aligned = false;
  bool sub_critical = false;
  RampTrajectory trajectory;
};
Json reorder_run_to_json(const ReorderRunRecord& run);

// --- tables and CSV matrices --------------------------------------------------------

// Frequencies (MHz, descending) against per-ion mass-weighted eigenvector
// components, one mode per row -- the layout of the reference mode tables.
std::string mode_table_text(const NormalModeSet& modes);
std::string mode_table_csv(const NormalModeSet& modes);

// Columns field_V_per_m, f_mode<b>_MHz per tracked branch; `with_shift`
// appends shift_mode<b>_MHz columns relative to the zero-field grid row
// and requires the grid to contain field 0.
std::string scan_csv(const ModeScanResult& scan, bool with_shift);

// Columns run,step,order,<x,y,z per ion in um>; one block of rows per run.
std::string reorder_csv(const std::vector<ReorderRunRecord>& runs);

// --- schema validation -----------------------------------------------------------------

// Validates against the JSON-Schema subset used by the shipped schemas:
// type, enum, minimum, maximum, minItems, maxItems, required, properties,
// additionalProperties (boolean form), items (single schema), oneOf.
// Returns human-readable problems with JSON-pointer paths; empty = valid.
std::vector<std::string> schema_errors(const Json& document, const Json& schema);

} // namespace ionsim
