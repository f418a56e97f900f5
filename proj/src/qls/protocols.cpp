#include "ionsim/qls/protocols.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/random.hpp"

namespace ionsim {

namespace {

constexpr std::complex<double> kImag{0.0, 1.0};

// Folds the logic ion's population into its lowest level (optical pumping).
void pump_to_lowest(VecXc& internal, const JointState& shape) {
  const long stride = shape.ion_stride(shape.logic_ion);
  for (long i = 0; i < internal.size(); ++i) {
    const int level = shape.level_of(i, shape.logic_ion);
    if (level != 0 && internal[i] != 0.0) {
      internal[i - level * stride] += internal[i];
      internal[i] = 0.0;
    }
  }
}

} // namespace

JointState spontaneous_decay(const JointState& state, int ion,
                             const DecayChannel& channel, double elapsed_s,
                             std::mt19937_64& rng) {
  if (ion < 0 || ion >= static_cast<int>(state.ions.size()))
    throw std::out_of_range("ion index out of range");
  if (!(channel.lifetime_s > 0.0))
    throw std::invalid_argument("decay channel needs a positive lifetime");
  if (!(elapsed_s >= 0.0))
    throw std::invalid_argument("elapsed time must be non-negative");
  const int upper = state.ions[ion].level_index(channel.upper);
  const int lower = state.ions[ion].level_index(channel.lower);

  const double p = 1.0 - std::exp(-elapsed_s / channel.lifetime_s);
  if (!sample_bernoulli(p, rng))
    return state;
  if (state.level_population(ion, upper) <= 0.0)
    return state; // nothing in the upper level; no photon to emit

  JointState result = state;
  const long fock = state.n_max + 1;
  const long shift = (lower - upper) * state.ion_stride(ion);
  for (long i = 0; i < state.internal_dim(); ++i) {
    if (state.level_of(i, ion) != upper)
      continue;
    result.amplitudes.segment((i + shift) * fock, fock) =
        state.amplitudes.segment(i * fock, fock);
    result.amplitudes.segment(i * fock, fock).setZero();
  }
  result.renormalize();
  return result;
}

double nbar_from_ground_fraction(double p0) {
  if (!(p0 > 0.0) || p0 > 1.0)
    throw std::invalid_argument("ground-state fraction must lie in (0, 1]");
  return (1.0 - p0) / p0;
}

JointState cool_to_ground(const JointState& state, double nbar,
                          std::mt19937_64& rng) {
  if (!(nbar >= 0.0))
    throw std::invalid_argument("cool_to_ground: nbar must be non-negative");
  const long fock = state.n_max + 1;

  // The cooling light continuously scatters off the motion: project the
  // register onto a Fock level sampled from the current populations.
  VecX pops(fock);
  for (int n = 0; n <= state.n_max; ++n)
    pops[n] = state.fock_population(n);
  const double u = uniform01(rng) * pops.sum();
  int measured = state.n_max;
  double cumulative = 0.0;
  for (int n = 0; n <= state.n_max; ++n) {
    cumulative += pops[n];
    if (u < cumulative) {
      measured = n;
      break;
    }
  }

  VecXc internal(state.internal_dim());
  for (long i = 0; i < internal.size(); ++i)
    internal[i] = state.amplitudes[i * fock + measured];
  pump_to_lowest(internal, state);
  const double nrm = internal.norm();
  if (!(nrm > 0.0))
    throw std::runtime_error("cool_to_ground: state vanished under pumping");
  internal /= nrm;

  const int fresh = sample_thermal(nbar, rng);
  if (fresh > state.n_max) {
    std::ostringstream msg;
    msg << "thermal sample n = " << fresh
        << " does not fit the register; increase n_max (currently "
        << state.n_max << ")";
    throw TruncationError(msg.str());
  }

  JointState result = state;
  result.amplitudes.setZero();
  for (long i = 0; i < internal.size(); ++i)
    result.amplitudes[i * fock + fresh] = internal[i];
  return result;
}

JointState dipole_force_displacement(const JointState& state, int ion,
                                     const std::vector<double>& level_amp_J,
                                     double eta, double detuning_rad_s,
                                     double duration_s) {
  if (ion < 0 || ion >= static_cast<int>(state.ions.size()))
    throw std::out_of_range("ion index out of range");
  const int levels = state.ions[ion].size();
  if (static_cast<int>(level_amp_J.size()) != levels)
    throw std::invalid_argument(
        "dipole force needs one potential amplitude per internal level");
  if (!(eta > 0.0))
    throw std::invalid_argument("dipole force requires a positive Lamb-Dicke "
                                "factor");
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
    throw std::invalid_argument("duration must be finite and non-negative");
  if (!std::isfinite(detuning_rad_s))
    throw std::invalid_argument("detuning must be finite");
  state.check_truncation();

  std::vector<std::complex<double>> alpha(levels);
  double alpha_max = 0.0;
  for (int l = 0; l < levels; ++l) {
    const double g = level_amp_J[l] * eta / (2.0 * constants::hbar);
    if (detuning_rad_s == 0.0)
      alpha[l] = -kImag * g * duration_s;
    else
      alpha[l] = g / detuning_rad_s *
                 (1.0 - std::exp(kImag * detuning_rad_s * duration_s));
    alpha_max = std::max(alpha_max, std::abs(alpha[l]));
  }

  const double needed =
      alpha_max * alpha_max + 6.0 * std::sqrt(alpha_max * alpha_max + 1.0);
  if (state.n_max < needed) {
    std::ostringstream msg;
    msg << "displacement |alpha| = " << alpha_max << " needs n_max >= "
        << needed << " (currently " << state.n_max << ")";
    throw TruncationError(msg.str());
  }

  JointState result = state;
  const long fock = state.n_max + 1;
  for (int l = 0; l < levels; ++l) {
    if (alpha[l] == 0.0)
      continue;
    const MatXc d = displacement_operator(alpha[l], state.n_max);
    for (long i = 0; i < state.internal_dim(); ++i)
      if (state.level_of(i, ion) == l)
        result.amplitudes.segment(i * fock, fock) =
            d * result.amplitudes.segment(i * fock, fock);
  }
  result.check_norm();
  result.renormalize();
  result.check_truncation();
  return result;
}

SchmidtResult run_schmidt_readout(const std::string& true_state,
                                  const SchmidtImperfections& imperfections,
                                  const DetectionModel& detection,
                                  std::mt19937_64& rng) {
  if (true_state != "g" && true_state != "e")
    throw std::invalid_argument(
        "spectroscopy-ion state must be 'g' or 'e'");
  if (!(imperfections.nbar_init >= 0.0))
    throw std::invalid_argument("nbar_init must be non-negative");

  JointState state = JointState::ground(
      {InternalLevelSet("spectroscopy", {"g", "e"}),
       InternalLevelSet("logic", {"down", "up"})},
      10, 1);
  if (true_state == "e") {
    state.amplitudes.setZero();
    state.amplitudes[state.basis_index({1, 0}, 0)] = 1.0;
  }
  state = cool_to_ground(state, imperfections.nbar_init, rng);

  const double theta =
      constants::pi * (1.0 + imperfections.angle_error);
  Pulse spectroscopy;
  spectroscopy.kind = PulseKind::red_sideband;
  spectroscopy.targets = {0};
  spectroscopy.theta = theta;
  spectroscopy.eta = {0.1};
  spectroscopy.lower = "g";
  spectroscopy.upper = "e";
  state = apply_pulse(state, spectroscopy);

  Pulse logic;
  logic.kind = PulseKind::red_sideband;
  logic.targets = {1};
  logic.theta = theta;
  logic.eta = {0.1};
  logic.lower = "down";
  logic.upper = "up";
  state = apply_pulse(state, logic);

  const DetectionOutcome out = detect(state, detection, rng);

  SchmidtResult result;
  result.inferred = out.level == 1 ? "e" : "g";
  result.record.counts = {out.count};
  result.record.posteriors = {
      bayes_update(VecX::Constant(2, 0.5), out.count, detection)};
  result.record.state_trace = {true_state};
  result.record.decision = result.inferred;
  result.record.rounds = 1;
  result.final_state = out.state;
  return result;
}

ReadoutRecord run_qnd_readout(const std::string& true_state,
                              const QndModel& model, std::mt19937_64& rng) {
  if (!(model.p_des > 0.5) || !(model.p_des < 1.0))
    throw std::invalid_argument("p_des must lie in (0.5, 1)");
  if (model.max_rounds < 1)
    throw std::invalid_argument("max_rounds must be at least 1");
  if (!(model.mapping_fidelity >= 0.0) || model.mapping_fidelity > 1.0)
    throw std::invalid_argument("mapping fidelity must lie in [0, 1]");
  if (!(model.upper_lifetime_s > 0.0))
    throw std::invalid_argument("upper-state lifetime must be positive");
  if (!(model.round_duration_s >= 0.0))
    throw std::invalid_argument("round duration must be non-negative");
  model.detection.validate(2);

  const std::string labels[2] = {model.bright_state, model.dark_state};
  int truth;
  if (true_state == labels[0])
    truth = 0;
  else if (true_state == labels[1])
    truth = 1;
  else
    throw std::invalid_argument("true state '" + true_state +
                                "' is not a readout candidate");

  const double f = model.mapping_fidelity;
  const double decay_p =
      std::min(1.0, model.round_duration_s / model.upper_lifetime_s);
  VecX prior = VecX::Constant(2, 0.5);
  ReadoutRecord record;
  for (int round = 0; round < model.max_rounds; ++round) {
    record.state_trace.push_back(labels[truth]);

    const int mapped = sample_bernoulli(f, rng) ? truth : 1 - truth;
    const int count =
        sample_poisson(model.detection.mean_counts[mapped], rng);

    // The observer's likelihood mirrors the imperfect mapping: a
    // two-component Poisson mixture per candidate.
    VecX likelihood(2);
    for (int i = 0; i < 2; ++i)
      likelihood[i] =
          f * poisson_pmf(count, model.detection.mean_counts[i]) +
          (1.0 - f) * poisson_pmf(count, model.detection.mean_counts[1 - i]);
    VecX posterior = prior.cwiseProduct(likelihood);
    const double total = posterior.sum();
    if (!(total > 0.0))
      throw std::domain_error(
          "every candidate assigns zero likelihood to the observed count");
    posterior /= total;

    record.counts.push_back(count);
    record.posteriors.push_back(posterior);
    record.rounds = round + 1;
    prior = posterior;

    Eigen::Index best;
    if (posterior.maxCoeff(&best) >= model.p_des) {
      record.decision = labels[best];
      return record;
    }
    if (truth == 1 && sample_bernoulli(decay_p, rng))
      truth = 0; // the metastable candidate decayed between rounds
  }
  record.timed_out = true;
  Eigen::Index best;
  prior.maxCoeff(&best);
  record.decision = labels[best];
  return record;
}

DickeResult run_dicke_preparation(const DickeOptions& options,
                                  std::mt19937_64& rng) {
  if (!(options.eta > 0.0))
    throw std::invalid_argument("Lamb-Dicke factor must be positive");
  if (!(options.eta_imbalance > -1.0))
    throw std::invalid_argument("eta imbalance must exceed -1");
  if (!(options.intensity_noise_rms >= 0.0))
    throw std::invalid_argument("intensity noise must be non-negative");
  if (!(options.nbar_init >= 0.0))
    throw std::invalid_argument("nbar_init must be non-negative");

  JointState state = JointState::ground(
      {InternalLevelSet("spectroscopy", {"g", "e"}),
       InternalLevelSet("logic_a", {"down", "up"}),
       InternalLevelSet("logic_b", {"down", "up"})},
      options.n_max, 1);
  state = cool_to_ground(state, options.nbar_init, rng);

  const auto jitter = [&rng, &options] {
    return options.intensity_noise_rms > 0.0
               ? 1.0 + options.intensity_noise_rms * sample_normal(rng)
               : 1.0;
  };

  Pulse add_quantum;
  add_quantum.kind = PulseKind::blue_sideband;
  add_quantum.targets = {0};
  add_quantum.theta = constants::pi * jitter();
  add_quantum.eta = {options.eta};
  add_quantum.lower = "g";
  add_quantum.upper = "e";
  state = apply_pulse(state, add_quantum);

  Pulse transfer;
  transfer.kind = PulseKind::red_sideband;
  transfer.targets = {1, 2};
  transfer.theta = constants::pi / std::sqrt(2.0) * jitter();
  transfer.eta = {options.eta,
                  options.eta * (1.0 + options.eta_imbalance)};
  transfer.lower = "down";
  transfer.upper = "up";
  state = apply_pulse(state, transfer);

  DickeResult result;
  VecXc target = VecXc::Zero(state.dim());
  target[state.basis_index({1, 1, 0}, 0)] = 1.0 / std::sqrt(2.0);
  target[state.basis_index({1, 0, 1}, 0)] = 1.0 / std::sqrt(2.0);
  result.fidelity = std::norm(target.dot(state.amplitudes));
  result.state = std::move(state);
  if (options.eta_imbalance != 0.0)
    result.warnings.push_back(
        "unequal Lamb-Dicke factors across the transfer pair reduce the "
        "Dicke fidelity");
  return result;
}

VecX run_pumping_ladder(int steps, double pulse_angle_error,
                        std::mt19937_64& rng) {
  if (steps < 1)
    throw std::invalid_argument("pumping ladder needs at least one step");

  std::vector<std::string> levels;
  for (int k = 0; k <= steps; ++k)
    levels.push_back("m" + std::to_string(k));
  for (int k = 0; k < steps; ++k)
    levels.push_back("a" + std::to_string(k));

  JointState state = JointState::ground(
      {InternalLevelSet("ladder", std::move(levels)),
       InternalLevelSet("coolant", {"down", "up"})},
      10, 1);

  const double theta = constants::pi * (1.0 + pulse_angle_error);
  for (int k = 0; k < steps; ++k) {
    Pulse carrier;
    carrier.kind = PulseKind::carrier;
    carrier.targets = {0};
    carrier.theta = theta;
    carrier.lower = "m" + std::to_string(k);
    carrier.upper = "a" + std::to_string(k);
    state = apply_pulse(state, carrier);

    Pulse sideband;
    sideband.kind = PulseKind::blue_sideband;
    sideband.targets = {0};
    sideband.theta = theta;
    sideband.eta = {0.1};
    sideband.lower = "a" + std::to_string(k);
    sideband.upper = "m" + std::to_string(k + 1);
    state = apply_pulse(state, sideband);

    state = cool_to_ground(state, 0.0, rng);
  }

  VecX populations(2 * steps + 1);
  for (int l = 0; l < 2 * steps + 1; ++l)
    populations[l] = state.level_population(0, l);
  return populations;
}

VecX comb_raman_frequencies(double omega_rep, double omega_shift,
                            int delta_n_max) {
  if (!(omega_rep > 0.0))
    throw std::invalid_argument("repetition rate must be positive");
  if (delta_n_max < 0)
    throw std::invalid_argument("delta_n_max must be non-negative");
  VecX out(delta_n_max + 1);
  for (int dn = 0; dn <= delta_n_max; ++dn)
    out[dn] = dn * omega_rep + omega_shift;
  return out;
}

} // namespace ionsim
