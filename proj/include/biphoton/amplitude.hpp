#pragma once
#include <complex>
#include <span>
#include <vector>

#include "biphoton/setup.hpp"

namespace biphoton {

/// Coincidence-producing beamsplitter routings: both photons transmitted
/// or both reflected. Same-side routings never coincide and are not modeled.
enum class Path { TT, RR };

/// One Feynman-path biphoton wavepacket in the (t_plus, t_12) plane.
///
/// The envelope G(t_plus, t_12) is a unit-L2-norm factorized Gaussian
/// centered at (mu_plus, mu_12) with widths taken from ModelParams; the
/// carrier phase is a constant per term because the common carrier factor
/// cancels in every cross term.
struct AmplitudeTerm {
    std::complex<double> weight;  ///< polarization coefficient, |weight| <= 1
    double mu_plus_fs = 0.0;      ///< envelope center along t_plus
    double mu_12_fs = 0.0;        ///< envelope center along t_12
    double phase_rad = 0.0;       ///< total carrier phase
    int pulse_index = 0;
    Path path = Path::TT;
};

/// Residuals of the matched-delay condition T = tau, tau1 = 2 tau, and
/// the interference it predicts.
struct ConditionReport {
    double residual_T_fs = 0.0;      ///< T - tau
    double residual_tau1_fs = 0.0;   ///< tau1 - 2 tau
    double max_cross_overlap = 0.0;  ///< over opposite-path pairs from different pulses
    double predicted_spacetime_visibility = 0.0;
    bool satisfied = false;
};

/// Amplitude terms for every pulse and both routings, ordered by
/// (pulse_index, TT before RR). 2N terms for an N-pulse frame.
///
/// Pulse m is emitted at t0 = m*T and carries m units of the pump phase
/// knob. The TT routing delays the D1 photon by tau1 and the D2 photon by
/// tau; the RR routing delays the D1 photon by tau only. Each routing's
/// path delays add half the carrier frequency times the summed delay,
/// both photons being at half the pump frequency.
std::vector<AmplitudeTerm> build_amplitude_terms(const ExperimentSetup& setup);

/// Envelope part of the pairwise overlap:
/// exp(-d_plus^2/(8 sigma_plus^2) - d_12^2/(8 sigma_minus^2)), in [0, 1].
double envelope_overlap(const AmplitudeTerm& a, const AmplitudeTerm& b,
                        const ModelParams& model);

/// Full overlap integral of two unit-norm terms including carrier phases:
/// envelope_overlap * exp(i (phase_a - phase_b)). overlap(a, a) == 1.
std::complex<double> overlap(const AmplitudeTerm& a, const AmplitudeTerm& b,
                             const ModelParams& model);

/// Residual tolerance below which delays count as matched.
double condition_tolerance_fs(const ModelParams& model);

/// Pulse-number separation of the cross pair with the largest overlap,
/// 0 when no cross pair exists (N = 1).
int dominant_pulse_separation(std::span<const AmplitudeTerm> terms,
                              const ModelParams& model);

/// Evaluate the matched-delay condition for a setup, including the
/// envelope overlap actually achieved and the space-time fringe
/// visibility it predicts at 45/45 analyzers.
ConditionReport interference_condition(const ExperimentSetup& setup);

/// Fringe visibility (n - delta_m)/n for amplitudes paired across
/// delta_m pulses out of an n-pulse train.
double theoretical_visibility(int delta_m, int n);

}  // namespace biphoton
