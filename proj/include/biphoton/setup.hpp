#pragma once
#include <string>
#include <vector>

#include "biphoton/units.hpp"

namespace biphoton {

/// Pump pulse train: N pulses per repetition frame, spaced by the
/// inter-pulse delay T, with an optional extra phase path applied
/// cumulatively along the train.
struct PumpSpec {
    double wavelength_nm = 400.0;
    double pulse_fwhm_fs = 140.0;        ///< intensity FWHM
    double rep_period_fs = 11.0e6;       ///< lab time between frames
    int n_pulses = 2;                    ///< pulses per frame
    double inter_pulse_delay_fs = 657.0; ///< T
    double extra_phase_path_nm = 0.0;    ///< pump phase knob, as optical path

    double omega() const { return carrier_omega(wavelength_nm); }
    bool operator==(const PumpSpec&) const = default;
};

/// Detection interference filter (identical in front of both detectors).
struct FilterSpec {
    double center_nm = 800.0;
    double fwhm_nm = 10.0;

    bool operator==(const FilterSpec&) const = default;
};

/// Interferometer delays: tau delays idler against signal before the
/// beamsplitter, tau1 delays the transmitted signal output.
struct DelaySpec {
    double tau_fs = 657.0;
    double tau1_fs = 1314.0;

    bool operator==(const DelaySpec&) const = default;
};

struct AnalyzerSpec {
    double theta1_rad = 0.0;
    double theta2_rad = 0.0;

    bool operator==(const AnalyzerSpec&) const = default;
};

/// Downconversion crystal description. Carried as metadata only: the
/// temporal model is filter-dominated and does not use the thickness.
struct CrystalSpec {
    std::string type = "type-II";
    double thickness_nm = 100000.0;

    bool operator==(const CrystalSpec&) const = default;
};

/// Gaussian envelope widths of every biphoton wavepacket term and the
/// arbitrary-units rate scale.
struct ModelParams {
    double sigma_plus_fs = 59.45;   ///< RMS width along t_plus
    double sigma_minus_fs = 90.66;  ///< RMS width along t_12
    double normalization = 1.0;

    bool operator==(const ModelParams&) const = default;
};

/// Detector package model used by the event generator.
struct DetectorSpec {
    double jitter_fs = 300000.0;             ///< Gaussian RMS per click (300 ps)
    double coincidence_window_fs = 3.0e6;    ///< 3 ns
    double pair_probability = 0.001;         ///< per pulse frame
    double efficiency = 1.0;                 ///< per photon

    bool operator==(const DetectorSpec&) const = default;
};

struct ExperimentSetup {
    PumpSpec pump;
    CrystalSpec crystal;
    FilterSpec filter;
    DelaySpec delays;
    AnalyzerSpec analyzers;
    DetectorSpec detectors;
    ModelParams model;

    bool operator==(const ExperimentSetup&) const = default;
};

/// Coherence length l_coh = center^2 / fwhm, in micrometers.
double coherence_length_from_filter_um(const FilterSpec& filter);

/// Coherence time tau_c = center^2 / (fwhm * c), in fs.
double coherence_time_from_filter(const FilterSpec& filter);

/// Envelope widths implied by the pump and filter: sigma_plus follows the
/// pump envelope, sigma_minus the filter coherence time.
ModelParams default_model_params(const PumpSpec& pump, const FilterSpec& filter);

/// The apparatus of record: 400 nm / 140 fs pump split into two pulses
/// 197 um apart, 10 nm filters at 800 nm, tau = 197 um, tau1 = 394 um,
/// both analyzers at 45 degrees.
ExperimentSetup default_setup();

/// Every violated invariant, one message per violation; empty when valid.
std::vector<std::string> validate(const ExperimentSetup& setup);

}  // namespace biphoton
