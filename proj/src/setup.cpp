#include "biphoton/setup.hpp"

#include <cmath>
#include <sstream>

namespace biphoton {

double coherence_length_from_filter_um(const FilterSpec& filter) {
    if (!(filter.fwhm_nm > 0.0))
        throw std::invalid_argument("coherence_length: filter fwhm must be positive");
    return filter.center_nm * filter.center_nm / filter.fwhm_nm / 1000.0;
}

double coherence_time_from_filter(const FilterSpec& filter) {
    if (!(filter.fwhm_nm > 0.0))
        throw std::invalid_argument("coherence_time: filter fwhm must be positive");
    return filter.center_nm * filter.center_nm / (filter.fwhm_nm * kSpeedOfLightNmPerFs);
}

ModelParams default_model_params(const PumpSpec& pump, const FilterSpec& filter) {
    ModelParams model;
    model.sigma_plus_fs = pump.pulse_fwhm_fs / kFwhmOverSigma;
    model.sigma_minus_fs = coherence_time_from_filter(filter) / kFwhmOverSigma;
    model.normalization = 1.0;
    return model;
}

ExperimentSetup default_setup() {
    ExperimentSetup s;
    s.pump.wavelength_nm = 400.0;
    s.pump.pulse_fwhm_fs = 140.0;
    s.pump.rep_period_fs = 11.0e6;
    s.pump.n_pulses = 2;
    s.pump.inter_pulse_delay_fs = delay_from_length_um(197.0);
    s.pump.extra_phase_path_nm = 0.0;
    s.crystal = CrystalSpec{"type-II", 100000.0};
    s.filter = FilterSpec{800.0, 10.0};
    s.delays.tau_fs = delay_from_length_um(197.0);
    s.delays.tau1_fs = delay_from_length_um(394.0);
    s.analyzers.theta1_rad = deg_to_rad(45.0);
    s.analyzers.theta2_rad = deg_to_rad(45.0);
    s.detectors = DetectorSpec{300000.0, 3.0e6, 0.001, 1.0};
    s.model = default_model_params(s.pump, s.filter);
    return s;
}

namespace {

std::string msg(const char* text, double got, const char* unit) {
    std::ostringstream os;
    os << text << " (got " << got << unit << ")";
    return os.str();
}

}  // namespace

std::vector<std::string> validate(const ExperimentSetup& setup) {
    std::vector<std::string> out;

    const auto& p = setup.pump;
    if (!(p.wavelength_nm > 0.0))
        out.push_back(msg("pump.wavelength must be > 0", p.wavelength_nm, " nm"));
    if (!(p.pulse_fwhm_fs > 0.0))
        out.push_back(msg("pump.pulse_fwhm must be > 0", p.pulse_fwhm_fs, " fs"));
    if (p.n_pulses < 1)
        out.push_back(msg("pump.n_pulses must be >= 1", p.n_pulses, ""));
    if (!std::isfinite(p.inter_pulse_delay_fs))
        out.push_back("pump.inter_pulse_delay must be finite");
    if (!std::isfinite(p.extra_phase_path_nm))
        out.push_back("pump.extra_phase_path must be finite");
    // Frames must not overlap: the whole sub-train plus envelope tails fits
    // inside one repetition period.
    if (p.n_pulses >= 1 && p.pulse_fwhm_fs > 0.0 &&
        !(p.rep_period_fs > p.n_pulses * p.inter_pulse_delay_fs + 10.0 * p.pulse_fwhm_fs))
        out.push_back(msg("pump.rep_period must exceed n_pulses*inter_pulse_delay + 10*pulse_fwhm",
                          p.rep_period_fs, " fs"));

    const auto& f = setup.filter;
    if (!(f.center_nm > 0.0))
        out.push_back(msg("filter.center must be > 0", f.center_nm, " nm"));
    if (!(f.fwhm_nm > 0.0 && f.fwhm_nm < f.center_nm))
        out.push_back(msg("filter.fwhm must lie in (0, center)", f.fwhm_nm, " nm"));

    if (!(setup.crystal.thickness_nm > 0.0))
        out.push_back(msg("crystal.thickness must be > 0", setup.crystal.thickness_nm, " nm"));

    if (!(setup.delays.tau_fs >= 0.0))
        out.push_back(msg("interferometer.tau must be >= 0", setup.delays.tau_fs, " fs"));
    if (!(setup.delays.tau1_fs >= 0.0))
        out.push_back(msg("interferometer.tau1 must be >= 0", setup.delays.tau1_fs, " fs"));

    if (!std::isfinite(setup.analyzers.theta1_rad))
        out.push_back("analyzers.theta1 must be finite");
    if (!std::isfinite(setup.analyzers.theta2_rad))
        out.push_back("analyzers.theta2 must be finite");

    const auto& d = setup.detectors;
    if (!(d.jitter_fs >= 0.0))
        out.push_back(msg("detectors.jitter must be >= 0", d.jitter_fs, " fs"));
    if (!(d.coincidence_window_fs > 0.0))
        out.push_back(msg("detectors.coincidence_window must be > 0",
                          d.coincidence_window_fs, " fs"));
    // Single-pair regime.
    if (!(d.pair_probability >= 0.0 && d.pair_probability <= 0.05))
        out.push_back(msg("detectors.pair_probability must lie in [0, 0.05]",
                          d.pair_probability, ""));
    if (!(d.efficiency > 0.0 && d.efficiency <= 1.0))
        out.push_back(msg("detectors.efficiency must lie in (0, 1]", d.efficiency, ""));

    const auto& m = setup.model;
    if (!(m.sigma_plus_fs > 0.0))
        out.push_back(msg("model.sigma_plus must be > 0", m.sigma_plus_fs, " fs"));
    if (!(m.sigma_minus_fs > 0.0))
        out.push_back(msg("model.sigma_minus must be > 0", m.sigma_minus_fs, " fs"));
    if (!(m.normalization > 0.0))
        out.push_back(msg("model.normalization must be > 0", m.normalization, ""));

    return out;
}

}  // namespace biphoton
