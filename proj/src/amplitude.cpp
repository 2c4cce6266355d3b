#include "biphoton/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biphoton {

std::vector<AmplitudeTerm> build_amplitude_terms(const ExperimentSetup& setup) {
    const auto& pump = setup.pump;
    const double omega = pump.omega();
    const double tau = setup.delays.tau_fs;
    const double tau1 = setup.delays.tau1_fs;
    const double theta1 = setup.analyzers.theta1_rad;
    const double theta2 = setup.analyzers.theta2_rad;
    const double knob_fs = pump.extra_phase_path_nm / kSpeedOfLightNmPerFs;

    const double weight_tt = -std::sin(theta1) * std::cos(theta2);
    const double weight_rr = std::cos(theta1) * std::sin(theta2);

    std::vector<AmplitudeTerm> terms;
    terms.reserve(2 * static_cast<std::size_t>(pump.n_pulses));
    for (int m = 0; m < pump.n_pulses; ++m) {
        const double t0 = m * pump.inter_pulse_delay_fs;
        const double pump_phase = omega * (t0 + m * knob_fs);

        AmplitudeTerm tt;
        tt.weight = weight_tt;
        tt.mu_plus_fs = t0 + 0.5 * (tau1 - tau);
        tt.mu_12_fs = tau1;
        tt.phase_rad = pump_phase + 0.5 * omega * (tau1 + tau);
        tt.pulse_index = m;
        tt.path = Path::TT;
        terms.push_back(tt);

        AmplitudeTerm rr;
        rr.weight = weight_rr;
        rr.mu_plus_fs = t0 - 0.5 * tau;
        rr.mu_12_fs = 2.0 * tau;
        rr.phase_rad = pump_phase + 0.5 * omega * tau;
        rr.pulse_index = m;
        rr.path = Path::RR;
        terms.push_back(rr);
    }
    return terms;
}

double envelope_overlap(const AmplitudeTerm& a, const AmplitudeTerm& b,
                        const ModelParams& model) {
    const double d_plus = a.mu_plus_fs - b.mu_plus_fs;
    const double d_12 = a.mu_12_fs - b.mu_12_fs;
    const double sp = model.sigma_plus_fs;
    const double sm = model.sigma_minus_fs;
    return std::exp(-d_plus * d_plus / (8.0 * sp * sp) - d_12 * d_12 / (8.0 * sm * sm));
}

std::complex<double> overlap(const AmplitudeTerm& a, const AmplitudeTerm& b,
                             const ModelParams& model) {
    return std::polar(envelope_overlap(a, b, model), a.phase_rad - b.phase_rad);
}

double condition_tolerance_fs(const ModelParams& model) {
    // Sub-cycle residuals are meaningless for envelope overlap; the carrier
    // phase is tracked separately.
    return std::max(1.0, model.sigma_plus_fs / 50.0);
}

namespace {

struct BestCrossPair {
    double magnitude = 0.0;
    int separation = 0;
};

BestCrossPair best_cross_pair(std::span<const AmplitudeTerm> terms, const ModelParams& model) {
    BestCrossPair best;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            const auto& a = terms[i];
            const auto& b = terms[j];
            if (a.path == b.path || a.pulse_index == b.pulse_index) continue;
            const double mag = envelope_overlap(a, b, model);
            if (mag > best.magnitude) {
                best.magnitude = mag;
                best.separation = std::abs(a.pulse_index - b.pulse_index);
            }
        }
    }
    return best;
}

}  // namespace

int dominant_pulse_separation(std::span<const AmplitudeTerm> terms, const ModelParams& model) {
    return best_cross_pair(terms, model).separation;
}

ConditionReport interference_condition(const ExperimentSetup& setup) {
    const double tau = setup.delays.tau_fs;
    const double tau1 = setup.delays.tau1_fs;
    const int n = setup.pump.n_pulses;

    ConditionReport report;
    report.residual_T_fs = setup.pump.inter_pulse_delay_fs - tau;
    report.residual_tau1_fs = tau1 - 2.0 * tau;

    const auto terms = build_amplitude_terms(setup);
    const BestCrossPair best = best_cross_pair(terms, setup.model);
    report.max_cross_overlap = best.magnitude;
    report.predicted_spacetime_visibility =
        best.separation > 0 ? best.magnitude * double(n - best.separation) / double(n) : 0.0;

    const double tol = condition_tolerance_fs(setup.model);
    report.satisfied = n >= 2 && std::abs(report.residual_T_fs) <= tol &&
                       std::abs(report.residual_tau1_fs) <= tol;
    return report;
}

double theoretical_visibility(int delta_m, int n) {
    if (delta_m < 1 || delta_m > n)
        throw std::invalid_argument("theoretical_visibility: requires 1 <= delta_m <= n");
    return double(n - delta_m) / double(n);
}

}  // namespace biphoton
