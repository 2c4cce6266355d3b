#include "biphoton/rate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "biphoton/detail/parallel.hpp"

namespace biphoton {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd term_amplitudes(std::span<const AmplitudeTerm> terms) {
    Eigen::VectorXcd a(static_cast<Eigen::Index>(terms.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a[i] = terms[i].weight * std::polar(1.0, terms[i].phase_rad);
    return a;
}

using detail::parallel_for;

}  // namespace

Curve make_curve(std::string parameter, CurveKind kind, std::vector<CurvePoint> points) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y))
            throw std::invalid_argument("curve: non-finite point");
        if (i > 0 && !(points[i].x > points[i - 1].x))
            throw std::invalid_argument("curve: x values must be strictly increasing");
        if ((kind == CurveKind::Rate || kind == CurveKind::Counts) && points[i].y < 0.0)
            throw std::invalid_argument("curve: rate/count values must be nonnegative");
        if (kind == CurveKind::Visibility && (points[i].y < 0.0 || points[i].y > 1.0))
            throw std::invalid_argument("curve: visibility values must lie in [0, 1]");
    }
    Curve c;
    c.parameter = std::move(parameter);
    c.kind = kind;
    c.points = std::move(points);
    return c;
}

const char* curve_kind_name(CurveKind kind) {
    switch (kind) {
        case CurveKind::Rate: return "RATE";
        case CurveKind::Visibility: return "VISIBILITY";
        case CurveKind::Counts: return "COUNTS";
    }
    return "RATE";
}

CurveKind curve_kind_from_name(const std::string& name) {
    if (name == "RATE") return CurveKind::Rate;
    if (name == "VISIBILITY") return CurveKind::Visibility;
    if (name == "COUNTS") return CurveKind::Counts;
    throw std::invalid_argument("unknown curve kind: " + name);
}

const char* scan_parameter_name(ScanParameter p) {
    switch (p) {
        case ScanParameter::InterPulseDelay: return "inter_pulse_delay";
        case ScanParameter::PumpPhasePath: return "pump_phase_path";
        case ScanParameter::Theta1: return "theta1";
        case ScanParameter::Tau: return "tau";
        case ScanParameter::Tau1: return "tau1";
    }
    return "";
}

double coincidence_rate(std::span<const AmplitudeTerm> terms, const ModelParams& model) {
    if (terms.empty())
        throw std::invalid_argument("coincidence_rate: no amplitude terms");

    const Eigen::VectorXcd a = term_amplitudes(terms);
    double acc = a.squaredNorm();
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            const double env = envelope_overlap(terms[i], terms[j], model);
            acc += 2.0 * env *
                   (a[static_cast<Eigen::Index>(i)] * std::conj(a[static_cast<Eigen::Index>(j)]))
                       .real();
        }
    }
    // Gram positivity can be nicked by rounding when the rate is ~0.
    return model.normalization * std::max(acc, 0.0);
}

GridSpec default_grid(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                      int steps_per_axis, double margin_sigmas) {
    if (terms.empty())
        throw std::invalid_argument("default_grid: no amplitude terms");
    double plus_lo = std::numeric_limits<double>::infinity();
    double plus_hi = -plus_lo;
    double t12_lo = plus_lo;
    double t12_hi = -plus_lo;
    for (const auto& t : terms) {
        plus_lo = std::min(plus_lo, t.mu_plus_fs);
        plus_hi = std::max(plus_hi, t.mu_plus_fs);
        t12_lo = std::min(t12_lo, t.mu_12_fs);
        t12_hi = std::max(t12_hi, t.mu_12_fs);
    }
    GridSpec g;
    g.t_plus_min_fs = plus_lo - margin_sigmas * model.sigma_plus_fs;
    g.t_plus_max_fs = plus_hi + margin_sigmas * model.sigma_plus_fs;
    g.t_12_min_fs = t12_lo - margin_sigmas * model.sigma_minus_fs;
    g.t_12_max_fs = t12_hi + margin_sigmas * model.sigma_minus_fs;
    g.steps_per_axis = steps_per_axis;
    return g;
}

double grid_rate_oracle(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                        const GridSpec& grid) {
    if (terms.empty())
        throw std::invalid_argument("grid_rate_oracle: no amplitude terms");
    if (grid.steps_per_axis < 64)
        throw std::invalid_argument("grid_rate_oracle: steps_per_axis must be >= 64");
    for (const auto& t : terms) {
        const double pad_plus = 6.0 * model.sigma_plus_fs;
        const double pad_12 = 6.0 * model.sigma_minus_fs;
        if (t.mu_plus_fs - pad_plus < grid.t_plus_min_fs ||
            t.mu_plus_fs + pad_plus > grid.t_plus_max_fs ||
            t.mu_12_fs - pad_12 < grid.t_12_min_fs || t.mu_12_fs + pad_12 > grid.t_12_max_fs)
            throw std::runtime_error("grid_rate_oracle: grid does not cover term supports");
    }

    const int n = grid.steps_per_axis;
    const double h_plus = (grid.t_plus_max_fs - grid.t_plus_min_fs) / n;
    const double h_12 = (grid.t_12_max_fs - grid.t_12_min_fs) / n;
    const Eigen::ArrayXd t_plus =
        Eigen::ArrayXd::LinSpaced(n, grid.t_plus_min_fs + 0.5 * h_plus,
                                  grid.t_plus_max_fs - 0.5 * h_plus);
    const Eigen::ArrayXd t_12 = Eigen::ArrayXd::LinSpaced(n, grid.t_12_min_fs + 0.5 * h_12,
                                                          grid.t_12_max_fs - 0.5 * h_12);

    const double sp = model.sigma_plus_fs;
    const double sm = model.sigma_minus_fs;
    const double norm_const = 1.0 / std::sqrt(2.0 * kPi * sp * sm);

    // The amplitude field is a sum of rank-one envelopes, one outer
    // product per term; real and imaginary parts are accumulated
    // separately so everything stays in real arithmetic.
    Eigen::MatrixXd field_re = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd field_im = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd outer(n, n);
    for (const auto& t : terms) {
        const Eigen::VectorXd g_plus =
            (-(t_plus - t.mu_plus_fs).square() / (4.0 * sp * sp)).exp().matrix();
        const Eigen::VectorXd g_12 =
            (-(t_12 - t.mu_12_fs).square() / (4.0 * sm * sm)).exp().matrix();
        const std::complex<double> coeff = t.weight * std::polar(norm_const, t.phase_rad);
        outer.noalias() = g_plus * g_12.transpose();
        field_re.noalias() += coeff.real() * outer;
        field_im.noalias() += coeff.imag() * outer;
    }
    const double mass = (field_re.array().square() + field_im.array().square()).sum();
    return model.normalization * mass * h_plus * h_12;
}

double eta(const ExperimentSetup& setup) {
    if (setup.pump.n_pulses < 2)
        throw std::invalid_argument("eta: requires at least two pump pulses");
    const auto terms = build_amplitude_terms(setup);
    double best = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = 0; j < terms.size(); ++j) {
            if (terms[i].path != Path::TT || terms[j].path != Path::RR) continue;
            if (std::abs(terms[i].pulse_index - terms[j].pulse_index) != 1) continue;
            best = std::max(best, envelope_overlap(terms[i], terms[j], setup.model));
        }
    }
    return best;
}

FringePrediction predicted_fringe(double theta1_rad, double theta2_rad, double eta_value,
                                  int n, int delta_m) {
    if (!(eta_value >= 0.0 && eta_value <= 1.0))
        throw std::invalid_argument("predicted_fringe: eta must lie in [0, 1]");
    if (n < 1 || delta_m < 0 || delta_m > n)
        throw std::invalid_argument("predicted_fringe: pulse counts out of range");
    const double s1 = std::sin(theta1_rad);
    const double c1 = std::cos(theta1_rad);
    const double s2 = std::sin(theta2_rad);
    const double c2 = std::cos(theta2_rad);
    FringePrediction f;
    f.mean = n * (s1 * s1 * c2 * c2 + c1 * c1 * s2 * s2);
    f.amplitude = 2.0 * (n - delta_m) * std::abs(s1 * c2 * c1 * s2) * eta_value;
    return f;
}

double predicted_spacetime_visibility(double eta_value, int n, int delta_m) {
    if (n < 1 || delta_m < 0) return 0.0;
    if (delta_m == 0 || delta_m > n) return 0.0;
    return eta_value * double(n - delta_m) / double(n);
}

double predicted_polarization_visibility(double eta_value, int n, int delta_m) {
    if (n < 1 || delta_m <= 0 || delta_m > n) return 0.0;
    const double q = double(n - delta_m) * eta_value;
    return q / (2.0 * n - q);
}

namespace {

ExperimentSetup with_parameter(ExperimentSetup setup, ScanParameter parameter, double value) {
    switch (parameter) {
        case ScanParameter::InterPulseDelay: setup.pump.inter_pulse_delay_fs = value; break;
        case ScanParameter::PumpPhasePath: setup.pump.extra_phase_path_nm = value; break;
        case ScanParameter::Theta1: setup.analyzers.theta1_rad = value; break;
        case ScanParameter::Tau: setup.delays.tau_fs = value; break;
        case ScanParameter::Tau1: setup.delays.tau1_fs = value; break;
    }
    return setup;
}

/// Fringe visibility at one setup: the pump phase path is swept over two
/// full pump periods with samples aligned to phase zero so matched-delay
/// extremes land exactly on the sample grid.
double phase_sweep_visibility(const ExperimentSetup& setup) {
    constexpr int kSamples = 128;
    const double base = setup.pump.extra_phase_path_nm;
    const double span = 2.0 * setup.pump.wavelength_nm;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int k = 0; k < kSamples; ++k) {
        ExperimentSetup probe = setup;
        probe.pump.extra_phase_path_nm = base + k * span / kSamples;
        const double r = coincidence_rate(build_amplitude_terms(probe), probe.model);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

}  // namespace

Curve scan(const ExperimentSetup& setup, ScanParameter parameter, double range_min,
           double range_max, int steps, ReduceMode reduce) {
    if (steps < 2)
        throw std::invalid_argument("scan: steps must be >= 2");
    if (!std::isfinite(range_min) || !std::isfinite(range_max) || !(range_max > range_min))
        throw std::invalid_argument("scan: degenerate range");

    std::vector<CurvePoint> points(static_cast<std::size_t>(steps));
    const double dx = (range_max - range_min) / (steps - 1);
    parallel_for(steps, [&](int i) {
        const double x = range_min + i * dx;
        const ExperimentSetup probe = with_parameter(setup, parameter, x);
        double y = 0.0;
        if (reduce == ReduceMode::Rate)
            y = coincidence_rate(build_amplitude_terms(probe), probe.model);
        else
            y = phase_sweep_visibility(probe);
        points[static_cast<std::size_t>(i)] = {x, y};
    });

    return make_curve(scan_parameter_name(parameter),
                      reduce == ReduceMode::Rate ? CurveKind::Rate : CurveKind::Visibility,
                      std::move(points));
}

double visibility_from_curve(const Curve& curve) {
    if (curve.points.empty())
        throw std::invalid_argument("visibility_from_curve: empty curve");
    if (curve.kind != CurveKind::Rate)
        throw std::invalid_argument("visibility_from_curve: requires a rate curve");
    if (curve.points.size() < 3)
        throw std::invalid_argument("visibility_from_curve: needs at least 3 points");
    double lo = curve.points.front().y;
    double hi = lo;
    for (const auto& p : curve.points) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
    }
    return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

namespace {

Eigen::VectorXd fringe_residuals(const Curve& curve, const Eigen::Vector4d& beta) {
    const auto n = static_cast<Eigen::Index>(curve.points.size());
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = curve.points[static_cast<std::size_t>(i)];
        const double model = beta[0] - beta[1] * std::cos(2.0 * kPi * p.x / beta[2] + beta[3]);
        r[i] = p.y - model;
    }
    return r;
}

FringeFit fit_from_beta(const Eigen::Vector4d& beta, double rms) {
    FringeFit fit;
    fit.mean_level = beta[0];
    fit.amplitude = beta[1];
    fit.period = std::abs(beta[2]);
    fit.phase_offset = beta[3];
    if (fit.amplitude < 0.0) {
        fit.amplitude = -fit.amplitude;
        fit.phase_offset += kPi;
    }
    fit.phase_offset = std::remainder(fit.phase_offset, 2.0 * kPi);
    if (fit.phase_offset <= -kPi) fit.phase_offset += 2.0 * kPi;
    fit.visibility = fit.mean_level > 0.0 ? fit.amplitude / fit.mean_level : 0.0;
    fit.rms_residual = rms;
    return fit;
}

}  // namespace

FringeFit fit_fringe(const Curve& curve, double expected_period) {
    const auto n = static_cast<Eigen::Index>(curve.points.size());
    if (n < 4)
        throw std::invalid_argument("fit_fringe: needs at least 4 points");
    if (!(expected_period > 0.0) || !std::isfinite(expected_period))
        throw std::invalid_argument("fit_fringe: expected_period must be positive");
    const double span = curve.points.back().x - curve.points.front().x;
    const double periods = std::max(span / expected_period, 1.0);
    if (double(n) / periods < 8.0)
        throw std::invalid_argument("fit_fringe: needs >= 8 points per expected period");

    // Linear least squares in {1, cos(w x), sin(w x)} at the expected period
    // seeds mean, amplitude and phase.
    const double w0 = 2.0 * kPi / expected_period;
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = curve.points[static_cast<std::size_t>(i)];
        basis(i, 0) = 1.0;
        basis(i, 1) = std::cos(w0 * p.x);
        basis(i, 2) = std::sin(w0 * p.x);
        y[i] = p.y;
    }
    const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(y);
    // y = mean - A cos(w x + phi) = mean - A cos(phi) cos - ... maps to
    // lin = (mean, -A cos(phi), A sin(phi)).
    Eigen::Vector4d beta;
    beta[0] = lin[0];
    beta[1] = std::hypot(lin[1], lin[2]);
    beta[2] = expected_period;
    beta[3] = std::atan2(lin[2], -lin[1]);
    if (beta[1] < 1e-30) beta[1] = 1e-30;  // keep the Jacobian nondegenerate

    Eigen::VectorXd r = fringe_residuals(curve, beta);
    double sse = r.squaredNorm();

    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::MatrixXd jac(n, 4);
        for (int p = 0; p < 4; ++p) {
            Eigen::Vector4d probe = beta;
            const double step = std::max(std::abs(beta[p]), 1e-6) * 1e-6;
            probe[p] += step;
            jac.col(p) = (fringe_residuals(curve, probe) - r) / step;
        }
        // r(beta + d) ~ r + J d; minimize => (J^T J) d = -J^T r
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d jtr = jac.transpose() * r;
        Eigen::Vector4d delta = jtj.ldlt().solve(-jtr);
        if (!delta.allFinite()) break;

        double scale = 1.0;
        Eigen::Vector4d next = beta + delta;
        Eigen::VectorXd next_r = fringe_residuals(curve, next);
        double next_sse = next_r.squaredNorm();
        while (next_sse > sse && scale > 1e-6) {
            scale *= 0.5;
            next = beta + scale * delta;
            next_r = fringe_residuals(curve, next);
            next_sse = next_r.squaredNorm();
        }
        if (next_sse > sse) {  // no descent direction left
            converged = true;
            break;
        }
        const double improvement = sse - next_sse;
        beta = next;
        r = std::move(next_r);
        sse = next_sse;
        if ((scale * delta).cwiseAbs().maxCoeff() <=
                1e-12 * std::max(1.0, beta.cwiseAbs().maxCoeff()) ||
            improvement <= 1e-16 * std::max(sse, 1e-300)) {
            converged = true;
            break;
        }
    }

    const double rms = std::sqrt(sse / double(n));
    const FringeFit fit = fit_from_beta(beta, rms);
    if (!converged)
        throw FitError("fit_fringe: no convergence after 200 iterations", fit);
    return fit;
}

}  // namespace biphoton
