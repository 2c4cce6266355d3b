#pragma once
#include <span>
#include <string>
#include <vector>

#include "biphoton/amplitude.hpp"
#include "biphoton/setup.hpp"

namespace biphoton {

/// Uniform midpoint grid over the (t_plus, t_12) plane.
struct GridSpec {
    double t_plus_min_fs = 0.0;
    double t_plus_max_fs = 0.0;
    double t_12_min_fs = 0.0;
    double t_12_max_fs = 0.0;
    int steps_per_axis = 512;
};

enum class CurveKind { Rate, Visibility, Counts };

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Ordered scan result; x strictly increasing, y constrained by kind.
struct Curve {
    std::string parameter;
    CurveKind kind = CurveKind::Rate;
    std::vector<CurvePoint> points;
};

/// Validates curve invariants (monotone x, y range per kind) and returns it.
Curve make_curve(std::string parameter, CurveKind kind, std::vector<CurvePoint> points);

const char* curve_kind_name(CurveKind kind);
CurveKind curve_kind_from_name(const std::string& name);

enum class ScanParameter { InterPulseDelay, PumpPhasePath, Theta1, Tau, Tau1 };
enum class ReduceMode { Rate, Visibility };

const char* scan_parameter_name(ScanParameter p);

/// Closed-form coincidence rate: normalization times the quadratic form of
/// the term amplitudes over their Gaussian overlap matrix. Exact, no
/// quadrature error; nonnegative because the overlap matrix is a Gram
/// matrix.
double coincidence_rate(std::span<const AmplitudeTerm> terms, const ModelParams& model);

/// Grid covering every term center plus margin_sigmas envelope widths on
/// each side.
GridSpec default_grid(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                      int steps_per_axis = 512, double margin_sigmas = 8.0);

/// Midpoint-rule integration of |sum of terms|^2 over the grid; the
/// independent numerical route against coincidence_rate. Throws when the
/// grid fails to cover some term center +- 6 widths.
double grid_rate_oracle(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                        const GridSpec& grid);

/// Envelope overlap of adjacent-pulse TT/RR pairs:
/// exp(-(tau1/2 - T)^2/(8 sigma_plus^2) - (tau1 - 2 tau)^2/(8 sigma_minus^2)).
double eta(const ExperimentSetup& setup);

/// Closed-form pump-phase fringe R(phi) = mean - amplitude*cos(Omega_p phi + const).
struct FringePrediction {
    double mean = 0.0;
    double amplitude = 0.0;

    double visibility() const { return mean > 0.0 ? amplitude / mean : 0.0; }
};

FringePrediction predicted_fringe(double theta1_rad, double theta2_rad, double eta_value,
                                  int n, int delta_m);

/// Visibility of the pump-phase fringe at 45/45 analyzers: eta*(n - delta_m)/n.
double predicted_spacetime_visibility(double eta_value, int n, int delta_m);

/// Visibility of the analyzer-rotation fringe at theta2 = 45 deg, theta1
/// swept between parallel and crossed settings:
/// (n - delta_m)*eta / (2n - (n - delta_m)*eta).
double predicted_polarization_visibility(double eta_value, int n, int delta_m);

/// Evaluate the rate (or the pump-phase fringe visibility) at `steps`
/// evenly spaced values of one parameter. Points are computed
/// independently, possibly in parallel, and assembled in index order, so
/// the output does not depend on the parallelism degree.
Curve scan(const ExperimentSetup& setup, ScanParameter parameter, double range_min,
           double range_max, int steps, ReduceMode reduce);

/// (max - min)/(max + min) of a rate curve; 0 when the curve is all zero.
double visibility_from_curve(const Curve& curve);

struct FringeFit {
    double mean_level = 0.0;
    double amplitude = 0.0;
    double period = 0.0;
    double phase_offset = 0.0;   ///< rad, in (-pi, pi]
    double visibility = 0.0;     ///< amplitude / mean_level
    double rms_residual = 0.0;
};

/// Thrown when the fringe fit fails to converge; carries the best iterate.
class FitError : public std::runtime_error {
public:
    FitError(std::string message, FringeFit best_iterate)
        : std::runtime_error(std::move(message)), best(best_iterate) {}

    FringeFit best;
};

/// Least-squares fit of y = mean - amplitude*cos(2 pi x / period + phase),
/// Gauss-Newton with a numerically differentiated Jacobian, period
/// initialized at expected_period and refined.
FringeFit fit_fringe(const Curve& curve, double expected_period);

}  // namespace biphoton
