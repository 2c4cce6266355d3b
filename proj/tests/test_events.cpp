#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "biphoton/amplitude.hpp"
#include "biphoton/events.hpp"
#include "biphoton/rate.hpp"
#include "biphoton/rng.hpp"
#include "biphoton/setup.hpp"

using namespace biphoton;

namespace {

ExperimentSetup matched_setup() {
    ExperimentSetup s = default_setup();
    const double t = delay_from_length_um(197.0);
    s.pump.inter_pulse_delay_fs = t;
    s.delays.tau_fs = t;
    s.delays.tau1_fs = 2.0 * t;
    return s;
}

/// Two-sided Kolmogorov-Smirnov p-value (asymptotic, Stephens correction).
double ks_p_value(std::vector<double> samples, double mean, double stddev) {
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double z = (samples[i] - mean) / (stddev * std::numbers::sqrt2);
        const double cdf = 0.5 * std::erfc(-z);
        d = std::max(d, std::abs(cdf - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - cdf));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("single-term samples follow the term's Gaussian") {
    ExperimentSetup s = default_setup();
    s.pump.n_pulses = 1;
    s.analyzers.theta1_rad = 0.0;
    s.analyzers.theta2_rad = std::numbers::pi / 2.0;  // only the RR term survives
    const auto terms = build_amplitude_terms(s);
    const double tau = s.delays.tau_fs;

    Rng rng(42);
    std::vector<double> t_plus;
    std::vector<double> t_12;
    for (int i = 0; i < 10000; ++i) {
        const auto [t1, t2] = sample_pair_times(terms, s.model, tau, rng);
        t_plus.push_back(t_plus_from_times(t1, t2, tau));
        t_12.push_back(t_12_from_times(t1, t2, tau));
    }
    CHECK(ks_p_value(std::move(t_plus), terms[1].mu_plus_fs, s.model.sigma_plus_fs) > 0.01);
    CHECK(ks_p_value(std::move(t_12), terms[1].mu_12_fs, s.model.sigma_minus_fs) > 0.01);
}

TEST_CASE("sample_pair_times rejects zero total weight") {
    ExperimentSetup s = default_setup();
    s.analyzers.theta1_rad = 0.0;
    s.analyzers.theta2_rad = 0.0;
    const auto terms = build_amplitude_terms(s);
    Rng rng(1);
    CHECK_THROWS_AS(sample_pair_times(terms, s.model, s.delays.tau_fs, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_pair_times({}, s.model, s.delays.tau_fs, rng), std::invalid_argument);
}

TEST_CASE("rejection acceptance averages at least 1/n over the fringe") {
    const ExperimentSetup base = matched_setup();
    const auto probe_terms = build_amplitude_terms(base);
    const double n_terms = double(probe_terms.size());
    ModelParams unit = base.model;
    unit.normalization = 1.0;

    double mean_acceptance = 0.0;
    const int n_phases = 16;
    for (int k = 0; k < n_phases; ++k) {
        ExperimentSetup s = base;
        s.pump.extra_phase_path_nm = k * s.pump.wavelength_nm / n_phases;
        const auto terms = build_amplitude_terms(s);
        double w = 0.0;
        for (const auto& t : terms) w += std::norm(t.weight);
        // acceptance = integral of the density / (n * sum of |w|^2)
        mean_acceptance += coincidence_rate(terms, unit) / (n_terms * w) / n_phases;
    }
    CHECK(mean_acceptance >= 1.0 / n_terms - 1e-9);
}

TEST_CASE("outcome probabilities form a distribution and marginals stay flat") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        ExperimentSetup s = matched_setup();
        s.analyzers.theta1_rad = rng.uniform() * std::numbers::pi;
        s.analyzers.theta2_rad = rng.uniform() * std::numbers::pi;
        s.pump.extra_phase_path_nm = rng.uniform() * 400.0;
        const auto model = detail::OutcomeModel::build(s);
        double total = 0.0;
        for (double p : model.probability) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(total == doctest::Approx(1.0));
        // D1 sees pass/pass + pass/block; the which-path polarization in the
        // other arm kills the interference in the marginal.
        CHECK(model.probability[0] + model.probability[1] == doctest::Approx(0.5).epsilon(1e-4));
        CHECK(model.probability[0] + model.probability[2] == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("generated pair count obeys the Poisson budget") {
    ExperimentSetup s = matched_setup();
    s.detectors.jitter_fs = 0.0;
    s.detectors.efficiency = 1.0;
    s.pump.extra_phase_path_nm = 100.0;  // quarter period: rate equals the mean
    const auto events = generate_events(s, 10000, 7);
    // Pair candidates appear at pair_probability; half the candidates land
    // in each single-detector outcome, so click totals track 10 frames of
    // pairs at p = 1e-3.
    const double expected_pairs = 10000 * s.detectors.pair_probability;
    std::int64_t d1 = 0;
    std::int64_t d2 = 0;
    for (const auto& e : events) (e.detector == Detector::D1 ? d1 : d2) += 1;
    CHECK(std::abs(double(d1) - expected_pairs / 2.0) <= 4.0 * std::sqrt(expected_pairs));
    CHECK(std::abs(double(d2) - expected_pairs / 2.0) <= 4.0 * std::sqrt(expected_pairs));
}

TEST_CASE("zero pair probability gives an empty stream") {
    ExperimentSetup s = matched_setup();
    s.detectors.pair_probability = 0.0;
    CHECK(generate_events(s, 5000, 3).empty());
    CHECK_THROWS_AS(generate_events(s, 0, 3), std::invalid_argument);
}

TEST_CASE("timestamps stay inside their frame's support window") {
    ExperimentSetup s = matched_setup();
    s.detectors.pair_probability = 0.05;
    const double jitter = s.detectors.jitter_fs;
    const auto events = generate_events(s, 2000, 11);
    REQUIRE(!events.empty());
    const double span = 5.0 * (s.model.sigma_plus_fs + s.model.sigma_minus_fs);
    for (const auto& e : events) {
        const double local_fs = e.timestamp_ps * 1000.0 - double(e.frame_index) * s.pump.rep_period_fs;
        CHECK(local_fs >= -span - 6.0 * jitter);
        CHECK(local_fs <= s.pump.inter_pulse_delay_fs + s.delays.tau1_fs + span + 6.0 * jitter);
    }
}

TEST_CASE("seeded generation is reproducible and seed-sensitive") {
    const ExperimentSetup s = matched_setup();
    const auto a = generate_events(s, 20000, 123);
    const auto b = generate_events(s, 20000, 123);
    CHECK(write_events_csv(a) == write_events_csv(b));
    const auto c = generate_events(s, 20000, 124);
    CHECK(write_events_csv(a) != write_events_csv(c));
}

TEST_CASE("destructive pump phase suppresses the coincidence output 3:1") {
    ExperimentSetup destructive = matched_setup();
    destructive.detectors.pair_probability = 0.02;
    destructive.detectors.jitter_fs = 0.0;
    ExperimentSetup constructive = destructive;
    constructive.pump.extra_phase_path_nm = 200.0;  // half the pump wavelength

    const std::int64_t frames = 400000;
    const auto ev_d = generate_events(destructive, frames, 2718);
    const auto ev_c = generate_events(constructive, frames, 2718);
    const double window_ps = destructive.detectors.coincidence_window_fs / 1000.0;
    const auto sum_d = count_coincidences(ev_d, window_ps, 32, frames);
    const auto sum_c = count_coincidences(ev_c, window_ps, 32, frames);

    // Analytic rates 0.5 and 1.5 in units where sum|w|^2 = 1, out of a
    // four-outcome total of 2N = 4.
    const double expect_d = double(frames) * 0.02 * 0.5 / 4.0;
    const double expect_c = double(frames) * 0.02 * 1.5 / 4.0;
    CHECK(std::abs(double(sum_d.coincidences) - expect_d) <= 3.0 * std::sqrt(expect_d));
    CHECK(std::abs(double(sum_c.coincidences) - expect_c) <= 3.0 * std::sqrt(expect_c));

    // The joint density at the overlapping-pair center empties out at the
    // destructive phase.
    const double tau = destructive.delays.tau_fs;
    auto center_box_count = [tau](const std::vector<EventRecord>& events,
                                  const ExperimentSetup& setup) {
        // reconstruct frame-local detection times from adjacent records
        std::int64_t inside = 0;
        for (std::size_t i = 0; i + 1 < events.size(); ++i) {
            if (events[i].frame_index != events[i + 1].frame_index) continue;
            const auto& e1 = events[i].detector == Detector::D1 ? events[i] : events[i + 1];
            const auto& e2 = events[i].detector == Detector::D1 ? events[i + 1] : events[i];
            if (e1.detector != Detector::D1 || e2.detector != Detector::D2) continue;
            const double rep = setup.pump.rep_period_fs;
            const double t1 = e1.timestamp_ps * 1000.0 - double(e1.frame_index) * rep;
            const double t2 = e2.timestamp_ps * 1000.0 - double(e2.frame_index) * rep;
            const double tp = t_plus_from_times(t1, t2, tau);
            const double t12 = t_12_from_times(t1, t2, tau);
            if (std::abs(tp - tau / 2.0) < 0.5 * setup.model.sigma_plus_fs &&
                std::abs(t12 - 2.0 * tau) < 0.5 * setup.model.sigma_minus_fs)
                ++inside;
        }
        return inside;
    };
    const auto box_d = center_box_count(ev_d, destructive);
    const auto box_c = center_box_count(ev_c, constructive);
    CHECK(box_c > 50);
    CHECK(double(box_d) < 0.05 * double(box_c));
}

TEST_CASE("coincidence windowing") {
    SUBCASE("clicks 11 ns apart never coincide under a 3 ns window") {
        std::vector<EventRecord> events{{0, Detector::D1, 1000.0}, {1, Detector::D2, 12000.0}};
        const auto summary = count_coincidences(events, 3000.0, 16, 2);
        CHECK(summary.coincidences == 0);
        CHECK(summary.singles_d1 == 1);
        CHECK(summary.singles_d2 == 1);
    }
    SUBCASE("clicks 1 ps apart coincide") {
        std::vector<EventRecord> events{{0, Detector::D1, 1000.0}, {0, Detector::D2, 1001.0}};
        const auto summary = count_coincidences(events, 3000.0, 16, 1);
        CHECK(summary.coincidences == 1);
        REQUIRE(summary.dt_histogram.size() == 16);
        std::int64_t histogram_total = 0;
        for (const auto& [center, count] : summary.dt_histogram) histogram_total += count;
        CHECK(histogram_total == 1);
    }
    SUBCASE("each click pairs at most once, earliest first") {
        std::vector<EventRecord> events{{0, Detector::D1, 0.0},
                                        {0, Detector::D1, 10.0},
                                        {0, Detector::D2, 20.0},
                                        {0, Detector::D2, 2000.0}};
        const auto summary = count_coincidences(events, 100.0, 8, 1);
        CHECK(summary.coincidences == 1);  // earliest D1 takes the D2 click
    }
    SUBCASE("unsorted stream is rejected") {
        std::vector<EventRecord> events{{0, Detector::D1, 2000.0}, {0, Detector::D2, 1000.0}};
        CHECK_THROWS_AS(count_coincidences(events, 3000.0, 16, 1), std::invalid_argument);
        sort_events(events);
        CHECK_NOTHROW(count_coincidences(events, 3000.0, 16, 1));
    }
    SUBCASE("widening the window never loses coincidences") {
        const ExperimentSetup s = matched_setup();
        const auto events = generate_events(s, 50000, 5);
        std::int64_t last = 0;
        for (double window_ns : {0.1, 0.5, 1.0, 3.0, 6.0}) {
            const auto summary = count_coincidences(events, window_ns * 1000.0, 8, 50000);
            CHECK(summary.coincidences >= last);
            last = summary.coincidences;
        }
    }
}

TEST_CASE("coincidences never exceed either singles count") {
    const ExperimentSetup s = matched_setup();
    const auto events = generate_events(s, 100000, 17);
    const auto summary =
        count_coincidences(events, s.detectors.coincidence_window_fs / 1000.0, 64, 100000);
    CHECK(summary.coincidences <= std::min(summary.singles_d1, summary.singles_d2));
    std::int64_t histogram_total = 0;
    for (const auto& [center, count] : summary.dt_histogram) histogram_total += count;
    CHECK(histogram_total == summary.coincidences);
}

TEST_CASE("singles rates") {
    SUBCASE("full efficiency gives half the pair probability per detector") {
        ExperimentSetup s = matched_setup();
        s.detectors.pair_probability = 0.02;
        const std::int64_t frames = 500000;
        const auto events = generate_events(s, frames, 29);
        const auto summary =
            count_coincidences(events, s.detectors.coincidence_window_fs / 1000.0, 16, frames);
        const auto [r1, r2] = singles_rates(summary);
        const double expected = s.detectors.pair_probability / 2.0;
        const double sigma = std::sqrt(expected / double(frames));
        CHECK(std::abs(r1 - expected) < 3.0 * sigma);
        CHECK(std::abs(r2 - expected) < 3.0 * sigma);
    }
    SUBCASE("halving the efficiency halves the singles") {
        ExperimentSetup s = matched_setup();
        s.detectors.pair_probability = 0.02;
        s.detectors.efficiency = 0.5;
        const std::int64_t frames = 500000;
        const auto events = generate_events(s, frames, 31);
        const auto summary =
            count_coincidences(events, s.detectors.coincidence_window_fs / 1000.0, 16, frames);
        const auto [r1, r2] = singles_rates(summary);
        const double expected = 0.5 * s.detectors.pair_probability / 2.0;
        const double sigma = std::sqrt(expected / double(frames));
        CHECK(std::abs(r1 - expected) < 3.0 * sigma);
        CHECK(std::abs(r2 - expected) < 3.0 * sigma);
    }
    SUBCASE("singles stay flat while theta1 sweeps") {
        const std::int64_t frames = 200000;
        for (double theta1_deg : {0.0, 30.0, 60.0, 90.0, 120.0}) {
            ExperimentSetup s = matched_setup();
            s.detectors.pair_probability = 0.02;
            s.analyzers.theta1_rad = deg_to_rad(theta1_deg);
            const auto events = generate_events(s, frames, 37);
            const auto summary = count_coincidences(
                events, s.detectors.coincidence_window_fs / 1000.0, 16, frames);
            const auto [r1, r2] = singles_rates(summary);
            const double expected = s.detectors.pair_probability / 2.0;
            const double sigma = std::sqrt(expected / double(frames));
            CHECK(std::abs(r1 - expected) < 3.5 * sigma);
            CHECK(std::abs(r2 - expected) < 3.5 * sigma);
        }
    }
    SUBCASE("needs frames") {
        CoincidenceSummary empty;
        CHECK_THROWS_AS(singles_rates(empty), std::invalid_argument);
    }
}

TEST_CASE("fitting the Monte Carlo counts fringe recovers the 400 nm period") {
    const int n_settings = 48;
    const std::int64_t frames = 50000;
    std::vector<CurvePoint> pts;
    for (int k = 0; k < n_settings; ++k) {
        ExperimentSetup s = matched_setup();
        s.detectors.pair_probability = 0.04;
        s.detectors.jitter_fs = 0.0;
        s.pump.extra_phase_path_nm = k * 1600.0 / n_settings;
        const auto events = generate_events(s, frames, 9000 + std::uint64_t(k));
        const auto summary =
            count_coincidences(events, s.detectors.coincidence_window_fs / 1000.0, 16, frames);
        pts.push_back({s.pump.extra_phase_path_nm, double(summary.coincidences)});
    }
    const Curve counts = make_curve("pump_phase_path", CurveKind::Counts, std::move(pts));
    const auto fit = fit_fringe(counts, 400.0);
    CHECK(std::abs(fit.period - 400.0) < 2.0);
}

TEST_CASE("Monte Carlo fringe matches the closed form, chi-squared per dof < 2") {
    const int n_settings = 12;
    const std::int64_t frames = 150000;
    std::vector<double> observed;
    std::vector<double> predicted;
    for (int k = 0; k < n_settings; ++k) {
        ExperimentSetup s = matched_setup();
        s.detectors.pair_probability = 0.05;
        s.detectors.jitter_fs = 0.0;
        s.pump.extra_phase_path_nm = k * 400.0 / n_settings;
        const auto events = generate_events(s, frames, 4242 + std::uint64_t(k));
        const auto summary =
            count_coincidences(events, s.detectors.coincidence_window_fs / 1000.0, 16, frames);
        observed.push_back(double(summary.coincidences));
        predicted.push_back(coincidence_rate(build_amplitude_terms(s), s.model));
    }
    double obs_total = 0.0;
    double pred_total = 0.0;
    for (int k = 0; k < n_settings; ++k) {
        obs_total += observed[k];
        pred_total += predicted[k];
    }
    double chi2 = 0.0;
    for (int k = 0; k < n_settings; ++k) {
        const double expect = predicted[k] * obs_total / pred_total;
        chi2 += (observed[k] - expect) * (observed[k] - expect) / expect;
    }
    CHECK(chi2 / double(n_settings - 1) < 2.0);
}
