#include "biphoton/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "biphoton/detail/parallel.hpp"
#include "biphoton/rate.hpp"

namespace biphoton {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double weight_sq_sum(std::span<const AmplitudeTerm> terms) {
    double w = 0.0;
    for (const auto& t : terms) w += std::norm(t.weight);
    return w;
}

/// |sum_i a_i G_i(t_plus, t_12)|^2 including envelope normalization; all
/// terms share one width pair, so the norm factor is common.
double joint_density(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                     double t_plus, double t_12) {
    const double sp = model.sigma_plus_fs;
    const double sm = model.sigma_minus_fs;
    std::complex<double> amp = 0.0;
    for (const auto& t : terms) {
        const double dp = t_plus - t.mu_plus_fs;
        const double d12 = t_12 - t.mu_12_fs;
        const double env = std::exp(-dp * dp / (4.0 * sp * sp) - d12 * d12 / (4.0 * sm * sm));
        amp += t.weight * std::polar(env, t.phase_rad);
    }
    return std::norm(amp) / (kTwoPi * sp * sm);
}

/// Mixture proposal density sum_i |w_i|^2 |G_i|^2 (unnormalized by W).
double proposal_density_times_w(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                                double t_plus, double t_12) {
    const double sp = model.sigma_plus_fs;
    const double sm = model.sigma_minus_fs;
    const double g_norm_sq = 1.0 / (kTwoPi * sp * sm);
    double q = 0.0;
    for (const auto& t : terms) {
        const double dp = t_plus - t.mu_plus_fs;
        const double d12 = t_12 - t.mu_12_fs;
        q += std::norm(t.weight) *
             std::exp(-dp * dp / (2.0 * sp * sp) - d12 * d12 / (2.0 * sm * sm)) * g_norm_sq;
    }
    return q;
}

struct PlaneSample {
    double t_plus;
    double t_12;
};

/// One rejection round; true when accepted.
bool try_sample_plane(std::span<const AmplitudeTerm> terms, const ModelParams& model,
                      double total_weight_sq, PlaneSample& out, Rng& rng) {
    // Pick the proposal component by |w_i|^2.
    double pick = rng.uniform() * total_weight_sq;
    std::size_t chosen = terms.size() - 1;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        pick -= std::norm(terms[i].weight);
        if (pick <= 0.0) {
            chosen = i;
            break;
        }
    }
    const auto& pivot = terms[chosen];
    const double t_plus = rng.normal(pivot.mu_plus_fs, model.sigma_plus_fs);
    const double t_12 = rng.normal(pivot.mu_12_fs, model.sigma_minus_fs);

    const double f = joint_density(terms, model, t_plus, t_12);
    const double bound =
        double(terms.size()) * proposal_density_times_w(terms, model, t_plus, t_12);
    if (rng.uniform() * bound <= f) {
        out = {t_plus, t_12};
        return true;
    }
    return false;
}

}  // namespace

std::pair<double, double> sample_pair_times(std::span<const AmplitudeTerm> terms,
                                            const ModelParams& model, double tau_fs, Rng& rng) {
    if (terms.empty())
        throw std::invalid_argument("sample_pair_times: no amplitude terms");
    const double total = weight_sq_sum(terms);
    if (!(total > 0.0))
        throw std::invalid_argument("sample_pair_times: zero total weight");

    PlaneSample s{};
    while (!try_sample_plane(terms, model, total, s, rng)) {
    }
    const double t1 = s.t_plus + tau_fs + 0.5 * (s.t_12 - tau_fs);
    const double t2 = s.t_plus + tau_fs - 0.5 * (s.t_12 - tau_fs);
    return {t1, t2};
}

namespace detail {

OutcomeModel OutcomeModel::build(const ExperimentSetup& setup) {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    OutcomeModel model;
    // Blocked photons project onto the analyzer's orthogonal axis.
    const std::array<std::pair<double, double>, 4> angles = {{
        {0.0, 0.0},
        {0.0, kHalfPi},
        {kHalfPi, 0.0},
        {kHalfPi, kHalfPi},
    }};
    double total = 0.0;
    std::array<double, 4> rate{};
    for (std::size_t o = 0; o < 4; ++o) {
        ExperimentSetup variant = setup;
        variant.analyzers.theta1_rad += angles[o].first;
        variant.analyzers.theta2_rad += angles[o].second;
        model.terms[o] = build_amplitude_terms(variant);
        ModelParams unit_norm = setup.model;
        unit_norm.normalization = 1.0;
        rate[o] = coincidence_rate(model.terms[o], unit_norm);
        total += rate[o];
    }
    // total equals 2 N up to the parasitic same-path overlaps; normalizing
    // keeps the four probabilities an exact distribution either way.
    for (std::size_t o = 0; o < 4; ++o)
        model.probability[o] = total > 0.0 ? rate[o] / total : 0.0;
    return model;
}

}  // namespace detail

std::vector<EventRecord> generate_events(const ExperimentSetup& setup, std::int64_t n_frames,
                                         std::uint64_t seed) {
    if (n_frames < 1)
        throw std::invalid_argument("generate_events: n_frames must be >= 1");

    const auto outcome_model = detail::OutcomeModel::build(setup);
    const auto& det = setup.detectors;
    const double tau = setup.delays.tau_fs;
    const double rep = setup.pump.rep_period_fs;

    std::array<double, 4> weight_sums{};
    for (std::size_t o = 0; o < 4; ++o) weight_sums[o] = weight_sq_sum(outcome_model.terms[o]);

    // Frames are generated in parallel chunks; every frame draws from its
    // own substream, so chunking does not change the stream.
    constexpr std::int64_t kChunk = 65536;
    const int n_chunks = static_cast<int>((n_frames + kChunk - 1) / kChunk);
    std::vector<std::vector<EventRecord>> chunk_events(static_cast<std::size_t>(n_chunks));

    detail::parallel_for(n_chunks, [&](int chunk) {
        auto& events = chunk_events[static_cast<std::size_t>(chunk)];
        const std::int64_t begin = chunk * kChunk;
        const std::int64_t end = std::min(n_frames, begin + kChunk);
        for (std::int64_t k = begin; k < end; ++k) {
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));
            if (rng.uniform() >= det.pair_probability) continue;

            // Outcome: which analyzer each photon passes or fails.
            double pick = rng.uniform();
            std::size_t outcome = 3;
            for (std::size_t o = 0; o < 4; ++o) {
                pick -= outcome_model.probability[o];
                if (pick <= 0.0) {
                    outcome = o;
                    break;
                }
            }
            const bool d1_sees = outcome == 0 || outcome == 1;
            const bool d2_sees = outcome == 0 || outcome == 2;
            if (!d1_sees && !d2_sees) continue;
            if (!(weight_sums[outcome] > 0.0)) continue;

            PlaneSample s{};
            while (!try_sample_plane(outcome_model.terms[outcome], setup.model,
                                     weight_sums[outcome], s, rng)) {
            }
            const double t1 = s.t_plus + tau + 0.5 * (s.t_12 - tau);
            const double t2 = s.t_plus + tau - 0.5 * (s.t_12 - tau);

            const double jitter1 = det.jitter_fs * rng.normal();
            const double jitter2 = det.jitter_fs * rng.normal();
            const bool keep1 = rng.uniform() < det.efficiency;
            const bool keep2 = rng.uniform() < det.efficiency;

            const double frame_origin = double(k) * rep;
            if (d1_sees && keep1)
                events.push_back({k, Detector::D1, (frame_origin + t1 + jitter1) / 1000.0});
            if (d2_sees && keep2)
                events.push_back({k, Detector::D2, (frame_origin + t2 + jitter2) / 1000.0});
        }
    });

    std::vector<EventRecord> events;
    for (const auto& chunk : chunk_events)
        events.insert(events.end(), chunk.begin(), chunk.end());
    sort_events(events);
    return events;
}

void sort_events(std::vector<EventRecord>& events) {
    std::sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
        if (a.timestamp_ps != b.timestamp_ps) return a.timestamp_ps < b.timestamp_ps;
        if (a.frame_index != b.frame_index) return a.frame_index < b.frame_index;
        return static_cast<int>(a.detector) < static_cast<int>(b.detector);
    });
}

CoincidenceSummary count_coincidences(std::span<const EventRecord> events, double window_ps,
                                      int histogram_bins, std::int64_t n_frames) {
    if (!(window_ps > 0.0))
        throw std::invalid_argument("count_coincidences: window must be positive");
    if (histogram_bins < 1)
        throw std::invalid_argument("count_coincidences: needs at least one histogram bin");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].timestamp_ps < events[i - 1].timestamp_ps)
            throw std::invalid_argument("count_coincidences: stream not sorted by timestamp");

    std::vector<double> d1;
    std::vector<double> d2;
    for (const auto& e : events)
        (e.detector == Detector::D1 ? d1 : d2).push_back(e.timestamp_ps);

    CoincidenceSummary summary;
    summary.n_frames = n_frames;
    summary.singles_d1 = static_cast<std::int64_t>(d1.size());
    summary.singles_d2 = static_cast<std::int64_t>(d2.size());

    std::vector<std::int64_t> counts(static_cast<std::size_t>(histogram_bins), 0);
    const double bin_width = 2.0 * window_ps / histogram_bins;

    std::size_t i = 0;
    std::size_t j = 0;
    while (i < d1.size() && j < d2.size()) {
        const double dt = d2[j] - d1[i];
        if (std::abs(dt) <= window_ps) {
            ++summary.coincidences;
            auto bin = static_cast<std::int64_t>((dt + window_ps) / bin_width);
            bin = std::clamp<std::int64_t>(bin, 0, histogram_bins - 1);
            ++counts[static_cast<std::size_t>(bin)];
            ++i;
            ++j;
        } else if (d1[i] < d2[j]) {
            ++i;
        } else {
            ++j;
        }
    }

    summary.dt_histogram.reserve(counts.size());
    for (int b = 0; b < histogram_bins; ++b)
        summary.dt_histogram.emplace_back(-window_ps + (b + 0.5) * bin_width, counts[b]);
    return summary;
}

std::pair<double, double> singles_rates(const CoincidenceSummary& summary) {
    if (summary.n_frames <= 0)
        throw std::invalid_argument("singles_rates: n_frames must be positive");
    const double n = double(summary.n_frames);
    return {double(summary.singles_d1) / n, double(summary.singles_d2) / n};
}

std::string write_events_csv(std::span<const EventRecord> events) {
    std::string out = "frame,detector,timestamp_ps\n";
    char buf[96];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%lld,%s,%.6f\n", static_cast<long long>(e.frame_index),
                      e.detector == Detector::D1 ? "D1" : "D2", e.timestamp_ps);
        out += buf;
    }
    return out;
}

std::string write_summary_json(const CoincidenceSummary& summary) {
    nlohmann::json doc;
    doc["n_frames"] = summary.n_frames;
    doc["singles_d1"] = summary.singles_d1;
    doc["singles_d2"] = summary.singles_d2;
    doc["coincidences"] = summary.coincidences;
    auto histogram = nlohmann::json::array();
    for (const auto& [center, count] : summary.dt_histogram)
        histogram.push_back({center, count});
    doc["histogram"] = std::move(histogram);
    return doc.dump();
}

}  // namespace biphoton
