#pragma once
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biphoton/amplitude.hpp"
#include "biphoton/rng.hpp"
#include "biphoton/setup.hpp"

namespace biphoton {

enum class Detector { D1, D2 };

/// One detector click, time-tagged in absolute lab time.
struct EventRecord {
    std::int64_t frame_index = 0;
    Detector detector = Detector::D1;
    double timestamp_ps = 0.0;
};

struct CoincidenceSummary {
    std::int64_t n_frames = 0;
    std::int64_t singles_d1 = 0;
    std::int64_t singles_d2 = 0;
    std::int64_t coincidences = 0;
    std::vector<std::pair<double, std::int64_t>> dt_histogram;  ///< (bin center ps, count)
};

/// One sample of the joint detection-time density |sum of terms|^2,
/// returned as detector times (t1, t2) in frame-local fs. Rejection
/// sampling against the mixture of the terms' own envelopes; the bound
/// M = n_terms holds by Cauchy-Schwarz, so acceptance averages 1/n over a
/// pump-phase period.
std::pair<double, double> sample_pair_times(std::span<const AmplitudeTerm> terms,
                                            const ModelParams& model, double tau_fs, Rng& rng);

/// Detection-time coordinates back from a (t1, t2) sample.
inline double t_plus_from_times(double t1_fs, double t2_fs, double tau_fs) {
    return 0.5 * (t1_fs + t2_fs) - tau_fs;
}
inline double t_12_from_times(double t1_fs, double t2_fs, double tau_fs) {
    return t1_fs - t2_fs + tau_fs;
}

/// Per-frame pair generation with the polarization analyzers in the event
/// path: a frame produces a pair candidate with probability
/// pair_probability, the candidate lands in one of the four analyzer
/// outcomes (pass/pass .. block/block) with the quantum joint
/// probabilities, and only passing photons produce clicks. Detector
/// jitter and efficiency thinning apply per click. Frame k draws from
/// substream k, so the stream is byte-identical for identical inputs
/// regardless of generation order. Output is sorted by timestamp.
std::vector<EventRecord> generate_events(const ExperimentSetup& setup, std::int64_t n_frames,
                                         std::uint64_t seed);

void sort_events(std::vector<EventRecord>& events);

/// Greedy earliest-first pairing of one D1 click with one D2 click within
/// |dt| <= window; each click is used at most once. Requires the stream
/// sorted by timestamp. dt = t(D2) - t(D1), histogrammed over
/// [-window, +window].
CoincidenceSummary count_coincidences(std::span<const EventRecord> events, double window_ps,
                                      int histogram_bins, std::int64_t n_frames);

/// Singles per frame for each detector.
std::pair<double, double> singles_rates(const CoincidenceSummary& summary);

/// CSV with header `frame,detector,timestamp_ps`.
std::string write_events_csv(std::span<const EventRecord> events);

/// JSON object {n_frames, singles_d1, singles_d2, coincidences, histogram}.
std::string write_summary_json(const CoincidenceSummary& summary);

namespace detail {

/// The four analyzer outcomes and their closed-form probabilities; shared
/// by the generator and the tests.
struct OutcomeModel {
    // pass/pass, pass/block, block/pass, block/block
    std::array<std::vector<AmplitudeTerm>, 4> terms;
    std::array<double, 4> probability{};  ///< sums to 1 over outcomes

    static OutcomeModel build(const ExperimentSetup& setup);
};

}  // namespace detail

}  // namespace biphoton
