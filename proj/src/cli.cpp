#include "biphoton/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "biphoton/amplitude.hpp"
#include "biphoton/config.hpp"
#include "biphoton/curve_io.hpp"
#include "biphoton/events.hpp"
#include "biphoton/rate.hpp"
#include "biphoton/setup.hpp"

namespace biphoton {

namespace {

/// Flag-level faults; mapped to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed to write file: " + path);
}

ExperimentSetup load_setup(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
    std::string text;
    if (!config_path.empty()) text = read_file(config_path);
    return parse_config(text, overrides);
}

ScanParameter scan_parameter_from_token(const std::string& token) {
    if (token == "inter_pulse_delay") return ScanParameter::InterPulseDelay;
    if (token == "pump_phase_path") return ScanParameter::PumpPhasePath;
    if (token == "theta1") return ScanParameter::Theta1;
    if (token == "tau") return ScanParameter::Tau;
    if (token == "tau1") return ScanParameter::Tau1;
    throw UsageError("unknown scan parameter '" + token + "'");
}

/// Scan bounds arrive unit-tagged; convert to the parameter's internal
/// unit (fs for delays, nm for phase path, rad for angles).
double scan_bound(const std::string& token, ScanParameter param) {
    Quantity q;
    try {
        q = parse_quantity(token);
    } catch (const ParseError& e) {
        throw UsageError(std::string("bad scan bound '") + token + "': " + e.what());
    }
    switch (param) {
        case ScanParameter::InterPulseDelay:
        case ScanParameter::Tau:
        case ScanParameter::Tau1:
            if (q.is_time()) return q.as_fs();
            if (q.is_length()) return delay_from_length_nm(q.as_nm());
            throw UsageError("scan bound '" + token + "' needs a time or length unit");
        case ScanParameter::PumpPhasePath:
            if (q.is_length()) return q.as_nm();
            throw UsageError("scan bound '" + token + "' needs a length unit");
        case ScanParameter::Theta1:
            if (q.is_angle()) return q.as_rad();
            throw UsageError("scan bound '" + token + "' needs an angle unit");
    }
    throw UsageError("unknown scan parameter");
}

std::string check_payload(const ExperimentSetup& setup) {
    const ConditionReport report = interference_condition(setup);
    const auto terms = build_amplitude_terms(setup);
    const int separation = dominant_pulse_separation(terms, setup.model);
    const double polarization = predicted_polarization_visibility(
        report.max_cross_overlap, setup.pump.n_pulses, separation);

    nlohmann::json doc;
    doc["residual_T_fs"] = report.residual_T_fs;
    doc["residual_tau1_fs"] = report.residual_tau1_fs;
    doc["max_cross_overlap"] = report.max_cross_overlap;
    doc["predicted_spacetime_visibility"] = report.predicted_spacetime_visibility;
    doc["predicted_polarization_visibility"] = polarization;
    doc["satisfied"] = report.satisfied;
    return doc.dump() + "\n";
}

std::string rate_payload(const ExperimentSetup& setup) {
    const auto terms = build_amplitude_terms(setup);
    nlohmann::json doc;
    doc["rate"] = coincidence_rate(terms, setup.model);
    doc["normalization"] = setup.model.normalization;
    doc["n_terms"] = terms.size();
    return doc.dump() + "\n";
}

std::string oracle_payload(const ExperimentSetup& setup, int steps, double margin_sigmas) {
    const auto terms = build_amplitude_terms(setup);
    const double closed = coincidence_rate(terms, setup.model);
    const GridSpec grid = default_grid(terms, setup.model, steps, margin_sigmas);
    const double gridded = grid_rate_oracle(terms, setup.model, grid);
    const double abs_diff = std::abs(closed - gridded);

    nlohmann::json doc;
    doc["closed_form"] = closed;
    doc["grid"] = gridded;
    doc["absolute_difference"] = abs_diff;
    doc["relative_difference"] = closed > 0.0 ? abs_diff / closed : abs_diff;
    doc["steps_per_axis"] = steps;
    return doc.dump() + "\n";
}

}  // namespace

CommandOutcome run_cli(const std::vector<std::string>& args) {
    CommandOutcome outcome;
    std::string payload;
    std::ostringstream diag;

    CLI::App app{"Two-photon interference simulator for pulsed-pump parametric down-conversion"};
    app.name("biphoton");
    app.require_subcommand(1);

    struct Common {
        std::string config_path;
        std::vector<std::string> overrides;
    };
    auto add_common = [](CLI::App* sub, Common& common) {
        sub->add_option("--config", common.config_path, "apparatus description file");
        sub->add_option("--set", common.overrides,
                        "override a config key, section.key=value (repeatable)");
    };

    // check
    auto common_check = std::make_shared<Common>();
    CLI::App* cmd_check = app.add_subcommand("check", "report the matched-delay condition");
    add_common(cmd_check, *common_check);
    cmd_check->callback(
        [&payload, common_check] {
            payload = check_payload(load_setup(common_check->config_path, common_check->overrides));
        });

    // rate
    auto common_rate = std::make_shared<Common>();
    CLI::App* cmd_rate = app.add_subcommand("rate", "closed-form coincidence rate");
    add_common(cmd_rate, *common_rate);
    cmd_rate->callback([&payload, common_rate] {
        payload = rate_payload(load_setup(common_rate->config_path, common_rate->overrides));
    });

    // scan
    auto common_scan = std::make_shared<Common>();
    auto scan_args = std::make_shared<std::tuple<std::string, std::string, std::string, int,
                                                 std::string, std::string>>();
    CLI::App* cmd_scan = app.add_subcommand("scan", "sweep one parameter");
    add_common(cmd_scan, *common_scan);
    auto& [scan_param, scan_from, scan_to, scan_steps, scan_reduce, scan_format] = *scan_args;
    scan_steps = 81;
    scan_reduce = "rate";
    scan_format = "csv";
    cmd_scan->add_option("--param", scan_param, "inter_pulse_delay|pump_phase_path|theta1|tau|tau1")
        ->required();
    cmd_scan->add_option("--from", scan_from, "range start, unit-tagged (e.g. 533fs, 0nm, 0deg)")
        ->required();
    cmd_scan->add_option("--to", scan_to, "range end, unit-tagged")->required();
    cmd_scan->add_option("--steps", scan_steps, "number of scan points");
    cmd_scan->add_option("--reduce", scan_reduce, "rate|visibility")
        ->check(CLI::IsMember({"rate", "visibility"}));
    cmd_scan->add_option("--format", scan_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd_scan->callback([&payload, common_scan, scan_args] {
        const auto& [param_token, from_token, to_token, steps, reduce_token, format_token] =
            *scan_args;
        if (steps < 2) throw UsageError("--steps must be >= 2");
        const ScanParameter param = scan_parameter_from_token(param_token);
        const double lo = scan_bound(from_token, param);
        const double hi = scan_bound(to_token, param);
        const ExperimentSetup setup =
            load_setup(common_scan->config_path, common_scan->overrides);
        const ReduceMode reduce =
            reduce_token == "visibility" ? ReduceMode::Visibility : ReduceMode::Rate;

        Curve curve = scan(setup, param, lo, hi, steps, reduce);
        if (param == ScanParameter::Theta1) {
            // Degrees on every CLI surface; radians stay internal.
            std::vector<CurvePoint> points = curve.points;
            for (auto& p : points) p.x = rad_to_deg(p.x);
            curve = make_curve(curve.parameter, curve.kind, std::move(points));
        }
        payload = write_curve(curve,
                              format_token == "json" ? CurveFormat::Json : CurveFormat::Csv);
        if (!payload.empty() && payload.back() != '\n') payload += '\n';
    });

    // events
    auto common_events = std::make_shared<Common>();
    auto events_args = std::make_shared<std::tuple<std::int64_t, std::uint64_t, std::string,
                                                   std::string, int>>();
    CLI::App* cmd_events = app.add_subcommand("events", "generate time-tagged detector clicks");
    add_common(cmd_events, *common_events);
    auto& [ev_frames, ev_seed, ev_out_events, ev_out_summary, ev_bins] = *events_args;
    ev_frames = 100000;
    ev_seed = 1;
    ev_out_events = "events.csv";
    ev_out_summary = "summary.json";
    ev_bins = 64;
    cmd_events->add_option("--frames", ev_frames, "pump repetition frames to simulate");
    cmd_events->add_option("--seed", ev_seed, "random seed");
    cmd_events->add_option("--out-events", ev_out_events, "event CSV path");
    cmd_events->add_option("--out-summary", ev_out_summary, "summary JSON path");
    cmd_events->add_option("--bins", ev_bins, "coincidence histogram bins");
    cmd_events->callback([&payload, common_events, events_args] {
        const auto& [frames, seed, out_events, out_summary, bins] = *events_args;
        if (frames < 1) throw UsageError("--frames must be >= 1");
        if (bins < 1) throw UsageError("--bins must be >= 1");
        const ExperimentSetup setup =
            load_setup(common_events->config_path, common_events->overrides);
        const auto events = generate_events(setup, frames, seed);
        const CoincidenceSummary summary = count_coincidences(
            events, setup.detectors.coincidence_window_fs / 1000.0, bins, frames);
        write_file(out_events, write_events_csv(events));
        const std::string summary_json = write_summary_json(summary) + "\n";
        write_file(out_summary, summary_json);
        payload = summary_json;
    });

    // oracle
    auto common_oracle = std::make_shared<Common>();
    auto oracle_args = std::make_shared<std::pair<int, double>>(512, 8.0);
    CLI::App* cmd_oracle =
        app.add_subcommand("oracle", "closed-form rate against grid integration");
    add_common(cmd_oracle, *common_oracle);
    cmd_oracle->add_option("--steps-per-axis", oracle_args->first, "grid steps per axis");
    cmd_oracle->add_option("--margin-sigmas", oracle_args->second,
                           "grid margin beyond term centers, in envelope widths");
    cmd_oracle->callback([&payload, common_oracle, oracle_args] {
        if (oracle_args->first < 64) throw UsageError("--steps-per-axis must be >= 64");
        if (!(oracle_args->second >= 6.0)) throw UsageError("--margin-sigmas must be >= 6");
        const ExperimentSetup setup =
            load_setup(common_oracle->config_path, common_oracle->overrides);
        payload = oracle_payload(setup, oracle_args->first, oracle_args->second);
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        outcome.exit_code = 0;
    } catch (const CLI::CallForHelp&) {
        payload = app.help();
        outcome.exit_code = 0;
    } catch (const CLI::ParseError& e) {
        diag << "usage error: " << e.what() << "\n";
        outcome.exit_code = 2;
    } catch (const UsageError& e) {
        diag << "usage error: " << e.what() << "\n";
        outcome.exit_code = 2;
    } catch (const ParseError& e) {
        diag << "config error: " << e.what() << "\n";
        if (!e.snippet().empty()) diag << "  | " << e.snippet() << "\n";
        outcome.exit_code = 1;
    } catch (const ValidationError& e) {
        diag << "config error: " << e.what() << "\n";
        outcome.exit_code = 1;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        outcome.exit_code = 1;
    }

    outcome.stdout_payload = std::move(payload);
    outcome.stderr_diagnostics = diag.str();
    return outcome;
}

}  // namespace biphoton
