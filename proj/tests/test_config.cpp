#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "biphoton/config.hpp"
#include "biphoton/curve_io.hpp"
#include "biphoton/rate.hpp"
#include "biphoton/rng.hpp"
#include "biphoton/setup.hpp"

using namespace biphoton;

namespace {

const char* kDefaultConfig = R"(
[pump]
wavelength = 400 nm
pulse_fwhm = 140 fs
rep_period = 11 ns
n_pulses = 2
inter_pulse_delay = 197 um
extra_phase_path = 0 nm
[crystal]
type = type-II
thickness = 100 um
[filter]
center = 800 nm
fwhm = 10 nm
[interferometer]
tau = 197 um
tau1 = 394 um
[analyzers]
theta1 = 45 deg
theta2 = 45 deg
[detectors]
jitter = 300 ps
coincidence_window = 3 ns
pair_probability = 0.001
efficiency = 1.0
)";

}  // namespace

TEST_CASE("parse_quantity") {
    CHECK(parse_quantity("197 um").value == 197.0);
    CHECK(parse_quantity("197 um").unit == Unit::Micrometer);
    CHECK(parse_quantity("0fs").value == 0.0);
    CHECK(parse_quantity("0fs").unit == Unit::Femtosecond);
    CHECK(parse_quantity("657.1 fs").value == 657.1);
    CHECK(parse_quantity("0.001").unit == Unit::Dimensionless);
    CHECK(parse_quantity("-3.5e2 nm").value == -350.0);
    CHECK(parse_quantity("45 deg").unit == Unit::Degree);

    CHECK_THROWS_WITH_AS(parse_quantity("197 kg"), doctest::Contains("kg"), ParseError);
    CHECK_THROWS_AS(parse_quantity("abc"), ParseError);
    CHECK_THROWS_AS(parse_quantity(""), ParseError);
    CHECK_THROWS_AS(parse_quantity("1e999 nm"), ParseError);
}

TEST_CASE("default config parses to the stock apparatus") {
    const ExperimentSetup s = parse_config(kDefaultConfig);
    CHECK(std::abs(s.pump.inter_pulse_delay_fs - 657.1) < 0.1);
    CHECK(std::abs(s.delays.tau_fs - 657.1) < 0.1);
    CHECK(std::abs(s.delays.tau1_fs - 1314.2) < 0.1);
    CHECK(std::abs(s.model.sigma_plus_fs - 59.45) < 0.01);
    CHECK(std::abs(s.model.sigma_minus_fs - 90.7) < 0.05);
    CHECK(s.pump.n_pulses == 2);
    CHECK(s.analyzers.theta1_rad == doctest::Approx(deg_to_rad(45.0)));
    CHECK(s.detectors.coincidence_window_fs == doctest::Approx(3.0e6));
    CHECK(s.crystal.type == "type-II");
}

TEST_CASE("empty source yields the defaults") {
    CHECK(parse_config("") == default_setup());
    CHECK(parse_config(kDefaultConfig) == default_setup());
}

TEST_CASE("parse errors carry positions") {
    SUBCASE("bad unit") {
        try {
            parse_config("[interferometer]\ntau = 197 kg\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("kg") != std::string::npos);
            CHECK(e.snippet() == "tau = 197 kg");
        }
    }
    SUBCASE("unknown key") {
        try {
            parse_config("[pump]\nwavelenth = 400 nm\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("wavelenth") != std::string::npos);
        }
    }
    SUBCASE("unknown section") {
        CHECK_THROWS_WITH_AS(parse_config("[laser]\n"), doctest::Contains("laser"), ParseError);
    }
    SUBCASE("key outside a section") {
        CHECK_THROWS_WITH_AS(parse_config("tau = 197 um\n"),
                             doctest::Contains("outside any section"), ParseError);
    }
    SUBCASE("duplicate key") {
        CHECK_THROWS_WITH_AS(parse_config("[pump]\nn_pulses = 2\nn_pulses = 3\n"),
                             doctest::Contains("duplicate"), ParseError);
    }
    SUBCASE("wrong unit class") {
        CHECK_THROWS_AS(parse_config("[pump]\nwavelength = 400 fs\n"), ParseError);
        CHECK_THROWS_AS(parse_config("[analyzers]\ntheta1 = 45 nm\n"), ParseError);
        CHECK_THROWS_AS(parse_config("[detectors]\nefficiency = 1 nm\n"), ParseError);
        CHECK_THROWS_AS(parse_config("[pump]\nn_pulses = 2.5\n"), ParseError);
    }
    SUBCASE("delays accept both time and length") {
        const auto a = parse_config("[interferometer]\ntau = 197 um\n");
        const auto b = parse_config("[interferometer]\ntau = 197000 nm\n");
        CHECK(a.delays.tau_fs == b.delays.tau_fs);
        std::ostringstream cfg;
        cfg.precision(17);
        cfg << "[interferometer]\ntau = " << delay_from_length_um(197.0) << " fs\n";
        const auto c = parse_config(cfg.str());
        CHECK(c.delays.tau_fs == a.delays.tau_fs);
    }
    SUBCASE("future detector keys stay rejected") {
        CHECK_THROWS_WITH_AS(parse_config("[detectors]\ndark_rate = 100\n"),
                             doctest::Contains("dark_rate"), ParseError);
    }
}

TEST_CASE("semantic validation lists every violation") {
    try {
        parse_config("[pump]\nwavelength = -400 nm\nn_pulses = 0\n[filter]\nfwhm = 900 nm\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations().size() == 3);
    }
}

TEST_CASE("overrides apply after parsing, before validation") {
    std::vector<std::string> overrides{"pump.n_pulses=1", "analyzers.theta1=0 deg"};
    const auto s = parse_config(kDefaultConfig, overrides);
    CHECK(s.pump.n_pulses == 1);
    CHECK(s.analyzers.theta1_rad == 0.0);

    std::vector<std::string> bad{"pump.bogus=1"};
    CHECK_THROWS_AS(parse_config(kDefaultConfig, bad), ParseError);
    std::vector<std::string> invalid{"detectors.efficiency=2.0"};
    CHECK_THROWS_AS(parse_config(kDefaultConfig, invalid), ValidationError);
}

TEST_CASE("render/parse round trip is exact") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        ExperimentSetup s = default_setup();
        s.pump.wavelength_nm = 350.0 + rng.uniform() * 150.0;
        s.pump.pulse_fwhm_fs = 80.0 + rng.uniform() * 200.0;
        s.pump.inter_pulse_delay_fs = rng.uniform() * 900.0;
        s.pump.extra_phase_path_nm = rng.uniform() * 800.0;
        s.pump.n_pulses = 1 + int(rng.next_u64() % 6);
        s.delays.tau_fs = rng.uniform() * 2000.0;
        s.delays.tau1_fs = rng.uniform() * 4000.0;
        s.analyzers.theta1_rad = rng.uniform() * 6.28;
        s.analyzers.theta2_rad = rng.uniform() * 6.28;
        s.model.sigma_plus_fs = 40.0 + rng.uniform() * 100.0;
        s.model.sigma_minus_fs = 40.0 + rng.uniform() * 100.0;
        s.model.normalization = 0.25 + rng.uniform() * 4.0;
        s.detectors.pair_probability = rng.uniform() * 0.05;

        const ExperimentSetup back = parse_config(render_config(s));
        CHECK(back == s);
        CHECK(render_config(back) == render_config(s));
    }
}

TEST_CASE("parsing is total over junk input") {
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        std::string junk;
        const int len = int(rng.next_u64() % 120);
        for (int i = 0; i < len; ++i) {
            const char alphabet[] = "[]pumtau=# .0123456789-+eE\n\t_qfilters";
            junk += alphabet[rng.next_u64() % (sizeof alphabet - 1)];
        }
        try {
            (void)parse_config(junk);
        } catch (const ParseError&) {
        } catch (const ValidationError&) {
        }
    }
}

TEST_CASE("curve CSV round trip") {
    std::vector<CurvePoint> pts{{0.0, 1.0}, {1.5, 0.25}};
    const Curve curve = make_curve("pump_phase_path", CurveKind::Rate, pts);

    const std::string csv = write_curve(curve, CurveFormat::Csv);
    CHECK(csv == "# parameter=pump_phase_path y_kind=RATE\n0,1\n1.5,0.25\n");
    // exactly header + one line per point
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const Curve back = read_curve(csv);
    CHECK(write_curve(back, CurveFormat::Csv) == csv);

    const std::string json = write_curve(curve, CurveFormat::Json);
    const Curve back_json = read_curve(json);
    CHECK(write_curve(back_json, CurveFormat::Json) == json);
    CHECK(back_json.points.size() == 2);
    CHECK(back_json.kind == CurveKind::Rate);
}

TEST_CASE("curve round trip preserves 17 significant digits") {
    Rng rng(5);
    std::vector<CurvePoint> pts;
    double x = 0.0;
    for (int i = 0; i < 64; ++i) {
        x += rng.uniform() + 1e-3;
        pts.push_back({x, rng.uniform() * 1e3});
    }
    const Curve curve = make_curve("tau", CurveKind::Rate, pts);
    for (auto format : {CurveFormat::Csv, CurveFormat::Json}) {
        const Curve back = read_curve(write_curve(curve, format));
        REQUIRE(back.points.size() == curve.points.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK(back.points[i].x == curve.points[i].x);
            CHECK(back.points[i].y == curve.points[i].y);
        }
    }
}

TEST_CASE("scan output feeds the fringe fit through serialization") {
    const ExperimentSetup s = parse_config(kDefaultConfig);
    const Curve curve =
        scan(s, ScanParameter::PumpPhasePath, 0.0, 1600.0, 161, ReduceMode::Rate);
    const Curve reloaded = read_curve(write_curve(curve, CurveFormat::Csv));
    const auto fit = fit_fringe(reloaded, 400.0);
    CHECK(std::abs(fit.period - 400.0) < 0.4);
}

TEST_CASE("bad curve text is rejected") {
    CHECK_THROWS(read_curve(""));
    CHECK_THROWS(read_curve("x,y\n1,2\n"));
    CHECK_THROWS(read_curve("# parameter=x y_kind=NOPE\n1,2\n"));
    CHECK_THROWS(read_curve("# parameter=x y_kind=RATE\n1;2\n"));
}
