// Config parsing and validation tests.

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "photonstat/config.hpp"

using namespace photonstat;

TEST_CASE("defaults are valid and carry the headline parameters", "[config]") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.levels == 2);
    CHECK(cfg.k21_per_s == 7.3529e7);
    CHECK(cfg.kappa_per_s_per_uW == 3.2825e5);
    CHECK(cfg.eta == 0.0245);
    CHECK(cfg.zpl_center_nm == 734.0);
    CHECK(cfg.zpl_fwhm_nm == 4.1);
    CHECK(cfg.zpl_area == 0.81);
    CHECK(cfg.duration_s == 1.0);
    CHECK(cfg.powers_uW.size() == 10);
    CHECK(cfg.powers_uW.front() == 100.0);
    CHECK(cfg.powers_uW.back() == 1000.0);
    // derived handles
    CHECK(cfg.emitter_model().k21 == cfg.k21_per_s);
    CHECK(cfg.detection_chain().eta == cfg.eta);
    CHECK(cfg.zpl_line_shape() == LineShape::lorentzian);
}

TEST_CASE("key-value text parses with comments and blanks", "[config]") {
    std::istringstream in(
        "# emitter\n"
        "levels = 3\n"
        "k23_per_s = 5e6\n"
        "k31_per_s = 3e5\n"
        "\n"
        "eta=0.1\n"
        "powers_uW = 50, 100, 200\n"
        "fix_rho = 1\n"
        "zpl_shape = gaussian\n"
        "seed = 31337\n");
    const auto cfg = parse_config_text(in, "inline");
    CHECK(cfg.levels == 3);
    CHECK(cfg.k23_per_s == 5e6);
    CHECK(cfg.eta == 0.1);
    REQUIRE(cfg.powers_uW.size() == 3);
    CHECK(cfg.powers_uW[1] == 100.0);
    REQUIRE(cfg.fix_rho.has_value());
    CHECK(*cfg.fix_rho == 1.0);
    CHECK(cfg.zpl_line_shape() == LineShape::gaussian);
    CHECK(cfg.seed == 31337);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("parse errors carry origin, line, and field", "[config]") {
    {
        std::istringstream in("k21_per_s = fast\n");
        CHECK_THROWS_WITH(parse_config_text(in, "f.cfg"),
                          Catch::Matchers::ContainsSubstring("f.cfg:1") &&
                              Catch::Matchers::ContainsSubstring("k21_per_s"));
    }
    {
        std::istringstream in("\n\nnot a key value line\n");
        CHECK_THROWS_WITH(parse_config_text(in, "f.cfg"),
                          Catch::Matchers::ContainsSubstring("f.cfg:3"));
    }
    {
        std::istringstream in("warp_speed = 9\n");
        CHECK_THROWS_WITH(parse_config_text(in, "f.cfg"),
                          Catch::Matchers::ContainsSubstring("unknown config key 'warp_speed'"));
    }
}

TEST_CASE("validation names the offending field", "[config]") {
    auto expect_fail = [](auto&& mutate, const std::string& needle) {
        PipelineConfig cfg;
        mutate(cfg);
        CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring(needle));
    };
    expect_fail([](PipelineConfig& c) { c.levels = 4; }, "levels");
    expect_fail([](PipelineConfig& c) { c.k21_per_s = 0.0; }, "k21_per_s");
    expect_fail([](PipelineConfig& c) { c.k23_per_s = 1e6; }, "k23_per_s");
    expect_fail([](PipelineConfig& c) { c.levels = 3; }, "k23_per_s");
    expect_fail([](PipelineConfig& c) { c.eta = 1.5; }, "eta");
    expect_fail([](PipelineConfig& c) { c.split_ratio = -0.1; }, "split_ratio");
    expect_fail([](PipelineConfig& c) { c.window_ps = 150000; c.bin_width_ps = 40000; },
                "window_ps");
    expect_fail([](PipelineConfig& c) { c.fix_rho = 1.5; }, "fix_rho");
    expect_fail([](PipelineConfig& c) { c.zpl_area = 0.0; }, "zpl_area");
    expect_fail([](PipelineConfig& c) { c.zpl_shape = "voigt"; }, "zpl_shape");
    expect_fail([](PipelineConfig& c) { c.grid_n = 8; }, "grid_n");
    expect_fail([](PipelineConfig& c) { c.powers_uW = {100.0, 100.0}; }, "powers_uW");
    expect_fail([](PipelineConfig& c) { c.powers_uW.clear(); }, "powers_uW");
    expect_fail([](PipelineConfig& c) { c.duration_s = 0.0; }, "duration_s");
    expect_fail([](PipelineConfig& c) { c.output_dir.clear(); }, "output_dir");
}

TEST_CASE("write and reparse is lossless", "[config]") {
    PipelineConfig cfg;
    cfg.levels = 3;
    cfg.k23_per_s = 5e6;
    cfg.k31_per_s = 3e5;
    cfg.eta = 0.0217;
    cfg.fix_rho = 0.9165151389911680;
    cfg.powers_uW = {50.0, 224.003, 1000.0};
    cfg.zpl_shape = "gaussian";
    cfg.seed = 987654321;
    cfg.output_dir = "elsewhere";

    std::ostringstream out;
    write_config(out, cfg);
    std::istringstream in(out.str());
    const auto back = parse_config_text(in, "roundtrip");

    CHECK(back.levels == cfg.levels);
    CHECK(back.k23_per_s == cfg.k23_per_s);
    CHECK(back.eta == cfg.eta);
    REQUIRE(back.fix_rho.has_value());
    CHECK(*back.fix_rho == *cfg.fix_rho);  // %.17g exact
    CHECK(back.powers_uW == cfg.powers_uW);
    CHECK(back.zpl_shape == cfg.zpl_shape);
    CHECK(back.seed == cfg.seed);
    CHECK(back.output_dir == cfg.output_dir);
}
