#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "worm/config.hpp"

using namespace worm;
using namespace worm::config;

namespace {

std::string model_text() {
  std::ifstream in(WORM_SOURCE_DIR "/configs/model.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without(const std::string& section, const std::string& key) {
  auto j = nlohmann::json::parse(model_text());
  j[section].erase(key);
  return j.dump();
}

}  // namespace

TEST_CASE("shipped configuration parses and round-trips") {
  const auto cfg = load_config(WORM_SOURCE_DIR "/configs/model.json");
  CHECK(cfg.worm.r_flat == 0.5);
  CHECK(cfg.estimates.prop2.s_grid.size() == 21);
  CHECK(cfg.estimates.prop2.s_grid.front() == doctest::Approx(1.6));
  CHECK(cfg.estimates.prop2.s_grid.back() == doctest::Approx(2.6));
  CHECK(cfg.estimates.bound51.gammas.size() == 41);
  const auto again = parse_config(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("missing and unknown fields are named") {
  try {
    parse_config(without("spectrum", "tol"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "spectrum.tol");
    CHECK(std::string(e.what()).find("spectrum.tol") != std::string::npos);
  }
  auto j = nlohmann::json::parse(model_text());
  j["scan"]["bogus"] = 1;
  try {
    parse_config(j.dump());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "scan.bogus");
  }
}

TEST_CASE("type errors name the field") {
  auto j = nlohmann::json::parse(model_text());
  j["scan"]["nx"] = "many";
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(model_text());
  j["estimates"]["lemma5"]["achoice"] = "bogus";
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
}

TEST_CASE("parse errors report a line") {
  try {
    parse_config("{\n  \"seed\": 1,\n  oops\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("overrides walk objects and arrays") {
  const auto text = model_text();
  const auto cfg = parse_config(text, {Override::parse("spectrum.box.1=3.5"), Override::parse("seed=7"),
                                       Override::parse("estimates.lemma5.achoice=zero")});
  CHECK(cfg.spectrum.box.re_max == 3.5);
  CHECK(cfg.seed == 7);
  CHECK(cfg.estimates.lemma5.achoice == AChoice::kZero);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("spectrum.nope=1")}), ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("spectrum.box.9=1")}), ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("spectrum.box.x=1")}), ConfigError);
  CHECK_THROWS(Override::parse("no-equals-sign"));
}

TEST_CASE("hash ignores jobs and output_dir but not the seed") {
  const auto text = model_text();
  const auto base = config_hash(parse_config(text));
  CHECK(config_hash(parse_config(text, {Override::parse("jobs=8")})) == base);
  CHECK(config_hash(parse_config(text, {Override::parse("output_dir=elsewhere")})) == base);
  CHECK(config_hash(parse_config(text, {Override::parse("seed=99")})) != base);
  CHECK(config_hash(parse_config(text, {Override::parse("spectrum.tol=1e-9")})) != base);
}

TEST_CASE("cross-field validation") {
  const auto text = model_text();
  CHECK_THROWS_AS(parse_config(text, {Override::parse("exceptional.s_min=4"), Override::parse("exceptional.s_max=2")}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("spectrum.tol=1e-3")}), ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("worm.phi.M=2")}), ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("ode.a=[0, 1]")}), ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("spectrum.box=[1, 0, 0, 1]")}), ConfigError);
  CHECK_THROWS_AS(parse_config(text, {Override::parse("jobs=0")}), ConfigError);
}

TEST_CASE("range expansion") {
  const auto v = expand_range(1.6, 2.6, 0.05);
  CHECK(v.size() == 21);
  CHECK(v[8] == doctest::Approx(2.0));
  CHECK(expand_range(0.0, 0.0, 1.0).size() == 1);
  CHECK_THROWS_AS(expand_range(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(expand_range(1.0, 0.0, 0.1), std::invalid_argument);
}
