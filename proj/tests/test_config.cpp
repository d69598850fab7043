#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "hawk/config.hpp"

using namespace hawk;

namespace {

RunConfig parsed(const std::string& text) { return parse_config(text); }

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
    FAIL("expected ConfigError for: " << text);
  } catch (const ConfigError& e) {
    std::string what = e.what();
    CAPTURE(text);
    CAPTURE(what);
    CHECK(what.find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("defaults are the documented baseline") {
  RunConfig cfg;
  CHECK(cfg.t == 8);
  CHECK(cfg.t_raw == 12);
  CHECK(cfg.c == 3);
  CHECK(cfg.h == 64);
  CHECK(cfg.w == 64);
  CHECK(cfg.fps == 10);
  CHECK(cfg.pool == 8);
  CHECK(cfg.d_enc == 64);
  CHECK(cfg.d_mid == 32);
  CHECK(cfg.d_emb == 32);
  CHECK(cfg.d_cmp == 8);
  CHECK(cfg.k == 8);
  CHECK(cfg.d_ff == 64);
  CHECK(cfg.flow_poly_n == 5);
  CHECK(cfg.flow_poly_sigma == doctest::Approx(1.1));
  CHECK(cfg.flow_win == 13);
  CHECK(cfg.flow_iterations == 3);
  CHECK(cfg.flow_levels == 3);
  CHECK(cfg.flow_pyr_scale == doctest::Approx(0.5));
  CHECK(cfg.t0 == 1.0);
  CHECK(cfg.t1 == 0.1);
  CHECK(cfg.t2 == 0.1);
  CHECK(cfg.lr == doctest::Approx(0.02));
  CHECK(cfg.ce_reduction == "mean");
  CHECK(cfg.stage1_steps == 50);
  CHECK(cfg.stage2_steps == 200);
  CHECK(cfg.stage1_clips == 32);
  CHECK(cfg.clips == 64);
  CHECK(cfg.k_questions == 1);
  CHECK(cfg.segment_len == 4);
  CHECK(cfg.client == "mock");
  CHECK(cfg.endpoint.empty());
  CHECK(cfg.timeout == doctest::Approx(5.0));
  CHECK(cfg.max_retries == 2);
  CHECK(cfg.seed == 0);
  CHECK(cfg.max_gen_len == 24);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("empty and comment-only documents parse to the defaults") {
  RunConfig cfg = parsed("");
  CHECK(cfg.t == 8);
  RunConfig cfg2 = parsed("# just a comment\n\n   \n# another\n");
  CHECK(cfg2.clips == 64);
}

TEST_CASE("key = value lines accept comments and loose spacing") {
  RunConfig cfg = parsed(
      "# run shape\n"
      "t = 4\n"
      "t_raw=8   # inline comment\n"
      "  lr =0.05\n"
      "\tseed\t=\t9\r\n"
      "client = mock\n"
      "\n"
      "stage2_steps = 7");
  CHECK(cfg.t == 4);
  CHECK(cfg.t_raw == 8);
  CHECK(cfg.lr == doctest::Approx(0.05));
  CHECK(cfg.seed == 9);
  CHECK(cfg.stage2_steps == 7);
}

TEST_CASE("derived sub-configs mirror the run config") {
  RunConfig cfg = parsed("seed = 123\nt = 4\npool = 16\nd_cmp = 6\n");
  ModelConfig mc = cfg.model_config();
  CHECK(mc.t == 4);
  CHECK(mc.c == 3);
  CHECK(mc.h == 64);
  CHECK(mc.w == 64);
  CHECK(mc.pool == 16);
  CHECK(mc.d_cmp == 6);
  CHECK(mc.encoder_seed == derive_seed(123, "frozen_encoders"));

  FlowParams fp = cfg.flow_params();
  CHECK(fp.poly_n == 5);
  CHECK(fp.poly_sigma == doctest::Approx(1.1));
  CHECK(fp.win == 13);
  CHECK(fp.iterations == 3);
  CHECK(fp.levels == 3);
  CHECK(fp.pyr_scale == doctest::Approx(0.5));

  LossWeights w = cfg.weights();
  CHECK(w.t0 == 1.0);
  CHECK(w.t1 == 0.1);
  CHECK(w.t2 == 0.1);

  CHECK(cfg.reduction() == Reduction::kMean);
  CHECK(parsed("ce_reduction = sum\n").reduction() == Reduction::kSum);

  RunConfig remote = parsed(
      "client = remote\nendpoint = http://127.0.0.1:1234/v1\n"
      "timeout = 2.5\nmax_retries = 4\n");
  RemoteClientConfig rc = remote.remote_config();
  CHECK(rc.endpoint == "http://127.0.0.1:1234/v1");
  CHECK(rc.timeout_s == doctest::Approx(2.5));
  CHECK(rc.max_retries == 4);
}

TEST_CASE("malformed lines name the problem") {
  expect_config_error("t = 4\nnot a key value line\n", "line 2");
  expect_config_error("= 4\n", "empty key");
  expect_config_error("warp_speed = 9\n", "unknown config key: warp_speed");
  expect_config_error("t = fast\n", "bad integer for t");
  expect_config_error("t = 4.5\n", "bad integer for t");
  expect_config_error("lr = quick\n", "bad number for lr");
  expect_config_error("seed = 1x\n", "bad seed");
  expect_config_error("seed = \n", "bad seed");
}

TEST_CASE("validation walks every range rule") {
  expect_config_error("t = 13\n", "2 <= t <= t_raw");
  expect_config_error("t = 1\n", "2 <= t <= t_raw");
  expect_config_error("c = 0\n", "bad frame shape");
  expect_config_error("pool = 7\n", "pool must divide");
  expect_config_error("pool = 0\n", "pool must divide");
  expect_config_error("d_emb = 0\n", "model dimensions");
  expect_config_error("k = -2\n", "model dimensions");
  expect_config_error("flow_poly_n = 4\n", "flow_poly_n");
  expect_config_error("flow_poly_n = 1\n", "flow_poly_n");
  expect_config_error("flow_poly_sigma = 0\n", "flow_poly_sigma");
  expect_config_error("flow_win = 8\n", "flow_win");
  expect_config_error("flow_iterations = 0\n", "iterations");
  expect_config_error("flow_levels = 0\n", "levels");
  expect_config_error("flow_pyr_scale = 1.0\n", "flow_pyr_scale");
  expect_config_error("flow_pyr_scale = 0\n", "flow_pyr_scale");
  expect_config_error("t1 = -0.1\n", "");
  expect_config_error("lr = 0\n", "lr must be positive");
  expect_config_error("ce_reduction = median\n", "ce_reduction");
  expect_config_error("stage1_steps = -1\n", "step counts");
  expect_config_error("stage1_clips = 0\n", "stage1_clips");
  expect_config_error("clips = -1\n", "clips must be >= 0");
  expect_config_error("k_questions = 0\n", "k_questions");
  expect_config_error("k_questions = 101\n", "k_questions");
  expect_config_error("segment_len = 0\n", "segment_len");
  expect_config_error("client = carrier_pigeon\n", "client must be");
  expect_config_error("client = remote\n", "needs an endpoint");
  expect_config_error("timeout = 0\n", "timeout");
  expect_config_error("max_retries = -1\n", "max_retries");
  expect_config_error("max_gen_len = 0\n", "max_gen_len");
  CHECK_NOTHROW(parsed("clips = 0\n"));
  CHECK_NOTHROW(parsed("stage1_steps = 0\nstage2_steps = 0\n"));
}

TEST_CASE("config files load from disk") {
  std::filesystem::path path =
      std::filesystem::temp_directory_path() / "hawk_test_config.cfg";
  write_file(path.string(), "t = 6\nt_raw = 10\nclips = 20\n");
  RunConfig cfg = load_config_file(path.string());
  CHECK(cfg.t == 6);
  CHECK(cfg.t_raw == 10);
  CHECK(cfg.clips == 20);
  std::remove(path.string().c_str());
  CHECK_THROWS_AS(load_config_file(path.string()), InvalidInput);
}
