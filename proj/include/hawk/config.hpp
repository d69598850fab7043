#pragma once

#include <cstdint>
#include <string>

#include "hawk/losses.hpp"
#include "hawk/model.hpp"
#include "hawk/optical_flow.hpp"
#include "hawk/textgen.hpp"

namespace hawk {

// Flat key = value document with # comments; unknown keys rejected.
struct RunConfig {
  int t = 8;
  int t_raw = 12;
  int c = 3, h = 64, w = 64;
  int fps = 10;
  int pool = 8;
  int d_enc = 64, d_mid = 32, d_emb = 32, d_cmp = 8, k = 8, d_ff = 64;

  int flow_poly_n = 5;
  double flow_poly_sigma = 1.1;
  int flow_win = 13;
  int flow_iterations = 3;
  int flow_levels = 3;
  double flow_pyr_scale = 0.5;

  double t0 = 1.0, t1 = 0.1, t2 = 0.1;
  double lr = 0.02;
  std::string ce_reduction = "mean";
  int stage1_steps = 50;
  int stage2_steps = 200;
  int stage1_clips = 32;
  int clips = 64;

  int k_questions = 1;
  int segment_len = 4;

  std::string client = "mock";
  std::string endpoint;
  double timeout = 5.0;
  int max_retries = 2;

  std::uint64_t seed = 0;
  int max_gen_len = 24;

  void apply(const std::string& key, const std::string& value);
  void validate() const;

  ModelConfig model_config() const;
  FlowParams flow_params() const;
  LossWeights weights() const;
  RemoteClientConfig remote_config() const;
  Reduction reduction() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

}  // namespace hawk
