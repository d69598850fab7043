#include "hawk/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>

namespace hawk {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": " + v);
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    unsigned long long r = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("bad seed for " + key + ": " + v);
  }
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "t") t = parse_int(key, value);
  else if (key == "t_raw") t_raw = parse_int(key, value);
  else if (key == "c") c = parse_int(key, value);
  else if (key == "h") h = parse_int(key, value);
  else if (key == "w") w = parse_int(key, value);
  else if (key == "fps") fps = parse_int(key, value);
  else if (key == "pool") pool = parse_int(key, value);
  else if (key == "d_enc") d_enc = parse_int(key, value);
  else if (key == "d_mid") d_mid = parse_int(key, value);
  else if (key == "d_emb") d_emb = parse_int(key, value);
  else if (key == "d_cmp") d_cmp = parse_int(key, value);
  else if (key == "k") k = parse_int(key, value);
  else if (key == "d_ff") d_ff = parse_int(key, value);
  else if (key == "flow_poly_n") flow_poly_n = parse_int(key, value);
  else if (key == "flow_poly_sigma") flow_poly_sigma = parse_double(key, value);
  else if (key == "flow_win") flow_win = parse_int(key, value);
  else if (key == "flow_iterations") flow_iterations = parse_int(key, value);
  else if (key == "flow_levels") flow_levels = parse_int(key, value);
  else if (key == "flow_pyr_scale") flow_pyr_scale = parse_double(key, value);
  else if (key == "t0") t0 = parse_double(key, value);
  else if (key == "t1") t1 = parse_double(key, value);
  else if (key == "t2") t2 = parse_double(key, value);
  else if (key == "lr") lr = parse_double(key, value);
  else if (key == "ce_reduction") ce_reduction = value;
  else if (key == "stage1_steps") stage1_steps = parse_int(key, value);
  else if (key == "stage2_steps") stage2_steps = parse_int(key, value);
  else if (key == "stage1_clips") stage1_clips = parse_int(key, value);
  else if (key == "clips") clips = parse_int(key, value);
  else if (key == "k_questions") k_questions = parse_int(key, value);
  else if (key == "segment_len") segment_len = parse_int(key, value);
  else if (key == "client") client = value;
  else if (key == "endpoint") endpoint = value;
  else if (key == "timeout") timeout = parse_double(key, value);
  else if (key == "max_retries") max_retries = parse_int(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "max_gen_len") max_gen_len = parse_int(key, value);
  else throw ConfigError("unknown config key: " + key);
}

void RunConfig::validate() const {
  if (t < 2 || t_raw < 2 || t > t_raw)
    throw ConfigError("need 2 <= t <= t_raw");
  if (c < 1 || h < 1 || w < 1) throw ConfigError("bad frame shape");
  if (pool < 1 || h % pool != 0 || w % pool != 0)
    throw ConfigError("pool must divide h and w");
  if (d_enc < 1 || d_mid < 1 || d_emb < 1 || d_cmp < 1 || k < 1 || d_ff < 1)
    throw ConfigError("model dimensions must be positive");
  if (flow_poly_n < 3 || flow_poly_n % 2 == 0)
    throw ConfigError("flow_poly_n must be odd and >= 3");
  if (flow_poly_sigma <= 0.0) throw ConfigError("flow_poly_sigma must be > 0");
  if (flow_win < 1 || flow_win % 2 == 0)
    throw ConfigError("flow_win must be odd and >= 1");
  if (flow_iterations < 1 || flow_levels < 1)
    throw ConfigError("flow iterations and levels must be >= 1");
  if (flow_pyr_scale <= 0.0 || flow_pyr_scale >= 1.0)
    throw ConfigError("flow_pyr_scale must be in (0, 1)");
  weights().validate();
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (ce_reduction != "mean" && ce_reduction != "sum")
    throw ConfigError("ce_reduction must be mean or sum");
  if (stage1_steps < 0 || stage2_steps < 0)
    throw ConfigError("step counts must be >= 0");
  if (stage1_clips < 1) throw ConfigError("stage1_clips must be >= 1");
  if (clips < 0) throw ConfigError("clips must be >= 0");
  if (k_questions < 1 || k_questions > 100)
    throw ConfigError("k_questions must be in 1..100");
  if (segment_len < 1) throw ConfigError("segment_len must be >= 1");
  if (client != "mock" && client != "remote")
    throw ConfigError("client must be mock or remote");
  if (client == "remote" && endpoint.empty())
    throw ConfigError("remote client needs an endpoint");
  if (timeout <= 0.0) throw ConfigError("timeout must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (max_gen_len < 1) throw ConfigError("max_gen_len must be >= 1");
}

ModelConfig RunConfig::model_config() const {
  ModelConfig mc;
  mc.t = t;
  mc.c = c;
  mc.h = h;
  mc.w = w;
  mc.d_enc = d_enc;
  mc.d_mid = d_mid;
  mc.d_emb = d_emb;
  mc.d_cmp = d_cmp;
  mc.k = k;
  mc.d_ff = d_ff;
  mc.pool = pool;
  mc.encoder_seed = derive_seed(seed, "frozen_encoders");
  return mc;
}

FlowParams RunConfig::flow_params() const {
  FlowParams fp;
  fp.poly_n = flow_poly_n;
  fp.poly_sigma = flow_poly_sigma;
  fp.win = flow_win;
  fp.iterations = flow_iterations;
  fp.levels = flow_levels;
  fp.pyr_scale = flow_pyr_scale;
  return fp;
}

LossWeights RunConfig::weights() const { return {t0, t1, t2}; }

RemoteClientConfig RunConfig::remote_config() const {
  RemoteClientConfig rc;
  rc.endpoint = endpoint;
  rc.timeout_s = timeout;
  rc.max_retries = max_retries;
  return rc;
}

Reduction RunConfig::reduction() const {
  return ce_reduction == "sum" ? Reduction::kSum : Reduction::kMean;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        " is not key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key on line " + std::to_string(line_no));
    cfg.apply(key, value);
    if (pos > text.size()) break;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  return parse_config(read_file(path));
}

}  // namespace hawk
