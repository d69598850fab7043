#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hawk/common.hpp"
#include "hawk/vocab.hpp"

namespace hawk {

struct ModelConfig {
  int t = 8, c = 3, h = 64, w = 64;
  int d_enc = 64, d_mid = 32, d_emb = 32, d_cmp = 8, k = 8;
  int d_ff = 64;
  int pool = 8;  // average-pool patch edge, h and w must divide by it
  std::uint64_t encoder_seed = 0;

  int encoder_in_dim() const { return c * (h / pool) * (w / pool); }
  int encoder_out_dim() const { return k * d_enc; }
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool frozen = false;
};

class ParamStore {
 public:
  std::size_t add_block(const std::string& name, std::size_t size,
                        bool frozen);
  const ParamBlock& block(std::size_t i) const { return blocks_[i]; }
  std::size_t n_blocks() const { return blocks_.size(); }
  const ParamBlock* find(const std::string& name) const;

  float* values(std::size_t block) { return values_.data() + blocks_[block].offset; }
  const float* values(std::size_t block) const {
    return values_.data() + blocks_[block].offset;
  }
  double* grads(std::size_t block) { return grads_.data() + blocks_[block].offset; }

  std::vector<float>& raw_values() { return values_; }
  const std::vector<float>& raw_values() const { return values_; }
  std::vector<double>& raw_grads() { return grads_; }
  const std::vector<double>& raw_grads() const { return grads_; }

  std::size_t total_size() const { return values_.size(); }
  bool frozen_at(std::size_t flat) const;
  void zero_grads();

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<float> values_;
  std::vector<double> grads_;
};

enum class AssembleMode { kFull, kMotionOnly, kVideoOnly };

struct BranchCache {
  std::vector<double> in;     // k × d_enc
  std::vector<double> mid;    // k × d_mid
  std::vector<double> proj;   // k × d_emb
  std::vector<double> tight;  // k × d_cmp
  std::vector<double> cmp;    // d_cmp, mean over k
};

// Provenance of one sequence position: either a vocabulary embedding row
// or one of the k projected rows of a branch.
struct EmbedSlot {
  int token_id = -1;
  int branch = -1;  // 0 = video, 1 = motion
  int row = -1;
};

struct SequenceCache {
  std::vector<EmbedSlot> slots;
  int len = 0;       // L = n_prefix + n_target
  int n_prefix = 0;  // prompt incl. inserted branch rows, plus nothing else
  int n_target = 0;  // N
  std::vector<double> x0, q, k, v, attn, av, ao, x1, ffp, ffh, f2, x2;
  std::vector<double> logits;  // n_target × V
};

class HawkModel {
 public:
  HawkModel(const ModelConfig& cfg, const Vocabulary& vocab,
            std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return *vocab_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Frozen encoders f_v / f_m: 8x8 average-pool patches per frame, one
  // affine map, mean over time; k tokens of width d_enc.
  std::vector<double> encode_video(const std::vector<float>& frames) const;
  std::vector<double> encode_motion(const std::vector<float>& frames) const;

  // branch 0 = video (P_v / C_v), 1 = motion (P_m / C_m).
  void branch_forward(int branch, const std::vector<double>& tokens,
                      BranchCache* cache) const;
  // dproj (k × d_emb) and/or dcmp (d_cmp) may be empty; gradients land in
  // the store, the shared shallow layer receiving both paths.
  void branch_backward(int branch, const BranchCache& cache,
                       const std::vector<double>& dproj,
                       const std::vector<double>& dcmp);

  std::vector<int> build_prompt(const std::string& task_text,
                                AssembleMode mode) const;

  // Embedding sequence assembly plus the decoder pass under teacher
  // forcing; logits cover the n_target positions.
  void forward(const std::vector<double>& video_proj,
               const std::vector<double>& motion_proj,
               const std::vector<int>& prompt_ids,
               const std::vector<int>& target_ids, AssembleMode mode,
               SequenceCache* cache) const;

  // dlogits is n_target × V; returns gradients w.r.t. the inserted branch
  // projections (empty when that branch is absent from the sequence).
  void backward(const SequenceCache& cache, const std::vector<double>& dlogits,
                std::vector<double>* dvideo_proj,
                std::vector<double>* dmotion_proj);

  TokenSequence generate_greedy(const std::vector<double>& video_proj,
                                const std::vector<double>& motion_proj,
                                const std::vector<int>& prompt_ids,
                                AssembleMode mode, int max_len) const;

  std::string save_checkpoint() const;
  static HawkModel load_checkpoint(std::string_view data);

 private:
  void init_params(std::uint64_t init_seed);
  std::vector<double> encode(const std::vector<float>& frames,
                             std::size_t w_block, std::size_t b_block) const;
  void decoder_forward(SequenceCache* cache) const;

  ModelConfig cfg_;
  const Vocabulary* vocab_;
  ParamStore params_;

  // block handles
  std::size_t enc_v_w_, enc_v_b_, enc_m_w_, enc_m_b_;
  std::size_t shared_w_[2], shared_b_[2], head_w_[2], head_b_[2];
  std::size_t tight_w_[2], tight_b_[2];
  std::size_t embed_;
  std::size_t wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_;
  std::size_t w1_, b1_, w2_, b2_;
  std::size_t wout_, bout_;
};

}  // namespace hawk
