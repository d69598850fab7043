#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hawk/model.hpp"

namespace hawk {

struct LossWeights {
  double t0 = 1.0;
  double t1 = 0.1;
  double t2 = 0.1;

  void validate() const;
};

struct LossBreakdown {
  double l_vl = 0.0;
  double l_mv = 0.0;
  double l_ml = 0.0;
  double total = 0.0;
  int degenerate = 0;  // samples whose compressed embeddings were near zero
};

enum class Reduction { kMean, kSum };

// Token cross-entropy of softmax(logits) against the target ids.
double loss_vl(const std::vector<double>& logits,
               const std::vector<int>& target, int vocab_size,
               Reduction reduction = Reduction::kMean);

// Same value; fills dlogits with scale * dLoss/dlogits, replacing any
// previous contents.
double loss_vl_backward(const std::vector<double>& logits,
                        const std::vector<int>& target, int vocab_size,
                        Reduction reduction, double scale,
                        std::vector<double>* dlogits);

struct CosineLossResult {
  double value = 0.0;
  bool degenerate = false;  // a norm was <= 1e-12; term skipped
};

// 1 - cos(motion, video), in [0, 2].
CosineLossResult loss_mv(const std::vector<double>& cmp_motion,
                         const std::vector<double>& cmp_video);
CosineLossResult loss_mv_backward(const std::vector<double>& cmp_motion,
                                  const std::vector<double>& cmp_video,
                                  double scale, std::vector<double>* dmotion,
                                  std::vector<double>* dvideo);

// Motion-language matching reuses the cross-entropy machinery against the
// extracted motion-phrase target.
inline double loss_ml(const std::vector<double>& motion_logits,
                      const std::vector<int>& motion_target, int vocab_size,
                      Reduction reduction = Reduction::kMean) {
  return loss_vl(motion_logits, motion_target, vocab_size, reduction);
}

LossBreakdown total_loss(double l_vl, double l_mv, double l_ml,
                         const LossWeights& weights);

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t n_checked = 0;
};

// backward_fn must zero the store, run forward+backward, and return the
// loss; loss_fn must be the matching pure forward evaluation.
GradCheckReport grad_check(ParamStore& params,
                           const std::function<double()>& loss_fn,
                           const std::function<double()>& backward_fn,
                           std::size_t n_probes, std::uint64_t seed,
                           double eps = 1e-4);

double max_frozen_grad(const ParamStore& params);

// ---------------------------------------------------------------------------
// Training

struct TrainSample {
  std::string record_id;
  std::string task;                    // "describe" or "qa"
  std::vector<double> tok_v, tok_m;    // frozen encoder outputs, k x d_enc
  std::vector<int> prompt;             // task prompt for the main pass
  std::vector<int> prompt_motion;      // motion-only prompt for L_ML
  std::vector<int> target;             // ends with <eos>
  std::vector<int> motion_target;      // empty when no motion phrases
};

struct EvalMetrics {
  LossBreakdown loss;
  double mean_cosine = 0.0;  // over non-degenerate samples
  int n_cosine = 0;
  double motion_ce = 0.0;    // over samples with a motion target
  int n_motion = 0;
};

class Trainer {
 public:
  Trainer(HawkModel* model, LossWeights weights, double lr,
          AssembleMode mode = AssembleMode::kFull,
          Reduction reduction = Reduction::kMean);

  // One full-batch gradient-descent update; frozen blocks untouched.
  LossBreakdown train_step(const std::vector<TrainSample>& batch);

  // Forward-only metrics (all three terms regardless of weights).
  EvalMetrics evaluate(const std::vector<TrainSample>& batch) const;

  // Accumulates weighted gradients for the batch into the store without
  // updating; returns the breakdown (grad-check entry point).
  LossBreakdown accumulate_gradients(const std::vector<TrainSample>& batch);
  LossBreakdown batch_loss(const std::vector<TrainSample>& batch) const;

  const LossWeights& weights() const { return weights_; }
  double learning_rate() const { return lr_; }

 private:
  LossBreakdown run_batch(const std::vector<TrainSample>& batch,
                          bool with_grads, EvalMetrics* metrics) const;

  HawkModel* model_;
  LossWeights weights_;
  double lr_;
  AssembleMode mode_;
  Reduction reduction_;
};

}  // namespace hawk
