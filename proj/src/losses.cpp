#include "hawk/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace hawk {

void LossWeights::validate() const {
  if (t0 < 0.0 || t1 < 0.0 || t2 < 0.0)
    throw ConfigError("loss weights must be non-negative");
  if (!(std::isfinite(t0) && std::isfinite(t1) && std::isfinite(t2)))
    throw ConfigError("loss weights must be finite");
}

namespace {

void check_ce_shapes(const std::vector<double>& logits,
                     const std::vector<int>& target, int vocab_size) {
  if (target.empty()) throw InvalidInput("cross-entropy over empty target");
  if (vocab_size <= 0) throw InvalidInput("vocab_size must be positive");
  if (logits.size() != target.size() * static_cast<std::size_t>(vocab_size))
    throw InvalidInput("logits shape does not match target length");
}

double log_sum_exp(const double* row, int n, double* row_max) {
  double m = row[0];
  for (int i = 1; i < n; ++i) m = std::max(m, row[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(row[i] - m);
  *row_max = m;
  return m + std::log(s);
}

}  // namespace

double loss_vl(const std::vector<double>& logits,
               const std::vector<int>& target, int vocab_size,
               Reduction reduction) {
  check_ce_shapes(logits, target, vocab_size);
  const std::size_t n = target.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int t = target[i];
    if (t < 0 || t >= vocab_size)
      throw InvalidInput("target id out of vocabulary range");
    const double* row = logits.data() + i * vocab_size;
    double m = 0.0;
    double lse = log_sum_exp(row, vocab_size, &m);
    sum += lse - row[t];
  }
  return reduction == Reduction::kMean ? sum / static_cast<double>(n) : sum;
}

double loss_vl_backward(const std::vector<double>& logits,
                        const std::vector<int>& target, int vocab_size,
                        Reduction reduction, double scale,
                        std::vector<double>* dlogits) {
  check_ce_shapes(logits, target, vocab_size);
  const std::size_t n = target.size();
  dlogits->assign(logits.size(), 0.0);
  double per_pos =
      reduction == Reduction::kMean ? scale / static_cast<double>(n) : scale;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int t = target[i];
    if (t < 0 || t >= vocab_size)
      throw InvalidInput("target id out of vocabulary range");
    const double* row = logits.data() + i * vocab_size;
    double* drow = dlogits->data() + i * vocab_size;
    double m = 0.0;
    double lse = log_sum_exp(row, vocab_size, &m);
    sum += lse - row[t];
    double denom = std::exp(lse - m);
    for (int v = 0; v < vocab_size; ++v) {
      double p = std::exp(row[v] - m) / denom;
      drow[v] += per_pos * (p - (v == t ? 1.0 : 0.0));
    }
  }
  return reduction == Reduction::kMean ? sum / static_cast<double>(n) : sum;
}

CosineLossResult loss_mv(const std::vector<double>& cmp_motion,
                         const std::vector<double>& cmp_video) {
  if (cmp_motion.size() != cmp_video.size() || cmp_motion.empty())
    throw InvalidInput("cosine loss requires equal non-empty vectors");
  double mm = 0.0, vv = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < cmp_motion.size(); ++i) {
    mm += cmp_motion[i] * cmp_motion[i];
    vv += cmp_video[i] * cmp_video[i];
    mv += cmp_motion[i] * cmp_video[i];
  }
  double nm = std::sqrt(mm), nv = std::sqrt(vv);
  CosineLossResult r;
  if (nm <= 1e-12 || nv <= 1e-12) {
    r.degenerate = true;
    return r;
  }
  r.value = 1.0 - mv / (nm * nv);
  return r;
}

CosineLossResult loss_mv_backward(const std::vector<double>& cmp_motion,
                                  const std::vector<double>& cmp_video,
                                  double scale, std::vector<double>* dmotion,
                                  std::vector<double>* dvideo) {
  CosineLossResult r = loss_mv(cmp_motion, cmp_video);
  if (r.degenerate) return r;
  double mm = 0.0, vv = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < cmp_motion.size(); ++i) {
    mm += cmp_motion[i] * cmp_motion[i];
    vv += cmp_video[i] * cmp_video[i];
    mv += cmp_motion[i] * cmp_video[i];
  }
  double nm = std::sqrt(mm), nv = std::sqrt(vv);
  double inv = 1.0 / (nm * nv);
  if (dmotion->size() != cmp_motion.size()) dmotion->assign(cmp_motion.size(), 0.0);
  if (dvideo->size() != cmp_video.size()) dvideo->assign(cmp_video.size(), 0.0);
  // d(1 - cos)/dm = cos * m / |m|^2 - v / (|m||v|)
  double cosv = mv * inv;
  for (std::size_t i = 0; i < cmp_motion.size(); ++i) {
    (*dmotion)[i] += scale * (cosv * cmp_motion[i] / mm - cmp_video[i] * inv);
    (*dvideo)[i] += scale * (cosv * cmp_video[i] / vv - cmp_motion[i] * inv);
  }
  return r;
}

LossBreakdown total_loss(double l_vl, double l_mv, double l_ml,
                         const LossWeights& weights) {
  weights.validate();
  LossBreakdown b;
  b.l_vl = l_vl;
  b.l_mv = l_mv;
  b.l_ml = l_ml;
  b.total = weights.t0 * l_vl + weights.t1 * l_mv + weights.t2 * l_ml;
  return b;
}

GradCheckReport grad_check(ParamStore& params,
                           const std::function<double()>& loss_fn,
                           const std::function<double()>& backward_fn,
                           std::size_t n_probes, std::uint64_t seed,
                           double eps) {
  double base = backward_fn();
  if (!std::isfinite(base)) throw NumericalFailure("loss is non-finite");
  std::vector<double> analytic = params.raw_grads();

  std::vector<std::size_t> learnable;
  for (std::size_t b = 0; b < params.n_blocks(); ++b) {
    const ParamBlock& blk = params.block(b);
    if (blk.frozen) continue;
    for (std::size_t i = 0; i < blk.size; ++i)
      learnable.push_back(blk.offset + i);
  }
  if (learnable.empty()) throw InvalidInput("no learnable parameters");

  Rng rng(seed);
  GradCheckReport rep;
  std::vector<float>& values = params.raw_values();
  for (std::size_t p = 0; p < n_probes; ++p) {
    std::size_t idx = learnable[rng.uniform_index(learnable.size())];
    float saved = values[idx];
    values[idx] = static_cast<float>(static_cast<double>(saved) + eps);
    double theta_hi = static_cast<double>(values[idx]);
    double f_hi = loss_fn();
    values[idx] = static_cast<float>(static_cast<double>(saved) - eps);
    double theta_lo = static_cast<double>(values[idx]);
    double f_lo = loss_fn();
    values[idx] = saved;
    if (!std::isfinite(f_hi) || !std::isfinite(f_lo))
      throw NumericalFailure("perturbed loss is non-finite");
    double delta = theta_hi - theta_lo;
    if (delta == 0.0) continue;  // parameter too large for eps at float32
    double numeric = (f_hi - f_lo) / delta;
    double a = analytic[idx];
    double rel = std::abs(a - numeric) /
                 std::max({std::abs(a), std::abs(numeric), 1e-8});
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
    ++rep.n_checked;
  }
  return rep;
}

double max_frozen_grad(const ParamStore& params) {
  double m = 0.0;
  const std::vector<double>& g = params.raw_grads();
  for (std::size_t b = 0; b < params.n_blocks(); ++b) {
    const ParamBlock& blk = params.block(b);
    if (!blk.frozen) continue;
    for (std::size_t i = 0; i < blk.size; ++i)
      m = std::max(m, std::abs(g[blk.offset + i]));
  }
  return m;
}

Trainer::Trainer(HawkModel* model, LossWeights weights, double lr,
                 AssembleMode mode, Reduction reduction)
    : model_(model), weights_(weights), lr_(lr), mode_(mode),
      reduction_(reduction) {
  weights_.validate();
  if (!(std::isfinite(lr) && lr > 0.0))
    throw ConfigError("learning rate must be positive");
  if (mode == AssembleMode::kMotionOnly)
    throw ConfigError("training mode must keep the video branch");
}

LossBreakdown Trainer::run_batch(const std::vector<TrainSample>& batch,
                                 bool with_grads, EvalMetrics* metrics) const {
  if (batch.empty()) throw InvalidInput("empty training batch");
  const int vsize = model_->vocab().size();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const bool use_motion = mode_ != AssembleMode::kVideoOnly;

  double sum_vl = 0.0, sum_mv = 0.0, sum_ml = 0.0;
  int degenerate = 0;
  double sum_cos = 0.0, sum_mce = 0.0;
  int n_cos = 0, n_mce = 0;
  std::vector<double> dlogits, dvp, dmp, dmp2, dcm, dcv;
  const std::vector<double> kEmpty;

  for (const TrainSample& s : batch) {
    BranchCache bv, bm;
    model_->branch_forward(0, s.tok_v, &bv);
    if (use_motion) model_->branch_forward(1, s.tok_m, &bm);

    SequenceCache sc;
    model_->forward(bv.proj, use_motion ? bm.proj : kEmpty, s.prompt,
                    s.target, mode_, &sc);
    double lvl = loss_vl(sc.logits, s.target, vsize, reduction_);
    sum_vl += lvl;

    dvp.clear();
    dmp.clear();
    if (with_grads && weights_.t0 > 0.0) {
      loss_vl_backward(sc.logits, s.target, vsize, reduction_,
                       weights_.t0 * inv_b, &dlogits);
      model_->backward(sc, dlogits, &dvp, &dmp);
    }

    dcm.assign(bm.cmp.size(), 0.0);
    dcv.assign(bv.cmp.size(), 0.0);
    bool have_cos_grad = false;
    if (use_motion) {
      CosineLossResult mv;
      if (with_grads && weights_.t1 > 0.0) {
        mv = loss_mv_backward(bm.cmp, bv.cmp, weights_.t1 * inv_b, &dcm, &dcv);
        have_cos_grad = !mv.degenerate;
      } else {
        mv = loss_mv(bm.cmp, bv.cmp);
      }
      if (mv.degenerate) {
        ++degenerate;
      } else {
        sum_mv += mv.value;
        sum_cos += 1.0 - mv.value;
        ++n_cos;
      }
    }

    dmp2.clear();
    if (use_motion && !s.motion_target.empty()) {
      SequenceCache sm;
      model_->forward(kEmpty, bm.proj, s.prompt_motion, s.motion_target,
                      AssembleMode::kMotionOnly, &sm);
      double lml = loss_vl(sm.logits, s.motion_target, vsize, reduction_);
      sum_ml += lml;
      sum_mce += lml;
      ++n_mce;
      if (with_grads && weights_.t2 > 0.0) {
        loss_vl_backward(sm.logits, s.motion_target, vsize, reduction_,
                         weights_.t2 * inv_b, &dlogits);
        std::vector<double> unused;
        model_->backward(sm, dlogits, &unused, &dmp2);
      }
    }

    if (with_grads) {
      if (!dvp.empty() || have_cos_grad)
        model_->branch_backward(0, bv, dvp, have_cos_grad ? dcv : kEmpty);
      if (use_motion) {
        if (!dmp.empty() && !dmp2.empty()) {
          for (std::size_t i = 0; i < dmp.size(); ++i) dmp[i] += dmp2[i];
        } else if (dmp.empty()) {
          dmp = dmp2;
        }
        if (!dmp.empty() || have_cos_grad)
          model_->branch_backward(1, bm, dmp, have_cos_grad ? dcm : kEmpty);
      }
    }
  }

  LossBreakdown b = total_loss(sum_vl * inv_b, sum_mv * inv_b, sum_ml * inv_b,
                               weights_);
  b.degenerate = degenerate;
  if (metrics) {
    metrics->loss = b;
    metrics->n_cosine = n_cos;
    metrics->mean_cosine = n_cos > 0 ? sum_cos / n_cos : 0.0;
    metrics->n_motion = n_mce;
    metrics->motion_ce = n_mce > 0 ? sum_mce / n_mce : 0.0;
  }
  return b;
}

LossBreakdown Trainer::accumulate_gradients(
    const std::vector<TrainSample>& batch) {
  return run_batch(batch, true, nullptr);
}

LossBreakdown Trainer::batch_loss(const std::vector<TrainSample>& batch) const {
  return run_batch(batch, false, nullptr);
}

EvalMetrics Trainer::evaluate(const std::vector<TrainSample>& batch) const {
  EvalMetrics m;
  run_batch(batch, false, &m);
  return m;
}

LossBreakdown Trainer::train_step(const std::vector<TrainSample>& batch) {
  ParamStore& ps = model_->params();
  ps.zero_grads();
  LossBreakdown b = run_batch(batch, true, nullptr);
  if (!std::isfinite(b.total))
    throw NumericalFailure("training loss is non-finite");
  const std::vector<double>& g = ps.raw_grads();
  for (std::size_t blk = 0; blk < ps.n_blocks(); ++blk) {
    if (ps.block(blk).frozen) continue;
    const ParamBlock& pb = ps.block(blk);
    for (std::size_t i = pb.offset; i < pb.offset + pb.size; ++i) {
      if (!std::isfinite(g[i]))
        throw NumericalFailure("gradient is non-finite at " + pb.name);
    }
  }
  std::vector<float>& vals = ps.raw_values();
  for (std::size_t blk = 0; blk < ps.n_blocks(); ++blk) {
    const ParamBlock& pb = ps.block(blk);
    if (pb.frozen) continue;
    for (std::size_t i = pb.offset; i < pb.offset + pb.size; ++i)
      vals[i] = static_cast<float>(static_cast<double>(vals[i]) - lr_ * g[i]);
  }
  return b;
}

}  // namespace hawk
