#include "hawk/model.hpp"

#include <algorithm>
#include <cmath>

namespace hawk {

namespace {

// y = W x + b with W stored row-major [out][in]
void affine(const float* w, const float* b, const double* x, double* y,
            int out, int in) {
  for (int o = 0; o < out; ++o) {
    double s = b ? static_cast<double>(b[o]) : 0.0;
    const float* wr = w + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) s += static_cast<double>(wr[i]) * x[i];
    y[o] = s;
  }
}

// dW += dy xᵀ, db += dy, dx += Wᵀ dy (dx may be null)
void affine_backward(const float* w, double* dw, double* db, const double* x,
                     const double* dy, double* dx, int out, int in) {
  for (int o = 0; o < out; ++o) {
    double g = dy[o];
    if (db) db[o] += g;
    double* dwr = dw + static_cast<std::size_t>(o) * in;
    const float* wr = w + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) {
      dwr[i] += g * x[i];
      if (dx) dx[i] += static_cast<double>(wr[i]) * g;
    }
  }
}

}  // namespace

std::size_t ParamStore::add_block(const std::string& name, std::size_t size,
                                  bool frozen) {
  ParamBlock b;
  b.name = name;
  b.offset = values_.size();
  b.size = size;
  b.frozen = frozen;
  blocks_.push_back(b);
  values_.resize(values_.size() + size, 0.0f);
  grads_.resize(values_.size(), 0.0);
  return blocks_.size() - 1;
}

const ParamBlock* ParamStore::find(const std::string& name) const {
  for (const ParamBlock& b : blocks_)
    if (b.name == name) return &b;
  return nullptr;
}

bool ParamStore::frozen_at(std::size_t flat) const {
  for (const ParamBlock& b : blocks_)
    if (flat >= b.offset && flat < b.offset + b.size) return b.frozen;
  throw InvalidInput("parameter index out of range");
}

void ParamStore::zero_grads() {
  std::fill(grads_.begin(), grads_.end(), 0.0);
}

HawkModel::HawkModel(const ModelConfig& cfg, const Vocabulary& vocab,
                     std::uint64_t init_seed)
    : cfg_(cfg), vocab_(&vocab) {
  if (cfg_.h % cfg_.pool != 0 || cfg_.w % cfg_.pool != 0)
    throw ConfigError("frame size must divide the pooling patch size");
  if (cfg_.t < 1 || cfg_.k < 1 || cfg_.d_enc < 1 || cfg_.d_mid < 1 ||
      cfg_.d_emb < 1 || cfg_.d_cmp < 1 || cfg_.d_ff < 1)
    throw ConfigError("model dimensions must be positive");

  int v = vocab_->size();
  int in_dim = cfg_.encoder_in_dim();
  int out_dim = cfg_.encoder_out_dim();
  enc_v_w_ = params_.add_block("enc_v_w", static_cast<std::size_t>(out_dim) * in_dim, true);
  enc_v_b_ = params_.add_block("enc_v_b", out_dim, true);
  enc_m_w_ = params_.add_block("enc_m_w", static_cast<std::size_t>(out_dim) * in_dim, true);
  enc_m_b_ = params_.add_block("enc_m_b", out_dim, true);
  const char* branch_tag[2] = {"v", "m"};
  for (int br = 0; br < 2; ++br) {
    std::string tag = branch_tag[br];
    shared_w_[br] = params_.add_block("shared_" + tag + "_w",
                                      static_cast<std::size_t>(cfg_.d_mid) * cfg_.d_enc, false);
    shared_b_[br] = params_.add_block("shared_" + tag + "_b", cfg_.d_mid, false);
    head_w_[br] = params_.add_block("head_" + tag + "_w",
                                    static_cast<std::size_t>(cfg_.d_emb) * cfg_.d_mid, false);
    head_b_[br] = params_.add_block("head_" + tag + "_b", cfg_.d_emb, false);
    tight_w_[br] = params_.add_block("tight_" + tag + "_w",
                                     static_cast<std::size_t>(cfg_.d_cmp) * cfg_.d_mid, false);
    tight_b_[br] = params_.add_block("tight_" + tag + "_b", cfg_.d_cmp, false);
  }
  embed_ = params_.add_block("embed", static_cast<std::size_t>(v) * cfg_.d_emb, false);
  wq_ = params_.add_block("wq", static_cast<std::size_t>(cfg_.d_emb) * cfg_.d_emb, false);
  bq_ = params_.add_block("bq", cfg_.d_emb, false);
  wk_ = params_.add_block("wk", static_cast<std::size_t>(cfg_.d_emb) * cfg_.d_emb, false);
  bk_ = params_.add_block("bk", cfg_.d_emb, false);
  wv_ = params_.add_block("wv", static_cast<std::size_t>(cfg_.d_emb) * cfg_.d_emb, false);
  bv_ = params_.add_block("bv", cfg_.d_emb, false);
  wo_ = params_.add_block("wo", static_cast<std::size_t>(cfg_.d_emb) * cfg_.d_emb, false);
  bo_ = params_.add_block("bo", cfg_.d_emb, false);
  w1_ = params_.add_block("w1", static_cast<std::size_t>(cfg_.d_ff) * cfg_.d_emb, false);
  b1_ = params_.add_block("b1", cfg_.d_ff, false);
  w2_ = params_.add_block("w2", static_cast<std::size_t>(cfg_.d_emb) * cfg_.d_ff, false);
  b2_ = params_.add_block("b2", cfg_.d_emb, false);
  wout_ = params_.add_block("wout", static_cast<std::size_t>(v) * cfg_.d_emb, false);
  bout_ = params_.add_block("bout", v, false);

  init_params(init_seed);
}

void HawkModel::init_params(std::uint64_t init_seed) {
  auto fill_normal = [&](std::size_t block, std::uint64_t seed, double sigma) {
    Rng rng(seed);
    float* p = params_.values(block);
    const ParamBlock& b = params_.block(block);
    for (std::size_t i = 0; i < b.size; ++i)
      p[i] = static_cast<float>(rng.normal(0.0, sigma));
  };
  int in_dim = cfg_.encoder_in_dim();
  fill_normal(enc_v_w_, derive_seed(cfg_.encoder_seed, "enc_v_w"),
              1.0 / std::sqrt(static_cast<double>(in_dim)));
  fill_normal(enc_m_w_, derive_seed(cfg_.encoder_seed, "enc_m_w"),
              1.0 / std::sqrt(static_cast<double>(in_dim)));
  fill_normal(enc_v_b_, derive_seed(cfg_.encoder_seed, "enc_v_b"), 0.1);
  fill_normal(enc_m_b_, derive_seed(cfg_.encoder_seed, "enc_m_b"), 0.1);

  auto init_weight = [&](std::size_t block, int fan_in) {
    fill_normal(block, derive_seed(init_seed, params_.block(block).name),
                1.0 / std::sqrt(static_cast<double>(fan_in)));
  };
  for (int br = 0; br < 2; ++br) {
    init_weight(shared_w_[br], cfg_.d_enc);
    init_weight(head_w_[br], cfg_.d_mid);
    init_weight(tight_w_[br], cfg_.d_mid);
  }
  fill_normal(embed_, derive_seed(init_seed, "embed"), 0.5);
  init_weight(wq_, cfg_.d_emb);
  init_weight(wk_, cfg_.d_emb);
  init_weight(wv_, cfg_.d_emb);
  init_weight(wo_, cfg_.d_emb);
  init_weight(w1_, cfg_.d_emb);
  init_weight(w2_, cfg_.d_ff);
  init_weight(wout_, cfg_.d_emb);
  // biases stay zero
}

std::vector<double> HawkModel::encode(const std::vector<float>& frames,
                                      std::size_t w_block,
                                      std::size_t b_block) const {
  std::size_t expect = static_cast<std::size_t>(cfg_.t) * cfg_.c * cfg_.h * cfg_.w;
  if (frames.size() != expect)
    throw InvalidInput("encoder input has wrong shape: got " +
                       std::to_string(frames.size()) + " values, want " +
                       std::to_string(expect));
  int gh = cfg_.h / cfg_.pool, gw = cfg_.w / cfg_.pool;
  int in_dim = cfg_.encoder_in_dim();
  int out_dim = cfg_.encoder_out_dim();
  std::size_t plane = static_cast<std::size_t>(cfg_.h) * cfg_.w;
  double inv_pool = 1.0 / (cfg_.pool * cfg_.pool);

  std::vector<double> feat(in_dim), frame_out(out_dim), acc(out_dim, 0.0);
  for (int t = 0; t < cfg_.t; ++t) {
    const float* fr = frames.data() + static_cast<std::size_t>(t) * cfg_.c * plane;
    int fi = 0;
    for (int ch = 0; ch < cfg_.c; ++ch)
      for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px) {
          double s = 0;
          for (int y = py * cfg_.pool; y < (py + 1) * cfg_.pool; ++y)
            for (int x = px * cfg_.pool; x < (px + 1) * cfg_.pool; ++x)
              s += fr[ch * plane + static_cast<std::size_t>(y) * cfg_.w + x];
          feat[fi++] = s * inv_pool;
        }
    affine(params_.values(w_block), params_.values(b_block), feat.data(),
           frame_out.data(), out_dim, in_dim);
    for (int i = 0; i < out_dim; ++i) acc[i] += frame_out[i];
  }
  for (double& v : acc) v /= cfg_.t;
  return acc;  // k rows of d_enc
}

std::vector<double> HawkModel::encode_video(
    const std::vector<float>& frames) const {
  return encode(frames, enc_v_w_, enc_v_b_);
}

std::vector<double> HawkModel::encode_motion(
    const std::vector<float>& frames) const {
  return encode(frames, enc_m_w_, enc_m_b_);
}

void HawkModel::branch_forward(int branch, const std::vector<double>& tokens,
                               BranchCache* cache) const {
  if (branch < 0 || branch > 1) throw InvalidInput("branch must be 0 or 1");
  if (tokens.size() != static_cast<std::size_t>(cfg_.k) * cfg_.d_enc)
    throw InvalidInput("branch input must be k x d_enc");
  cache->in = tokens;
  cache->mid.assign(static_cast<std::size_t>(cfg_.k) * cfg_.d_mid, 0.0);
  cache->proj.assign(static_cast<std::size_t>(cfg_.k) * cfg_.d_emb, 0.0);
  cache->tight.assign(static_cast<std::size_t>(cfg_.k) * cfg_.d_cmp, 0.0);
  cache->cmp.assign(cfg_.d_cmp, 0.0);
  for (int r = 0; r < cfg_.k; ++r) {
    const double* in = tokens.data() + static_cast<std::size_t>(r) * cfg_.d_enc;
    double* mid = cache->mid.data() + static_cast<std::size_t>(r) * cfg_.d_mid;
    affine(params_.values(shared_w_[branch]), params_.values(shared_b_[branch]),
           in, mid, cfg_.d_mid, cfg_.d_enc);
    affine(params_.values(head_w_[branch]), params_.values(head_b_[branch]),
           mid, cache->proj.data() + static_cast<std::size_t>(r) * cfg_.d_emb,
           cfg_.d_emb, cfg_.d_mid);
    double* tight = cache->tight.data() + static_cast<std::size_t>(r) * cfg_.d_cmp;
    affine(params_.values(tight_w_[branch]), params_.values(tight_b_[branch]),
           mid, tight, cfg_.d_cmp, cfg_.d_mid);
    for (int i = 0; i < cfg_.d_cmp; ++i) cache->cmp[i] += tight[i];
  }
  for (double& v : cache->cmp) v /= cfg_.k;
}

void HawkModel::branch_backward(int branch, const BranchCache& cache,
                                const std::vector<double>& dproj,
                                const std::vector<double>& dcmp) {
  std::vector<double> dmid(static_cast<std::size_t>(cfg_.k) * cfg_.d_mid, 0.0);
  std::vector<double> dtight_row(cfg_.d_cmp, 0.0);
  if (!dcmp.empty())
    for (int i = 0; i < cfg_.d_cmp; ++i) dtight_row[i] = dcmp[i] / cfg_.k;
  for (int r = 0; r < cfg_.k; ++r) {
    const double* mid = cache.mid.data() + static_cast<std::size_t>(r) * cfg_.d_mid;
    double* dmid_r = dmid.data() + static_cast<std::size_t>(r) * cfg_.d_mid;
    if (!dproj.empty())
      affine_backward(params_.values(head_w_[branch]),
                      params_.grads(head_w_[branch]),
                      params_.grads(head_b_[branch]), mid,
                      dproj.data() + static_cast<std::size_t>(r) * cfg_.d_emb,
                      dmid_r, cfg_.d_emb, cfg_.d_mid);
    if (!dcmp.empty())
      affine_backward(params_.values(tight_w_[branch]),
                      params_.grads(tight_w_[branch]),
                      params_.grads(tight_b_[branch]), mid, dtight_row.data(),
                      dmid_r, cfg_.d_cmp, cfg_.d_mid);
    // shared shallow layer: gradient but no propagation into the frozen
    // encoder tokens
    affine_backward(params_.values(shared_w_[branch]),
                    params_.grads(shared_w_[branch]),
                    params_.grads(shared_b_[branch]),
                    cache.in.data() + static_cast<std::size_t>(r) * cfg_.d_enc,
                    dmid_r, nullptr, cfg_.d_mid, cfg_.d_enc);
  }
}

std::vector<int> HawkModel::build_prompt(const std::string& task_text,
                                         AssembleMode mode) const {
  std::string tpl;
  switch (mode) {
    case AssembleMode::kFull:
      tpl = "here is the input video embedding : <video_emb> and motion "
            "embedding <motion_emb> in different frames , please help me to ";
      break;
    case AssembleMode::kMotionOnly:
      tpl = "here is the input motion embedding <motion_emb> in different "
            "frames , please help me to ";
      break;
    case AssembleMode::kVideoOnly:
      tpl = "here is the input video embedding : <video_emb> in different "
            "frames , please help me to ";
      break;
  }
  // Task text may use open vocabulary (catalog questions); rare words
  // degrade to <unk> in the conditioning context. Targets are checked
  // separately where cross-entropy needs real ids.
  return vocab_->encode(tpl + task_text);
}

void HawkModel::forward(const std::vector<double>& video_proj,
                        const std::vector<double>& motion_proj,
                        const std::vector<int>& prompt_ids,
                        const std::vector<int>& target_ids, AssembleMode mode,
                        SequenceCache* cache) const {
  if (target_ids.empty())
    throw InvalidInput("language_forward requires a non-empty target");

  int n_vid = 0, n_mot = 0;
  for (int id : prompt_ids) {
    n_vid += id == vocab_->video_emb_id();
    n_mot += id == vocab_->motion_emb_id();
  }
  bool want_vid = mode != AssembleMode::kMotionOnly;
  bool want_mot = mode != AssembleMode::kVideoOnly;
  if ((want_vid && n_vid != 1) || (!want_vid && n_vid != 0) ||
      (want_mot && n_mot != 1) || (!want_mot && n_mot != 0))
    throw TemplateError("prompt placeholders do not match assembly mode");
  std::size_t proj_size = static_cast<std::size_t>(cfg_.k) * cfg_.d_emb;
  if (want_vid && video_proj.size() != proj_size)
    throw InvalidInput("video projection has wrong shape");
  if (want_mot && motion_proj.size() != proj_size)
    throw InvalidInput("motion projection has wrong shape");

  cache->slots.clear();
  for (int id : prompt_ids) {
    if (id == vocab_->video_emb_id()) {
      for (int r = 0; r < cfg_.k; ++r) cache->slots.push_back({-1, 0, r});
    } else if (id == vocab_->motion_emb_id()) {
      for (int r = 0; r < cfg_.k; ++r) cache->slots.push_back({-1, 1, r});
    } else {
      cache->slots.push_back({id, -1, -1});
    }
  }
  cache->n_prefix = static_cast<int>(cache->slots.size());
  cache->n_target = static_cast<int>(target_ids.size());
  cache->slots.push_back({vocab_->bos_id(), -1, -1});
  for (std::size_t i = 0; i + 1 < target_ids.size(); ++i)
    cache->slots.push_back({target_ids[i], -1, -1});
  cache->len = static_cast<int>(cache->slots.size());

  int d = cfg_.d_emb;
  cache->x0.assign(static_cast<std::size_t>(cache->len) * d, 0.0);
  const float* emb = params_.values(embed_);
  for (int i = 0; i < cache->len; ++i) {
    const EmbedSlot& s = cache->slots[i];
    double* row = cache->x0.data() + static_cast<std::size_t>(i) * d;
    if (s.token_id >= 0) {
      const float* er = emb + static_cast<std::size_t>(s.token_id) * d;
      for (int j = 0; j < d; ++j) row[j] = er[j];
    } else {
      const std::vector<double>& proj = s.branch == 0 ? video_proj : motion_proj;
      const double* pr = proj.data() + static_cast<std::size_t>(s.row) * d;
      for (int j = 0; j < d; ++j) row[j] = pr[j];
    }
  }
  decoder_forward(cache);
}

void HawkModel::decoder_forward(SequenceCache* cache) const {
  int L = cache->len, d = cfg_.d_emb, dff = cfg_.d_ff;
  int v = vocab_->size();
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  auto row = [d](std::vector<double>& m, int i) {
    return m.data() + static_cast<std::size_t>(i) * d;
  };
  cache->q.assign(static_cast<std::size_t>(L) * d, 0.0);
  cache->k.assign(static_cast<std::size_t>(L) * d, 0.0);
  cache->v.assign(static_cast<std::size_t>(L) * d, 0.0);
  for (int i = 0; i < L; ++i) {
    const double* x = cache->x0.data() + static_cast<std::size_t>(i) * d;
    affine(params_.values(wq_), params_.values(bq_), x, row(cache->q, i), d, d);
    affine(params_.values(wk_), params_.values(bk_), x, row(cache->k, i), d, d);
    affine(params_.values(wv_), params_.values(bv_), x, row(cache->v, i), d, d);
  }

  // causal attention, softmax over j <= i
  cache->attn.assign(static_cast<std::size_t>(L) * L, 0.0);
  for (int i = 0; i < L; ++i) {
    double* arow = cache->attn.data() + static_cast<std::size_t>(i) * L;
    const double* qi = cache->q.data() + static_cast<std::size_t>(i) * d;
    double mx = -1e300;
    for (int j = 0; j <= i; ++j) {
      const double* kj = cache->k.data() + static_cast<std::size_t>(j) * d;
      double s = 0;
      for (int c = 0; c < d; ++c) s += qi[c] * kj[c];
      s *= inv_sqrt_d;
      arow[j] = s;
      mx = std::max(mx, s);
    }
    double sum = 0;
    for (int j = 0; j <= i; ++j) {
      arow[j] = std::exp(arow[j] - mx);
      sum += arow[j];
    }
    for (int j = 0; j <= i; ++j) arow[j] /= sum;
  }

  cache->av.assign(static_cast<std::size_t>(L) * d, 0.0);
  for (int i = 0; i < L; ++i) {
    const double* arow = cache->attn.data() + static_cast<std::size_t>(i) * L;
    double* out = cache->av.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j <= i; ++j) {
      const double* vj = cache->v.data() + static_cast<std::size_t>(j) * d;
      double a = arow[j];
      for (int c = 0; c < d; ++c) out[c] += a * vj[c];
    }
  }

  cache->ao.assign(static_cast<std::size_t>(L) * d, 0.0);
  cache->x1.assign(static_cast<std::size_t>(L) * d, 0.0);
  for (int i = 0; i < L; ++i) {
    affine(params_.values(wo_), params_.values(bo_), row(cache->av, i),
           row(cache->ao, i), d, d);
    const double* x = cache->x0.data() + static_cast<std::size_t>(i) * d;
    double* x1 = row(cache->x1, i);
    const double* ao = row(cache->ao, i);
    for (int c = 0; c < d; ++c) x1[c] = x[c] + ao[c];
  }

  cache->ffp.assign(static_cast<std::size_t>(L) * dff, 0.0);
  cache->ffh.assign(static_cast<std::size_t>(L) * dff, 0.0);
  cache->f2.assign(static_cast<std::size_t>(L) * d, 0.0);
  cache->x2.assign(static_cast<std::size_t>(L) * d, 0.0);
  for (int i = 0; i < L; ++i) {
    double* ffp = cache->ffp.data() + static_cast<std::size_t>(i) * dff;
    affine(params_.values(w1_), params_.values(b1_), row(cache->x1, i), ffp,
           dff, d);
    double* ffh = cache->ffh.data() + static_cast<std::size_t>(i) * dff;
    for (int c = 0; c < dff; ++c) ffh[c] = std::tanh(ffp[c]);
    affine(params_.values(w2_), params_.values(b2_), ffh, row(cache->f2, i), d,
           dff);
    double* x2 = row(cache->x2, i);
    const double* x1 = row(cache->x1, i);
    const double* f2 = row(cache->f2, i);
    for (int c = 0; c < d; ++c) x2[c] = x1[c] + f2[c];
  }

  cache->logits.assign(static_cast<std::size_t>(cache->n_target) * v, 0.0);
  for (int t = 0; t < cache->n_target; ++t) {
    int pos = cache->len - cache->n_target + t;
    affine(params_.values(wout_), params_.values(bout_), row(cache->x2, pos),
           cache->logits.data() + static_cast<std::size_t>(t) * v, v, d);
  }
}

void HawkModel::backward(const SequenceCache& cache,
                         const std::vector<double>& dlogits,
                         std::vector<double>* dvideo_proj,
                         std::vector<double>* dmotion_proj) {
  int L = cache.len, d = cfg_.d_emb, dff = cfg_.d_ff;
  int v = vocab_->size();
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  if (dlogits.size() != static_cast<std::size_t>(cache.n_target) * v)
    throw InvalidInput("dlogits has wrong shape");

  std::vector<double> dx2(static_cast<std::size_t>(L) * d, 0.0);
  for (int t = 0; t < cache.n_target; ++t) {
    int pos = L - cache.n_target + t;
    affine_backward(params_.values(wout_), params_.grads(wout_),
                    params_.grads(bout_),
                    cache.x2.data() + static_cast<std::size_t>(pos) * d,
                    dlogits.data() + static_cast<std::size_t>(t) * v,
                    dx2.data() + static_cast<std::size_t>(pos) * d, v, d);
  }

  // feed-forward block with residual
  std::vector<double> dx1 = dx2;  // residual path
  std::vector<double> dffh(dff), dffp(dff);
  for (int i = 0; i < L; ++i) {
    const double* dx2_i = dx2.data() + static_cast<std::size_t>(i) * d;
    std::fill(dffh.begin(), dffh.end(), 0.0);
    // dffh = W2ᵀ dx2
    const float* w2 = params_.values(w2_);
    double* dw2 = params_.grads(w2_);
    double* db2 = params_.grads(b2_);
    const double* ffh = cache.ffh.data() + static_cast<std::size_t>(i) * dff;
    for (int o = 0; o < d; ++o) {
      double g = dx2_i[o];
      if (g == 0.0) continue;
      db2[o] += g;
      const float* wr = w2 + static_cast<std::size_t>(o) * dff;
      double* dwr = dw2 + static_cast<std::size_t>(o) * dff;
      for (int c = 0; c < dff; ++c) {
        dwr[c] += g * ffh[c];
        dffh[c] += static_cast<double>(wr[c]) * g;
      }
    }
    const double* ffp = cache.ffp.data() + static_cast<std::size_t>(i) * dff;
    for (int c = 0; c < dff; ++c) {
      double th = std::tanh(ffp[c]);
      dffp[c] = dffh[c] * (1.0 - th * th);
    }
    affine_backward(params_.values(w1_), params_.grads(w1_), params_.grads(b1_),
                    cache.x1.data() + static_cast<std::size_t>(i) * d,
                    dffp.data(), dx1.data() + static_cast<std::size_t>(i) * d,
                    dff, d);
  }

  // attention block with residual
  std::vector<double> dx0 = dx1;
  std::vector<double> dav(static_cast<std::size_t>(L) * d, 0.0);
  for (int i = 0; i < L; ++i)
    affine_backward(params_.values(wo_), params_.grads(wo_), params_.grads(bo_),
                    cache.av.data() + static_cast<std::size_t>(i) * d,
                    dx1.data() + static_cast<std::size_t>(i) * d,
                    dav.data() + static_cast<std::size_t>(i) * d, d, d);

  std::vector<double> dq(static_cast<std::size_t>(L) * d, 0.0);
  std::vector<double> dk(static_cast<std::size_t>(L) * d, 0.0);
  std::vector<double> dv(static_cast<std::size_t>(L) * d, 0.0);
  std::vector<double> dscore(L);
  for (int i = 0; i < L; ++i) {
    const double* arow = cache.attn.data() + static_cast<std::size_t>(i) * L;
    const double* dav_i = dav.data() + static_cast<std::size_t>(i) * d;
    // dattn_ij = dav_i · v_j ; dv_j += attn_ij dav_i
    double dot_sum = 0;
    for (int j = 0; j <= i; ++j) {
      const double* vj = cache.v.data() + static_cast<std::size_t>(j) * d;
      double* dvj = dv.data() + static_cast<std::size_t>(j) * d;
      double da = 0;
      for (int c = 0; c < d; ++c) {
        da += dav_i[c] * vj[c];
        dvj[c] += arow[j] * dav_i[c];
      }
      dscore[j] = da;
      dot_sum += arow[j] * da;
    }
    // softmax backward then score = q·k/sqrt(d)
    const double* qi = cache.q.data() + static_cast<std::size_t>(i) * d;
    double* dqi = dq.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j <= i; ++j) {
      double ds = arow[j] * (dscore[j] - dot_sum) * inv_sqrt_d;
      if (ds == 0.0) continue;
      const double* kj = cache.k.data() + static_cast<std::size_t>(j) * d;
      double* dkj = dk.data() + static_cast<std::size_t>(j) * d;
      for (int c = 0; c < d; ++c) {
        dqi[c] += ds * kj[c];
        dkj[c] += ds * qi[c];
      }
    }
  }
  for (int i = 0; i < L; ++i) {
    const double* x = cache.x0.data() + static_cast<std::size_t>(i) * d;
    double* dx = dx0.data() + static_cast<std::size_t>(i) * d;
    affine_backward(params_.values(wq_), params_.grads(wq_), params_.grads(bq_),
                    x, dq.data() + static_cast<std::size_t>(i) * d, dx, d, d);
    affine_backward(params_.values(wk_), params_.grads(wk_), params_.grads(bk_),
                    x, dk.data() + static_cast<std::size_t>(i) * d, dx, d, d);
    affine_backward(params_.values(wv_), params_.grads(wv_), params_.grads(bv_),
                    x, dv.data() + static_cast<std::size_t>(i) * d, dx, d, d);
  }

  // route input gradients to the embedding table / branch projections
  if (dvideo_proj)
    dvideo_proj->assign(static_cast<std::size_t>(cfg_.k) * d, 0.0);
  if (dmotion_proj)
    dmotion_proj->assign(static_cast<std::size_t>(cfg_.k) * d, 0.0);
  double* demb = params_.grads(embed_);
  for (int i = 0; i < L; ++i) {
    const EmbedSlot& s = cache.slots[i];
    const double* dx = dx0.data() + static_cast<std::size_t>(i) * d;
    if (s.token_id >= 0) {
      double* er = demb + static_cast<std::size_t>(s.token_id) * d;
      for (int c = 0; c < d; ++c) er[c] += dx[c];
    } else {
      std::vector<double>* dst = s.branch == 0 ? dvideo_proj : dmotion_proj;
      if (!dst) continue;
      double* pr = dst->data() + static_cast<std::size_t>(s.row) * d;
      for (int c = 0; c < d; ++c) pr[c] += dx[c];
    }
  }
}

TokenSequence HawkModel::generate_greedy(const std::vector<double>& video_proj,
                                         const std::vector<double>& motion_proj,
                                         const std::vector<int>& prompt_ids,
                                         AssembleMode mode, int max_len) const {
  if (max_len < 1) throw InvalidInput("max_len must be >= 1");
  TokenSequence out;
  out.role = SeqRole::kModelOutput;
  int v = vocab_->size();
  for (int step = 0; step < max_len; ++step) {
    // teacher-force the tokens generated so far plus a sentinel slot whose
    // logits we read; the sentinel embedding is the last generated token
    std::vector<int> target = out.ids;
    target.push_back(vocab_->pad_id());  // value unused: only its position
    SequenceCache cache;
    forward(video_proj, motion_proj, prompt_ids, target, mode, &cache);
    const double* logits =
        cache.logits.data() + static_cast<std::size_t>(cache.n_target - 1) * v;
    int best = 0;
    for (int i = 1; i < v; ++i)
      if (logits[i] > logits[best]) best = i;
    out.ids.push_back(best);
    if (best == vocab_->eos_id()) break;
  }
  return out;
}

std::string HawkModel::save_checkpoint() const {
  std::string out;
  out += "HWKC";
  put_u16le(out, 1);  // version
  for (int dim : {cfg_.t, cfg_.c, cfg_.h, cfg_.w, cfg_.d_enc, cfg_.d_mid,
                  cfg_.d_emb, cfg_.d_cmp, cfg_.k, cfg_.d_ff, cfg_.pool})
    put_u16le(out, static_cast<std::uint16_t>(dim));
  put_u64le(out, cfg_.encoder_seed);
  put_u32le(out, static_cast<std::uint32_t>(vocab_->size()));
  for (const std::string& tok : vocab_->tokens()) {
    put_u16le(out, static_cast<std::uint16_t>(tok.size()));
    out += tok;
  }
  put_u32le(out, static_cast<std::uint32_t>(params_.n_blocks()));
  for (std::size_t i = 0; i < params_.n_blocks(); ++i) {
    const ParamBlock& b = params_.block(i);
    put_u16le(out, static_cast<std::uint16_t>(b.name.size()));
    out += b.name;
    put_u64le(out, b.size);
    out.push_back(b.frozen ? 1 : 0);
    const float* p = params_.values(i);
    for (std::size_t j = 0; j < b.size; ++j) put_f32le(out, p[j]);
  }
  return out;
}

HawkModel HawkModel::load_checkpoint(std::string_view data) {
  ByteReader r(data);
  if (r.bytes(4) != "HWKC") throw InvalidInput("bad checkpoint magic");
  if (r.u16le() != 1) throw InvalidInput("unsupported checkpoint version");
  ModelConfig cfg;
  cfg.t = r.u16le();
  cfg.c = r.u16le();
  cfg.h = r.u16le();
  cfg.w = r.u16le();
  cfg.d_enc = r.u16le();
  cfg.d_mid = r.u16le();
  cfg.d_emb = r.u16le();
  cfg.d_cmp = r.u16le();
  cfg.k = r.u16le();
  cfg.d_ff = r.u16le();
  cfg.pool = r.u16le();
  cfg.encoder_seed = r.u64le();
  std::uint32_t n_tokens = r.u32le();
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint32_t i = 0; i < n_tokens; ++i) {
    std::uint16_t len = r.u16le();
    tokens.emplace_back(r.bytes(len));
  }
  const Vocabulary& builtin = Vocabulary::builtin();
  if (tokens != builtin.tokens())
    throw InvalidInput("checkpoint vocabulary does not match the builtin one");
  HawkModel model(cfg, builtin, 0);
  std::uint32_t n_blocks = r.u32le();
  if (n_blocks != model.params_.n_blocks())
    throw InvalidInput("checkpoint block count mismatch");
  for (std::uint32_t i = 0; i < n_blocks; ++i) {
    std::uint16_t len = r.u16le();
    std::string name(r.bytes(len));
    std::uint64_t size = r.u64le();
    bool frozen = r.bytes(1)[0] != 0;
    const ParamBlock& b = model.params_.block(i);
    if (name != b.name || size != b.size || frozen != b.frozen)
      throw InvalidInput("checkpoint block layout mismatch at " + name);
    float* p = model.params_.values(i);
    for (std::uint64_t j = 0; j < size; ++j) p[j] = r.f32le();
  }
  if (!r.done()) throw InvalidInput("trailing bytes in checkpoint");
  return model;
}

}  // namespace hawk
