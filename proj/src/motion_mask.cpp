#include "hawk/motion_mask.hpp"

#include <cmath>

namespace hawk {

std::vector<double> build_mask(const FlowField& flow) {
  std::size_t n = flow.u.size();
  std::vector<double> mag(n);
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = std::sqrt(flow.u[i] * flow.u[i] + flow.v[i] * flow.v[i]);
    if (!std::isfinite(m)) throw InvalidInput("non-finite flow in build_mask");
    mag[i] = m;
    if (i == 0) {
      lo = hi = m;
    } else {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  if (hi == lo) {
    double fill = hi > 0.0 ? 1.0 : 0.0;
    return std::vector<double>(n, fill);
  }
  double scale = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < n; ++i) mag[i] = (mag[i] - lo) * scale;
  return mag;
}

MotionClip apply_mask(const std::vector<float>& frames, int t, int c, int h,
                      int w, const std::vector<FlowField>& flows) {
  if (t < 2) throw InvalidInput("apply_mask needs at least 2 frames");
  if (static_cast<int>(flows.size()) != t - 1)
    throw InvalidInput("apply_mask: expected " + std::to_string(t - 1) +
                       " flow fields, got " + std::to_string(flows.size()));
  std::size_t plane = static_cast<std::size_t>(h) * w;
  if (frames.size() != plane * c * t)
    throw InvalidInput("apply_mask: frame buffer size mismatch");
  for (const FlowField& f : flows)
    if (f.h != h || f.w != w)
      throw InvalidInput("apply_mask: flow shape mismatch");

  MotionClip out;
  out.t = t;
  out.c = c;
  out.h = h;
  out.w = w;
  out.frames.resize(frames.size());
  out.masks.resize(plane * t);
  for (int ti = 0; ti < t; ++ti) {
    std::vector<double> mask = build_mask(flows[ti == 0 ? 0 : ti - 1]);
    std::copy(mask.begin(), mask.end(), out.masks.begin() + ti * plane);
    const float* src = frames.data() + static_cast<std::size_t>(ti) * c * plane;
    float* dst = out.frames.data() + static_cast<std::size_t>(ti) * c * plane;
    for (int ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < plane; ++i)
        dst[ch * plane + i] = static_cast<float>(mask[i] * src[ch * plane + i]);
  }
  return out;
}

MotionClip apply_mask(const VideoClip& clip,
                      const std::vector<FlowField>& flows) {
  return apply_mask(clip.frames, clip.t_raw, clip.c, clip.h, clip.w, flows);
}

}  // namespace hawk
