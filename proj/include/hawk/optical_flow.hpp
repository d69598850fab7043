#pragma once

#include <string>
#include <vector>

#include "hawk/clipsynth.hpp"
#include "hawk/common.hpp"

namespace hawk {

// Grayscale image, row-major doubles.
struct Image {
  int h = 0, w = 0;
  std::vector<double> px;

  Image() = default;
  Image(int h_, int w_, double fill = 0.0)
      : h(h_), w(w_), px(static_cast<std::size_t>(h_) * w_, fill) {}
  double at(int y, int x) const {
    return px[static_cast<std::size_t>(y) * w + x];
  }
  double& at(int y, int x) { return px[static_cast<std::size_t>(y) * w + x]; }
};

struct FlowField {
  int h = 0, w = 0;
  int t = 1;  // time index of the later frame
  std::vector<double> u, v;  // horizontal / vertical displacement, px

  FlowField() = default;
  FlowField(int h_, int w_)
      : h(h_),
        w(w_),
        u(static_cast<std::size_t>(h_) * w_, 0.0),
        v(static_cast<std::size_t>(h_) * w_, 0.0) {}
};

struct FlowParams {
  int poly_n = 5;
  double poly_sigma = 1.1;
  int win = 13;
  int iterations = 3;
  int levels = 3;
  double pyr_scale = 0.5;
};

// Per-pixel quadratic fit f(x+dx, y+dy) ~ c + bx*dx + by*dy + axx*dx^2 +
// ayy*dy^2 + axy*dx*dy over a Gaussian window; so A = [[axx, axy/2],
// [axy/2, ayy]], b = (bx, by).
struct QuadCoeffs {
  int h = 0, w = 0;
  std::vector<double> c, bx, by, axx, ayy, axy;

  QuadCoeffs() = default;
  QuadCoeffs(int h_, int w_)
      : h(h_), w(w_) {
    std::size_t n = static_cast<std::size_t>(h_) * w_;
    c.assign(n, 0.0);
    bx.assign(n, 0.0);
    by.assign(n, 0.0);
    axx.assign(n, 0.0);
    ayy.assign(n, 0.0);
    axy.assign(n, 0.0);
  }
};

QuadCoeffs polynomial_expansion(const Image& frame, int poly_n,
                                double poly_sigma);

FlowField estimate_flow_pair(const Image& prev, const Image& next,
                             const FlowParams& params);

// Channel-mean grayscale conversion of one clip frame.
Image frame_to_gray(const float* frame, int c, int h, int w);

std::vector<FlowField> flow_for_clip(const VideoClip& clip,
                                     const FlowParams& params);
std::vector<FlowField> flow_for_frames(const std::vector<float>& frames, int t,
                                       int c, int h, int w,
                                       const FlowParams& params);

Image resize_bilinear(const Image& src, int new_h, int new_w);

// Flow dump: magic "HWKF", h, w as u16 LE, then u row-major, then v
// row-major, float32 LE.
std::string save_flow_field(const FlowField& f);
FlowField load_flow_field(std::string_view data);

}  // namespace hawk
