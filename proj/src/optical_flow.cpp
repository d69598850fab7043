#include "hawk/optical_flow.hpp"

#include <algorithm>
#include <cmath>

namespace hawk {

namespace {

inline int clampi(int v, int lo, int hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

void check_finite(const Image& img, const char* what) {
  for (double v : img.px)
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " has non-finite pixels");
}

// Gauss-Jordan with partial pivoting, n <= 6.
void invert_matrix(double a[6][6], double inv[6][6], int n) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = i == j ? 1.0 : 0.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-300)
      throw NumericalFailure("singular applicability matrix");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[col][j], a[pivot][j]);
        std::swap(inv[col][j], inv[pivot][j]);
      }
    }
    double d = 1.0 / a[col][col];
    for (int j = 0; j < n; ++j) {
      a[col][j] *= d;
      inv[col][j] *= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
}

// Box average over a (2r+1)-wide window with replicate edges.
void box_blur(const std::vector<double>& src, std::vector<double>& dst, int h,
              int w, int r) {
  std::vector<double> tmp(src.size());
  double inv = 1.0 / (2 * r + 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int k = -r; k <= r; ++k) s += src[static_cast<std::size_t>(y) * w + clampi(x + k, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s * inv;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int k = -r; k <= r; ++k) s += tmp[static_cast<std::size_t>(clampi(y + k, 0, h - 1)) * w + x];
      dst[static_cast<std::size_t>(y) * w + x] = s * inv;
    }
}

Image gaussian_blur(const Image& src, double sigma) {
  if (sigma <= 0.05) return src;
  int radius = std::max(1, static_cast<int>(std::lround(sigma * 2.5)));
  std::vector<double> g(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    g[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += g[i + radius];
  }
  for (double& v : g) v /= sum;
  Image tmp(src.h, src.w), out(src.h, src.w);
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double s = 0;
      for (int k = -radius; k <= radius; ++k)
        s += g[k + radius] * src.at(y, clampi(x + k, 0, src.w - 1));
      tmp.at(y, x) = s;
    }
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double s = 0;
      for (int k = -radius; k <= radius; ++k)
        s += g[k + radius] * tmp.at(clampi(y + k, 0, src.h - 1), x);
      out.at(y, x) = s;
    }
  return out;
}

// Downweights the five pixels nearest each edge so boundary junk carries
// little weight in the window aggregation.
inline double border_weight(int i, int n) {
  static const double ramp[5] = {0.14, 0.14, 0.4472, 0.4472, 0.4472};
  int d = std::min(i, n - 1 - i);
  return d < 5 ? ramp[d] : 1.0;
}

// Five normal-equation planes of the 2x2 system AᵀA d = AᵀΔb.
struct NormalPlanes {
  std::vector<double> gxx, gxy, gyy, hx, hy;
  explicit NormalPlanes(std::size_t n)
      : gxx(n, 0.0), gxy(n, 0.0), gyy(n, 0.0), hx(n, 0.0), hy(n, 0.0) {}
};

void update_matrices(const QuadCoeffs& r1, const QuadCoeffs& r2,
                     const std::vector<double>& du,
                     const std::vector<double>& dv, NormalPlanes& m) {
  int h = r1.h, w = r1.w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      double dx = du[i], dy = dv[i];
      // sample the second frame's coefficients at the warped position,
      // bilinear with clamped coordinates
      double fx = std::clamp(x + dx, 0.0, w - 1.0);
      double fy = std::clamp(y + dy, 0.0, h - 1.0);
      int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      double tx = fx - x0, ty = fy - y0;
      double w00 = (1 - tx) * (1 - ty), w01 = tx * (1 - ty);
      double w10 = (1 - tx) * ty, w11 = tx * ty;
      std::size_t i00 = static_cast<std::size_t>(y0) * w + x0;
      std::size_t i01 = static_cast<std::size_t>(y0) * w + x1;
      std::size_t i10 = static_cast<std::size_t>(y1) * w + x0;
      std::size_t i11 = static_cast<std::size_t>(y1) * w + x1;
      auto warp = [&](const std::vector<double>& p) {
        return w00 * p[i00] + w01 * p[i01] + w10 * p[i10] + w11 * p[i11];
      };
      double a_xx = (r1.axx[i] + warp(r2.axx)) * 0.5;
      double a_yy = (r1.ayy[i] + warp(r2.ayy)) * 0.5;
      double a_xy = (r1.axy[i] + warp(r2.axy)) * 0.25;  // half of the mean
      double db_x = (r1.bx[i] - warp(r2.bx)) * 0.5 + a_xx * dx + a_xy * dy;
      double db_y = (r1.by[i] - warp(r2.by)) * 0.5 + a_xy * dx + a_yy * dy;

      double s = border_weight(x, w) * border_weight(y, h);
      a_xx *= s;
      a_yy *= s;
      a_xy *= s;
      db_x *= s;
      db_y *= s;

      m.gxx[i] = a_xx * a_xx + a_xy * a_xy;
      m.gxy[i] = (a_xx + a_yy) * a_xy;
      m.gyy[i] = a_yy * a_yy + a_xy * a_xy;
      m.hx[i] = a_xx * db_x + a_xy * db_y;
      m.hy[i] = a_xy * db_x + a_yy * db_y;
    }
  }
}

void solve_flow(const NormalPlanes& m, int h, int w, int win,
                std::vector<double>& u, std::vector<double>& v) {
  std::size_t n = static_cast<std::size_t>(h) * w;
  NormalPlanes blurred(n);
  int r = win / 2;
  box_blur(m.gxx, blurred.gxx, h, w, r);
  box_blur(m.gxy, blurred.gxy, h, w, r);
  box_blur(m.gyy, blurred.gyy, h, w, r);
  box_blur(m.hx, blurred.hx, h, w, r);
  box_blur(m.hy, blurred.hy, h, w, r);
  for (std::size_t i = 0; i < n; ++i) {
    double gxx = blurred.gxx[i], gxy = blurred.gxy[i], gyy = blurred.gyy[i];
    double det = gxx * gyy - gxy * gxy;
    if (det < 1e-9) {
      u[i] = 0.0;
      v[i] = 0.0;
    } else {
      u[i] = (blurred.hx[i] * gyy - gxy * blurred.hy[i]) / det;
      v[i] = (gxx * blurred.hy[i] - gxy * blurred.hx[i]) / det;
    }
  }
}

}  // namespace

QuadCoeffs polynomial_expansion(const Image& frame, int poly_n,
                                double poly_sigma) {
  if (poly_n < 3 || poly_n % 2 == 0)
    throw ConfigError("poly_n must be odd and >= 3, got " +
                      std::to_string(poly_n));
  if (poly_sigma <= 0) throw ConfigError("poly_sigma must be positive");
  check_finite(frame, "polynomial_expansion input");

  int n = poly_n / 2;
  int h = frame.h, w = frame.w;
  std::vector<double> g(2 * n + 1);
  double gsum = 0;
  for (int i = -n; i <= n; ++i) {
    g[i + n] = std::exp(-0.5 * i * i / (poly_sigma * poly_sigma));
    gsum += g[i + n];
  }
  for (double& v : g) v /= gsum;

  // G[r][c] = sum w(dx,dy) basis_r basis_c over the window,
  // basis = (1, dx, dy, dx², dy², dx·dy); constant across pixels.
  double G[6][6] = {};
  for (int dy = -n; dy <= n; ++dy)
    for (int dx = -n; dx <= n; ++dx) {
      double wgt = g[dy + n] * g[dx + n];
      double basis[6] = {1.0,
                         static_cast<double>(dx),
                         static_cast<double>(dy),
                         static_cast<double>(dx) * dx,
                         static_cast<double>(dy) * dy,
                         static_cast<double>(dx) * dy};
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) G[r][c] += wgt * basis[r] * basis[c];
    }
  double invG[6][6];
  invert_matrix(G, invG, 6);

  // Separable correlation: vertical pass gathers dy moments, horizontal
  // pass finishes the six projections. Replicate edges.
  std::vector<double> t0(frame.px.size()), t1(frame.px.size()),
      t2(frame.px.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s0 = 0, s1 = 0, s2 = 0;
      for (int k = -n; k <= n; ++k) {
        double f = frame.at(clampi(y + k, 0, h - 1), x);
        double wg = g[k + n];
        s0 += wg * f;
        s1 += wg * k * f;
        s2 += wg * k * k * f;
      }
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      t0[i] = s0;
      t1[i] = s1;
      t2[i] = s2;
    }

  QuadCoeffs out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v[6] = {};
      for (int k = -n; k <= n; ++k) {
        std::size_t j = static_cast<std::size_t>(y) * w + clampi(x + k, 0, w - 1);
        double wg = g[k + n];
        v[0] += wg * t0[j];          // Σ w f
        v[1] += wg * k * t0[j];      // Σ w dx f
        v[2] += wg * t1[j];          // Σ w dy f
        v[3] += wg * k * k * t0[j];  // Σ w dx² f
        v[4] += wg * t2[j];          // Σ w dy² f
        v[5] += wg * k * t1[j];      // Σ w dx dy f
      }
      double coef[6];
      for (int r = 0; r < 6; ++r) {
        double s = 0;
        for (int c = 0; c < 6; ++c) s += invG[r][c] * v[c];
        coef[r] = s;
      }
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      out.c[i] = coef[0];
      out.bx[i] = coef[1];
      out.by[i] = coef[2];
      out.axx[i] = coef[3];
      out.ayy[i] = coef[4];
      out.axy[i] = coef[5];
    }
  return out;
}

Image resize_bilinear(const Image& src, int new_h, int new_w) {
  Image out(new_h, new_w);
  double sy = static_cast<double>(src.h) / new_h;
  double sx = static_cast<double>(src.w) / new_w;
  for (int y = 0; y < new_h; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.h - 1.0);
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, src.h - 1);
    double ty = fy - y0;
    for (int x = 0; x < new_w; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.w - 1.0);
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, src.w - 1);
      double tx = fx - x0;
      out.at(y, x) = (1 - ty) * ((1 - tx) * src.at(y0, x0) + tx * src.at(y0, x1)) +
                     ty * ((1 - tx) * src.at(y1, x0) + tx * src.at(y1, x1));
    }
  }
  return out;
}

FlowField estimate_flow_pair(const Image& prev, const Image& next,
                             const FlowParams& params) {
  if (prev.h != next.h || prev.w != next.w)
    throw InvalidInput("flow inputs differ in shape");
  if (prev.h < 3 || prev.w < 3) throw InvalidInput("frame too small for flow");
  if (params.win < 1) throw ConfigError("win must be >= 1");
  if (params.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (params.levels < 1) throw ConfigError("levels must be >= 1");
  if (!(params.pyr_scale > 0.0 && params.pyr_scale < 1.0))
    throw ConfigError("pyr_scale must be in (0,1)");
  check_finite(prev, "flow prev frame");
  check_finite(next, "flow next frame");

  // Coarsest-first level list; levels too small for the expansion window
  // are dropped.
  struct Level {
    Image a, b;
  };
  std::vector<Level> pyramid;
  for (int l = 0; l < params.levels; ++l) {
    double scale = std::pow(params.pyr_scale, l);
    int lh = std::max(1, static_cast<int>(std::lround(prev.h * scale)));
    int lw = std::max(1, static_cast<int>(std::lround(prev.w * scale)));
    if (std::min(lh, lw) < 2 * params.poly_n + 1) break;
    if (l == 0) {
      pyramid.push_back({prev, next});
    } else {
      double sigma = (1.0 / scale - 1.0) * 0.5;
      pyramid.push_back({resize_bilinear(gaussian_blur(prev, sigma), lh, lw),
                         resize_bilinear(gaussian_blur(next, sigma), lh, lw)});
    }
  }

  std::vector<double> u, v;
  int prev_h = 0, prev_w = 0;
  for (int l = static_cast<int>(pyramid.size()) - 1; l >= 0; --l) {
    const Image& a = pyramid[l].a;
    const Image& b = pyramid[l].b;
    std::size_t npix = a.px.size();
    if (prev_w == 0) {
      u.assign(npix, 0.0);
      v.assign(npix, 0.0);
    } else {
      Image uimg(prev_h, prev_w), vimg(prev_h, prev_w);
      uimg.px = u;
      vimg.px = v;
      Image ur = resize_bilinear(uimg, a.h, a.w);
      Image vr = resize_bilinear(vimg, a.h, a.w);
      double su = static_cast<double>(a.w) / prev_w;
      double sv = static_cast<double>(a.h) / prev_h;
      u.assign(npix, 0.0);
      v.assign(npix, 0.0);
      for (std::size_t i = 0; i < npix; ++i) {
        u[i] = ur.px[i] * su;
        v[i] = vr.px[i] * sv;
      }
    }
    QuadCoeffs r1 = polynomial_expansion(a, params.poly_n, params.poly_sigma);
    QuadCoeffs r2 = polynomial_expansion(b, params.poly_n, params.poly_sigma);
    NormalPlanes m(npix);
    for (int it = 0; it < params.iterations; ++it) {
      update_matrices(r1, r2, u, v, m);
      solve_flow(m, a.h, a.w, params.win, u, v);
    }
    prev_h = a.h;
    prev_w = a.w;
  }

  FlowField f(prev.h, prev.w);
  f.u = std::move(u);
  f.v = std::move(v);
  for (std::size_t i = 0; i < f.u.size(); ++i)
    if (!std::isfinite(f.u[i]) || !std::isfinite(f.v[i]))
      throw NumericalFailure("non-finite flow escaped the solver");
  return f;
}

Image frame_to_gray(const float* frame, int c, int h, int w) {
  Image out(h, w);
  std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < plane; ++i) {
    double s = 0;
    for (int ch = 0; ch < c; ++ch) s += frame[ch * plane + i];
    out.px[i] = s / c;
  }
  return out;
}

std::vector<FlowField> flow_for_frames(const std::vector<float>& frames, int t,
                                       int c, int h, int w,
                                       const FlowParams& params) {
  if (t < 2) throw InvalidInput("flow needs at least 2 frames");
  std::size_t frame_size = static_cast<std::size_t>(c) * h * w;
  if (frames.size() != frame_size * t)
    throw InvalidInput("frame buffer size mismatch");
  std::vector<Image> gray;
  gray.reserve(t);
  for (int i = 0; i < t; ++i)
    gray.push_back(frame_to_gray(frames.data() + i * frame_size, c, h, w));
  std::vector<FlowField> flows;
  flows.reserve(t - 1);
  for (int i = 1; i < t; ++i) {
    FlowField f = estimate_flow_pair(gray[i - 1], gray[i], params);
    f.t = i;
    flows.push_back(std::move(f));
  }
  return flows;
}

std::vector<FlowField> flow_for_clip(const VideoClip& clip,
                                     const FlowParams& params) {
  return flow_for_frames(clip.frames, clip.t_raw, clip.c, clip.h, clip.w,
                         params);
}

std::string save_flow_field(const FlowField& f) {
  std::string out;
  out.reserve(8 + f.u.size() * 8);
  out += "HWKF";
  put_u16le(out, static_cast<std::uint16_t>(f.h));
  put_u16le(out, static_cast<std::uint16_t>(f.w));
  for (double v : f.u) put_f32le(out, static_cast<float>(v));
  for (double v : f.v) put_f32le(out, static_cast<float>(v));
  return out;
}

FlowField load_flow_field(std::string_view data) {
  ByteReader r(data);
  if (r.bytes(4) != "HWKF") throw InvalidInput("bad flow dump magic");
  FlowField f;
  f.h = r.u16le();
  f.w = r.u16le();
  std::size_t n = static_cast<std::size_t>(f.h) * f.w;
  if (r.remaining() != n * 8) throw InvalidInput("flow dump size mismatch");
  f.u.resize(n);
  f.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.u[i] = r.f32le();
  for (std::size_t i = 0; i < n; ++i) f.v[i] = r.f32le();
  return f;
}

}  // namespace hawk
