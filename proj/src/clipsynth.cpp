#include "hawk/clipsynth.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace hawk {

namespace {

struct Rgb {
  double r, g, b;
};

Rgb palette(const std::string& name) {
  if (name == "red") return {0.85, 0.10, 0.10};
  if (name == "green") return {0.10, 0.80, 0.10};
  if (name == "blue") return {0.10, 0.15, 0.85};
  if (name == "yellow") return {0.90, 0.85, 0.10};
  if (name == "white") return {0.95, 0.95, 0.95};
  if (name == "black") return {0.05, 0.05, 0.05};
  throw InvalidInput("unknown agent color: " + name);
}

// Velocity actually applied between frame t and t+1.
void velocity_at(const ScenarioSpec& spec, int agent, int t, double* vx,
                 double* vy) {
  const AgentSpec& a = spec.agents[agent];
  *vx = a.vx;
  *vy = a.vy;
  if (spec.anomaly == "none" || agent != spec.anomaly_agent ||
      spec.anomaly == "new_agent")
    return;
  if (t >= spec.anomaly_frame) {
    if (spec.anomaly == "reversal") {
      *vx = -a.vx;
      *vy = -a.vy;
    } else if (spec.anomaly == "speedup") {
      *vx = 2.0 * a.vx;
      *vy = 2.0 * a.vy;
    } else if (spec.anomaly == "stop") {
      *vx = 0.0;
      *vy = 0.0;
    }
  }
}

int first_frame(const ScenarioSpec& spec, int agent) {
  if (spec.anomaly == "new_agent" && agent == spec.anomaly_agent)
    return spec.anomaly_frame;
  return 0;
}

// Smooth-interior intensity profile so the flow solver has gradients to
// lock onto; returns weight in [0,1], 0 outside the support.
double agent_profile(const AgentSpec& a, double dx, double dy) {
  double half = a.size * 0.5;
  if (a.shape == "disc") {
    double dist = std::sqrt(dx * dx + dy * dy);
    if (dist > half) return 0.0;
    return 0.55 + 0.45 * std::cos(0.5 * M_PI * dist / half);
  }
  if (std::abs(dx) > half || std::abs(dy) > half) return 0.0;
  return 0.55 + 0.45 * std::cos(0.5 * M_PI * dx / half) *
                    std::cos(0.5 * M_PI * dy / half);
}

std::vector<double> value_noise_background(std::uint64_t seed, int h, int w) {
  const int cell = 8;
  int gh = h / cell + 2, gw = w / cell + 2;
  Rng rng(seed);
  std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
  for (double& v : lattice) v = rng.uniform(0.25, 0.45);
  std::vector<double> img(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    double fy = static_cast<double>(y) / cell;
    int iy = static_cast<int>(fy);
    double ty = fy - iy;
    for (int x = 0; x < w; ++x) {
      double fx = static_cast<double>(x) / cell;
      int ix = static_cast<int>(fx);
      double tx = fx - ix;
      double v00 = lattice[static_cast<std::size_t>(iy) * gw + ix];
      double v01 = lattice[static_cast<std::size_t>(iy) * gw + ix + 1];
      double v10 = lattice[static_cast<std::size_t>(iy + 1) * gw + ix];
      double v11 = lattice[static_cast<std::size_t>(iy + 1) * gw + ix + 1];
      img[static_cast<std::size_t>(y) * w + x] =
          (1 - ty) * ((1 - tx) * v00 + tx * v01) +
          ty * ((1 - tx) * v10 + tx * v11);
    }
  }
  return img;
}

}  // namespace

void VideoClip::validate() const {
  if (t_raw < 2 || t_raw > 32)
    throw InvalidInput("clip " + id + ": t_raw must be in [2,32], got " +
                       std::to_string(t_raw));
  if (frames.size() != static_cast<std::size_t>(t_raw) * c * h * w)
    throw InvalidInput("clip " + id + ": frame buffer size mismatch");
  for (float v : frames)
    if (!(v >= 0.0f && v <= 1.0f))
      throw InvalidInput("clip " + id + ": pixel value outside [0,1]");
}

std::pair<VideoClip, MotionDescriptor> generate_synthetic_clip(
    const ScenarioSpec& spec) {
  if (spec.t_raw < 2 || spec.t_raw > 32)
    throw InvalidInput("scenario " + spec.id + ": t_raw must be in [2,32]");
  if (spec.agents.empty())
    throw InvalidInput("scenario " + spec.id + ": needs at least one agent");
  if (spec.anomaly != "none" &&
      (spec.anomaly_frame < 1 || spec.anomaly_frame >= spec.t_raw))
    throw InvalidInput("scenario " + spec.id + ": anomaly_frame out of range");
  if (spec.anomaly_agent < 0 ||
      spec.anomaly_agent >= static_cast<int>(spec.agents.size()))
    throw InvalidInput("scenario " + spec.id + ": anomaly_agent out of range");

  int n_agents = static_cast<int>(spec.agents.size());

  // Integrate tracks first so out-of-bounds trajectories are rejected
  // before any rendering.
  MotionDescriptor desc;
  desc.clip_id = spec.id;
  desc.anomaly = spec.anomaly;
  desc.anomaly_frame = spec.anomaly == "none" ? -1 : spec.anomaly_frame;
  desc.anomaly_agent = spec.anomaly_agent;
  desc.location = spec.location;
  desc.scenario_tag = spec.scenario_tag;
  for (int ai = 0; ai < n_agents; ++ai) {
    const AgentSpec& a = spec.agents[ai];
    AgentTrack track;
    track.shape = a.shape;
    track.color = a.color;
    track.size = a.size;
    track.appear_at = first_frame(spec, ai);
    double x = a.x0, y = a.y0;
    for (int t = track.appear_at; t < spec.t_raw; ++t) {
      double half = a.size * 0.5;
      if (x - half < 0 || x + half > spec.w - 1 || y - half < 0 ||
          y + half > spec.h - 1)
        throw InvalidInput("scenario " + spec.id + ": agent " +
                           std::to_string(ai) + " leaves the frame at t=" +
                           std::to_string(t));
      track.x.push_back(x);
      track.y.push_back(y);
      double vx, vy;
      velocity_at(spec, ai, t, &vx, &vy);
      x += vx;
      y += vy;
    }
    desc.agents.push_back(std::move(track));
  }

  VideoClip clip;
  clip.id = spec.id;
  clip.t_raw = spec.t_raw;
  clip.c = spec.c;
  clip.h = spec.h;
  clip.w = spec.w;
  clip.fps = spec.fps;
  clip.frames.assign(static_cast<std::size_t>(spec.t_raw) * spec.c * spec.h *
                         spec.w,
                     0.0f);

  std::vector<double> bg = value_noise_background(
      derive_seed(spec.seed, "background:" + spec.id), spec.h, spec.w);

  for (int t = 0; t < spec.t_raw; ++t) {
    for (int ch = 0; ch < spec.c; ++ch)
      for (int y = 0; y < spec.h; ++y)
        for (int x = 0; x < spec.w; ++x)
          clip.at(t, ch, y, x) =
              static_cast<float>(bg[static_cast<std::size_t>(y) * spec.w + x]);
    for (int ai = 0; ai < n_agents; ++ai) {
      const AgentTrack& track = desc.agents[ai];
      if (t < track.appear_at) continue;
      const AgentSpec& a = spec.agents[ai];
      Rgb col = palette(a.color);
      double cx = track.x[t - track.appear_at];
      double cy = track.y[t - track.appear_at];
      int half = a.size / 2 + 1;
      int x_lo = std::max(0, static_cast<int>(std::floor(cx)) - half);
      int x_hi = std::min(spec.w - 1, static_cast<int>(std::ceil(cx)) + half);
      int y_lo = std::max(0, static_cast<int>(std::floor(cy)) - half);
      int y_hi = std::min(spec.h - 1, static_cast<int>(std::ceil(cy)) + half);
      for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x) {
          double p = agent_profile(a, x - cx, y - cy);
          if (p <= 0.0) continue;
          double rgb[3] = {col.r, col.g, col.b};
          for (int ch = 0; ch < spec.c; ++ch) {
            double v = rgb[ch % 3] * p;
            clip.at(t, ch, y, x) =
                static_cast<float>(std::clamp(v, 0.0, 1.0));
          }
        }
    }
  }
  clip.validate();
  return {std::move(clip), std::move(desc)};
}

ScenarioSpec random_scenario(std::uint64_t seed, const std::string& id,
                             int t_raw, bool allow_anomaly, int h, int w) {
  Rng rng(derive_seed(seed, "scenario:" + id));
  ScenarioSpec spec;
  spec.id = id;
  spec.t_raw = t_raw;
  spec.h = h;
  spec.w = w;
  spec.seed = seed;
  static const char* kShapes[] = {"square", "disc"};
  static const char* kColors[] = {"red",    "green", "blue",
                                  "yellow", "white", "black"};
  static const char* kLocations[] = {"street", "sidewalk", "road"};
  static const char* kAnomalies[] = {"reversal", "speedup", "stop",
                                     "new_agent"};
  spec.location = kLocations[rng.uniform_index(3)];
  spec.anomaly = allow_anomaly ? kAnomalies[rng.uniform_index(4)] : "none";
  if (spec.anomaly != "none")
    spec.anomaly_frame = rng.uniform_int(t_raw / 3, 2 * t_raw / 3);

  int n_agents = rng.uniform() < 0.6 ? 1 : 2;
  if (spec.anomaly == "new_agent") n_agents += 1;
  for (int ai = 0; ai < n_agents; ++ai) {
    AgentSpec a;
    a.shape = kShapes[rng.uniform_index(2)];
    a.color = kColors[rng.uniform_index(6)];
    a.size = rng.uniform_int(8, 12);
    a.vx = rng.uniform_int(-3, 3);
    a.vy = rng.uniform_int(-3, 3);
    if (a.vx == 0 && a.vy == 0) a.vx = 1 + static_cast<int>(rng.uniform_index(2));
    spec.agents.push_back(a);
  }
  if (spec.anomaly == "new_agent") {
    spec.anomaly_agent = n_agents - 1;
    // ensure it looks different from agent 0
    while (spec.agents.back().color == spec.agents[0].color)
      spec.agents.back().color = kColors[rng.uniform_index(6)];
  }

  // Place each agent so its whole track stays inside the frame, shrinking
  // the velocity when the span cannot fit.
  for (int ai = 0; ai < static_cast<int>(spec.agents.size()); ++ai) {
    AgentSpec& a = spec.agents[ai];
    for (int attempt = 0;; ++attempt) {
      double min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0, x = 0, y = 0;
      for (int t = first_frame(spec, ai); t < spec.t_raw - 1; ++t) {
        double vx, vy;
        velocity_at(spec, ai, t, &vx, &vy);
        x += vx;
        y += vy;
        min_dx = std::min(min_dx, x);
        max_dx = std::max(max_dx, x);
        min_dy = std::min(min_dy, y);
        max_dy = std::max(max_dy, y);
      }
      double half = a.size * 0.5 + 1;
      int x_lo = static_cast<int>(std::ceil(half - min_dx));
      int x_hi = static_cast<int>(std::floor(spec.w - 2 - half - max_dx));
      int y_lo = static_cast<int>(std::ceil(half - min_dy));
      int y_hi = static_cast<int>(std::floor(spec.h - 2 - half - max_dy));
      if (x_lo <= x_hi && y_lo <= y_hi) {
        a.x0 = rng.uniform_int(x_lo, x_hi);
        a.y0 = rng.uniform_int(y_lo, y_hi);
        break;
      }
      if (attempt > 8) throw InvalidInput("cannot place agent in frame");
      a.vx = a.vx > 0 ? a.vx - 1 : (a.vx < 0 ? a.vx + 1 : 0);
      a.vy = a.vy > 0 ? a.vy - 1 : (a.vy < 0 ? a.vy + 1 : 0);
      if (a.vx == 0 && a.vy == 0) a.vx = 1;
    }
  }
  spec.scenario_tag = spec.agents[spec.anomaly_agent].color + "_" +
                      spec.agents[spec.anomaly_agent].shape + "_" +
                      spec.anomaly;
  return spec;
}

std::vector<int> sample_frame_indices(int t_raw, int t) {
  if (t < 1) throw InvalidInput("sample_frames: T must be >= 1");
  if (t > t_raw)
    throw InvalidInput("sample_frames: T=" + std::to_string(t) +
                       " exceeds t_raw=" + std::to_string(t_raw));
  std::vector<int> idx;
  idx.reserve(t);
  if (t == 1) {
    idx.push_back(0);
    return idx;
  }
  for (int i = 0; i < t; ++i)
    idx.push_back(static_cast<int>(
        std::lround(static_cast<double>(i) * (t_raw - 1) / (t - 1))));
  return idx;
}

std::vector<float> sample_frames(const VideoClip& clip, int t) {
  std::vector<int> idx = sample_frame_indices(clip.t_raw, t);
  std::vector<float> out;
  out.reserve(idx.size() * clip.frame_size());
  for (int i : idx) {
    const float* f = clip.frames.data() + i * clip.frame_size();
    out.insert(out.end(), f, f + clip.frame_size());
  }
  return out;
}

CorpusSplit split_corpus(const std::vector<std::string>& ids,
                         std::uint64_t seed) {
  if (ids.size() < 10)
    throw InsufficientCorpus("split needs at least 10 records, got " +
                             std::to_string(ids.size()));
  std::vector<std::string> shuffled = ids;
  Rng rng(derive_seed(seed, "corpus_split"));
  rng.shuffle(shuffled);
  std::size_t n_train = shuffled.size() * 9 / 10;
  CorpusSplit split;
  split.seed = seed;
  split.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.test_ids.assign(shuffled.begin() + n_train, shuffled.end());
  return split;
}

std::string save_clip_tensor(const VideoClip& clip) {
  std::string out;
  out.reserve(16 + clip.frames.size() * 4);
  out += "HWKV";
  put_u16le(out, static_cast<std::uint16_t>(clip.t_raw));
  put_u16le(out, static_cast<std::uint16_t>(clip.c));
  put_u16le(out, static_cast<std::uint16_t>(clip.h));
  put_u16le(out, static_cast<std::uint16_t>(clip.w));
  out.append(4, '\0');
  for (float v : clip.frames) put_f32le(out, v);
  return out;
}

VideoClip load_clip_tensor(std::string_view data, const std::string& id) {
  ByteReader r(data);
  if (r.bytes(4) != "HWKV") throw InvalidInput("bad clip tensor magic");
  VideoClip clip;
  clip.id = id;
  clip.t_raw = r.u16le();
  clip.c = r.u16le();
  clip.h = r.u16le();
  clip.w = r.u16le();
  r.bytes(4);
  std::size_t n =
      static_cast<std::size_t>(clip.t_raw) * clip.c * clip.h * clip.w;
  if (r.remaining() != n * 4)
    throw InvalidInput("clip tensor size mismatch for " + id);
  clip.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) clip.frames[i] = r.f32le();
  return clip;
}

std::string descriptor_to_json(const MotionDescriptor& d) {
  nlohmann::json j;
  j["clip_id"] = d.clip_id;
  j["anomaly"] = d.anomaly;
  j["anomaly_frame"] = d.anomaly_frame;
  j["anomaly_agent"] = d.anomaly_agent;
  j["location"] = d.location;
  j["scenario_tag"] = d.scenario_tag;
  nlohmann::json agents = nlohmann::json::array();
  for (const AgentTrack& a : d.agents) {
    nlohmann::json ja;
    ja["shape"] = a.shape;
    ja["color"] = a.color;
    ja["size"] = a.size;
    ja["appear_at"] = a.appear_at;
    ja["x"] = a.x;
    ja["y"] = a.y;
    agents.push_back(ja);
  }
  j["agents"] = agents;
  return j.dump();
}

MotionDescriptor descriptor_from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  MotionDescriptor d;
  d.clip_id = j.at("clip_id").get<std::string>();
  d.anomaly = j.at("anomaly").get<std::string>();
  d.anomaly_frame = j.at("anomaly_frame").get<int>();
  d.anomaly_agent = j.at("anomaly_agent").get<int>();
  d.location = j.at("location").get<std::string>();
  d.scenario_tag = j.at("scenario_tag").get<std::string>();
  for (const auto& ja : j.at("agents")) {
    AgentTrack a;
    a.shape = ja.at("shape").get<std::string>();
    a.color = ja.at("color").get<std::string>();
    a.size = ja.at("size").get<int>();
    a.appear_at = ja.at("appear_at").get<int>();
    a.x = ja.at("x").get<std::vector<double>>();
    a.y = ja.at("y").get<std::vector<double>>();
    d.agents.push_back(std::move(a));
  }
  return d;
}

}  // namespace hawk
