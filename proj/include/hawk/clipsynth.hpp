#pragma once

#include <string>
#include <vector>

#include "hawk/common.hpp"

namespace hawk {

struct VideoClip {
  std::string id;
  int t_raw = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  int fps = 10;
  std::vector<float> frames;  // t_raw * c * h * w, row-major

  float at(int t, int ch, int y, int x) const {
    return frames[((static_cast<std::size_t>(t) * c + ch) * h + y) * w + x];
  }
  float& at(int t, int ch, int y, int x) {
    return frames[((static_cast<std::size_t>(t) * c + ch) * h + y) * w + x];
  }
  std::size_t frame_size() const {
    return static_cast<std::size_t>(c) * h * w;
  }
  void validate() const;
};

struct AgentSpec {
  std::string shape = "square";  // square | disc
  std::string color = "red";
  int size = 10;                 // side length / diameter in px
  double x0 = 0.0, y0 = 0.0;     // start center
  double vx = 0.0, vy = 0.0;     // px per frame
};

struct ScenarioSpec {
  std::string id;
  int t_raw = 12;
  int c = 3, h = 64, w = 64;
  int fps = 10;
  std::vector<AgentSpec> agents;
  std::string anomaly = "none";  // none|reversal|speedup|stop|new_agent
  int anomaly_frame = -1;
  int anomaly_agent = 0;         // for new_agent: the agent that appears
  std::string location = "street";
  std::string scenario_tag;
  std::uint64_t seed = 0;
};

struct AgentTrack {
  std::string shape;
  std::string color;
  int size = 0;
  int appear_at = 0;            // first frame index where the agent exists
  std::vector<double> x, y;     // centers, one entry per frame from appear_at
};

struct MotionDescriptor {
  std::string clip_id;
  std::string anomaly = "none";
  int anomaly_frame = -1;
  int anomaly_agent = 0;
  std::string location = "street";
  std::string scenario_tag;
  std::vector<AgentTrack> agents;
};

std::pair<VideoClip, MotionDescriptor> generate_synthetic_clip(
    const ScenarioSpec& spec);

// Deterministic scenario draw; anomalies enabled unless allow_anomaly=false
// (the pretraining corpus is anomaly-free).
ScenarioSpec random_scenario(std::uint64_t seed, const std::string& id,
                             int t_raw, bool allow_anomaly, int h = 64,
                             int w = 64);

// Uniformly spaced frame indices including first and last.
std::vector<int> sample_frame_indices(int t_raw, int t);
std::vector<float> sample_frames(const VideoClip& clip, int t);

struct CorpusSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

CorpusSplit split_corpus(const std::vector<std::string>& ids,
                         std::uint64_t seed);

// Raw tensor file: 16-byte header (magic "HWKV", then t_raw, c, h, w as
// u16 LE, zero padded), then float32 LE frames.
std::string save_clip_tensor(const VideoClip& clip);
VideoClip load_clip_tensor(std::string_view data, const std::string& id);

std::string descriptor_to_json(const MotionDescriptor& d);
MotionDescriptor descriptor_from_json(const std::string& line);

}  // namespace hawk
