#pragma once

#include <vector>

#include "hawk/optical_flow.hpp"

namespace hawk {

struct MotionClip {
  int t = 0, c = 0, h = 0, w = 0;
  std::vector<float> frames;            // t * c * h * w, masked appearance
  std::vector<double> masks;            // t * h * w, in [0,1]
};

// Flow magnitude min-max normalized to [0,1]. A constant-magnitude field
// maps to all-ones when the constant is nonzero and all-zeros when it is 0.
std::vector<double> build_mask(const FlowField& flow);

// Frame t >= 1 is masked by flow t; frame 0 borrows the first flow's mask
// so the output keeps the appearance clip's shape.
MotionClip apply_mask(const std::vector<float>& frames, int t, int c, int h,
                      int w, const std::vector<FlowField>& flows);
MotionClip apply_mask(const VideoClip& clip,
                      const std::vector<FlowField>& flows);

}  // namespace hawk
