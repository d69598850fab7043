#pragma once

#include <memory>
#include <ostream>
#include <utility>

#include "hawk/config.hpp"
#include "hawk/datagen.hpp"
#include "hawk/eval.hpp"
#include "hawk/losses.hpp"
#include "hawk/motion_mask.hpp"

namespace hawk {

struct Corpus {
  std::vector<VideoClip> clips;
  std::vector<MotionDescriptor> descriptors;

  const VideoClip& clip_by_id(const std::string& id) const;
  const MotionDescriptor& descriptor_by_id(const std::string& id) const;
};

Corpus make_corpus(int n_clips, int t_raw, std::uint64_t seed,
                   bool allow_anomaly, const std::string& id_prefix,
                   int h = 64, int w = 64);

// Frozen-encoder token rows plus branch inputs for one clip: frames are
// sampled to model t, flow and mask derive the motion clip.
struct EncodedClip {
  std::vector<double> tok_v, tok_m;
};

EncodedClip encode_clip(const HawkModel& model, const VideoClip& clip,
                        const FlowParams& flow);

std::vector<TrainSample> build_training_samples(
    const HawkModel& model, const Corpus& corpus,
    const std::vector<AnnotationRecord>& records,
    const PromptCatalog& catalog, const FlowParams& flow, AssembleMode mode,
    std::uint64_t seed);

// Anomaly corpus, its generated records, and the 90/10 split; shared by
// train and eval so both see the same data for one seed.
struct DataBundle {
  Corpus corpus;
  PipelineResult data;
  CorpusSplit split;
};

DataBundle build_stage2_data(const RunConfig& cfg, const PromptCatalog& catalog,
                             TextGenClient& client);

struct TrainLogEntry {
  int stage = 0;
  int step = 0;
  LossBreakdown loss;
};

std::string format_log_entry(const TrainLogEntry& e);

struct TrainResult {
  std::unique_ptr<HawkModel> model;
  std::vector<TrainLogEntry> log;
  Corpus corpus2;
  std::vector<AnnotationRecord> records2;
  CorpusSplit split;
  EvalMetrics held_before, held_after;
  PipelineResult datagen2;
};

// Stage 1: description-only pretraining corpus, L_VL alone. Stage 2: the
// anomaly corpus with all loss terms on the 90% train split.
TrainResult run_training(const RunConfig& cfg, const PromptCatalog& catalog,
                         TextGenClient& client,
                         AssembleMode mode = AssembleMode::kFull,
                         std::ostream* log_stream = nullptr);

// Greedy generations for the given record ids paired with their ground
// truth; task is "description" or "qa".
std::pair<std::vector<TextOutput>, std::vector<TextOutput>> generate_eval_pairs(
    const HawkModel& model, const Corpus& corpus,
    const std::vector<AnnotationRecord>& records,
    const std::vector<std::string>& ids, const PromptCatalog& catalog,
    const FlowParams& flow, const std::string& task, int max_gen_len,
    std::uint64_t seed, AssembleMode mode = AssembleMode::kFull);

}  // namespace hawk
