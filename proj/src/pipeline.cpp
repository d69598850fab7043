#include "hawk/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace hawk {

const VideoClip& Corpus::clip_by_id(const std::string& id) const {
  for (const VideoClip& c : clips)
    if (c.id == id) return c;
  throw InvalidInput("no clip with id " + id);
}

const MotionDescriptor& Corpus::descriptor_by_id(const std::string& id) const {
  for (const MotionDescriptor& d : descriptors)
    if (d.clip_id == id) return d;
  throw InvalidInput("no descriptor with id " + id);
}

Corpus make_corpus(int n_clips, int t_raw, std::uint64_t seed,
                   bool allow_anomaly, const std::string& id_prefix, int h,
                   int w) {
  if (n_clips < 0) throw InvalidInput("negative corpus size");
  Corpus corpus;
  corpus.clips.reserve(n_clips);
  corpus.descriptors.reserve(n_clips);
  for (int i = 0; i < n_clips; ++i) {
    std::string id = id_prefix + std::to_string(i);
    ScenarioSpec spec = random_scenario(seed, id, t_raw, allow_anomaly, h, w);
    auto [clip, desc] = generate_synthetic_clip(spec);
    corpus.clips.push_back(std::move(clip));
    corpus.descriptors.push_back(std::move(desc));
  }
  return corpus;
}

EncodedClip encode_clip(const HawkModel& model, const VideoClip& clip,
                        const FlowParams& flow) {
  const ModelConfig& mc = model.config();
  if (clip.c != mc.c || clip.h != mc.h || clip.w != mc.w)
    throw InvalidInput("clip shape does not match the model");
  std::vector<float> sampled = sample_frames(clip, mc.t);
  std::vector<FlowField> flows =
      flow_for_frames(sampled, mc.t, mc.c, mc.h, mc.w, flow);
  MotionClip motion = apply_mask(sampled, mc.t, mc.c, mc.h, mc.w, flows);
  EncodedClip enc;
  enc.tok_v = model.encode_video(sampled);
  enc.tok_m = model.encode_motion(motion.frames);
  return enc;
}

namespace {

std::vector<int> target_ids(const Vocabulary& vocab, const std::string& text,
                            const std::string& record_id) {
  std::vector<int> ids = vocab.encode(text);
  if (ids.empty())
    throw PipelineError(record_id, "empty training target");
  if (vocab.contains_unk(ids))
    throw PipelineError(record_id,
                        "target text uses out-of-vocabulary words: " + text);
  ids.push_back(vocab.eos_id());
  return ids;
}

}  // namespace

std::vector<TrainSample> build_training_samples(
    const HawkModel& model, const Corpus& corpus,
    const std::vector<AnnotationRecord>& records,
    const PromptCatalog& catalog, const FlowParams& flow, AssembleMode mode,
    std::uint64_t seed) {
  const Vocabulary& vocab = model.vocab();
  std::vector<TrainSample> samples;
  for (const AnnotationRecord& r : records) {
    const VideoClip& clip = corpus.clip_by_id(r.video_id);
    EncodedClip enc = encode_clip(model, clip, flow);

    Rng prompt_rng(derive_seed(seed, "describe_prompt:" + r.video_id));
    const std::string& describe_prompt =
        catalog.describe_prompts[prompt_rng.uniform_index(
            catalog.describe_prompts.size())];

    TrainSample describe;
    describe.record_id = r.video_id;
    describe.task = "describe";
    describe.tok_v = enc.tok_v;
    describe.tok_m = enc.tok_m;
    describe.prompt = model.build_prompt(describe_prompt, mode);
    describe.prompt_motion =
        model.build_prompt(describe_prompt, AssembleMode::kMotionOnly);
    describe.target = target_ids(vocab, r.description, r.video_id);
    describe.motion_target =
        motion_target_sequence(extract_motion_phrases(r.description_tokens),
                               vocab)
            .ids;
    samples.push_back(std::move(describe));

    for (const QaPair& qa : r.qa) {
      TrainSample s;
      s.record_id = r.video_id;
      s.task = "qa";
      s.tok_v = enc.tok_v;
      s.tok_m = enc.tok_m;
      s.prompt = model.build_prompt(qa.question, mode);
      s.prompt_motion =
          model.build_prompt(qa.question, AssembleMode::kMotionOnly);
      s.target = target_ids(vocab, qa.answer, r.video_id);
      s.motion_target =
          motion_target_sequence(
              extract_motion_phrases(parse_sentence(qa.answer)), vocab)
              .ids;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::string format_log_entry(const TrainLogEntry& e) {
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "stage %d step %4d  l_vl %.6f  l_mv %.6f  l_ml %.6f  "
                "total %.6f  degenerate %d",
                e.stage, e.step, e.loss.l_vl, e.loss.l_mv, e.loss.l_ml,
                e.loss.total, e.loss.degenerate);
  return buf;
}

namespace {

std::vector<AnnotationRecord> describe_only_records(const Corpus& corpus,
                                                    TextGenClient& client,
                                                    int segment_len) {
  std::vector<AnnotationRecord> records;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i)
    records.push_back(build_description_record(
        corpus.clips[i], corpus.descriptors[i], client, segment_len));
  return records;
}

}  // namespace

DataBundle build_stage2_data(const RunConfig& cfg, const PromptCatalog& catalog,
                             TextGenClient& client) {
  DataBundle bundle;
  bundle.corpus = make_corpus(cfg.clips, cfg.t_raw,
                              derive_seed(cfg.seed, "corpus_stage2"), true,
                              "vid", cfg.h, cfg.w);
  bundle.data = run_pipeline(bundle.corpus.clips, bundle.corpus.descriptors,
                             catalog, client,
                             derive_seed(cfg.seed, "datagen_stage2"),
                             cfg.k_questions, cfg.segment_len);
  std::vector<std::string> ids;
  for (const AnnotationRecord& r : bundle.data.records)
    ids.push_back(r.video_id);
  bundle.split = split_corpus(ids, derive_seed(cfg.seed, "split_stage2"));
  return bundle;
}

TrainResult run_training(const RunConfig& cfg, const PromptCatalog& catalog,
                         TextGenClient& client, AssembleMode mode,
                         std::ostream* log_stream) {
  TrainResult res;
  res.model = std::make_unique<HawkModel>(cfg.model_config(),
                                          Vocabulary::builtin(),
                                          derive_seed(cfg.seed, "init"));
  FlowParams flow = cfg.flow_params();

  auto emit = [&](int stage, int step, const LossBreakdown& loss) {
    TrainLogEntry e{stage, step, loss};
    if (log_stream) *log_stream << format_log_entry(e) << "\n";
    res.log.push_back(e);
  };

  if (cfg.stage1_steps > 0) {
    Corpus corpus1 = make_corpus(cfg.stage1_clips, cfg.t_raw,
                                 derive_seed(cfg.seed, "corpus_stage1"), false,
                                 "pre", cfg.h, cfg.w);
    std::vector<AnnotationRecord> records1 =
        describe_only_records(corpus1, client, cfg.segment_len);
    std::vector<TrainSample> samples1 = build_training_samples(
        *res.model, corpus1, records1, catalog, flow, mode,
        derive_seed(cfg.seed, "samples_stage1"));
    Trainer pre(res.model.get(), {cfg.t0, 0.0, 0.0}, cfg.lr, mode,
                cfg.reduction());
    for (int step = 1; step <= cfg.stage1_steps; ++step)
      emit(1, step, pre.train_step(samples1));
  }

  DataBundle bundle = build_stage2_data(cfg, catalog, client);
  res.corpus2 = std::move(bundle.corpus);
  res.datagen2 = std::move(bundle.data);
  res.records2 = res.datagen2.records;
  res.split = std::move(bundle.split);

  std::map<std::string, bool> in_train;
  for (const std::string& id : res.split.train_ids) in_train[id] = true;
  std::vector<AnnotationRecord> train_records, held_records;
  for (const AnnotationRecord& r : res.records2)
    (in_train.count(r.video_id) ? train_records : held_records).push_back(r);

  std::uint64_t sample_seed = derive_seed(cfg.seed, "samples_stage2");
  std::vector<TrainSample> train_samples = build_training_samples(
      *res.model, res.corpus2, train_records, catalog, flow, mode,
      sample_seed);
  std::vector<TrainSample> held_samples = build_training_samples(
      *res.model, res.corpus2, held_records, catalog, flow, mode, sample_seed);

  Trainer tuner(res.model.get(), cfg.weights(), cfg.lr, mode,
                cfg.reduction());
  res.held_before = tuner.evaluate(held_samples);
  for (int step = 1; step <= cfg.stage2_steps; ++step)
    emit(2, step, tuner.train_step(train_samples));
  res.held_after = tuner.evaluate(held_samples);
  return res;
}

std::pair<std::vector<TextOutput>, std::vector<TextOutput>>
generate_eval_pairs(const HawkModel& model, const Corpus& corpus,
                    const std::vector<AnnotationRecord>& records,
                    const std::vector<std::string>& ids,
                    const PromptCatalog& catalog, const FlowParams& flow,
                    const std::string& task, int max_gen_len,
                    std::uint64_t seed, AssembleMode mode) {
  if (task != "description" && task != "qa")
    throw InvalidInput("unknown eval task: " + task);
  std::map<std::string, const AnnotationRecord*> by_id;
  for (const AnnotationRecord& r : records) by_id[r.video_id] = &r;

  std::vector<TextOutput> outputs, references;
  for (const std::string& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidInput("no record with id " + id);
    const AnnotationRecord& r = *it->second;

    std::string task_text, reference, question;
    if (task == "description") {
      Rng rng(derive_seed(seed, "eval_prompt:" + id));
      task_text = catalog.describe_prompts[rng.uniform_index(
          catalog.describe_prompts.size())];
      reference = r.description;
    } else {
      if (r.qa.empty()) throw InvalidInput("record has no qa pairs: " + id);
      task_text = r.qa.front().question;
      question = task_text;
      reference = r.qa.front().answer;
    }

    EncodedClip enc = encode_clip(model, corpus.clip_by_id(id), flow);
    BranchCache bv, bm;
    model.branch_forward(0, enc.tok_v, &bv);
    std::vector<double> motion_proj;
    if (mode != AssembleMode::kVideoOnly) {
      model.branch_forward(1, enc.tok_m, &bm);
      motion_proj = bm.proj;
    }
    TokenSequence gen = model.generate_greedy(
        bv.proj, motion_proj, model.build_prompt(task_text, mode), mode,
        max_gen_len);
    outputs.push_back({id, model.vocab().decode(gen.ids), question});
    references.push_back({id, reference, question});
  }
  return {outputs, references};
}

}  // namespace hawk
