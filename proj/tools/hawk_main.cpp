#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hawk/pipeline.hpp"

namespace fs = std::filesystem;

#ifndef HAWK_DATA_DIR
#define HAWK_DATA_DIR "data"
#endif

namespace {

struct Overrides {
  std::string config;
  std::string out = "out";
  std::string client;
  std::string endpoint;
  std::string weights;
  std::string ablate;
  std::string catalog_path = std::string(HAWK_DATA_DIR) + "/prompt_catalog.json";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int clips = -1;
  int k_questions = -1;
  int segment_len = -1;
};

void add_common(CLI::App* sub, Overrides* o) {
  sub->add_option("--config", o->config, "key = value config file");
  sub->add_option("--seed", o->seed, "base seed")
      ->each([o](const std::string&) { o->seed_set = true; });
  sub->add_option("--out", o->out, "output directory");
  sub->add_option("--client", o->client, "text client: mock or remote");
  sub->add_option("--endpoint", o->endpoint, "remote chat-completion URL");
  sub->add_option("--weights", o->weights, "loss weights t0,t1,t2");
  sub->add_option("--ablate", o->ablate,
                  "drop a term: motion, consistency or matching")
      ->check(CLI::IsMember({"motion", "consistency", "matching"}));
  sub->add_option("--catalog", o->catalog_path, "prompt catalog JSON path");
}

struct Resolved {
  hawk::RunConfig cfg;
  hawk::AssembleMode mode = hawk::AssembleMode::kFull;
};

Resolved resolve(const Overrides& o) {
  Resolved r;
  if (!o.config.empty()) r.cfg = hawk::load_config_file(o.config);
  if (o.seed_set) r.cfg.seed = o.seed;
  if (!o.client.empty()) r.cfg.client = o.client;
  if (!o.endpoint.empty()) r.cfg.endpoint = o.endpoint;
  if (o.clips >= 0) r.cfg.clips = o.clips;
  if (o.k_questions >= 0) r.cfg.k_questions = o.k_questions;
  if (o.segment_len >= 0) r.cfg.segment_len = o.segment_len;
  if (!o.weights.empty()) {
    double t0 = 0, t1 = 0, t2 = 0;
    char extra = 0;
    if (std::sscanf(o.weights.c_str(), "%lf,%lf,%lf%c", &t0, &t1, &t2,
                    &extra) != 3)
      throw hawk::ConfigError("--weights must be a t0,t1,t2 triple");
    r.cfg.t0 = t0;
    r.cfg.t1 = t1;
    r.cfg.t2 = t2;
  }
  if (o.ablate == "motion") {
    r.mode = hawk::AssembleMode::kVideoOnly;
    r.cfg.t1 = 0.0;
    r.cfg.t2 = 0.0;
  } else if (o.ablate == "consistency") {
    r.cfg.t1 = 0.0;
  } else if (o.ablate == "matching") {
    r.cfg.t2 = 0.0;
  }
  r.cfg.validate();
  return r;
}

std::unique_ptr<hawk::TextGenClient> make_cfg_client(const hawk::RunConfig& cfg) {
  return hawk::make_client(cfg.client, cfg.remote_config(),
                           hawk::derive_seed(cfg.seed, "client"));
}

hawk::PromptCatalog load_catalog(const Overrides& o) {
  return hawk::PromptCatalog::load_file(o.catalog_path);
}

fs::path ensure_out(const Overrides& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

std::string split_to_json(const hawk::CorpusSplit& split) {
  nlohmann::json j{{"train_ids", split.train_ids},
                   {"test_ids", split.test_ids},
                   {"seed", split.seed}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

void cmd_synth(const Overrides& o, bool no_anomaly) {
  Resolved r = resolve(o);
  fs::path dir = ensure_out(o);
  hawk::Corpus corpus = hawk::make_corpus(
      r.cfg.clips, r.cfg.t_raw, hawk::derive_seed(r.cfg.seed, "corpus_stage2"),
      !no_anomaly, "vid", r.cfg.h, r.cfg.w);
  std::string descriptors;
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    hawk::write_file((dir / (corpus.clips[i].id + ".clip")).string(),
                     hawk::save_clip_tensor(corpus.clips[i]));
    descriptors += hawk::descriptor_to_json(corpus.descriptors[i]) + "\n";
  }
  hawk::write_file((dir / "descriptors.jsonl").string(), descriptors);
  std::cout << "wrote " << corpus.clips.size() << " clips to " << dir.string()
            << "\n";
}

void cmd_datagen(const Overrides& o) {
  Resolved r = resolve(o);
  fs::path dir = ensure_out(o);
  hawk::PromptCatalog catalog = load_catalog(o);
  std::unique_ptr<hawk::TextGenClient> client = make_cfg_client(r.cfg);
  hawk::Corpus corpus = hawk::make_corpus(
      r.cfg.clips, r.cfg.t_raw, hawk::derive_seed(r.cfg.seed, "corpus_stage2"),
      true, "vid", r.cfg.h, r.cfg.w);
  hawk::PipelineResult res = hawk::run_pipeline(
      corpus.clips, corpus.descriptors, catalog, *client,
      hawk::derive_seed(r.cfg.seed, "datagen_stage2"), r.cfg.k_questions,
      r.cfg.segment_len);
  hawk::write_file((dir / "dataset.jsonl").string(),
                   hawk::save_dataset(res.records));
  hawk::write_file((dir / "review.jsonl").string(),
                   hawk::save_review_queue(res.review));
  if (res.records.size() >= 10) {
    std::vector<std::string> ids;
    for (const auto& rec : res.records) ids.push_back(rec.video_id);
    hawk::CorpusSplit split = hawk::split_corpus(
        ids, hawk::derive_seed(r.cfg.seed, "split_stage2"));
    hawk::write_file((dir / "split.json").string(), split_to_json(split));
  } else if (!res.records.empty()) {
    std::cout << "warning: fewer than 10 records, no split written\n";
  }
  std::cout << res.summary();
}

void cmd_flow(const Overrides& o, const std::string& in_path) {
  Resolved r = resolve(o);
  fs::path dir = ensure_out(o);
  hawk::VideoClip clip;
  if (in_path.empty()) {
    hawk::ScenarioSpec spec = hawk::random_scenario(
        hawk::derive_seed(r.cfg.seed, "flow_preview"), "flow0", r.cfg.t_raw,
        true, r.cfg.h, r.cfg.w);
    clip = hawk::generate_synthetic_clip(spec).first;
  } else {
    clip = hawk::load_clip_tensor(hawk::read_file(in_path),
                                  fs::path(in_path).stem().string());
  }
  std::vector<hawk::FlowField> flows =
      hawk::flow_for_clip(clip, r.cfg.flow_params());
  for (const hawk::FlowField& f : flows) {
    char name[32];
    std::snprintf(name, sizeof name, "flow_%03d.hwkf", f.t);
    hawk::write_file((dir / name).string(), hawk::save_flow_field(f));
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      mu += std::abs(f.u[i]);
      mv += std::abs(f.v[i]);
    }
    mu /= static_cast<double>(f.u.size());
    mv /= static_cast<double>(f.v.size());
    std::printf("pair %2d  mean |u| %.4f  mean |v| %.4f\n", f.t, mu, mv);
  }
  hawk::MotionClip motion = hawk::apply_mask(clip, flows);
  hawk::VideoClip masked = clip;
  masked.id = clip.id + "_motion";
  masked.frames = motion.frames;
  hawk::write_file((dir / "motion.clip").string(),
                   hawk::save_clip_tensor(masked));
  std::cout << "wrote " << flows.size() << " flow fields and motion clip to "
            << dir.string() << "\n";
}

void cmd_train(const Overrides& o) {
  Resolved r = resolve(o);
  fs::path dir = ensure_out(o);
  hawk::PromptCatalog catalog = load_catalog(o);
  std::unique_ptr<hawk::TextGenClient> client = make_cfg_client(r.cfg);
  std::ostringstream log;
  hawk::TrainResult res =
      hawk::run_training(r.cfg, catalog, *client, r.mode, &log);
  hawk::write_file((dir / "train_log.txt").string(), log.str());
  hawk::write_file((dir / "checkpoint.bin").string(),
                   res.model->save_checkpoint());
  hawk::write_file((dir / "dataset.jsonl").string(),
                   hawk::save_dataset(res.records2));
  hawk::write_file((dir / "review.jsonl").string(),
                   hawk::save_review_queue(res.datagen2.review));
  hawk::write_file((dir / "split.json").string(), split_to_json(res.split));
  if (!res.log.empty()) {
    std::cout << hawk::format_log_entry(res.log.front()) << "\n";
    std::cout << hawk::format_log_entry(res.log.back()) << "\n";
  }
  std::printf("held-out total before %.6f after %.6f\n",
              res.held_before.loss.total, res.held_after.loss.total);
  std::printf("held-out cosine %.6f  motion-ce %.6f\n",
              res.held_after.mean_cosine, res.held_after.motion_ce);
  std::cout << "checkpoint written to " << (dir / "checkpoint.bin").string()
            << "\n";
}

void cmd_eval(const Overrides& o, const std::string& checkpoint,
              const std::string& task, bool with_judge) {
  Resolved r = resolve(o);
  fs::path dir = ensure_out(o);
  hawk::PromptCatalog catalog = load_catalog(o);
  std::unique_ptr<hawk::TextGenClient> client = make_cfg_client(r.cfg);
  std::string ckpt_path =
      checkpoint.empty() ? (dir / "checkpoint.bin").string() : checkpoint;
  hawk::HawkModel model =
      hawk::HawkModel::load_checkpoint(hawk::read_file(ckpt_path));
  hawk::DataBundle bundle = hawk::build_stage2_data(r.cfg, catalog, *client);

  std::vector<std::string> held;
  for (const std::string& id : bundle.split.test_ids)
    for (const hawk::AnnotationRecord& rec : bundle.data.records)
      if (rec.video_id == id) held.push_back(id);

  std::vector<std::string> tasks;
  if (task.empty()) tasks = {"description", "qa"};
  else tasks = {task};
  for (const std::string& t : tasks) {
    auto [outputs, refs] = hawk::generate_eval_pairs(
        model, bundle.corpus, bundle.data.records, held, catalog,
        r.cfg.flow_params(), t, r.cfg.max_gen_len, r.cfg.seed, r.mode);
    hawk::EvalReport rep = hawk::evaluate_corpus(
        outputs, refs, t, with_judge ? client.get() : nullptr,
        r.cfg.max_retries);
    std::cout << rep.to_table();
    hawk::write_file((dir / ("report_" + t + ".txt")).string(),
                     rep.to_table());
  }
}

void cmd_judge(const Overrides& o, const std::string& reference,
               const std::string& candidate, const std::string& question,
               const std::string& task, const std::string& aspect) {
  Resolved r = resolve(o);
  std::unique_ptr<hawk::TextGenClient> client = make_cfg_client(r.cfg);
  std::vector<std::string> aspects;
  if (aspect == "all")
    aspects = {"Reasonability", "Detail", "Consistency"};
  else
    aspects = {aspect};
  hawk::JudgePair pair{question, reference, candidate};
  for (const std::string& a : aspects) {
    hawk::JudgeVerdict v =
        hawk::judge_score(pair, a, task, *client, r.cfg.max_retries);
    std::printf("%s: %.3f%s\n", v.aspect.c_str(), v.score,
                v.out_of_range ? " (clamped)" : "");
  }
}

void cmd_review(const Overrides& o, const std::string& queue_path, bool list,
                const std::string& id, const std::string& stage,
                const std::string& note) {
  std::string path =
      queue_path.empty() ? (fs::path(o.out) / "review.jsonl").string()
                         : queue_path;
  std::vector<hawk::ReviewItem> items =
      hawk::load_review_queue(hawk::read_file(path));
  if (list || id.empty()) {
    for (const hawk::ReviewItem& it : items)
      std::cout << it.record_id << "\t" << it.stage
                << (it.note.empty() ? "" : "\t" + it.note) << "\n";
    return;
  }
  hawk::transition_review_item(&items, id, stage, note);
  hawk::write_file(path, hawk::save_review_queue(items));
  std::cout << id << " -> " << stage << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hawk: toy video anomaly understanding pipeline"};
  app.require_subcommand(1);

  Overrides o_synth, o_datagen, o_flow, o_train, o_eval, o_judge, o_review;

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic clip corpus");
  add_common(synth, &o_synth);
  bool no_anomaly = false;
  synth->add_option("--clips", o_synth.clips, "number of clips");
  synth->add_flag("--no-anomaly", no_anomaly, "anomaly-free corpus");

  CLI::App* datagen =
      app.add_subcommand("datagen", "generate the annotation dataset");
  add_common(datagen, &o_datagen);
  datagen->add_option("--clips", o_datagen.clips, "number of clips");
  datagen->add_option("--k-questions", o_datagen.k_questions,
                      "questions per record");
  datagen->add_option("--segment-len", o_datagen.segment_len,
                      "frames per caption segment");

  CLI::App* flow = app.add_subcommand("flow", "flow and mask preview");
  add_common(flow, &o_flow);
  std::string flow_in;
  flow->add_option("--in", flow_in, "clip tensor file (default: synthesize)");

  CLI::App* train = app.add_subcommand("train", "run training stages 1 and 2");
  add_common(train, &o_train);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, &o_eval);
  std::string eval_checkpoint, eval_task;
  bool eval_judge = false;
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint path");
  eval->add_option("--task", eval_task, "description or qa (default: both)")
      ->check(CLI::IsMember({"description", "qa"}));
  eval->add_flag("--judge", eval_judge, "also score with the judge client");

  CLI::App* judge = app.add_subcommand("judge", "score one pair");
  add_common(judge, &o_judge);
  std::string j_ref, j_cand, j_question, j_task = "description",
              j_aspect = "all";
  judge->add_option("--reference", j_ref, "ground truth text")->required();
  judge->add_option("--candidate", j_cand, "generated text")->required();
  judge->add_option("--question", j_question, "question (qa task)");
  judge->add_option("--task", j_task, "description or qa")
      ->check(CLI::IsMember({"description", "qa"}));
  judge->add_option("--aspect", j_aspect, "aspect or all")
      ->check(CLI::IsMember({"Reasonability", "Detail", "Consistency", "all"}));

  CLI::App* review = app.add_subcommand("review", "inspect or update the queue");
  add_common(review, &o_review);
  std::string rv_queue, rv_id, rv_stage, rv_note;
  bool rv_list = false;
  review->add_flag("--list", rv_list, "print the queue");
  review->add_option("--queue", rv_queue, "queue file path");
  review->add_option("--id", rv_id, "record id to update");
  review->add_option("--stage", rv_stage, "new stage")
      ->check(CLI::IsMember({"pending", "checked", "rejected"}));
  review->add_option("--note", rv_note, "reviewer note");

  synth->callback([&] { cmd_synth(o_synth, no_anomaly); });
  datagen->callback([&] { cmd_datagen(o_datagen); });
  flow->callback([&] { cmd_flow(o_flow, flow_in); });
  train->callback([&] { cmd_train(o_train); });
  eval->callback(
      [&] { cmd_eval(o_eval, eval_checkpoint, eval_task, eval_judge); });
  judge->callback(
      [&] { cmd_judge(o_judge, j_ref, j_cand, j_question, j_task, j_aspect); });
  review->callback(
      [&] { cmd_review(o_review, rv_queue, rv_list, rv_id, rv_stage, rv_note); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const hawk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hawk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
