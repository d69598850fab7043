#include "hawk/datagen.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace hawk {

using nlohmann::json;

const char* const kPronounClasses[7] = {"What", "Who",  "Where", "When",
                                        "How",  "How much", "Why"};

namespace {

bool known_class(const std::string& c) {
  for (const char* k : kPronounClasses)
    if (c == k) return true;
  return false;
}

}  // namespace

PromptCatalog PromptCatalog::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prompt catalog is not valid JSON: ") +
                      e.what());
  }
  PromptCatalog cat;
  try {
    for (const auto& p : j.at("describe_prompts"))
      cat.describe_prompts.push_back(p.get<std::string>());
    for (const auto& q : j.at("open_questions")) {
      cat.open_questions.push_back(q.at("question").get<std::string>());
      cat.pronoun_class.push_back(q.at("pronoun").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prompt catalog missing fields: ") +
                      e.what());
  }
  cat.validate();
  return cat;
}

PromptCatalog PromptCatalog::load_file(const std::string& path) {
  return from_json(read_file(path));
}

void PromptCatalog::validate() const {
  if (describe_prompts.size() != 20)
    throw ConfigError("catalog must hold exactly 20 describe prompts, got " +
                      std::to_string(describe_prompts.size()));
  if (open_questions.size() != 100 || pronoun_class.size() != 100)
    throw ConfigError("catalog must hold exactly 100 questions, got " +
                      std::to_string(open_questions.size()));
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < open_questions.size(); ++i) {
    if (open_questions[i].empty()) throw ConfigError("empty catalog question");
    if (!known_class(pronoun_class[i]))
      throw ConfigError("unknown pronoun class: " + pronoun_class[i]);
    ++counts[pronoun_class[i]];
  }
  for (const char* k : kPronounClasses)
    if (counts[k] == 0)
      throw ConfigError(std::string("pronoun class never used: ") + k);
  for (const std::string& p : describe_prompts)
    if (p.empty()) throw ConfigError("empty describe prompt");
}

const std::string& PromptCatalog::class_of(const std::string& question) const {
  for (std::size_t i = 0; i < open_questions.size(); ++i)
    if (open_questions[i] == question) return pronoun_class[i];
  throw InvalidInput("question is not in the catalog: " + question);
}

namespace {

std::string timing_phrase(int anomaly_frame, int t_raw) {
  return anomaly_frame <= t_raw / 2 ? "at the start" : "near the end";
}

std::string anomaly_caption(const MotionDescriptor& d, int t_raw) {
  if (d.anomaly_agent < 0 ||
      d.anomaly_agent >= static_cast<int>(d.agents.size()))
    throw InvalidInput("anomaly agent index out of range");
  const AgentTrack& a = d.agents[d.anomaly_agent];
  std::string timing = timing_phrase(d.anomaly_frame, t_raw);
  if (d.anomaly == "reversal")
    return "the " + a.color + " " + a.shape + " suddenly reverses direction " +
           timing;
  if (d.anomaly == "speedup")
    return "the " + a.color + " " + a.shape + " suddenly accelerates " + timing;
  if (d.anomaly == "stop")
    return "the " + a.color + " " + a.shape + " suddenly stops " + timing;
  if (d.anomaly == "new_agent")
    return "a " + a.color + " " + a.shape + " suddenly appears on the " +
           d.location + " " + timing;
  throw InvalidInput("unknown anomaly kind: " + d.anomaly);
}

}  // namespace

std::vector<std::string> segment_captions(const MotionDescriptor& desc,
                                          int t_raw, int segment_len) {
  if (segment_len < 1) throw ConfigError("segment length must be >= 1");
  if (t_raw < 1) throw InvalidInput("clip has no frames");
  if (desc.agents.empty()) throw InvalidInput("descriptor has no agents");
  const AgentTrack& primary = desc.agents.front();
  std::string normal = "the " + primary.color + " " + primary.shape +
                       " moves across the " + desc.location;
  std::vector<std::string> captions;
  for (int s = 0; s < t_raw; s += segment_len) {
    int e = std::min(s + segment_len, t_raw);
    bool anomalous = desc.anomaly != "none" && desc.anomaly_frame >= s &&
                     desc.anomaly_frame < e;
    captions.push_back(anomalous ? anomaly_caption(desc, t_raw) : normal);
  }
  return captions;
}

std::vector<ChatMessage> describe_request(
    const std::vector<std::string>& captions) {
  std::string user = "Captions:\n";
  for (const std::string& c : captions) user += "- " + c + "\n";
  user += "Write one sentence describing the anomaly in the video.";
  return {{"system",
           "You are an assistant that writes one-sentence anomaly "
           "descriptions of videos."},
          {"user", user}};
}

std::vector<ChatMessage> answer_request(const std::string& description,
                                        const std::string& question,
                                        const std::string& pronoun) {
  std::string user = "Description: " + description + "\nQuestion: " +
                     question + "\nPronoun: " + pronoun +
                     "\nAnswer the question briefly.";
  return {{"system",
           "You are an assistant that answers questions about videos "
           "briefly."},
          {"user", user}};
}

AnnotationRecord build_description_record(const VideoClip& clip,
                                          const MotionDescriptor& desc,
                                          TextGenClient& client,
                                          int segment_len) {
  clip.validate();
  std::vector<std::string> captions =
      segment_captions(desc, clip.t_raw, segment_len);
  std::string description;
  try {
    description = client.complete(describe_request(captions));
  } catch (const ClientError& e) {
    throw PipelineError(desc.clip_id, e.what());
  }
  if (description.empty())
    throw PipelineError(desc.clip_id, "client returned an empty description");
  AnnotationRecord r;
  r.video_id = desc.clip_id;
  r.description = description;
  r.description_tokens = parse_sentence(description);
  r.review_status = "auto";
  r.scenario_tag = desc.scenario_tag;
  return r;
}

void build_qa_pairs(AnnotationRecord* record, const PromptCatalog& catalog,
                    TextGenClient& client, std::uint64_t seed,
                    int k_questions) {
  if (record->description.empty())
    throw InvalidInput("record has no description: " + record->video_id);
  if (k_questions < 1 ||
      k_questions > static_cast<int>(catalog.open_questions.size()))
    throw ConfigError("k_questions out of range");
  std::vector<std::size_t> order(catalog.open_questions.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  for (int i = 0; i < k_questions; ++i) {
    const std::string& q = catalog.open_questions[order[i]];
    const std::string& cls = catalog.pronoun_class[order[i]];
    std::string answer;
    try {
      answer = client.complete(answer_request(record->description, q, cls));
    } catch (const ClientError& e) {
      throw PipelineError(record->video_id, e.what());
    }
    record->qa.push_back({q, answer});
  }
}

PipelineResult run_pipeline(const std::vector<VideoClip>& clips,
                            const std::vector<MotionDescriptor>& descriptors,
                            const PromptCatalog& catalog, TextGenClient& client,
                            std::uint64_t seed, int k_questions,
                            int segment_len) {
  if (clips.size() != descriptors.size())
    throw InvalidInput("clip and descriptor lists must align");
  PipelineResult res;
  if (clips.empty()) {
    res.empty_corpus = true;
    return res;
  }
  for (std::size_t i = 0; i < clips.size(); ++i) {
    try {
      AnnotationRecord r = build_description_record(clips[i], descriptors[i],
                                                    client, segment_len);
      build_qa_pairs(&r, catalog,
                     client, derive_seed(seed, "qa:" + r.video_id),
                     k_questions);
      for (const QaPair& qa : r.qa) {
        ++res.pronoun_histogram[catalog.class_of(qa.question)];
        ++res.n_qa;
      }
      res.review.push_back({r.video_id, "pending", ""});
      res.records.push_back(std::move(r));
    } catch (const PipelineError& e) {
      res.failed_ids.push_back(e.record_id());
    }
  }
  return res;
}

std::string PipelineResult::summary() const {
  std::ostringstream out;
  if (empty_corpus) out << "warning: empty corpus, nothing generated\n";
  out << "records: " << records.size() << "\n";
  out << "qa pairs: " << n_qa << "\n";
  out << "pronoun histogram:";
  for (const char* k : kPronounClasses) {
    auto it = pronoun_histogram.find(k);
    out << " " << k << "=" << (it == pronoun_histogram.end() ? 0 : it->second);
  }
  out << "\n";
  if (!failed_ids.empty()) {
    out << "failed records:";
    for (const std::string& id : failed_ids) out << " " << id;
    out << "\n";
  }
  return out.str();
}

namespace {

json token_to_json(const AnnotatedToken& t) {
  return json{{"surface", t.surface},
              {"lemma", t.lemma},
              {"pos", pos_name(t.pos)},
              {"head", t.head},
              {"dep", dep_name(t.dep)}};
}

AnnotatedToken token_from_json(const json& j) {
  AnnotatedToken t;
  t.surface = j.at("surface").get<std::string>();
  t.lemma = j.at("lemma").get<std::string>();
  t.pos = pos_from_name(j.at("pos").get<std::string>());
  t.head = j.at("head").get<int>();
  t.dep = dep_from_name(j.at("dep").get<std::string>());
  return t;
}

}  // namespace

std::string record_to_json(const AnnotationRecord& r) {
  json toks = json::array();
  for (const AnnotatedToken& t : r.description_tokens)
    toks.push_back(token_to_json(t));
  json qa = json::array();
  for (const QaPair& p : r.qa)
    qa.push_back(json{{"question", p.question}, {"answer", p.answer}});
  json j{{"video_id", r.video_id},
         {"description", r.description},
         {"description_tokens", toks},
         {"qa", qa},
         {"review_status", r.review_status},
         {"scenario_tag", r.scenario_tag}};
  return j.dump();
}

AnnotationRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad record line: ") + e.what());
  }
  AnnotationRecord r;
  try {
    r.video_id = j.at("video_id").get<std::string>();
    r.description = j.at("description").get<std::string>();
    for (const auto& t : j.at("description_tokens"))
      r.description_tokens.push_back(token_from_json(t));
    for (const auto& p : j.at("qa"))
      r.qa.push_back({p.at("question").get<std::string>(),
                      p.at("answer").get<std::string>()});
    r.review_status = j.at("review_status").get<std::string>();
    r.scenario_tag = j.at("scenario_tag").get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("record missing fields: ") + e.what());
  }
  return r;
}

std::string save_dataset(const std::vector<AnnotationRecord>& records) {
  std::string out;
  for (const AnnotationRecord& r : records) {
    out += record_to_json(r);
    out += '\n';
  }
  return out;
}

std::vector<AnnotationRecord> load_dataset(const std::string& text) {
  std::vector<AnnotationRecord> records;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) records.push_back(record_from_json(text.substr(pos, eol - pos)));
    pos = eol + 1;
  }
  return records;
}

std::string save_review_queue(const std::vector<ReviewItem>& items) {
  std::string out;
  for (const ReviewItem& it : items) {
    json j{{"record_id", it.record_id}, {"stage", it.stage}, {"note", it.note}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ReviewItem> load_review_queue(const std::string& text) {
  std::vector<ReviewItem> items;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) {
      json j;
      try {
        j = json::parse(text.substr(pos, eol - pos));
      } catch (const json::exception& e) {
        throw InvalidInput(std::string("bad review line: ") + e.what());
      }
      ReviewItem it;
      it.record_id = j.at("record_id").get<std::string>();
      it.stage = j.at("stage").get<std::string>();
      it.note = j.at("note").get<std::string>();
      items.push_back(std::move(it));
    }
    pos = eol + 1;
  }
  return items;
}

void transition_review_item(std::vector<ReviewItem>* items,
                            const std::string& record_id,
                            const std::string& stage, const std::string& note) {
  if (stage != "pending" && stage != "checked" && stage != "rejected")
    throw InvalidInput("unknown review stage: " + stage);
  for (ReviewItem& it : *items) {
    if (it.record_id == record_id) {
      it.stage = stage;
      if (!note.empty()) it.note = note;
      return;
    }
  }
  throw InvalidInput("no review item for record: " + record_id);
}

}  // namespace hawk
