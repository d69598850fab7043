#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hawk/clipsynth.hpp"
#include "hawk/motion_language.hpp"
#include "hawk/textgen.hpp"

namespace hawk {

struct QaPair {
  std::string question;
  std::string answer;

  bool operator==(const QaPair&) const = default;
};

struct AnnotationRecord {
  std::string video_id;
  std::string description;
  std::vector<AnnotatedToken> description_tokens;
  std::vector<QaPair> qa;
  std::string review_status = "auto";
  std::string scenario_tag;

  bool operator==(const AnnotationRecord&) const = default;
};

struct PromptCatalog {
  std::vector<std::string> describe_prompts;          // exactly 20
  std::vector<std::string> open_questions;            // exactly 100
  std::vector<std::string> pronoun_class;             // one per question

  static PromptCatalog from_json(const std::string& text);
  static PromptCatalog load_file(const std::string& path);
  void validate() const;
  const std::string& class_of(const std::string& question) const;
};

extern const char* const kPronounClasses[7];

struct ReviewItem {
  std::string record_id;
  std::string stage = "pending";  // pending | checked | rejected
  std::string note;

  bool operator==(const ReviewItem&) const = default;
};

// Per-segment captions derived from the ground-truth tracks; the segment
// containing the anomaly frame gets the anomaly sentence.
std::vector<std::string> segment_captions(const MotionDescriptor& desc,
                                          int t_raw, int segment_len);

std::vector<ChatMessage> describe_request(const std::vector<std::string>& captions);
std::vector<ChatMessage> answer_request(const std::string& description,
                                        const std::string& question,
                                        const std::string& pronoun);

AnnotationRecord build_description_record(const VideoClip& clip,
                                          const MotionDescriptor& desc,
                                          TextGenClient& client,
                                          int segment_len = 4);

void build_qa_pairs(AnnotationRecord* record, const PromptCatalog& catalog,
                    TextGenClient& client, std::uint64_t seed,
                    int k_questions = 1);

struct PipelineResult {
  std::vector<AnnotationRecord> records;
  std::vector<ReviewItem> review;
  std::vector<std::string> failed_ids;
  std::map<std::string, int> pronoun_histogram;
  int n_qa = 0;
  bool empty_corpus = false;

  std::string summary() const;
};

PipelineResult run_pipeline(const std::vector<VideoClip>& clips,
                            const std::vector<MotionDescriptor>& descriptors,
                            const PromptCatalog& catalog, TextGenClient& client,
                            std::uint64_t seed, int k_questions = 1,
                            int segment_len = 4);

// JSONL with fields video_id, description, description_tokens, qa,
// review_status, scenario_tag.
std::string record_to_json(const AnnotationRecord& r);
AnnotationRecord record_from_json(const std::string& line);
std::string save_dataset(const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> load_dataset(const std::string& text);

std::string save_review_queue(const std::vector<ReviewItem>& items);
std::vector<ReviewItem> load_review_queue(const std::string& text);
void transition_review_item(std::vector<ReviewItem>* items,
                            const std::string& record_id,
                            const std::string& stage, const std::string& note);

}  // namespace hawk
