#pragma once

#include <array>
#include <string>
#include <vector>

#include "hawk/textgen.hpp"

namespace hawk {

// Corpus-level BLEU accumulator: clipped counts are summed over all pairs
// before dividing.
struct BleuStats {
  std::array<long long, 4> clipped{};
  std::array<long long, 4> total{};
  long long cand_len = 0;
  long long ref_len = 0;
  bool empty_candidate = false;

  void add(const std::vector<std::string>& candidate,
           const std::vector<std::string>& reference);
};

struct BleuScores {
  std::array<double, 4> bleu{};       // BLEU-1..4
  std::array<double, 4> precision{};  // clipped modified k-gram precisions
  double bp = 1.0;
  bool empty_candidate = false;
};

BleuScores bleu_from_stats(const BleuStats& stats);

// Sentence-level convenience: one pair, one order.
double bleu(const std::vector<std::string>& candidate,
            const std::vector<std::string>& reference, int n);

// ---------------------------------------------------------------------------
// Judge harness

extern const char* const kJudgeSystemPrompt;
extern const char* const kJudgeAspects[3];  // Reasonability, Detail, Consistency

std::string judge_user_prompt(const std::string& aspect,
                              const std::string& task,
                              const std::string& reference,
                              const std::string& candidate,
                              const std::string& question = "");

// First braced score entry in the response; clamped to [0,1] with a flag.
double parse_judge_score(const std::string& response, bool* out_of_range);

struct JudgeVerdict {
  std::string aspect;
  double score = 0.0;
  std::string raw_response;
  bool out_of_range = false;
};

struct JudgePair {
  std::string question;  // qa task only
  std::string reference;
  std::string candidate;
};

JudgeVerdict judge_score(const JudgePair& pair, const std::string& aspect,
                         const std::string& task, TextGenClient& client,
                         int max_retries = 2);

// ---------------------------------------------------------------------------
// Corpus evaluation

struct TextOutput {
  std::string id;
  std::string text;
  std::string question;  // qa task only
};

struct EvalReport {
  std::string task;  // "description" or "qa"
  int n_samples = 0;
  std::array<double, 4> bleu{};
  bool has_judge = false;
  double reasonability = 0.0;
  double detail = 0.0;
  double consistency = 0.0;
  bool empty_candidate = false;

  std::string to_table() const;
};

EvalReport evaluate_corpus(const std::vector<TextOutput>& outputs,
                           const std::vector<TextOutput>& references,
                           const std::string& task,
                           TextGenClient* client = nullptr,
                           int max_retries = 2);

}  // namespace hawk
