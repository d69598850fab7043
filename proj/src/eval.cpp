#include "hawk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <sstream>

namespace hawk {

namespace {

// k-grams joined with an unprintable separator so they can key a map.
std::map<std::string, int> kgram_counts(const std::vector<std::string>& toks,
                                        int k) {
  std::map<std::string, int> counts;
  if (static_cast<int>(toks.size()) < k) return counts;
  for (std::size_t i = 0; i + k <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int j = 1; j < k; ++j) {
      key += '\x1f';
      key += toks[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

void BleuStats::add(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference) {
  if (reference.empty()) throw InvalidInput("BLEU reference is empty");
  if (candidate.empty()) {
    empty_candidate = true;
    return;
  }
  cand_len += static_cast<long long>(candidate.size());
  ref_len += static_cast<long long>(reference.size());
  for (int k = 1; k <= 4; ++k) {
    std::map<std::string, int> cc = kgram_counts(candidate, k);
    std::map<std::string, int> rc = kgram_counts(reference, k);
    long long n_cand = 0, n_clip = 0;
    for (const auto& [gram, count] : cc) {
      n_cand += count;
      auto it = rc.find(gram);
      if (it != rc.end()) n_clip += std::min(count, it->second);
    }
    total[k - 1] += n_cand;
    clipped[k - 1] += n_clip;
  }
}

BleuScores bleu_from_stats(const BleuStats& stats) {
  BleuScores s;
  s.empty_candidate = stats.empty_candidate;
  if (stats.cand_len == 0) return s;  // all-empty corpus scores zero
  for (int k = 0; k < 4; ++k) {
    if (stats.total[k] == 0) {
      s.precision[k] = 0.0;
    } else if (stats.clipped[k] == 0) {
      s.precision[k] = 0.5 / static_cast<double>(stats.total[k]);
    } else {
      s.precision[k] = static_cast<double>(stats.clipped[k]) /
                       static_cast<double>(stats.total[k]);
    }
  }
  s.bp = std::min(1.0, std::exp(1.0 - static_cast<double>(stats.ref_len) /
                                          static_cast<double>(stats.cand_len)));
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    if (s.precision[n - 1] <= 0.0) {
      s.bleu[n - 1] = 0.0;
      continue;
    }
    log_sum += std::log(s.precision[n - 1]);
    s.bleu[n - 1] = s.bp * std::exp(log_sum / n);
  }
  return s;
}

double bleu(const std::vector<std::string>& candidate,
            const std::vector<std::string>& reference, int n) {
  if (n < 1 || n > 4) throw InvalidInput("BLEU order must be in 1..4");
  BleuStats stats;
  stats.add(candidate, reference);
  return bleu_from_stats(stats).bleu[n - 1];
}

const char* const kJudgeSystemPrompt =
    "You are an intelligent chatbot designed for evaluating the generative "
    "outputs for video-based pairs. you will be given two answers, one "
    "reference ground truth and one our generated, but this does not mean "
    "that the reference GT is the only answer. Your task is to give the "
    "score of the predicted answers.";

const char* const kJudgeAspects[3] = {"Reasonability", "Detail",
                                      "Consistency"};

namespace {

bool known_aspect(const std::string& aspect) {
  for (const char* a : kJudgeAspects)
    if (aspect == a) return true;
  return false;
}

}  // namespace

std::string judge_user_prompt(const std::string& aspect,
                              const std::string& task,
                              const std::string& reference,
                              const std::string& candidate,
                              const std::string& question) {
  if (!known_aspect(aspect)) throw InvalidInput("unknown aspect: " + aspect);
  std::string head;
  if (task == "description") {
    head =
        "### Video Description Generation\n"
        "Please evaluate the following video-based video description pair:\n"
        "Reference: " + reference + "\n" +
        "Ours: " + candidate + "\n";
  } else if (task == "qa") {
    head =
        "### Video Question-Answering\n"
        "Please evaluate the following video-based video question-answer "
        "pair:\n"
        "Question: " + question + "\n" +
        "Reference: " + reference + "\n" +
        "Ours: " + candidate + "\n";
  } else {
    throw InvalidInput("unknown judge task: " + task);
  }
  std::string tail =
      "\nProvide your evaluation only as a " + aspect +
      " score where the " + aspect +
      " score is a FLOAT value between 0 and 1, with 1 indicating the "
      "highest level of " + aspect +
      ". Please generate the response in the form of a Python dictionary "
      "string with key 'score', where its value is the " + aspect +
      " score in FLOAT, not STRING. DO NOT PROVIDE ANY OTHER OUTPUT TEXT OR "
      "EXPLANATION. Only provide the Python dictionary string. For example, "
      "your response should look like this: {'score': 0.675}.";
  return head + tail;
}

double parse_judge_score(const std::string& response, bool* out_of_range) {
  static const std::regex kScore(
      R"(\{\s*['"]score['"]\s*:\s*(-?[0-9]+(?:\.[0-9]+)?(?:[eE][-+]?[0-9]+)?)\s*\})");
  std::smatch m;
  if (!std::regex_search(response, m, kScore))
    throw JudgeParseError(response, "no score entry in judge response");
  double v = std::stod(m[1].str());
  bool oor = v < 0.0 || v > 1.0;
  if (out_of_range) *out_of_range = oor;
  return std::min(1.0, std::max(0.0, v));
}

JudgeVerdict judge_score(const JudgePair& pair, const std::string& aspect,
                         const std::string& task, TextGenClient& client,
                         int max_retries) {
  std::vector<ChatMessage> messages = {
      {"system", kJudgeSystemPrompt},
      {"user", judge_user_prompt(aspect, task, pair.reference, pair.candidate,
                                 pair.question)}};
  std::string last_raw;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    last_raw = client.complete(messages);
    try {
      JudgeVerdict v;
      v.aspect = aspect;
      v.raw_response = last_raw;
      v.score = parse_judge_score(last_raw, &v.out_of_range);
      return v;
    } catch (const JudgeParseError&) {
      if (attempt == max_retries) throw;
    }
  }
  throw JudgeParseError(last_raw, "unreachable");
}

EvalReport evaluate_corpus(const std::vector<TextOutput>& outputs,
                           const std::vector<TextOutput>& references,
                           const std::string& task, TextGenClient* client,
                           int max_retries) {
  if (task != "description" && task != "qa")
    throw InvalidInput("unknown eval task: " + task);
  if (outputs.empty() || references.empty())
    throw InvalidInput("evaluation needs at least one sample");
  std::map<std::string, const TextOutput*> by_id;
  for (const TextOutput& r : references) {
    if (!by_id.emplace(r.id, &r).second)
      throw InvalidInput("duplicate reference id: " + r.id);
  }
  std::string missing;
  std::map<std::string, bool> used;
  for (const TextOutput& o : outputs) {
    if (by_id.find(o.id) == by_id.end()) missing += " " + o.id;
    used[o.id] = true;
  }
  for (const TextOutput& r : references)
    if (used.find(r.id) == used.end()) missing += " " + r.id;
  if (!missing.empty())
    throw InvalidInput("unmatched record ids:" + missing);

  EvalReport rep;
  rep.task = task;
  rep.n_samples = static_cast<int>(outputs.size());

  BleuStats stats;
  for (const TextOutput& o : outputs) {
    const TextOutput& r = *by_id.at(o.id);
    stats.add(tokenize_text(o.text), tokenize_text(r.text));
  }
  BleuScores scores = bleu_from_stats(stats);
  rep.bleu = scores.bleu;
  rep.empty_candidate = scores.empty_candidate;

  if (client != nullptr) {
    rep.has_judge = true;
    double sums[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
      for (const TextOutput& o : outputs) {
        const TextOutput& r = *by_id.at(o.id);
        JudgePair pair{task == "qa" ? r.question : "", r.text, o.text};
        sums[a] += judge_score(pair, kJudgeAspects[a], task, *client,
                               max_retries)
                       .score;
      }
      sums[a] /= rep.n_samples;
    }
    rep.reasonability = sums[0];
    rep.detail = sums[1];
    rep.consistency = sums[2];
  }
  return rep;
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << "task: " << task << "  samples: " << n_samples << "\n";
  char buf[256];
  out << "Text-Level\n";
  out << "  BLEU-1   BLEU-2   BLEU-3   BLEU-4\n";
  std::snprintf(buf, sizeof buf, "  %.4f   %.4f   %.4f   %.4f\n", bleu[0],
                bleu[1], bleu[2], bleu[3]);
  out << buf;
  if (has_judge) {
    out << "GPT-Guided\n";
    out << "  Reasonability   Detail   Consistency\n";
    std::snprintf(buf, sizeof buf, "  %.4f          %.4f   %.4f\n",
                  reasonability, detail, consistency);
    out << buf;
  }
  if (empty_candidate) out << "warning: empty candidate in corpus\n";
  return out.str();
}

}  // namespace hawk
