#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hawk/common.hpp"
#include "hawk/vocab.hpp"

namespace hawk {

enum class Pos { kVerb, kNoun, kAdj, kAdp, kDet, kPron, kAdv, kOther };

enum class Dep {
  kRoot,
  kNsubj,
  kObj,
  kIobj,
  kAgent,
  kObl,
  kDet,
  kAmod,
  kCase,
  kOther
};

struct AnnotatedToken {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::kOther;
  int head = -1;        // token index, -1 for the root
  Dep dep = Dep::kOther;

  bool operator==(const AnnotatedToken&) const = default;
};

struct LexEntry {
  std::string lemma;
  Pos pos = Pos::kOther;
  bool aux = false;         // is/are/was/were
  bool participle = false;  // passive-capable verb form
};

// Closed lexicon lookup; unknown surfaces get pos OTHER and their own
// surface as lemma.
const LexEntry& lexicon_lookup(const std::string& surface);
bool lexicon_has(const std::string& surface);

// All verb lemmas with their third-person-singular surface form, for the
// round-trip property.
struct VerbForm {
  std::string lemma, third_sg, participle;
};
const std::vector<VerbForm>& lexicon_verbs();
const std::vector<std::string>& lexicon_nouns();

std::string pos_name(Pos pos);
std::string dep_name(Dep dep);
Pos pos_from_name(const std::string& name);
Dep dep_from_name(const std::string& name);

std::vector<AnnotatedToken> parse_dependencies(
    const std::vector<std::string>& sentence);
std::vector<AnnotatedToken> parse_sentence(const std::string& text);

struct MotionPhrase {
  std::string verb;               // lemma, always present
  std::string subject;            // S, empty when absent
  std::string object;             // O
  std::string indirect_subject;   // S_i (passive "by" agent)
  std::string indirect_object;    // O_i (to/for phrase)

  bool operator==(const MotionPhrase&) const = default;
};

struct MotionPhraseSet {
  std::vector<MotionPhrase> phrases;

  bool operator==(const MotionPhraseSet&) const = default;
};

MotionPhraseSet extract_motion_phrases(const std::vector<AnnotatedToken>& graph);

// "S V O S_i O_i" per phrase, empty slots skipped, phrases joined in order.
std::vector<std::string> serialize_motion_phrases(const MotionPhraseSet& set);
TokenSequence motion_target_sequence(const MotionPhraseSet& set,
                                     const Vocabulary& vocab);

}  // namespace hawk
