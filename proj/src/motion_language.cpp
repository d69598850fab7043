#include "hawk/motion_language.hpp"

#include <unordered_map>

namespace hawk {

namespace {

const std::vector<VerbForm>& verb_forms() {
  static const std::vector<VerbForm> kVerbs = {
      {"move", "moves", "moved"},
      {"push", "pushes", "pushed"},
      {"hit", "hits", "hit"},
      {"slip", "slips", "slipped"},
      {"fall", "falls", "fallen"},
      {"run", "runs", "run"},
      {"walk", "walks", "walked"},
      {"stop", "stops", "stopped"},
      {"reverse", "reverses", "reversed"},
      {"accelerate", "accelerates", "accelerated"},
      {"appear", "appears", "appeared"},
      {"turn", "turns", "turned"}};
  return kVerbs;
}

const std::vector<std::string>& noun_list() {
  static const std::vector<std::string> kNouns = {
      "man",      "woman",  "person", "pedestrian", "car",    "truck",
      "bicycle",  "square", "disc",   "agent",      "box",    "cart",
      "ball",     "street", "sidewalk", "road",     "corner", "wall",
      "video",    "anomaly", "motion", "frame",     "direction", "speed",
      "start",    "end",    "left",   "right"};
  return kNouns;
}

std::unordered_map<std::string, LexEntry> build_lexicon() {
  std::unordered_map<std::string, LexEntry> lex;
  auto add = [&](const std::string& surface, const std::string& lemma, Pos pos,
                 bool aux = false, bool participle = false) {
    lex[surface] = LexEntry{lemma, pos, aux, participle};
  };
  for (const VerbForm& v : verb_forms()) {
    add(v.lemma, v.lemma, Pos::kVerb, false, v.participle == v.lemma);
    add(v.third_sg, v.lemma, Pos::kVerb);
    add(v.participle, v.lemma, Pos::kVerb, false, true);
  }
  for (const std::string& n : noun_list()) add(n, n, Pos::kNoun);
  for (const char* s : {"red", "green", "blue", "yellow", "white", "black",
                        "snowy", "sudden", "large", "small"})
    add(s, s, Pos::kAdj);
  for (const char* s : {"on", "in", "at", "by", "to", "for", "near", "across"})
    add(s, s, Pos::kAdp);
  for (const char* s : {"the", "a", "an"}) add(s, s, Pos::kDet);
  for (const char* s : {"suddenly", "quickly", "slowly", "then"})
    add(s, s, Pos::kAdv);
  for (const char* s : {"is", "are", "was", "were"})
    add(s, s, Pos::kOther, true);
  add("and", "and", Pos::kOther);
  for (const char* s : {"it", "they"}) add(s, s, Pos::kPron);
  return lex;
}

const std::unordered_map<std::string, LexEntry>& lexicon() {
  static const auto kLex = build_lexicon();
  return kLex;
}

bool is_nominal(Pos p) { return p == Pos::kNoun || p == Pos::kPron; }

}  // namespace

const LexEntry& lexicon_lookup(const std::string& surface) {
  static const LexEntry kUnknown{"", Pos::kOther, false, false};
  auto it = lexicon().find(surface);
  return it == lexicon().end() ? kUnknown : it->second;
}

bool lexicon_has(const std::string& surface) {
  return lexicon().count(surface) > 0;
}

const std::vector<VerbForm>& lexicon_verbs() { return verb_forms(); }
const std::vector<std::string>& lexicon_nouns() { return noun_list(); }

std::string pos_name(Pos pos) {
  switch (pos) {
    case Pos::kVerb: return "VERB";
    case Pos::kNoun: return "NOUN";
    case Pos::kAdj: return "ADJ";
    case Pos::kAdp: return "ADP";
    case Pos::kDet: return "DET";
    case Pos::kPron: return "PRON";
    case Pos::kAdv: return "ADV";
    case Pos::kOther: return "OTHER";
  }
  return "OTHER";
}

std::string dep_name(Dep dep) {
  switch (dep) {
    case Dep::kRoot: return "root";
    case Dep::kNsubj: return "nsubj";
    case Dep::kObj: return "obj";
    case Dep::kIobj: return "iobj";
    case Dep::kAgent: return "agent";
    case Dep::kObl: return "obl";
    case Dep::kDet: return "det";
    case Dep::kAmod: return "amod";
    case Dep::kCase: return "case";
    case Dep::kOther: return "other";
  }
  return "other";
}

Pos pos_from_name(const std::string& name) {
  for (Pos p : {Pos::kVerb, Pos::kNoun, Pos::kAdj, Pos::kAdp, Pos::kDet,
                Pos::kPron, Pos::kAdv, Pos::kOther})
    if (pos_name(p) == name) return p;
  throw InvalidInput("unknown pos tag: " + name);
}

Dep dep_from_name(const std::string& name) {
  for (Dep d : {Dep::kRoot, Dep::kNsubj, Dep::kObj, Dep::kIobj, Dep::kAgent,
                Dep::kObl, Dep::kDet, Dep::kAmod, Dep::kCase, Dep::kOther})
    if (dep_name(d) == name) return d;
  throw InvalidInput("unknown dep label: " + name);
}

std::vector<AnnotatedToken> parse_dependencies(
    const std::vector<std::string>& sentence) {
  if (sentence.empty()) throw InvalidInput("cannot parse an empty sentence");

  int n = static_cast<int>(sentence.size());
  std::vector<AnnotatedToken> toks(n);
  std::vector<const LexEntry*> entries(n);
  for (int i = 0; i < n; ++i) {
    toks[i].surface = sentence[i];
    const LexEntry& e = lexicon_lookup(sentence[i]);
    entries[i] = &e;
    toks[i].pos = e.pos;
    toks[i].lemma = e.lemma.empty() ? sentence[i] : e.lemma;
    toks[i].head = -2;  // unresolved
  }

  // Root: the first finite verb. With no verb the sentence is nominal and
  // every other token hangs off the last noun with dep "other".
  int root = -1;
  for (int i = 0; i < n; ++i)
    if (toks[i].pos == Pos::kVerb) {
      root = i;
      break;
    }
  if (root < 0) {
    for (int i = n - 1; i >= 0; --i)
      if (toks[i].pos == Pos::kNoun) {
        root = i;
        break;
      }
    if (root < 0) root = 0;
    toks[root].head = -1;
    toks[root].dep = Dep::kRoot;
    for (int i = 0; i < n; ++i)
      if (i != root) {
        toks[i].head = root;
        toks[i].dep = Dep::kOther;
      }
    return toks;
  }
  toks[root].head = -1;
  toks[root].dep = Dep::kRoot;

  // Passive: an auxiliary directly precedes a participle-capable root
  // (only ADV/OTHER tokens in between).
  bool passive = false;
  if (entries[root]->participle) {
    for (int j = root - 1; j >= 0; --j) {
      Pos p = toks[j].pos;
      if (entries[j]->aux) {
        passive = true;
        break;
      }
      if (p != Pos::kAdv && p != Pos::kOther) break;
    }
  }

  // Pre-verbal noun nearest the verb: nsubj, or the patient of a passive.
  for (int i = root - 1; i >= 0; --i)
    if (is_nominal(toks[i].pos)) {
      toks[i].head = root;
      toks[i].dep = passive ? Dep::kObj : Dep::kNsubj;
      break;
    }

  // Post-verbal scan. Nouns inside a prepositional phrase take their role
  // from the preposition (to/for → iobj, by → agent, else obl); the first
  // bare noun after a verb is its object.
  int current_verb = root;
  bool has_obj = false;
  int pending_adp = -1;
  for (int i = root + 1; i < n; ++i) {
    Pos p = toks[i].pos;
    if (p == Pos::kAdp) {
      pending_adp = i;
    } else if (is_nominal(p)) {
      if (pending_adp >= 0) {
        const std::string& adp = toks[pending_adp].surface;
        toks[i].dep = (adp == "to" || adp == "for") ? Dep::kIobj
                      : adp == "by"                 ? Dep::kAgent
                                                    : Dep::kObl;
        toks[i].head = current_verb;
        toks[pending_adp].head = i;
        toks[pending_adp].dep = Dep::kCase;
        pending_adp = -1;
      } else if (!has_obj) {
        toks[i].head = current_verb;
        toks[i].dep = Dep::kObj;
        has_obj = true;
      } else {
        toks[i].head = current_verb;
        toks[i].dep = Dep::kOther;
      }
    } else if (p == Pos::kVerb) {
      toks[i].head = root;
      toks[i].dep = Dep::kOther;
      current_verb = i;
      has_obj = false;
      pending_adp = -1;
    } else if (p == Pos::kAdv) {
      toks[i].head = current_verb;
      toks[i].dep = Dep::kOther;
    }
  }

  // Determiners and adjectives attach to the nearest following noun.
  for (int i = 0; i < n; ++i) {
    if (toks[i].head != -2) continue;
    Pos p = toks[i].pos;
    if (p == Pos::kDet || p == Pos::kAdj) {
      for (int j = i + 1; j < n; ++j)
        if (toks[j].pos == Pos::kNoun) {
          toks[i].head = j;
          toks[i].dep = p == Pos::kDet ? Dep::kDet : Dep::kAmod;
          break;
        }
    }
  }

  // Everything still unresolved (auxiliaries, conjunctions, punctuation,
  // unknown words, stranded modifiers) hangs off the root.
  for (int i = 0; i < n; ++i)
    if (toks[i].head == -2) {
      toks[i].head = root;
      toks[i].dep = Dep::kOther;
    }
  return toks;
}

std::vector<AnnotatedToken> parse_sentence(const std::string& text) {
  return parse_dependencies(tokenize_text(text));
}

MotionPhraseSet extract_motion_phrases(
    const std::vector<AnnotatedToken>& graph) {
  MotionPhraseSet set;
  int n = static_cast<int>(graph.size());
  for (int vi = 0; vi < n; ++vi) {
    if (graph[vi].pos != Pos::kVerb) continue;
    MotionPhrase phrase;
    phrase.verb = graph[vi].lemma;
    for (int i = 0; i < n; ++i) {
      if (graph[i].head != vi) continue;
      switch (graph[i].dep) {
        case Dep::kNsubj:
          if (phrase.subject.empty()) phrase.subject = graph[i].lemma;
          break;
        case Dep::kObj:
          if (phrase.object.empty()) phrase.object = graph[i].lemma;
          break;
        case Dep::kIobj:
          if (phrase.indirect_object.empty())
            phrase.indirect_object = graph[i].lemma;
          break;
        case Dep::kAgent:
          if (phrase.indirect_subject.empty())
            phrase.indirect_subject = graph[i].lemma;
          break;
        default:
          break;
      }
    }
    set.phrases.push_back(std::move(phrase));
  }
  return set;
}

std::vector<std::string> serialize_motion_phrases(const MotionPhraseSet& set) {
  std::vector<std::string> out;
  for (const MotionPhrase& p : set.phrases) {
    std::string line;
    auto put = [&line](const std::string& w) {
      if (w.empty()) return;
      if (!line.empty()) line += ' ';
      line += w;
    };
    put(p.subject);
    put(p.verb);
    put(p.object);
    put(p.indirect_subject);
    put(p.indirect_object);
    out.push_back(std::move(line));
  }
  return out;
}

TokenSequence motion_target_sequence(const MotionPhraseSet& set,
                                     const Vocabulary& vocab) {
  TokenSequence seq;
  seq.role = SeqRole::kMotionTarget;
  if (set.phrases.empty()) return seq;
  std::vector<std::string> tokens;
  for (const std::string& line : serialize_motion_phrases(set))
    for (const std::string& tok : tokenize_text(line)) tokens.push_back(tok);
  seq.ids = vocab.encode_tokens(tokens);
  seq.ids.push_back(vocab.eos_id());
  return seq;
}

}  // namespace hawk
