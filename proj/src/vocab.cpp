#include "hawk/vocab.hpp"

namespace hawk {

namespace {

std::vector<std::string> builtin_tokens() {
  return {
      // specials
      "<pad>", "<bos>", "<eos>", "<unk>", "<video_emb>", "<motion_emb>",
      // punctuation
      ".", ",", "?", "!", ":", "'",
      // determiners
      "the", "a", "an",
      // nouns
      "man", "woman", "person", "pedestrian", "car", "truck", "bicycle",
      "square", "disc", "agent", "box", "cart", "ball", "street", "sidewalk",
      "road", "corner", "wall", "video", "anomaly", "motion", "frame",
      "direction", "speed", "start", "end", "left", "right",
      // verb lemmas
      "move", "push", "hit", "slip", "fall", "run", "walk", "stop", "reverse",
      "accelerate", "appear", "turn",
      // third-person singular forms
      "moves", "pushes", "hits", "slips", "falls", "runs", "walks", "stops",
      "reverses", "accelerates", "appears", "turns",
      // distinct past participles
      "moved", "pushed", "slipped", "fallen", "walked", "stopped", "reversed",
      "accelerated", "appeared", "turned",
      // adjectives
      "red", "green", "blue", "yellow", "white", "black", "snowy", "sudden",
      "large", "small",
      // adpositions
      "on", "in", "at", "by", "to", "for", "near", "across",
      // adverbs
      "suddenly", "quickly", "slowly", "then",
      // auxiliaries
      "is", "are", "was", "were",
      // conjunction and pronouns
      "and", "it", "they",
      // question pronouns
      "what", "who", "where", "when", "how", "why", "much",
      // prompt-template words
      "here", "input", "embedding", "different", "frames", "please", "help",
      "me",
      // task words
      "can", "you", "describe", "because",
      // reserved padding to V = 128
      "<extra_0>", "<extra_1>", "<extra_2>"};
}

}  // namespace

const Vocabulary& Vocabulary::builtin() {
  static const Vocabulary vocab(builtin_tokens());
  return vocab;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], i);
    if (!inserted) throw InvalidInput("duplicate vocabulary token: " + tokens_[i]);
  }
  auto find_special = [&](const char* tok) {
    auto it = index_.find(tok);
    if (it == index_.end())
      throw InvalidInput(std::string("vocabulary missing special ") + tok);
    return it->second;
  };
  pad_ = find_special("<pad>");
  bos_ = find_special("<bos>");
  eos_ = find_special("<eos>");
  unk_ = find_special("<unk>");
  video_emb_ = find_special("<video_emb>");
  motion_emb_ = find_special("<motion_emb>");
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw InvalidInput("token id out of range");
  return tokens_[id];
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

int Vocabulary::id_or_unk(const std::string& token) const {
  int i = id(token);
  return i < 0 ? unk_ : i;
}

std::vector<int> Vocabulary::encode_tokens(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id_or_unk(t));
  return ids;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  return encode_tokens(tokenize_text(text));
}

std::vector<std::string> Vocabulary::decode_tokens(const std::vector<int>& ids,
                                                   bool skip_specials) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const std::string& t = token(id);
    if (skip_specials && t.size() > 1 && t.front() == '<' && t.back() == '>')
      continue;
    out.push_back(t);
  }
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& ids,
                               bool skip_specials) const {
  return join_tokens(decode_tokens(ids, skip_specials));
}

bool Vocabulary::contains_unk(const std::vector<int>& ids) const {
  for (int id : ids)
    if (id == unk_) return true;
  return false;
}

}  // namespace hawk
