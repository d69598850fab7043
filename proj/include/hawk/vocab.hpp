#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "hawk/common.hpp"

namespace hawk {

enum class SeqRole { kGroundTruth, kModelOutput, kMotionOutput, kMotionTarget, kPrompt };

struct TokenSequence {
  std::vector<int> ids;
  SeqRole role = SeqRole::kGroundTruth;
};

class Vocabulary {
 public:
  // The fixed closed vocabulary: specials, punctuation, the grammar
  // lexicon, template and question words, padded to exactly 128 entries.
  static const Vocabulary& builtin();

  explicit Vocabulary(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const;
  int id(const std::string& token) const;         // -1 when absent
  int id_or_unk(const std::string& token) const;

  std::vector<int> encode_tokens(const std::vector<std::string>& tokens) const;
  std::vector<int> encode(const std::string& text) const;
  std::vector<std::string> decode_tokens(const std::vector<int>& ids,
                                         bool skip_specials = true) const;
  std::string decode(const std::vector<int>& ids,
                     bool skip_specials = true) const;
  bool contains_unk(const std::vector<int>& ids) const;

  int pad_id() const { return pad_; }
  int bos_id() const { return bos_; }
  int eos_id() const { return eos_; }
  int unk_id() const { return unk_; }
  int video_emb_id() const { return video_emb_; }
  int motion_emb_id() const { return motion_emb_; }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int pad_ = -1, bos_ = -1, eos_ = -1, unk_ = -1;
  int video_emb_ = -1, motion_emb_ = -1;
};

}  // namespace hawk
