#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hawk {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class InsufficientCorpus : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Carries the id of the record that failed so the pipeline can report it.
class PipelineError : public Error {
 public:
  PipelineError(std::string record_id, const std::string& what)
      : Error(what), record_id_(std::move(record_id)) {}
  const std::string& record_id() const { return record_id_; }

 private:
  std::string record_id_;
};

class ClientError : public Error {
 public:
  using Error::Error;
};

class JudgeParseError : public Error {
 public:
  JudgeParseError(std::string raw_response, const std::string& what)
      : Error(what), raw_response_(std::move(raw_response)) {}
  const std::string& raw_response() const { return raw_response_; }

 private:
  std::string raw_response_;
};

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). std:: distributions are implementation
// defined, so everything that claims bitwise reproducibility goes through
// this.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  }

  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  double normal(double mu = 0.0, double sigma = 1.0);

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stable way to derive a per-item stream from a base seed and a string key.
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);

// ---------------------------------------------------------------------------
// FNV-1a 64-bit, used for byte-stability checks on checked-in text.

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Little-endian binary IO helpers

void put_u16le(std::string& out, std::uint16_t v);
void put_u32le(std::string& out, std::uint32_t v);
void put_u64le(std::string& out, std::uint64_t v);
void put_f32le(std::string& out, float v);

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}
  std::uint16_t u16le();
  std::uint32_t u32le();
  std::uint64_t u64le();
  float f32le();
  std::string_view bytes(std::size_t n);
  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

// ---------------------------------------------------------------------------
// Text tokenization: lowercase, whitespace split, punctuation detached.
// Shared by the BLEU metric and the model vocabulary.

std::vector<std::string> tokenize_text(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace hawk
