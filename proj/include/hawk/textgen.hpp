#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hawk/common.hpp"

namespace hawk {

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

class TextGenClient {
 public:
  virtual ~TextGenClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
  virtual std::string kind() const = 0;
};

// Deterministic stand-in for the remote assistant: a pure function of
// (messages, seed). Routes on the request shape: judge requests score
// token-overlap F1, QA requests answer from the description line, caption
// requests return the anomaly caption.
class MockTextGenClient : public TextGenClient {
 public:
  explicit MockTextGenClient(std::uint64_t seed = 0) : seed_(seed) {}
  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::string kind() const override { return "mock"; }

 private:
  std::uint64_t seed_;
};

struct RemoteClientConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8089/v1/chat/completions
  double timeout_s = 5.0;
  int max_retries = 2;
  std::string model = "gpt-4";
  double backoff_base_s = 1.0;
  double backoff_factor = 2.0;
};

// Minimal chat-completion POST at temperature 0 with exponential backoff.
// Never blocks past timeout_s * (max_retries + 1) in total.
class RemoteTextGenClient : public TextGenClient {
 public:
  explicit RemoteTextGenClient(RemoteClientConfig cfg);
  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::string kind() const override { return "remote"; }

  const RemoteClientConfig& config() const { return cfg_; }

 private:
  RemoteClientConfig cfg_;
  std::string base_url_;
  std::string path_;
};

std::unique_ptr<TextGenClient> make_client(const std::string& kind,
                                           const RemoteClientConfig& remote,
                                           std::uint64_t seed);

// Multiset token-overlap F1 in [0,1]; the mock judge's scoring rule.
double token_overlap_f1(const std::string& candidate,
                        const std::string& reference);

}  // namespace hawk
