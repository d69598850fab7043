#include "hawk/textgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <thread>

#include "json.hpp"
#include "httplib.h"

namespace hawk {

namespace {

const std::string* last_user_content(const std::vector<ChatMessage>& msgs) {
  for (auto it = msgs.rbegin(); it != msgs.rend(); ++it)
    if (it->role == "user") return &it->content;
  return nullptr;
}

// Value of the first line starting with `key` (key includes the colon).
std::string line_value(const std::string& text, const std::string& key) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (text.compare(pos, key.size(), key) == 0) {
      std::size_t start = pos + key.size();
      while (start < eol && text[start] == ' ') ++start;
      return text.substr(start, eol - start);
    }
    pos = eol + 1;
  }
  return "";
}

std::string first_of(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& wanted,
                     const std::string& fallback) {
  for (const std::string& t : tokens)
    for (const std::string& w : wanted)
      if (t == w) return t;
  return fallback;
}

std::string format_score(double score) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "{'score': %.3f}", score);
  return buf;
}

std::string judge_response(const std::string& content) {
  std::string ref = line_value(content, "Reference:");
  std::string ours = line_value(content, "Ours:");
  return format_score(token_overlap_f1(ours, ref));
}

const std::vector<std::string> kColors = {"red",    "green", "blue",
                                          "yellow", "white", "black"};
const std::vector<std::string> kShapes = {
    "square", "disc",   "car",    "truck",     "man",  "woman",
    "person", "bicycle", "ball",  "pedestrian"};
const std::vector<std::string> kPlaces = {"street", "sidewalk", "road"};
const std::vector<std::string> kAnomalyVerbs = {"reverses", "accelerates",
                                                "stops", "appears"};
const std::vector<std::string> kAllVerbs = {
    "reverses", "accelerates", "stops", "appears", "falls", "slips", "moves"};

std::string answer_response(const std::string& content) {
  std::string desc = line_value(content, "Description:");
  std::string pronoun = line_value(content, "Pronoun:");
  if (desc.empty()) throw InvalidInput("answer request without a description");
  std::vector<std::string> toks = tokenize_text(desc);
  std::string color = first_of(toks, kColors, "red");
  std::string shape = first_of(toks, kShapes, "agent");
  std::string place = first_of(toks, kPlaces, "street");
  std::string verb = first_of(toks, kAllVerbs, "moves");
  bool at_start = false, at_end = false;
  for (const std::string& t : toks) {
    if (t == "start") at_start = true;
    if (t == "end") at_end = true;
  }
  std::string timing = at_end && !at_start ? "near the end" : "at the start";

  if (pronoun == "Who") return "the " + color + " " + shape;
  if (pronoun == "Where") return "on the " + place;
  if (pronoun == "When") return timing;
  if (pronoun == "How") return "it suddenly " + verb;
  if (pronoun == "How much") return "the anomaly is large";
  if (pronoun == "Why")
    return "because the " + color + " " + shape + " suddenly " + verb;
  return desc;  // "What" and anything unclassified: restate the description
}

std::string describe_response(const std::string& content) {
  std::vector<std::string> captions;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    if (content.compare(pos, 2, "- ") == 0)
      captions.push_back(content.substr(pos + 2, eol - pos - 2));
    pos = eol + 1;
  }
  if (captions.empty()) throw InvalidInput("caption request without captions");
  std::string chosen = captions.front();
  for (const std::string& c : captions) {
    std::vector<std::string> toks = tokenize_text(c);
    bool anomalous = false;
    for (const std::string& t : toks)
      for (const std::string& v : kAnomalyVerbs)
        if (t == v) anomalous = true;
    if (anomalous) {
      chosen = c;
      break;
    }
  }
  if (chosen.size() < 2 || chosen.compare(chosen.size() - 2, 2, " .") != 0)
    chosen += " .";
  return chosen;
}

}  // namespace

double token_overlap_f1(const std::string& candidate,
                        const std::string& reference) {
  std::vector<std::string> c = tokenize_text(candidate);
  std::vector<std::string> r = tokenize_text(reference);
  if (c.empty() || r.empty()) return 0.0;
  std::map<std::string, int> rc;
  for (const std::string& t : r) ++rc[t];
  int overlap = 0;
  for (const std::string& t : c) {
    auto it = rc.find(t);
    if (it != rc.end() && it->second > 0) {
      ++overlap;
      --it->second;
    }
  }
  if (overlap == 0) return 0.0;
  double p = static_cast<double>(overlap) / static_cast<double>(c.size());
  double q = static_cast<double>(overlap) / static_cast<double>(r.size());
  return 2.0 * p * q / (p + q);
}

std::string MockTextGenClient::complete(
    const std::vector<ChatMessage>& messages) {
  const std::string* user = last_user_content(messages);
  if (user == nullptr) throw InvalidInput("request has no user message");
  if (user->find("### Video") != std::string::npos) return judge_response(*user);
  if (user->find("Question:") != std::string::npos)
    return answer_response(*user);
  if (user->find("Captions:") != std::string::npos)
    return describe_response(*user);
  return "the anomaly is in the video .";
}

RemoteTextGenClient::RemoteTextGenClient(RemoteClientConfig cfg)
    : cfg_(std::move(cfg)) {
  std::size_t scheme = cfg_.endpoint.find("://");
  if (scheme == std::string::npos)
    throw ConfigError("endpoint must include a scheme: " + cfg_.endpoint);
  std::size_t slash = cfg_.endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) {
    base_url_ = cfg_.endpoint;
    path_ = "/";
  } else {
    base_url_ = cfg_.endpoint.substr(0, slash);
    path_ = cfg_.endpoint.substr(slash);
  }
  if (cfg_.timeout_s <= 0.0) throw ConfigError("timeout must be positive");
  if (cfg_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

std::string RemoteTextGenClient::complete(
    const std::vector<ChatMessage>& messages) {
  nlohmann::json req;
  req["model"] = cfg_.model;
  req["temperature"] = 0;
  nlohmann::json jm = nlohmann::json::array();
  for (const ChatMessage& m : messages)
    jm.push_back({{"role", m.role}, {"content", m.content}});
  req["messages"] = jm;
  const std::string body = req.dump();

  using clock = std::chrono::steady_clock;
  const auto deadline =
      clock::now() + std::chrono::duration_cast<clock::duration>(
                         std::chrono::duration<double>(
                             cfg_.timeout_s * (cfg_.max_retries + 1)));
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    double remaining =
        std::chrono::duration<double>(deadline - clock::now()).count();
    if (remaining <= 0.0) break;
    double per_attempt = std::min(cfg_.timeout_s, remaining);
    auto whole = static_cast<time_t>(per_attempt);
    auto usec = static_cast<time_t>((per_attempt - whole) * 1e6);
    httplib::Client cli(base_url_);
    cli.set_connection_timeout(whole, usec);
    cli.set_read_timeout(whole, usec);
    cli.set_write_timeout(whole, usec);
    httplib::Result res = cli.Post(path_, body, "application/json");
    if (res && res->status == 200) {
      try {
        nlohmann::json resp = nlohmann::json::parse(res->body);
        return resp.at("choices").at(0).at("message").at("content")
            .get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
      }
    } else if (res) {
      last_error = "http status " + std::to_string(res->status);
    } else {
      last_error = "transport error " + httplib::to_string(res.error());
    }
    if (attempt < cfg_.max_retries) {
      double sleep_s =
          cfg_.backoff_base_s * std::pow(cfg_.backoff_factor, attempt);
      remaining =
          std::chrono::duration<double>(deadline - clock::now()).count();
      if (remaining <= 0.0) break;
      sleep_s = std::min(sleep_s, remaining);
      std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
    }
  }
  throw ClientError("text generation failed after " +
                    std::to_string(cfg_.max_retries + 1) + " attempts: " +
                    last_error);
}

std::unique_ptr<TextGenClient> make_client(const std::string& kind,
                                           const RemoteClientConfig& remote,
                                           std::uint64_t seed) {
  if (kind == "mock") return std::make_unique<MockTextGenClient>(seed);
  if (kind == "remote") return std::make_unique<RemoteTextGenClient>(remote);
  throw ConfigError("unknown client kind: " + kind);
}

}  // namespace hawk
