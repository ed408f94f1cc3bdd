#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tablerl {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.85;
  std::size_t max_tokens = 2400;
  bool logprobs = false;
  /// Per-request sampling seed. Distinguishes otherwise identical requests
  /// (group members share one prompt) in transcripts and replay keys.
  std::optional<std::uint64_t> seed;
};

struct ChatResponse {
  std::string content;
  /// Sequence log-probability when the serving side reports one.
  std::optional<double> logprob;
};

/// FNV-1a 64-bit hash, printed as 16 hex digits. Requests are keyed by the
/// hash of their canonical JSON encoding.
std::uint64_t fnv1a64(std::string_view data);
std::string request_key(const ChatRequest& request);

/// One model-service connection. Implementations must be safe to call from
/// several threads at once; the base class keeps the in-flight instrumentation
/// shared by all of them.
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  /// Issues one request. Throws ClientError on failure.
  ChatResponse chat(const ChatRequest& request);

  std::size_t peak_in_flight() const { return peak_in_flight_.load(); }

 protected:
  virtual ChatResponse send(const ChatRequest& request) = 0;

 private:
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_in_flight_{0};
};

/// Chat-completions JSON over HTTP. POSTs to {endpoint}/v1/chat/completions,
/// retrying transport failures and 408/429/5xx responses with exponential
/// backoff. The bearer token is read from the named environment variable at
/// call time and never stored.
class HttpChatClient : public ChatClient {
 public:
  struct Options {
    std::string endpoint;  // e.g. http://127.0.0.1:8000
    std::string auth_env;  // name of the env var holding the token, may be empty
    std::size_t retries = 3;
    std::size_t backoff_ms = 200;
  };
  explicit HttpChatClient(Options options);

 protected:
  ChatResponse send(const ChatRequest& request) override;

 private:
  Options options_;
};

/// Serves responses from a recorded transcript, keyed by request hash.
/// Requests absent from the transcript raise ClientError: replay runs make no
/// network calls and never guess.
class ReplayChatClient : public ChatClient {
 public:
  explicit ReplayChatClient(const std::string& transcript_path);

 protected:
  ChatResponse send(const ChatRequest& request) override;

 private:
  std::map<std::string, ChatResponse> responses_;
};

/// Decorator that appends every (request, response) pair to a transcript
/// file as it passes through, so a later run can replay it.
class RecordingChatClient : public ChatClient {
 public:
  RecordingChatClient(std::shared_ptr<ChatClient> inner, const std::string& transcript_path);

 protected:
  ChatResponse send(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatClient> inner_;
  std::string transcript_path_;
  std::mutex write_mutex_;
};

/// Offline stand-in: answers rewrite prompts by transcribing the raw
/// operation sequence embedded in the prompt into the equivalent pipeline
/// program, wrapped in program tags. Any other prompt gets an empty text
/// answer.
class MockChatClient : public ChatClient {
 protected:
  ChatResponse send(const ChatRequest& request) override;
};

/// Runs `work(i)` for i in [0, count) on up to `max_in_flight` threads.
/// Exceptions from workers are rethrown in the calling thread (first one
/// wins). Completion order does not matter to callers: results must be
/// written into index-addressed slots.
void for_each_bounded(std::size_t count, std::size_t max_in_flight,
                      const std::function<void(std::size_t)>& work);

}  // namespace tablerl
