#include "tablerl/client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tablerl/errors.hpp"
#include "tablerl/prompts.hpp"

namespace tablerl {

namespace {

nlohmann::json request_to_json(const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = request.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["logprobs"] = request.logprobs;
  if (request.seed.has_value()) body["seed"] = *request.seed;
  return body;
}

nlohmann::json response_to_json(const ChatResponse& response) {
  nlohmann::json out;
  out["content"] = response.content;
  if (response.logprob.has_value()) out["logprob"] = *response.logprob;
  return out;
}

ChatResponse response_from_json(const nlohmann::json& j) {
  ChatResponse out;
  out.content = j.at("content").get<std::string>();
  if (j.contains("logprob")) out.logprob = j.at("logprob").get<double>();
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string request_key(const ChatRequest& request) {
  std::uint64_t hash = fnv1a64(request_to_json(request).dump());
  std::ostringstream out;
  out << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) out << ((hash >> shift) & 0xf);
  return out.str();
}

ChatResponse ChatClient::chat(const ChatRequest& request) {
  std::size_t now = ++in_flight_;
  std::size_t peak = peak_in_flight_.load();
  while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
  }
  try {
    ChatResponse response = send(request);
    --in_flight_;
    return response;
  } catch (...) {
    --in_flight_;
    throw;
  }
}

HttpChatClient::HttpChatClient(Options options) : options_(std::move(options)) {}

ChatResponse HttpChatClient::send(const ChatRequest& request) {
  std::string body = request_to_json(request).dump();
  std::string last_failure = "no attempt made";
  for (std::size_t attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
    }
    httplib::Client http(options_.endpoint);
    http.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!options_.auth_env.empty()) {
      if (const char* token = std::getenv(options_.auth_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
      }
    }
    auto result = http.Post("/v1/chat/completions", headers, body, "application/json");
    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    bool retryable = result->status == 408 || result->status == 429 || result->status >= 500;
    if (retryable) {
      last_failure = "status " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw ClientError("chat request rejected with status " + std::to_string(result->status));
    }
    try {
      auto parsed = nlohmann::json::parse(result->body);
      const auto& choice = parsed.at("choices").at(0);
      ChatResponse response;
      response.content = choice.at("message").at("content").get<std::string>();
      if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
          choice["logprobs"].contains("sequence_logprob")) {
        response.logprob = choice["logprobs"]["sequence_logprob"].get<double>();
      }
      return response;
    } catch (const nlohmann::json::exception& e) {
      throw ClientError(std::string("unreadable chat response: ") + e.what());
    }
  }
  throw ClientError("chat request failed after " + std::to_string(options_.retries + 1) +
                    " attempts; last failure: " + last_failure);
}

ReplayChatClient::ReplayChatClient(const std::string& transcript_path) {
  std::ifstream in(transcript_path);
  if (!in) throw ClientError("cannot open transcript " + transcript_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      responses_[j.at("key").get<std::string>()] = response_from_json(j.at("response"));
    } catch (const nlohmann::json::exception& e) {
      throw ClientError("transcript " + transcript_path + " line " + std::to_string(lineno) +
                        " is unreadable: " + e.what());
    }
  }
}

ChatResponse ReplayChatClient::send(const ChatRequest& request) {
  auto it = responses_.find(request_key(request));
  if (it == responses_.end()) {
    throw ClientError("no recorded response for request " + request_key(request));
  }
  return it->second;
}

RecordingChatClient::RecordingChatClient(std::shared_ptr<ChatClient> inner,
                                         const std::string& transcript_path)
    : inner_(std::move(inner)), transcript_path_(transcript_path) {}

ChatResponse RecordingChatClient::send(const ChatRequest& request) {
  ChatResponse response = inner_->chat(request);
  nlohmann::json line;
  line["key"] = request_key(request);
  line["request"] = request_to_json(request);
  line["response"] = response_to_json(response);
  std::lock_guard<std::mutex> lock(write_mutex_);
  std::ofstream out(transcript_path_, std::ios::app);
  if (!out) throw ClientError("cannot append to transcript " + transcript_path_);
  out << line.dump() << '\n';
  return response;
}

ChatResponse MockChatClient::send(const ChatRequest& request) {
  std::string_view prompt;
  for (const auto& m : request.messages) {
    if (m.role == "user") prompt = m.content;
  }
  std::size_t marker = prompt.find(kRawProgramMarker);
  if (marker == std::string_view::npos) {
    return ChatResponse{"<answer></answer>", std::nullopt};
  }
  std::size_t begin = marker + kRawProgramMarker.size();
  std::size_t end = prompt.find("\n\n", begin);
  if (end == std::string_view::npos) end = prompt.size();
  std::string_view block = prompt.substr(begin, end - begin);

  std::string program;
  std::size_t pos = 0;
  while (pos <= block.size()) {
    std::size_t eol = block.find('\n', pos);
    if (eol == std::string_view::npos) eol = block.size();
    std::string_view op_line = block.substr(pos, eol - pos);
    if (!op_line.empty()) {
      if (!program.empty()) program += " |> ";
      program.append(op_line);
    }
    pos = eol + 1;
  }
  program += " |> emit table";
  return ChatResponse{"<code_solution>" + program + "</code_solution>", std::nullopt};
}

void for_each_bounded(std::size_t count, std::size_t max_in_flight,
                      const std::function<void(std::size_t)>& work) {
  if (max_in_flight < 1) max_in_flight = 1;
  std::size_t workers = std::min(max_in_flight, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (failure) return;
        }
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tablerl
