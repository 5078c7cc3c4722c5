#include "qesynth/infill.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qesynth/error.hpp"

namespace qe {

namespace {

bool has_whitespace(const std::string& token) {
  return std::any_of(token.begin(), token.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

}  // namespace

void validate_infill_output(const MaskedDraft& draft, const Tokens& output) {
  if (output.size() != draft.elements.size()) {
    throw ProtocolError("infiller returned " + std::to_string(output.size()) +
                        " tokens for a " + std::to_string(draft.elements.size()) +
                        "-element draft");
  }
  for (std::size_t i = 0; i < output.size(); ++i) {
    const std::string& token = output[i];
    if (token.empty() || has_whitespace(token)) {
      throw ProtocolError("token " + std::to_string(i) +
                          " is empty or contains whitespace");
    }
    if (token == kMaskToken) {
      throw ProtocolError("mask left unfilled at position " + std::to_string(i));
    }
    if (!draft.elements[i].is_mask && token != draft.elements[i].text) {
      throw ProtocolError("concrete token altered at position " +
                          std::to_string(i) + ": expected \"" +
                          draft.elements[i].text + "\", got \"" + token + "\"");
    }
  }
}

UnigramInfiller::UnigramInfiller(std::vector<std::pair<std::string, double>> entries) {
  if (entries.empty()) throw Error("unigram vocabulary is empty");
  tokens_.reserve(entries.size());
  cumulative_.reserve(entries.size());
  double total = 0.0;
  for (const auto& [token, weight] : entries) {
    if (token.empty() || has_whitespace(token)) {
      throw Error("unigram token must be non-empty with no whitespace");
    }
    if (token == kMaskToken) {
      throw Error("unigram vocabulary must not contain \"" + std::string(kMaskToken) + "\"");
    }
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      throw Error("unigram weight for \"" + token + "\" must be positive and finite");
    }
    total += weight;
    tokens_.push_back(token);
    cumulative_.push_back(total);
  }
}

UnigramInfiller UnigramInfiller::from_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::pair<std::string, double>> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("expected token<TAB>weight", line_number);
    }
    std::string token = line.substr(0, tab);
    const std::string weight_text = line.substr(tab + 1);
    double weight = 0.0;
    const auto* end = weight_text.data() + weight_text.size();
    const auto [ptr, ec] = std::from_chars(weight_text.data(), end, weight);
    if (ec != std::errc() || ptr != end) {
      throw ParseError("bad weight \"" + weight_text + "\"", line_number);
    }
    entries.emplace_back(std::move(token), weight);
  }
  try {
    return UnigramInfiller(std::move(entries));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

Tokens UnigramInfiller::fill(const Tokens&, const MaskedDraft& draft,
                             RandomStream& rng) const {
  const double total = cumulative_.back();
  Tokens out;
  out.reserve(draft.elements.size());
  for (const auto& element : draft.elements) {
    if (!element.is_mask) {
      out.push_back(element.text);
      continue;
    }
    const double u = rng.next_double() * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    out.push_back(tokens_[static_cast<std::size_t>(it - cumulative_.begin())]);
  }
  return out;
}

Tokens IdentityInfiller::fill(const Tokens&, const MaskedDraft& draft,
                              RandomStream&) const {
  Tokens out;
  out.reserve(draft.elements.size());
  for (const auto& element : draft.elements) {
    if (!element.is_mask) {
      out.push_back(element.text);
    } else if (element.origin) {
      if (*element.origin >= draft.original.size()) {
        throw Error("draft origin index out of range");
      }
      out.push_back(draft.original[*element.origin]);
    } else {
      out.push_back(kSentinelToken);
    }
  }
  return out;
}

RemoteInfiller::RemoteInfiller(RemoteInfillConfig config)
    : config_(std::move(config)),
      slots_(static_cast<std::ptrdiff_t>(std::max(1u, config_.batch_size))) {
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error("infill endpoint must be a full http:// URL: " + config_.endpoint);
  }
  const auto slash = config_.endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) {
    host_base_ = config_.endpoint;
    path_ = "/";
  } else {
    host_base_ = config_.endpoint.substr(0, slash);
    path_ = config_.endpoint.substr(slash);
  }
}

Tokens RemoteInfiller::fill(const Tokens& source, const MaskedDraft& draft,
                            RandomStream&) const {
  Tokens passthrough;
  passthrough.reserve(draft.elements.size());
  for (const auto& element : draft.elements) passthrough.push_back(element.text);
  if (draft.mask_count() == 0) return passthrough;

  nlohmann::json body;
  body["source"] = source;
  body["draft"] = passthrough;
  const std::string payload = body.dump();

  std::string last_failure;
  for (unsigned attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto backoff = std::chrono::milliseconds(50) * (1u << std::min(attempt - 1, 6u));
      std::this_thread::sleep_for(backoff);
    }
    httplib::Result result;
    {
      slots_.acquire();
      struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
      } release{slots_};
      httplib::Client client(host_base_);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      result = client.Post(path_, payload, "application/json");
    }
    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status != 200) {
      last_failure = "HTTP " + std::to_string(result->status);
      continue;
    }

    // A 200 with a bad body is a contract violation, not a transient fault:
    // surface it immediately rather than retrying.
    const auto parsed = nlohmann::json::parse(result->body, nullptr, false);
    if (parsed.is_discarded()) {
      throw ProtocolError("infill response is not valid JSON");
    }
    if (!parsed.is_object() || !parsed.contains("tokens") ||
        !parsed["tokens"].is_array()) {
      throw ProtocolError("infill response missing \"tokens\" array");
    }
    Tokens out;
    out.reserve(parsed["tokens"].size());
    for (const auto& token : parsed["tokens"]) {
      if (!token.is_string()) {
        throw ProtocolError("infill response \"tokens\" must be strings");
      }
      out.push_back(token.get<std::string>());
    }
    validate_infill_output(draft, out);
    return out;
  }
  throw NetworkError("infill request to " + config_.endpoint + " failed after " +
                     std::to_string(config_.max_retries + 1) +
                     " attempts (" + last_failure + ")");
}

}  // namespace qe
