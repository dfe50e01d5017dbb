#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "tabroute/backend.hpp"

namespace tabroute {

namespace detail {

struct SplitUrl {
    std::string base; // scheme://host:port
    std::string path; // request path, defaults to /v1/completions
};

inline SplitUrl split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw input_error("endpoint must include a scheme: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/v1/completions"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

} // namespace detail

// Client for an OpenAI-compatible completions endpoint that returns per-token
// top-k log-probabilities. The request pins stop=["\n\n"]; since servers strip
// matched stop sequences, the delimiter is reattached locally as a synthetic
// probability-one token so the step keeps its exact tiling.
class HttpBackend : public StepBackend {
  public:
    explicit HttpBackend(BackendConfig config, std::string api_key = {})
        : config_(std::move(config)), api_key_(std::move(api_key)) {
        if (config_.kind != BackendKind::http) throw input_error("HttpBackend requires kind=http");
        config_.validate();
        if (api_key_.empty()) {
            if (const char* env = std::getenv("TABROUTE_API_KEY")) api_key_ = env;
        }
    }

    GeneratedStep generate_step(const StepContext& ctx) override {
        nlohmann::json req{{"model", config_.model},
                           {"prompt", render_prompt(ctx)},
                           {"temperature", config_.temperature},
                           {"top_p", config_.top_p},
                           {"max_tokens", config_.max_tokens},
                           {"stop", {std::string(kStepDelimiter)}},
                           {"logprobs", config_.top_logprobs},
                           {"top_logprobs", config_.top_logprobs}};
        if (config_.seed) req["seed"] = *config_.seed;

        nlohmann::json resp = post_with_retries(req);
        return parse_completion(resp, config_.top_logprobs);
    }

    const BackendConfig& config() const override { return config_; }

    // Maps a completions response to a GeneratedStep. Exposed for tests.
    static GeneratedStep parse_completion(const nlohmann::json& resp, int top_logprobs) {
        if (!resp.contains("choices") || resp["choices"].empty()) {
            throw protocol_error("completions response has no choices");
        }
        const nlohmann::json& choice = resp["choices"][0];
        std::string text = choice.value("text", std::string{});
        std::string finish_reason = choice.value("finish_reason", std::string{"stop"});
        if (!choice.contains("logprobs") || choice["logprobs"].is_null()) {
            throw protocol_error("completions response is missing logprobs");
        }
        const nlohmann::json& lp = choice["logprobs"];
        if (!lp.contains("tokens") || !lp.contains("top_logprobs")) {
            throw protocol_error("logprobs payload is missing tokens/top_logprobs");
        }

        GeneratedStep step;
        // Truncate locally at the first delimiter in case the server ignored
        // the stop parameter.
        auto cut = text.find(kStepDelimiter);
        bool saw_inline_delim = cut != std::string::npos;
        std::string kept = saw_inline_delim ? text.substr(0, cut) : text;

        std::size_t pos = 0;
        const auto& tokens = lp["tokens"];
        const auto& tops = lp["top_logprobs"];
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            std::string tok_text = tokens[i].get<std::string>();
            if (pos >= kept.size()) break;
            if (pos + tok_text.size() > kept.size()) tok_text = kept.substr(pos); // clip straddler
            TokenSpan span{tok_text, {pos, pos + tok_text.size()}};
            pos = span.range.end;

            TokenDistribution dist;
            dist.full = false;
            if (i < tops.size() && tops[i].is_object()) {
                for (const auto& [tok, lp_val] : tops[i].items()) {
                    (void)tok;
                    double p = std::exp(lp_val.get<double>());
                    if (p > 1.0) p = 1.0;
                    if (p <= 0.0) continue;
                    dist.entries.emplace_back(static_cast<std::int64_t>(dist.entries.size()), p);
                    dist.coverage += p;
                }
            }
            if (dist.entries.empty()) {
                throw protocol_error("empty top_logprobs entry at token " + std::to_string(i));
            }
            if (dist.coverage > 1.0) { // guard against rounding past full mass
                for (auto& [id, p] : dist.entries) p /= dist.coverage;
                dist.coverage = 1.0;
            }
            if (static_cast<int>(dist.entries.size()) > top_logprobs) {
                dist.entries.resize(static_cast<std::size_t>(top_logprobs));
                dist.coverage = 0.0;
                for (const auto& [id, p] : dist.entries) dist.coverage += p;
            }
            step.tokens.push_back(std::move(span));
            step.distributions.push_back(std::move(dist));
        }
        step.text = kept;

        if (finish_reason == "length") {
            step.finish = FinishReason::length_limit;
        } else if (stop_sequence_hit(choice) || saw_inline_delim) {
            step.finish = FinishReason::step_boundary;
            append_delimiter(step);
        } else {
            step.finish = FinishReason::answer;
        }
        try {
            step.validate();
        } catch (const input_error& e) {
            throw protocol_error(std::string("completions response maps to an invalid step: ") + e.what());
        }
        return step;
    }

  private:
    // Servers flag a matched stop sequence in different places: vLLM sets a
    // non-null stop_reason, llama.cpp sets stopping_word / stop_type=="word",
    // sglang sets matched_stop. Absent any hint, finish_reason "stop" is read
    // as a natural end of sequence.
    static bool stop_sequence_hit(const nlohmann::json& choice) {
        if (choice.contains("stop_reason") && !choice["stop_reason"].is_null()) return true;
        if (choice.contains("stopping_word") && choice["stopping_word"].is_string() &&
            !choice["stopping_word"].get<std::string>().empty())
            return true;
        if (choice.contains("stop_type") && choice["stop_type"] == "word") return true;
        if (choice.contains("matched_stop") && !choice["matched_stop"].is_null()) return true;
        return false;
    }

    static void append_delimiter(GeneratedStep& step) {
        if (step.text.ends_with(kStepDelimiter)) return;
        TokenSpan span{std::string(kStepDelimiter),
                       {step.text.size(), step.text.size() + kStepDelimiter.size()}};
        step.text += kStepDelimiter;
        TokenDistribution dist;
        dist.full = true;
        dist.entries.emplace_back(0, 1.0);
        dist.coverage = 1.0;
        step.tokens.push_back(std::move(span));
        step.distributions.push_back(std::move(dist));
    }

    nlohmann::json post_with_retries(const nlohmann::json& req) {
        auto [base, path] = detail::split_endpoint(config_.endpoint);
        std::string body = req.dump();
        const int attempts = 3;
        std::chrono::milliseconds backoff{250};
        std::string last_error;
        for (int attempt = 1; attempt <= attempts; ++attempt) {
            httplib::Client client(base);
            client.set_read_timeout(300, 0);
            client.set_connection_timeout(10, 0);
            httplib::Headers headers{{"Content-Type", "application/json"}};
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = client.Post(path, headers, body, "application/json");
            if (res) {
                if (res->status < 200 || res->status >= 300) {
                    throw protocol_error("completions endpoint returned HTTP " +
                                         std::to_string(res->status) + ": " + res->body);
                }
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::exception& e) {
                    throw protocol_error(std::string("unparseable completions response: ") + e.what());
                }
            }
            last_error = httplib::to_string(res.error());
            if (attempt < attempts) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
        }
        throw backend_error("transport failure after " + std::to_string(attempts) +
                            " attempts: " + last_error);
    }

    BackendConfig config_;
    std::string api_key_;
};

} // namespace tabroute
