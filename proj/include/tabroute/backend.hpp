#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabroute/entropy.hpp"
#include "tabroute/errors.hpp"
#include "tabroute/io.hpp"
#include "tabroute/normalize.hpp"
#include "tabroute/router.hpp"
#include "tabroute/table.hpp"

namespace tabroute {

inline constexpr std::string_view kStepDelimiter = "\n\n";

enum class FinishReason { step_boundary, answer, length_limit };

inline const char* to_string(FinishReason f) {
    switch (f) {
        case FinishReason::step_boundary: return "step_boundary";
        case FinishReason::answer: return "answer";
        case FinishReason::length_limit: return "length_limit";
    }
    return "?";
}

inline FinishReason finish_from_string(const std::string& s) {
    if (s == "step_boundary") return FinishReason::step_boundary;
    if (s == "answer") return FinishReason::answer;
    if (s == "length_limit") return FinishReason::length_limit;
    throw parse_error("unknown finish reason: " + s);
}

struct TokenSpan {
    std::string text;
    CharRange range;
};

// One generated reasoning step: text, its token tiling, and the per-token
// predicted distributions of whichever model produced it.
struct GeneratedStep {
    std::string text;
    std::vector<TokenSpan> tokens;
    std::vector<TokenDistribution> distributions;
    FinishReason finish = FinishReason::step_boundary;
    ModelChoice model = ModelChoice::SRM;

    std::size_t token_count() const { return tokens.size(); }

    void validate() const {
        std::size_t expect = 0;
        for (const auto& t : tokens) {
            if (t.range.begin != expect || t.range.end - t.range.begin != t.text.size() ||
                text.compare(t.range.begin, t.text.size(), t.text) != 0) {
                throw input_error("step tokens must tile the step text exactly");
            }
            expect = t.range.end;
        }
        if (expect != text.size()) throw input_error("step tokens must tile the step text exactly");
        if (distributions.size() != tokens.size()) {
            throw input_error("one distribution required per token");
        }
        if (finish == FinishReason::step_boundary && !text.ends_with(kStepDelimiter)) {
            throw input_error("step_boundary steps must end with the step delimiter");
        }
        auto mid = text.find(kStepDelimiter);
        if (mid != std::string::npos && mid + kStepDelimiter.size() != text.size()) {
            throw input_error("step text may contain the delimiter only as a suffix");
        }
    }
};

enum class BackendKind { mock, http };

struct BackendConfig {
    BackendKind kind = BackendKind::mock;
    std::string endpoint;          // http only
    std::string model;             // served model name
    std::string script_path;       // mock only
    std::int64_t param_count = 1;  // N, for the 2N-per-token FLOPs rule
    int top_logprobs = 20;
    double temperature = 0.7;
    double top_p = 0.95;
    int max_tokens = 16384;
    std::optional<int> seed;

    void validate() const {
        if (param_count <= 0) throw input_error("param_count must be positive");
        if (top_logprobs < 1) throw input_error("top_logprobs must be >= 1");
    }
};

inline BackendConfig backend_config_from_json(const nlohmann::json& j) {
    BackendConfig c;
    try {
        std::string kind = j.value("kind", "mock");
        if (kind == "mock") c.kind = BackendKind::mock;
        else if (kind == "http") c.kind = BackendKind::http;
        else throw parse_error("unknown backend kind: " + kind);
        c.endpoint = j.value("endpoint", std::string{});
        c.model = j.value("model", std::string{});
        c.script_path = j.value("script", std::string{});
        c.param_count = static_cast<std::int64_t>(j.value("param_count", 1.0));
        c.top_logprobs = j.value("top_logprobs", 20);
        c.temperature = j.value("temperature", 0.7);
        c.top_p = j.value("top_p", 0.95);
        c.max_tokens = j.value("max_tokens", 16384);
        if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed backend config: ") + e.what());
    }
    c.validate();
    return c;
}

// Generation context: the table, the question, and every completed prior
// step (each ending with the step delimiter).
struct StepContext {
    const Table* table = nullptr;
    std::string question;
    std::vector<std::string> prior_steps;
};

// Canonical prompt layout shared by backends that need serialized context.
inline std::string render_prompt(const StepContext& ctx) {
    std::string out;
    if (ctx.table) {
        out += "Table:\n";
        for (std::size_t i = 0; i < ctx.table->headers.size(); ++i) {
            if (i) out += " | ";
            out += ctx.table->headers[i];
        }
        out += '\n';
        for (const auto& row : ctx.table->rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += " | ";
                out += row[i];
            }
            out += '\n';
        }
    }
    out += "Question: " + ctx.question + "\n\n";
    for (const auto& s : ctx.prior_steps) out += s;
    return out;
}

class StepBackend {
  public:
    virtual ~StepBackend() = default;
    virtual GeneratedStep generate_step(const StepContext& ctx) = 0;
    virtual const BackendConfig& config() const = 0;
};

// ---------------------------------------------------------------------------
// Step <-> JSON (mock fixture lines and trace step payloads)
// ---------------------------------------------------------------------------

inline nlohmann::json step_to_json(const GeneratedStep& s) {
    nlohmann::json tokens = nlohmann::json::array();
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        nlohmann::json probs = nlohmann::json::array();
        for (const auto& [id, p] : s.distributions[i].entries) {
            (void)id;
            probs.push_back(p);
        }
        tokens.push_back({{"text", s.tokens[i].text}, {"probs", probs}, {"full", s.distributions[i].full}});
    }
    return nlohmann::json{{"text", s.text}, {"tokens", tokens}, {"finish", to_string(s.finish)}};
}

// Token char ranges are reconstructed by sequential placement.
inline GeneratedStep step_from_json(const nlohmann::json& j) {
    GeneratedStep s;
    try {
        s.text = j.at("text").get<std::string>();
        s.finish = finish_from_string(j.at("finish").get<std::string>());
        std::size_t pos = 0;
        for (const auto& tok : j.at("tokens")) {
            TokenSpan span;
            span.text = tok.at("text").get<std::string>();
            span.range = {pos, pos + span.text.size()};
            pos = span.range.end;
            std::vector<double> probs = tok.at("probs").get<std::vector<double>>();
            s.tokens.push_back(std::move(span));
            s.distributions.push_back(TokenDistribution::from_probs(probs, tok.value("full", false)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed step JSON: ") + e.what());
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Scripted mock backend
// ---------------------------------------------------------------------------

// Replays a fixed step list in order. Fully deterministic; calls past the end
// of the script raise fixture_exhausted_error.
class ScriptBackend : public StepBackend {
  public:
    ScriptBackend(std::vector<GeneratedStep> steps, BackendConfig config)
        : steps_(std::move(steps)), config_(std::move(config)) {
        config_.kind = BackendKind::mock;
        config_.validate();
    }

    GeneratedStep generate_step(const StepContext&) override {
        std::lock_guard lock(mu_);
        if (cursor_ >= steps_.size()) {
            throw fixture_exhausted_error("mock script exhausted after " +
                                          std::to_string(steps_.size()) + " steps");
        }
        return steps_[cursor_++];
    }

    const BackendConfig& config() const override { return config_; }

    std::size_t remaining() const {
        std::lock_guard lock(mu_);
        return steps_.size() - cursor_;
    }

  private:
    std::vector<GeneratedStep> steps_;
    BackendConfig config_;
    std::size_t cursor_ = 0;
    mutable std::mutex mu_;
};

// Fixture format: JSONL, one step per line:
//   {"text": "...", "tokens": [{"text": "...", "probs": [...], "full": false}, ...],
//    "finish": "step_boundary" | "answer" | "length_limit"}
inline std::vector<GeneratedStep> parse_mock_script(const std::string& content) {
    std::vector<GeneratedStep> steps;
    for_each_jsonl_line(content, [&](std::size_t line_no, const std::string& line) {
        try {
            steps.push_back(step_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw parse_error("mock fixture line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return steps;
}

inline std::unique_ptr<ScriptBackend> load_mock_script(const std::string& path, BackendConfig config = {}) {
    return std::make_unique<ScriptBackend>(parse_mock_script(read_file(path)), std::move(config));
}

} // namespace tabroute
