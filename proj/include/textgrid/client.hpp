#pragma once

// Chat-completion client plus deterministic local stand-ins. One generic JSON
// POST covers both wire dialects; the differences are confined to headers and
// the response field that carries the text.
//
// API keys are read from the environment at request time, named by a config
// field, and are never serialized, logged, or echoed in errors.

#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

#include "textgrid/rng.hpp"  // fnv1a64 for prompt hashes

#include <json.hpp>

namespace textgrid {

struct ModelError : std::runtime_error {
    enum class Kind { Config, Auth, Timeout, Exhausted, Protocol };
    Kind kind;
    ModelError(Kind k, const std::string& why) : std::runtime_error(why), kind(k) {}
};

struct ModelConfig {
    std::string kind = "openai_compat";  // openai_compat | anthropic | silent
    std::string endpoint;                // scheme://host[:port]
    std::string path;                    // defaulted per kind when empty
    std::string model;
    std::string api_key_env;             // name of the variable, never its value
    double temperature = 0.0;
    int max_tokens = 2048;
    int max_attempts = 5;
    double backoff_base_s = 0.5;
    double timeout_s = 60.0;
    int concurrency = 4;
    std::string audit_log;               // JSONL path; empty disables
};

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    auto get = [&](const char* f, auto& out) {
        if (j.contains(f)) out = j.at(f).get<std::decay_t<decltype(out)>>();
    };
    get("kind", cfg.kind);
    get("endpoint", cfg.endpoint);
    get("path", cfg.path);
    get("model", cfg.model);
    get("api_key_env", cfg.api_key_env);
    get("temperature", cfg.temperature);
    get("max_tokens", cfg.max_tokens);
    get("max_attempts", cfg.max_attempts);
    get("backoff_base_s", cfg.backoff_base_s);
    get("timeout_s", cfg.timeout_s);
    get("concurrency", cfg.concurrency);
    get("audit_log", cfg.audit_log);
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const char* known[] = {"kind",         "endpoint",     "path",
                                      "model",        "api_key_env",  "temperature",
                                      "max_tokens",   "max_attempts", "backoff_base_s",
                                      "timeout_s",    "concurrency",  "audit_log"};
        bool ok = false;
        for (const char* f : known) ok = ok || it.key() == f;
        if (!ok)
            throw ModelError(ModelError::Kind::Config,
                             "unknown model config field '" + it.key() + "'");
    }
    if (j.contains("api_key"))
        throw ModelError(ModelError::Kind::Config,
                         "model config must name a key variable, not carry a key");
    return cfg;
}

// Append-only JSONL request log. Records hashes and sizes, never content of
// secrets; safe to share.
class AuditLog {
public:
    explicit AuditLog(const std::string& path) {
        if (!path.empty()) {
            out_.open(path, std::ios::app);
            if (!out_) throw std::runtime_error("cannot open audit log " + path);
        }
    }

    void record(const nlohmann::json& entry) {
        if (!out_.is_open()) return;
        std::lock_guard<std::mutex> lock(mu_);
        out_ << entry.dump() << "\n";
        out_.flush();
    }

private:
    std::ofstream out_;
    std::mutex mu_;
};

inline std::string prompt_hash(const std::string& prompt) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(prompt)));
    return buf;
}

class Model {
public:
    virtual ~Model() = default;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual const char* name() const = 0;
};

// Answers every prompt with a caller-supplied function; the oracle and other
// test stand-ins are instances of this.
class ScriptedModel : public Model {
public:
    ScriptedModel(std::string name, std::function<std::string(const std::string&)> fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}
    std::string complete(const std::string& prompt) override { return fn_(prompt); }
    const char* name() const override { return name_.c_str(); }

private:
    std::string name_;
    std::function<std::string(const std::string&)> fn_;
};

inline std::unique_ptr<Model> silent_model() {
    return std::make_unique<ScriptedModel>("silent",
                                           [](const std::string&) { return ""; });
}

class HttpModel : public Model {
public:
    explicit HttpModel(ModelConfig cfg, std::shared_ptr<AuditLog> audit = nullptr)
        : cfg_(std::move(cfg)), audit_(std::move(audit)) {
        if (cfg_.kind != "openai_compat" && cfg_.kind != "anthropic")
            throw ModelError(ModelError::Kind::Config,
                             "unknown provider kind '" + cfg_.kind + "'");
        if (cfg_.endpoint.empty())
            throw ModelError(ModelError::Kind::Config, "endpoint missing");
        if (cfg_.path.empty())
            cfg_.path = cfg_.kind == "anthropic" ? "/v1/messages"
                                                 : "/v1/chat/completions";
        if (!audit_ && !cfg_.audit_log.empty())
            audit_ = std::make_shared<AuditLog>(cfg_.audit_log);
    }

    std::string complete(const std::string& prompt) override {
        std::string key;
        if (!cfg_.api_key_env.empty()) {
            const char* v = std::getenv(cfg_.api_key_env.c_str());
            if (v == nullptr || *v == '\0')
                throw ModelError(ModelError::Kind::Auth,
                                 "environment variable " + cfg_.api_key_env +
                                     " is not set");
            key = v;
        }

        nlohmann::json body{
            {"model", cfg_.model},
            {"messages",
             nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", cfg_.temperature},
            {"max_tokens", cfg_.max_tokens}};
        std::string payload = body.dump();

        httplib::Client client(cfg_.endpoint);
        client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
        httplib::Headers headers;
        if (cfg_.kind == "anthropic") {
            headers.emplace("x-api-key", key);
            headers.emplace("anthropic-version", "2023-06-01");
        } else if (!key.empty()) {
            headers.emplace("Authorization", "Bearer " + key);
        }

        bool timed_out = false;
        int last_status = 0;
        auto t0 = std::chrono::steady_clock::now();
        for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
            auto res = client.Post(cfg_.path, headers, payload, "application/json");
            if (res) {
                last_status = res->status;
                if (res->status == 401 || res->status == 403)
                    throw ModelError(ModelError::Kind::Auth,
                                     "authentication rejected (HTTP " +
                                         std::to_string(res->status) + ")");
                if (res->status == 200) {
                    std::string text = extract_text(res->body);
                    log_request(prompt, text, res->body, attempt, t0);
                    return text;
                }
                bool transient = res->status == 429 || res->status >= 500;
                if (!transient)
                    throw ModelError(ModelError::Kind::Protocol,
                                     "unexpected HTTP " + std::to_string(res->status));
            } else {
                timed_out = is_timeout(res.error());
                last_status = 0;
            }
            if (attempt < cfg_.max_attempts)
                std::this_thread::sleep_for(std::chrono::duration<double>(
                    cfg_.backoff_base_s * static_cast<double>(1ULL << (attempt - 1))));
        }
        if (timed_out)
            throw ModelError(ModelError::Kind::Timeout,
                             "request timed out after " +
                                 std::to_string(cfg_.max_attempts) + " attempts");
        throw ModelError(ModelError::Kind::Exhausted,
                         "retries exhausted (" + std::to_string(cfg_.max_attempts) +
                             " attempts, last HTTP " + std::to_string(last_status) +
                             ")");
    }

    const char* name() const override { return cfg_.model.c_str(); }

private:
    static bool is_timeout(httplib::Error e) {
        return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read ||
               e == httplib::Error::Write;
    }

    std::string extract_text(const std::string& body) const {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error&) {
            throw ModelError(ModelError::Kind::Protocol, "response is not JSON");
        }
        try {
            if (cfg_.kind == "anthropic")
                return j.at("content").at(0).at("text").get<std::string>();
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw ModelError(ModelError::Kind::Protocol,
                             "response lacks the completion text field");
        }
    }

    void log_request(const std::string& prompt, const std::string& text,
                     const std::string& raw_body, int attempts,
                     std::chrono::steady_clock::time_point t0) const {
        if (!audit_) return;
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        nlohmann::json entry{{"model", cfg_.model},
                             {"kind", cfg_.kind},
                             {"prompt_hash", prompt_hash(prompt)},
                             {"prompt_chars", prompt.size()},
                             {"response_chars", text.size()},
                             {"attempts", attempts},
                             {"latency_ms", ms}};
        try {
            nlohmann::json j = nlohmann::json::parse(raw_body);
            if (j.contains("usage")) entry["usage"] = j["usage"];
        } catch (const nlohmann::json::parse_error&) {
        }
        audit_->record(entry);
    }

    ModelConfig cfg_;
    std::shared_ptr<AuditLog> audit_;
};

inline std::unique_ptr<Model> make_model(const ModelConfig& cfg) {
    if (cfg.kind == "silent") return silent_model();
    return std::make_unique<HttpModel>(cfg);
}

// Runs fn(i) for i in [0, n) on up to `parallel` worker threads. Results slot
// into place by index, so completion order never reorders output.
template <class Fn>
void for_each_indexed(std::size_t n, int parallel, Fn fn) {
    if (parallel < 1) parallel = 1;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallel), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex mu;
    std::size_t next = 0;
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= n) return;
                    i = next++;
                }
                fn(i);
            }
        });
    for (std::thread& th : pool) th.join();
}

}  // namespace textgrid
