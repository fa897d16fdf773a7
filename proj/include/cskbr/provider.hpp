#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cskbr {

struct ProviderParams {
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 8;

    bool operator==(const ProviderParams&) const = default;
};

// One completion call with enough provenance to cache, replay, and cost it.
struct CompletionRecord {
    std::string prompt;
    ProviderParams params;
    std::string response;
    std::size_t input_words = 0;
    std::size_t output_words = 0;
    std::string provider_name;
    bool cache_hit = false;
};

struct ProviderUnavailable : std::runtime_error {
    explicit ProviderUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct CacheMissInStrictReplay : std::runtime_error {
    explicit CacheMissInStrictReplay(const std::string& key)
        : std::runtime_error("strict replay cache miss for key " + key) {}
};

struct EmptyLedger : std::runtime_error {
    EmptyLedger() : std::runtime_error("completion ledger is empty") {}
};

// Words = maximal runs of non-whitespace; recognizes Unicode space
// code points in UTF-8 input as separators.
std::size_t count_words(std::string_view text);

class Provider {
  public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;

    // Rejects empty prompts; fills in word counts and provenance.
    virtual CompletionRecord complete(const std::string& prompt, const ProviderParams& params);

  protected:
    virtual std::string generate(const std::string& prompt, const ProviderParams& params) = 0;
};

// Deterministic prompt->response table, for tests and offline runs.
class ScriptedProvider : public Provider {
  public:
    ScriptedProvider() = default;
    explicit ScriptedProvider(std::map<std::string, std::string> responses,
                              std::optional<std::string> fallback = std::nullopt);
    ScriptedProvider(ScriptedProvider&& other) noexcept
        : responses_(std::move(other.responses_)), fallback_(std::move(other.fallback_)),
          calls_(other.calls_.load()) {}

    void add_response(std::string prompt, std::string response);
    void set_fallback(std::string response);
    std::size_t calls() const { return calls_.load(); }

    std::string name() const override { return "scripted"; }

    static ScriptedProvider from_json_file(const std::string& path);

  protected:
    std::string generate(const std::string& prompt, const ProviderParams& params) override;

  private:
    std::map<std::string, std::string> responses_;
    std::optional<std::string> fallback_;
    std::atomic<std::size_t> calls_{0};
};

struct HttpProviderConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "OPENAI_API_KEY";
    int max_retries = 3;
    int backoff_ms = 500;
    int timeout_sec = 120;
};

// chat/completions-style backend: POSTs the prompt as a single user message,
// reads choices[0].message.content (or choices[0].text). Retries transient
// failures with exponential backoff, then throws ProviderUnavailable.
class HttpProvider : public Provider {
  public:
    explicit HttpProvider(HttpProviderConfig config);

    std::string name() const override { return "http"; }
    std::size_t calls() const { return calls_.load(); }

  protected:
    std::string generate(const std::string& prompt, const ProviderParams& params) override;

  private:
    HttpProviderConfig config_;
    std::atomic<std::size_t> calls_{0};
};

enum class CacheMode {
    Record,        // hits served from cache, misses completed and appended
    Replay,        // hits served from cache, misses completed but not stored
    StrictReplay,  // misses are errors; never touches a backend
    Off,
};

std::string_view to_string(CacheMode mode);
CacheMode parse_cache_mode(std::string_view name);

// Append-only JSONL file of completion records keyed by a SHA-256 of
// (provider name, model, temperature, max output tokens, prompt).
// Concurrent lookups are lock-free after load; appends are serialized.
class CompletionCache {
  public:
    explicit CompletionCache(std::string path);

    static std::string key_for(std::string_view provider_name, const ProviderParams& params,
                               std::string_view prompt);

    std::optional<CompletionRecord> lookup(const std::string& key) const;
    void append(const std::string& key, const CompletionRecord& record);
    std::size_t size() const;
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::unordered_map<std::string, CompletionRecord> entries_;
    mutable std::mutex mutex_;
};

// Record/replay layer in front of a backend. `key_name` is the provider
// name baked into cache keys; it must match the name used when the cache
// was recorded (strict replay runs without any backend at all).
class CachingProvider : public Provider {
  public:
    CachingProvider(std::string key_name, std::unique_ptr<Provider> inner, std::string cache_path,
                    CacheMode mode);

    std::string name() const override { return key_name_; }
    CompletionRecord complete(const std::string& prompt, const ProviderParams& params) override;

    std::size_t inner_calls() const { return inner_calls_.load(); }
    const CompletionCache& cache() const { return cache_; }

  protected:
    std::string generate(const std::string& prompt, const ProviderParams& params) override;

  private:
    std::string key_name_;
    std::unique_ptr<Provider> inner_;
    CompletionCache cache_;
    CacheMode mode_;
    std::atomic<std::size_t> inner_calls_{0};
};

// One run-ledger row: which instance a completion belonged to and why it
// was made ("main:design-2", "constraint:typing:mental", ...).
struct LedgerEntry {
    std::int64_t instance_id = 0;
    std::string purpose;
    CompletionRecord record;
};

class RunLedger {
  public:
    void append(std::int64_t instance_id, std::string purpose, CompletionRecord record);
    std::vector<LedgerEntry> entries() const;
    std::size_t size() const;

  private:
    mutable std::mutex mutex_;
    std::vector<LedgerEntry> entries_;
};

// Mean over distinct instance ids of (input + output) words summed across
// that instance's calls. Throws EmptyLedger on an empty span.
double estimate_cost(std::span<const LedgerEntry> ledger);

std::string ledger_entry_to_json(const LedgerEntry& entry);
std::vector<LedgerEntry> load_ledger_file(const std::string& path);

}  // namespace cskbr
