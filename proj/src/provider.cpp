#include "cskbr/provider.hpp"

#include <array>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace cskbr {

namespace {

using nlohmann::json;

// Compact SHA-256 (FIPS 180-4), enough for stable cache keys.
class Sha256 {
  public:
    void update(const unsigned char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            buffer_[buffer_len_++] = data[i];
            if (buffer_len_ == 64) {
                process_block(buffer_.data());
                total_ += 64;
                buffer_len_ = 0;
            }
        }
    }

    std::string hex_digest() {
        // message length in bits, captured before padding bytes flow through update()
        std::uint64_t bit_len = (total_ + buffer_len_) * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buffer_len_ != 56) update(&zero, 1);
        unsigned char len_bytes[8];
        for (int i = 7; i >= 0; --i) {
            len_bytes[i] = static_cast<unsigned char>(bit_len & 0xff);
            bit_len >>= 8;
        }
        for (int i = 0; i < 8; ++i) buffer_[buffer_len_++] = len_bytes[i];
        process_block(buffer_.data());

        static const char* digits = "0123456789abcdef";
        std::string out(64, '0');
        for (int i = 0; i < 8; ++i) {
            for (int b = 0; b < 4; ++b) {
                unsigned char byte = static_cast<unsigned char>((state_[i] >> (24 - 8 * b)) & 0xff);
                out[static_cast<std::size_t>(i * 8 + b * 2)] = digits[byte >> 4];
                out[static_cast<std::size_t>(i * 8 + b * 2 + 1)] = digits[byte & 0xf];
            }
        }
        return out;
    }

  private:
    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void process_block(const unsigned char* block) {
        static constexpr std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int t = 0; t < 16; ++t) {
            w[t] = (static_cast<std::uint32_t>(block[t * 4]) << 24) |
                   (static_cast<std::uint32_t>(block[t * 4 + 1]) << 16) |
                   (static_cast<std::uint32_t>(block[t * 4 + 2]) << 8) |
                   static_cast<std::uint32_t>(block[t * 4 + 3]);
        }
        for (int t = 16; t < 64; ++t) {
            std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
            std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16] + s0 + w[t - 7] + s1;
        }
        std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int t = 0; t < 64; ++t) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t temp1 = h + s1 + ch + k[t] + w[t];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t temp2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + temp1;
            d = c;
            c = b;
            b = a;
            a = temp1 + temp2;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
        state_[4] += e;
        state_[5] += f;
        state_[6] += g;
        state_[7] += h;
    }

    std::array<std::uint32_t, 8> state_ = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                           0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::array<unsigned char, 72> buffer_{};
    std::size_t buffer_len_ = 0;
    std::uint64_t total_ = 0;
};

std::string sha256_hex(std::string_view text) {
    Sha256 hasher;
    hasher.update(reinterpret_cast<const unsigned char*>(text.data()), text.size());
    return hasher.hex_digest();
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
        case 0x0085: case 0x00A0: case 0x1680:
        case 0x2000: case 0x2001: case 0x2002: case 0x2003: case 0x2004: case 0x2005:
        case 0x2006: case 0x2007: case 0x2008: case 0x2009: case 0x200A:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return false;
    }
}

// Decodes the next UTF-8 code point; malformed bytes count as one code point.
char32_t next_code_point(std::string_view text, std::size_t& pos) {
    unsigned char lead = static_cast<unsigned char>(text[pos]);
    int extra = 0;
    char32_t cp = lead;
    if (lead >= 0xF0) {
        extra = 3;
        cp = lead & 0x07u;
    } else if (lead >= 0xE0) {
        extra = 2;
        cp = lead & 0x0Fu;
    } else if (lead >= 0xC0) {
        extra = 1;
        cp = lead & 0x1Fu;
    }
    ++pos;
    for (int i = 0; i < extra && pos < text.size(); ++i) {
        unsigned char byte = static_cast<unsigned char>(text[pos]);
        if ((byte & 0xC0u) != 0x80u) return cp;
        cp = (cp << 6) | (byte & 0x3Fu);
        ++pos;
    }
    return cp;
}

std::string params_fingerprint(std::string_view provider_name, const ProviderParams& params) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.17g", params.temperature);
    std::string out;
    out += provider_name;
    out += '\x1f';
    out += params.model;
    out += '\x1f';
    out += temp;
    out += '\x1f';
    out += std::to_string(params.max_output_tokens);
    out += '\x1f';
    return out;
}

json record_to_json(const std::string& key, const CompletionRecord& record) {
    return json{{"key", key},
                {"prompt", record.prompt},
                {"params",
                 {{"model", record.params.model},
                  {"temperature", record.params.temperature},
                  {"max_output_tokens", record.params.max_output_tokens}}},
                {"response", record.response},
                {"input_words", record.input_words},
                {"output_words", record.output_words}};
}

CompletionRecord record_from_json(const json& j) {
    CompletionRecord record;
    record.prompt = j.at("prompt").get<std::string>();
    record.params.model = j.at("params").at("model").get<std::string>();
    record.params.temperature = j.at("params").at("temperature").get<double>();
    record.params.max_output_tokens = j.at("params").at("max_output_tokens").get<int>();
    record.response = j.at("response").get<std::string>();
    record.input_words = j.at("input_words").get<std::size_t>();
    record.output_words = j.at("output_words").get<std::size_t>();
    return record;
}

}  // namespace

std::size_t count_words(std::string_view text) {
    std::size_t words = 0;
    std::size_t pos = 0;
    bool in_word = false;
    while (pos < text.size()) {
        char32_t cp = next_code_point(text, pos);
        if (is_unicode_space(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

CompletionRecord Provider::complete(const std::string& prompt, const ProviderParams& params) {
    if (prompt.empty()) throw std::invalid_argument("prompt must be non-empty");
    CompletionRecord record;
    record.prompt = prompt;
    record.params = params;
    record.response = generate(prompt, params);
    record.input_words = count_words(prompt);
    record.output_words = count_words(record.response);
    record.provider_name = name();
    record.cache_hit = false;
    return record;
}

ScriptedProvider::ScriptedProvider(std::map<std::string, std::string> responses,
                                   std::optional<std::string> fallback)
    : responses_(std::move(responses)), fallback_(std::move(fallback)) {}

void ScriptedProvider::add_response(std::string prompt, std::string response) {
    responses_[std::move(prompt)] = std::move(response);
}

void ScriptedProvider::set_fallback(std::string response) { fallback_ = std::move(response); }

std::string ScriptedProvider::generate(const std::string& prompt, const ProviderParams&) {
    calls_.fetch_add(1);
    auto it = responses_.find(prompt);
    if (it != responses_.end()) return it->second;
    if (fallback_.has_value()) return *fallback_;
    throw ProviderUnavailable("scripted provider has no response for prompt: " +
                              prompt.substr(0, 80));
}

ScriptedProvider ScriptedProvider::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scripted responses file: " + path);
    json j = json::parse(in);
    std::map<std::string, std::string> responses;
    std::optional<std::string> fallback;
    const json& table = j.contains("responses") ? j.at("responses") : j;
    for (const auto& [prompt, response] : table.items()) {
        responses[prompt] = response.get<std::string>();
    }
    if (j.contains("fallback")) fallback = j.at("fallback").get<std::string>();
    return ScriptedProvider(std::move(responses), std::move(fallback));
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {}

std::string HttpProvider::generate(const std::string& prompt, const ProviderParams& params) {
    if (config_.base_url.rfind("https://", 0) == 0) {
        throw ProviderUnavailable(
            "https endpoints need a TLS-enabled build; point base_url at an http proxy");
    }
    json body = {{"model", params.model},
                 {"temperature", params.temperature},
                 {"max_tokens", params.max_output_tokens},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    int backoff = config_.backoff_ms;
    for (int attempt = 0; attempt < config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(config_.base_url);
        client.set_read_timeout(config_.timeout_sec, 0);
        client.set_connection_timeout(config_.timeout_sec, 0);
        calls_.fetch_add(1);
        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProviderUnavailable("http status " + std::to_string(res->status) + ": " +
                                      res->body.substr(0, 200));
        }
        try {
            json reply = json::parse(res->body);
            const json& choice = reply.at("choices").at(0);
            if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
            return choice.at("text").get<std::string>();
        } catch (const json::exception& e) {
            throw ProviderUnavailable(std::string("malformed completion response: ") + e.what());
        }
    }
    throw ProviderUnavailable("backend unreachable after " + std::to_string(config_.max_retries) +
                              " attempts: " + last_error);
}

std::string_view to_string(CacheMode mode) {
    switch (mode) {
        case CacheMode::Record: return "record";
        case CacheMode::Replay: return "replay";
        case CacheMode::StrictReplay: return "strict-replay";
        case CacheMode::Off: return "off";
    }
    throw std::logic_error("bad CacheMode");
}

CacheMode parse_cache_mode(std::string_view name) {
    if (name == "record") return CacheMode::Record;
    if (name == "replay") return CacheMode::Replay;
    if (name == "strict-replay") return CacheMode::StrictReplay;
    if (name == "off") return CacheMode::Off;
    throw std::invalid_argument("unknown cache mode: " + std::string(name));
}

CompletionCache::CompletionCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // a missing file is an empty cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, true);
        entries_[j.at("key").get<std::string>()] = record_from_json(j);
    }
}

std::string CompletionCache::key_for(std::string_view provider_name, const ProviderParams& params,
                                     std::string_view prompt) {
    std::string material = params_fingerprint(provider_name, params);
    material += prompt;
    return sha256_hex(material);
}

std::optional<CompletionRecord> CompletionCache::lookup(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CompletionCache::append(const std::string& key, const CompletionRecord& record) {
    std::lock_guard lock(mutex_);
    if (entries_.contains(key)) return;
    entries_[key] = record;
    auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot append to cache file: " + path_);
    out << record_to_json(key, record).dump() << "\n";
}

std::size_t CompletionCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

CachingProvider::CachingProvider(std::string key_name, std::unique_ptr<Provider> inner,
                                 std::string cache_path, CacheMode mode)
    : key_name_(std::move(key_name)), inner_(std::move(inner)), cache_(std::move(cache_path)),
      mode_(mode) {
    if (mode_ == CacheMode::Off) throw std::invalid_argument("use the backend directly when caching is off");
    if (mode_ != CacheMode::StrictReplay && inner_ == nullptr) {
        throw std::invalid_argument("cache mode " + std::string(to_string(mode_)) +
                                    " needs a backend provider");
    }
}

CompletionRecord CachingProvider::complete(const std::string& prompt,
                                           const ProviderParams& params) {
    if (prompt.empty()) throw std::invalid_argument("prompt must be non-empty");
    const std::string key = CompletionCache::key_for(key_name_, params, prompt);
    if (auto cached = cache_.lookup(key); cached.has_value()) {
        CompletionRecord record = *cached;
        record.provider_name = key_name_;
        record.cache_hit = true;
        return record;
    }
    if (mode_ == CacheMode::StrictReplay) throw CacheMissInStrictReplay(key);
    inner_calls_.fetch_add(1);
    CompletionRecord record = inner_->complete(prompt, params);
    record.provider_name = key_name_;
    if (mode_ == CacheMode::Record) cache_.append(key, record);
    return record;
}

std::string CachingProvider::generate(const std::string&, const ProviderParams&) {
    throw std::logic_error("CachingProvider::complete handles generation");
}

void RunLedger::append(std::int64_t instance_id, std::string purpose, CompletionRecord record) {
    std::lock_guard lock(mutex_);
    entries_.push_back({instance_id, std::move(purpose), std::move(record)});
}

std::vector<LedgerEntry> RunLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t RunLedger::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

double estimate_cost(std::span<const LedgerEntry> ledger) {
    if (ledger.empty()) throw EmptyLedger();
    std::map<std::int64_t, std::size_t> per_instance;
    for (const LedgerEntry& entry : ledger) {
        per_instance[entry.instance_id] += entry.record.input_words + entry.record.output_words;
    }
    std::size_t total = 0;
    for (const auto& [id, words] : per_instance) total += words;
    return static_cast<double>(total) / static_cast<double>(per_instance.size());
}

std::string ledger_entry_to_json(const LedgerEntry& entry) {
    json j = record_to_json(CompletionCache::key_for(entry.record.provider_name,
                                                     entry.record.params, entry.record.prompt),
                            entry.record);
    j["instance_id"] = entry.instance_id;
    j["purpose"] = entry.purpose;
    j["provider"] = entry.record.provider_name;
    j["cache_hit"] = entry.record.cache_hit;
    return j.dump();
}

std::vector<LedgerEntry> load_ledger_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ledger file: " + path);
    std::vector<LedgerEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        LedgerEntry entry;
        entry.instance_id = j.at("instance_id").get<std::int64_t>();
        entry.purpose = j.value("purpose", "");
        entry.record = record_from_json(j);
        entry.record.provider_name = j.value("provider", "");
        entry.record.cache_hit = j.value("cache_hit", false);
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace cskbr
