#pragma once

// Language-transform providers: a deterministic mock and a remote
// chat-completions client with prompt templates and a response cache.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "textoshop/errors.hpp"
#include "textoshop/mock_rules.hpp"
#include "textoshop/text_core.hpp"
#include "textoshop/tone_space.hpp"

#ifndef TEXTOSHOP_DEFAULT_PROMPT_DIR
#define TEXTOSHOP_DEFAULT_PROMPT_DIR "prompts"
#endif

namespace textoshop {

enum class RequestKind {
    erase,
    repair,
    smudge,
    set_number,
    set_tense,
    apply_tone,
    estimate_tone,
    prompt,
    resize,
    rotate,
    split,
    combine,
    unite,
    intersect,
    subtract,
    exclude,
};

inline constexpr std::array<std::pair<RequestKind, std::string_view>, 16> kRequestKindNames = {{
    {RequestKind::erase, "erase"},
    {RequestKind::repair, "repair"},
    {RequestKind::smudge, "smudge"},
    {RequestKind::set_number, "set_number"},
    {RequestKind::set_tense, "set_tense"},
    {RequestKind::apply_tone, "apply_tone"},
    {RequestKind::estimate_tone, "estimate_tone"},
    {RequestKind::prompt, "prompt"},
    {RequestKind::resize, "resize"},
    {RequestKind::rotate, "rotate"},
    {RequestKind::split, "split"},
    {RequestKind::combine, "combine"},
    {RequestKind::unite, "unite"},
    {RequestKind::intersect, "intersect"},
    {RequestKind::subtract, "subtract"},
    {RequestKind::exclude, "exclude"},
}};

inline std::string_view to_string(RequestKind k)
{
    for (const auto& [kind, name] : kRequestKindNames) {
        if (kind == k) return name;
    }
    return "unknown";
}

inline std::optional<RequestKind> parse_request_kind(std::string_view name)
{
    for (const auto& [kind, n] : kRequestKindNames) {
        if (n == name) return kind;
    }
    return std::nullopt;
}

using Scalar = std::variant<std::int64_t, double, std::string>;

struct BackendRequest {
    RequestKind kind = RequestKind::smudge;
    std::map<std::string, std::string> slots;  // selection, sentence, fragment, target, prompt
    std::map<std::string, Scalar> constraints;
};

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct BackendResponse {
    std::vector<std::string> texts;
    Usage usage;
    double latency_ms = 0.0;
};

struct ResizeResult {
    /// Aligned with the requested deltas; empty where that request failed.
    std::vector<std::optional<std::string>> texts;
    bool partial = false;
};

namespace detail {

struct KindContract {
    std::vector<std::string_view> slots;
    std::vector<std::string_view> constraints;
};

inline KindContract contract(RequestKind k)
{
    switch (k) {
    case RequestKind::erase:
    case RequestKind::repair: return {{"sentence", "selection"}, {"selection_offset"}};
    case RequestKind::set_number: return {{"sentence", "selection"}, {"selection_offset", "number"}};
    case RequestKind::set_tense: return {{"sentence", "selection"}, {"selection_offset", "tense"}};
    case RequestKind::apply_tone:
        return {{"sentence", "selection"}, {"selection_offset", "formality", "sentiment", "complexity"}};
    case RequestKind::estimate_tone:
    case RequestKind::smudge:
    case RequestKind::split:
    case RequestKind::combine: return {{"selection"}, {}};
    case RequestKind::prompt: return {{"selection", "prompt"}, {}};
    case RequestKind::resize: return {{"sentence"}, {"delta"}};
    case RequestKind::rotate: return {{"selection"}, {"intensity"}};
    case RequestKind::unite:
    case RequestKind::intersect:
    case RequestKind::subtract:
    case RequestKind::exclude: return {{"fragment", "target"}, {}};
    }
    return {};
}

inline std::string scalar_to_string(const Scalar& s)
{
    if (auto i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
    if (auto d = std::get_if<double>(&s)) {
        std::ostringstream os;
        os << *d;
        return os.str();
    }
    return std::get<std::string>(s);
}

inline std::int64_t int_constraint(const BackendRequest& r, const std::string& name)
{
    const auto& v = r.constraints.at(name);
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto d = std::get_if<double>(&v)) return static_cast<std::int64_t>(*d);
    throw InvalidRequestError("constraint '" + name + "' must be numeric");
}

inline double real_constraint(const BackendRequest& r, const std::string& name)
{
    const auto& v = r.constraints.at(name);
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v)) return *d;
    throw InvalidRequestError("constraint '" + name + "' must be numeric");
}

inline std::string string_constraint(const BackendRequest& r, const std::string& name)
{
    if (auto s = std::get_if<std::string>(&r.constraints.at(name))) return *s;
    throw InvalidRequestError("constraint '" + name + "' must be a string");
}

}  // namespace detail

/// Throws InvalidRequestError when a required slot is missing or blank, or a
/// required constraint is missing or malformed.
inline void validate_request(const BackendRequest& req)
{
    const auto c = detail::contract(req.kind);
    for (auto slot : c.slots) {
        auto it = req.slots.find(std::string(slot));
        if (it == req.slots.end() || is_whitespace_only(it->second)) {
            throw InvalidRequestError(std::string(to_string(req.kind)) + " request needs a non-empty '" +
                                      std::string(slot) + "' slot");
        }
    }
    for (auto name : c.constraints) {
        if (!req.constraints.count(std::string(name))) {
            throw InvalidRequestError(std::string(to_string(req.kind)) + " request needs constraint '" +
                                      std::string(name) + "'");
        }
    }
    if (req.constraints.count("selection_offset")) {
        const auto off = detail::int_constraint(req, "selection_offset");
        const auto& sentence = req.slots.at("sentence");
        const auto& sel = req.slots.at("selection");
        const auto gs = split_graphemes(sentence);
        const auto len = grapheme_length(sel);
        if (off < 0 || static_cast<std::size_t>(off) + len > gs.size() ||
            join_graphemes(gs, static_cast<std::size_t>(off), static_cast<std::size_t>(off) + len) != sel) {
            throw InvalidRequestError("selection does not occur in the sentence at the given offset");
        }
    }
    if (req.kind == RequestKind::set_number) {
        const auto n = detail::string_constraint(req, "number");
        if (n != "singular" && n != "plural") throw InvalidRequestError("number must be 'singular' or 'plural'");
    }
    if (req.kind == RequestKind::set_tense) {
        const auto t = detail::string_constraint(req, "tense");
        if (t != "past" && t != "present" && t != "future") {
            throw InvalidRequestError("tense must be 'past', 'present' or 'future'");
        }
    }
    if (req.kind == RequestKind::apply_tone) {
        const ToneVector t{static_cast<int>(detail::int_constraint(req, "formality")),
                           static_cast<int>(detail::int_constraint(req, "sentiment")),
                           static_cast<int>(detail::int_constraint(req, "complexity"))};
        if (!t.valid()) throw InvalidRequestError("tone components must lie in [0, 10]");
    }
    if (req.kind == RequestKind::rotate) {
        const double d = detail::real_constraint(req, "intensity");
        if (!(d >= 0.0 && d <= 1.0)) throw InvalidRequestError("intensity must lie in [0, 1]");
    }
    if (req.kind == RequestKind::resize) detail::int_constraint(req, "delta");
}

inline std::string tone_to_json(const ToneVector& t)
{
    return nlohmann::json{{"complexity", t.complexity}, {"formality", t.formality}, {"sentiment", t.sentiment}}.dump();
}

/// Parses {"formality":f,"sentiment":s,"complexity":c}; anything else is a
/// CompletionError.
inline ToneVector tone_from_json(std::string_view text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        ToneVector t{j.at("formality").get<int>(), j.at("sentiment").get<int>(), j.at("complexity").get<int>()};
        if (!t.valid()) throw CompletionError("estimated tone out of range");
        return t;
    } catch (const nlohmann::json::exception&) {
        throw CompletionError("backend did not return a tone vector");
    }
}

class LanguageBackend {
public:
    virtual ~LanguageBackend() = default;

    virtual BackendResponse complete(const BackendRequest& req) = 0;
    virtual std::string name() const = 0;

    /// One candidate per delta, order-aligned. Requests run concurrently;
    /// failed ones leave a gap and set `partial`. All failing rethrows the
    /// first error.
    virtual ResizeResult resize_variants(const std::string& sentence, const std::vector<int>& deltas)
    {
        if (is_whitespace_only(sentence)) throw InvalidRequestError("resize needs a non-empty sentence");
        if (deltas.empty()) throw InvalidRequestError("resize needs at least one delta");
        std::vector<std::future<BackendResponse>> futures;
        for (int d : deltas) {
            BackendRequest req{RequestKind::resize, {{"sentence", sentence}}, {{"delta", std::int64_t{d}}}};
            futures.push_back(std::async(std::launch::async, [this, req] { return complete(req); }));
        }
        ResizeResult out;
        std::exception_ptr first;
        for (auto& f : futures) {
            try {
                out.texts.emplace_back(f.get().texts.front());
            } catch (const BackendError&) {
                if (!first) first = std::current_exception();
                out.texts.emplace_back(std::nullopt);
                out.partial = true;
            }
        }
        if (std::none_of(out.texts.begin(), out.texts.end(), [](const auto& t) { return t.has_value(); })) {
            std::rethrow_exception(first);
        }
        return out;
    }
};

class MockBackend : public LanguageBackend {
public:
    std::string name() const override { return "mock"; }

    BackendResponse complete(const BackendRequest& req) override
    {
        validate_request(req);
        return {{run(req)}, {}, 0.0};
    }

    ResizeResult resize_variants(const std::string& sentence, const std::vector<int>& deltas) override
    {
        if (is_whitespace_only(sentence)) throw InvalidRequestError("resize needs a non-empty sentence");
        if (deltas.empty()) throw InvalidRequestError("resize needs at least one delta");
        ResizeResult out;
        for (int d : deltas) out.texts.emplace_back(mock::resize(sentence, d));
        return out;
    }

private:
    static std::string run(const BackendRequest& req)
    {
        const auto slot = [&](const char* name) -> const std::string& { return req.slots.at(name); };
        const auto offset = [&] { return static_cast<std::size_t>(detail::int_constraint(req, "selection_offset")); };
        // Rewrites only the selection inside its sentence.
        const auto within = [&](auto&& fn) {
            const auto gs = split_graphemes(slot("sentence"));
            const std::size_t off = offset();
            const std::size_t end = off + grapheme_length(slot("selection"));
            return join_graphemes(gs, 0, off) + fn(join_graphemes(gs, off, end)) + join_graphemes(gs, end, gs.size());
        };
        switch (req.kind) {
        case RequestKind::erase: return mock::erase(slot("sentence"), offset(), grapheme_length(slot("selection")));
        case RequestKind::repair: return mock::repair(slot("sentence"));
        case RequestKind::smudge: return mock::smudge(slot("selection"));
        case RequestKind::set_number: {
            const auto n = detail::string_constraint(req, "number") == "plural" ? Number::plural : Number::singular;
            return within([&](const std::string& s) { return mock::set_number(s, n); });
        }
        case RequestKind::set_tense: {
            const auto t = detail::string_constraint(req, "tense");
            const auto tense = t == "future" ? Tense::future : t == "past" ? Tense::past : Tense::present;
            return mock::set_tense(slot("sentence"), offset(), grapheme_length(slot("selection")), tense);
        }
        case RequestKind::apply_tone: {
            const ToneVector tone{static_cast<int>(detail::int_constraint(req, "formality")),
                                  static_cast<int>(detail::int_constraint(req, "sentiment")),
                                  static_cast<int>(detail::int_constraint(req, "complexity"))};
            return within([&](const std::string& s) { return mock::apply_tone(s, tone); });
        }
        case RequestKind::estimate_tone: return tone_to_json(mock::estimate_tone(slot("selection")));
        case RequestKind::prompt: return mock::prompt(slot("selection"), slot("prompt"));
        case RequestKind::resize:
            return mock::resize(slot("sentence"), static_cast<int>(detail::int_constraint(req, "delta")));
        case RequestKind::rotate: return mock::rotate(slot("selection"), detail::real_constraint(req, "intensity"));
        case RequestKind::split: {
            auto s = mock::split(slot("selection"));
            return s ? *s : slot("selection");
        }
        case RequestKind::combine: return mock::combine(slot("selection"));
        case RequestKind::unite:
        case RequestKind::intersect:
        case RequestKind::subtract:
        case RequestKind::exclude: {
            const auto op = req.kind == RequestKind::unite       ? mock::BooleanOp::unite
                            : req.kind == RequestKind::intersect ? mock::BooleanOp::intersect
                            : req.kind == RequestKind::subtract  ? mock::BooleanOp::subtract
                                                                 : mock::BooleanOp::exclude;
            auto out = mock::boolean(slot("fragment"), slot("target"), op);
            if (out.empty()) throw CompletionError(std::string(to_string(req.kind)) + " left no words");
            return out;
        }
        }
        throw InvalidRequestError("unsupported request kind");
    }
};

// ---------------------------------------------------------------------------
// Remote provider

struct PromptTemplate {
    std::string system;
    std::string user;
};

/// Loads `<dir>/<kind>.txt`: system text, a line holding only `---`, then
/// the user text. `{{name}}` is replaced by the slot or constraint of that
/// name (empty when absent).
class PromptLibrary {
public:
    explicit PromptLibrary(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const noexcept { return dir_; }

    PromptTemplate load(RequestKind kind) const
    {
        const auto path = dir_ / (std::string(to_string(kind)) + ".txt");
        std::ifstream in(path);
        if (!in) throw BackendError("missing prompt template " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static PromptTemplate parse(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        PromptTemplate t;
        bool user = false;
        while (std::getline(in, line)) {
            if (!user && line == "---") {
                user = true;
                continue;
            }
            (user ? t.user : t.system) += line + "\n";
        }
        if (!user) throw BackendError("prompt template has no '---' separator");
        t.system = trim(t.system);
        t.user = trim(t.user);
        return t;
    }

    static std::string render(const std::string& tmpl, const BackendRequest& req)
    {
        std::string out;
        std::size_t pos = 0;
        while (true) {
            const auto open = tmpl.find("{{", pos);
            if (open == std::string::npos) break;
            const auto close = tmpl.find("}}", open + 2);
            if (close == std::string::npos) break;
            out.append(tmpl, pos, open - pos);
            const std::string key = trim(tmpl.substr(open + 2, close - open - 2));
            if (auto s = req.slots.find(key); s != req.slots.end()) {
                out += s->second;
            } else if (auto c = req.constraints.find(key); c != req.constraints.end()) {
                out += detail::scalar_to_string(c->second);
            }
            pos = close + 2;
        }
        out.append(tmpl, pos);
        return out;
    }

private:
    std::filesystem::path dir_;
};

/// Strips surrounding whitespace, one layer of code fences, then one pair of
/// matching surrounding quotes. Blank results raise CompletionError.
inline std::string sanitize_completion(std::string_view reply)
{
    std::string s = trim(reply);
    if (s.starts_with("```")) {
        const auto nl = s.find('\n');
        std::string body = nl == std::string::npos ? s.substr(3) : s.substr(nl + 1);
        body = trim(body);
        if (body.ends_with("```")) body.erase(body.size() - 3);
        s = trim(body);
    }
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kQuotes = {{
        {"\"", "\""},
        {"'", "'"},
        {"\xE2\x80\x9C", "\xE2\x80\x9D"},
        {"\xE2\x80\x98", "\xE2\x80\x99"},
    }};
    for (const auto& [open, close] : kQuotes) {
        if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
            s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
            break;
        }
    }
    if (s.empty()) throw CompletionError("backend returned a blank completion");
    return s;
}

inline std::string sha256_hex(std::string_view data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 0xF];
    }
    return out;
}

inline nlohmann::json request_to_json(const BackendRequest& req)
{
    nlohmann::json constraints = nlohmann::json::object();
    for (const auto& [k, v] : req.constraints) {
        std::visit([&](const auto& x) { constraints[k] = x; }, v);
    }
    return {{"kind", to_string(req.kind)}, {"slots", req.slots}, {"constraints", constraints}};
}

/// Stable digest of (kind, slots, constraints, model).
inline std::string cache_key(const BackendRequest& req, std::string_view model)
{
    auto j = request_to_json(req);
    j["model"] = model;
    return sha256_hex(j.dump());
}

/// In-memory map with optional one-file-per-key spill. Disk problems count
/// as misses.
class ResponseCache {
public:
    explicit ResponseCache(std::optional<std::filesystem::path> spill_dir = std::nullopt) : dir_(std::move(spill_dir)) {}

    std::optional<std::vector<std::string>> lookup(const std::string& key)
    {
        std::lock_guard lock(mu_);
        if (auto it = mem_.find(key); it != mem_.end()) return it->second;
        if (!dir_) return std::nullopt;
        try {
            std::ifstream in(*dir_ / (key + ".json"));
            if (!in) return std::nullopt;
            auto texts = nlohmann::json::parse(in).get<std::vector<std::string>>();
            if (texts.empty()) return std::nullopt;
            mem_[key] = texts;
            return texts;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    void store(const std::string& key, const std::vector<std::string>& texts)
    {
        std::lock_guard lock(mu_);
        mem_[key] = texts;
        if (!dir_) return;
        try {
            std::filesystem::create_directories(*dir_);
            const auto final_path = *dir_ / (key + ".json");
            const auto tmp = *dir_ / (key + ".json.tmp");
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                out << nlohmann::json(texts).dump();
                if (!out) return;
            }
            std::filesystem::rename(tmp, final_path);
        } catch (const std::exception&) {
        }
    }

    std::size_t size() const
    {
        std::lock_guard lock(mu_);
        return mem_.size();
    }

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, std::vector<std::string>> mem_;
    std::optional<std::filesystem::path> dir_;
};

struct HttpReply {
    int status = 0;
    std::string body;
};

/// Raised by transports when no HTTP reply arrived.
class TransportFailure : public std::runtime_error {
public:
    TransportFailure(const std::string& what, bool timed_out) : std::runtime_error(what), timed_out_(timed_out) {}
    bool timed_out() const noexcept { return timed_out_; }

private:
    bool timed_out_;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// POSTs a JSON body to `path` (relative to the base URL). Must not block
    /// longer than `timeout`.
    virtual HttpReply post_json(const std::string& path, const std::string& body,
                                const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout) = 0;
};

enum class BackendKind { mock, remote };

struct BackendConfig {
    BackendKind kind = BackendKind::mock;
    std::string api_key;
    std::string model = "gpt-4o";
    std::string base_url = "https://api.openai.com/v1";
    std::chrono::milliseconds timeout{30000};
    int resize_variants = 8;
    double temperature = 0.7;
    std::filesystem::path prompt_dir = TEXTOSHOP_DEFAULT_PROMPT_DIR;
    std::optional<std::filesystem::path> cache_dir;

    /// Reads the TEXTOSHOP_* environment. Malformed values throw
    /// InvalidRequestError.
    static BackendConfig from_env()
    {
        BackendConfig c;
        auto env = [](const char* name) -> std::optional<std::string> {
            const char* v = std::getenv(name);
            if (!v || !*v) return std::nullopt;
            return std::string(v);
        };
        auto positive = [](const std::string& name, const std::string& v) {
            try {
                std::size_t used = 0;
                const long long n = std::stoll(v, &used);
                if (used != v.size() || n <= 0) throw std::invalid_argument(v);
                return n;
            } catch (const std::exception&) {
                throw InvalidRequestError(name + " must be a positive integer");
            }
        };
        if (auto v = env("TEXTOSHOP_BACKEND")) {
            if (*v == "mock") {
                c.kind = BackendKind::mock;
            } else if (*v == "remote") {
                c.kind = BackendKind::remote;
            } else {
                throw InvalidRequestError("TEXTOSHOP_BACKEND must be 'mock' or 'remote'");
            }
        }
        if (auto v = env("TEXTOSHOP_API_KEY")) c.api_key = *v;
        if (auto v = env("TEXTOSHOP_MODEL")) c.model = *v;
        if (auto v = env("TEXTOSHOP_BASE_URL")) c.base_url = *v;
        if (auto v = env("TEXTOSHOP_TIMEOUT_MS")) c.timeout = std::chrono::milliseconds(positive("TEXTOSHOP_TIMEOUT_MS", *v));
        if (auto v = env("TEXTOSHOP_RESIZE_VARIANTS")) {
            c.resize_variants = static_cast<int>(positive("TEXTOSHOP_RESIZE_VARIANTS", *v));
        }
        if (auto v = env("TEXTOSHOP_PROMPT_DIR")) c.prompt_dir = *v;
        return c;
    }
};

class RemoteBackend : public LanguageBackend {
public:
    RemoteBackend(BackendConfig config, std::shared_ptr<Transport> transport)
        : config_(std::move(config)),
          transport_(std::move(transport)),
          prompts_(config_.prompt_dir),
          cache_(config_.cache_dir)
    {
    }

    std::string name() const override { return "remote"; }
    const BackendConfig& config() const noexcept { return config_; }
    ResponseCache& cache() noexcept { return cache_; }

    BackendResponse complete(const BackendRequest& req) override
    {
        validate_request(req);
        const auto start = std::chrono::steady_clock::now();
        const std::string key = cache_key(req, config_.model);
        if (auto hit = cache_.lookup(key)) return {*hit, {}, 0.0};

        const PromptTemplate tmpl = prompts_.load(req.kind);
        const nlohmann::json body = {
            {"model", config_.model},
            {"messages",
             {{{"role", "system"}, {"content", PromptLibrary::render(tmpl.system, req)}},
              {{"role", "user"}, {"content", PromptLibrary::render(tmpl.user, req)}}}},
            {"temperature", config_.temperature},
        };
        std::map<std::string, std::string> headers;
        if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;

        const HttpReply reply = send(body.dump(), headers, start);
        if (reply.status < 200 || reply.status >= 300) {
            throw RemoteError(reply.status, reply.body.substr(0, 200));
        }
        BackendResponse resp;
        try {
            const auto j = nlohmann::json::parse(reply.body);
            resp.texts.push_back(sanitize_completion(j.at("choices").at(0).at("message").at("content").get<std::string>()));
            if (j.contains("usage")) {
                resp.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
                resp.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
            }
        } catch (const nlohmann::json::exception&) {
            throw CompletionError("malformed chat-completion reply");
        }
        resp.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        cache_.store(key, resp.texts);
        return resp;
    }

private:
    // One retry on transport failure, bounded by the overall deadline.
    HttpReply send(const std::string& body, const std::map<std::string, std::string>& headers,
                   std::chrono::steady_clock::time_point start)
    {
        const auto deadline = start + config_.timeout;
        for (int attempt = 0;; ++attempt) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) throw TimeoutError("backend timed out");
            try {
                return transport_->post_json("/chat/completions", body, headers, left);
            } catch (const TransportFailure& f) {
                if (f.timed_out() || std::chrono::steady_clock::now() >= deadline) {
                    throw TimeoutError(std::string("backend timed out: ") + f.what());
                }
                if (attempt >= 1) throw BackendError(std::string("backend unreachable: ") + f.what());
            }
        }
    }

    BackendConfig config_;
    std::shared_ptr<Transport> transport_;
    PromptLibrary prompts_;
    ResponseCache cache_;
};

}  // namespace textoshop
