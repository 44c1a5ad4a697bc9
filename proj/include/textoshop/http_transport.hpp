#pragma once

// httplib-backed Transport and the backend factory.

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include <httplib.h>

#include "textoshop/language_backend.hpp"

namespace textoshop {

struct BaseUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path without trailing slash, may be empty
};

inline BaseUrl split_base_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InvalidRequestError("base URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    BaseUrl b;
    b.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) b.prefix = url.substr(path_start);
    while (!b.prefix.empty() && b.prefix.back() == '/') b.prefix.pop_back();
    return b;
}

class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(const std::string& base_url) : base_(split_base_url(base_url)) {}

    HttpReply post_json(const std::string& path, const std::string& body,
                        const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout) override
    {
        httplib::Client cli(base_.origin);
        cli.set_connection_timeout(timeout);
        cli.set_read_timeout(timeout);
        cli.set_write_timeout(timeout);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        const auto started = std::chrono::steady_clock::now();
        auto res = cli.Post(base_.prefix + path, h, body, "application/json");
        if (!res) {
            const bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                                   std::chrono::steady_clock::now() - started >= timeout;
            throw TransportFailure(httplib::to_string(res.error()), timed_out);
        }
        return {res->status, res->body};
    }

private:
    BaseUrl base_;
};

/// Mock unless the configuration asks for the remote provider.
inline std::shared_ptr<LanguageBackend> make_backend(const BackendConfig& config)
{
    if (config.kind == BackendKind::mock) return std::make_shared<MockBackend>();
    return std::make_shared<RemoteBackend>(config, std::make_shared<HttplibTransport>(config.base_url));
}

}  // namespace textoshop
