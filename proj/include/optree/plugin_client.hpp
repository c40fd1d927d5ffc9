#pragma once

#include <chrono>
#include <string>

#include "optree/json_codec.hpp"

namespace optree {

/// Plain-HTTP JSON endpoint shared by the generator, classifier and value
/// generator plug-ins. Each call opens its own connection, so one instance is
/// safe to use from several threads.
class JsonEndpoint {
public:
    /// `url` is http://host[:port][/path]. Throws Error("ConfigError") otherwise.
    explicit JsonEndpoint(const std::string& url, std::chrono::milliseconds timeout = std::chrono::seconds(30));

    /// POSTs `body` and returns the parsed response object.
    /// Throws Error("PluginError") on transport failures, non-2xx status or
    /// non-object responses.
    json post(const json& body) const;

    const std::string& url() const noexcept { return url_; }

private:
    std::string url_;
    std::string host_;
    int port_ = 80;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

}  // namespace optree
