#include "optree/plugin_client.hpp"

#include <httplib.h>

namespace optree {

JsonEndpoint::JsonEndpoint(const std::string& url, std::chrono::milliseconds timeout)
    : url_(url), timeout_(timeout) {
    constexpr std::string_view scheme = "http://";
    if (url.rfind(scheme, 0) != 0) throw Error("ConfigError", "plug-in URL must start with http://: " + url);
    std::string rest = url.substr(scheme.size());
    auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        host_ = authority.substr(0, colon);
        try {
            size_t used = 0;
            port_ = std::stoi(authority.substr(colon + 1), &used);
            if (used != authority.size() - colon - 1 || port_ <= 0 || port_ > 65535) throw std::out_of_range("port");
        } catch (const std::exception&) {
            throw Error("ConfigError", "bad port in plug-in URL: " + url);
        }
    } else {
        host_ = authority;
    }
    if (host_.empty()) throw Error("ConfigError", "missing host in plug-in URL: " + url);
}

json JsonEndpoint::post(const json& body) const {
    httplib::Client client(host_, port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) throw Error("PluginError", "request to " + url_ + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw Error("PluginError", "request to " + url_ + " returned HTTP " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
        throw Error("PluginError", "response from " + url_ + " is not a JSON object");
    return parsed;
}

}  // namespace optree
