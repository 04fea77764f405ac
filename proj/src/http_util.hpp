#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

namespace lcr::detail {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

/// Splits a base URL and appends `suffix` to its path unless already there.
inline Endpoint resolve_endpoint(std::string_view url, std::string_view suffix) {
    Endpoint ep;
    const auto scheme_end = url.find("://");
    const std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string_view::npos) {
        ep.origin = std::string(url);
    } else {
        ep.origin = std::string(url.substr(0, path_start));
        ep.path = std::string(url.substr(path_start));
    }
    if (scheme_end == std::string_view::npos) ep.origin = "http://" + ep.origin;
    while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
    if (ep.path.size() < suffix.size() || ep.path.compare(ep.path.size() - suffix.size(), suffix.size(), suffix) != 0) {
        ep.path += suffix;
    }
    return ep;
}

inline std::unique_ptr<httplib::Client> make_client(const Endpoint& ep, std::chrono::milliseconds timeout) {
    auto client = std::make_unique<httplib::Client>(ep.origin);
    client->set_connection_timeout(timeout);
    client->set_read_timeout(timeout);
    client->set_write_timeout(timeout);
    return client;
}

}  // namespace lcr::detail
