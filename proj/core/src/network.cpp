#include "newer/network.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "newer/error.hpp"

namespace newer {

Network::Network(std::vector<std::string> nodes, const std::vector<Edge>& edges) {
    for (const auto& [follower, followee] : edges) {
        if (follower == followee) {
            throw InputError("self-loop on node '" + follower + "'");
        }
        nodes.push_back(follower);
        nodes.push_back(followee);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    ids_ = std::move(nodes);
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        index_.emplace(ids_[i], i);
    }

    followers_.assign(ids_.size(), {});
    followees_.assign(ids_.size(), {});
    for (const auto& [follower, followee] : edges) {
        const std::size_t a = index_.at(follower);
        const std::size_t b = index_.at(followee);
        followees_[a].push_back(b);
        followers_[b].push_back(a);
    }
    auto normalize = [](std::vector<std::size_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    edge_count_ = 0;
    for (auto& v : followers_) {
        normalize(v);
        edge_count_ += v.size();
    }
    for (auto& v : followees_) {
        normalize(v);
    }
}

std::optional<std::size_t> Network::index_of(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> Network::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count_);
    for (std::size_t a = 0; a < followees_.size(); ++a) {
        for (std::size_t b : followees_[a]) {
            out.emplace_back(a, b);
        }
    }
    return out;
}

void Cascade::validate() const {
    const auto fail = [&](const std::string& what) {
        throw InputError("cascade '" + id + "': " + what);
    };
    if (events.empty()) {
        fail("no events");
    }
    if (events.front().parent.has_value()) {
        fail("first event must be the root (no parent)");
    }
    std::unordered_set<std::string> seen;
    seen.reserve(events.size());
    double last_time = events.front().time;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (!std::isfinite(e.time)) {
            fail("non-finite timestamp for user '" + e.user + "'");
        }
        if (e.time < last_time) {
            fail("timestamps decrease at user '" + e.user + "'");
        }
        last_time = e.time;
        if (i > 0) {
            if (!e.parent) {
                fail("second root '" + e.user + "'");
            }
            if (!seen.contains(*e.parent)) {
                fail("parent '" + *e.parent + "' of '" + e.user + "' does not appear earlier");
            }
        }
        if (!seen.insert(e.user).second) {
            fail("user '" + e.user + "' appears twice");
        }
    }
}

Cascade Cascade::prefix_until(double t_limit) const {
    Cascade out{id, {}};
    for (const Event& e : events) {
        if (e.time > t_limit) {
            break;
        }
        out.events.push_back(e);
    }
    return out;
}

Cascade Cascade::first_events(std::size_t count) const {
    Cascade out{id, {}};
    const std::size_t n = std::min(count, events.size());
    out.events.assign(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

}  // namespace newer
