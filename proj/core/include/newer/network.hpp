#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace newer {

/// Directed follower graph. An edge (follower, followee) means `follower`
/// sees what `followee` posts. Node ids are opaque strings, stored sorted so
/// that every derived quantity is independent of input order.
class Network {
public:
    using Edge = std::pair<std::string, std::string>;

    Network() = default;

    /// Builds the graph from explicit nodes plus edge endpoints. Duplicate
    /// edges collapse; self-loops throw InputError.
    Network(std::vector<std::string> nodes, const std::vector<Edge>& edges);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    bool contains(std::string_view id) const { return index_of(id).has_value(); }
    const std::string& id(std::size_t node) const { return ids_.at(node); }
    std::span<const std::string> ids() const noexcept { return ids_; }

    /// Users who follow `node`, i.e. the audience of its posts. Sorted by index.
    std::span<const std::size_t> followers(std::size_t node) const { return followers_.at(node); }
    /// Users `node` follows. Sorted by index.
    std::span<const std::size_t> followees(std::size_t node) const { return followees_.at(node); }

    /// All edges as (follower, followee) index pairs, sorted.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> followers_;
    std::vector<std::vector<std::size_t>> followees_;
    std::size_t edge_count_ = 0;
};

/// One infection event. `parent` is empty for the root.
struct Event {
    std::string user;
    std::optional<std::string> parent;
    double time = 0.0;

    friend bool operator==(const Event&, const Event&) = default;
};

struct Cascade {
    std::string id;
    std::vector<Event> events;

    std::size_t size() const noexcept { return events.size(); }
    const Event& root() const { return events.front(); }

    /// Checks tree structure: a single parentless first event, nondecreasing
    /// timestamps, parents seen earlier, no repeated user. Throws InputError
    /// naming the cascade.
    void validate() const;

    /// Events with time <= t_limit.
    Cascade prefix_until(double t_limit) const;
    /// The first `count` events.
    Cascade first_events(std::size_t count) const;

    friend bool operator==(const Cascade&, const Cascade&) = default;
};

}  // namespace newer
