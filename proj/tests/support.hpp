#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "newer/network.hpp"
#include "newer/predict.hpp"
#include "newer/random.hpp"

namespace newer::test {

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

/// Random tree with exponential inter-event gaps. With probability `rich`
/// a new event attaches to the parent of a uniformly chosen earlier event,
/// which concentrates children on few users.
inline Cascade random_cascade(Rng& rng, std::size_t events, double mean_gap, const std::string& id,
                              double rich = 0.5) {
    Cascade c;
    c.id = id;
    double t = 1000.0 * rng.uniform();
    std::vector<std::size_t> parent_of;
    for (std::size_t i = 0; i < events; ++i) {
        Event e;
        e.user = id + "_" + std::to_string(i);
        e.time = t;
        if (i > 0) {
            std::size_t p = rng.below(i);
            if (p > 0 && rng.bernoulli(rich)) p = parent_of[p];
            e.parent = c.events[p].user;
            parent_of.push_back(p);
        } else {
            parent_of.push_back(0);
        }
        c.events.push_back(std::move(e));
        t += -mean_gap * std::log(rng.uniform());
    }
    return c;
}

/// Dynamics for every user of `c` with log-uniform scale and shape.
inline void add_random_dynamics(Rng& rng, const Cascade& c, DynamicsTable& table, double scale_lo,
                                double scale_hi, double shape_lo = 0.4, double shape_hi = 3.0) {
    for (const Event& e : c.events) {
        table.set(e.user, {log_uniform(rng, scale_lo, scale_hi), log_uniform(rng, shape_lo, shape_hi)});
    }
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("newer_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace newer::test
