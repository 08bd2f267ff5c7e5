#include "newer/samples.hpp"

#include <algorithm>
#include <cmath>

#include "newer/error.hpp"

namespace newer {

bool SubcascadeSample::well_posed() const noexcept {
    if (delays.empty() || !std::is_sorted(delays.begin(), delays.end())) {
        return false;
    }
    return std::isfinite(delays.back()) && delays.front() > 0.0 && delays.back() > delays.front();
}

void SubcascadeSample::validate() const {
    if (delays.empty()) {
        throw InputError("user '" + user + "': empty subcascade sample");
    }
    if (!well_posed()) {
        throw InputError("user '" + user +
                         "': delays must be sorted, positive, finite and not all equal");
    }
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> names, std::vector<std::string> users,
                             RowMatrix values)
    : names_(std::move(names)), users_(std::move(users)), values_(std::move(values)) {
    if (values_.rows != users_.size() || values_.cols != names_.size() ||
        values_.data.size() != values_.rows * values_.cols) {
        throw InputError("feature matrix shape does not match its schema");
    }
    index_.reserve(users_.size());
    for (std::size_t r = 0; r < users_.size(); ++r) {
        if (!index_.emplace(users_[r], r).second) {
            throw InputError("duplicate feature row for user '" + users_[r] + "'");
        }
        for (std::size_t c = 0; c < names_.size(); ++c) {
            const double v = values_(r, c);
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw InputError("feature '" + names_[c] + "' of user '" + users_[r] +
                                 "' must be positive and finite");
            }
        }
    }
}

std::optional<std::size_t> FeatureMatrix::index_of(std::string_view user) const {
    const auto it = index_.find(std::string(user));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::span<const double>> FeatureMatrix::find(std::string_view user) const {
    if (const auto r = index_of(user)) {
        return row(*r);
    }
    return std::nullopt;
}

RowMatrix FeatureMatrix::log_rows(std::span<const std::string> users) const {
    RowMatrix out(users.size(), cols());
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto r = index_of(users[i]);
        if (!r) {
            throw InputError("no feature row for user '" + users[i] + "'");
        }
        for (std::size_t c = 0; c < cols(); ++c) {
            out(i, c) = std::log(values_(*r, c));
        }
    }
    return out;
}

}  // namespace newer
