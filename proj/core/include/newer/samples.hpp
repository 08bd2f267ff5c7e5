#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newer {

/// Response delays in seconds observed for the one-hop subcascades of one
/// user. Extracted delays carry the kDelayShift offset, so they are >= 1.
struct SubcascadeSample {
    std::string user;
    std::vector<double> delays;

    std::size_t size() const noexcept { return delays.size(); }

    /// Sorted, positive, finite, with at least two distinct values. Without
    /// two distinct values the unpenalized likelihood is unbounded in k.
    bool well_posed() const noexcept;
    /// Throws InputError naming the user unless well_posed().
    void validate() const;
};

/// Row-major dense matrix of doubles.
struct RowMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RowMatrix() = default;
    RowMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// Strictly positive per-user covariates with a named column schema.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    /// Throws InputError on shape mismatch, duplicate users or entries <= 0.
    FeatureMatrix(std::vector<std::string> names, std::vector<std::string> users, RowMatrix values);

    std::size_t rows() const noexcept { return users_.size(); }
    std::size_t cols() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<std::string>& users() const noexcept { return users_; }
    const RowMatrix& values() const noexcept { return values_; }

    std::optional<std::size_t> index_of(std::string_view user) const;
    std::span<const double> row(std::size_t r) const { return values_.row(r); }
    /// Row for `user`, or an empty optional.
    std::optional<std::span<const double>> find(std::string_view user) const;

    /// Elementwise natural log of the rows selected by `users`, in that order.
    /// Throws InputError if a user has no row.
    RowMatrix log_rows(std::span<const std::string> users) const;

private:
    std::vector<std::string> names_;
    std::vector<std::string> users_;
    RowMatrix values_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace newer
