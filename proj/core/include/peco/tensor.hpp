#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace peco {

/// Dense row-major tensor of doubles. Rank 1..3 is what the layers use.
/// Invariant: data.size() == product(shape), all entries finite (checked
/// where it matters, not on every write).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shp, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shp);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const;

    // Accessors for the ranks in actual use. No broadcasting, no views.
    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }
    double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;

    /// Throws ShapeError unless the shape matches exactly.
    void require_shape(const std::vector<std::size_t>& expected, const char* what) const;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

} // namespace peco
