#include "peco/tensor.hpp"

#include <cmath>
#include <sstream>

#include "peco/errors.hpp"

namespace peco {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> values)
    : shape(std::move(shp)), data(std::move(values)) {
    if (shape_product(shape) != data.size()) {
        throw ShapeError("Tensor: shape " + shape_string(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shp) {
    const std::size_t n = shape_product(shp);
    Tensor t;
    t.shape = std::move(shp);
    t.data.assign(n, 0.0);
    return t;
}

std::size_t Tensor::dim(std::size_t i) const {
    if (i >= shape.size()) throw ShapeError("Tensor::dim: axis out of range");
    return shape[i];
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::require_shape(const std::vector<std::size_t>& expected, const char* what) const {
    if (shape != expected) {
        throw ShapeError(std::string(what) + ": expected shape " + shape_string(expected) +
                         ", got " + shape_string(shape));
    }
}

} // namespace peco
