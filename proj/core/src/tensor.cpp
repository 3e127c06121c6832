#include "gpae/tensor.hpp"

#include "gpae/error.hpp"

#include <utility>

namespace gpae {

std::size_t element_count(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape s, float fill)
    : shape(std::move(s)), data(element_count(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<float> values)
    : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != element_count(shape)) {
        throw Error(ErrorKind::invalid_input,
                    "tensor data length " + std::to_string(data.size()) +
                        " does not match shape " + shape_to_string(shape));
    }
}

std::size_t total_elements(const TensorMap& weights) {
    std::size_t n = 0;
    for (const auto& [name, t] : weights) n += t.size();
    return n;
}

}  // namespace gpae
