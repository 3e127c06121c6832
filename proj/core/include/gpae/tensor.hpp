#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gpae {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major float tensor.
struct Tensor {
    Shape shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(Shape s, float fill = 0.0f);
    Tensor(Shape s, std::vector<float> values);

    std::size_t rank() const { return shape.size(); }
    std::size_t size() const { return data.size(); }
    std::span<float> values() { return data; }
    std::span<const float> values() const { return data; }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Channels x height (frequency) x width (time) activation map.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0f)
        : channels(c), height(h), width(w), data(c * h * w, fill) {}

    std::size_t plane() const { return height * width; }
    float& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * height + y) * width + x];
    }
    float at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * height + y) * width + x];
    }
    std::span<float> channel(std::size_t c) {
        return std::span<float>(data).subspan(c * plane(), plane());
    }
    std::span<const float> channel(std::size_t c) const {
        return std::span<const float>(data).subspan(c * plane(), plane());
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

// Named weight tensors. Ordered so serialization and iteration are
// deterministic.
using TensorMap = std::map<std::string, Tensor>;

// Sum of element counts over every tensor in the map.
std::size_t total_elements(const TensorMap& weights);

}  // namespace gpae
