#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gpae {

enum class FeaturePart { L, M_B, M_SE, H_CLF1, H_CLF2, H_CLF3 };

std::string_view to_string(FeaturePart part);

// Ordered, duplicate-free list of feature parts. Concatenation follows the
// order given at construction.
class FeatureSelector {
public:
    FeatureSelector() = default;
    explicit FeatureSelector(std::vector<FeaturePart> parts);

    // Parses "M_B+L" style strings; part names are case-insensitive.
    static FeatureSelector parse(std::string_view text);

    // The best-performing combination, M_B+L.
    static FeatureSelector default_selector();

    const std::vector<FeaturePart>& parts() const { return parts_; }
    bool contains(FeaturePart part) const;
    bool needs_network() const;
    std::string to_string() const;

    friend bool operator==(const FeatureSelector&, const FeatureSelector&) = default;

private:
    std::vector<FeaturePart> parts_;
};

struct Embedding {
    std::vector<float> values;
    FeatureSelector selector;

    std::size_t dim() const { return values.size(); }
};

}  // namespace gpae
