#include "gpae/embedding.hpp"

#include "gpae/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <utility>

namespace gpae {

namespace {

constexpr std::array<std::pair<FeaturePart, std::string_view>, 6> kPartNames{{
    {FeaturePart::L, "L"},
    {FeaturePart::M_B, "M_B"},
    {FeaturePart::M_SE, "M_SE"},
    {FeaturePart::H_CLF1, "H_Clf1"},
    {FeaturePart::H_CLF2, "H_Clf2"},
    {FeaturePart::H_CLF3, "H_Clf3"},
}};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

}  // namespace

std::string_view to_string(FeaturePart part) {
    for (const auto& [p, name] : kPartNames)
        if (p == part) return name;
    return "?";
}

FeatureSelector::FeatureSelector(std::vector<FeaturePart> parts) : parts_(std::move(parts)) {
    if (parts_.empty())
        throw Error(ErrorKind::invalid_input, "feature selector must name at least one part");
    for (std::size_t i = 0; i < parts_.size(); ++i)
        for (std::size_t j = i + 1; j < parts_.size(); ++j)
            if (parts_[i] == parts_[j])
                throw Error(ErrorKind::invalid_input,
                            "feature selector repeats part " + std::string(gpae::to_string(parts_[i])));
}

FeatureSelector FeatureSelector::parse(std::string_view text) {
    std::vector<FeaturePart> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t plus = std::min(text.find('+', pos), text.size());
        const std::string_view token = text.substr(pos, plus - pos);
        auto it = std::find_if(kPartNames.begin(), kPartNames.end(),
                               [&](const auto& entry) { return iequals(entry.second, token); });
        if (it == kPartNames.end())
            throw Error(ErrorKind::invalid_input,
                        "unknown feature part '" + std::string(token) + "' in selector '" +
                            std::string(text) + "'");
        parts.push_back(it->first);
        pos = plus + 1;
    }
    return FeatureSelector(std::move(parts));
}

FeatureSelector FeatureSelector::default_selector() {
    return FeatureSelector({FeaturePart::M_B, FeaturePart::L});
}

bool FeatureSelector::contains(FeaturePart part) const {
    return std::find(parts_.begin(), parts_.end(), part) != parts_.end();
}

bool FeatureSelector::needs_network() const {
    return std::any_of(parts_.begin(), parts_.end(),
                       [](FeaturePart p) { return p != FeaturePart::L; });
}

std::string FeatureSelector::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) out += '+';
        out += gpae::to_string(parts_[i]);
    }
    return out;
}

}  // namespace gpae
