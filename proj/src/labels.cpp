#include "hharnet/labels.hpp"

#include <algorithm>

#include "hharnet/error.hpp"

namespace hharnet {

LabelConfig LabelConfig::defaults() {
    LabelConfig c;
    c.feature_count = 225;
    c.leaf_labels = {
        {"lying down", "label:LYING_DOWN"},
        {"sitting", "label:SITTING"},
        {"standing in place", "label:OR_standing"},
        {"walking", "label:FIX_walking"},
        {"running", "label:FIX_running"},
        {"bicycling", "label:BICYCLING"},
    };
    c.parent_groups = {
        {"stationary", {0, 1, 2}},
        {"non-stationary", {3, 4, 5}},
    };
    return c;
}

void LabelConfig::validate() const {
    if (feature_count == 0) throw ConfigError("feature_count must be positive");
    if (leaf_labels.size() != 6)
        throw ConfigError("expected exactly 6 leaf labels, got " +
                          std::to_string(leaf_labels.size()));
    if (parent_groups.size() != 2)
        throw ConfigError("expected exactly 2 parent groups, got " +
                          std::to_string(parent_groups.size()));
    std::vector<int> seen(leaf_labels.size(), 0);
    for (const auto& group : parent_groups) {
        if (group.leaves.empty())
            throw ConfigError("parent group '" + group.name + "' is empty");
        for (int leaf : group.leaves) {
            if (leaf < 0 || static_cast<std::size_t>(leaf) >= leaf_labels.size())
                throw ConfigError("parent group '" + group.name +
                                  "' references leaf " + std::to_string(leaf));
            if (seen[leaf]++)
                throw ConfigError("leaf " + std::to_string(leaf) +
                                  " appears in more than one parent group");
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i])
            throw ConfigError("leaf " + std::to_string(i) + " is in no parent group");
    }
}

int LabelConfig::parent_of(int leaf) const {
    for (std::size_t p = 0; p < parent_groups.size(); ++p) {
        const auto& leaves = parent_groups[p].leaves;
        if (std::find(leaves.begin(), leaves.end(), leaf) != leaves.end())
            return static_cast<int>(p);
    }
    throw ConfigError("leaf " + std::to_string(leaf) + " is in no parent group");
}

int LabelConfig::within_parent_index(int leaf) const {
    int p = parent_of(leaf);
    const auto& leaves = parent_groups[p].leaves;
    auto it = std::find(leaves.begin(), leaves.end(), leaf);
    return static_cast<int>(it - leaves.begin());
}

HierarchySpec HierarchySpec::from_label_config(const LabelConfig& config,
                                               const std::string& root_name) {
    config.validate();
    HierarchySpec spec;
    spec.root_name = root_name;
    spec.parents = config.parent_groups;
    spec.leaf_names.reserve(config.leaf_labels.size());
    for (const auto& leaf : config.leaf_labels) spec.leaf_names.push_back(leaf.display_name);
    return spec;
}

int HierarchySpec::parent_of(int leaf) const {
    for (std::size_t p = 0; p < parents.size(); ++p) {
        const auto& leaves = parents[p].leaves;
        if (std::find(leaves.begin(), leaves.end(), leaf) != leaves.end())
            return static_cast<int>(p);
    }
    throw ConfigError("leaf " + std::to_string(leaf) + " is in no parent group");
}

}  // namespace hharnet
