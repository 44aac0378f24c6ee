#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace hharnet {

/// The six target activities and their two-parent grouping. Leaf order is
/// fixed (indices 0..5) and the parent groups partition it; confusion-matrix
/// axes and within-parent label indices follow this ordering.
struct LabelConfig {
    struct Leaf {
        std::string display_name;
        std::string source_column;  // column name in the dataset files

        bool operator==(const Leaf&) const = default;
    };
    struct ParentGroup {
        std::string name;
        std::vector<int> leaves;  // global leaf indices, in order

        bool operator==(const ParentGroup&) const = default;
    };

    std::size_t feature_count = 225;
    std::vector<Leaf> leaf_labels;
    std::vector<ParentGroup> parent_groups;

    static LabelConfig defaults();

    /// Enforces the invariants: exactly 6 leaves, two parent groups that
    /// partition {0..5}. Throws ConfigError.
    void validate() const;

    std::size_t leaf_count() const { return leaf_labels.size(); }
    std::size_t parent_count() const { return parent_groups.size(); }

    /// Parent group index containing the leaf. Throws ConfigError if the leaf
    /// is in no group (unreachable after validate()).
    int parent_of(int leaf) const;

    /// Position of the leaf inside its parent group.
    int within_parent_index(int leaf) const;
};

/// The label tree: one root, two parents, six leaves. Derived from a
/// LabelConfig; node ids are stable across save/load.
struct HierarchySpec {
    std::string root_name;
    std::vector<LabelConfig::ParentGroup> parents;
    std::vector<std::string> leaf_names;

    static HierarchySpec from_label_config(const LabelConfig& config,
                                           const std::string& root_name = "activity");

    bool operator==(const HierarchySpec&) const = default;

    std::size_t parent_count() const { return parents.size(); }
    int parent_of(int leaf) const;
    /// Global leaf id for position `k` under parent `p`.
    int global_leaf(int parent, int k) const { return parents[parent].leaves[k]; }
};

}  // namespace hharnet
