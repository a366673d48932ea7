#pragma once

/// @file taxonomy.hpp
/// @brief Three-level aircraft label hierarchy (type / function / identification).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aerofuse {

class TaxonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Label {
    std::string name;
    int level = 3;

    friend bool operator==(const Label&, const Label&) = default;
};

struct TaxonomyLoadOptions {
    /// Enforce the 1 / 6 / 61 label counts of the production hierarchy.
    bool strict = false;
};

/// Immutable label tree. Level 1 is a single root, level 2 the aircraft
/// functions, level 3 the identifications. Every level-3 label has exactly
/// one level-2 parent.
class Taxonomy {
public:
    static constexpr std::size_t kStrictLevel2Count = 6;
    static constexpr std::size_t kStrictLevel3Count = 61;

    /// Parses the line-oriented document format described in docs/formats.md.
    static Taxonomy parse(std::string_view document, TaxonomyLoadOptions options = {});
    static Taxonomy load_file(const std::string& path, TaxonomyLoadOptions options = {});
    /// The built-in production hierarchy (identical to data/taxonomy.txt).
    static const Taxonomy& default_taxonomy();
    static std::string_view default_document();

    const std::string& root() const { return root_; }
    const std::vector<std::string>& level2() const { return level2_; }
    const std::vector<std::string>& level3() const { return level3_; }

    /// Level of a name, or 0 when unknown.
    int level_of(std::string_view name) const;
    bool contains(const Label& label) const;
    /// Resolves a bare name to a Label; throws TaxonomyError if unknown.
    Label label(std::string_view name) const;
    const std::string& parent_of(std::string_view level3_name) const;

    /// Unique ancestor of `label` at `target_level`; identity when equal.
    Label ancestor(const Label& label, int target_level) const;

    /// Index of a level-3 name inside level3(), used for confusion matrices.
    std::size_t level3_index(std::string_view name) const;
    std::size_t level2_index(std::string_view name) const;

private:
    std::string root_ = "aircraft";
    std::vector<std::string> level2_;
    std::vector<std::string> level3_;
    std::unordered_map<std::string, std::string> parent_;
    std::unordered_map<std::string, int> level_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace aerofuse
