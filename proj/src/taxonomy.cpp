#include "aerofuse/taxonomy.hpp"

#include "aerofuse/text.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace aerofuse {

namespace detail {
std::string_view default_taxonomy_text();
}

namespace text {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace text

namespace {

std::string line_prefix(std::size_t line_no) {
    return "taxonomy line " + std::to_string(line_no) + ": ";
}

}  // namespace

Taxonomy Taxonomy::parse(std::string_view document, TaxonomyLoadOptions options) {
    Taxonomy t;
    std::vector<std::pair<std::string, std::string>> children;  // (level3, parent)
    std::unordered_set<std::string> seen;
    bool root_declared = false;

    auto claim = [&](const std::string& name, std::size_t line_no) {
        if (name.empty() || text::has_whitespace(name)) {
            throw TaxonomyError(line_prefix(line_no) + "invalid label name '" + name + "'");
        }
        if (!seen.insert(name).second) {
            throw TaxonomyError(line_prefix(line_no) + "duplicate label '" + name + "'");
        }
    };

    const auto lines = text::split_lines(document);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto line = text::strip_comment(lines[i]);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw TaxonomyError(line_prefix(line_no) + "expected 'key: value'");
        }
        const auto key = text::trim(line.substr(0, colon));
        const auto value = text::trim(line.substr(colon + 1));
        if (key == "root") {
            if (root_declared) throw TaxonomyError(line_prefix(line_no) + "root declared twice");
            t.root_ = std::string(value);
            root_declared = true;
        } else if (key == "level2") {
            const std::string name(value);
            claim(name, line_no);
            t.level2_.push_back(name);
        } else if (key == "level3") {
            const auto arrow = value.find("->");
            if (arrow == std::string_view::npos) {
                throw TaxonomyError(line_prefix(line_no) + "expected 'level3: name -> parent'");
            }
            const std::string name(text::trim(value.substr(0, arrow)));
            const std::string parent(text::trim(value.substr(arrow + 2)));
            claim(name, line_no);
            t.level3_.push_back(name);
            children.emplace_back(name, parent);
        } else {
            throw TaxonomyError(line_prefix(line_no) + "unknown record '" + std::string(key) + "'");
        }
    }

    if (t.root_.empty() || text::has_whitespace(t.root_)) {
        throw TaxonomyError("invalid root label '" + t.root_ + "'");
    }
    if (seen.count(t.root_)) throw TaxonomyError("duplicate label '" + t.root_ + "'");

    std::unordered_set<std::string> level2_set(t.level2_.begin(), t.level2_.end());
    for (const auto& [name, parent] : children) {
        if (!level2_set.count(parent)) {
            throw TaxonomyError("orphan level-3 label '" + name + "': parent '" + parent +
                                "' is not a level-2 label");
        }
        t.parent_[name] = parent;
    }

    if (options.strict) {
        if (t.level2_.size() != kStrictLevel2Count) {
            throw TaxonomyError("strict mode: expected " + std::to_string(kStrictLevel2Count) +
                                " level-2 labels, found " + std::to_string(t.level2_.size()));
        }
        if (t.level3_.size() != kStrictLevel3Count) {
            throw TaxonomyError("strict mode: expected " + std::to_string(kStrictLevel3Count) +
                                " level-3 labels, found " + std::to_string(t.level3_.size()));
        }
    }

    t.level_[t.root_] = 1;
    for (std::size_t i = 0; i < t.level2_.size(); ++i) {
        t.level_[t.level2_[i]] = 2;
        t.index_[t.level2_[i]] = i;
    }
    for (std::size_t i = 0; i < t.level3_.size(); ++i) {
        t.level_[t.level3_[i]] = 3;
        t.index_[t.level3_[i]] = i;
    }
    return t;
}

Taxonomy Taxonomy::load_file(const std::string& path, TaxonomyLoadOptions options) {
    return parse(text::read_file(path), options);
}

std::string_view Taxonomy::default_document() { return detail::default_taxonomy_text(); }

const Taxonomy& Taxonomy::default_taxonomy() {
    static const Taxonomy instance = parse(default_document(), {.strict = true});
    return instance;
}

int Taxonomy::level_of(std::string_view name) const {
    const auto it = level_.find(std::string(name));
    return it == level_.end() ? 0 : it->second;
}

bool Taxonomy::contains(const Label& label) const {
    return label.level >= 1 && level_of(label.name) == label.level;
}

Label Taxonomy::label(std::string_view name) const {
    const int level = level_of(name);
    if (level == 0) throw TaxonomyError("unknown label '" + std::string(name) + "'");
    return Label{std::string(name), level};
}

const std::string& Taxonomy::parent_of(std::string_view level3_name) const {
    const auto it = parent_.find(std::string(level3_name));
    if (it == parent_.end()) {
        throw TaxonomyError("'" + std::string(level3_name) + "' is not a level-3 label");
    }
    return it->second;
}

Label Taxonomy::ancestor(const Label& label, int target_level) const {
    if (!contains(label)) {
        throw TaxonomyError("label '" + label.name + "' is not in the taxonomy at level " +
                            std::to_string(label.level));
    }
    if (target_level < 1 || target_level > label.level) {
        throw TaxonomyError("cannot take level-" + std::to_string(target_level) +
                            " ancestor of level-" + std::to_string(label.level) + " label '" +
                            label.name + "'");
    }
    if (target_level == label.level) return label;
    if (target_level == 1) return Label{root_, 1};
    return Label{parent_of(label.name), 2};
}

std::size_t Taxonomy::level3_index(std::string_view name) const {
    if (level_of(name) != 3) throw TaxonomyError("'" + std::string(name) + "' is not level 3");
    return index_.at(std::string(name));
}

std::size_t Taxonomy::level2_index(std::string_view name) const {
    if (level_of(name) != 2) throw TaxonomyError("'" + std::string(name) + "' is not level 2");
    return index_.at(std::string(name));
}

}  // namespace aerofuse
