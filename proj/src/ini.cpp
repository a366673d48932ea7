#include "aerofuse/ini.hpp"

#include "aerofuse/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <sstream>

namespace aerofuse::ini {

Document parse(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw IniError(std::string("config parse error: ") + e.what());
    }
    Document doc;
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            doc.sections[""][key] = node.data();
        } else {
            auto& section = doc.sections[key];
            for (const auto& [k, v] : node) section[k] = v.data();
        }
    }
    return doc;
}

SectionReader::SectionReader(std::string name, std::map<std::string, std::string> values)
    : name_(std::move(name)), values_(std::move(values)) {}

const std::string* SectionReader::raw(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
}

void SectionReader::fail(const std::string& key, const std::string& why) const {
    throw IniError("[" + name_ + "] " + key + ": " + why);
}

std::optional<std::string> SectionReader::get_string(const std::string& key) {
    const auto* v = raw(key);
    if (!v) return std::nullopt;
    return std::string(text::trim(*v));
}

std::optional<int> SectionReader::get_int(const std::string& key) {
    const auto* v = raw(key);
    if (!v) return std::nullopt;
    auto parsed = text::parse_number<int>(text::trim(*v));
    if (!parsed) fail(key, "expected an integer, got '" + *v + "'");
    return parsed;
}

std::optional<double> SectionReader::get_double(const std::string& key) {
    const auto* v = raw(key);
    if (!v) return std::nullopt;
    auto parsed = text::parse_number<double>(text::trim(*v));
    if (!parsed) fail(key, "expected a number, got '" + *v + "'");
    return parsed;
}

std::optional<bool> SectionReader::get_bool(const std::string& key) {
    const auto* v = raw(key);
    if (!v) return std::nullopt;
    const auto s = text::trim(*v);
    if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "off" || s == "0" || s == "no") return false;
    fail(key, "expected a boolean, got '" + *v + "'");
}

std::optional<std::vector<int>> SectionReader::get_int_list(const std::string& key) {
    const auto* v = raw(key);
    if (!v) return std::nullopt;
    std::vector<int> out;
    std::string_view rest = *v;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = text::trim(rest.substr(0, comma));
        if (!item.empty()) {
            auto parsed = text::parse_number<int>(item);
            if (!parsed) fail(key, "expected a comma-separated integer list, got '" + *v + "'");
            out.push_back(*parsed);
        }
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

void SectionReader::finish() const {
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) fail(key, "unknown key");
    }
}

}  // namespace aerofuse::ini
