#pragma once

// Strict INI access shared by the architecture spec files and the CLI
// configuration: every key must be consumed, or reading fails.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aerofuse::ini {

class IniError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Document {
    /// Section name -> key -> raw value. Keys before any section land in "".
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& section) const { return sections.count(section) != 0; }
};

Document parse(std::string_view text);

/// Typed reader for one section that remembers which keys were read.
class SectionReader {
public:
    SectionReader(std::string name, std::map<std::string, std::string> values);

    std::optional<std::string> get_string(const std::string& key);
    std::optional<int> get_int(const std::string& key);
    std::optional<double> get_double(const std::string& key);
    std::optional<bool> get_bool(const std::string& key);
    std::optional<std::vector<int>> get_int_list(const std::string& key);

    template <typename T>
    void read(const std::string& key, T& target);

    /// Throws IniError naming any key that was never read.
    void finish() const;

private:
    const std::string* raw(const std::string& key);
    [[noreturn]] void fail(const std::string& key, const std::string& why) const;

    std::string name_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

template <>
inline void SectionReader::read<int>(const std::string& key, int& target) {
    if (auto v = get_int(key)) target = *v;
}
template <>
inline void SectionReader::read<double>(const std::string& key, double& target) {
    if (auto v = get_double(key)) target = *v;
}
template <>
inline void SectionReader::read<bool>(const std::string& key, bool& target) {
    if (auto v = get_bool(key)) target = *v;
}
template <>
inline void SectionReader::read<std::string>(const std::string& key, std::string& target) {
    if (auto v = get_string(key)) target = *v;
}
template <>
inline void SectionReader::read<std::vector<int>>(const std::string& key,
                                                  std::vector<int>& target) {
    if (auto v = get_int_list(key)) target = *v;
}

}  // namespace aerofuse::ini
