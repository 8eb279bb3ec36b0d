#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace stochdp::cli {

constexpr int kSchemaVersion = 1;

/// Sectioned key = value configuration. Keys are addressed as "section.key" (or "key" for
/// the top level). Every read records the resolved value so reports can embed the full
/// configuration; unknown keys are rejected by finish().
class Config {
public:
    /// INI text, or a report.json whose "config" object holds a resolved configuration.
    static Config load(const std::filesystem::path& path);
    static Config parse_ini(const std::string& text, const std::string& source = "<config>");
    static Config from_json(const nlohmann::json& object, const std::string& source = "<json>");

    const std::string& source() const noexcept { return source_; }

    bool has(const std::string& key) const;
    /// Reads a value without adding it to the resolved configuration (run-local settings such
    /// as the output directory).
    std::optional<std::string> setting(const std::string& key) const;
    /// Overrides (or adds) a value; used for command-line flags.
    void set(const std::string& key, const std::string& value);

    std::string text(const std::string& key) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::uint64_t count(const std::string& key) const;
    std::uint64_t count(const std::string& key, std::uint64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    /// Comma- or whitespace-separated numbers.
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
    /// Points separated by ';', coordinates by commas or whitespace.
    std::vector<std::vector<double>> points(const std::string& key) const;
    /// Keys present in a section, in file order.
    std::vector<std::string> keys_in(const std::string& section) const;

    /// Throws ConfigError naming the first key that was never read.
    void finish() const;
    /// Resolved configuration: {section: {key: value}}, top-level keys at the root.
    nlohmann::json resolved() const;

    /// "file:line: key 'k': what" (line omitted for values that did not come from a file line).
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        std::size_t order = 0;
    };
    const Entry* find(const std::string& key) const;
    void record(const std::string& key, const std::string& value) const;

    std::string source_;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> read_;
    mutable std::map<std::string, std::string> resolved_;
};

}  // namespace stochdp::cli
