#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"

namespace stochdp::cli {

namespace {

std::string trimmed(std::string s) {
    boost::algorithm::trim(s);
    return s;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        return std::nullopt;
    }
    return v;
}

std::vector<std::string> split(const std::string& s, const std::string& separators) {
    std::vector<std::string> out;
    std::string current;
    for (char c : s) {
        if (separators.find(c) != std::string::npos) {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

}  // namespace

Config Config::parse_ini(const std::string& text, const std::string& source) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    Config config;
    config.source_ = source;
    // The parser validated the syntax; this pass only attaches line numbers to keys.
    std::map<std::string, std::size_t> lines;
    std::istringstream scan(text);
    std::string line;
    std::string section;
    for (std::size_t no = 1; std::getline(scan, line); ++no) {
        line = trimmed(line);
        if (line.empty() || line[0] == ';' || line[0] == '#') continue;
        if (line[0] == '[') {
            section = trimmed(line.substr(1, line.find(']') - 1));
            continue;
        }
        const std::string key = trimmed(line.substr(0, line.find('=')));
        lines[section.empty() ? key : section + "." + key] = no;
    }

    std::size_t order = 0;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            config.entries_[name] = Entry{node.data(), lines[name], order++};
            continue;
        }
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty()) throw ConfigError(source + ": nested keys are not supported under [" + name + "]");
            const std::string full = name + "." + key;
            config.entries_[full] = Entry{leaf.data(), lines[full], order++};
        }
    }
    return config;
}

Config Config::from_json(const nlohmann::json& object, const std::string& source) {
    if (!object.is_object()) throw ConfigError(source + ": configuration must be a JSON object");
    Config config;
    config.source_ = source;
    std::size_t order = 0;
    const auto as_text = [&](const std::string& key, const nlohmann::json& v) {
        if (!v.is_string()) throw ConfigError(source + ": key '" + key + "' must hold a string");
        return v.get<std::string>();
    };
    for (const auto& [name, value] : object.items()) {
        if (value.is_object()) {
            for (const auto& [key, leaf] : value.items()) {
                const std::string full = name + "." + key;
                config.entries_[full] = Entry{as_text(full, leaf), 0, order++};
            }
        } else {
            config.entries_[name] = Entry{as_text(name, value), 0, order++};
        }
    }
    return config;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (path.extension() == ".json") {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        if (doc.is_object() && doc.contains("config")) return from_json(doc["config"], path.string());
        return from_json(doc, path.string());
    }
    return parse_ini(text, path.string());
}

const Config::Entry* Config::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::optional<std::string> Config::setting(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    read_.insert(key);
    return e->value;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        entries_[key] = Entry{value, 0, entries_.size()};
    } else {
        it->second.value = value;
        it->second.line = 0;
    }
}

void Config::record(const std::string& key, const std::string& value) const {
    read_.insert(key);
    resolved_[key] = value;
}

void Config::fail(const std::string& key, const std::string& what) const {
    const Entry* e = find(key);
    std::string where = source_;
    if (e && e->line > 0) where += ":" + std::to_string(e->line);
    throw ConfigError(where + ": key '" + key + "': " + what);
}

std::string Config::text(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) fail(key, "required key is missing");
    record(key, e->value);
    return e->value;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    const std::string v = e ? e->value : fallback;
    record(key, v);
    return v;
}

double Config::number(const std::string& key) const {
    const std::string s = text(key);
    const auto v = parse_double(s);
    if (!v) fail(key, "expected a number, got '" + s + "'");
    resolved_[key] = format_double(*v);
    return *v;
}

double Config::number(const std::string& key, double fallback) const {
    if (!has(key)) {
        record(key, format_double(fallback));
        return fallback;
    }
    return number(key);
}

std::uint64_t Config::count(const std::string& key) const {
    const std::string s = text(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected a nonnegative integer, got '" + s + "'");
    return v;
}

std::uint64_t Config::count(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) {
        record(key, std::to_string(fallback));
        return fallback;
    }
    return count(key);
}

bool Config::flag(const std::string& key, bool fallback) const {
    const std::string s = text(key, fallback ? "true" : "false");
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> Config::numbers(const std::string& key) const {
    const std::string s = text(key);
    std::vector<double> out;
    for (const auto& token : split(s, ", \t")) {
        const auto v = parse_double(token);
        if (!v) fail(key, "expected a list of numbers, got '" + token + "'");
        out.push_back(*v);
    }
    if (out.empty()) fail(key, "expected at least one number");
    return out;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) {
        std::string joined;
        for (double v : fallback) joined += (joined.empty() ? "" : ", ") + format_double(v);
        record(key, joined);
        return fallback;
    }
    return numbers(key);
}

std::vector<std::vector<double>> Config::points(const std::string& key) const {
    const std::string s = text(key);
    std::vector<std::vector<double>> out;
    for (const auto& group : split(s, ";")) {
        std::vector<double> point;
        for (const auto& token : split(group, ", \t")) {
            const auto v = parse_double(token);
            if (!v) fail(key, "expected points like '1 2; 3 4', got '" + token + "'");
            point.push_back(*v);
        }
        if (!point.empty()) out.push_back(std::move(point));
    }
    if (out.empty()) fail(key, "expected at least one point");
    return out;
}

std::vector<std::string> Config::keys_in(const std::string& section) const {
    std::vector<std::pair<std::size_t, std::string>> found;
    const std::string prefix = section + ".";
    for (const auto& [key, e] : entries_) {
        if (key.rfind(prefix, 0) == 0) found.emplace_back(e.order, key.substr(prefix.size()));
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& f : found) out.push_back(std::move(f.second));
    return out;
}

void Config::finish() const {
    std::vector<std::pair<std::size_t, std::string>> unread;
    for (const auto& [key, e] : entries_) {
        if (!read_.count(key)) unread.emplace_back(e.order, key);
    }
    if (unread.empty()) return;
    std::sort(unread.begin(), unread.end());
    fail(unread.front().second, "unknown key");
}

nlohmann::json Config::resolved() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : resolved_) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) {
            out[key] = value;
        } else {
            out[key.substr(0, dot)][key.substr(dot + 1)] = value;
        }
    }
    return out;
}

}  // namespace stochdp::cli
