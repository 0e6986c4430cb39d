#include "pialab/config.hpp"

#include "pialab/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pialab {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string qualified(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        parts.push_back(trim(std::string_view(value).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return parts;
}

std::optional<double> to_double(const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::uint64_t> to_u64(const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

Config Config::parse(std::istream& in, std::string source) {
    Config cfg;
    cfg.source_ = std::move(source);
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto comment = raw.find_first_of("#;");
        const std::string line = trim(std::string_view(raw).substr(0, comment));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("cli", fmt::format("{}:{}: malformed section header '{}'", cfg.source_, line_no, line));
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("cli", fmt::format("{}:{}: expected 'key = value', got '{}'", cfg.source_, line_no, line));
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("cli", fmt::format("{}:{}: empty key", cfg.source_, line_no));
        }
        const auto id = std::make_pair(section, key);
        if (const auto it = cfg.entries_.find(id); it != cfg.entries_.end()) {
            throw ConfigError("cli", fmt::format("{}:{}: duplicate key '{}' (first set on line {})", cfg.source_,
                                                 line_no, qualified(section, key), it->second.line));
        }
        cfg.entries_.emplace(id, Entry{value, line_no});
        cfg.order_.push_back(id);
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cli", fmt::format("cannot read config file '{}'", path.string()));
    }
    return parse(in, path.string());
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
    const auto it = entries_.find({section, key});
    if (it == entries_.end()) {
        return nullptr;
    }
    it->second.read = true;
    return &it->second;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& what) const {
    throw ConfigError("cli", fmt::format("{}: {}: {}", where(section, key), qualified(section, key), what));
}

std::string Config::where(const std::string& section, const std::string& key) const {
    const auto it = entries_.find({section, key});
    return it == entries_.end() ? source_ : fmt::format("{}:{}", source_, it->second.line);
}

bool Config::has(const std::string& section, const std::string& key) const {
    return entries_.contains({section, key});
}

std::string Config::require_string(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (e == nullptr) {
        throw ConfigError("cli", fmt::format("{}: missing required key '{}'", source_, qualified(section, key)));
    }
    return e->value;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e == nullptr ? fallback : e->value;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) {
        return fallback;
    }
    const auto v = to_double(e->value);
    if (!v) {
        fail(section, key, fmt::format("expected a number, got '{}'", e->value));
    }
    return *v;
}

std::size_t Config::get_count(const std::string& section, const std::string& key, std::size_t fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) {
        return fallback;
    }
    const auto v = to_u64(e->value);
    if (!v) {
        fail(section, key, fmt::format("expected a non-negative integer, got '{}'", e->value));
    }
    return static_cast<std::size_t>(*v);
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    return get_count(section, key, fallback);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) {
        return fallback;
    }
    std::string v = e->value;
    std::ranges::transform(v, v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") {
        return true;
    }
    if (v == "false" || v == "no" || v == "0" || v == "off") {
        return false;
    }
    fail(section, key, fmt::format("expected true or false, got '{}'", e->value));
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) {
        return fallback;
    }
    std::vector<double> out;
    for (const auto& part : split_commas(e->value)) {
        const auto v = to_double(part);
        if (!v) {
            fail(section, key, fmt::format("expected a comma-separated list of numbers, got '{}'", e->value));
        }
        out.push_back(*v);
    }
    return out;
}

std::vector<std::string> Config::get_words(const std::string& section, const std::string& key,
                                           const std::vector<std::string>& fallback) const {
    const Entry* e = find(section, key);
    if (e == nullptr) {
        return fallback;
    }
    auto parts = split_commas(e->value);
    if (std::ranges::any_of(parts, [](const std::string& p) { return p.empty(); })) {
        fail(section, key, fmt::format("empty item in list '{}'", e->value));
    }
    return parts;
}

void Config::reject_unread() const {
    for (const auto& id : order_) {
        const Entry& e = entries_.at(id);
        if (!e.read) {
            throw ConfigError("cli", fmt::format("{}:{}: unknown key '{}'", source_, e.line, qualified(id.first, id.second)));
        }
    }
}

} // namespace pialab
