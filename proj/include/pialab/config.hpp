#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pialab {

/// Flat INI-style key-value file. Keys before the first `[section]` header
/// belong to the unnamed top-level section "". `#` and `;` start comments.
/// Every accessor reports problems as ConfigError naming `source:line`.
class Config {
public:
    static Config parse(std::istream& in, std::string source);
    static Config load(const std::filesystem::path& path);

    [[nodiscard]] bool has(const std::string& section, const std::string& key) const;

    /// Throws ConfigError naming the key when it is absent.
    [[nodiscard]] std::string require_string(const std::string& section, const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& section, const std::string& key,
                                         const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& section, const std::string& key, double fallback) const;
    [[nodiscard]] std::size_t get_count(const std::string& section, const std::string& key,
                                        std::size_t fallback) const;
    [[nodiscard]] std::uint64_t get_u64(const std::string& section, const std::string& key,
                                        std::uint64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    /// Comma-separated reals.
    [[nodiscard]] std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                                  const std::vector<double>& fallback) const;
    /// Comma-separated words.
    [[nodiscard]] std::vector<std::string> get_words(const std::string& section, const std::string& key,
                                                     const std::vector<std::string>& fallback) const;

    /// `source:line` of a key, or just `source` when the key is absent.
    [[nodiscard]] std::string where(const std::string& section, const std::string& key) const;

    /// Throws ConfigError at the first key that no accessor has read.
    void reject_unread() const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        mutable bool read = false;
    };

    const Entry* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const;

    std::string source_;
    std::map<std::pair<std::string, std::string>, Entry> entries_;
    std::vector<std::pair<std::string, std::string>> order_;
};

} // namespace pialab
