#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace saev {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == delim)
        out.push_back("");
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": not a number: '" + s + "'");
    }
}

inline long parse_long(const std::string& s, const std::string& where) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(where + ": not an integer: '" + s + "'");
    return v;
}

// Reads a delimited text file with a header row. Returns one vector of fields
// per data row; `columns` receives the header fields. Blank lines are skipped.
inline std::vector<std::vector<std::string>>
read_table(const std::string& path, char delim, std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file, expected a header row");
    columns = split(line, delim);
    std::vector<std::vector<std::string>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto fields = split(line, delim);
        if (fields.size() != columns.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(columns.size()) + " fields, got " +
                             std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

// Header lookup; throws naming the missing column.
inline int column_index(const std::vector<std::string>& columns,
                        const std::string& name, const std::string& path) {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name)
            return static_cast<int>(c);
    throw ParseError(path + ": missing required column '" + name + "'");
}

// FNV-1a over raw bytes, used for scenario fingerprints.
inline std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace saev
