#include "survbias/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace survbias::csv {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

void split_line(std::string_view line, std::vector<std::string>& out) {
    out.clear();
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    split_line(line, out);
    return out;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    char buf[64];
    std::size_t n = 0;
    for (char c : text) {
        if (c == ',') continue;
        if (n == sizeof buf) return std::nullopt;
        buf[n++] = c;
    }
    const char* first = buf;
    if (n > 0 && buf[0] == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, buf + n, value);
    if (ec != std::errc() || ptr != buf + n || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
    if (ec != std::errc()) {
        auto [p2, ec2] = std::to_chars(buf, buf + sizeof buf, value);
        if (ec2 != std::errc()) return "nan";
        return std::string(buf, p2);
    }
    return std::string(buf, ptr);
}

}  // namespace survbias::csv
