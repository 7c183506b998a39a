#include "lobtrend/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "lobtrend/errors.hpp"

namespace lobtrend::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {

std::string_view trimmed(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string_view(s).substr(b, e - b + 1);
}

} // namespace

double parse_number(const std::string& field, const std::string& context) {
    auto sv = trimmed(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc() || ptr != sv.data() + sv.size())
        throw FormatError("non-numeric field '" + field + "' at " + context);
    return value;
}

int64_t parse_integer(const std::string& field, const std::string& context) {
    auto sv = trimmed(field);
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc() || ptr != sv.data() + sv.size())
        throw FormatError("non-integer field '" + field + "' at " + context);
    return value;
}

std::string format_double(double v) {
    char buf[40];
    // Try increasing precision until the value round-trips exactly.
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        auto [ptr, ec] = std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
        (void)ptr;
        if (ec == std::errc() && back == v) return buf;
    }
    return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

} // namespace lobtrend::csv
