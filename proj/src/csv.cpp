#include "kinlab/csv.hpp"

#include <cmath>
#include <cstdio>

namespace kinlab::csv {

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Writer& Writer::field(std::string_view s) {
    if (!first_) os_ << ',';
    os_ << quote(s);
    first_ = false;
    return *this;
}

Writer& Writer::field(double x) { return field(std::string_view(number(x))); }

Writer& Writer::field(long long x) { return field(std::string_view(std::to_string(x))); }

Writer& Writer::field(unsigned long long x) { return field(std::string_view(std::to_string(x))); }

void Writer::end_row() {
    os_ << "\r\n";
    first_ = true;
}

void Writer::header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(n);
    end_row();
}

}  // namespace kinlab::csv
