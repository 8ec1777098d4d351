#pragma once

// Minimal RFC-4180 writer: CRLF line ends, quoting only when needed, doubles
// written with 17 significant digits so that values round-trip.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace kinlab::csv {

std::string quote(std::string_view field);
std::string number(double x);

class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    Writer& field(std::string_view s);
    Writer& field(double x);
    Writer& field(long long x);
    Writer& field(unsigned long long x);
    Writer& field(int x) { return field(static_cast<long long>(x)); }
    Writer& field(std::size_t x) { return field(static_cast<unsigned long long>(x)); }
    void end_row();
    void header(const std::vector<std::string>& names);

private:
    std::ostream& os_;
    bool first_ = true;
};

}  // namespace kinlab::csv
