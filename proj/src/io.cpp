#include "aggecon/io.hpp"

#include <stdexcept>

namespace aggecon::io {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path);
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

void CsvWriter::append_cell(const std::string& cell, bool first) {
    if (!first) out_ << ',';
    out_ << cell;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace aggecon::io
