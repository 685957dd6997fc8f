#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

namespace aggecon::io {

// Deterministic textual form of a double: shortest of the pretty form that
// still round-trips is not needed here, a fixed %g precision is; the same
// build always emits the same bytes.
std::string num(double v);   // %.12g - series and report values
std::string full(double v);  // %.17g - values meant to be read back exactly

// Minimal CSV emitter: comma separation, '.' decimal point, LF endings,
// '#' comment lines. Values pass through unquoted (no free text fields in any
// of the artifact's files).
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void comment(const std::string& text);

    template <typename... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((append_cell(to_cell(cells), first), first = false), ...);
        out_ << '\n';
    }

private:
    static std::string to_cell(const std::string& s) { return s; }
    static std::string to_cell(const char* s) { return s; }
    static std::string to_cell(std::int64_t v) { return std::to_string(v); }
    static std::string to_cell(std::uint64_t v) { return std::to_string(v); }
    static std::string to_cell(int v) { return std::to_string(v); }
    static std::string to_cell(double v) { return num(v); }

    void append_cell(const std::string& cell, bool first);

    std::ofstream out_;
};

// 64-bit FNV-1a, used to stamp output files with a config fingerprint.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace aggecon::io
