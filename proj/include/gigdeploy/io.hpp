#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "gigdeploy/errors.hpp"

namespace gigdeploy::io {

// Shortest text form that round-trips a double exactly; independent of the
// global locale, so output is byte-stable across environments.
inline std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// In-memory CSV table. Rows are assembled cell by cell (numbers through
// g17) and written in one pass, so parallel producers can fill rows by
// index and the byte stream still comes out in grid order.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& out) const {
        write_row(out, header);
        for (const auto& r : rows) write_row(out, r);
    }

  private:
    static void write_row(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.put(',');
            out << cells[i];
        }
        out.put('\n');
    }
};

// Writes a table to the path, or to the fallback stream for an empty path.
inline void write_table(const Table& t, const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
        t.write(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary); // binary: no newline translation
    if (!f) throw DomainError("cannot open output path: " + path);
    t.write(f);
    if (!f) throw DomainError("write failed: " + path);
}

} // namespace gigdeploy::io
