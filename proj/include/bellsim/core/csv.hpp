#pragma once

// CSV emission: header row, comma separator, LF line endings, '.' decimal
// point, doubles in shortest round-trip form. Output is byte-stable for a
// given sequence of values.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace bellsim::csv {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

/// Fixed 12-significant-digit rendering, for human-facing decimal inputs.
inline std::string format_decimal12(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

class Cell {
public:
    Cell(double v) : text_(format_double(v)) {}
    Cell(int v) : text_(std::to_string(v)) {}
    Cell(long v) : text_(std::to_string(v)) {}
    Cell(long long v) : text_(std::to_string(v)) {}
    Cell(unsigned v) : text_(std::to_string(v)) {}
    Cell(unsigned long v) : text_(std::to_string(v)) {}
    Cell(unsigned long long v) : text_(std::to_string(v)) {}
    Cell(bool v) : text_(v ? "1" : "0") {}
    Cell(const char* v) : text_(v) {}
    Cell(std::string v) : text_(std::move(v)) {}
    Cell(std::string_view v) : text_(v) {}

    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::initializer_list<Cell> cells) {
        std::vector<std::string> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(c.text());
        rows_.push_back(std::move(row));
    }

    void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::size_t rows() const noexcept { return rows_.size(); }

    void write(std::ostream& os) const {
        write_line(os, header_);
        for (const auto& r : rows_) write_line(os, r);
    }

    std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + path + " for writing");
        write(f);
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace bellsim::csv
