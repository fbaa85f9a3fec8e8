#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ap {

using CsvCell = std::variant<double, std::string>;

/// Artifact CSV writer: header row, decimal numbers at 17 significant digits
/// with '.' separator, newline-terminated rows. Bit-stable across runs.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out_ << ',';
            out_ << names[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<CsvCell>& cells) {
        char buf[64];
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            if (const double* d = std::get_if<double>(&cells[i])) {
                std::snprintf(buf, sizeof(buf), "%.17g", *d);
                out_ << buf;
            } else {
                out_ << std::get<std::string>(cells[i]);
            }
        }
        out_ << '\n';
    }

    void close() { out_.close(); }

  private:
    std::ofstream out_;
};

}  // namespace ap
