#include "spdelab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "spdelab/errors.hpp"

namespace spdelab {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
    row(header);
}

void CsvWriter::row(const std::vector<double>& values) {
    require(values.size() == columns_, ErrorKind::DimensionMismatch, "CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_number(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    require(cells.size() == columns_, ErrorKind::DimensionMismatch, "CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::vector<std::string> mode_columns(std::size_t m, const std::string& prefix) {
    std::vector<std::string> cols;
    cols.reserve(m);
    for (std::size_t k = 1; k <= m; ++k) cols.push_back(prefix + std::to_string(k));
    return cols;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path.string());
    out << text;
}

}  // namespace spdelab
