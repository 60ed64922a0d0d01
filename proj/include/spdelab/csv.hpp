#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace spdelab {

/// Full-precision, locale-independent number formatting shared by every CSV/JSON writer.
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
    std::size_t columns_;
};

std::vector<std::string> mode_columns(std::size_t m, const std::string& prefix = "mode_");

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace spdelab
