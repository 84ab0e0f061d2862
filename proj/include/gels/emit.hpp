#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gels {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form; identical input gives identical text.
std::string fmt_num(double v);

/// Minimal CSV builder with a fixed header.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    std::string str() const;
    void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace gels
