#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace meanfield {

// Shortest round-trip decimal form of a binary64; reloading the text gives
// back the identical bits.
std::string format_double(double v);

// Minimal CSV emitter: a header row then numeric rows in format_double form.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void write_row(const std::vector<double>& values);
    void write_raw_row(const std::vector<std::string>& fields);
    int rows_written() const { return rows_; }

private:
    std::ofstream out_;
    size_t columns_;
    int rows_ = 0;
};

}  // namespace meanfield
