#include "meanfield/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace meanfield {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& values) {
    if (values.size() != columns_)
        throw std::runtime_error("CsvWriter: row width mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
    ++rows_;
}

void CsvWriter::write_raw_row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_)
        throw std::runtime_error("CsvWriter: row width mismatch");
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
    ++rows_;
}

}  // namespace meanfield
