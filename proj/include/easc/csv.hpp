// csv.hpp: Minimal CSV emitter with fixed 17-significant-digit floats

#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "easc/error.hpp"

namespace easc {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
        out_.precision(17);
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    CsvWriter& field(double v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(const std::string& s) {
        sep();
        out_ << s;
        return *this;
    }
    void end_row() {
        out_ << '\n';
        first_ = true;
    }
    void row(std::initializer_list<double> values) {
        for (double v : values) field(v);
        end_row();
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ofstream out_;
    bool first_{true};
};

} // namespace easc
