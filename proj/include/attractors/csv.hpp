#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "attractors/common.hpp"

namespace attractors {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

// Minimal CSV reader for the pipeline's fixed schemas: comma-separated,
// unquoted fields, mandatory header row. Tolerates CRLF and a trailing
// newline; lines starting with '#' before the header are kept available as
// comments (used by the distance cache).
class CsvReader {
public:
    CsvReader(const std::string& path, const std::vector<std::string>& expected_header)
        : path_(path), in_(path) {
        if (!in_) throw ValidationError(path + ": cannot open file");
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            strip_cr(line);
            if (!line.empty() && line[0] == '#') {
                comments_.push_back(line);
                continue;
            }
            header_ = split_csv_line(line);
            break;
        }
        if (header_.empty()) throw ValidationError(path + ": missing header row");
        if (header_ != expected_header) {
            std::ostringstream msg;
            msg << path << ": unexpected header; expected '";
            join(msg, expected_header);
            msg << "' got '";
            join(msg, header_);
            msg << "'";
            // Name the first mismatching column to make schema errors actionable.
            for (std::size_t i = 0; i < expected_header.size(); ++i) {
                if (i >= header_.size() || header_[i] != expected_header[i]) {
                    msg << " (column " << i + 1 << " should be '" << expected_header[i] << "')";
                    break;
                }
            }
            throw ValidationError(msg.str());
        }
    }

    // Returns false at EOF. Skips fully empty lines.
    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            strip_cr(line);
            if (line.empty()) continue;
            fields = split_csv_line(line);
            if (fields.size() != header_.size()) {
                throw ValidationError(path_ + " line " + std::to_string(line_no_) + ": expected " +
                                      std::to_string(header_.size()) + " fields, got " +
                                      std::to_string(fields.size()));
            }
            return true;
        }
        return false;
    }

    std::size_t line_number() const { return line_no_; }
    const std::vector<std::string>& comments() const { return comments_; }

private:
    static void strip_cr(std::string& line) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }
    static void join(std::ostringstream& os, const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ',';
            os << v[i];
        }
    }

    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::vector<std::string> comments_;
    std::size_t line_no_ = 0;
};

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw ValidationError(path + ": cannot open for writing");
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw ValidationError(path_ + ": write failed");
    }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace attractors
