#include "wloo/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wloo/error.hpp"

namespace wloo {

void Table::add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw Error(Errc::DimensionMismatch, "row width does not match header of " + name);
    rows.push_back(std::move(row));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(long long v) { return std::to_string(v); }

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// RFC 4180 record splitter; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool quoted = false, any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    cur += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!any) return false;
    fields.push_back(cur);
    return true;
}

}  // namespace

void write_csv(std::ostream& out, const Table& t) {
    for (std::size_t j = 0; j < t.header.size(); ++j) out << (j ? "," : "") << csv_field(t.header[j]);
    out << "\r\n";
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << csv_field(row[j]);
        out << "\r\n";
    }
}

void write_csv(const std::string& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::IoError, "cannot write '" + path + "'");
    write_csv(f, t);
    if (!f) throw Error(Errc::IoError, "write failed for '" + path + "'");
}

int NumericCsv::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<int>(j);
    return -1;
}

NumericCsv read_csv(std::istream& in, const std::string& origin) {
    NumericCsv out;
    std::vector<std::string> rec;
    if (!read_record(in, rec)) throw Error(Errc::IoError, origin + ": empty file");
    out.header = rec;
    std::vector<std::vector<double>> rows;
    long line = 1;
    while (read_record(in, rec)) {
        ++line;
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() != out.header.size())
            throw Error(Errc::IoError, origin + ":" + std::to_string(line) + ": expected " +
                                           std::to_string(out.header.size()) + " fields");
        std::vector<double> r;
        for (const auto& f : rec) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(f.c_str(), &end);
            if (f.empty() || *end != '\0') throw Error(Errc::IoError, origin + ":" + std::to_string(line) + ": not a number '" + f + "'");
            r.push_back(v);
        }
        rows.push_back(std::move(r));
    }
    out.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

NumericCsv read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::IoError, "cannot read '" + path + "'");
    return read_csv(f, path);
}

Mat read_design(const std::string& path) {
    const NumericCsv c = read_csv(path);
    std::vector<int> cols;
    for (int j = 1;; ++j) {
        const int k = c.column("x" + std::to_string(j));
        if (k < 0) break;
        cols.push_back(k);
    }
    if (cols.empty()) throw Error(Errc::IoError, path + ": no x1..xd columns");
    Mat X(c.data.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = c.data.col(cols[j]);
    return X;
}

Table design_table(const Mat& X) {
    Table t;
    t.name = "design";
    for (Eigen::Index j = 0; j < X.cols(); ++j) t.header.push_back("x" + std::to_string(j + 1));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        std::vector<std::string> r;
        for (Eigen::Index j = 0; j < X.cols(); ++j) r.push_back(fmt(X(i, j)));
        t.add(std::move(r));
    }
    return t;
}

void write_design(const std::string& path, const Mat& X) { write_csv(path, design_table(X)); }

}  // namespace wloo
