#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wloo/numerics.hpp"

namespace wloo {

// Header plus rows of already formatted cells.
struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
};

std::string fmt(double v);  // %.17g
std::string fmt(long long v);

void write_csv(std::ostream& out, const Table& t);
void write_csv(const std::string& path, const Table& t);

struct NumericCsv {
    std::vector<std::string> header;
    Mat data;
    int column(const std::string& name) const;  // -1 when absent
};

NumericCsv read_csv(std::istream& in, const std::string& origin = "<stream>");
NumericCsv read_csv(const std::string& path);

Mat read_design(const std::string& path);
void write_design(const std::string& path, const Mat& X);
Table design_table(const Mat& X);

}  // namespace wloo
