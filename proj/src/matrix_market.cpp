#include "sbmor/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sbmor/errors.hpp"

namespace sbmor {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '%') continue;
        return true;
    }
    return false;
}

} // namespace

Eigen::MatrixXd read_matrix_market(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw IoError("file not found: " + filename);

    std::string header;
    if (!std::getline(in, header) || header.rfind("%%MatrixMarket", 0) != 0)
        throw IoError(filename + ": missing MatrixMarket banner");
    std::istringstream hs(lower(header.substr(2)));
    std::string tag, object, format, field, symmetry;
    hs >> tag >> object >> format >> field >> symmetry;
    if (object != "matrix")
        throw IoError(filename + ": unsupported object '" + object + "'");
    if (field != "real" && field != "integer")
        throw IoError(filename + ": unsupported field '" + field + "'");
    const bool coordinate = format == "coordinate";
    if (!coordinate && format != "array")
        throw IoError(filename + ": unsupported format '" + format + "'");
    if (symmetry != "general" && symmetry != "symmetric" &&
        symmetry != "skew-symmetric")
        throw IoError(filename + ": unsupported symmetry '" + symmetry + "'");

    std::string line;
    if (!next_data_line(in, line))
        throw IoError(filename + ": missing size line");
    std::istringstream sizes(line);
    Eigen::Index rows = 0, cols = 0;
    long long entries = 0;
    sizes >> rows >> cols;
    if (coordinate) sizes >> entries;
    if (!sizes || rows < 0 || cols < 0)
        throw IoError(filename + ": bad size line '" + line + "'");

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
    if (coordinate) {
        for (long long e = 0; e < entries; ++e) {
            if (!next_data_line(in, line))
                throw IoError(filename + ": truncated coordinate data");
            std::istringstream entry(line);
            Eigen::Index i = 0, j = 0;
            double value = 0.0;
            entry >> i >> j >> value;
            if (!entry || i < 1 || i > rows || j < 1 || j > cols)
                throw IoError(filename + ": bad entry '" + line + "'");
            M(i - 1, j - 1) = value;
            if (symmetry == "symmetric") M(j - 1, i - 1) = value;
            if (symmetry == "skew-symmetric") M(j - 1, i - 1) = -value;
        }
    } else {
        // array format: column-major dense; symmetric stores the lower
        // triangle only
        const auto read_value = [&](double& value) {
            if (!next_data_line(in, line))
                throw IoError(filename + ": truncated array data");
            std::istringstream entry(line);
            entry >> value;
            if (!entry) throw IoError(filename + ": bad value '" + line + "'");
        };
        if (symmetry == "general") {
            for (Eigen::Index j = 0; j < cols; ++j)
                for (Eigen::Index i = 0; i < rows; ++i) read_value(M(i, j));
        } else {
            for (Eigen::Index j = 0; j < cols; ++j)
                for (Eigen::Index i = j; i < rows; ++i) {
                    double value = 0.0;
                    read_value(value);
                    M(i, j) = value;
                    M(j, i) = symmetry == "symmetric" ? value : -value;
                    if (symmetry == "skew-symmetric" && i == j) M(i, j) = 0.0;
                }
        }
    }
    return M;
}

void write_matrix_market(const Eigen::MatrixXd& M,
                         const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw IoError("cannot write " + filename);
    out << "%%MatrixMarket matrix array real general\n";
    out << M.rows() << " " << M.cols() << "\n";
    out.precision(17);
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) out << M(i, j) << "\n";
    if (!out) throw IoError("write failed: " + filename);
}

} // namespace sbmor
