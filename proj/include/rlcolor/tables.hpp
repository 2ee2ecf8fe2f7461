#pragma once

// Sampled-table loading and interpolation shared by the colour and optics
// data files. File format: one sample per row, comma- or whitespace-separated
// columns, '#' starts a comment, wavelength (nm) in the first column.

#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlcolor {

class TableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::vector<double>> parse_rows(std::istream& in, std::size_t columns) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) continue;
        if (row.size() != columns)
            throw TableError("malformed row " + std::to_string(lineno) + ": expected " +
                             std::to_string(columns) + " columns, got " + std::to_string(row.size()));
        for (double x : row)
            if (!std::isfinite(x))
                throw TableError("malformed row " + std::to_string(lineno) + ": non-finite value");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw TableError("no samples");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i][0] <= rows[i - 1][0])
            throw TableError("non-monotone wavelength at row " + std::to_string(i + 1));
    return rows;
}

} // namespace detail

// Linear interpolation on a strictly increasing grid. No extrapolation.
inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x < xs.front() || x > xs.back())
        throw std::out_of_range("wavelength " + std::to_string(x) + " nm outside table range [" +
                                std::to_string(xs.front()) + ", " + std::to_string(xs.back()) + "]");
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    if (hi == 0) return ys.front();
    std::size_t lo = hi - 1;
    double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

} // namespace rlcolor
