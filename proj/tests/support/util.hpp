#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>

#include "distobs/numkit.hpp"

namespace distobs::testutil {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix M(rows.size(), rows.size() ? rows.begin()->size() : 0);
    int r = 0;
    for (const auto& row : rows) {
        int c = 0;
        for (double v : row) M(r, c++) = v;
        ++r;
    }
    return M;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

inline std::string scenario_path(const std::string& name) { return std::string(DISTOBS_SCENARIO_DIR) + "/" + name; }

}  // namespace distobs::testutil
