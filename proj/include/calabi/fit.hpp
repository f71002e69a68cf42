#pragma once

#include <cmath>
#include <vector>

#include "calabi/errors.hpp"

namespace calabi {

/// Linear least squares with per-column scaling and partial pivoting.
/// Design rows are X[i][k]; returns coefficients in original column units.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& X,
                                         const std::vector<double>& y) {
    const std::size_t m = X.size();
    if (m == 0 || y.size() != m) throw FitError("least_squares: empty or mismatched data");
    const std::size_t k = X[0].size();
    if (m < k) throw FitError("least_squares: underdetermined system");

    std::vector<double> scale(k, 0.0);
    for (const auto& row : X)
        for (std::size_t j = 0; j < k; ++j) scale[j] = std::max(scale[j], std::fabs(row[j]));
    for (auto& s : scale)
        if (s == 0.0) s = 1.0;

    // normal equations on scaled columns
    std::vector<std::vector<double>> M(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double xp = X[i][p] / scale[p];
            M[p][k] += xp * y[i];
            for (std::size_t q = 0; q < k; ++q) M[p][q] += xp * X[i][q] / scale[q];
        }

    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        if (M[c][c] == 0.0) throw FitError("least_squares: singular design matrix");
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            const double f = M[r][c] / M[c][c];
            for (std::size_t q = c; q <= k; ++q) M[r][q] -= f * M[c][q];
        }
    }
    std::vector<double> coef(k);
    for (std::size_t c = 0; c < k; ++c) coef[c] = M[c][k] / M[c][c] / scale[c];
    return coef;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

/// Straight-line fit y = slope*x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw FitError("fit_line: need >= 2 points");
    std::vector<std::vector<double>> X(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) X[i] = {x[i], 1.0};
    auto c = least_squares(X, y);
    LineFit out{c[0], c[1], 0.0};
    for (std::size_t i = 0; i < x.size(); ++i)
        out.max_residual = std::max(out.max_residual, std::fabs(y[i] - c[0] * x[i] - c[1]));
    return out;
}

/// log-log power-law fit y = C * x^p; returns (p, C, max residual of log y).
inline LineFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) throw FitError("fit_power_law: nonpositive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    LineFit f = fit_line(lx, ly);
    f.intercept = std::exp(f.intercept);
    return f;
}

inline std::vector<double> geometric_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw FitError("geometric_grid: bad range");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (count - 1));
    return g;
}

}  // namespace calabi
