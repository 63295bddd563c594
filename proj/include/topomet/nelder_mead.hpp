#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <vector>

namespace topomet {

struct NelderMeadOptions {
    int max_iterations = 300;
    double tolerance = 1e-10;   // spread of simplex values at convergence
    double initial_step = 0.3;  // per-coordinate offset of the start simplex
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Deterministic downhill-simplex minimizer (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2). Ties are broken by index so runs are
// reproducible bit-for-bit.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0,
                                    const NelderMeadOptions& opts = {}) {
    const int n = static_cast<int>(x0.size());
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
    for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i) + 1](i) += opts.initial_step;
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const auto& p : pts) vals.push_back(f(p));

    std::vector<std::size_t> order(pts.size());
    NelderMeadResult res;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        {
            std::vector<Eigen::VectorXd> ps(pts.size());
            std::vector<double> vs(vals.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                ps[i] = pts[order[i]];
                vs[i] = vals[order[i]];
            }
            pts.swap(ps);
            vals.swap(vs);
        }
        if (vals.back() - vals.front() < opts.tolerance) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd& worst = pts.back();
        const Eigen::VectorXd xr = centroid + (centroid - worst);
        const double fr = f(xr);
        if (fr < vals.front()) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
            const double fe = f(xe);
            if (fe < fr) {
                pts.back() = xe;
                vals.back() = fe;
            } else {
                pts.back() = xr;
                vals.back() = fr;
            }
        } else if (fr < vals[vals.size() - 2]) {
            pts.back() = xr;
            vals.back() = fr;
        } else {
            const Eigen::VectorXd xc = centroid + 0.5 * (worst - centroid);
            const double fc = f(xc);
            if (fc < vals.back()) {
                pts.back() = xc;
                vals.back() = fc;
            } else {
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < vals.size(); ++i) {
        if (vals[i] < vals[best]) best = i;
    }
    res.x = pts[best];
    res.value = vals[best];
    res.iterations = it;
    return res;
}

}  // namespace topomet
