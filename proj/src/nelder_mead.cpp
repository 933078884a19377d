#include "gpvol/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>

#include "gpvol/errors.hpp"

namespace gpv {

namespace {

NelderMeadResult run_once(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const std::vector<double>& lo, const std::vector<double>& hi, const NelderMeadConfig& cfg) {
    const std::size_t n = x0.size();
    if (n == 0 || lo.size() != n || hi.size() != n) throw ParameterError("nelder_mead: dimension mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!(lo[i] <= hi[i])) throw ParameterError("nelder_mead: empty box");

    NelderMeadResult res;
    auto project = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };
    // hard budget: past max_evals, points are rejected unevaluated
    auto eval = [&](const std::vector<double>& x) {
        if (res.evals >= cfg.max_evals) return std::numeric_limits<double>::max();
        ++res.evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };

    project(x0);
    std::vector<std::vector<double>> s(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = hi[i] - lo[i];
        double step = cfg.init_step * (w > 0.0 ? w : 1.0);
        if (x0[i] + step > hi[i]) step = -step;  // step inward when at the upper face
        s[i + 1][i] += step;
        project(s[i + 1]);
    }
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(s[i]);

    std::vector<std::size_t> order(n + 1);
    double best_seen = std::numeric_limits<double>::infinity();
    int since_improve = 0;
    auto width = [&](std::size_t i) { return hi[i] - lo[i] > 0.0 ? hi[i] - lo[i] : 1.0; };

    for (;;) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        {
            decltype(s) s2;
            std::vector<double> f2;
            for (auto k : order) {
                s2.push_back(s[k]);
                f2.push_back(fs[k]);
            }
            s.swap(s2);
            fs.swap(f2);
        }
        res.trace.push_back(fs[0]);
        if (fs[0] < best_seen - 1e-14 * std::abs(best_seen)) {
            best_seen = fs[0];
            since_improve = 0;
        } else {
            ++since_improve;
        }

        if (fs[0] <= cfg.target) { res.reason = "target"; break; }
        if (res.evals >= cfg.max_evals) { res.reason = "max_evals"; break; }
        if (since_improve >= cfg.stall_iters) { res.reason = "stall"; break; }
        double diam = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, std::abs(s[k][i] - s[0][i]) / width(i));
        if (fs[n] - fs[0] <= cfg.f_tol * (1.0 + std::abs(fs[0])) && diam <= std::sqrt(cfg.x_tol)) {
            res.reason = "converged";
            break;
        }
        if (diam <= cfg.x_tol) { res.reason = "converged"; break; }
        ++res.iterations;

        std::vector<double> c(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) c[i] += s[k][i] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = c[i] + t * (s[n][i] - c[i]);
            project(x);
            return x;
        };
        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < fs[0]) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) { s[n] = xe; fs[n] = fe; }
            else { s[n] = xr; fs[n] = fr; }
            continue;
        }
        if (fr < fs[n - 1]) { s[n] = xr; fs[n] = fr; continue; }
        const bool outside = fr < fs[n];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fs[n])) { s[n] = xc; fs[n] = fc; continue; }
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) s[k][i] = s[0][i] + 0.5 * (s[k][i] - s[0][i]);
            fs[k] = eval(s[k]);
        }
    }
    res.x = s[0];
    res.f = fs[0];
    return res;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& lo,
                             const std::vector<double>& hi, const NelderMeadConfig& cfg) {
    auto res = run_once(f, std::move(x0), lo, hi, cfg);
    NelderMeadConfig c = cfg;
    for (int r = 0; r < cfg.restarts; ++r) {
        if (std::string_view(res.reason) == "target" || std::string_view(res.reason) == "max_evals") break;
        c.max_evals = cfg.max_evals - res.evals;
        if (c.max_evals <= 0) break;
        c.init_step *= 0.5;
        auto next = run_once(f, res.x, lo, hi, c);
        const bool better = next.f < res.f - 1e-12 * (1.0 + std::abs(res.f));
        res.evals += next.evals;
        res.iterations += next.iterations;
        res.trace.insert(res.trace.end(), next.trace.begin(), next.trace.end());
        if (!better) break;
        res.x = next.x;
        res.f = next.f;
        res.reason = next.reason;
    }
    return res;
}

}  // namespace gpv
