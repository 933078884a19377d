#include "gpvol/scalar_quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>

#include <json.hpp>

#include "gpvol/errors.hpp"
#include "gpvol/special.hpp"

namespace gpv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// P(a < Y < b) using whichever tail keeps precision.
double cell_prob(double a, double b) {
    if (a >= 0.0) return norm_sf(a) - norm_sf(b);
    if (b <= 0.0) return norm_cdf(b) - norm_cdf(a);
    return 1.0 - norm_cdf(a) - norm_sf(b);
}

double pdf_or_zero(double x) { return std::isfinite(x) ? norm_pdf(x) : 0.0; }

struct Cells {
    std::vector<double> lo, hi, p;
};

Cells make_cells(const std::vector<double>& y) {
    const std::size_t n = y.size();
    Cells c;
    c.lo.resize(n);
    c.hi.resize(n);
    c.p.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.lo[i] = i == 0 ? -kInf : 0.5 * (y[i - 1] + y[i]);
        c.hi[i] = i + 1 == n ? kInf : 0.5 * (y[i] + y[i + 1]);
        c.p[i] = cell_prob(c.lo[i], c.hi[i]);
    }
    return c;
}

// cell mean minus point
double residual_of(const std::vector<double>& y, const Cells& c, std::size_t i) {
    return (pdf_or_zero(c.lo[i]) - pdf_or_zero(c.hi[i])) / c.p[i] - y[i];
}

double max_residual(const std::vector<double>& y) {
    const Cells c = make_cells(y);
    double r = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) r = std::max(r, std::fabs(residual_of(y, c, i)));
    return r;
}

double direct_distortion(const std::vector<double>& y) {
    const Cells c = make_cells(y);
    double d = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double pa = pdf_or_zero(c.lo[i]), pb = pdf_or_zero(c.hi[i]);
        const double a_pa = std::isfinite(c.lo[i]) ? c.lo[i] * pa : 0.0;
        const double b_pb = std::isfinite(c.hi[i]) ? c.hi[i] * pb : 0.0;
        const double m1 = pa - pb;
        const double m2 = c.p[i] + a_pa - b_pb;
        d += m2 - 2.0 * y[i] * m1 + y[i] * y[i] * c.p[i];
    }
    return d;
}

bool ordered(const std::vector<double>& y) {
    for (std::size_t i = 1; i < y.size(); ++i)
        if (!(y[i] > y[i - 1])) return false;
    return true;
}

// Newton on F_i = y_i p_i - (phi(a_i) - phi(b_i)) with a tridiagonal Jacobian.
bool newton(std::vector<double>& y, double tol) {
    const std::size_t n = y.size();
    std::vector<double> F(n), diag(n), lower(n), upper(n), dy(n);
    auto eval = [&](const std::vector<double>& x, std::vector<double>& out) {
        const Cells c = make_cells(x);
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = x[i] * c.p[i] - (pdf_or_zero(c.lo[i]) - pdf_or_zero(c.hi[i]));
            norm = std::max(norm, std::fabs(out[i]) / c.p[i]);
        }
        return norm;
    };
    double norm = eval(y, F);
    for (int it = 0; it < 200; ++it) {
        if (norm < tol) return true;
        const Cells c = make_cells(y);
        for (std::size_t i = 0; i < n; ++i) {
            const double fb = i + 1 < n ? 0.25 * (y[i + 1] - y[i]) * norm_pdf(c.hi[i]) : 0.0;
            const double fa = i > 0 ? 0.25 * (y[i] - y[i - 1]) * norm_pdf(c.lo[i]) : 0.0;
            diag[i] = c.p[i] - fb - fa;
            upper[i] = -fb;
            lower[i] = -fa;
        }
        // Thomas solve J dy = -F
        std::vector<double> cp(n), dp(n);
        cp[0] = upper[0] / diag[0];
        dp[0] = -F[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = diag[i] - lower[i] * cp[i - 1];
            cp[i] = upper[i] / m;
            dp[i] = (-F[i] - lower[i] * dp[i - 1]) / m;
        }
        dy[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) dy[i] = dp[i] - cp[i] * dy[i + 1];

        double step = 1.0;
        std::vector<double> trial(n), Ft(n);
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = y[i] + step * dy[i];
            if (ordered(trial)) {
                const double tn = eval(trial, Ft);
                if (std::isfinite(tn) && tn < norm) {
                    y.swap(trial);
                    F.swap(Ft);
                    norm = tn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) return norm < tol;
    }
    return norm < tol;
}

void lloyd(std::vector<double>& y, double tol, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        const Cells c = make_cells(y);
        double r = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double m = (pdf_or_zero(c.lo[i]) - pdf_or_zero(c.hi[i])) / c.p[i];
            r = std::max(r, std::fabs(m - y[i]));
            y[i] = m;
        }
        if (r < tol) return;
    }
}

void symmetrize(std::vector<double>& y) {
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double m = 0.5 * (y[n - 1 - i] - y[i]);
        y[i] = -m;
        y[n - 1 - i] = m;
    }
    if (n % 2 == 1) y[n / 2] = 0.0;
}

std::mutex g_mu;
std::map<int, std::shared_ptr<const ScalarQuantizer>> g_cache;
bool g_dir_init = false;
std::string g_dir;

std::string cache_dir_locked() {
    if (!g_dir_init) {
        const char* env = std::getenv("GPVOL_CACHE_DIR");
        g_dir = env ? env : "";
        g_dir_init = true;
    }
    return g_dir;
}

std::shared_ptr<ScalarQuantizer> load_from_disk(const std::string& dir, int N) {
    namespace fs = std::filesystem;
    const fs::path path = fs::path(dir) / ("scalar_" + std::to_string(N) + ".json");
    std::ifstream in(path);
    if (!in) return nullptr;
    try {
        const auto j = nlohmann::json::parse(in);
        auto q = std::make_shared<ScalarQuantizer>();
        q->N = j.at("N").get<int>();
        q->points = j.at("points").get<std::vector<double>>();
        q->probs = j.at("probs").get<std::vector<double>>();
        if (q->N != N || static_cast<int>(q->points.size()) != N || static_cast<int>(q->probs.size()) != N)
            return nullptr;
        if (!ordered(q->points) || q->stationarity_residual() > 1e-9) return nullptr;
        q->distortion = direct_distortion(q->points);
        return q;
    } catch (const std::exception&) {
        return nullptr;
    }
}

void save_to_disk(const std::string& dir, const ScalarQuantizer& q) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = fs::path(dir) / ("scalar_" + std::to_string(q.N) + ".json");
    const fs::path tmp = path.string() + ".tmp";
    std::ofstream out(tmp);
    if (!out) return;
    nlohmann::json j;
    j["N"] = q.N;
    j["points"] = q.points;
    j["probs"] = q.probs;
    out << std::setprecision(17) << j.dump();
    out.close();
    fs::rename(tmp, path, ec);
}

}  // namespace

double ScalarQuantizer::stationarity_residual() const { return max_residual(points); }

ScalarQuantizer compute_scalar_quantizer(int N) {
    if (N < 1) throw ParameterError("scalar quantizer: N must be >= 1");
    ScalarQuantizer q;
    q.N = N;
    if (N == 1) {
        q.points = {0.0};
        q.probs = {1.0};
        q.distortion = 1.0;
        return q;
    }
    std::vector<double> y(N);
    for (int i = 0; i < N; ++i) y[i] = std::sqrt(3.0) * norm_quantile((i + 0.5) / N);
    const double tol = 1e-12;
    if (!newton(y, tol)) {
        lloyd(y, 1e-10, 10000);
        newton(y, tol);
    }
    symmetrize(y);
    const double res = max_residual(y);
    if (!(res < 1e-10)) {
        throw ConvergenceError("scalar quantizer N=" + std::to_string(N) + " did not converge (residual " +
                                   std::to_string(res) + ")",
                               y);
    }
    const Cells c = make_cells(y);
    q.points = y;
    q.probs = c.p;
    double s = 0.0;
    for (double p : q.probs) s += p;
    for (double& p : q.probs) p /= s;
    q.distortion = direct_distortion(y);
    return q;
}

std::shared_ptr<const ScalarQuantizer> optimal_scalar_quantizer(int N) {
    if (N < 1 || N > kMaxScalarQuantizer) throw ParameterError("scalar quantizer: N must lie in [1, 6000]");
    std::string dir;
    {
        std::lock_guard<std::mutex> lock(g_mu);
        auto it = g_cache.find(N);
        if (it != g_cache.end()) return it->second;
        dir = cache_dir_locked();
    }
    std::shared_ptr<ScalarQuantizer> q;
    if (!dir.empty()) q = load_from_disk(dir, N);
    if (!q) {
        q = std::make_shared<ScalarQuantizer>(compute_scalar_quantizer(N));
        if (!dir.empty()) save_to_disk(dir, *q);
    }
    std::lock_guard<std::mutex> lock(g_mu);
    return g_cache.emplace(N, q).first->second;
}

double scalar_distortion(int N) { return optimal_scalar_quantizer(N)->distortion; }

void set_quantizer_cache_dir(const std::string& dir) {
    std::lock_guard<std::mutex> lock(g_mu);
    g_dir = dir;
    g_dir_init = true;
}

std::string quantizer_cache_dir() {
    std::lock_guard<std::mutex> lock(g_mu);
    return cache_dir_locked();
}

}  // namespace gpv
