#include "gpvol/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpvol/errors.hpp"
#include "gpvol/quadrature.hpp"

namespace gpv {

ForwardVarianceCurve ForwardVarianceCurve::flat(double xi) {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw ParameterError("flat forward variance must be finite and >= 0");
    ForwardVarianceCurve c;
    c.kind_ = Kind::Flat;
    c.a_ = xi;
    return c;
}

ForwardVarianceCurve ForwardVarianceCurve::exp_blend(double xi_start, double xi_end, double speed) {
    if (!(xi_start >= 0.0) || !(xi_end >= 0.0)) throw ParameterError("exp_blend: levels must be >= 0");
    if (!(speed >= 0.0)) throw ParameterError("exp_blend: speed must be >= 0");
    ForwardVarianceCurve c;
    c.kind_ = Kind::ExpBlend;
    c.a_ = xi_start;
    c.b_ = xi_end;
    c.speed_ = speed;
    return c;
}

ForwardVarianceCurve ForwardVarianceCurve::spline(std::vector<double> times, std::vector<double> values) {
    if (times.empty() || times.size() != values.size())
        throw ParameterError("spline: need matching, non-empty node vectors");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) throw ParameterError("spline: node values must be >= 0");
        if (i > 0 && !(times[i] > times[i - 1])) throw ParameterError("spline: node times must increase");
    }
    ForwardVarianceCurve c;
    c.kind_ = Kind::Spline;
    c.t_ = std::move(times);
    const std::size_t n = values.size();
    c.y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.y_[i] = std::sqrt(values[i]);
    c.m_.assign(n, 0.0);
    if (n >= 3) {
        // natural spline: tridiagonal system for interior second derivatives
        const std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = c.t_[i] - c.t_[i - 1];
            const double h1 = c.t_[i + 1] - c.t_[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((c.y_[i + 1] - c.y_[i]) / h1 - (c.y_[i] - c.y_[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < k; ++i) {
            const double lower = c.t_[i + 1] - c.t_[i];
            const double f = lower / diag[i - 1];
            diag[i] -= f * upper[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        std::vector<double> sol(k);
        for (std::size_t i = k; i-- > 0;) {
            sol[i] = (rhs[i] - (i + 1 < k ? upper[i] * sol[i + 1] : 0.0)) / diag[i];
        }
        for (std::size_t i = 0; i < k; ++i) c.m_[i + 1] = sol[i];
    }
    return c;
}

double ForwardVarianceCurve::sqrt_at(double t) const {
    const std::size_t n = t_.size();
    if (n == 1 || t <= t_.front()) return y_.front();
    if (t >= t_.back()) return y_.back();
    const std::size_t i = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin() - 1;
    const double h = t_[i + 1] - t_[i];
    const double A = (t_[i + 1] - t) / h;
    const double B = (t - t_[i]) / h;
    return A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double ForwardVarianceCurve::operator()(double t) const {
    switch (kind_) {
        case Kind::Flat:
            return a_;
        case Kind::ExpBlend: {
            const double e = std::exp(-speed_ * t);
            return a_ * e + b_ * (1.0 - e);
        }
        case Kind::Spline: {
            const double s = sqrt_at(t);
            return s * s;
        }
    }
    return 0.0;
}

double ForwardVarianceCurve::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    if (a == b) return 0.0;
    switch (kind_) {
        case Kind::Flat:
            return a_ * (b - a);
        case Kind::ExpBlend: {
            if (speed_ == 0.0) return a_ * (b - a);
            const double decay = (std::exp(-speed_ * a) - std::exp(-speed_ * b)) / speed_;
            return a_ * decay + b_ * ((b - a) - decay);
        }
        case Kind::Spline: {
            // piecewise degree-6 polynomial between nodes; 4-point Gauss-Legendre is exact
            std::vector<double> cuts{a};
            for (double x : t_)
                if (x > a && x < b) cuts.push_back(x);
            cuts.push_back(b);
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const auto rule = gauss_legendre(4, cuts[i], cuts[i + 1]);
                s += rule.apply([&](double t) { return (*this)(t); });
            }
            return s;
        }
    }
    return 0.0;
}

std::vector<double> ForwardVarianceCurve::node_values() const {
    std::vector<double> v;
    for (double y : y_) v.push_back(y * y);
    return v;
}

std::string ForwardVarianceCurve::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Flat: os << "flat(" << a_ << ")"; break;
        case Kind::ExpBlend: os << "exp_blend(" << a_ << "," << b_ << "," << speed_ << ")"; break;
        case Kind::Spline: os << "spline(" << t_.size() << " nodes)"; break;
    }
    return os.str();
}

}  // namespace gpv
