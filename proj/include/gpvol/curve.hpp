#pragma once

#include <string>
#include <vector>

namespace gpv {

/// Initial forward variance curve xi0(t).
class ForwardVarianceCurve {
public:
    enum class Kind { Flat, ExpBlend, Spline };

    static ForwardVarianceCurve flat(double xi);
    /// xi_start e^{-speed t} + xi_end (1 - e^{-speed t})
    static ForwardVarianceCurve exp_blend(double xi_start, double xi_end, double speed);
    /// Natural cubic spline through sqrt(values) at strictly increasing times,
    /// flat beyond the end nodes; evaluates to spline(t)^2.
    static ForwardVarianceCurve spline(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    /// int_a^b xi0(t) dt
    double integral(double a, double b) const;

    Kind kind() const { return kind_; }
    const std::vector<double>& node_times() const { return t_; }
    /// Node values of xi0 (squared spline ordinates).
    std::vector<double> node_values() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::Flat;
    double a_ = 0.0, b_ = 0.0, speed_ = 0.0;
    std::vector<double> t_, y_, m_;  // nodes, sqrt values, second derivatives

    double sqrt_at(double t) const;
};

}  // namespace gpv
