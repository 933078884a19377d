#include "gpvol/product_quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "gpvol/errors.hpp"

namespace gpv {

namespace {

// sum_{k>m} lambda_k = T^2/2 - sum_{k<=m} lambda_k
double kl_tail(int m, double T) {
    double s = 0.5 * T * T;
    for (int k = 1; k <= m; ++k) s -= kl_eigen(T, k).lambda;
    return std::max(s, 0.0);
}

void enumerate(long budget, std::vector<int>& prefix, long prod, int prev, std::vector<std::vector<int>>& out) {
    const long rem = budget / prod;
    const int top = static_cast<int>(std::min<long>(prev, rem));
    for (int f = 2; f <= top; ++f) {
        prefix.push_back(f);
        if (f == top) out.push_back(prefix);
        // extensions exist only if another factor >= 2 fits
        if (rem / f >= 2) enumerate(budget, prefix, prod * f, f, out);
        prefix.pop_back();
    }
}

bool better(const std::vector<int>& a, double da, const std::vector<int>& b, double db) {
    if (da != db) return da < db;
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

double decomposition_distortion(const std::vector<int>& sizes, double T) {
    double d = kl_tail(static_cast<int>(sizes.size()), T);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const int n = sizes[k];
        const double D = n <= kMaxScalarQuantizer ? scalar_distortion(n) : compute_scalar_quantizer(n).distortion;
        d += kl_eigen(T, static_cast<int>(k) + 1).lambda * D;
    }
    return d;
}

namespace {

Decomposition search_decomposition(long N_budget, double T) {

    std::vector<std::vector<int>> cands;
    std::vector<int> prefix;
    enumerate(N_budget, prefix, 1, static_cast<int>(std::min<long>(N_budget, 1L << 30)), cands);

    // Any n-level quantizer of N(0,1) has distortion >= 1/n^2 (rate-distortion bound).
    struct Entry {
        double lb;
        std::size_t idx;
    };
    std::vector<Entry> order;
    order.reserve(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& c = cands[i];
        double lb = kl_tail(static_cast<int>(c.size()), T);
        for (std::size_t k = 0; k < c.size(); ++k)
            lb += kl_eigen(T, static_cast<int>(k) + 1).lambda / (static_cast<double>(c[k]) * c[k]);
        order.push_back({lb, i});
    }
    std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) { return a.lb < b.lb; });

    Decomposition best;
    best.distortion = std::numeric_limits<double>::infinity();
    for (const auto& e : order) {
        if (e.lb > best.distortion) break;
        const auto& c = cands[e.idx];
        const double d = decomposition_distortion(c, T);
        if (best.sizes.empty() || better(c, d, best.sizes, best.distortion)) {
            best.sizes = c;
            best.distortion = d;
        }
    }
    return best;
}

}  // namespace

// Every lambda_k scales as T^2, so the optimal sizes do not depend on T.
Decomposition optimal_decomposition(long N_budget, double T) {
    if (N_budget < 1) throw ParameterError("optimal_decomposition: N_budget must be >= 1");
    if (!(T > 0.0)) throw ParameterError("optimal_decomposition: T must be > 0");
    if (N_budget < 2) return {{1}, 0.5 * T * T};
    static std::mutex mu;
    static std::map<long, Decomposition> memo;
    Decomposition unit;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(N_budget);
        if (it != memo.end()) unit = it->second;
    }
    if (unit.sizes.empty()) {
        unit = search_decomposition(N_budget, 1.0);
        std::lock_guard<std::mutex> lock(mu);
        memo.emplace(N_budget, unit);
    }
    unit.distortion *= T * T;
    return unit;
}

ProductQuantizer::ProductQuantizer(double T, std::vector<int> sizes, double eps_lambda)
    : T_(T), sizes_(std::move(sizes)), eps_lambda_(eps_lambda) {
    if (!(T > 0.0)) throw ParameterError("product quantizer: T must be > 0");
    if (sizes_.empty()) throw ParameterError("product quantizer: need at least one level");
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] < 1) throw ParameterError("product quantizer: level sizes must be >= 1");
        if (i > 0 && sizes_[i] > sizes_[i - 1]) throw ParameterError("product quantizer: sizes must be non-increasing");
    }
    set_eps_lambda(eps_lambda);
    strides_.assign(sizes_.size(), 1);
    for (std::size_t i = sizes_.size(); i-- > 0;) {
        strides_[i] = count_;
        count_ *= static_cast<std::size_t>(sizes_[i]);
    }
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        eig_.push_back(kl_eigen(T_, static_cast<int>(i) + 1));
        scalars_.push_back(optimal_scalar_quantizer(sizes_[i]));
    }
}

void ProductQuantizer::set_eps_lambda(double e) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ParameterError("product quantizer: eps_lambda must be >= 0");
    eps_lambda_ = e;
}

std::vector<int> ProductQuantizer::tuple(std::size_t flat) const {
    if (flat >= count_) throw ParameterError("product quantizer: flat index out of range");
    std::vector<int> t(sizes_.size());
    for (std::size_t i = 0; i < sizes_.size(); ++i) t[i] = static_cast<int>((flat / strides_[i]) % sizes_[i]);
    return t;
}

std::size_t ProductQuantizer::flat(const std::vector<int>& tuple) const {
    if (tuple.size() != sizes_.size()) throw ParameterError("product quantizer: tuple length mismatch");
    std::size_t f = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (tuple[i] < 0 || tuple[i] >= sizes_[i]) throw ParameterError("product quantizer: tuple entry out of range");
        f += strides_[i] * static_cast<std::size_t>(tuple[i]);
    }
    return f;
}

double ProductQuantizer::probability(std::size_t flat) const {
    double p = 1.0;
    for (std::size_t i = 0; i < sizes_.size(); ++i)
        p *= scalars_[i]->probs[(flat / strides_[i]) % sizes_[i]];
    return p;
}

std::vector<double> ProductQuantizer::probabilities() const {
    std::vector<double> p(count_);
    for (std::size_t j = 0; j < count_; ++j) p[j] = probability(j);
    return p;
}

double ProductQuantizer::point(std::size_t flat, int level) const {
    return scalars_[level]->points[(flat / strides_[level]) % sizes_[level]];
}

double ProductQuantizer::scale(int level) const { return std::sqrt(eig_[level].lambda + eps_lambda_); }

double ProductQuantizer::path(std::size_t flat, double t) const {
    double s = 0.0;
    for (int k = 0; k < levels(); ++k) s += scale(k) * point(flat, k) * eig_[k].e(t);
    return s;
}

double ProductQuantizer::path_derivative(std::size_t flat, double t) const {
    double s = 0.0;
    for (int k = 0; k < levels(); ++k) s += scale(k) * point(flat, k) * eig_[k].edot(t);
    return s;
}

double ProductQuantizer::distortion() const { return decomposition_distortion(sizes_, T_); }

ProductQuantizer build_product_quantizer(long N_budget, double T) {
    return ProductQuantizer(T, optimal_decomposition(N_budget, T).sizes);
}

}  // namespace gpv
