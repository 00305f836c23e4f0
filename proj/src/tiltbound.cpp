#include <cse/tiltbound.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace cse {

namespace {

void require_unit(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

void require_finite_q(double q, double lo, bool open) {
    const bool ok = std::isfinite(q) && (open ? q > lo : q >= lo);
    if (!ok) throw std::invalid_argument(open ? "q must be finite and > 1" : "q must be finite and >= 1");
}

bool is_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

/*
 * Minimizes a quasi-convex function of u on [lo, hi]: a uniform scan
 * locates the basin, golden section then shrinks the bracket around it.
 * Returns (u*, f(u*)).
 */
std::pair<double, double> minimize_quasiconvex(const std::function<double(double)>& f, double lo, double hi) {
    constexpr int n_scan = 64;
    std::array<double, n_scan> us{};
    std::array<double, n_scan> fs{};
    int best = 0;
    for (int i = 0; i < n_scan; ++i) {
        us[i] = lo + (hi - lo) * i / (n_scan - 1);
        fs[i] = f(us[i]);
        if (fs[i] < fs[best]) best = i;
    }
    double a = us[std::max(best - 1, 0)];
    double b = us[std::min(best + 1, n_scan - 1)];
    double best_u = us[best];
    double best_f = fs[best];

    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < qsearch::kMaxIterations; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        const double scale = std::max({std::abs(fc), std::abs(fd), 1e-300});
        if (b - a < 1e-12 || (b - a < 1e-6 && std::abs(fc - fd) <= qsearch::kRelTol * scale)) break;
    }
    for (auto [u, fu] : {std::pair{c, fc}, std::pair{d, fd}}) {
        if (fu < best_f) {
            best_f = fu;
            best_u = u;
        }
    }
    return {best_u, best_f};
}

// log of the forward bound with w = q - 1 kept separate to avoid cancellation near q = 1.
double log_forward(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double w,
                   double log_a) {
    const double q = 1.0 + w;
    const double e = tilt_exponent(family, theta0, v, q);
    return (w / q) * log_a + e;
}

double log_inverse(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double w,
                   double log_alpha) {
    const double q = 1.0 + w;
    const double e = tilt_exponent(family, theta0, v, q);
    return (q / w) * (log_alpha - e);
}

void check_query(const ModelFamily& family, const BoundQuery& query) {
    if (query.vertices.empty()) throw std::invalid_argument("bound query has no vertices");
    family.check_dim(query.theta0.coords());
    for (const auto& v : query.vertices) {
        family.check_dim(v);
        for (double x : v) {
            if (!std::isfinite(x)) throw std::invalid_argument("bound query vertex is not finite");
        }
    }
    require_unit(query.value, "bound query value");
}

}  // namespace

double tilt_exponent(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q) {
    return psi(family, theta0, v, q) / q - psi(family, theta0, v, 1.0);
}

double forward_bound(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q,
                     double a) {
    require_unit(a, "a");
    require_finite_q(q, 1.0, false);
    if (a == 0.0) return 0.0;
    const double lu = log_forward(family, theta0, v, q - 1.0, std::log(a));
    return std::exp(std::min(lu, 0.0));
}

double inverse_bound(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q,
                     double alpha) {
    require_unit(alpha, "alpha");
    require_finite_q(q, 1.0, true);
    if (alpha == 0.0) return 0.0;
    return std::exp(std::min(log_inverse(family, theta0, v, q - 1.0, std::log(alpha)), 0.0));
}

double lower_bound(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q,
                   double a) {
    require_unit(a, "a");
    require_finite_q(q, 1.0, false);
    if (a == 1.0) return 1.0;
    const double lu = log_forward(family, theta0, v, q - 1.0, std::log1p(-a));
    return std::max(0.0, 1.0 - std::exp(lu));
}

BoundResult optimize_forward(const ModelFamily& family, const BoundQuery& query) {
    check_query(family, query);
    const double a = query.value;
    const auto theta0 = query.theta0.coords();
    const bool all_zero =
        std::all_of(query.vertices.begin(), query.vertices.end(), [](const auto& v) { return is_zero(v); });
    if (all_zero) return {a, kInfiniteQ, 0};
    if (a == 0.0) return {0.0, 1.0, 0};
    if (a == 1.0) return {1.0, 1.0, 0};

    const double log_a = std::log(a);
    auto objective = [&](double u) {
        const double w = std::exp(u);
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& v : query.vertices) worst = std::max(worst, log_forward(family, theta0, v, w, log_a));
        return worst;
    };
    const auto [u_star, value] = minimize_quasiconvex(objective, qsearch::kLogQMinusOneLo, qsearch::kLogQMinusOneHi);
    const double w_star = std::exp(u_star);

    BoundResult result;
    result.q_star = 1.0 + w_star;
    result.bound = std::exp(std::min(value, 0.0));
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < query.vertices.size(); ++m) {
        const double lv = log_forward(family, theta0, query.vertices[m], w_star, log_a);
        if (lv > worst) {
            worst = lv;
            result.argmax_vertex = m;
        }
    }
    return result;
}

BoundResult optimize_inverse(const ModelFamily& family, const BoundQuery& query) {
    check_query(family, query);
    const double alpha = query.value;
    const auto theta0 = query.theta0.coords();
    const bool all_zero =
        std::all_of(query.vertices.begin(), query.vertices.end(), [](const auto& v) { return is_zero(v); });
    if (all_zero) return {alpha, kInfiniteQ, 0};
    if (alpha == 0.0) return {0.0, kInfiniteQ, 0};

    const double log_alpha = std::log(alpha);
    // Maximize the vertex minimum by minimizing its negation.
    auto objective = [&](double u) {
        const double w = std::exp(u);
        double tightest = std::numeric_limits<double>::infinity();
        for (const auto& v : query.vertices) tightest = std::min(tightest, log_inverse(family, theta0, v, w, log_alpha));
        return -tightest;
    };
    const auto [u_star, value] = minimize_quasiconvex(objective, qsearch::kLogQMinusOneLo, qsearch::kLogQMinusOneHi);
    const double w_star = std::exp(u_star);

    BoundResult result;
    result.q_star = 1.0 + w_star;
    result.bound = std::exp(std::min(-value, log_alpha));
    double tightest = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < query.vertices.size(); ++m) {
        const double lv = log_inverse(family, theta0, query.vertices[m], w_star, log_alpha);
        if (lv < tightest) {
            tightest = lv;
            result.argmax_vertex = m;
        }
    }
    return result;
}

BoundResult optimize_lower(const ModelFamily& family, const BoundQuery& query) {
    BoundQuery complement = query;
    complement.value = 1.0 - query.value;
    auto result = optimize_forward(family, complement);
    result.bound = std::max(0.0, 1.0 - result.bound);
    return result;
}

double rescale_bounded(double bound_on_unit, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("rescale_bounded: lo must be < hi");
    require_unit(bound_on_unit, "bound_on_unit");
    return lo + (hi - lo) * bound_on_unit;
}

double pinsker_bound(double a, double kl) {
    require_unit(a, "a");
    if (!(kl >= 0.0)) throw std::invalid_argument("pinsker_bound: kl must be >= 0");
    return std::min(1.0, a + std::sqrt(0.5 * kl));
}

double taylor_bound(double a, double grad_dot_v, double hess_sup, double vnorm2) {
    if (!(hess_sup >= 0.0)) throw std::invalid_argument("taylor_bound: hess_sup must be >= 0");
    return std::clamp(a + grad_dot_v + 0.5 * hess_sup * vnorm2, 0.0, 1.0);
}

}  // namespace cse
