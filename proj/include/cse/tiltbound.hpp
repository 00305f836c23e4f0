#pragma once
#include <cse/model.hpp>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace cse {

inline constexpr double kInfiniteQ = std::numeric_limits<double>::infinity();

/*
 * A tile-level bound problem: the simulation point, the tile's vertex
 * displacements from it, and the value being extended (f(theta0) for
 * the forward bound, the target alpha for the inverse).
 */
struct BoundQuery {
    ParamPoint theta0;
    std::vector<Displacement> vertices;
    double value = 0.0;
};

struct BoundResult {
    double bound = 0.0;
    double q_star = 1.0;  // kInfiniteQ when every vertex displacement is zero
    std::size_t argmax_vertex = 0;
};

/*
 * Exponent of the Tilt-Bound: psi(q)/q - psi(1) >= 0.
 * For exponential families this is the curvature term
 * (A(theta0 + q v) - A(theta0)) / q - (A(theta0 + v) - A(theta0)).
 */
double tilt_exponent(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q);

// a^{1-1/q} exp(psi(q)/q - psi(1)), clamped to [0, 1]. a = 0 gives 0.
double forward_bound(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q,
                     double a);

// Inverse of forward_bound in its value argument: [alpha exp(-psi(q)/q + psi(1))]^{q/(q-1)}.
double inverse_bound(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q,
                     double alpha);

// 1 - (1-a)^{1-1/q} exp(psi(q)/q - psi(1)), clamped below at 0.
double lower_bound(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q,
                   double a);

/*
 * inf over q in [1, inf] of max over vertices of forward_bound.
 *
 * The vertex maximum is exact for hyperrectangles since the bound is
 * quasi-convex in v; the q search is a bracketing scan followed by
 * golden section in log(q - 1), valid because the max over vertices is
 * quasi-convex in q.
 */
BoundResult optimize_forward(const ModelFamily& family, const BoundQuery& query);

// sup over q > 1 of min over vertices of inverse_bound: the tile's calibration target.
BoundResult optimize_inverse(const ModelFamily& family, const BoundQuery& query);

// Tilewise lower bound: 1 - optimize_forward applied to 1 - a.
BoundResult optimize_lower(const ModelFamily& family, const BoundQuery& query);

double rescale_bounded(double bound_on_unit, double lo, double hi);

double pinsker_bound(double a, double kl);

double taylor_bound(double a, double grad_dot_v, double hess_sup, double vnorm2);

namespace qsearch {
// Search box for u = log(q - 1).
inline constexpr double kLogQMinusOneLo = -13.815510557964274;  // log 1e-6
inline constexpr double kLogQMinusOneHi = 16.11809565095832;    // log 1e7
inline constexpr int kMaxIterations = 200;
inline constexpr double kRelTol = 1e-10;
}  // namespace qsearch

}  // namespace cse
