#pragma once
#include <cse/random.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace cse {

/*
 * A point in natural-parameter space. Every coordinate is finite.
 * Displacements (tile corners minus a simulation point) are plain
 * coordinate vectors and are passed as spans.
 */
class ParamPoint {
   public:
    ParamPoint() = default;
    explicit ParamPoint(std::vector<double> coords);
    ParamPoint(std::initializer_list<double> coords) : ParamPoint(std::vector<double>(coords)) {}

    std::size_t dim() const { return coords_.size(); }
    std::span<const double> coords() const { return coords_; }
    double operator[](std::size_t i) const { return coords_[i]; }
    auto begin() const { return coords_.begin(); }
    auto end() const { return coords_.end(); }

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;

   private:
    std::vector<double> coords_;
};

using Displacement = std::vector<double>;

// Unit-variance normal location family in d dimensions, A(theta) = |theta|^2 / 2.
struct NormalLocation {
    std::size_t dim;
};

// Independent Binomial(n_i, sigmoid(theta_i)) arms, observed as n_i Bernoulli rows each.
struct BernoulliArms {
    std::vector<std::int64_t> arm_sizes;
};

// Bernoulli responses with logit x_j^T theta; covariates stored row-major (n x d).
struct CanonicalGLM {
    std::size_t n_rows;
    std::size_t dim;
    std::vector<double> covariates;
};

enum class FamilyKind { normal, bernoulli, glm };

std::string_view to_string(FamilyKind kind);

/*
 * Simulated outcome for one simulation index.
 *
 * `sufficient` always holds T(X): the normal draw itself, per-arm
 * success counts, or X^T y for the GLM. `rows` holds the raw binary
 * columns (one per arm, or the single response column for the GLM)
 * and is only filled when a design asks for raw rows.
 */
struct OutcomeMatrix {
    FamilyKind kind = FamilyKind::normal;
    std::vector<double> sufficient;
    std::vector<std::vector<std::uint8_t>> rows;
};

class ModelFamily {
   public:
    using Spec = std::variant<NormalLocation, BernoulliArms, CanonicalGLM>;

    explicit ModelFamily(Spec spec);

    static ModelFamily normal(std::size_t dim) { return ModelFamily(NormalLocation{dim}); }
    static ModelFamily bernoulli(std::vector<std::int64_t> arm_sizes) {
        return ModelFamily(BernoulliArms{std::move(arm_sizes)});
    }
    static ModelFamily glm(std::size_t n_rows, std::size_t dim, std::vector<double> covariates) {
        return ModelFamily(CanonicalGLM{n_rows, dim, std::move(covariates)});
    }

    std::size_t dim() const { return dim_; }
    FamilyKind kind() const;
    const Spec& spec() const { return spec_; }

    double log_partition(std::span<const double> theta) const;

    // A(theta + h) - A(theta), evaluated without forming the two terms when h is small.
    double log_partition_increment(std::span<const double> theta, std::span<const double> h) const;

    // Gradient of A, i.e. E_theta[T(X)].
    std::vector<double> mean_sufficient(std::span<const double> theta) const;

    /*
     * Draws X ~ P_theta from `stream` into `out`, reusing its buffers.
     * Normal: X = theta + Z with Z_i the stream's i-th normal.
     * Bernoulli/GLM: row j of arm i is 1{U < p} with U the stream's
     * next uniform, arms in order. Both are common-random-number
     * couplings across theta.
     */
    void sample(std::span<const double> theta, RandomStream& stream, OutcomeMatrix& out, bool raw_rows) const;

    void check_dim(std::span<const double> theta) const;

   private:
    Spec spec_;
    std::size_t dim_;
};

double log_partition(const ModelFamily& family, std::span<const double> theta);

// psi(theta0, v, q) = log E_theta0[exp(q T(X)^T v)] = A(theta0 + q v) - A(theta0).
double psi(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q);

// Renyi divergence D_q(P_{theta0+v} || P_theta0) for q > 1.
double renyi_divergence(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v,
                        double q);

OutcomeMatrix sample_outcomes(const ModelFamily& family, std::span<const double> theta, RandomStream stream,
                              bool raw_rows = true);

}  // namespace cse
