#include <cse/model.hpp>
#include <cse/special.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace cse {

ParamPoint::ParamPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    for (double c : coords_) {
        if (!std::isfinite(c)) throw std::invalid_argument("ParamPoint: non-finite coordinate");
    }
}

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::normal:
            return "normal";
        case FamilyKind::bernoulli:
            return "bernoulli";
        case FamilyKind::glm:
            return "glm";
    }
    return "unknown";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double row_dot(const CanonicalGLM& g, std::size_t row, std::span<const double> theta) {
    double s = 0.0;
    const double* x = g.covariates.data() + row * g.dim;
    for (std::size_t i = 0; i < g.dim; ++i) s += x[i] * theta[i];
    return s;
}

}  // namespace

ModelFamily::ModelFamily(Spec spec) : spec_(std::move(spec)) {
    dim_ = std::visit(overloaded{
                          [](const NormalLocation& n) {
                              if (n.dim == 0) throw std::invalid_argument("NormalLocation: dim must be positive");
                              return n.dim;
                          },
                          [](const BernoulliArms& b) {
                              if (b.arm_sizes.empty()) throw std::invalid_argument("BernoulliArms: no arms");
                              for (auto n : b.arm_sizes) {
                                  if (n <= 0) throw std::invalid_argument("BernoulliArms: arm sizes must be positive");
                              }
                              return b.arm_sizes.size();
                          },
                          [](const CanonicalGLM& g) {
                              if (g.dim == 0 || g.n_rows == 0) throw std::invalid_argument("CanonicalGLM: empty design");
                              if (g.covariates.size() != g.n_rows * g.dim) {
                                  throw std::invalid_argument("CanonicalGLM: covariate matrix is not n x d");
                              }
                              for (double x : g.covariates) {
                                  if (!std::isfinite(x)) throw std::invalid_argument("CanonicalGLM: non-finite covariate");
                              }
                              return g.dim;
                          },
                      },
                      spec_);
}

FamilyKind ModelFamily::kind() const {
    return std::visit(overloaded{
                          [](const NormalLocation&) { return FamilyKind::normal; },
                          [](const BernoulliArms&) { return FamilyKind::bernoulli; },
                          [](const CanonicalGLM&) { return FamilyKind::glm; },
                      },
                      spec_);
}

void ModelFamily::check_dim(std::span<const double> theta) const {
    if (theta.size() != dim_) {
        throw std::invalid_argument("dimension mismatch: family has d=" + std::to_string(dim_) + ", got " +
                                    std::to_string(theta.size()));
    }
}

double ModelFamily::log_partition(std::span<const double> theta) const {
    check_dim(theta);
    return std::visit(overloaded{
                          [&](const NormalLocation&) {
                              double s = 0.0;
                              for (double t : theta) s += 0.5 * t * t;
                              return s;
                          },
                          [&](const BernoulliArms& b) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < dim_; ++i) {
                                  s += static_cast<double>(b.arm_sizes[i]) * softplus(theta[i]);
                              }
                              return s;
                          },
                          [&](const CanonicalGLM& g) {
                              double s = 0.0;
                              for (std::size_t j = 0; j < g.n_rows; ++j) s += softplus(row_dot(g, j, theta));
                              return s;
                          },
                      },
                      spec_);
}

double ModelFamily::log_partition_increment(std::span<const double> theta, std::span<const double> h) const {
    check_dim(theta);
    check_dim(h);
    return std::visit(overloaded{
                          [&](const NormalLocation&) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < dim_; ++i) s += h[i] * (theta[i] + 0.5 * h[i]);
                              return s;
                          },
                          [&](const BernoulliArms& b) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < dim_; ++i) {
                                  if (h[i] == 0.0) continue;
                                  s += static_cast<double>(b.arm_sizes[i]) * softplus_increment(theta[i], h[i]);
                              }
                              return s;
                          },
                          [&](const CanonicalGLM& g) {
                              double s = 0.0;
                              for (std::size_t j = 0; j < g.n_rows; ++j) {
                                  s += softplus_increment(row_dot(g, j, theta), row_dot(g, j, h));
                              }
                              return s;
                          },
                      },
                      spec_);
}

std::vector<double> ModelFamily::mean_sufficient(std::span<const double> theta) const {
    check_dim(theta);
    std::vector<double> mean(dim_, 0.0);
    std::visit(overloaded{
                   [&](const NormalLocation&) {
                       for (std::size_t i = 0; i < dim_; ++i) mean[i] = theta[i];
                   },
                   [&](const BernoulliArms& b) {
                       for (std::size_t i = 0; i < dim_; ++i) {
                           mean[i] = static_cast<double>(b.arm_sizes[i]) * sigmoid(theta[i]);
                       }
                   },
                   [&](const CanonicalGLM& g) {
                       for (std::size_t j = 0; j < g.n_rows; ++j) {
                           const double p = sigmoid(row_dot(g, j, theta));
                           for (std::size_t i = 0; i < dim_; ++i) mean[i] += g.covariates[j * dim_ + i] * p;
                       }
                   },
               },
               spec_);
    return mean;
}

void ModelFamily::sample(std::span<const double> theta, RandomStream& stream, OutcomeMatrix& out,
                         bool raw_rows) const {
    check_dim(theta);
    out.kind = kind();
    std::visit(overloaded{
                   [&](const NormalLocation&) {
                       out.sufficient.resize(dim_);
                       out.rows.clear();
                       for (std::size_t i = 0; i < dim_; ++i) out.sufficient[i] = theta[i] + stream.normal();
                   },
                   [&](const BernoulliArms& b) {
                       out.sufficient.assign(dim_, 0.0);
                       if (raw_rows) {
                           out.rows.resize(dim_);
                       } else {
                           out.rows.clear();
                       }
                       for (std::size_t i = 0; i < dim_; ++i) {
                           const double p = sigmoid(theta[i]);
                           const auto n = static_cast<std::size_t>(b.arm_sizes[i]);
                           std::int64_t successes = 0;
                           if (raw_rows) {
                               auto& col = out.rows[i];
                               col.resize(n);
                               for (std::size_t j = 0; j < n; ++j) {
                                   col[j] = stream.uniform() < p ? 1 : 0;
                                   successes += col[j];
                               }
                           } else {
                               for (std::size_t j = 0; j < n; ++j) successes += stream.uniform() < p ? 1 : 0;
                           }
                           out.sufficient[i] = static_cast<double>(successes);
                       }
                   },
                   [&](const CanonicalGLM& g) {
                       out.sufficient.assign(dim_, 0.0);
                       if (raw_rows) {
                           out.rows.resize(1);
                           out.rows[0].resize(g.n_rows);
                       } else {
                           out.rows.clear();
                       }
                       for (std::size_t j = 0; j < g.n_rows; ++j) {
                           const std::uint8_t y = stream.uniform() < sigmoid(row_dot(g, j, theta)) ? 1 : 0;
                           if (raw_rows) out.rows[0][j] = y;
                           if (y) {
                               for (std::size_t i = 0; i < dim_; ++i) out.sufficient[i] += g.covariates[j * dim_ + i];
                           }
                       }
                   },
               },
               spec_);
}

double log_partition(const ModelFamily& family, std::span<const double> theta) {
    return family.log_partition(theta);
}

double psi(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v, double q) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("psi: q must be finite and >= 1");
    family.check_dim(v);
    std::vector<double> h(v.begin(), v.end());
    for (double& x : h) x *= q;
    return family.log_partition_increment(theta0, h);
}

double renyi_divergence(const ModelFamily& family, std::span<const double> theta0, std::span<const double> v,
                        double q) {
    if (!(q > 1.0) || !std::isfinite(q)) throw std::invalid_argument("renyi_divergence: q must be finite and > 1");
    return (psi(family, theta0, v, q) - q * psi(family, theta0, v, 1.0)) / (q - 1.0);
}

OutcomeMatrix sample_outcomes(const ModelFamily& family, std::span<const double> theta, RandomStream stream,
                              bool raw_rows) {
    OutcomeMatrix out;
    family.sample(theta, stream, out, raw_rows);
    return out;
}

}  // namespace cse
