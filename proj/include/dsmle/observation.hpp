#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsmle/rng.hpp"
#include "dsmle/types.hpp"

namespace dsmle::observation {

enum class ObsKind { DiscreteChannel, Gaussian, Laplace };

/// Constants of the observation-regularity bound
///   g(y|x) <= g(y|z) * exp(K(theta,y) * d(x,z)),  K(theta,y) = C6*(C4 + C5*|y|),
/// for the shift metric d(x,z) = beta^(first disagreement).
struct RegularityConstants {
    double C4 = 0.0;
    double C5 = 0.0;
    double C6 = 0.0;
    double beta = 0.5;
};

/// Observation density g_theta(y | current symbol) together with its sampler.
/// All shipped variants depend on the hidden state only through the current
/// symbol, which keeps the envelope gamma exact and the marginal likelihood a
/// finite-state forward computation.
class ObservationModel {
  public:
    using ChannelFn = std::function<Matrix(const ParameterPoint&)>;
    using MeansFn = std::function<std::vector<double>(const ParameterPoint&)>;
    using ScaleFn = std::function<double(const ParameterPoint&)>;

    static ObservationModel discrete_channel(std::string name, int symbols, int y_count, ChannelFn fn);
    static ObservationModel discrete_channel(std::string name, const Matrix& fixed);
    static ObservationModel gaussian(std::string name, int symbols, MeansFn means, ScaleFn sigma);
    static ObservationModel gaussian(std::string name, std::vector<double> means, double sigma);
    static ObservationModel laplace(std::string name, int symbols, MeansFn means, ScaleFn scale);
    static ObservationModel laplace(std::string name, std::vector<double> means, double scale);

    ObsKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    int symbol_count() const { return symbols_; }
    int y_count() const { return y_count_; }
    bool integer_valued() const { return kind_ == ObsKind::DiscreteChannel; }

    /// Channel matrix at theta; rows are validated to sum to 1 within 1e-12.
    Matrix channel_matrix(const ParameterPoint& theta) const;
    std::vector<double> means(const ParameterPoint& theta) const;
    double scale(const ParameterPoint& theta) const;

    /// Copy with every density multiplied by exp(c); represents rescaling the
    /// reference measure. Diagnostic use only (argmax invariance checks).
    ObservationModel with_log_reference_scale(double c) const;
    double log_reference_scale() const { return log_ref_scale_; }

  private:
    ObservationModel() = default;

    ObsKind kind_ = ObsKind::Gaussian;
    std::string name_;
    int symbols_ = 0;
    int y_count_ = 0;
    ChannelFn channel_;
    MeansFn means_;
    ScaleFn scale_;
    double log_ref_scale_ = 0.0;
};

/// g_theta(y | a). Strictly positive for Gaussian/Laplace; may be 0 for a
/// discrete channel.
double density(const ObservationModel& model, const ParameterPoint& theta, double y, int symbol);

/// Model bound at one parameter point: resolves the theta-dependent pieces
/// once so the forward recursion and transfer sweeps can evaluate densities
/// in a tight loop.
class BoundDensity {
  public:
    BoundDensity(const ObservationModel& model, const ParameterPoint& theta);

    double operator()(double y, int symbol) const;
    int symbol_count() const { return static_cast<int>(means_.size()); }

  private:
    ObsKind kind_;
    Matrix channel_;
    std::vector<double> means_;
    double scale_ = 1.0;
    double norm_ = 1.0;  // reference scale / density prefactor
};

/// Draw from g_theta(. | a); deterministic given the seed.
double sample(const ObservationModel& model, const ParameterPoint& theta, int symbol, std::uint64_t seed);
double sample(const ObservationModel& model, const ParameterPoint& theta, int symbol, rng::Engine& eng);

/// gamma_theta(y) = max over symbols of g_theta(y | a); exact because the
/// symbol set is finite.
double gamma_sup(const ObservationModel& model, const ParameterPoint& theta, double y);

/// Regularity constants of the model at theta (beta fixed at 1/2).
RegularityConstants regularity_constants(const ObservationModel& model, const ParameterPoint& theta);

/// K(theta, y) = C6 * (C4 + C5 * |y|).
double lipschitz_K(const RegularityConstants& c, double y);

/// K for the model at theta. Discrete channels are locally constant in the
/// hidden point and get K = 0.
double lipschitz_K(const ObservationModel& model, const ParameterPoint& theta, double y);

}  // namespace dsmle::observation
