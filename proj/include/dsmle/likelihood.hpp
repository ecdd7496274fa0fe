#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsmle/observation.hpp"
#include "dsmle/systems.hpp"
#include "dsmle/types.hpp"

namespace dsmle::likelihood {

/// Observed data y_0^n (n+1 values) plus generation metadata.
struct ObservationSequence {
    std::vector<double> values;
    std::string model_name;
    std::optional<ParameterPoint> theta0;
    std::optional<std::uint64_t> seed;

    long steps() const { return static_cast<long>(values.size()) - 1; }  // the n in y_0^n
};

enum class LikelihoodMethod { Forward, MonteCarlo, BruteForce };

/// log p_theta(y_0^n), natural log. Zero likelihood is a value (-inf with the
/// flag set), not an error: grid search must rank such parameters last rather
/// than abort.
struct LogLikelihoodResult {
    double loglik = kNegInf;
    LikelihoodMethod method = LikelihoodMethod::Forward;
    std::optional<double> mc_std_error;  // present iff method == MonteCarlo
    bool zero_likelihood = false;
    bool degenerate_weights = false;  // MC effective sample size < 2
};

/// Scaled forward recursion: alpha_{k+1} = (alpha_k P) .* g(y_{k+1}|.), with
/// per-step renormalization and log-accumulated scales. No underflow for any
/// realistic n.
LogLikelihoodResult forward_log_likelihood(const systems::MarkovSystem& system,
                                           const observation::ObservationModel& model,
                                           const ParameterPoint& theta,
                                           const ObservationSequence& y);

/// Direct sum over all |A|^(n+1) hidden paths. Test oracle; TooLargeError
/// when the path count exceeds 1e7.
LogLikelihoodResult brute_force_log_likelihood(const systems::MarkovSystem& system,
                                               const observation::ObservationModel& model,
                                               const ParameterPoint& theta,
                                               const ObservationSequence& y);

/// Monte Carlo marginalization over x ~ mu_theta with log-mean-exp
/// aggregation and a jackknife standard error. Works for both Markov systems
/// and coded maps; per-sample seeds are derived from (seed, sample index).
LogLikelihoodResult mc_log_likelihood(const systems::HiddenModel& hidden,
                                      const observation::ObservationModel& model,
                                      const ParameterPoint& theta,
                                      const ObservationSequence& y,
                                      int num_samples,
                                      std::uint64_t seed);

struct EntropyRateEstimate {
    double h_hat = 0.0;
    std::vector<double> per_rep;
};

/// Mean over replicates of (1/n) * forward log-likelihood on freshly
/// simulated data from theta0; the almost-sure limit of this quantity is the
/// entropy rate of the observation process.
EntropyRateEstimate entropy_rate_estimate(const systems::MarkovSystem& system,
                                          const observation::ObservationModel& model,
                                          const ParameterPoint& theta0,
                                          long n,
                                          int reps,
                                          std::uint64_t seed);

/// Simulate y_0^n from a Markov system under theta: hidden trajectory from
/// derive_seed(seed, 0), observations from derive_seed(seed, 1).
ObservationSequence simulate_markov_sequence(const systems::MarkovSystem& system,
                                             const observation::ObservationModel& model,
                                             const ParameterPoint& theta,
                                             long n,
                                             std::uint64_t seed);

/// Jackknife standard error of the mean of a sample.
double jackknife_se(const std::vector<double>& sample);

}  // namespace dsmle::likelihood
