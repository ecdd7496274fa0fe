#include "dsmle/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "dsmle/rng.hpp"

namespace dsmle::likelihood {

using observation::ObservationModel;
using systems::HiddenModel;
using systems::MarkovSystem;

LogLikelihoodResult forward_log_likelihood(const MarkovSystem& system, const ObservationModel& model,
                                           const ParameterPoint& theta, const ObservationSequence& y) {
    if (y.values.empty()) throw Error("observation sequence must contain at least one value");
    if (model.symbol_count() != system.size()) {
        throw Error("observation model and system disagree on the alphabet");
    }
    const int a = system.size();
    LogLikelihoodResult out;
    out.method = LikelihoodMethod::Forward;

    const observation::BoundDensity g(model, theta);
    std::vector<double> alpha(a), next(a);
    double log_scale = 0.0;

    double c0 = 0.0;
    for (int s = 0; s < a; ++s) {
        alpha[s] = system.pi[s] * g(y.values[0], s);
        c0 += alpha[s];
    }
    if (c0 <= 0.0) {
        out.loglik = kNegInf;
        out.zero_likelihood = true;
        return out;
    }
    for (int s = 0; s < a; ++s) alpha[s] /= c0;
    log_scale += std::log(c0);

    for (std::size_t k = 1; k < y.values.size(); ++k) {
        double ck = 0.0;
        for (int b = 0; b < a; ++b) {
            double acc = 0.0;
            for (int s = 0; s < a; ++s) acc += alpha[s] * system.P(s, b);
            acc *= g(y.values[k], b);
            next[b] = acc;
            ck += acc;
        }
        if (ck <= 0.0) {
            out.loglik = kNegInf;
            out.zero_likelihood = true;
            return out;
        }
        for (int b = 0; b < a; ++b) alpha[b] = next[b] / ck;
        log_scale += std::log(ck);
    }
    out.loglik = log_scale;
    return out;
}

LogLikelihoodResult brute_force_log_likelihood(const MarkovSystem& system, const ObservationModel& model,
                                               const ParameterPoint& theta, const ObservationSequence& y) {
    if (y.values.empty()) throw Error("observation sequence must contain at least one value");
    const int a = system.size();
    const std::size_t len = y.values.size();
    double paths = 1.0;
    for (std::size_t i = 0; i < len; ++i) {
        paths *= a;
        if (paths > 1e7) throw TooLargeError("path enumeration exceeds 1e7 hidden paths");
    }

    // Cache the observation densities once per (time, symbol).
    const observation::BoundDensity bound(model, theta);
    std::vector<double> g(len * a);
    for (std::size_t k = 0; k < len; ++k) {
        for (int s = 0; s < a; ++s) g[k * a + s] = bound(y.values[k], s);
    }

    std::vector<int> path(len, 0);
    double total = 0.0;
    while (true) {
        double w = system.pi[path[0]] * g[0 * a + path[0]];
        for (std::size_t k = 1; k < len && w > 0.0; ++k) {
            w *= system.P(path[k - 1], path[k]) * g[k * a + path[k]];
        }
        total += w;
        std::size_t pos = 0;
        while (pos < len && ++path[pos] == a) path[pos++] = 0;
        if (pos == len) break;
    }

    LogLikelihoodResult out;
    out.method = LikelihoodMethod::BruteForce;
    if (total <= 0.0) {
        out.loglik = kNegInf;
        out.zero_likelihood = true;
    } else {
        out.loglik = std::log(total);
    }
    return out;
}

namespace {

// Log conditional likelihood of y given one sampled hidden trajectory.
double conditional_log_weight(const HiddenModel& hidden, const observation::BoundDensity& g,
                              const ObservationSequence& y, std::uint64_t seed) {
    const std::size_t len = y.values.size();
    double w = 0.0;
    if (hidden.is_markov()) {
        const std::vector<int> x = systems::sample_trajectory(*hidden.markov, y.steps(), seed);
        for (std::size_t k = 0; k < len; ++k) {
            const double gv = g(y.values[k], x[k]);
            if (gv <= 0.0) return kNegInf;
            w += std::log(gv);
        }
        return w;
    }
    const systems::CodedMap& map = *hidden.coded;
    if (static_cast<long>(len) > map.coding_depth) {
        throw DepthExceededError("sequence longer than the coding depth of the map");
    }
    rng::Engine eng(seed);
    double x = eng.next_unit();
    for (std::size_t k = 0; k < len; ++k) {
        const int symbol = x < 0.5 ? 0 : 1;
        const double gv = g(y.values[k], symbol);
        if (gv <= 0.0) return kNegInf;
        w += std::log(gv);
        x = systems::doubling_step(x);
    }
    return w;
}

}  // namespace

LogLikelihoodResult mc_log_likelihood(const HiddenModel& hidden, const ObservationModel& model,
                                      const ParameterPoint& theta, const ObservationSequence& y,
                                      int num_samples, std::uint64_t seed) {
    if (num_samples < 2) throw Error("Monte Carlo needs at least 2 samples");
    const std::size_t n = static_cast<std::size_t>(num_samples);

    const observation::BoundDensity g(model, theta);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = conditional_log_weight(hidden, g, y, rng::derive_seed(seed, i));
    }

    LogLikelihoodResult out;
    out.method = LikelihoodMethod::MonteCarlo;

    const double wmax = *std::max_element(w.begin(), w.end());
    if (wmax == kNegInf) {
        out.loglik = kNegInf;
        out.zero_likelihood = true;
        out.degenerate_weights = true;
        out.mc_std_error = kPosInf;
        return out;
    }
    std::vector<double> e(n);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(w[i] - wmax);
        sum += e[i];
        sum_sq += e[i] * e[i];
    }
    out.loglik = wmax + std::log(sum / static_cast<double>(n));

    const double ess = sum * sum / sum_sq;
    if (ess < 2.0) out.degenerate_weights = true;

    // Jackknife over the log-mean-exp estimator via leave-one-out sums.
    std::vector<double> loo(n);
    double loo_mean = 0.0;
    bool loo_finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double rest = sum - e[i];
        if (rest <= 0.0) {
            loo_finite = false;
            break;
        }
        loo[i] = wmax + std::log(rest / static_cast<double>(n - 1));
        loo_mean += loo[i];
    }
    if (!loo_finite) {
        out.mc_std_error = kPosInf;
        out.degenerate_weights = true;
        return out;
    }
    loo_mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = loo[i] - loo_mean;
        var += d * d;
    }
    out.mc_std_error = std::sqrt(var * static_cast<double>(n - 1) / static_cast<double>(n));
    return out;
}

ObservationSequence simulate_markov_sequence(const MarkovSystem& system, const ObservationModel& model,
                                             const ParameterPoint& theta, long n, std::uint64_t seed) {
    const std::vector<int> x = systems::sample_trajectory(system, n, rng::derive_seed(seed, 0));
    rng::Engine obs_eng(rng::derive_seed(seed, 1));
    ObservationSequence seq;
    seq.values.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        seq.values[k] = sample(model, theta, x[k], obs_eng);
    }
    seq.model_name = model.name();
    seq.theta0 = theta;
    seq.seed = seed;
    return seq;
}

EntropyRateEstimate entropy_rate_estimate(const MarkovSystem& system, const ObservationModel& model,
                                          const ParameterPoint& theta0, long n, int reps,
                                          std::uint64_t seed) {
    if (n < 1 || reps < 1) throw Error("entropy rate estimation needs n >= 1 and reps >= 1");
    EntropyRateEstimate est;
    est.per_rep.resize(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const ObservationSequence y =
            simulate_markov_sequence(system, model, theta0, n, rng::derive_seed(seed, static_cast<std::uint64_t>(r)));
        const LogLikelihoodResult ll = forward_log_likelihood(system, model, theta0, y);
        est.per_rep[static_cast<std::size_t>(r)] = ll.loglik / static_cast<double>(n);
    }
    double mean = 0.0;
    for (double v : est.per_rep) mean += v;
    est.h_hat = mean / static_cast<double>(reps);
    return est;
}

double jackknife_se(const std::vector<double>& sample) {
    const std::size_t n = sample.size();
    if (n < 2) return 0.0;
    // For the plain mean the jackknife reduces to sd/sqrt(n).
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : sample) {
        const double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

}  // namespace dsmle::likelihood
