#include "dsmle/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "dsmle/inference.hpp"
#include "dsmle/rng.hpp"

namespace dsmle::conditions {

using family::Family;
using likelihood::ObservationSequence;
using observation::ObservationModel;
using systems::MarkovSystem;

namespace {

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

std::vector<double> symbol_marginals(const systems::HiddenModel& hidden) {
    if (hidden.is_markov()) return hidden.markov->pi;
    return {0.5, 0.5};  // doubling map: Lebesgue pushes to the fair coin
}

double first_observation(const Family& fam, const ParameterPoint& theta, std::uint64_t seed) {
    return family::simulate_sequence(fam, theta, 0, seed).values[0];
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    bool blowup = false;
};

MeanSe mean_with_blowup(const std::vector<double>& xs) {
    MeanSe out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    out.se = likelihood::jackknife_se(xs);
    const std::size_t half = xs.size() / 2;
    if (half >= 2) {
        const std::vector<double> first(xs.begin(), xs.begin() + static_cast<long>(half));
        const std::vector<double> second(xs.begin() + static_cast<long>(half), xs.end());
        double a = 0.0, b = 0.0;
        for (double x : first) a += x;
        for (double x : second) b += x;
        a /= static_cast<double>(first.size());
        b /= static_cast<double>(second.size());
        const double se_a = likelihood::jackknife_se(first);
        const double se_b = likelihood::jackknife_se(second);
        const double se_diff = std::sqrt(se_a * se_a + se_b * se_b);
        // Cauchy criterion at 1e-2, guarded against ordinary sampling noise.
        out.blowup = std::fabs(a - b) > 1e-2 && std::fabs(a - b) > 3.0 * se_diff;
    }
    return out;
}

}  // namespace

MixingCertificate psi_mixing_constant(const MarkovSystem& system, int ell) {
    if (ell < 1) throw Error("mixing gap must be at least 1");
    MixingCertificate cert;
    cert.ell = ell;
    const Matrix Pl = system.P.power(static_cast<unsigned>(ell));
    double L = 0.0;
    for (int a = 0; a < system.size(); ++a) {
        for (int b = 0; b < system.size(); ++b) {
            if (Pl(a, b) <= 0.0) return cert;  // not primitive at this gap
            L = std::max(L, Pl(a, b) / system.pi[b]);
        }
    }
    cert.primitive = true;
    cert.L = L;
    return cert;
}

MixingBoundCheck mixing_product_bound_check(const MarkovSystem& system, const ObservationModel& model,
                                            const ParameterPoint& theta, int m, int t, int ell,
                                            const std::vector<std::vector<double>>& y_blocks) {
    if (m < 0 || t < 1 || ell < 1) throw Error("need m >= 0, t >= 1, ell >= 1");
    if (y_blocks.size() != static_cast<std::size_t>(t) + 1) {
        throw Error("expected t+1 observation blocks");
    }
    for (const auto& w : y_blocks) {
        if (w.size() != static_cast<std::size_t>(m) + 1) throw Error("each block must hold m+1 observations");
    }
    const int a = system.size();
    const double hidden_span = static_cast<double>(t) * (m + ell) + m + 1;
    if (std::pow(static_cast<double>(a), hidden_span) > 1e7) {
        throw TooLargeError("hidden span of the block tuple exceeds the enumeration bound");
    }

    MixingBoundCheck out;
    const MixingCertificate cert = psi_mixing_constant(system, ell);
    out.primitive = cert.primitive;
    if (!cert.primitive) return out;
    out.C = *cert.L;

    // LHS = integral of the product of block likelihoods along the orbit,
    // as one transfer-matrix sweep with P^ell bridging the gaps.
    const observation::BoundDensity g(model, theta);
    const Matrix Pl = system.P.power(static_cast<unsigned>(ell));
    std::vector<double> u(a);
    for (int s = 0; s < a; ++s) {
        u[s] = system.pi[s] * g(y_blocks[0][0], s);
    }
    for (int i = 1; i <= m; ++i) {
        u = left_multiply(u, system.P);
        for (int s = 0; s < a; ++s) u[s] *= g(y_blocks[0][static_cast<std::size_t>(i)], s);
    }
    for (int j = 1; j <= t; ++j) {
        u = left_multiply(u, Pl);
        for (int s = 0; s < a; ++s) u[s] *= g(y_blocks[static_cast<std::size_t>(j)][0], s);
        for (int i = 1; i <= m; ++i) {
            u = left_multiply(u, system.P);
            for (int s = 0; s < a; ++s) {
                u[s] *= g(y_blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)], s);
            }
        }
    }
    out.lhs = 0.0;
    for (double v : u) out.lhs += v;

    double rhs = 1.0;
    for (const auto& w : y_blocks) {
        ObservationSequence block;
        block.values = w;
        rhs *= out.C * std::exp(forward_log_likelihood(system, model, theta, block).loglik);
    }
    out.rhs = rhs;
    if (rhs > 0.0) {
        out.ratio = out.lhs / rhs;
        out.pass = out.lhs <= rhs * (1.0 + 1e-12);
    } else {
        out.ratio = out.lhs > 0.0 ? kPosInf : 1.0;
        out.pass = out.lhs == 0.0;
    }
    return out;
}

namespace {

// log Perron root of P(a,b) exp(s f(a,b)), computed with the exponent shifted
// so entries never overflow.
double scaled_log_root(const MarkovSystem& system, const Matrix& f, double s) {
    const int n = system.size();
    double shift = 0.0;
    bool first = true;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (system.P(a, b) <= 0.0) continue;
            const double v = s * f(a, b);
            if (first || v > shift) shift = v, first = false;
        }
    }
    Matrix tilted(n, n, 0.0);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (system.P(a, b) <= 0.0) continue;
            tilted(a, b) = system.P(a, b) * std::exp(s * f(a, b) - shift);
        }
    }
    // Power iteration; the tilted matrix inherits the primitive pattern of P.
    std::vector<double> v(n, 1.0 / n);
    double root = 1.0;
    for (int it = 0; it < 100000; ++it) {
        std::vector<double> w(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += tilted(i, j) * v[j];
            w[i] = acc;
        }
        double sum = 0.0;
        for (double x : w) sum += x;
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            throw EigenFailureError("tilted power iteration failed");
        }
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] /= sum;
            diff = std::max(diff, std::fabs(w[i] - v[i]));
        }
        v = std::move(w);
        root = sum;
        if (diff < 1e-14) break;
    }
    return shift + std::log(root);
}

}  // namespace

LDRateResult ld_rate(const MarkovSystem& system, const Matrix& observable, double delta) {
    if (delta < 0.0) throw Error("delta must be nonnegative");
    if (!system.structure.is_primitive()) {
        throw NonPrimitiveError("large-deviation rates need a primitive system");
    }
    const int n = system.size();
    if (observable.rows() != static_cast<std::size_t>(n) || observable.cols() != static_cast<std::size_t>(n)) {
        throw Error("observable shape does not match the alphabet");
    }

    LDRateResult out;
    LDRateFunction& rate = out.rate;
    rate.observable = observable;

    double mean = 0.0;
    bool first = true;
    double fmin = 0.0, fmax = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (system.P(a, b) <= 0.0) continue;
            const double f = observable(a, b);
            if (!std::isfinite(f)) throw Error("observable not finite on an allowed transition");
            mean += system.pi[a] * system.P(a, b) * f;
            if (first) {
                fmin = fmax = f;
                first = false;
            } else {
                fmin = std::min(fmin, f);
                fmax = std::max(fmax, f);
            }
        }
    }
    rate.mean = mean;
    rate.essential_min = fmin;
    rate.essential_max = fmax;

    const MarkovSystem sys_copy = system;
    const Matrix f_copy = observable;
    // The closure outlives this function, so the boundary flag lives on the
    // heap and is shared with it.
    auto boundary = std::make_shared<bool>(false);
    // Pragmatic bracket [-50, 50]; widened (with the warning flag set) when
    // the maximizer presses against an edge, up to [-200, 200].
    auto evaluate = [sys_copy, f_copy, fmin, fmax, boundary](double target) {
        if (target < fmin - 1e-12 || target > fmax + 1e-12) return kPosInf;
        if (fmax - fmin < 1e-15) return 0.0;  // constant observable, target == mean
        const auto objective = [&](double s) { return s * target - scaled_log_root(sys_copy, f_copy, s); };
        double bracket = 50.0;
        while (true) {
            const auto [s_star, value] = inference::golden_section_max(objective, -bracket, bracket, 1e-10);
            // The maximizer counts as boundary-bound when an edge is as good
            // as the interior optimum; near the essential range the objective
            // flattens out and s_star alone cannot tell.
            const bool at_edge = std::fabs(s_star) >= bracket - 1e-6 ||
                                 objective(-bracket) >= value - 1e-9 ||
                                 objective(bracket) >= value - 1e-9;
            if (!at_edge) return std::max(0.0, value);
            *boundary = true;
            if (bracket >= 200.0) return std::max(0.0, value);
            bracket *= 2.0;
        }
    };
    rate.evaluate = evaluate;

    out.rate_plus = evaluate(mean + delta);
    out.rate_minus = evaluate(mean - delta);
    rate.boundary_warning = *boundary;
    return out;
}

SeparationReport identifiability_separation(const Family& fam, const ParameterPoint& theta0,
                                            const ParameterPoint& theta, long n, int reps,
                                            std::uint64_t seed) {
    if (n < 1 || reps < 1) throw Error("separation needs n >= 1 and reps >= 1");
    SeparationReport rep;
    rep.n_used = n;

    const systems::HiddenModel h0 = fam.hidden(theta0);
    const systems::HiddenModel h1 = fam.hidden(theta);
    if (!h0.is_markov() || !h1.is_markov()) {
        throw UnsupportedVariantError("separation diagnostics need forward likelihoods");
    }
    const auto llr = [&](const ObservationSequence& y) {
        const double l0 = forward_log_likelihood(*h0.markov, fam.observation(), theta0, y).loglik;
        const double l1 = forward_log_likelihood(*h1.markov, fam.observation(), theta, y).loglik;
        return (l0 - l1) / static_cast<double>(n);
    };

    std::vector<double> r(static_cast<std::size_t>(reps));
    bool finite = true;
    for (int i = 0; i < reps; ++i) {
        const ObservationSequence y =
            family::simulate_sequence(fam, theta0, n, rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        r[static_cast<std::size_t>(i)] = llr(y);
        finite = finite && std::isfinite(r[static_cast<std::size_t>(i)]);
    }
    double mean = 0.0;
    for (double v : r) mean += v;
    rep.kl_rate_estimate = mean / static_cast<double>(reps);
    rep.kl_rate_se = finite ? likelihood::jackknife_se(r) : 0.0;
    // The absolute floor catches exactly-equivalent pairs, where both the
    // rate and its standard error sit at rounding level.
    rep.probable_equivalence = std::isfinite(rep.kl_rate_estimate) &&
                               std::fabs(rep.kl_rate_estimate) <= std::max(3.0 * rep.kl_rate_se, 1e-9);

    const double threshold = rep.kl_rate_estimate / 2.0;

    int hits0 = 0;
    for (int i = 0; i < reps; ++i) {
        const ObservationSequence y = family::simulate_sequence(
            fam, theta0, n, rng::derive_seed(seed, 1000000ull + static_cast<std::uint64_t>(i)));
        if (llr(y) >= threshold) ++hits0;
    }
    rep.p_theta0_An = static_cast<double>(hits0) / static_cast<double>(reps);

    std::vector<double> hit_indicator(static_cast<std::size_t>(reps), 0.0);
    int hits1 = 0;
    for (int i = 0; i < reps; ++i) {
        const ObservationSequence y = family::simulate_sequence(
            fam, theta, n, rng::derive_seed(seed, 2000000ull + static_cast<std::uint64_t>(i)));
        if (llr(y) >= threshold) {
            ++hits1;
            hit_indicator[static_cast<std::size_t>(i)] = 1.0;
        }
    }
    if (hits1 > 0) {
        const double p = static_cast<double>(hits1) / static_cast<double>(reps);
        rep.log_rate_theta = std::log(p) / static_cast<double>(n);
        // Delta method through log: se(log p)/n = se(p)/(p n).
        rep.log_rate_theta_se = likelihood::jackknife_se(hit_indicator) / (p * static_cast<double>(n));
    } else {
        rep.zero_hits = true;
        rep.log_rate_theta = std::log(1.0 / static_cast<double>(reps + 1)) / static_cast<double>(n);
        rep.log_rate_theta_se = 0.0;
    }
    return rep;
}

BlockBoundCheck block_parsing_bound_check(const Family& fam,
                                          const std::vector<ParameterPoint>& neighborhood,
                                          const ParameterPoint& theta0, int m, int ell, long n,
                                          std::uint64_t seed, const BlockBoundOptions& opts) {
    if (m < 1 || ell < 0 || n < m) throw Error("need m >= 1, ell >= 0, n >= m");
    if (neighborhood.empty()) throw Error("neighborhood grid must be nonempty");
    if (opts.lhs_reps < 30 || opts.rhs_reps < 30) throw Error("need at least 30 replicates per term");

    struct PerTheta {
        MarkovSystem system;
        ParameterPoint theta;
    };
    std::vector<PerTheta> grid;
    grid.reserve(neighborhood.size());
    for (const ParameterPoint& th : neighborhood) {
        const systems::HiddenModel h = fam.hidden(th);
        if (!h.is_markov()) throw UnsupportedVariantError("block bound needs forward likelihoods");
        grid.push_back({*h.markov, th});
    }
    const ObservationModel& model = fam.observation();

    const auto sup_loglik = [&](const ObservationSequence& y) {
        double best = kNegInf;
        for (const PerTheta& g : grid) {
            best = std::max(best, forward_log_likelihood(g.system, model, g.theta, y).loglik);
        }
        return best;
    };

    BlockBoundCheck out;
    const double q = static_cast<double>(m + ell);

    std::vector<double> lhs(static_cast<std::size_t>(opts.lhs_reps));
    for (int i = 0; i < opts.lhs_reps; ++i) {
        const ObservationSequence y =
            family::simulate_sequence(fam, theta0, n, rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        lhs[static_cast<std::size_t>(i)] = sup_loglik(y) / static_cast<double>(n);
    }
    const MeanSe lhs_ms = mean_with_blowup(lhs);
    out.lhs = lhs_ms.mean;
    out.lhs_se = lhs_ms.se;

    // Blocks carry m observations (m-1 steps); gaps carry ell observations,
    // so consecutive block endpoints are ell+1 transitions apart.
    std::vector<double> block(static_cast<std::size_t>(opts.rhs_reps));
    for (int i = 0; i < opts.rhs_reps; ++i) {
        const ObservationSequence y = family::simulate_sequence(
            fam, theta0, m - 1, rng::derive_seed(seed, 3000000ull + static_cast<std::uint64_t>(i)));
        block[static_cast<std::size_t>(i)] = sup_loglik(y);
    }
    const MeanSe block_ms = mean_with_blowup(block);
    out.block_term = block_ms.mean / q;

    std::vector<double> gam(static_cast<std::size_t>(opts.rhs_reps), 0.0);
    if (ell > 0) {
        for (int i = 0; i < opts.rhs_reps; ++i) {
            const double y0 =
                first_observation(fam, theta0, rng::derive_seed(seed, 6000000ull + static_cast<std::uint64_t>(i)));
            double best = 0.0;
            for (const PerTheta& g : grid) {
                best = std::max(best, log_plus(gamma_sup(model, g.theta, y0)));
            }
            gam[static_cast<std::size_t>(i)] = best;
        }
    }
    const MeanSe gam_ms = mean_with_blowup(gam);
    out.gamma_term = static_cast<double>(ell) * gam_ms.mean / q;

    double sup_log_L = kNegInf;
    for (const PerTheta& g : grid) {
        const MixingCertificate cert = psi_mixing_constant(g.system, ell + 1);
        if (!cert.primitive) {
            throw NonPrimitiveError("mixing constant unavailable on the neighborhood grid");
        }
        sup_log_L = std::max(sup_log_L, std::log(*cert.L));
    }
    out.mixing_term = sup_log_L / q;

    out.rhs = out.block_term + out.gamma_term + out.mixing_term;
    out.rhs_se = std::sqrt(block_ms.se * block_ms.se +
                           static_cast<double>(ell) * static_cast<double>(ell) * gam_ms.se * gam_ms.se) / q;
    const double combined = std::sqrt(out.lhs_se * out.lhs_se + out.rhs_se * out.rhs_se);
    out.pass = out.lhs <= out.rhs + 3.0 * combined;
    return out;
}

IntegrabilityReport integrability_check(const Family& fam, const ParameterPoint& theta0,
                                        const std::vector<ParameterPoint>& neighborhood, int reps,
                                        std::uint64_t seed) {
    if (reps < 100) throw Error("integrability estimates need at least 100 replicates");
    const ObservationModel& model = fam.observation();
    const std::vector<double> pi = symbol_marginals(fam.hidden(theta0));

    std::vector<double> lg(static_cast<std::size_t>(reps));
    std::vector<double> am(static_cast<std::size_t>(reps));
    std::vector<double> sg(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        const double y = first_observation(fam, theta0, rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        lg[static_cast<std::size_t>(i)] = log_plus(gamma_sup(model, theta0, y));
        double marginal = 0.0;
        for (std::size_t s = 0; s < pi.size(); ++s) {
            marginal += pi[s] * density(model, theta0, y, static_cast<int>(s));
        }
        am[static_cast<std::size_t>(i)] = std::fabs(std::log(marginal));
        double best = 0.0;
        for (const ParameterPoint& th : neighborhood) {
            best = std::max(best, log_plus(gamma_sup(model, th, y)));
        }
        sg[static_cast<std::size_t>(i)] = best;
    }

    IntegrabilityReport rep;
    const MeanSe a = mean_with_blowup(lg);
    const MeanSe b = mean_with_blowup(am);
    const MeanSe c = mean_with_blowup(sg);
    rep.log_plus_gamma_theta0 = {a.mean, a.se, a.blowup};
    rep.abs_log_marginal = {b.mean, b.se, b.blowup};
    rep.sup_log_plus_gamma = {c.mean, c.se, c.blowup};
    return rep;
}

ContinuityScan continuity_scan(const Family& fam, const ObservationSequence& y, const ParameterBox& box,
                               const std::vector<int>& resolution, double flag_ratio) {
    const std::size_t d = box.dimension();
    if (d < 1 || d > 2) throw Error("continuity scan supports 1-d and 2-d grids");
    if (resolution.size() != d) throw Error("resolution must give one count per dimension");

    std::vector<int> fine_res(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (resolution[i] < 3) throw Error("continuity scan needs at least 3 points per dimension");
        fine_res[i] = 2 * resolution[i] - 1;
    }

    inference::GridOptions gopts;
    const inference::LogLikelihoodSurface fine = inference::grid_mle(fam, y, box, fine_res, gopts);

    const auto value_at = [&](const std::vector<int>& idx) {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < d; ++i) {
            flat = flat * static_cast<std::size_t>(fine_res[i]) + static_cast<std::size_t>(idx[i]);
        }
        return fine.points[flat].value;
    };

    const auto max_jump = [&](int stride) {
        double jump = 0.0;
        std::vector<int> idx(d, 0);
        while (true) {
            for (std::size_t axis = 0; axis < d; ++axis) {
                if (idx[axis] + stride < fine_res[axis]) {
                    std::vector<int> nb = idx;
                    nb[axis] += stride;
                    const double va = value_at(idx);
                    const double vb = value_at(nb);
                    double j;
                    if (va == kNegInf && vb == kNegInf) {
                        j = 0.0;
                    } else if (va == kNegInf || vb == kNegInf) {
                        j = kPosInf;
                    } else {
                        j = std::fabs(va - vb);
                    }
                    jump = std::max(jump, j);
                }
            }
            // advance idx on the stride-aligned lattice
            std::size_t axis = 0;
            while (axis < d) {
                idx[axis] += stride;
                if (idx[axis] < fine_res[axis]) break;
                idx[axis] = 0;
                ++axis;
            }
            if (axis == d) break;
        }
        return jump;
    };

    ContinuityScan scan;
    scan.max_jump_coarse = max_jump(2);
    scan.max_jump_fine = max_jump(1);
    if (scan.max_jump_coarse == 0.0 && scan.max_jump_fine == 0.0) {
        scan.ratio = 0.0;
        scan.flagged = false;
    } else if (scan.max_jump_coarse == 0.0 || scan.max_jump_fine == kPosInf) {
        scan.ratio = kPosInf;
        scan.flagged = true;
    } else {
        scan.ratio = scan.max_jump_fine / scan.max_jump_coarse;
        scan.flagged = scan.ratio > flag_ratio;
    }
    return scan;
}

ErgodicityDiagnostic ergodicity_diagnostic(const Family& fam, const ParameterPoint& theta0,
                                           const std::vector<long>& lags, long n, std::uint64_t seed) {
    if (n < 10) throw Error("ergodicity diagnostic needs a longer series");
    if (lags.empty()) throw Error("lag list must be nonempty");
    long max_lag = 0;
    for (long l : lags) {
        if (l < 0) throw Error("lags must be nonnegative");
        max_lag = std::max(max_lag, l);
    }

    const ObservationSequence y = family::simulate_sequence(fam, theta0, n + max_lag, seed);

    // Lower empirical median as the half-space threshold, backed off to the
    // next smaller value when the median equals the maximum (otherwise the
    // event {y <= tau} is the whole space, e.g. for binary observations).
    std::vector<double> sorted = y.values;
    std::sort(sorted.begin(), sorted.end());
    double tau = sorted[(sorted.size() - 1) / 2];
    if (tau >= sorted.back()) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), sorted.back());
        if (below != sorted.begin()) tau = *(below - 1);
    }

    ErgodicityDiagnostic diag;
    diag.threshold = tau;

    double marginal = 0.0;
    for (long t = 0; t < n; ++t) marginal += y.values[static_cast<std::size_t>(t)] <= tau ? 1.0 : 0.0;
    marginal /= static_cast<double>(n);
    diag.marginal = marginal;

    std::vector<double> joint(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (long k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (long t = 0; t < n; ++t) {
            const bool a = y.values[static_cast<std::size_t>(t)] <= tau;
            const bool b = y.values[static_cast<std::size_t>(t + k)] <= tau;
            if (a && b) acc += 1.0;
        }
        joint[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
    }
    // Cesaro averages start at lag 1; the lag-0 term is the marginal itself
    // and would only add a 1/L transient.
    std::vector<double> cesaro(joint.size());
    cesaro[0] = joint[0];
    double run = 0.0;
    for (std::size_t k = 1; k < joint.size(); ++k) {
        run += joint[k];
        cesaro[k] = run / static_cast<double>(k);
    }

    const double product = marginal * marginal;
    for (long l : lags) {
        ErgodicityRow row;
        row.lag = l;
        row.joint = joint[static_cast<std::size_t>(l)];
        row.cesaro = cesaro[static_cast<std::size_t>(l)];
        row.gap = std::fabs(row.cesaro - product);
        diag.max_gap = std::max(diag.max_gap, row.gap);
        diag.rows.push_back(row);
    }
    return diag;
}

}  // namespace dsmle::conditions
