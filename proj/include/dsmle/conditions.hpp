#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dsmle/family.hpp"
#include "dsmle/likelihood.hpp"
#include "dsmle/systems.hpp"
#include "dsmle/types.hpp"

namespace dsmle::conditions {

/// psi-mixing certificate for the cylinder partition:
/// mu(A cap T^{-(m+ell)} B) <= L * mu(A) * mu(B) with
/// L = max_{a,b} P^ell(a,b) / pi(b). `primitive` is false (and L absent)
/// when P^ell still has a zero entry.
struct MixingCertificate {
    int ell = 1;
    std::optional<double> L;
    bool primitive = false;
};

MixingCertificate psi_mixing_constant(const systems::MarkovSystem& system, int ell);

/// Exact check of the mixing product bound on a concrete block tuple:
///   int prod_j p_theta(w_j | T^{j(m+ell)} x) dmu(x)
///     <= prod_j C * p_theta(w_j),   C = L(ell).
/// Both sides are computed exactly by transfer-matrix products.
struct MixingBoundCheck {
    bool pass = false;
    bool primitive = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs / rhs
    double C = 0.0;
};

/// y_blocks: t+1 blocks of m+1 observations each; ell >= 1 so blocks are
/// disjoint. TooLargeError when |A|^(t(m+ell)+m+1) > 1e7 (contractual bound;
/// the transfer-matrix route is exact regardless).
MixingBoundCheck mixing_product_bound_check(const systems::MarkovSystem& system,
                                            const observation::ObservationModel& model,
                                            const ParameterPoint& theta, int m, int t, int ell,
                                            const std::vector<std::vector<double>>& y_blocks);

/// Large-deviations rate function for ergodic averages of a two-coordinate
/// observable, via scaled-generating-function duality: Lambda(s) = log Perron
/// root of P_s(a,b) = P(a,b) exp(s f(a,b)), I(a) = sup_s (s a - Lambda(s)).
struct LDRateFunction {
    Matrix observable;
    double mean = 0.0;
    double essential_min = 0.0;
    double essential_max = 0.0;
    std::function<double(double)> evaluate;  // I(a); +inf outside essential range
    bool boundary_warning = false;           // maximizer hit the s-bracket edge
};

struct LDRateResult {
    double rate_plus = 0.0;   // I(mean + delta)
    double rate_minus = 0.0;  // I(mean - delta)
    LDRateFunction rate;
};

/// Throws NonPrimitiveError when the system is not primitive.
LDRateResult ld_rate(const systems::MarkovSystem& system, const Matrix& observable, double delta);

/// Exponential identifiability diagnostic for a pair (theta0, theta).
/// The witness sets are A_n = { y : (1/n)(log p_theta0(y) - log p_theta(y)) >= r/2 }
/// with r the estimated log-likelihood-ratio rate under theta0.
struct SeparationReport {
    double kl_rate_estimate = 0.0;
    double kl_rate_se = 0.0;
    double p_theta0_An = 0.0;       // empirical P_theta0(A_n)
    double log_rate_theta = 0.0;    // empirical (1/n) log P_theta(A_n)
    double log_rate_theta_se = 0.0;
    bool zero_hits = false;         // no theta-simulation landed in A_n; the
                                    // reported rate is then the (1/n) log of
                                    // the add-one upper estimate 1/(reps+1)
    bool probable_equivalence = false;  // |r| < 3 se: laws indistinguishable
    long n_used = 0;
};

SeparationReport identifiability_separation(const family::Family& fam, const ParameterPoint& theta0,
                                            const ParameterPoint& theta, long n, int reps,
                                            std::uint64_t seed);

/// Numerical instantiation of the block-parsing bound. Observations are
/// parsed into blocks of m observations separated by gaps of ell, period
/// q = m + ell; the bound checked (with C = L(ell+1), the gap spans ell+1
/// transitions) is
///   E[ sup_U (1/n) log p_theta(Y_0^n) ]
///     <= (1/q) E[sup_U log p_theta(Y_0^{m-1})]
///      + (ell/q) E[sup_U log+ gamma_theta(Y_0)]
///      + (1/q) sup_U log L_theta(ell+1).
struct BlockBoundCheck {
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
    double block_term = 0.0;
    double gamma_term = 0.0;
    double mixing_term = 0.0;
    bool pass = false;  // lhs <= rhs + 3 * combined se
};

struct BlockBoundOptions {
    int lhs_reps = 30;
    int rhs_reps = 200;
};

BlockBoundCheck block_parsing_bound_check(const family::Family& fam,
                                          const std::vector<ParameterPoint>& neighborhood,
                                          const ParameterPoint& theta0, int m, int ell, long n,
                                          std::uint64_t seed, const BlockBoundOptions& opts = {});

/// Monte Carlo estimates of the logarithmic integrability quantities under
/// theta0: E[log+ gamma_theta0(Y_0)], E|log int g_theta0(Y_0|.) dmu|, and
/// E[sup_U log+ gamma_theta(Y_0)] over the neighborhood grid.
struct IntegrabilityEstimate {
    double value = 0.0;
    double se = 0.0;
    bool blowup = false;  // half-sample means differ by more than 1e-2
};

struct IntegrabilityReport {
    IntegrabilityEstimate log_plus_gamma_theta0;
    IntegrabilityEstimate abs_log_marginal;
    IntegrabilityEstimate sup_log_plus_gamma;
};

IntegrabilityReport integrability_check(const family::Family& fam, const ParameterPoint& theta0,
                                        const std::vector<ParameterPoint>& neighborhood, int reps,
                                        std::uint64_t seed);

/// Two-resolution continuity scan of theta -> normalized log-likelihood on
/// fixed data. A smooth map's largest adjacent-point jump roughly halves when
/// the grid is refined; a jump ratio above `flag_ratio` marks a suspected
/// discontinuity.
struct ContinuityScan {
    double max_jump_coarse = 0.0;
    double max_jump_fine = 0.0;
    double ratio = 0.0;  // fine / coarse (0 when both vanish)
    bool flagged = false;
};

ContinuityScan continuity_scan(const family::Family& fam, const likelihood::ObservationSequence& y,
                               const ParameterBox& box, const std::vector<int>& resolution,
                               double flag_ratio = 0.75);

/// Cesaro-averaged correlation diagnostic for ergodicity of the observation
/// process. Events are the half-space {Y_t <= tau} with tau the empirical
/// median of the simulated series (documented default).
struct ErgodicityRow {
    long lag = 0;
    double joint = 0.0;   // empirical P(Y_0 in A, Y_lag in A)
    double cesaro = 0.0;  // Cesaro average of joint over lags 0..lag
    double gap = 0.0;     // |cesaro - marginal^2|
};

struct ErgodicityDiagnostic {
    double threshold = 0.0;
    double marginal = 0.0;
    std::vector<ErgodicityRow> rows;
    double max_gap = 0.0;
};

ErgodicityDiagnostic ergodicity_diagnostic(const family::Family& fam, const ParameterPoint& theta0,
                                           const std::vector<long>& lags, long n, std::uint64_t seed);

}  // namespace dsmle::conditions
