#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsmle/family.hpp"
#include "dsmle/likelihood.hpp"
#include "dsmle/types.hpp"

namespace dsmle::inference {

/// How grid points are evaluated. Markov hidden models use the exact forward
/// recursion; coded maps fall back to Monte Carlo with a seed derived from
/// (mc_seed, hash of theta) so repeated evaluations are reproducible.
struct EvalContext {
    int mc_samples = 10000;
    std::uint64_t mc_seed = 0;
};

/// Normalized log-likelihood (1/max(n,1)) * log p_theta(y_0^n); -inf allowed.
double normalized_log_likelihood(const family::Family& fam, const ParameterPoint& theta,
                                 const likelihood::ObservationSequence& y,
                                 const EvalContext& ctx = {});

struct SurfacePoint {
    ParameterPoint theta;
    double value = kNegInf;
    bool zero_likelihood = false;
};

/// Grid of normalized log-likelihood values with argmax bookkeeping. Ties
/// break to the lexicographically smallest grid point; slack records the grid
/// modulus (largest per-dimension spacing).
struct LogLikelihoodSurface {
    std::vector<SurfacePoint> points;
    ParameterBox box;
    std::vector<int> resolution;
    std::vector<double> spacing;
    std::size_t argmax_index = 0;
    ParameterPoint argmax_point;
    double argmax_value = kNegInf;
    double slack = 0.0;
    long n = 0;  // steps in the data the surface was computed from
};

struct GridOptions {
    EvalContext eval;
    int threads = 1;
};

/// Evaluate the normalized log-likelihood at every grid point of the box.
/// Throws AllDegenerateError when every point is -inf.
LogLikelihoodSurface grid_mle(const family::Family& fam, const likelihood::ObservationSequence& y,
                              const ParameterBox& box, const std::vector<int>& resolution,
                              const GridOptions& opts = {});

struct RefinedEstimate {
    ParameterPoint theta;
    double value = kNegInf;
    bool boundary_hit = false;
    int evaluations = 0;
};

/// Coordinate-wise golden-section polish around the grid argmax (d <= 3).
/// Never returns a point worse than the grid argmax.
RefinedEstimate refine_mle(const LogLikelihoodSurface& surface,
                           const std::function<double(const ParameterPoint&)>& evaluator,
                           int iterations = 40);

/// Finite set of parameter points closed under a declared symmetry action.
class EquivalenceClass {
  public:
    using Action = std::function<ParameterPoint(const ParameterPoint&)>;

    static EquivalenceClass singleton(ParameterPoint p);
    static EquivalenceClass from_points(std::vector<ParameterPoint> pts);
    /// Orbit of theta0 under repeated application of the actions (closure,
    /// deduplicated at 1e-12, capped at 64 representatives).
    static EquivalenceClass from_symmetry(const ParameterPoint& theta0, const std::vector<Action>& actions);

    const std::vector<ParameterPoint>& representatives() const { return reps_; }

  private:
    std::vector<ParameterPoint> reps_;
};

/// Min Euclidean distance from theta_hat to the class representatives.
double equivalence_distance(const ParameterPoint& theta_hat, const EquivalenceClass& cls);

/// Numerical equivalence detector: theta ~ theta' is flagged when total
/// forward log-likelihoods agree within 1e-9 on `sequences` random
/// observation sequences of the given length simulated under theta.
bool numerically_equivalent(const family::Family& fam, const ParameterPoint& a, const ParameterPoint& b,
                            std::uint64_t seed, int sequences = 1000, long length = 50,
                            double tol = 1e-9);

struct SweepCell {
    long n = 0;
    int replication = 0;
    ParameterPoint theta_hat;
    double distance = 0.0;
    double loglik = 0.0;  // normalized
    bool ok = true;
    std::string error;
};

struct SweepOptions {
    std::vector<int> resolution;
    int refine_iterations = 40;
    EvalContext eval;
    int threads = 1;
};

/// For each (n, replication): simulate data under theta0 with the derived
/// seed (cell index = n_index * replications + rep), run grid_mle plus
/// refine_mle over the family box, and record the equivalence distance.
/// Per-cell failures are recorded in the table; the sweep continues.
std::vector<SweepCell> consistency_sweep(const family::Family& fam, const ParameterPoint& theta0,
                                         const EquivalenceClass& cls, const std::vector<long>& n_list,
                                         int replications, std::uint64_t seed,
                                         const SweepOptions& opts);

/// Run fn(i) for i in [0, count), possibly on several threads. Results must
/// be written to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Maximize a unimodal function on [lo, hi] by golden-section search.
/// Returns (argmax, value); tol is on the bracket width.
std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo,
                                             double hi, double tol = 1e-10, int max_iter = 200);

}  // namespace dsmle::inference
