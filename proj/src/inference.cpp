#include "dsmle/inference.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "dsmle/rng.hpp"

namespace dsmle::inference {

using family::Family;
using likelihood::ObservationSequence;

namespace {

std::uint64_t hash_point(const ParameterPoint& theta) {
    return fnv1a64(theta.data(), theta.size() * sizeof(double));
}

std::vector<double> grid_coordinates(const Interval& iv, int res) {
    std::vector<double> xs(static_cast<std::size_t>(res));
    for (int i = 0; i < res; ++i) {
        xs[static_cast<std::size_t>(i)] =
            iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(res - 1);
    }
    xs.back() = iv.hi;
    return xs;
}

}  // namespace

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double normalized_log_likelihood(const Family& fam, const ParameterPoint& theta,
                                 const ObservationSequence& y, const EvalContext& ctx) {
    const systems::HiddenModel hidden = fam.hidden(theta);
    likelihood::LogLikelihoodResult r;
    if (hidden.is_markov()) {
        r = likelihood::forward_log_likelihood(*hidden.markov, fam.observation(), theta, y);
    } else {
        const std::uint64_t seed = rng::derive_seed(ctx.mc_seed, hash_point(theta));
        r = likelihood::mc_log_likelihood(hidden, fam.observation(), theta, y, ctx.mc_samples, seed);
    }
    const double divisor = static_cast<double>(std::max<long>(y.steps(), 1));
    return r.loglik / divisor;
}

LogLikelihoodSurface grid_mle(const Family& fam, const ObservationSequence& y, const ParameterBox& box,
                              const std::vector<int>& resolution, const GridOptions& opts) {
    const std::size_t d = box.dimension();
    if (d == 0 || d > 3) throw Error("grid search supports 1 to 3 parameter dimensions");
    if (resolution.size() != d) throw Error("resolution must give one count per dimension");
    for (int r : resolution) {
        if (r < 2) throw Error("grid resolution must be at least 2 per dimension");
    }

    std::vector<std::vector<double>> coords(d);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        coords[i] = grid_coordinates(box.dim(i), resolution[i]);
        total *= coords[i].size();
    }

    LogLikelihoodSurface surface;
    surface.box = box;
    surface.resolution = resolution;
    surface.n = y.steps();
    surface.points.resize(total);
    surface.spacing.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        surface.spacing[i] = (box.dim(i).hi - box.dim(i).lo) / static_cast<double>(resolution[i] - 1);
    }

    // Row-major enumeration: the flat index orders grid points
    // lexicographically by coordinates, which is the documented tie-break.
    parallel_for(total, opts.threads, [&](std::size_t flat) {
        ParameterPoint theta(d);
        std::size_t rem = flat;
        for (std::size_t i = d; i-- > 0;) {
            const std::size_t res = coords[i].size();
            theta[i] = coords[i][rem % res];
            rem /= res;
        }
        SurfacePoint& pt = surface.points[flat];
        pt.theta = std::move(theta);
        pt.value = normalized_log_likelihood(fam, pt.theta, y, opts.eval);
        pt.zero_likelihood = pt.value == kNegInf;
    });

    std::size_t best = total;
    for (std::size_t i = 0; i < total; ++i) {
        if (surface.points[i].value == kNegInf) continue;
        if (best == total || surface.points[i].value > surface.points[best].value) best = i;
    }
    if (best == total) throw AllDegenerateError("every grid point has zero likelihood");

    surface.argmax_index = best;
    surface.argmax_point = surface.points[best].theta;
    surface.argmax_value = surface.points[best].value;
    surface.slack = *std::max_element(surface.spacing.begin(), surface.spacing.end());
    return surface;
}

std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo,
                                             double hi, double tol, int max_iter) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    const double fm = f(xm);
    if (f1 >= f2 && f1 >= fm) return {x1, f1};
    if (f2 >= fm) return {x2, f2};
    return {xm, fm};
}

RefinedEstimate refine_mle(const LogLikelihoodSurface& surface,
                           const std::function<double(const ParameterPoint&)>& evaluator,
                           int iterations) {
    const std::size_t d = surface.box.dimension();
    RefinedEstimate best;
    best.theta = surface.argmax_point;
    best.value = surface.argmax_value;

    int evals = 0;
    auto eval = [&](const ParameterPoint& p) {
        ++evals;
        return evaluator(p);
    };

    const int sweeps = d == 1 ? 1 : 3;
    ParameterPoint current = best.theta;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t i = 0; i < d; ++i) {
            const Interval& iv = surface.box.dim(i);
            const double h = surface.spacing[i];
            const double lo = std::max(iv.lo, current[i] - h);
            const double hi = std::min(iv.hi, current[i] + h);
            if (!(hi > lo)) continue;
            auto [xr, fr] = golden_section_max(
                [&](double t) {
                    ParameterPoint p = current;
                    p[i] = t;
                    return eval(p);
                },
                lo, hi, 1e-12, iterations);
            if (fr > best.value) {
                current[i] = xr;
                best.theta = current;
                best.value = fr;
            }
        }
    }

    best.evaluations = evals;
    for (std::size_t i = 0; i < d; ++i) {
        const Interval& iv = surface.box.dim(i);
        const double width = std::max(iv.hi - iv.lo, 1e-300);
        if (best.theta[i] - iv.lo <= 1e-9 * width || iv.hi - best.theta[i] <= 1e-9 * width) {
            best.boundary_hit = true;
        }
    }
    return best;
}

EquivalenceClass EquivalenceClass::singleton(ParameterPoint p) {
    EquivalenceClass c;
    c.reps_.push_back(std::move(p));
    return c;
}

EquivalenceClass EquivalenceClass::from_points(std::vector<ParameterPoint> pts) {
    if (pts.empty()) throw Error("equivalence class must be nonempty");
    EquivalenceClass c;
    c.reps_ = std::move(pts);
    return c;
}

EquivalenceClass EquivalenceClass::from_symmetry(const ParameterPoint& theta0,
                                                 const std::vector<Action>& actions) {
    EquivalenceClass c;
    c.reps_.push_back(theta0);
    const auto known = [&](const ParameterPoint& p) {
        return std::any_of(c.reps_.begin(), c.reps_.end(), [&](const ParameterPoint& q) {
            return euclidean_distance(p, q) < 1e-12;
        });
    };
    for (std::size_t i = 0; i < c.reps_.size() && c.reps_.size() < 64; ++i) {
        for (const Action& act : actions) {
            ParameterPoint image = act(c.reps_[i]);
            if (!known(image)) c.reps_.push_back(std::move(image));
        }
    }
    return c;
}

double equivalence_distance(const ParameterPoint& theta_hat, const EquivalenceClass& cls) {
    double best = kPosInf;
    for (const ParameterPoint& rep : cls.representatives()) {
        best = std::min(best, euclidean_distance(theta_hat, rep));
    }
    return best;
}

bool numerically_equivalent(const Family& fam, const ParameterPoint& a, const ParameterPoint& b,
                            std::uint64_t seed, int sequences, long length, double tol) {
    for (int i = 0; i < sequences; ++i) {
        const ObservationSequence y =
            family::simulate_sequence(fam, a, length, rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        const systems::HiddenModel ha = fam.hidden(a);
        const systems::HiddenModel hb = fam.hidden(b);
        if (!ha.is_markov() || !hb.is_markov()) {
            throw UnsupportedVariantError("equivalence detection needs forward likelihoods");
        }
        const double la = likelihood::forward_log_likelihood(*ha.markov, fam.observation(), a, y).loglik;
        const double lb = likelihood::forward_log_likelihood(*hb.markov, fam.observation(), b, y).loglik;
        if (la == kNegInf && lb == kNegInf) continue;
        if (std::fabs(la - lb) > tol) return false;
    }
    return true;
}

std::vector<SweepCell> consistency_sweep(const Family& fam, const ParameterPoint& theta0,
                                         const EquivalenceClass& cls, const std::vector<long>& n_list,
                                         int replications, std::uint64_t seed, const SweepOptions& opts) {
    if (n_list.empty()) throw Error("n_list must be nonempty");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) throw Error("n_list must be strictly increasing");
    }
    if (replications < 1) throw Error("replications must be at least 1");
    std::vector<int> resolution = opts.resolution;
    if (resolution.empty()) resolution.assign(fam.box().dimension(), 101);

    const std::size_t cells = n_list.size() * static_cast<std::size_t>(replications);
    std::vector<SweepCell> table(cells);

    parallel_for(cells, opts.threads, [&](std::size_t cell) {
        const std::size_t n_index = cell / static_cast<std::size_t>(replications);
        const int rep = static_cast<int>(cell % static_cast<std::size_t>(replications));
        SweepCell& row = table[cell];
        row.n = n_list[n_index];
        row.replication = rep;
        try {
            const std::uint64_t cell_seed = rng::derive_seed(seed, cell);
            const ObservationSequence y = family::simulate_sequence(fam, theta0, row.n, cell_seed);
            GridOptions gopts;
            gopts.eval = opts.eval;
            gopts.eval.mc_seed = rng::derive_seed(cell_seed, 0x6d63ull);  // per-cell MC stream
            const LogLikelihoodSurface surface = grid_mle(fam, y, fam.box(), resolution, gopts);
            const RefinedEstimate refined = refine_mle(
                surface,
                [&](const ParameterPoint& p) { return normalized_log_likelihood(fam, p, y, gopts.eval); },
                opts.refine_iterations);
            row.theta_hat = refined.theta;
            row.loglik = refined.value;
            row.distance = equivalence_distance(refined.theta, cls);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    return table;
}

}  // namespace dsmle::inference
