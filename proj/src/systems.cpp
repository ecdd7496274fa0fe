#include "dsmle/systems.hpp"

#include <algorithm>
#include <cmath>

#include "dsmle/rng.hpp"

namespace dsmle::systems {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-10;
constexpr double kPowerIterTol = 1e-13;
constexpr int kPowerIterCap = 100000;

void validate_markov(const MarkovSystem& s) {
    const int a = s.size();
    if (s.P.rows() != static_cast<std::size_t>(a) || s.P.cols() != static_cast<std::size_t>(a)) {
        throw Error("kernel shape does not match alphabet");
    }
    if (s.pi.size() != static_cast<std::size_t>(a)) throw Error("stationary vector has wrong length");
    double pi_sum = 0.0;
    for (int i = 0; i < a; ++i) {
        if (s.pi[i] < 0.0) throw Error("stationary vector has a negative entry");
        pi_sum += s.pi[i];
        double row = 0.0;
        for (int j = 0; j < a; ++j) {
            const double p = s.P(i, j);
            if (p < 0.0 || !std::isfinite(p)) throw Error("kernel entry out of range");
            if (p > 0.0 && !s.structure.allows(i, j)) {
                throw Error("kernel positive on a forbidden transition");
            }
            if (p == 0.0 && s.structure.allows(i, j)) {
                throw Error("kernel zero on an allowed transition");
            }
            row += p;
        }
        if (std::fabs(row - 1.0) > kRowSumTol) throw Error("kernel row does not sum to 1");
    }
    if (std::fabs(pi_sum - 1.0) > kRowSumTol) throw Error("stationary vector does not sum to 1");
    const std::vector<double> piP = left_multiply(s.pi, s.P);
    for (int j = 0; j < a; ++j) {
        if (std::fabs(piP[j] - s.pi[j]) > kStationaryTol) {
            throw Error("vector is not stationary for the kernel");
        }
    }
}

struct PerronData {
    std::vector<double> vec;
    double root = 0.0;
};

// Power iteration on v -> Bv (or B^T v) with L1 normalization, all-ones start.
PerronData perron_vector(const Matrix& B, bool transpose) {
    const std::size_t n = B.rows();
    std::vector<double> v(n, 1.0 / static_cast<double>(n));
    double root = 0.0;
    for (int it = 0; it < kPowerIterCap; ++it) {
        std::vector<double> w(n, 0.0);
        if (transpose) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) w[j] += v[i] * B(i, j);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += B(i, j) * v[j];
                w[i] = acc;
            }
        }
        double sum = 0.0;
        for (double x : w) sum += x;
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            throw EigenFailureError("power iteration produced a non-positive normalizer");
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] /= sum;
            diff = std::max(diff, std::fabs(w[i] - v[i]));
        }
        v = std::move(w);
        root = sum;
        if (diff < kPowerIterTol) return {v, root};
    }
    throw EigenFailureError("power iteration did not converge");
}

}  // namespace

TransitionStructure::TransitionStructure(Alphabet alphabet, const std::vector<std::vector<int>>& allowed)
    : alphabet_(alphabet) {
    const int n = alphabet_.size;
    if (n < 2) throw Error("alphabet size must be at least 2");
    if (allowed.size() != static_cast<std::size_t>(n)) throw Error("allowed matrix has wrong row count");
    allowed_.assign(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> col_count(n, 0);
    for (int i = 0; i < n; ++i) {
        if (allowed[i].size() != static_cast<std::size_t>(n)) {
            throw Error("allowed matrix has wrong column count");
        }
        int row_count = 0;
        for (int j = 0; j < n; ++j) {
            const int v = allowed[i][j];
            if (v != 0 && v != 1) throw Error("allowed matrix entries must be 0 or 1");
            allowed_[static_cast<std::size_t>(i) * n + j] = static_cast<std::uint8_t>(v);
            row_count += v;
            col_count[j] += v;
        }
        if (row_count == 0) throw Error("allowed matrix has an all-zero row");
    }
    for (int j = 0; j < n; ++j) {
        if (col_count[j] == 0) throw Error("allowed matrix has an all-zero column");
    }
}

TransitionStructure TransitionStructure::full(int size) {
    std::vector<std::vector<int>> all(size, std::vector<int>(size, 1));
    return TransitionStructure(Alphabet{size}, all);
}

bool TransitionStructure::is_primitive() const {
    const int n = size();
    // Boolean powers M^k for k = 1..n^2 (Wielandt bound); primitive iff some
    // power is all-positive.
    std::vector<std::uint8_t> cur = allowed_;
    const auto all_positive = [&](const std::vector<std::uint8_t>& m) {
        return std::all_of(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; });
    };
    if (all_positive(cur)) return true;
    for (int k = 2; k <= n * n; ++k) {
        std::vector<std::uint8_t> next(static_cast<std::size_t>(n) * n, 0);
        for (int i = 0; i < n; ++i) {
            for (int l = 0; l < n; ++l) {
                if (!cur[static_cast<std::size_t>(i) * n + l]) continue;
                for (int j = 0; j < n; ++j) {
                    if (allowed_[static_cast<std::size_t>(l) * n + j]) {
                        next[static_cast<std::size_t>(i) * n + j] = 1;
                    }
                }
            }
        }
        cur = std::move(next);
        if (all_positive(cur)) return true;
    }
    return false;
}

MarkovSystem make_markov_system(TransitionStructure structure, Matrix P, std::vector<double> pi,
                                double perron_root) {
    MarkovSystem s{std::move(structure), std::move(P), std::move(pi), perron_root};
    validate_markov(s);
    return s;
}

MarkovSystem build_markov_from_potential(const TransitionStructure& structure,
                                         const PotentialFamily& potential,
                                         const ParameterPoint& theta) {
    if (!structure.is_primitive()) {
        throw NonPrimitiveError("transition structure is not primitive; no unique equilibrium state");
    }
    const int n = structure.size();
    Matrix B(n, n, 0.0);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (!structure.allows(a, b)) continue;
            const double phi = potential(theta, a, b);
            if (!std::isfinite(phi)) throw Error("potential not finite on an allowed transition");
            B(a, b) = std::exp(phi);
        }
    }
    const PerronData right = perron_vector(B, false);
    const PerronData left = perron_vector(B, true);
    const double lambda = right.root;

    Matrix P(n, n, 0.0);
    for (int a = 0; a < n; ++a) {
        double row = 0.0;
        for (int b = 0; b < n; ++b) {
            if (!structure.allows(a, b)) continue;
            P(a, b) = B(a, b) * right.vec[b] / (lambda * right.vec[a]);
            row += P(a, b);
        }
        for (int b = 0; b < n; ++b) P(a, b) /= row;  // remove the eigen-residual
    }
    std::vector<double> pi(n, 0.0);
    double norm = 0.0;
    for (int a = 0; a < n; ++a) {
        pi[a] = left.vec[a] * right.vec[a];
        norm += pi[a];
    }
    for (int a = 0; a < n; ++a) pi[a] /= norm;

    return make_markov_system(structure, std::move(P), std::move(pi), lambda);
}

std::vector<int> sample_trajectory(const MarkovSystem& system, long n, std::uint64_t seed) {
    if (n < 0) throw Error("trajectory length must be nonnegative");
    rng::Engine eng(seed);
    const int a = system.size();
    std::vector<int> x(static_cast<std::size_t>(n) + 1);
    x[0] = eng.next_categorical(std::span<const double>(system.pi.data(), a));
    std::vector<double> row(a);
    for (long k = 1; k <= n; ++k) {
        const int prev = x[static_cast<std::size_t>(k - 1)];
        for (int j = 0; j < a; ++j) row[j] = system.P(prev, j);
        x[static_cast<std::size_t>(k)] = eng.next_categorical(row);
    }
    return x;
}

double cylinder_measure(const MarkovSystem& system, std::span<const int> word) {
    if (word.empty()) return 1.0;
    double m = system.pi[word[0]];
    for (std::size_t i = 0; i + 1 < word.size(); ++i) m *= system.P(word[i], word[i + 1]);
    return m;
}

double shifted_cylinder_measure(const MarkovSystem& system, std::span<const int> word) {
    if (word.empty()) return 1.0;
    double head = 0.0;
    for (int a = 0; a < system.size(); ++a) head += system.pi[a] * system.P(a, word[0]);
    double m = head;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) m *= system.P(word[i], word[i + 1]);
    return m;
}

CodedMap make_doubling_map(int coding_depth) {
    if (coding_depth < 1 || coding_depth > 53) {
        throw Error("coding depth must lie in [1, 53]");
    }
    return CodedMap{CodedMap::Name::Doubling, coding_depth};
}

double doubling_step(double x) {
    // 2x and the conditional subtraction are both exact for doubles in [0,1).
    double y = 2.0 * x;
    if (y >= 1.0) y -= 1.0;
    return y;
}

std::vector<int> factor_encode(const CodedMap& map, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw Error("point must lie in [0,1)");
    std::vector<int> symbols(static_cast<std::size_t>(map.coding_depth));
    for (int k = 0; k < map.coding_depth; ++k) {
        symbols[static_cast<std::size_t>(k)] = x < 0.5 ? 0 : 1;
        x = doubling_step(x);
    }
    return symbols;
}

double factor_decode(const CodedMap& map, std::span<const int> symbols) {
    if (symbols.size() < static_cast<std::size_t>(map.coding_depth)) {
        throw DepthExceededError("symbol sequence shorter than the coding depth");
    }
    double x = 0.0;
    double w = 0.5;
    for (int k = 0; k < map.coding_depth; ++k) {
        const int s = symbols[static_cast<std::size_t>(k)];
        if (s != 0 && s != 1) throw Error("doubling-map symbols must be 0 or 1");
        if (s) x += w;
        w *= 0.5;
    }
    return x;
}

HiddenModel HiddenModel::from_markov(MarkovSystem m) {
    HiddenModel h;
    h.markov = std::move(m);
    return h;
}

HiddenModel HiddenModel::from_coded(CodedMap c) {
    HiddenModel h;
    h.coded = c;
    return h;
}

}  // namespace dsmle::systems
