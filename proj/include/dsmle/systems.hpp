#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dsmle/types.hpp"

namespace dsmle::systems {

/// Finite symbol set {0, ..., size-1}.
struct Alphabet {
    int size = 2;
};

/// Binary transition matrix of a shift of finite type. Rows and columns must
/// each contain at least one allowed transition; primitivity is checked on
/// demand, never assumed.
class TransitionStructure {
  public:
    TransitionStructure(Alphabet alphabet, const std::vector<std::vector<int>>& allowed);

    static TransitionStructure full(int size);

    int size() const { return alphabet_.size; }
    const Alphabet& alphabet() const { return alphabet_; }
    bool allows(int a, int b) const { return allowed_[static_cast<std::size_t>(a) * size() + b] != 0; }

    /// True when some power M^k (k <= size^2) has all entries positive.
    bool is_primitive() const;

  private:
    Alphabet alphabet_;
    std::vector<std::uint8_t> allowed_;
};

/// Two-coordinate potential: (theta, a, b) -> phi_theta(a, b). Continuity in
/// theta is the caller's responsibility and is only probed numerically.
using PotentialFamily = std::function<double(const ParameterPoint&, int, int)>;

/// Shift of finite type carrying its equilibrium (Markov) measure:
/// row-stochastic kernel P, stationary vector pi, and the Perron root of the
/// weight matrix the measure was built from.
struct MarkovSystem {
    TransitionStructure structure;
    Matrix P;
    std::vector<double> pi;
    double perron_root = 1.0;

    int size() const { return structure.size(); }
};

/// Validating constructor for directly specified kernels (stationarity and
/// stochasticity are enforced, primitivity is not).
MarkovSystem make_markov_system(TransitionStructure structure, Matrix P, std::vector<double> pi,
                                double perron_root = 1.0);

/// Equilibrium state of a two-coordinate potential on a primitive SFT via
/// Perron eigendata of B(a,b) = M(a,b) * exp(phi(a,b)):
///   P(a,b)  = B(a,b) r(b) / (lambda r(a))
///   pi(a)   = l(a) r(a) / sum_c l(c) r(c)
/// Throws NonPrimitiveError / EigenFailureError.
MarkovSystem build_markov_from_potential(const TransitionStructure& structure,
                                         const PotentialFamily& potential,
                                         const ParameterPoint& theta);

/// Stationary-start trajectory x_0^n (n+1 symbols): x_0 ~ pi, x_{k+1} ~ P(x_k, .).
std::vector<int> sample_trajectory(const MarkovSystem& system, long n, std::uint64_t seed);

/// Measure of the cylinder [word] starting at coordinate 0:
/// pi(w_0) * prod P(w_i, w_{i+1}).
double cylinder_measure(const MarkovSystem& system, std::span<const int> word);

/// Measure of the same word one coordinate later, summed over the free first
/// symbol. Equal to cylinder_measure by stationarity; kept as an independent
/// bracketing for tests.
double shifted_cylinder_measure(const MarkovSystem& system, std::span<const int> word);

// ---------------------------------------------------------------------------
// Coded interval maps. Only the doubling map ships: binary expansion
// intertwines it with the left shift on the full 2-shift, Lebesgue measure
// corresponding to the fair Bernoulli measure.
// ---------------------------------------------------------------------------

struct CodedMap {
    enum class Name { Doubling };
    Name name = Name::Doubling;
    int coding_depth = 53;  // truncation length for symbol <-> point conversion
};

/// coding_depth must lie in [1, 53]; a double cannot carry more random bits.
CodedMap make_doubling_map(int coding_depth = 53);

/// One step of the doubling map, exact in binary floating point.
double doubling_step(double x);

/// First coding_depth binary digits of x in [0,1).
std::vector<int> factor_encode(const CodedMap& map, double x);

/// Point from a symbol sequence; requires at least coding_depth symbols
/// (DepthExceededError otherwise) and uses exactly that many.
double factor_decode(const CodedMap& map, std::span<const int> symbols);

/// A hidden model is either a Markov equilibrium system (exact forward
/// likelihoods available) or a coded interval map (Monte Carlo only).
struct HiddenModel {
    std::optional<MarkovSystem> markov;
    std::optional<CodedMap> coded;

    static HiddenModel from_markov(MarkovSystem m);
    static HiddenModel from_coded(CodedMap c);
    bool is_markov() const { return markov.has_value(); }
};

}  // namespace dsmle::systems
