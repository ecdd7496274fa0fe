#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "dsmle/likelihood.hpp"
#include "dsmle/observation.hpp"
#include "dsmle/systems.hpp"
#include "dsmle/types.hpp"

namespace dsmle::family {

/// A parametrized family of hidden systems plus the observation model that
/// goes with it. The observation model is itself theta-parametric, so one
/// Family object covers the whole parameter box.
class Family {
  public:
    using HiddenBuilder = std::function<systems::HiddenModel(const ParameterPoint&)>;

    Family(std::string name, ParameterBox box, HiddenBuilder hidden, observation::ObservationModel obs)
        : name_(std::move(name)), box_(std::move(box)), hidden_(std::move(hidden)), obs_(std::move(obs)) {}

    const std::string& name() const { return name_; }
    const ParameterBox& box() const { return box_; }
    const observation::ObservationModel& observation() const { return obs_; }
    systems::HiddenModel hidden(const ParameterPoint& theta) const { return hidden_(theta); }

    Family with_observation(observation::ObservationModel obs) const {
        return Family(name_, box_, hidden_, std::move(obs));
    }

  private:
    std::string name_;
    ParameterBox box_;
    HiddenBuilder hidden_;
    observation::ObservationModel obs_;
};

/// Two-state chain with flip probability theta[0]:
/// P = [[1-t, t], [t, 1-t]], pi = (1/2, 1/2).
Family make_flip2_family(ParameterBox box, observation::ObservationModel obs);

/// I.i.d. two-state hidden sequence with success probability theta[0].
Family make_iid2_family(ParameterBox box, observation::ObservationModel obs);

/// Fixed symmetric two-state chain (flip probability hidden_flip) observed
/// through a binary symmetric channel with crossover theta[0]. The hidden
/// relabeling symmetry makes theta and 1-theta observationally equivalent.
Family make_bsc2_family(ParameterBox box, double hidden_flip);

/// Equilibrium states of the linear potential phi_theta(a,b) = theta[0] * f(a,b)
/// on the given transition structure.
Family make_potential_linear_family(ParameterBox box, systems::TransitionStructure structure,
                                    Matrix table, observation::ObservationModel obs);

/// Equilibrium states of a tabulated potential: one table per theta grid
/// point, interpolated linearly in theta[0] between neighbouring tables
/// (clamped outside the grid span).
Family make_potential_table_family(ParameterBox box, systems::TransitionStructure structure,
                                   std::vector<double> theta_grid, std::vector<Matrix> tables,
                                   observation::ObservationModel obs);

/// Doubling map with Lebesgue invariant measure; theta enters only through
/// the observation model.
Family make_doubling_family(ParameterBox box, int coding_depth, observation::ObservationModel obs);

/// Simulate y_0^n from the family at theta. Markov hidden states use
/// simulate_markov_sequence; coded maps draw x uniformly and iterate the map.
likelihood::ObservationSequence simulate_sequence(const Family& fam, const ParameterPoint& theta,
                                                  long n, std::uint64_t seed);

}  // namespace dsmle::family
