#include "dsmle/family.hpp"

#include <algorithm>
#include <cmath>

#include "dsmle/rng.hpp"

namespace dsmle::family {

using observation::ObservationModel;
using systems::HiddenModel;
using systems::MarkovSystem;
using systems::TransitionStructure;

namespace {

TransitionStructure structure_from_kernel(const Matrix& P) {
    const int n = static_cast<int>(P.rows());
    std::vector<std::vector<int>> allowed(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) allowed[i][j] = P(i, j) > 0.0 ? 1 : 0;
    }
    return TransitionStructure(systems::Alphabet{n}, allowed);
}

MarkovSystem symmetric_flip_chain(double flip) {
    if (!(flip >= 0.0 && flip <= 1.0)) throw Error("flip probability must lie in [0, 1]");
    Matrix P(2, 2);
    P(0, 0) = 1.0 - flip;
    P(0, 1) = flip;
    P(1, 0) = flip;
    P(1, 1) = 1.0 - flip;
    return systems::make_markov_system(structure_from_kernel(P), P, {0.5, 0.5});
}

MarkovSystem iid_chain(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("success probability must lie in (0, 1)");
    Matrix P(2, 2);
    P(0, 0) = 1.0 - p;
    P(0, 1) = p;
    P(1, 0) = 1.0 - p;
    P(1, 1) = p;
    return systems::make_markov_system(structure_from_kernel(P), P, {1.0 - p, p});
}

void require_dimension(const ParameterBox& box, std::size_t d, const char* name) {
    if (box.dimension() != d) {
        throw Error(std::string(name) + " family expects a " + std::to_string(d) + "-dimensional box");
    }
}

}  // namespace

Family make_flip2_family(ParameterBox box, ObservationModel obs) {
    require_dimension(box, 1, "flip2");
    return Family("flip2", std::move(box),
                  [](const ParameterPoint& theta) {
                      return HiddenModel::from_markov(symmetric_flip_chain(theta.at(0)));
                  },
                  std::move(obs));
}

Family make_iid2_family(ParameterBox box, ObservationModel obs) {
    require_dimension(box, 1, "iid2");
    return Family("iid2", std::move(box),
                  [](const ParameterPoint& theta) {
                      return HiddenModel::from_markov(iid_chain(theta.at(0)));
                  },
                  std::move(obs));
}

Family make_bsc2_family(ParameterBox box, double hidden_flip) {
    require_dimension(box, 1, "bsc2");
    if (!(hidden_flip > 0.0 && hidden_flip < 1.0)) {
        throw Error("bsc2 hidden flip probability must lie in (0, 1)");
    }
    ObservationModel obs = ObservationModel::discrete_channel(
        "bsc", 2, 2, [](const ParameterPoint& theta) {
            const double c = theta.at(0);
            if (!(c >= 0.0 && c <= 1.0)) throw Error("crossover probability must lie in [0, 1]");
            Matrix m(2, 2);
            m(0, 0) = 1.0 - c;
            m(0, 1) = c;
            m(1, 0) = c;
            m(1, 1) = 1.0 - c;
            return m;
        });
    return Family("bsc2", std::move(box),
                  [hidden_flip](const ParameterPoint&) {
                      return HiddenModel::from_markov(symmetric_flip_chain(hidden_flip));
                  },
                  std::move(obs));
}

Family make_potential_linear_family(ParameterBox box, TransitionStructure structure, Matrix table,
                                    ObservationModel obs) {
    require_dimension(box, 1, "potential-linear");
    const int n = structure.size();
    if (table.rows() != static_cast<std::size_t>(n) || table.cols() != static_cast<std::size_t>(n)) {
        throw Error("potential table shape does not match the alphabet");
    }
    auto builder = [structure = std::move(structure), table = std::move(table)](const ParameterPoint& theta) {
        const systems::PotentialFamily pot = [&table](const ParameterPoint& th, int a, int b) {
            return th.at(0) * table(a, b);
        };
        return HiddenModel::from_markov(systems::build_markov_from_potential(structure, pot, theta));
    };
    return Family("potential-linear", std::move(box), std::move(builder), std::move(obs));
}

Family make_potential_table_family(ParameterBox box, TransitionStructure structure,
                                   std::vector<double> theta_grid, std::vector<Matrix> tables,
                                   ObservationModel obs) {
    require_dimension(box, 1, "potential-table");
    if (theta_grid.size() < 2 || theta_grid.size() != tables.size()) {
        throw Error("potential table needs one table per theta grid point (at least two)");
    }
    for (std::size_t i = 1; i < theta_grid.size(); ++i) {
        if (!(theta_grid[i] > theta_grid[i - 1])) throw Error("theta grid must be strictly increasing");
    }
    const int n = structure.size();
    for (const Matrix& t : tables) {
        if (t.rows() != static_cast<std::size_t>(n) || t.cols() != static_cast<std::size_t>(n)) {
            throw Error("potential table shape does not match the alphabet");
        }
    }
    auto builder = [structure = std::move(structure), theta_grid = std::move(theta_grid),
                    tables = std::move(tables)](const ParameterPoint& theta) {
        const systems::PotentialFamily pot = [&theta_grid, &tables](const ParameterPoint& th, int a, int b) {
            const double t = th.at(0);
            if (t <= theta_grid.front()) return tables.front()(a, b);
            if (t >= theta_grid.back()) return tables.back()(a, b);
            const auto hi = std::upper_bound(theta_grid.begin(), theta_grid.end(), t);
            const std::size_t i = static_cast<std::size_t>(hi - theta_grid.begin());
            const double w = (t - theta_grid[i - 1]) / (theta_grid[i] - theta_grid[i - 1]);
            return (1.0 - w) * tables[i - 1](a, b) + w * tables[i](a, b);
        };
        return HiddenModel::from_markov(systems::build_markov_from_potential(structure, pot, theta));
    };
    return Family("potential-table", std::move(box), std::move(builder), std::move(obs));
}

Family make_doubling_family(ParameterBox box, int coding_depth, ObservationModel obs) {
    const systems::CodedMap map = systems::make_doubling_map(coding_depth);
    return Family("doubling", std::move(box),
                  [map](const ParameterPoint&) { return HiddenModel::from_coded(map); },
                  std::move(obs));
}

likelihood::ObservationSequence simulate_sequence(const Family& fam, const ParameterPoint& theta,
                                                  long n, std::uint64_t seed) {
    const HiddenModel hidden = fam.hidden(theta);
    if (hidden.is_markov()) {
        return likelihood::simulate_markov_sequence(*hidden.markov, fam.observation(), theta, n, seed);
    }
    const systems::CodedMap& map = *hidden.coded;
    if (n + 1 > map.coding_depth) {
        throw DepthExceededError("sequence length exceeds the coding depth of the map");
    }
    rng::Engine point_eng(rng::derive_seed(seed, 0));
    rng::Engine obs_eng(rng::derive_seed(seed, 1));
    double x = point_eng.next_unit();
    likelihood::ObservationSequence seq;
    seq.values.resize(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) {
        const int symbol = x < 0.5 ? 0 : 1;
        seq.values[static_cast<std::size_t>(k)] = sample(fam.observation(), theta, symbol, obs_eng);
        x = systems::doubling_step(x);
    }
    seq.model_name = fam.observation().name();
    seq.theta0 = theta;
    seq.seed = seed;
    return seq;
}

}  // namespace dsmle::family
