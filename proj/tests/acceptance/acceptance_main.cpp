// Acceptance suite: every criterion prints one PASS/FAIL line; the binary
// exits nonzero when any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dsmle/conditions.hpp"
#include "dsmle/family.hpp"
#include "dsmle/inference.hpp"
#include "dsmle/likelihood.hpp"
#include "dsmle/rng.hpp"
#include "dsmle/systems.hpp"

namespace fs = std::filesystem;
using namespace dsmle;
using dsmle::family::Family;
using dsmle::likelihood::ObservationSequence;
using dsmle::observation::ObservationModel;
using dsmle::systems::MarkovSystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

MarkovSystem iid_chain(double p) {
    Matrix P(2, 2);
    P(0, 0) = 1.0 - p;
    P(0, 1) = p;
    P(1, 0) = 1.0 - p;
    P(1, 1) = p;
    return systems::make_markov_system(systems::TransitionStructure::full(2), P, {1.0 - p, p});
}

ObservationModel identity_channel() {
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return ObservationModel::discrete_channel("channel", m);
}

ParameterBox box1(double lo, double hi) { return ParameterBox({Interval{lo, hi}}); }

MarkovSystem random_stochastic_system(rng::Engine& eng, int size) {
    Matrix P(size, size);
    for (int i = 0; i < size; ++i) {
        double row = 0.0;
        for (int j = 0; j < size; ++j) {
            P(i, j) = 0.05 + eng.next_unit();
            row += P(i, j);
        }
        for (int j = 0; j < size; ++j) P(i, j) /= row;
    }
    std::vector<double> stat(static_cast<std::size_t>(size), 1.0 / size);
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> next = left_multiply(stat, P);
        double diff = 0.0;
        for (int j = 0; j < size; ++j) diff = std::max(diff, std::fabs(next[j] - stat[j]));
        stat = std::move(next);
        if (diff < 1e-15) break;
    }
    double sum = 0.0;
    for (double v : stat) sum += v;
    for (double& v : stat) v /= sum;
    return systems::make_markov_system(systems::TransitionStructure::full(size), P, std::move(stat));
}

ObservationModel random_model(rng::Engine& eng, int size) {
    if (eng.next_unit() < 0.5) {
        std::vector<double> means(static_cast<std::size_t>(size));
        for (double& m : means) m = 2.0 * eng.next_unit() - 1.0;
        return ObservationModel::gaussian("gaussian", means, 0.3 + eng.next_unit());
    }
    const int ycount = 2 + static_cast<int>(eng.next_u64() % 2);
    Matrix c(size, ycount);
    for (int i = 0; i < size; ++i) {
        double row = 0.0;
        for (int j = 0; j < ycount; ++j) {
            c(i, j) = 0.05 + eng.next_unit();
            row += c(i, j);
        }
        for (int j = 0; j < ycount; ++j) c(i, j) /= row;
    }
    return ObservationModel::discrete_channel("channel", c);
}

// --------------------------------------------------------------------------

void criterion_1_forward_vs_enumeration() {
    rng::Engine eng(90001);
    int ok = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int size = 2 + static_cast<int>(eng.next_u64() % 2);
        const MarkovSystem system = random_stochastic_system(eng, size);
        const ObservationModel model = random_model(eng, size);
        const long n = static_cast<long>(eng.next_u64() % 9);
        const ObservationSequence y =
            likelihood::simulate_markov_sequence(system, model, {}, n, eng.next_u64());
        const double fwd = likelihood::forward_log_likelihood(system, model, {}, y).loglik;
        const double bf = likelihood::brute_force_log_likelihood(system, model, {}, y).loglik;
        const double rel = std::fabs(fwd - bf) / std::max(1.0, std::fabs(bf));
        worst = std::max(worst, rel);
        if (rel <= 1e-10) ++ok;
    }
    report(1, "forward and exhaustive log-likelihoods agree to 1e-10 relative", ok == 100,
           "instances=" + std::to_string(ok) + "/100, worst rel diff=" + fmt(worst));
}

void criterion_2_factor_invariance() {
    const ObservationModel model = ObservationModel::gaussian("gaussian", {0.0, 1.0}, 0.5);
    const MarkovSystem shift = iid_chain(0.5);
    const systems::HiddenModel coded = systems::HiddenModel::from_coded(systems::make_doubling_map(53));
    const Family doubling = family::make_doubling_family(box1(0.0, 1.0), 53, model);
    int ok = 0;
    double worst_z = 0.0;
    for (int d = 0; d < 20; ++d) {
        const ObservationSequence y =
            family::simulate_sequence(doubling, {0.5}, 20, rng::derive_seed(90002, static_cast<std::uint64_t>(d)));
        const double fwd = likelihood::forward_log_likelihood(shift, model, {}, y).loglik;
        const likelihood::LogLikelihoodResult mc = likelihood::mc_log_likelihood(
            coded, model, {}, y, 100000, rng::derive_seed(90003, static_cast<std::uint64_t>(d)));
        const double z = std::fabs(mc.loglik - fwd) / *mc.mc_std_error;
        worst_z = std::max(worst_z, z);
        if (z <= 3.0) ++ok;
    }
    report(2, "doubling-map MC likelihood matches the conjugate shift's forward value", ok == 20,
           "datasets=" + std::to_string(ok) + "/20, worst |z|=" + fmt(worst_z));
}

std::vector<double> sweep_medians(const std::vector<inference::SweepCell>& cells,
                                  const std::vector<long>& n_list, std::vector<int>* failures) {
    std::vector<double> medians;
    for (long n : n_list) {
        std::vector<double> d;
        int bad = 0;
        for (const auto& c : cells) {
            if (c.n != n) continue;
            if (c.ok) d.push_back(c.distance);
            else ++bad;
        }
        std::sort(d.begin(), d.end());
        const std::size_t k = d.size();
        medians.push_back(k == 0 ? std::nan("") : (k % 2 ? d[k / 2] : 0.5 * (d[k / 2 - 1] + d[k / 2])));
        if (failures) failures->push_back(bad);
    }
    return medians;
}

void criterion_3_consistency() {
    const Family fam =
        family::make_flip2_family(box1(0.01, 0.99), ObservationModel::gaussian("gaussian", {0.0, 1.0}, 0.5));
    const inference::EquivalenceClass cls = inference::EquivalenceClass::singleton({0.3});
    const std::vector<long> n_list = {100, 1000, 10000};
    inference::SweepOptions opts;
    opts.resolution = {101};
    const auto cells = inference::consistency_sweep(fam, {0.3}, cls, n_list, 20, 90004, opts);
    std::vector<int> failures;
    const std::vector<double> med = sweep_medians(cells, n_list, &failures);
    const bool decreasing = med[0] > med[1] && med[1] > med[2];
    const bool small = med[2] < 0.05;
    const bool clean = failures[0] + failures[1] + failures[2] == 0;
    report(3, "flip2 median estimation error shrinks with n and ends below 0.05",
           decreasing && small && clean,
           "medians=" + fmt(med[0]) + "/" + fmt(med[1]) + "/" + fmt(med[2]));
}

void criterion_4_equivalence_class() {
    const Family fam = family::make_bsc2_family(box1(0.02, 0.98), 0.25);
    const inference::EquivalenceClass cls = inference::EquivalenceClass::from_points({{0.3}, {0.7}});
    const std::vector<long> n_list = {1000, 10000};
    inference::SweepOptions opts;
    opts.resolution = {101};
    const int reps = 20;
    const auto cells = inference::consistency_sweep(fam, {0.3}, cls, n_list, reps, 90005, opts);
    const std::vector<double> med = sweep_medians(cells, n_list, nullptr);
    const bool converges = med[1] < 0.05;

    // The laws at 0.3 and 0.7 coincide, so nothing can force the estimate to
    // the point 0.3: certify per replicate that the normalized forward values
    // at the two representatives agree to 1e-9.
    int certified = 0;
    int upper_branch = 0;
    const systems::HiddenModel hidden = fam.hidden({0.3});
    for (const auto& c : cells) {
        if (c.n != 10000 || !c.ok) continue;
        if (c.theta_hat[0] > 0.5) ++upper_branch;
        const std::size_t cell_index = 1 * reps + static_cast<std::size_t>(c.replication);
        const ObservationSequence y =
            family::simulate_sequence(fam, {0.3}, c.n, rng::derive_seed(90005, cell_index));
        const double l_lo =
            likelihood::forward_log_likelihood(*hidden.markov, fam.observation(), {0.3}, y).loglik;
        const double l_hi =
            likelihood::forward_log_likelihood(*hidden.markov, fam.observation(), {0.7}, y).loglik;
        if (std::fabs(l_lo - l_hi) / static_cast<double>(c.n) <= 1e-9) ++certified;
    }
    const bool flat = certified == reps;
    const bool detected = inference::numerically_equivalent(fam, {0.3}, {0.7}, 90006, 300, 50);
    // With this seed some replicates land near 0.7, so the distance to the
    // point 0.3 alone does not shrink even as the class distance does.
    const bool point_not_forced = upper_branch > 0;
    report(4, "bsc2 estimates converge to the class {0.3, 0.7}, not to the point",
           converges && flat && detected && point_not_forced,
           "median class distance=" + fmt(med[1]) + ", flat-likelihood certificates=" +
               std::to_string(certified) + "/20, upper-branch picks=" + std::to_string(upper_branch) +
               "/20");
}

void criterion_5_mixing_bound() {
    rng::Engine eng(90007);
    int checked = 0;
    int violations = 0;
    while (checked < 1000) {
        const int size = 2 + static_cast<int>(eng.next_u64() % 2);
        const MarkovSystem system = random_stochastic_system(eng, size);
        const ObservationModel model = random_model(eng, size);
        const int m = static_cast<int>(eng.next_u64() % 3);
        const int t = 1 + static_cast<int>(eng.next_u64() % 2);
        const int ell = 1 + static_cast<int>(eng.next_u64() % 3);
        std::vector<std::vector<double>> blocks(static_cast<std::size_t>(t) + 1,
                                                std::vector<double>(static_cast<std::size_t>(m) + 1));
        for (auto& b : blocks) {
            for (double& v : b) {
                v = model.integer_valued() ? static_cast<double>(eng.next_u64() %
                                                                 static_cast<std::uint64_t>(model.y_count()))
                                           : 3.0 * eng.next_unit() - 1.0;
            }
        }
        const conditions::MixingBoundCheck check =
            conditions::mixing_product_bound_check(system, model, {}, m, t, ell, blocks);
        if (!check.primitive) continue;
        ++checked;
        if (!check.pass) ++violations;
    }
    Matrix period(2, 2);
    period(0, 1) = 1.0;
    period(1, 0) = 1.0;
    const conditions::MixingCertificate control = conditions::psi_mixing_constant(
        systems::make_markov_system(
            systems::TransitionStructure(systems::Alphabet{2}, {{0, 1}, {1, 0}}), period, {0.5, 0.5}),
        3);
    report(5, "mixing product bound holds with the certificate constant",
           violations == 0 && !control.primitive,
           "instances=1000, violations=" + std::to_string(violations) +
               ", period-2 control primitive=" + (control.primitive ? "true" : "false"));
}

void criterion_6_ld_rate() {
    Matrix f(2, 2);
    f(1, 0) = 1.0;
    f(1, 1) = 1.0;  // current symbol
    const conditions::LDRateResult r = conditions::ld_rate(iid_chain(0.5), f, 0.25);
    const double H = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    const double expected = std::log(2.0) - H;
    const double err = std::fabs(r.rate_plus - expected);
    report(6, "fair-coin large-deviation rate at 3/4 matches log 2 - H(3/4)", err < 1e-6,
           "rate=" + fmt(r.rate_plus) + ", closed form=" + fmt(expected) + ", |diff|=" + fmt(err));
}

void criterion_7_identifiability() {
    const Family fam = family::make_iid2_family(box1(0.05, 0.95), identity_channel());
    const conditions::SeparationReport rep =
        conditions::identifiability_separation(fam, {0.3}, {0.7}, 1000, 100, 90008);
    const double closed_form = 0.3 * std::log(3.0 / 7.0) + 0.7 * std::log(7.0 / 3.0);  // 0.338919...
    const bool near_stated = std::fabs(rep.kl_rate_estimate - 0.33647) <= 3.0 * rep.kl_rate_se;
    const bool near_oracle = std::fabs(rep.kl_rate_estimate - closed_form) <= 3.0 * rep.kl_rate_se;
    const bool decays = rep.log_rate_theta + 3.0 * rep.log_rate_theta_se < 0.0;
    const bool theta0_mass = rep.p_theta0_An > 0.5;
    report(7, "Bernoulli(0.3)/(0.7) pair separates at the expected rate",
           near_stated && near_oracle && decays && theta0_mass,
           "kl rate=" + fmt(rep.kl_rate_estimate) + " (se " + fmt(rep.kl_rate_se) +
               "), log rate under theta=" + fmt(rep.log_rate_theta) +
               ", P_theta0(A_n)=" + fmt(rep.p_theta0_An));
}

void criterion_8_entropy_rate() {
    const MarkovSystem s = iid_chain(0.3);
    const ObservationModel m = identity_channel();
    const likelihood::EntropyRateEstimate a = likelihood::entropy_rate_estimate(s, m, {}, 100000, 4, 90009);
    const likelihood::EntropyRateEstimate b = likelihood::entropy_rate_estimate(s, m, {}, 100000, 4, 90009);
    const bool accurate = std::fabs(a.h_hat - (-0.6109)) < 0.01;
    const bool deterministic = a.h_hat == b.h_hat && a.per_rep == b.per_rep;
    report(8, "entropy rate of noiseless Bernoulli(0.3) is -0.6109 within 0.01", accurate && deterministic,
           "h_hat=" + fmt(a.h_hat) + ", deterministic=" + (deterministic ? "yes" : "no"));
}

void criterion_9_block_bound() {
    const Family fam =
        family::make_flip2_family(box1(0.01, 0.99), ObservationModel::gaussian("gaussian", {0.0, 1.0}, 0.5));
    const std::vector<ParameterPoint> u = {{0.25}, {0.275}, {0.3}, {0.325}, {0.35}};
    conditions::BlockBoundOptions opts;
    opts.lhs_reps = 30;
    opts.rhs_reps = 200;
    const conditions::BlockBoundCheck check =
        conditions::block_parsing_bound_check(fam, u, {0.3}, 20, 1, 10000, 90010, opts);
    report(9, "block-parsing bound holds on the flip2 neighborhood", check.pass,
           "lhs=" + fmt(check.lhs) + " (se " + fmt(check.lhs_se) + "), rhs=" + fmt(check.rhs) +
               " (se " + fmt(check.rhs_se) + ")");
}

// --------------------------------------------------------------------------

std::string run_cli(const std::string& args, int* exit_code) {
    const std::string cmd = std::string(DSMLE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        *exit_code = -1;
        return "";
    }
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) out += buf;
    *exit_code = pclose(pipe);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    const std::size_t nl = out.find_last_of('\n');
    return nl == std::string::npos ? out : out.substr(nl + 1);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10_reproducibility() {
    const fs::path root = fs::temp_directory_path() / "dsmle_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);

    const std::string config = R"({
      "family": "flip2",
      "box": [[0.05, 0.95]],
      "theta0": [0.3],
      "observation": {"kind": "gaussian", "means": [0.0, 1.0], "sigma": 0.5},
      "n": 200,
      "n_list": [100, 300],
      "replications": 3,
      "grid_resolution": [21],
      "seed": 424242
    })";
    const fs::path cfg_path = root / "config.json";
    {
        std::ofstream f(cfg_path);
        f << config;
    }

    bool ok = true;
    int code = 0;

    const std::string sim1 = run_cli("simulate --config " + cfg_path.string() + " --out " +
                                         (root / "sim1").string(), &code);
    ok = ok && code == 0;
    const std::string sim2 = run_cli("simulate --config " + cfg_path.string() + " --out " +
                                         (root / "sim2").string(), &code);
    ok = ok && code == 0;
    const bool sim_equal = !sim1.empty() && slurp(fs::path(sim1) / "observations.txt") ==
                                                slurp(fs::path(sim2) / "observations.txt");
    ok = ok && sim_equal;

    const std::string mle1 = run_cli("mle --config " + cfg_path.string() + " --data " + sim1 +
                                         "/observations.txt --out " + (root / "mle1").string(), &code);
    ok = ok && code == 0;
    const std::string mle2 = run_cli("mle --config " + cfg_path.string() + " --data " + sim2 +
                                         "/observations.txt --out " + (root / "mle2").string() +
                                         " --threads 4", &code);
    ok = ok && code == 0;
    const bool mle_equal = !mle1.empty() &&
                           slurp(fs::path(mle1) / "surface.csv") == slurp(fs::path(mle2) / "surface.csv") &&
                           slurp(fs::path(mle1) / "theta_hat.json") == slurp(fs::path(mle2) / "theta_hat.json");
    ok = ok && mle_equal;

    const std::string con1 = run_cli("consistency --config " + cfg_path.string() + " --out " +
                                         (root / "con1").string() + " --threads 1", &code);
    ok = ok && code == 0;
    const std::string con2 = run_cli("consistency --config " + cfg_path.string() + " --out " +
                                         (root / "con2").string() + " --threads 4", &code);
    ok = ok && code == 0;
    const bool sweep_equal = !con1.empty() &&
                             slurp(fs::path(con1) / "sweep.csv") == slurp(fs::path(con2) / "sweep.csv") &&
                             slurp(fs::path(con1) / "summary.json") == slurp(fs::path(con2) / "summary.json");
    ok = ok && sweep_equal;

    const std::string detail = std::string("simulate=") + (sim_equal ? "identical" : "DIFFERS") +
                               ", mle=" + (mle_equal ? "identical" : "DIFFERS") +
                               ", consistency(threads 1 vs 4)=" + (sweep_equal ? "identical" : "DIFFERS");
    report(10, "CLI reruns with one config and seed are byte identical", ok, detail);
}

}  // namespace

int main() {
    std::printf("dsmle acceptance suite\n");
    criterion_1_forward_vs_enumeration();
    criterion_2_factor_invariance();
    criterion_3_consistency();
    criterion_4_equivalence_class();
    criterion_5_mixing_bound();
    criterion_6_ld_rate();
    criterion_7_identifiability();
    criterion_8_entropy_rate();
    criterion_9_block_bound();
    criterion_10_reproducibility();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
