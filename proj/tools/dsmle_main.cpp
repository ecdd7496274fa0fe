// Command-line front end. Links only the C API of the shared library.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dsmle/capi.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (default: config value or ./runs)");
    cmd->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--threads", opts.threads, "worker threads (affects wall time only, never results)");
}

// 0 ok; 1 check failures / degenerate results; 2 invalid input.
int exit_code_for(dsmle_status status) {
    switch (status) {
        case DSMLE_OK:
            return 0;
        case DSMLE_ERR_ALL_DEGENERATE:
        case DSMLE_ERR_INTERNAL:
            return 1;
        default:
            return 2;
    }
}

int fail(dsmle_status status) {
    std::fprintf(stderr, "error (%s): %s\n", dsmle_status_name(status), dsmle_last_error());
    return exit_code_for(status);
}

class ConfigHandle {
  public:
    ~ConfigHandle() { dsmle_config_free(cfg_); }
    dsmle_status open(const CommonOpts& opts) {
        const dsmle_status st = dsmle_config_load_file(opts.config_path.c_str(), &cfg_);
        if (st != DSMLE_OK) return st;
        if (opts.seed_set) dsmle_config_set_seed(cfg_, opts.seed);
        if (opts.threads > 0) dsmle_config_set_threads(cfg_, opts.threads);
        if (!opts.out_dir.empty()) dsmle_config_set_output_dir(cfg_, opts.out_dir.c_str());
        return DSMLE_OK;
    }
    dsmle_config* get() const { return cfg_; }

  private:
    dsmle_config* cfg_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dsmle: maximum likelihood estimation for hidden dynamical systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dsmle_version()));

    CommonOpts sim_opts, surf_opts, mle_opts, cons_opts, ver_opts;
    std::string surf_data, mle_data;

    CLI::App* simulate = app.add_subcommand("simulate", "sample an observation sequence under theta0");
    add_common(simulate, sim_opts);

    CLI::App* surface = app.add_subcommand("likelihood-surface", "normalized log-likelihood over the box");
    add_common(surface, surf_opts);
    surface->add_option("--data", surf_data, "observations file")->required();

    CLI::App* mle = app.add_subcommand("mle", "grid search plus refinement for the approximate MLE");
    add_common(mle, mle_opts);
    mle->add_option("--data", mle_data, "observations file")->required();

    CLI::App* consistency = app.add_subcommand("consistency", "estimation-error sweep over n_list");
    add_common(consistency, cons_opts);

    CLI::App* verify = app.add_subcommand("verify-conditions", "diagnostic certificates for the config");
    add_common(verify, ver_opts);

    CLI11_PARSE(app, argc, argv);

    char run_dir[4096] = {0};

    if (simulate->parsed()) {
        ConfigHandle cfg;
        dsmle_status st = cfg.open(sim_opts);
        if (st != DSMLE_OK) return fail(st);
        st = dsmle_run_simulate(cfg.get(), run_dir, sizeof(run_dir));
        if (st != DSMLE_OK) return fail(st);
        std::printf("%s\n", run_dir);
        return 0;
    }
    if (surface->parsed()) {
        ConfigHandle cfg;
        dsmle_status st = cfg.open(surf_opts);
        if (st != DSMLE_OK) return fail(st);
        st = dsmle_run_likelihood_surface(cfg.get(), surf_data.c_str(), run_dir, sizeof(run_dir));
        if (st != DSMLE_OK) return fail(st);
        std::printf("%s\n", run_dir);
        return 0;
    }
    if (mle->parsed()) {
        ConfigHandle cfg;
        dsmle_status st = cfg.open(mle_opts);
        if (st != DSMLE_OK) return fail(st);
        st = dsmle_run_mle(cfg.get(), mle_data.c_str(), run_dir, sizeof(run_dir));
        if (st != DSMLE_OK) return fail(st);
        std::printf("%s\n", run_dir);
        return 0;
    }
    if (consistency->parsed()) {
        ConfigHandle cfg;
        dsmle_status st = cfg.open(cons_opts);
        if (st != DSMLE_OK) return fail(st);
        st = dsmle_run_consistency(cfg.get(), run_dir, sizeof(run_dir));
        if (st != DSMLE_OK) return fail(st);
        std::printf("%s\n", run_dir);
        return 0;
    }
    if (verify->parsed()) {
        ConfigHandle cfg;
        dsmle_status st = cfg.open(ver_opts);
        if (st != DSMLE_OK) return fail(st);
        int failures = 0;
        st = dsmle_run_verify_conditions(cfg.get(), run_dir, sizeof(run_dir), &failures);
        if (st != DSMLE_OK) return fail(st);
        std::printf("%s\n", run_dir);
        return failures ? 1 : 0;
    }
    return 2;
}
