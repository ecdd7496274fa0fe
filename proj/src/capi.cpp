#include "dsmle/capi.h"

#include <cstring>
#include <string>

#include "dsmle/harness.hpp"
#include "dsmle/types.hpp"

struct dsmle_config {
    dsmle::harness::Config cfg;
};

namespace {

thread_local std::string g_last_error;

void copy_out(const std::string& s, char* buf, size_t bufsize) {
    if (!buf || bufsize == 0) return;
    const size_t n = s.size() < bufsize - 1 ? s.size() : bufsize - 1;
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
}

dsmle_status set_error(dsmle_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename Fn>
dsmle_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const dsmle::ConfigError& e) {
        return set_error(DSMLE_ERR_CONFIG, e.what());
    } catch (const dsmle::DataFormatError& e) {
        return set_error(DSMLE_ERR_DATA_FORMAT, e.what());
    } catch (const dsmle::IoError& e) {
        return set_error(DSMLE_ERR_IO, e.what());
    } catch (const dsmle::NonPrimitiveError& e) {
        return set_error(DSMLE_ERR_NON_PRIMITIVE, e.what());
    } catch (const dsmle::EigenFailureError& e) {
        return set_error(DSMLE_ERR_EIGEN_FAILURE, e.what());
    } catch (const dsmle::TooLargeError& e) {
        return set_error(DSMLE_ERR_TOO_LARGE, e.what());
    } catch (const dsmle::UnsupportedVariantError& e) {
        return set_error(DSMLE_ERR_UNSUPPORTED, e.what());
    } catch (const dsmle::DepthExceededError& e) {
        return set_error(DSMLE_ERR_DEPTH_EXCEEDED, e.what());
    } catch (const dsmle::AllDegenerateError& e) {
        return set_error(DSMLE_ERR_ALL_DEGENERATE, e.what());
    } catch (const dsmle::Error& e) {
        return set_error(DSMLE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return set_error(DSMLE_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(DSMLE_ERR_INTERNAL, "unknown error");
    }
}

}  // namespace

extern "C" {

dsmle_status dsmle_config_load_file(const char* path, dsmle_config** out) {
    if (!path || !out) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() {
        auto* handle = new dsmle_config{dsmle::harness::parse_config_file(path)};
        *out = handle;
        g_last_error.clear();
        return DSMLE_OK;
    });
}

dsmle_status dsmle_config_load_string(const char* json_text, dsmle_config** out) {
    if (!json_text || !out) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() {
        auto* handle = new dsmle_config{dsmle::harness::parse_config_text(json_text)};
        *out = handle;
        g_last_error.clear();
        return DSMLE_OK;
    });
}

void dsmle_config_free(dsmle_config* cfg) { delete cfg; }

dsmle_status dsmle_config_set_seed(dsmle_config* cfg, uint64_t seed) {
    if (!cfg) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        dsmle::harness::set_config_seed(cfg->cfg, seed);
        return DSMLE_OK;
    });
}

dsmle_status dsmle_config_set_threads(dsmle_config* cfg, int threads) {
    if (!cfg) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null config");
    cfg->cfg.threads = threads < 1 ? 1 : threads;
    return DSMLE_OK;
}

dsmle_status dsmle_config_set_output_dir(dsmle_config* cfg, const char* dir) {
    if (!cfg || !dir) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null argument");
    cfg->cfg.out_dir = dir;
    return DSMLE_OK;
}

dsmle_status dsmle_config_hash(const dsmle_config* cfg, char* buf, size_t bufsize) {
    if (!cfg) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        copy_out(dsmle::harness::config_hash(cfg->cfg), buf, bufsize);
        return DSMLE_OK;
    });
}

dsmle_status dsmle_run_simulate(const dsmle_config* cfg, char* run_dir_buf, size_t bufsize) {
    if (!cfg) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        copy_out(dsmle::harness::run_simulate(cfg->cfg).string(), run_dir_buf, bufsize);
        return DSMLE_OK;
    });
}

dsmle_status dsmle_run_likelihood_surface(const dsmle_config* cfg, const char* data_path,
                                          char* run_dir_buf, size_t bufsize) {
    if (!cfg || !data_path) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() {
        copy_out(dsmle::harness::run_likelihood_surface(cfg->cfg, data_path).string(), run_dir_buf, bufsize);
        return DSMLE_OK;
    });
}

dsmle_status dsmle_run_mle(const dsmle_config* cfg, const char* data_path, char* run_dir_buf,
                           size_t bufsize) {
    if (!cfg || !data_path) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() {
        copy_out(dsmle::harness::run_mle(cfg->cfg, data_path).string(), run_dir_buf, bufsize);
        return DSMLE_OK;
    });
}

dsmle_status dsmle_run_consistency(const dsmle_config* cfg, char* run_dir_buf, size_t bufsize) {
    if (!cfg) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        copy_out(dsmle::harness::run_consistency(cfg->cfg).string(), run_dir_buf, bufsize);
        return DSMLE_OK;
    });
}

dsmle_status dsmle_run_verify_conditions(const dsmle_config* cfg, char* run_dir_buf, size_t bufsize,
                                         int* failures_present) {
    if (!cfg) return set_error(DSMLE_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&]() {
        const dsmle::harness::VerifyOutcome outcome = dsmle::harness::run_verify_conditions(cfg->cfg);
        copy_out(outcome.dir.string(), run_dir_buf, bufsize);
        if (failures_present) *failures_present = outcome.failures_present ? 1 : 0;
        return DSMLE_OK;
    });
}

const char* dsmle_last_error(void) { return g_last_error.c_str(); }

const char* dsmle_version(void) { return dsmle::harness::kLibraryVersion; }

const char* dsmle_status_name(dsmle_status status) {
    switch (status) {
        case DSMLE_OK: return "ok";
        case DSMLE_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case DSMLE_ERR_CONFIG: return "config-error";
        case DSMLE_ERR_DATA_FORMAT: return "data-format-error";
        case DSMLE_ERR_IO: return "io-error";
        case DSMLE_ERR_NON_PRIMITIVE: return "non-primitive";
        case DSMLE_ERR_EIGEN_FAILURE: return "eigen-failure";
        case DSMLE_ERR_TOO_LARGE: return "too-large";
        case DSMLE_ERR_UNSUPPORTED: return "unsupported";
        case DSMLE_ERR_DEPTH_EXCEEDED: return "depth-exceeded";
        case DSMLE_ERR_ALL_DEGENERATE: return "all-degenerate";
        case DSMLE_ERR_INTERNAL: return "internal-error";
    }
    return "unknown";
}

}  // extern "C"
