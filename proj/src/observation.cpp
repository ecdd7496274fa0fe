#include "dsmle/observation.hpp"

#include <algorithm>
#include <cmath>

namespace dsmle::observation {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;
constexpr double kRowSumTol = 1e-12;

int checked_channel_symbol(const ObservationModel& model, double y) {
    const double r = std::nearbyint(y);
    if (std::fabs(y - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(model.y_count())) {
        throw Error("channel observation out of range");
    }
    return static_cast<int>(r);
}

}  // namespace

ObservationModel ObservationModel::discrete_channel(std::string name, int symbols, int y_count,
                                                    ChannelFn fn) {
    if (symbols < 1 || y_count < 1) throw Error("channel needs at least one symbol and one output");
    ObservationModel m;
    m.kind_ = ObsKind::DiscreteChannel;
    m.name_ = std::move(name);
    m.symbols_ = symbols;
    m.y_count_ = y_count;
    m.channel_ = std::move(fn);
    return m;
}

ObservationModel ObservationModel::discrete_channel(std::string name, const Matrix& fixed) {
    Matrix copy = fixed;
    return discrete_channel(std::move(name), static_cast<int>(fixed.rows()),
                            static_cast<int>(fixed.cols()),
                            [copy](const ParameterPoint&) { return copy; });
}

ObservationModel ObservationModel::gaussian(std::string name, int symbols, MeansFn means, ScaleFn sigma) {
    if (symbols < 1) throw Error("need at least one symbol");
    ObservationModel m;
    m.kind_ = ObsKind::Gaussian;
    m.name_ = std::move(name);
    m.symbols_ = symbols;
    m.means_ = std::move(means);
    m.scale_ = std::move(sigma);
    return m;
}

ObservationModel ObservationModel::gaussian(std::string name, std::vector<double> means, double sigma) {
    const int symbols = static_cast<int>(means.size());
    return gaussian(std::move(name), symbols,
                    [means](const ParameterPoint&) { return means; },
                    [sigma](const ParameterPoint&) { return sigma; });
}

ObservationModel ObservationModel::laplace(std::string name, int symbols, MeansFn means, ScaleFn scale) {
    ObservationModel m = gaussian(std::move(name), symbols, std::move(means), std::move(scale));
    m.kind_ = ObsKind::Laplace;
    return m;
}

ObservationModel ObservationModel::laplace(std::string name, std::vector<double> means, double scale) {
    const int symbols = static_cast<int>(means.size());
    return laplace(std::move(name), symbols,
                   [means](const ParameterPoint&) { return means; },
                   [scale](const ParameterPoint&) { return scale; });
}

Matrix ObservationModel::channel_matrix(const ParameterPoint& theta) const {
    if (kind_ != ObsKind::DiscreteChannel) throw UnsupportedVariantError("model has no channel matrix");
    Matrix m = channel_(theta);
    if (m.rows() != static_cast<std::size_t>(symbols_) || m.cols() != static_cast<std::size_t>(y_count_)) {
        throw Error("channel matrix has wrong shape");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j) < 0.0) throw Error("channel matrix has a negative entry");
            row += m(i, j);
        }
        if (std::fabs(row - 1.0) > kRowSumTol) throw Error("channel matrix row does not sum to 1");
    }
    return m;
}

std::vector<double> ObservationModel::means(const ParameterPoint& theta) const {
    if (kind_ == ObsKind::DiscreteChannel) throw UnsupportedVariantError("channel has no mean function");
    std::vector<double> m = means_(theta);
    if (m.size() != static_cast<std::size_t>(symbols_)) throw Error("mean function has wrong length");
    return m;
}

double ObservationModel::scale(const ParameterPoint& theta) const {
    if (kind_ == ObsKind::DiscreteChannel) throw UnsupportedVariantError("channel has no scale");
    const double s = scale_(theta);
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("scale must be positive on the parameter box");
    return s;
}

ObservationModel ObservationModel::with_log_reference_scale(double c) const {
    ObservationModel m = *this;
    m.log_ref_scale_ += c;
    return m;
}

double density(const ObservationModel& model, const ParameterPoint& theta, double y, int symbol) {
    if (symbol < 0 || symbol >= model.symbol_count()) throw Error("symbol out of range");
    const double ref = std::exp(model.log_reference_scale());
    switch (model.kind()) {
        case ObsKind::DiscreteChannel: {
            const Matrix m = model.channel_matrix(theta);
            return ref * m(symbol, checked_channel_symbol(model, y));
        }
        case ObsKind::Gaussian: {
            const double s = model.scale(theta);
            const double d = model.means(theta)[symbol] - y;
            return ref * std::exp(-d * d / (2.0 * s * s)) / (s * kSqrt2Pi);
        }
        case ObsKind::Laplace: {
            const double b = model.scale(theta);
            const double d = std::fabs(model.means(theta)[symbol] - y);
            return ref * std::exp(-d / b) / (2.0 * b);
        }
    }
    throw Error("unreachable");
}

BoundDensity::BoundDensity(const ObservationModel& model, const ParameterPoint& theta)
    : kind_(model.kind()) {
    const double ref = std::exp(model.log_reference_scale());
    if (kind_ == ObsKind::DiscreteChannel) {
        channel_ = model.channel_matrix(theta);
        means_.assign(static_cast<std::size_t>(model.symbol_count()), 0.0);
        norm_ = ref;
    } else {
        means_ = model.means(theta);
        scale_ = model.scale(theta);
        norm_ = kind_ == ObsKind::Gaussian ? ref / (scale_ * kSqrt2Pi) : ref / (2.0 * scale_);
    }
}

double BoundDensity::operator()(double y, int symbol) const {
    switch (kind_) {
        case ObsKind::DiscreteChannel: {
            const double r = std::nearbyint(y);
            if (std::fabs(y - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(channel_.cols())) {
                throw Error("channel observation out of range");
            }
            return norm_ * channel_(symbol, static_cast<std::size_t>(r));
        }
        case ObsKind::Gaussian: {
            const double d = means_[static_cast<std::size_t>(symbol)] - y;
            return norm_ * std::exp(-d * d / (2.0 * scale_ * scale_));
        }
        case ObsKind::Laplace: {
            const double d = std::fabs(means_[static_cast<std::size_t>(symbol)] - y);
            return norm_ * std::exp(-d / scale_);
        }
    }
    throw Error("unreachable");
}

double sample(const ObservationModel& model, const ParameterPoint& theta, int symbol, rng::Engine& eng) {
    if (symbol < 0 || symbol >= model.symbol_count()) throw Error("symbol out of range");
    switch (model.kind()) {
        case ObsKind::DiscreteChannel: {
            const Matrix m = model.channel_matrix(theta);
            std::vector<double> row(m.cols());
            for (std::size_t j = 0; j < m.cols(); ++j) row[j] = m(symbol, j);
            return static_cast<double>(eng.next_categorical(row));
        }
        case ObsKind::Gaussian:
            return model.means(theta)[symbol] + model.scale(theta) * eng.next_normal();
        case ObsKind::Laplace:
            return model.means(theta)[symbol] + eng.next_laplace(model.scale(theta));
    }
    throw Error("unreachable");
}

double sample(const ObservationModel& model, const ParameterPoint& theta, int symbol, std::uint64_t seed) {
    rng::Engine eng(seed);
    return sample(model, theta, symbol, eng);
}

double gamma_sup(const ObservationModel& model, const ParameterPoint& theta, double y) {
    double best = 0.0;
    for (int a = 0; a < model.symbol_count(); ++a) best = std::max(best, density(model, theta, y, a));
    return best;
}

RegularityConstants regularity_constants(const ObservationModel& model, const ParameterPoint& theta) {
    RegularityConstants c;
    if (model.kind() == ObsKind::DiscreteChannel) return c;  // locally constant: K = 0

    const std::vector<double> mu = model.means(theta);
    const auto [mn, mx] = std::minmax_element(mu.begin(), mu.end());
    const double range = *mx - *mn;
    // C6 is the Lipschitz constant of the mean function for the shift metric:
    // symbols disagree at separation 0, where d = beta^0 = 1.
    c.C6 = range;
    if (model.kind() == ObsKind::Gaussian) {
        const double s = model.scale(theta);
        double max_abs_sum = 0.0;
        for (double a : mu) {
            for (double b : mu) max_abs_sum = std::max(max_abs_sum, std::fabs(a + b));
        }
        c.C4 = max_abs_sum / (2.0 * s * s);
        c.C5 = 1.0 / (s * s);
    } else {  // Laplace: |log g(y|x) - log g(y|z)| <= |phi(x)-phi(z)| / b
        c.C4 = 1.0 / model.scale(theta);
        c.C5 = 0.0;
    }
    return c;
}

double lipschitz_K(const RegularityConstants& c, double y) { return c.C6 * (c.C4 + c.C5 * std::fabs(y)); }

double lipschitz_K(const ObservationModel& model, const ParameterPoint& theta, double y) {
    return lipschitz_K(regularity_constants(model, theta), y);
}

}  // namespace dsmle::observation
