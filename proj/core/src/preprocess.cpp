#include "fdos/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "fdos/error.hpp"

namespace fdos {

std::vector<std::vector<double>> pad_last_observation(const std::vector<std::vector<double>>& signals) {
    std::size_t longest = 0;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        if (signals[i].empty()) {
            throw ShapeError("pad_last_observation: signal " + std::to_string(i) + " is empty");
        }
        longest = std::max(longest, signals[i].size());
    }
    std::vector<std::vector<double>> out = signals;
    for (auto& s : out) {
        s.resize(longest, s.back());
    }
    return out;
}

std::vector<double> resample_linear(const std::vector<double>& values, const std::vector<double>& source,
                                    const std::vector<double>& target) {
    if (values.size() != source.size()) {
        throw ShapeError("resample_linear: values and source grid differ in length");
    }
    if (source.empty()) {
        throw ShapeError("resample_linear: empty source grid");
    }
    for (std::size_t i = 1; i < source.size(); ++i) {
        if (!(source[i] > source[i - 1])) {
            throw DomainError("resample_linear: source grid is not strictly increasing");
        }
    }
    const double lo = source.front();
    const double hi = source.back();
    const double tol = 1e-12 * std::max(1.0, hi - lo);
    std::vector<double> out(target.size());
    for (std::size_t k = 0; k < target.size(); ++k) {
        const double t = target[k];
        if (t < lo - tol || t > hi + tol) {
            throw DomainError("resample_linear: target point " + std::to_string(t) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        auto it = std::upper_bound(source.begin(), source.end(), t);
        if (it == source.begin()) {
            out[k] = values.front();
            continue;
        }
        if (it == source.end()) {
            out[k] = values.back();
            continue;
        }
        const auto i = static_cast<std::size_t>(it - source.begin()) - 1;
        if (t == source[i]) {
            out[k] = values[i];
            continue;
        }
        const double w = (t - source[i]) / (source[i + 1] - source[i]);
        out[k] = (1.0 - w) * values[i] + w * values[i + 1];
    }
    return out;
}

std::vector<double> differentiate(const std::vector<double>& values, const std::vector<double>& grid) {
    const std::size_t n = values.size();
    if (n < 3) {
        throw ShapeError("differentiate: need at least 3 samples, got " + std::to_string(n));
    }
    if (grid.size() != n) {
        throw ShapeError("differentiate: values and grid differ in length");
    }
    const double h = (grid.back() - grid.front()) / static_cast<double>(n - 1);
    if (!(h > 0.0)) {
        throw DomainError("differentiate: grid is not increasing");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-6 * h) {
            throw DomainError("differentiate: grid is not uniform");
        }
    }
    std::vector<double> out(n);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    return out;
}

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

Spectrum fft_magnitude(const std::vector<double>& values, double sample_rate, double f_max) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw ShapeError("fft_magnitude: need at least 2 samples");
    }
    if (!(sample_rate > 0.0)) {
        throw ConfigError("fft_magnitude: sample rate must be positive");
    }
    const double nyquist = sample_rate / 2.0;
    if (!(f_max >= 0.0) || f_max > nyquist * (1.0 + 1e-12)) {
        throw ConfigError("fft_magnitude: f_max = " + std::to_string(f_max) + " Hz exceeds the Nyquist frequency " +
                          std::to_string(nyquist) + " Hz");
    }

    double mean = 0.0;
    for (const double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(n);

    std::vector<double> in(n);
    double window_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        window_sum += w;
        in[i] = (values[i] - mean) * w;
    }

    const std::size_t bins = n / 2 + 1;
    std::vector<std::complex<double>> out(bins);
    {
        std::lock_guard lock(planner_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
        if (plan == nullptr) {
            throw NumericalError("fft_magnitude: FFTW planning failed");
        }
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    const double df = sample_rate / static_cast<double>(n);
    const auto last = std::min(bins - 1, static_cast<std::size_t>(std::floor(f_max / df + 1e-9)));
    Spectrum spec;
    spec.frequencies.reserve(last + 1);
    spec.magnitude.reserve(last + 1);
    for (std::size_t k = 0; k <= last; ++k) {
        spec.frequencies.push_back(df * static_cast<double>(k));
        spec.magnitude.push_back(k == 0 ? std::abs(mean) : 2.0 * std::abs(out[k]) / window_sum);
    }
    return spec;
}

} // namespace fdos
