#pragma once

#include <vector>

namespace fdos {

/// Extends every signal to the longest length by repeating its last value.
std::vector<std::vector<double>> pad_last_observation(const std::vector<std::vector<double>>& signals);

/// Piecewise-linear interpolation of (source, values) at `target`. Both grids
/// must be increasing and `target` must lie within the source span.
std::vector<double> resample_linear(const std::vector<double>& values, const std::vector<double>& source,
                                    const std::vector<double>& target);

/// First derivative on a uniform grid: central differences inside,
/// second-order one-sided differences at both ends.
std::vector<double> differentiate(const std::vector<double>& values, const std::vector<double>& grid);

struct Spectrum {
    std::vector<double> frequencies; // 0, df, 2 df, ... <= f_max
    std::vector<double> magnitude;
};

/// Single-sided amplitude spectrum up to f_max. The 0 Hz bin holds |mean|;
/// the other bins come from the mean-removed signal under a Hann window,
/// scaled by 2 / sum(window) so a sinusoid centered on a bin reports its
/// amplitude.
Spectrum fft_magnitude(const std::vector<double>& values, double sample_rate, double f_max);

} // namespace fdos
