#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdos/design.hpp"
#include "fdos/model.hpp"
#include "fdos/tuning.hpp"

namespace fdos {

/// %.17g: enough digits to round-trip any double.
std::string format_double(double value);

/// Switches applied per subject and channel, in this order: pad, resample,
/// differentiate, Fourier transform.
struct PreprocessOptions {
    bool pad = false;                 // pad shorter series with their last value
    std::size_t resample_points = 0;  // 0 keeps the observed grid
    bool differentiate = false;       // replace each series by its velocity
    std::optional<double> fft_max_hz; // magnitude spectrum on [0, f_max]
};

struct LongRecord {
    std::string subject_id;
    std::string covariate_id;
    double t = 0.0;
    double value = 0.0;
    std::size_t line = 0;
};

/// Rows of a `subject_id,covariate_id,t,value` file. Errors carry the line
/// number.
std::vector<LongRecord> read_long_records(std::istream& in, const std::string& source = "signals");

/// Rows of a `subject_id,y` file, in file order.
std::vector<std::pair<std::string, double>> read_responses(std::istream& in, const std::string& source = "responses");

/// Dense dataset from long records. Subjects and covariates keep the order
/// of first appearance. Without a responses table Y is zero.
FunctionalDataset assemble_dataset(const std::vector<LongRecord>& records,
                                   const std::vector<std::pair<std::string, double>>* responses,
                                   const PreprocessOptions& options = {});

FunctionalDataset load_long_csv(const std::filesystem::path& signals,
                                const std::optional<std::filesystem::path>& responses,
                                const PreprocessOptions& options = {});

void write_long_csv(std::ostream& out, const FunctionalDataset& data);
void write_responses_csv(std::ostream& out, const FunctionalDataset& data);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Result document: config echo, intercept, coefficients, selected set,
/// zero subregions, diagnostics and fitted values.
std::string result_to_json(const FitResult& fit);
FitResult result_from_json(const std::string& text);

/// Settings shared by the command line tools.
struct RunConfig {
    std::optional<double> domain_start; // defaults to the grid's end points
    std::optional<double> domain_end;
    int intervals = 20;                 // equal knot intervals
    int degree = 3;
    Mode mode = Mode::faddos;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double varphi = 7e-6;
    double rho = 1.0;
    double eps_tol = 1e-4;
    int max_iter = 5000;
    double nu_factor = 5.0;
    double a = 1.0;
    Sweep sweep = Sweep::gauss_seidel;
    TuningGrid tuning = TuningGrid::defaults();
    std::uint64_t seed = 1;
    PreprocessOptions preprocess;

    void validate() const;
    FitOptions fit_options() const;
    BasisSystem basis_for(const EvalGrid& grid) const;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);

} // namespace fdos
