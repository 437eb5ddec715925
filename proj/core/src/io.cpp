#include "fdos/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "fdos/error.hpp"
#include "fdos/preprocess.hpp"

namespace fdos {

using json = nlohmann::ordered_json;

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

double parse_number(const std::string& text, const std::string& field, const std::string& source, std::size_t line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError(where(source, line) + "field '" + field + "' is not a finite number: '" + text + "'");
    }
    return value;
}

void expect_header(std::istream& in, const std::vector<std::string>& expected, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(where(source, 1) + "empty file, expected a header");
    }
    if (split_fields(line) != expected) {
        std::string want;
        for (const auto& e : expected) {
            want += (want.empty() ? "" : ",") + e;
        }
        throw ParseError(where(source, 1) + "expected header '" + want + "', got '" + trim(line) + "'");
    }
}

struct Series {
    std::vector<double> t;
    std::vector<double> value;
};

/// Uniform continuation of a padded series' time stamps.
std::vector<double> extend_times(const std::vector<double>& t, std::size_t length) {
    std::vector<double> out = t;
    const double h = t.size() >= 2 ? (t.back() - t.front()) / static_cast<double>(t.size() - 1) : 1.0;
    while (out.size() < length) {
        out.push_back(t.front() + h * static_cast<double>(out.size()));
    }
    return out;
}

bool same_times(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    const double span = std::max(1.0, std::abs(a.back() - a.front()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-9 * span) {
            return false;
        }
    }
    return true;
}

} // namespace

std::vector<LongRecord> read_long_records(std::istream& in, const std::string& source) {
    expect_header(in, {"subject_id", "covariate_id", "t", "value"}, source);
    std::vector<LongRecord> records;
    std::string line;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 4) {
            throw ParseError(where(source, number) + "expected 4 fields, got " + std::to_string(f.size()));
        }
        if (f[0].empty() || f[1].empty()) {
            throw ParseError(where(source, number) + "empty subject_id or covariate_id");
        }
        records.push_back({f[0], f[1], parse_number(f[2], "t", source, number),
                           parse_number(f[3], "value", source, number), number});
    }
    return records;
}

std::vector<std::pair<std::string, double>> read_responses(std::istream& in, const std::string& source) {
    expect_header(in, {"subject_id", "y"}, source);
    std::vector<std::pair<std::string, double>> rows;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 2) {
            throw ParseError(where(source, number) + "expected 2 fields, got " + std::to_string(f.size()));
        }
        if (f[0].empty()) {
            throw ParseError(where(source, number) + "empty subject_id");
        }
        if (auto it = seen.find(f[0]); it != seen.end()) {
            throw ParseError(where(source, number) + "duplicate response for subject '" + f[0] +
                             "' (first on line " + std::to_string(it->second) + ")");
        }
        seen.emplace(f[0], number);
        rows.emplace_back(f[0], parse_number(f[1], "y", source, number));
    }
    return rows;
}

FunctionalDataset assemble_dataset(const std::vector<LongRecord>& records,
                                   const std::vector<std::pair<std::string, double>>* responses,
                                   const PreprocessOptions& options) {
    if (records.empty()) {
        throw ShapeError("no signal records");
    }
    std::vector<std::string> subjects;
    std::vector<std::string> covariates;
    std::unordered_map<std::string, std::size_t> subject_index;
    std::unordered_map<std::string, std::size_t> covariate_index;
    std::map<std::pair<std::size_t, std::size_t>, std::map<double, std::pair<double, std::size_t>>> cells;

    for (const auto& rec : records) {
        auto [si, s_new] = subject_index.emplace(rec.subject_id, subjects.size());
        if (s_new) {
            subjects.push_back(rec.subject_id);
        }
        auto [ci, c_new] = covariate_index.emplace(rec.covariate_id, covariates.size());
        if (c_new) {
            covariates.push_back(rec.covariate_id);
        }
        auto& series = cells[{si->second, ci->second}];
        auto [it, inserted] = series.emplace(rec.t, std::make_pair(rec.value, rec.line));
        if (!inserted) {
            throw ParseError("line " + std::to_string(rec.line) + ": duplicate observation (" + rec.subject_id +
                             ", " + rec.covariate_id + ", t=" + format_double(rec.t) + "), first on line " +
                             std::to_string(it->second.second));
        }
    }

    const std::size_t n = subjects.size();
    const std::size_t J = covariates.size();
    std::vector<std::vector<Series>> series(n, std::vector<Series>(J));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < J; ++j) {
            auto it = cells.find({i, j});
            if (it == cells.end()) {
                throw ShapeError("subject '" + subjects[i] + "' has no observations for covariate '" + covariates[j] +
                                 "'");
            }
            for (const auto& [t, v] : it->second) {
                series[i][j].t.push_back(t);
                series[i][j].value.push_back(v.first);
            }
        }
    }

    if (options.pad) {
        std::size_t longest = 0;
        for (const auto& row : series) {
            for (const auto& s : row) {
                longest = std::max(longest, s.t.size());
            }
        }
        for (auto& row : series) {
            for (auto& s : row) {
                s.value = pad_last_observation({s.value, std::vector<double>(longest, 0.0)})[0];
                s.t = extend_times(s.t, longest);
            }
        }
    }

    std::vector<double> common;
    if (options.resample_points > 0) {
        if (options.resample_points < 2) {
            throw ConfigError("resample_points must be at least 2");
        }
        double lo = -INFINITY;
        double hi = INFINITY;
        for (const auto& row : series) {
            for (const auto& s : row) {
                lo = std::max(lo, s.t.front());
                hi = std::min(hi, s.t.back());
            }
        }
        if (!(hi > lo)) {
            throw DomainError("series share no common time span to resample onto");
        }
        common = EvalGrid::uniform(lo, hi, options.resample_points).points();
        for (auto& row : series) {
            for (auto& s : row) {
                s.value = resample_linear(s.value, s.t, common);
                s.t = common;
            }
        }
    } else {
        common = series[0][0].t;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < J; ++j) {
                if (!same_times(series[i][j].t, common)) {
                    throw ShapeError("subject '" + subjects[i] + "', covariate '" + covariates[j] +
                                     "' is sampled on a different grid; enable padding or resampling");
                }
            }
        }
    }

    if (common.size() < 2) {
        throw ShapeError("each series needs at least 2 observations");
    }
    EvalGrid grid = EvalGrid::uniform(common.front(), common.back(), common.size());
    if (!same_times(grid.points(), common)) {
        throw DomainError("observation grid is not uniform; enable resampling");
    }

    if (options.differentiate) {
        for (auto& row : series) {
            for (auto& s : row) {
                s.value = differentiate(s.value, grid.points());
            }
        }
    }

    if (options.fft_max_hz) {
        const double rate = 1.0 / grid.spacing();
        std::vector<double> freqs;
        for (auto& row : series) {
            for (auto& s : row) {
                Spectrum spec = fft_magnitude(s.value, rate, *options.fft_max_hz);
                s.value = std::move(spec.magnitude);
                freqs = std::move(spec.frequencies);
            }
        }
        if (freqs.size() < 2) {
            throw ConfigError("fft_max_hz keeps fewer than 2 frequency bins");
        }
        grid = EvalGrid::uniform(freqs.front(), freqs.back(), freqs.size());
    }

    FunctionalDataset data;
    data.grid = grid;
    data.subject_ids = subjects;
    data.covariate_ids = covariates;
    const auto R = static_cast<Eigen::Index>(grid.size());
    data.X.assign(J, Eigen::MatrixXd(static_cast<Eigen::Index>(n), R));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < J; ++j) {
            for (Eigen::Index r = 0; r < R; ++r) {
                data.X[j](static_cast<Eigen::Index>(i), r) = series[i][j].value[static_cast<std::size_t>(r)];
            }
        }
    }
    data.Y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (responses != nullptr) {
        std::unordered_map<std::string, double> lookup(responses->begin(), responses->end());
        for (std::size_t i = 0; i < n; ++i) {
            auto it = lookup.find(subjects[i]);
            if (it == lookup.end()) {
                throw ParseError("subject '" + subjects[i] + "' has signals but no response");
            }
            data.Y(static_cast<Eigen::Index>(i)) = it->second;
        }
    }
    data.validate();
    return data;
}

FunctionalDataset load_long_csv(const std::filesystem::path& signals,
                                const std::optional<std::filesystem::path>& responses,
                                const PreprocessOptions& options) {
    std::ifstream sin(signals);
    if (!sin) {
        throw Error("cannot open signal file '" + signals.string() + "'");
    }
    const auto records = read_long_records(sin, signals.string());
    if (!responses) {
        return assemble_dataset(records, nullptr, options);
    }
    std::ifstream rin(*responses);
    if (!rin) {
        throw Error("cannot open response file '" + responses->string() + "'");
    }
    const auto rows = read_responses(rin, responses->string());
    return assemble_dataset(records, &rows, options);
}

void write_long_csv(std::ostream& out, const FunctionalDataset& data) {
    out << "subject_id,covariate_id,t,value\n";
    std::vector<std::string> times;
    for (std::size_t r = 0; r < data.R(); ++r) {
        times.push_back(format_double(data.grid[r]));
    }
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.J(); ++j) {
            const auto& row = data.X[j].row(static_cast<Eigen::Index>(i));
            for (std::size_t r = 0; r < data.R(); ++r) {
                out << data.subject_ids[i] << ',' << data.covariate_ids[j] << ',' << times[r] << ','
                    << format_double(row(static_cast<Eigen::Index>(r))) << '\n';
            }
        }
    }
}

void write_responses_csv(std::ostream& out, const FunctionalDataset& data) {
    out << "subject_id,y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        out << data.subject_ids[i] << ',' << format_double(data.Y(static_cast<Eigen::Index>(i))) << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v(i));
    }
    return arr;
}

Eigen::VectorXd vector_from(const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

std::string sweep_name(Sweep s) {
    return s == Sweep::jacobi ? "jacobi" : "gauss_seidel";
}

Sweep parse_sweep(const std::string& s) {
    if (s == "gauss_seidel") {
        return Sweep::gauss_seidel;
    }
    if (s == "jacobi") {
        return Sweep::jacobi;
    }
    throw ConfigError("unknown sweep '" + s + "' (expected gauss_seidel or jacobi)");
}

template <class T>
T field(const json& obj, const char* key) {
    if (!obj.contains(key)) {
        throw ParseError(std::string("result file is missing '") + key + "'");
    }
    return obj.at(key).get<T>();
}

} // namespace

std::string result_to_json(const FitResult& fit) {
    json doc;
    doc["format"] = "fdos-result";
    doc["version"] = 1;
    doc["mode"] = to_string(fit.mode);
    doc["basis"] = {{"domain_start", fit.basis.domain().start},
                    {"domain_end", fit.basis.domain().end},
                    {"intervals", fit.basis.n_intervals()},
                    {"degree", fit.basis.degree()}};
    doc["grid"] = {{"start", fit.grid.start()}, {"end", fit.grid.end()}, {"points", fit.grid.size()}};
    const SolverConfig& c = fit.config_used;
    doc["config"] = {{"lambda1", c.lambda1},
                     {"lambda2", c.lambda2},
                     {"varphi", fit.varphi},
                     {"rho", c.rho},
                     {"eps_tol", c.eps_tol},
                     {"max_iter", c.max_iter},
                     {"nu_factor", c.nu_factor},
                     {"fit_intercept", c.fit_intercept},
                     {"sweep", sweep_name(c.sweep)},
                     {"w1", vector_json(fit.weights_used.w1)},
                     {"w2", vector_json(fit.weights_used.w2)}};
    doc["mu_hat"] = fit.mu_hat;
    json covs = json::array();
    for (std::size_t j = 0; j < fit.J(); ++j) {
        json zs = json::array();
        for (const Interval& iv : fit.zero_subregions.at(j)) {
            zs.push_back(json::array({iv.start, iv.end}));
        }
        covs.push_back({{"id", j < fit.covariate_ids.size() ? fit.covariate_ids[j] : "X" + std::to_string(j + 1)},
                        {"coefficients", vector_json(fit.b_star[j])},
                        {"zero_subregions", zs}});
    }
    doc["covariates"] = covs;
    doc["selected"] = fit.selected;
    doc["diagnostics"] = {{"iterations", fit.diagnostics.iterations},
                          {"converged", fit.diagnostics.converged},
                          {"objective", fit.diagnostics.objective}};
    json meta = json::object();
    for (const auto& [k, v] : fit.metadata) {
        meta[k] = v;
    }
    doc["metadata"] = meta;
    doc["fitted"] = vector_json(fit.fitted);
    return doc.dump(2) + "\n";
}

FitResult result_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("result file is not valid JSON: ") + e.what());
    }
    try {
        if (field<std::string>(doc, "format") != "fdos-result") {
            throw ParseError("not an fdos result file");
        }
        const json& b = doc.at("basis");
        const json& g = doc.at("grid");
        const json& c = doc.at("config");
        FitResult fit{BasisSystem({field<double>(b, "domain_start"), field<double>(b, "domain_end")},
                                  field<int>(b, "intervals"), field<int>(b, "degree")),
                      EvalGrid::uniform(field<double>(g, "start"), field<double>(g, "end"),
                                        field<std::size_t>(g, "points"))};
        fit.mode = parse_mode(field<std::string>(doc, "mode"));
        fit.varphi = field<double>(c, "varphi");
        fit.config_used.lambda1 = field<double>(c, "lambda1");
        fit.config_used.lambda2 = field<double>(c, "lambda2");
        fit.config_used.rho = field<double>(c, "rho");
        fit.config_used.eps_tol = field<double>(c, "eps_tol");
        fit.config_used.max_iter = field<int>(c, "max_iter");
        fit.config_used.nu_factor = field<double>(c, "nu_factor");
        fit.config_used.fit_intercept = field<bool>(c, "fit_intercept");
        fit.config_used.sweep = parse_sweep(field<std::string>(c, "sweep"));
        fit.weights_used.w1 = vector_from(c.at("w1"));
        fit.weights_used.w2 = vector_from(c.at("w2"));
        fit.config_used.w1 = fit.weights_used.w1;
        fit.config_used.w2 = fit.weights_used.w2;
        fit.mu_hat = field<double>(doc, "mu_hat");
        for (const json& cov : doc.at("covariates")) {
            fit.covariate_ids.push_back(field<std::string>(cov, "id"));
            Eigen::VectorXd coef = vector_from(cov.at("coefficients"));
            if (coef.size() != fit.basis.size()) {
                throw ParseError("covariate '" + fit.covariate_ids.back() + "' has " + std::to_string(coef.size()) +
                                 " coefficients, the basis has " + std::to_string(fit.basis.size()));
            }
            fit.b_star.push_back(std::move(coef));
            std::vector<Interval> zs;
            for (const json& iv : cov.at("zero_subregions")) {
                zs.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
            }
            fit.zero_subregions.push_back(std::move(zs));
        }
        fit.selected = doc.at("selected").get<std::vector<std::size_t>>();
        const json& d = doc.at("diagnostics");
        fit.diagnostics.iterations = field<int>(d, "iterations");
        fit.diagnostics.converged = field<bool>(d, "converged");
        fit.diagnostics.objective = field<double>(d, "objective");
        for (const auto& [k, v] : doc.at("metadata").items()) {
            fit.metadata.emplace_back(k, v.get<std::string>());
        }
        fit.fitted = vector_from(doc.at("fitted"));
        return fit;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed result file: ") + e.what());
    }
}

void RunConfig::validate() const {
    if (intervals < 1) {
        throw ConfigError("intervals (--knots) must be >= 1");
    }
    if (degree < 2) {
        throw ConfigError("degree must be >= 2 for the roughness penalty");
    }
    if (domain_start.has_value() != domain_end.has_value()) {
        throw ConfigError("domain_start and domain_end must be given together");
    }
    if (domain_start && !(*domain_end > *domain_start)) {
        throw ConfigError("domain_end must exceed domain_start");
    }
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(varphi >= 0.0)) {
        throw ConfigError("lambda1, lambda2 and varphi must be >= 0");
    }
    if (!(a > 0.0)) {
        throw ConfigError("a must be > 0");
    }
    fit_options().solver.validate(0);
    if (tuning.k_folds < 2) {
        throw ConfigError("folds must be >= 2");
    }
}

FitOptions RunConfig::fit_options() const {
    FitOptions o;
    o.mode = mode;
    o.varphi = varphi;
    o.a = a;
    o.solver.lambda1 = lambda1;
    o.solver.lambda2 = lambda2;
    o.solver.rho = rho;
    o.solver.eps_tol = eps_tol;
    o.solver.max_iter = max_iter;
    o.solver.nu_factor = nu_factor;
    o.solver.sweep = sweep;
    return o;
}

BasisSystem RunConfig::basis_for(const EvalGrid& grid) const {
    const Interval domain = domain_start ? Interval{*domain_start, *domain_end} : Interval{grid.start(), grid.end()};
    return BasisSystem(domain, intervals, degree);
}

std::string config_to_json(const RunConfig& config) {
    json doc;
    doc["domain_start"] = config.domain_start ? json(*config.domain_start) : json(nullptr);
    doc["domain_end"] = config.domain_end ? json(*config.domain_end) : json(nullptr);
    doc["intervals"] = config.intervals;
    doc["degree"] = config.degree;
    doc["mode"] = to_string(config.mode);
    doc["lambda1"] = config.lambda1;
    doc["lambda2"] = config.lambda2;
    doc["varphi"] = config.varphi;
    doc["rho"] = config.rho;
    doc["eps_tol"] = config.eps_tol;
    doc["max_iter"] = config.max_iter;
    doc["nu_factor"] = config.nu_factor;
    doc["a"] = config.a;
    doc["sweep"] = sweep_name(config.sweep);
    doc["seed"] = config.seed;
    doc["tuning"] = {{"lambda1_values", config.tuning.lambda1_values},
                     {"lambda2_values", config.tuning.lambda2_values},
                     {"varphi_values", config.tuning.varphi_values},
                     {"folds", config.tuning.k_folds},
                     {"seed", config.tuning.seed}};
    doc["preprocess"] = {{"pad", config.preprocess.pad},
                         {"resample_points", config.preprocess.resample_points},
                         {"differentiate", config.preprocess.differentiate},
                         {"fft_max_hz", config.preprocess.fft_max_hz ? json(*config.preprocess.fft_max_hz)
                                                                     : json(nullptr)}};
    return doc.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    RunConfig cfg;
    static const std::set<std::string> known = {"domain_start", "domain_end", "intervals", "degree", "mode",
                                                "lambda1",      "lambda2",    "varphi",    "rho",    "eps_tol",
                                                "max_iter",     "nu_factor",  "a",         "sweep",  "seed",
                                                "tuning",       "preprocess", "refit"};
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!known.contains(key)) {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
        auto opt_double = [&](const char* key, std::optional<double>& out) {
            if (doc.contains(key) && !doc[key].is_null()) {
                out = doc[key].get<double>();
            }
        };
        opt_double("domain_start", cfg.domain_start);
        opt_double("domain_end", cfg.domain_end);
        auto get = [&](const json& obj, const char* key, auto& out) {
            if (obj.contains(key)) {
                out = obj.at(key).get<std::decay_t<decltype(out)>>();
            }
        };
        get(doc, "intervals", cfg.intervals);
        get(doc, "degree", cfg.degree);
        if (doc.contains("mode")) {
            cfg.mode = parse_mode(doc["mode"].get<std::string>());
        }
        get(doc, "lambda1", cfg.lambda1);
        get(doc, "lambda2", cfg.lambda2);
        get(doc, "varphi", cfg.varphi);
        get(doc, "rho", cfg.rho);
        get(doc, "eps_tol", cfg.eps_tol);
        get(doc, "max_iter", cfg.max_iter);
        get(doc, "nu_factor", cfg.nu_factor);
        get(doc, "a", cfg.a);
        if (doc.contains("sweep")) {
            cfg.sweep = parse_sweep(doc["sweep"].get<std::string>());
        }
        get(doc, "seed", cfg.seed);
        if (doc.contains("tuning")) {
            const json& t = doc["tuning"];
            get(t, "lambda1_values", cfg.tuning.lambda1_values);
            get(t, "lambda2_values", cfg.tuning.lambda2_values);
            get(t, "varphi_values", cfg.tuning.varphi_values);
            get(t, "folds", cfg.tuning.k_folds);
            get(t, "seed", cfg.tuning.seed);
        }
        if (doc.contains("preprocess")) {
            const json& p = doc["preprocess"];
            get(p, "pad", cfg.preprocess.pad);
            get(p, "resample_points", cfg.preprocess.resample_points);
            get(p, "differentiate", cfg.preprocess.differentiate);
            if (p.contains("fft_max_hz") && !p["fft_max_hz"].is_null()) {
                cfg.preprocess.fft_max_hz = p["fft_max_hz"].get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

} // namespace fdos
