#ifndef RCOVER_EXPERIMENT_HPP
#define RCOVER_EXPERIMENT_HPP

// Commands behind the command line tool. Each command turns a config into
// in-memory artifacts (CSV or JSON text, optional gnuplot data) so that the
// same run can be checked byte for byte without touching the filesystem.

#include <rcover/config.hpp>
#include <rcover/covering.hpp>
#include <rcover/energy.hpp>
#include <rcover/errors.hpp>
#include <rcover/family.hpp>
#include <rcover/frostman.hpp>
#include <rcover/svf.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rcover {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitAssertion = 2;

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"energy",    "threshold", "simulate",   "dimension",
                                                "intersect", "weights",   "diagnostics"};
    return names;
}

struct Artifact {
    std::string name;
    std::string content;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string error;
    std::vector<Artifact> artifacts; ///< the first one is the main output
    nlohmann::ordered_json violations = nlohmann::ordered_json::array();
};

namespace exp_detail {

using ojson = nlohmann::ordered_json;

inline std::string num(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline ojson jnum(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (char ch : s) {
        q += ch;
        if (ch == '"') {
            q += '"';
        }
    }
    return q + "\"";
}

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void row(std::vector<std::string> fields) { rows_.push_back(std::move(fields)); }

    std::string csv() const {
        std::string s;
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            s += (c ? "," : "") + columns_[c];
        }
        s += "\n";
        for (const auto& r : rows_) {
            for (std::size_t c = 0; c < r.size(); ++c) {
                s += (c ? "," : "") + csv_field(r[c]);
            }
            s += "\n";
        }
        return s;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string comment_header(const std::string& command, const ExperimentConfig& c) {
    std::ostringstream os;
    os << "# rcover artifact\n"
       << "# command: " << command << "\n"
       << "# seed: " << c.run.seed << "\n"
       << "# config_hash: " << config_hash(c) << "\n"
       << "# config:\n";
    std::stringstream in(canonical_config(c));
    std::string line;
    while (std::getline(in, line)) {
        os << "# " << line << "\n";
    }
    os << "# end config\n";
    return os.str();
}

inline ojson json_header(const std::string& command, const ExperimentConfig& c) {
    ojson j;
    j["command"] = command;
    j["seed"] = c.run.seed;
    j["config_hash"] = config_hash(c);
    j["config"] = canonical_config(c);
    return j;
}

struct Output {
    const std::string& command;
    const ExperimentConfig& cfg;

    bool json() const { return cfg.output.format == "json"; }

    Artifact main(const Table& table, const ojson& result) const {
        if (json()) {
            ojson j = json_header(command, cfg);
            j["result"] = result;
            return {command + ".json", j.dump(2) + "\n"};
        }
        return {command + ".csv", comment_header(command, cfg) + table.csv()};
    }

    Artifact data(const std::string& name, const std::string& body) const {
        return {name, comment_header(command, cfg) + body};
    }
};

inline void check_format(const ExperimentConfig& c) {
    if (c.output.format != "csv" && c.output.format != "json") {
        throw ConfigError("format must be csv or json, got '" + c.output.format + "'");
    }
}

inline ojson violation(const std::string& check, std::int64_t k, double value, double bound) {
    ojson v;
    v["check"] = check;
    v["k"] = k;
    v["value"] = jnum(value);
    v["bound"] = jnum(bound);
    return v;
}

inline std::string boxcount_block(const DimensionEstimate& e, int m) {
    std::ostringstream os;
    os << "# M = " << m << ", slope = " << num(e.value) << ", r2 = " << num(e.regression_r2) << "\n"
       << "# log2_cells_per_axis log2_occupied used\n";
    for (std::size_t s = 0; s < e.all_scales.size(); ++s) {
        bool used = std::find(e.scales_used.begin(), e.scales_used.end(), e.all_scales[s]) != e.scales_used.end();
        os << num(std::log2(static_cast<double>(e.all_scales[s]))) << " "
           << num(std::log2(static_cast<double>(e.all_occupied[s]))) << " " << (used ? 1 : 0) << "\n";
    }
    os << "\n\n";
    return os.str();
}

// --- commands ---------------------------------------------------------------

inline std::string shape_label(const ShapeSpec& s) {
    return s.kind() == ShapeKind::ball && s.dim() == 1 ? "interval" : to_string(s.kind());
}

inline RunResult cmd_energy(const Output& out) {
    const auto& c = out.cfg;
    ShapeSpec s = build_shape(c.shape);
    EnergyEstimate e;
    if (c.run.method == "closed_form") {
        detail::require(s.kind() == ShapeKind::ball && s.dim() == 1,
                        "energy: closed form is available for intervals only");
        e = energy_interval_closed_form(2.0 * s.radius(), c.run.t);
    } else if (c.run.method == "quadrature") {
        e = energy_quadrature(s, c.run.t, c.run.level);
    } else if (c.run.method == "monte_carlo") {
        e = energy_monte_carlo(s, c.run.t, c.run.n_pairs, RngHandle(c.run.seed), McScheme::automatic,
                               c.output.threads);
    } else {
        throw ConfigError("run.method must be closed_form, quadrature or monte_carlo, got '" + c.run.method + "'");
    }
    Table t({"shape", "dim", "t", "method", "value", "std_error", "samples_or_nodes"});
    t.row({shape_label(s), std::to_string(s.dim()), num(e.t), to_string(e.method), num(e.value),
           num(e.std_error), std::to_string(e.samples_or_nodes)});
    ojson r;
    r["shape"] = shape_label(s);
    r["dim"] = s.dim();
    r["t"] = e.t;
    r["method"] = to_string(e.method);
    r["value"] = e.value;
    r["std_error"] = e.std_error;
    r["samples_or_nodes"] = e.samples_or_nodes;
    RunResult res;
    res.artifacts.push_back(out.main(t, r));
    return res;
}

inline RunResult cmd_threshold(const Output& out) {
    SequenceFamily f = build_family(out.cfg.family);
    Table t({"criterion", "s_star", "full_dimension", "exponent_function"});
    ojson r;
    ojson details = ojson::array();
    for (auto crit : {Criterion::corollary1_measure, Criterion::corollary3_svf, Criterion::theorem1_energy}) {
        ThresholdResult th = critical_exponent(f, crit);
        t.row({to_string(crit), num(th.s_star), th.full_dimension ? "true" : "false", th.exponent_function});
        r[to_string(crit)] = th.s_star;
        ojson d;
        d["criterion"] = to_string(crit);
        d["s_star"] = th.s_star;
        d["full_dimension"] = th.full_dimension;
        d["exponent_function"] = th.exponent_function;
        details.push_back(d);
    }
    r["family_id"] = f.id();
    r["i_min"] = f.i_min();
    r["details"] = details;
    RunResult res;
    res.artifacts.push_back(out.main(t, r));
    return res;
}

inline RunResult cmd_simulate(const Output& out) {
    const auto& c = out.cfg;
    SequenceFamily f = build_family(c.family);
    CoverGrid g = simulate_cover(f, c.run.n, c.run.resolution, RngHandle(c.run.seed));
    Table t({"family_id", "seed", "N", "resolution", "M", "cells", "fraction"});
    ojson rows = ojson::array();
    for (std::int64_t m : c.run.m_list) {
        detail::require(m >= 1, "M_list entries must be >= 1");
        auto cells = g.at_least(static_cast<int>(m));
        std::int64_t n = std::count(cells.begin(), cells.end(), std::uint8_t{1});
        double frac = static_cast<double>(n) / static_cast<double>(cells.size());
        t.row({f.id(), std::to_string(c.run.seed), std::to_string(c.run.n), std::to_string(c.run.resolution),
               std::to_string(m), std::to_string(n), num(frac)});
        ojson r;
        r["M"] = m;
        r["cells"] = n;
        r["fraction"] = frac;
        rows.push_back(r);
    }
    ojson r;
    r["family_id"] = f.id();
    r["i_min"] = f.i_min();
    r["n_shapes_placed"] = g.n_shapes_placed();
    r["multiplicity"] = rows;
    RunResult res;
    res.artifacts.push_back(out.main(t, r));
    return res;
}

inline RunResult cmd_dimension(const Output& out) {
    const auto& c = out.cfg;
    SequenceFamily f = build_family(c.family);
    CoverGrid g = simulate_cover(f, c.run.n, c.run.resolution, RngHandle(c.run.seed));
    Table t({"family_id", "seed", "N", "resolution", "M", "boxdim", "r2"});
    ojson rows = ojson::array();
    std::string report;
    for (std::int64_t m : c.run.m_list) {
        detail::require(m >= 1, "M_list entries must be >= 1");
        ojson r;
        r["M"] = m;
        try {
            DimensionEstimate e = box_dimension(g, static_cast<int>(m));
            t.row({f.id(), std::to_string(c.run.seed), std::to_string(c.run.n), std::to_string(c.run.resolution),
                   std::to_string(m), num(e.value), num(e.regression_r2)});
            r["boxdim"] = e.value;
            r["r2"] = e.regression_r2;
            r["scales_used"] = e.scales_used;
            report += boxcount_block(e, static_cast<int>(m));
        } catch (const EmptySetError&) {
            t.row({f.id(), std::to_string(c.run.seed), std::to_string(c.run.n), std::to_string(c.run.resolution),
                   std::to_string(m), "nan", "nan"});
            r["boxdim"] = nullptr;
            r["r2"] = nullptr;
            r["empty"] = true;
        }
        rows.push_back(r);
    }
    ojson r;
    r["family_id"] = f.id();
    r["s_star"] = critical_exponent(f, Criterion::theorem1_energy).s_star;
    r["estimates"] = rows;
    RunResult res;
    res.artifacts.push_back(out.main(t, r));
    if (c.output.report) {
        res.artifacts.push_back(out.data("dimension_boxcount.dat", report));
    }
    return res;
}

inline RunResult cmd_intersect(const Output& out) {
    const auto& c = out.cfg;
    SequenceFamily f = build_family(c.family);
    RngHandle root(c.run.seed);
    Table t({"family_id", "seed", "N", "resolution", "M", "boxdim_1", "boxdim_2", "boxdim_intersection",
             "intersection_cells"});
    ojson r;
    r["family_id"] = f.id();
    r["M"] = c.run.m;
    std::string report;
    try {
        IntersectionReport rep =
            intersection_experiment(f, c.run.n, c.run.resolution, c.run.m, root.split(1), root.split(2));
        double di = rep.dim_intersection ? rep.dim_intersection->value : std::nan("");
        t.row({f.id(), std::to_string(c.run.seed), std::to_string(c.run.n), std::to_string(c.run.resolution),
               std::to_string(c.run.m), num(rep.dim_1.value), num(rep.dim_2.value), num(di),
               std::to_string(rep.intersection_cells)});
        r["boxdim_1"] = rep.dim_1.value;
        r["boxdim_2"] = rep.dim_2.value;
        r["boxdim_intersection"] = jnum(di);
        r["intersection_cells"] = rep.intersection_cells;
        report += boxcount_block(rep.dim_1, c.run.m) + boxcount_block(rep.dim_2, c.run.m);
        if (rep.dim_intersection) {
            report += boxcount_block(*rep.dim_intersection, c.run.m);
        }
    } catch (const EmptySetError&) {
        t.row({f.id(), std::to_string(c.run.seed), std::to_string(c.run.n), std::to_string(c.run.resolution),
               std::to_string(c.run.m), "nan", "nan", "nan", "0"});
        r["boxdim_1"] = nullptr;
        r["boxdim_2"] = nullptr;
        r["boxdim_intersection"] = nullptr;
        r["intersection_cells"] = 0;
        r["empty"] = true;
    }
    RunResult res;
    res.artifacts.push_back(out.main(t, r));
    if (c.output.report) {
        res.artifacts.push_back(out.data("intersect_boxcount.dat", report));
    }
    return res;
}

inline RunResult cmd_weights(const Output& out) {
    const auto& c = out.cfg;
    SequenceFamily f = build_family(c.family);
    WindowSchedule sched = build_schedule(c.run.schedule);
    detail::require(!c.run.k_list.empty(), "k_list must not be empty");
    Table t({"k", "m_k", "c_k", "identity_residual_1", "identity_residual_2"});
    ojson rows = ojson::array();
    RunResult res;
    std::string report = "# log10_k log10_c_k\n";
    for (std::int64_t k : c.run.k_list) {
        std::int64_t m = sched.m_for(k, f.i_min());
        MeasureWeights w = build_weights(f, k, m, c.run.t);
        t.row({std::to_string(k), std::to_string(m), num(w.c_k), num(w.identity_residual_1),
               num(w.identity_residual_2)});
        ojson r;
        r["k"] = k;
        r["m_k"] = m;
        r["c_k"] = w.c_k;
        r["identity_residual_1"] = w.identity_residual_1;
        r["identity_residual_2"] = w.identity_residual_2;
        rows.push_back(r);
        report += num(std::log10(static_cast<double>(k))) + " " + num(std::log10(w.c_k)) + "\n";
        if (!(w.identity_residual_1 <= 1e-12)) {
            res.violations.push_back(violation("identity_residual_1", k, w.identity_residual_1, 1e-12));
        }
        if (!(w.identity_residual_2 <= 1e-12)) {
            res.violations.push_back(violation("identity_residual_2", k, w.identity_residual_2, 1e-12));
        }
        for (std::size_t q = 0; q < w.size(); ++q) {
            double ratio = w.measures[q] * w.measures[q] / w.energies[q];
            if (!(ratio <= 1.0)) {
                res.violations.push_back(violation("measure_squared_over_energy", k, ratio, 1.0));
                break;
            }
        }
    }
    ojson r;
    r["family_id"] = f.id();
    r["t"] = c.run.t;
    r["schedule"] = sched.describe();
    r["rows"] = rows;
    res.artifacts.push_back(out.main(t, r));
    if (c.output.report) {
        res.artifacts.push_back(out.data("weights_ck.dat", report));
    }
    return res;
}

inline RunResult cmd_diagnostics(const Output& out) {
    const auto& c = out.cfg;
    SequenceFamily f = build_family(c.family);
    WindowSchedule sched = build_schedule(c.run.schedule);
    TestFunction phi_fn = TestFunction::parse(c.run.phi, f.dim());
    double s_star = critical_exponent(f, Criterion::theorem1_energy).s_star;
    detail::require(c.run.t < s_star, "diagnostics: t must lie below the critical exponent " + num(s_star));
    detail::require(!c.run.k_list.empty(), "k_list must not be empty");
    DiagnosticReport rep = weak_convergence_diagnostic(f, c.run.t, c.run.k_list, phi_fn, c.run.trials,
                                                       RngHandle(c.run.seed), sched, c.run.slack, c.output.threads);
    Table t({"k", "m_k", "c_k", "phi", "lambda_phi", "mean", "variance", "bound", "mean_ok", "variance_ok",
             "chebyshev_ok"});
    ojson rows = ojson::array();
    RunResult res;
    for (const auto& d : rep.rows) {
        bool cheb = std::all_of(d.chebyshev.begin(), d.chebyshev.end(), [](const auto& x) { return x.ok; });
        t.row({std::to_string(d.k), std::to_string(d.m_k), num(d.c_k), d.phi_id, num(d.lambda_phi), num(d.mean),
               num(d.variance), num(d.bound), d.mean_ok ? "true" : "false", d.variance_ok ? "true" : "false",
               cheb ? "true" : "false"});
        ojson r;
        r["k"] = d.k;
        r["m_k"] = d.m_k;
        r["c_k"] = d.c_k;
        r["phi"] = d.phi_id;
        r["lambda_phi"] = d.lambda_phi;
        r["c_phi"] = d.c_phi;
        r["mean"] = d.mean;
        r["variance"] = d.variance;
        r["bound"] = d.bound;
        r["slack"] = d.slack;
        r["mean_ok"] = d.mean_ok;
        r["variance_ok"] = d.variance_ok;
        ojson ch = ojson::array();
        for (const auto& x : d.chebyshev) {
            ojson e;
            e["epsilon"] = x.epsilon;
            e["exceed_fraction"] = x.exceed_fraction;
            e["bound"] = x.bound;
            e["ok"] = x.ok;
            ch.push_back(e);
            if (!x.ok) {
                res.violations.push_back(violation("chebyshev_eps_" + num(x.epsilon), d.k, x.exceed_fraction,
                                                   x.bound));
            }
        }
        r["chebyshev"] = ch;
        rows.push_back(r);
        if (!d.mean_ok) {
            res.violations.push_back(violation("mean", d.k, std::abs(d.mean - d.lambda_phi),
                                               4.0 * std::sqrt(d.variance / c.run.trials)));
        }
        if (!d.variance_ok) {
            res.violations.push_back(violation("variance", d.k, d.variance, d.bound * (1.0 + d.slack)));
        }
    }
    ojson r;
    r["family_id"] = f.id();
    r["t"] = c.run.t;
    r["s_star"] = s_star;
    r["schedule"] = sched.describe();
    r["rows"] = rows;
    if (rep.subsequence) {
        r["subsequence"] = rep.subsequence->indices;
        r["subsequence_partial_sum"] = rep.subsequence->partial_sum;
    } else {
        r["subsequence"] = nullptr;
    }
    res.artifacts.push_back(out.main(t, r));
    return res;
}

} // namespace exp_detail

/// Runs one command. Validation problems give exit code 1 and an error
/// message; violated identities or bounds give exit code 2 and a
/// "violations.json" artifact alongside the regular output.
inline RunResult run_command(const std::string& command, const ExperimentConfig& config) {
    using namespace exp_detail;
    RunResult res;
    try {
        check_format(config);
        detail::require(config.output.threads >= 1, "threads must be >= 1");
        Output out{command, config};
        if (command == "energy") res = cmd_energy(out);
        else if (command == "threshold") res = cmd_threshold(out);
        else if (command == "simulate") res = cmd_simulate(out);
        else if (command == "dimension") res = cmd_dimension(out);
        else if (command == "intersect") res = cmd_intersect(out);
        else if (command == "weights") res = cmd_weights(out);
        else if (command == "diagnostics") res = cmd_diagnostics(out);
        else throw ConfigError("unknown command '" + command + "'");
    } catch (const DomainError& e) {
        res = RunResult{};
        res.exit_code = kExitValidation;
        res.error = e.what();
        return res;
    } catch (const RefusedEstimate& e) {
        res = RunResult{};
        res.exit_code = kExitValidation;
        res.error = e.what();
        return res;
    } catch (const EmptySetError& e) {
        res = RunResult{};
        res.exit_code = kExitValidation;
        res.error = e.what();
        return res;
    }
    if (!res.violations.empty()) {
        res.exit_code = kExitAssertion;
        ojson v = json_header(command, config);
        v["violations"] = res.violations;
        res.artifacts.push_back({"violations.json", v.dump(2) + "\n"});
    }
    return res;
}

/// Writes every artifact into `dir` (created if needed).
inline void write_artifacts(const RunResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& a : res.artifacts) {
        std::ofstream f(dir / a.name, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir / a.name).string());
        }
        f << a.content;
    }
}

} // namespace rcover

#endif
