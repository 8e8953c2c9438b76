#include "cli.hpp"

#include "silt/expectations.hpp"
#include "silt/kernels.hpp"
#include "silt/montecarlo.hpp"
#include "silt/norms.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <variant>

namespace silt::cli {

namespace {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> errors;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string format_double(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

using Provenance = std::vector<std::pair<std::string, std::string>>;

Provenance provenance(const RunConfig& c) {
    auto num = [](double x) { return format_double(x); };
    auto list = [](const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + format_double(xs[i]);
        return s;
    };
    std::string index;
    for (std::size_t i = 0; i < c.index.size(); ++i) index += (i ? ";" : "") + std::to_string(c.index[i]);
    return {{"command", c.command},
            {"version", kVersion},
            {"d", std::to_string(c.params.d)},
            {"T", num(c.params.T)},
            {"N", std::to_string(c.params.N)},
            {"regularization", to_string(c.reg.variant)},
            {"eps", num(c.reg.epsilon)},
            {"lambda", num(c.reg.lambda)},
            {"lambdas", list(c.lambdas)},
            {"nmax", std::to_string(c.nmax)},
            {"paths", std::to_string(c.mc.n_paths)},
            {"steps", std::to_string(c.mc.steps)},
            {"seed", std::to_string(c.mc.seed)},
            {"g", num(c.g)},
            {"thresholds", list(c.thresholds)},
            {"alpha", c.alpha ? num(*c.alpha) : std::string()},
            {"K", c.K ? num(*c.K) : std::string()},
            {"kind", c.kind},
            {"index", index},
            {"n", std::to_string(c.order)},
            {"u", num(c.u)},
            {"v", num(c.v)},
            {"samples", std::to_string(c.samples)},
            {"tol", num(c.tol)},
            {"estimator", c.estimator},
            {"bin_width", num(c.bin_width)}};
}

std::string render_csv(const RunConfig& c, const Table& t) {
    std::ostringstream os;
    for (const auto& [k, v] : provenance(c)) os << "# " << k << '=' << v << '\n';
    for (const auto& e : t.errors) os << "# error=" << e << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(cell_text(row[i]));
        os << '\n';
    }
    return os.str();
}

std::string render_json(const RunConfig& c, const Table& t, double wall_time) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["command"] = c.command;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : provenance(c)) params[k] = v;
    doc["params"] = params;
    std::vector<std::string> errors = t.errors;
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        ordered_json row = ordered_json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            const Cell& cell = t.rows[r][i];
            if (const auto* d = std::get_if<double>(&cell)) {
                if (std::isfinite(*d)) {
                    row[t.columns[i]] = *d;
                } else {
                    row[t.columns[i]] = nullptr;
                    errors.push_back("row " + std::to_string(r) + ", column " + t.columns[i] + ": " +
                                     format_double(*d));
                }
            } else if (const auto* n = std::get_if<std::int64_t>(&cell)) {
                row[t.columns[i]] = *n;
            } else {
                row[t.columns[i]] = std::get<std::string>(cell);
            }
        }
        rows.push_back(row);
    }
    doc["rows"] = rows;
    doc["meta"] = {{"seed", c.mc.seed}, {"version", kVersion}, {"wall_time_s", wall_time}};
    doc["errors"] = errors;
    return doc.dump(2) + "\n";
}

void write_atomically(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out.flush()) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::int64_t as_int(std::size_t x) { return static_cast<std::int64_t>(x); }

MultiIndex index_of(const RunConfig& c) {
    if (c.index.empty()) return MultiIndex::axis(c.params.d, c.order);
    return MultiIndex(c.index);
}

// --- subcommands --------------------------------------------------------------

Table cmd_expectation(const RunConfig& c) {
    Table t{{"regularization", "d", "T", "eps", "lambda", "value"}, {}, {}};
    const double value = expected_lt(c.params, c.reg);
    t.add({to_string(c.reg.variant), std::int64_t{c.params.d}, c.params.T, c.reg.mollifier(), c.reg.gap_width(),
           value});
    return t;
}

Table cmd_kernel(const RunConfig& c) {
    Table t{{"kind", "n", "d", "T", "eps", "lambda", "u", "v", "value"}, {}, {}};
    const MultiIndex idx = index_of(c);
    const auto kind = kernel_kind_from_string(c.kind);
    const auto kv = evaluate_kernel(kind, idx, c.params, c.reg.epsilon, c.reg.lambda, KernelPoint{c.u, c.v});
    t.add({c.kind, std::int64_t{kv.order}, std::int64_t{c.params.d}, c.params.T, c.reg.epsilon, c.reg.lambda, c.u,
           c.v, kv.value});
    return t;
}

struct Validation {
    std::string kernel;
    int n;
    int cases;
    double max_rel_error;
};

Table cmd_validate_kernels(const RunConfig& c, bool& all_pass) {
    require(c.samples >= 1, "samples >= 1");
    require(c.tol > 0.0, "tol > 0");
    Table t{{"kernel", "d", "n", "cases", "max_rel_error", "tol", "pass"}, {}, {}};
    const int d = c.params.d;
    const double T = c.params.T;
    std::mt19937_64 rng(c.mc.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    OracleOptions opt;
    opt.tol = std::clamp(1e-3 * c.tol, 1e-11, 1e-10);
    const double eps = c.reg.epsilon > 0.0 ? c.reg.epsilon : 0.01 * T;
    const double lambda = c.reg.lambda > 0.0 ? c.reg.lambda : 0.1 * T;

    all_pass = true;
    for (int n = 1; n <= 3; ++n) {
        if (2 * n <= d - 2) continue;
        const auto indices = enumerate_multi_indices(d, n);
        Validation phi{"phi", n, 0, 0.0}, phi_eps{"phi_eps", n, 0, 0.0}, rho{"rho", n, 0, 0.0};
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
        for (int s = 0; s < c.samples; ++s) {
            const MultiIndex& idx = indices[static_cast<std::size_t>(unit(rng) * indices.size()) % indices.size()];
            const double u = T * (0.02 + 0.9 * unit(rng));
            const double v = u + (0.98 * T - u) * (0.02 + 0.98 * unit(rng));
            const KernelPoint p{u, v};
            phi.max_rel_error = std::max(
                phi.max_rel_error,
                rel(phi_kernel(idx, c.params, p), kernel_quadrature_oracle(idx, c.params, TimeRectangle::phi_domain(T, p), opt)));
            ++phi.cases;
            OracleOptions eopt = opt;
            eopt.epsilon = eps;
            phi_eps.max_rel_error =
                std::max(phi_eps.max_rel_error, rel(phi_eps_kernel(idx, c.params, eps, p),
                                                    kernel_quadrature_oracle(idx, c.params, TimeRectangle::phi_domain(T, p), eopt)));
            ++phi_eps.cases;
            // Interior strip point: Lambda <= v, u <= T - Lambda, v - u < Lambda.
            const double w = lambda * (0.01 + 0.98 * unit(rng));
            const double ui = (lambda - w) + (T - 2.0 * lambda + w) * unit(rng);
            const KernelPoint q{ui, std::min(ui + w, T)};
            rho.max_rel_error =
                std::max(rho.max_rel_error, rel(rho_kernel(idx, c.params, lambda, q),
                                                kernel_quadrature_oracle(idx, c.params, TimeRectangle::rho_domain(T, lambda, q), opt)));
            ++rho.cases;
        }
        for (const auto& v : {phi, phi_eps, rho}) {
            const bool pass = v.max_rel_error <= c.tol;
            all_pass = all_pass && pass;
            t.add({v.kernel, std::int64_t{d}, std::int64_t{v.n}, std::int64_t{v.cases}, v.max_rel_error, c.tol,
                   std::int64_t{pass ? 1 : 0}});
        }
    }
    return t;
}

Table cmd_norms(const RunConfig& c) {
    require(c.reg.lambda > 0.0, "--gap Lambda > 0 is required");
    const auto dist = chaos_distance_sq(c.params, c.reg.lambda, c.nmax);
    Table t{{"lambda", "n", "contribution", "total", "truncation_bound"}, {}, {}};
    for (const auto& term : dist.per_order)
        t.add({dist.lambda, std::int64_t{term.n}, term.contribution, dist.total, dist.truncation_bound});
    return t;
}

Table cmd_rate(const RunConfig& c) {
    const auto table = rate_verification(c.params, c.lambdas, c.nmax);
    Table t{{"lambda", "distance", "ratio", "tail_bound"}, {}, {}};
    for (const auto& r : table.rows) t.add({r.lambda, r.distance, r.ratio, r.tail_bound});
    if (!table.bounded()) {
        std::ostringstream os;
        os << "ratio column max/min = " << format_double(table.max_ratio() / table.min_ratio()) << " exceeds 3";
        t.errors.push_back(os.str());
    }
    return t;
}

Table cmd_simulate(const RunConfig& c) {
    const auto& p = c.params;
    Table t{{"estimator", "d", "T", "eps", "lambda", "steps", "mean", "std_error", "variance", "variance_se",
             "n_samples", "seed"},
            {},
            {}};
    int M = c.mc.steps;
    std::vector<double> values;
    if (c.estimator == "occupation") {
        require(M > 0, "--steps is required for the occupation estimator");
        require(c.bin_width > 0.0, "bin_width > 0");
        values = per_path(p, M, c.mc.seed, c.mc.n_paths,
                          [&](const BrownianPath& b) { return occupation_oracle_d1(b, c.bin_width); });
    } else {
        c.reg.validate(p);
        require(c.reg.epsilon > 0.0, "eps > 0");
        if (M == 0) M = steps_for(p.T, c.reg.epsilon);
        const double lambda = c.reg.variant == Regularization::combined ? c.reg.lambda : 0.0;
        if (c.estimator == "gaussian") {
            values = per_path(p, M, c.mc.seed, c.mc.n_paths,
                              [&](const BrownianPath& b) { return gaussian_lt(b, c.reg.epsilon, lambda); });
        } else if (c.estimator == "centered") {
            values = per_path(p, M, c.mc.seed, c.mc.n_paths,
                              [&](const BrownianPath& b) { return centered_lt(b, c.reg, p); });
        } else {
            throw PreconditionError("estimator is one of {gaussian, centered, occupation}");
        }
    }
    const auto s = summarize(values);
    t.add({c.estimator, std::int64_t{p.d}, p.T, c.reg.mollifier(), c.reg.gap_width(), std::int64_t{M}, s.mean,
           s.std_error, s.variance, s.variance_se, as_int(s.n), static_cast<std::int64_t>(c.mc.seed)});
    return t;
}

Table cmd_tail(const RunConfig& c) {
    const auto& p = c.params;
    require(p.d == 2, "tail requires d = 2");
    require(c.reg.variant == Regularization::combined, "tail uses the combined regularization (--eps and --gap)");
    c.reg.validate(p);
    const int M = c.mc.steps > 0 ? c.mc.steps : steps_for(p.T, c.reg.epsilon);
    const double lambda = grid_gap(sample_path(p, M, c.mc.seed, 0), c.reg.lambda);
    const double k = divergence_constant_k(p, lambda);
    double K = 0.0;
    if (c.K) {
        K = *c.K;
    } else {
        // D(Lambda) <= K Lambda ln^2 Lambda with K = T * max ratio.
        const auto rate = rate_verification(p, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, c.nmax);
        K = p.T * rate.max_ratio();
    }
    Table t{{"threshold", "alpha", "k", "K", "lambda", "bound", "frequency", "std_error", "n_samples", "seed"}, {}, {}};
    for (double N : c.thresholds) {
        TailExperiment exp{N, c.g, 0.0, k, K};
        // Matched regularization: choose alpha so that exp(-alpha (N - k)) is the simulated Lambda.
        exp.alpha = c.alpha ? *c.alpha : std::abs(std::log(lambda)) / (N - k);
        const double bound = chebyshev_tail_bound(exp, p);
        const auto freq = empirical_tail(p, c.reg, N, c.mc.n_paths, c.mc.seed, M);
        t.add({N, exp.alpha, k, K, exp.lambda(), bound, freq.mean, freq.std_error, as_int(freq.n_samples),
               static_cast<std::int64_t>(c.mc.seed)});
    }
    return t;
}

Table cmd_partition(const RunConfig& c, std::ostream& err) {
    const auto& p = c.params;
    if (p.d == 2 && c.g >= 2.0 * kPi / p.T)
        err << "warning: g >= 2 pi / T; exp(-g L_c) need not be integrable (exploration mode)\n";
    const auto est = partition_estimate(p, c.g, c.reg, c.mc.n_paths, c.mc.seed, c.mc.steps);
    Table t{{"g", "d", "T", "eps", "lambda", "mean", "std_error", "n_samples", "seed"}, {}, {}};
    t.add({c.g, std::int64_t{p.d}, p.T, c.reg.mollifier(), c.reg.gap_width(), est.mean, est.std_error,
           as_int(est.n_samples), static_cast<std::int64_t>(est.seed)});
    return t;
}

}  // namespace

int run(const RunConfig& config, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    try {
        require(config.format == "csv" || config.format == "json", "format is one of {csv, json}");
        config.params.validate();
        if (config.command != "partition" && config.command != "validate-kernels" && config.command != "kernel" &&
            config.command != "norms" && config.command != "rate")
            config.reg.validate(config.params);

        Table table;
        bool validation_passed = true;
        const auto& cmd = config.command;
        if (cmd == "expectation") table = cmd_expectation(config);
        else if (cmd == "kernel") table = cmd_kernel(config);
        else if (cmd == "validate-kernels") table = cmd_validate_kernels(config, validation_passed);
        else if (cmd == "norms") table = cmd_norms(config);
        else if (cmd == "rate") table = cmd_rate(config);
        else if (cmd == "simulate") table = cmd_simulate(config);
        else if (cmd == "tail") table = cmd_tail(config);
        else if (cmd == "partition") table = cmd_partition(config, err);
        else throw PreconditionError("unknown command '" + cmd + "'");

        const double wall = config.timing
                                ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
                                : 0.0;
        const std::string text =
            config.format == "json" ? render_json(config, table, wall) : render_csv(config, table);
        if (config.output.empty()) std::cout << text;
        else write_atomically(config.output, text);
        return validation_passed ? kOk : kValidationFailed;
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << '\n';
        return kPrecondition;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << '\n';
        return kConvergence;
    } catch (const OverflowError& e) {
        err << "overflow: " << e.what() << '\n';
        return kOverflow;
    }
}

namespace {

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            throw PreconditionError("'" + item + "' is not a number");
        }
        require(used == item.size(), "'" + item + "' is not a number");
        out.push_back(x);
    }
    return out;
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"Chaos kernels, norms and Monte Carlo experiments for Brownian self-intersection local times"};
    app.require_subcommand(1);

    RunConfig c;
    std::optional<int> dim;
    std::optional<int> N;
    std::optional<double> eps, gap;
    std::string regularization;
    std::string lambdas_text, thresholds_text, index_text;
    bool no_timing = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--dim", dim, "Dimension d");
        sub->add_option("--T", c.params.T, "Time horizon T");
        sub->add_option("--N", N, "Chaos truncation N (default: smallest with 2N > d - 2)");
        sub->add_option("--eps", eps, "Gaussian mollifier variance eps");
        sub->add_option("--gap", gap, "Gap width Lambda");
        sub->add_option("--reg", regularization, "Regularization {gaussian, gap, cut, combined}");
        sub->add_option("--output", c.output, "Output file (default: stdout)");
        sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", c.mc.seed, "Random seed");
        sub->add_flag("--no-timing", no_timing, "Report wall_time_s = 0 so JSON output is reproducible");
    };
    auto add_mc = [&](CLI::App* sub) {
        sub->add_option("--paths", c.mc.n_paths, "Number of sample paths");
        sub->add_option("--steps", c.mc.steps, "Time steps M per path (default: dt = eps / 10)");
    };

    auto* expectation = app.add_subcommand("expectation", "Closed-form expectation of the regularized local time");
    add_common(expectation);

    auto* kernel = app.add_subcommand("kernel", "Evaluate one chaos kernel at (u, v)");
    add_common(kernel);
    kernel->add_option("--kind", c.kind, "psi, phi, phi_eps, rho, gap or cut");
    kernel->add_option("--n", c.order, "Total order n (multi-index (n, 0, ..., 0))");
    kernel->add_option("--index", index_text, "Multi-index as a comma list, e.g. 1,0");
    kernel->add_option("--u", c.u, "u = min of the kernel arguments");
    kernel->add_option("--v", c.v, "v = max of the kernel arguments");

    auto* validate = app.add_subcommand("validate-kernels", "Compare closed-form kernels with the quadrature oracle");
    add_common(validate);
    validate->add_option("--samples", c.samples, "Random points per (kernel, n)");
    validate->add_option("--tol", c.tol, "Relative tolerance");

    auto* norms = app.add_subcommand("norms", "Per-order terms of ||L^(2N) - L^(2N)(Lambda)||^2");
    add_common(norms);
    norms->add_option("--nmax", c.nmax, "Highest chaos order");

    auto* rate = app.add_subcommand("rate", "Ratio D(Lambda) / (T Lambda ln^2 Lambda) over a Lambda grid");
    add_common(rate);
    rate->add_option("--lambdas", lambdas_text, "Comma list of decreasing Lambda values")->required();
    rate->add_option("--nmax", c.nmax, "Highest chaos order");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of a local-time functional");
    add_common(simulate);
    add_mc(simulate);
    simulate->add_option("--estimator", c.estimator, "gaussian, centered or occupation");
    simulate->add_option("--bin", c.bin_width, "Bin width of the occupation estimator");

    auto* tail = app.add_subcommand("tail", "Empirical P(L_c <= -N) against the Chebyshev bound");
    add_common(tail);
    add_mc(tail);
    tail->add_option("--threshold", thresholds_text, "Comma list of thresholds N");
    tail->add_option("--alpha", c.alpha, "Rate alpha (default: matched to the simulated Lambda)");
    tail->add_option("--K", c.K, "Rate constant K (default: from the rate experiment, slow)");
    tail->add_option("--nmax", c.nmax, "Highest chaos order when K is computed");
    tail->add_option("--g", c.g, "Coupling g (recorded only)");

    auto* partition = app.add_subcommand("partition", "Monte Carlo estimate of Z = E exp(-g L_c)");
    add_common(partition);
    add_mc(partition);
    partition->add_option("--g", c.g, "Coupling g");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kPrecondition;
    }

    try {
        c.command = app.get_subcommands().front()->get_name();
        c.params.d = dim.value_or(c.params.d);
        c.params.N = N.value_or(ModelParams::minimal_truncation(c.params.d));
        c.timing = !no_timing;
        if (!lambdas_text.empty()) c.lambdas = parse_list(lambdas_text);
        if (!thresholds_text.empty()) c.thresholds = parse_list(thresholds_text);
        if (!index_text.empty()) {
            for (double x : parse_list(index_text)) {
                require(x >= 0.0 && x == std::floor(x), "multi-index entries are nonnegative integers");
                c.index.push_back(static_cast<int>(x));
            }
        }
        c.reg.epsilon = eps.value_or(0.0);
        c.reg.lambda = gap.value_or(0.0);
        if (!regularization.empty()) c.reg.variant = regularization_from_string(regularization);
        else if (eps && gap) c.reg.variant = Regularization::combined;
        else if (gap) c.reg.variant = Regularization::gap;
        else c.reg.variant = Regularization::gaussian;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << '\n';
        return kPrecondition;
    }
    return run(c, std::cerr);
}

}  // namespace silt::cli
