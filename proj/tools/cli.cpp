#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "renewal/renewal.hpp"

namespace renewal::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: '" + s + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
    return out;
}

struct ModelSpec {
    std::string kind;
    std::map<std::string, double> params;
};

ModelSpec resolve_model_spec(const RunConfig& config) {
    ModelSpec spec;
    if (!config.model_file.empty()) {
        std::ifstream in(config.model_file);
        if (!in) throw std::invalid_argument("cannot open model file " + config.model_file);
        nlohmann::json j;
        in >> j;
        if (!j.contains("model") || !j["model"].is_string())
            throw std::invalid_argument("model file needs a string field 'model'");
        spec.kind = j["model"].get<std::string>();
        if (j.contains("params"))
            for (auto& [key, value] : j["params"].items())
                spec.params[key] = value.get<double>();
        if (j.contains("tau")) spec.params["tau"] = j["tau"].get<double>();
    } else if (!config.model_kind.empty()) {
        spec.kind = config.model_kind;
    } else {
        throw std::invalid_argument("no model given (use --model or --model-file)");
    }
    for (const auto& [key, value] : config.overrides) spec.params[key] = value;
    return spec;
}

class Output {
public:
    explicit Output(const RunConfig& config) {
        if (!config.out.empty()) {
            file_.open(config.out);
            if (!file_) throw std::invalid_argument("cannot open output file " + config.out);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void write_preamble(std::ostream& out, const RunConfig& config, const ModelSpec* spec,
                    double tau = 0.0) {
    out << "# renewal-spectral 0.1.0\n";
    out << "# command=" << config.command << " M=" << config.M;
    if (tau > 0.0) out << " tau=" << fmt(tau);
    out << " nq=" << config.nq << " seed=" << config.seed << " rtol=" << fmt(config.rtol)
        << " atol=" << fmt(config.atol) << "\n";
    if (spec) {
        out << "# model=" << spec->kind;
        for (const auto& [key, value] : spec->params) out << " " << key << "=" << fmt(value);
        out << "\n";
    }
    if (!config.reproducible) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
        out << "# generated: " << buf << "\n";
    }
}

int env_thread_cap() {
    const char* raw = std::getenv("RENEWAL_SPECTRAL_THREADS");
    if (!raw) return 0;
    const int v = std::atoi(raw);
    return v > 0 ? v : 1;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

void cmd_mesh(const RunConfig& config) {
    const ChebyshevMesh mesh = build_mesh(config.M, config.tau);
    nlohmann::json j;
    j["M"] = mesh.M;
    j["tau"] = mesh.tau;
    j["nodes"] = vector_json(mesh.nodes);
    j["bary_weights"] = vector_json(mesh.bary_weights);
    j["bary_weights_sub"] = vector_json(mesh.bary_weights_sub);
    j["quad_weights"] = vector_json(mesh.quad_weights);
    j["diff_full"] = matrix_json(mesh.diff_full);
    j["diff_sub"] = matrix_json(mesh.diff_sub);
    Output output(config);
    output.stream() << (config.pretty ? j.dump(2) : j.dump()) << "\n";
}

void cmd_eig(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    const RenewalModel model = build_model(spec.kind, spec.params);
    const ChebyshevMesh mesh = build_mesh(config.M, model.tau);
    const DiscretizedSystem system = build_system(mesh, model, config.nq);
    const double b = solve_equilibrium(model, config.start_b);
    const Spectrum spectrum = eigenvalues(system, equilibrium_lift(b, mesh));

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, model.tau);
    out << "# equilibrium b=" << fmt(b) << "\n";
    out << "re,im,multiplicity_estimate\n";
    const auto& ev = spectrum.eigenvalues;
    for (size_t i = 0; i < ev.size(); ++i) {
        int mult = 0;
        for (const auto& other : ev)
            if (std::abs(other - ev[i]) <= 1e-7 * (1.0 + std::abs(ev[i]))) ++mult;
        out << fmt(ev[i].real()) << "," << fmt(ev[i].imag()) << "," << mult << "\n";
    }
}

std::function<double(double)> load_history_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open history file " + path);
    std::vector<std::pair<double, double>> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double theta, value;
        if (ls >> theta >> value) samples.emplace_back(theta, value);
    }
    if (samples.size() < 2)
        throw std::invalid_argument("history file needs at least two theta,value rows");
    std::sort(samples.begin(), samples.end());
    return [samples](double theta) {
        if (theta <= samples.front().first) return samples.front().second;
        if (theta >= samples.back().first) return samples.back().second;
        const auto it = std::upper_bound(
            samples.begin(), samples.end(), std::pair{theta, 1e300});
        const auto [t1, v1] = *(it - 1);
        const auto [t2, v2] = *it;
        return v1 + (v2 - v1) * (theta - t1) / (t2 - t1);
    };
}

void cmd_simulate(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    const RenewalModel model = build_model(spec.kind, spec.params);
    const ChebyshevMesh mesh = build_mesh(config.M, model.tau);
    const DiscretizedSystem system = build_system(mesh, model, config.nq);

    Eigen::VectorXd x0;
    if (config.x0 == "equilibrium+eps") {
        const double b = solve_equilibrium(model, config.start_b);
        x0 = equilibrium_lift(b * (1.0 + config.eps), mesh);
    } else {
        x0 = history_to_state(load_history_file(config.x0), mesh);
    }
    const double t_end = config.t_end > 0.0 ? config.t_end : 200.0 * model.tau;
    const Trajectory traj = integrate(system, x0, t_end, config.rtol, config.atol);

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, model.tau);
    out << "t,b";
    for (int j = 0; j < mesh.M; ++j) out << ",x" << j;
    out << "\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        out << fmt(traj.times[i]) << "," << fmt(traj.b_values[i]);
        for (int j = 0; j < mesh.M; ++j) out << "," << fmt(traj.states[i][j]);
        out << "\n";
    }
}

void cmd_continue(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    if (config.param.empty()) throw std::invalid_argument("continue needs --param");
    const ModelFamily family =
        make_family(spec.kind, spec.params, config.param, config.from, config.to);
    const RenewalModel first = family.at(family.from);
    const ChebyshevMesh mesh = build_mesh(config.M, first.tau);

    const Branch branch =
        continue_equilibria(family, mesh, config.start_b, config.points, config.nq);
    const auto bifurcations = detect_bifurcations(branch, family, mesh, config.nq);

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, first.tau);
    out << "# active_param=" << config.param << " from=" << fmt(config.from)
        << " to=" << fmt(config.to) << " points=" << config.points << "\n";
    if (!branch.complete) out << "# branch truncated: " << branch.termination_reason << "\n";
    for (const BifurcationPoint& bif : bifurcations) {
        out << "# bifurcation kind="
            << (bif.kind == BifurcationKind::hopf ? "hopf" : "zero-crossing")
            << " param=" << fmt(bif.param) << " b=" << fmt(bif.b_eq)
            << " re=" << fmt(bif.eigenvalue.real()) << " im=" << fmt(bif.eigenvalue.imag())
            << " refined=" << (bif.refined ? 1 : 0) << "\n";
    }
    out << "param,b_eq,re_rightmost,im_rightmost,stable\n";
    for (const BranchPoint& pt : branch.points) {
        out << fmt(pt.param) << "," << fmt(pt.b_eq) << "," << fmt(pt.rightmost.real())
            << "," << fmt(pt.rightmost.imag()) << "," << (pt.stable ? 1 : 0) << "\n";
    }
}

void cmd_hopf_curve(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    if (config.param.empty() || config.param2.empty())
        throw std::invalid_argument("hopf-curve needs --param and --param2");
    if (config.grid.empty()) throw std::invalid_argument("hopf-curve needs --grid");

    const RenewalModel probe = build_model(spec.kind, [&] {
        auto p = spec.params;
        p[config.param2] = config.grid.front();
        p[config.param] = config.from;
        return p;
    }());
    const ChebyshevMesh mesh = build_mesh(config.M, probe.tau);

    auto family_at = [&](double p2) {
        auto params = spec.params;
        params[config.param2] = p2;
        return make_family(spec.kind, params, config.param, config.from, config.to);
    };
    auto start_b = [&](double) { return config.start_b; };

    int n_threads = env_thread_cap();
    if (n_threads == 0)
        n_threads = static_cast<int>(
            std::min<size_t>(config.grid.size(),
                             std::max(1u, std::thread::hardware_concurrency())));
    const auto curve = hopf_curve(family_at, config.grid, start_b, mesh, config.points,
                                  config.nq, n_threads);

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, probe.tau);
    out << "# param1=" << config.param << " param2=" << config.param2
        << " threads=" << n_threads << "\n";
    out << "param2,hopf_param1,found,note\n";
    for (const HopfCurvePoint& pt : curve) {
        out << fmt(pt.param2) << "," << (pt.found ? fmt(pt.hopf_param1) : "") << ","
            << (pt.found ? 1 : 0) << "," << pt.note << "\n";
    }
}

void cmd_floquet(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    const bool walk = !config.param.empty() && config.from != config.to;

    // settle onto an orbit at the walk start (or at the pinned parameters)
    auto model_at = [&](double p) {
        auto params = spec.params;
        if (!config.param.empty()) params[config.param] = p;
        return build_model(spec.kind, params);
    };
    const double p_start = walk ? config.from : 0.0;
    const RenewalModel model0 = model_at(p_start);
    const ChebyshevMesh mesh = build_mesh(config.M, model0.tau);
    DiscretizedSystem system = build_system(mesh, model0, config.nq);

    const double b = solve_equilibrium(model0, config.start_b);
    const double t_end = config.t_end > 0.0 ? config.t_end : 200.0 * model0.tau;
    const Trajectory traj = integrate(system, equilibrium_lift(b * (1.0 + config.eps), mesh),
                                      t_end, config.rtol, config.atol);
    const OrbitSummary settled = extract_orbit(system, traj, config.transient_fraction);

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, model0.tau);
    out << "param,period,re,im,modulus\n";

    Eigen::VectorXd anchor = settled.anchor_state;
    double period = settled.period;
    const std::vector<double> walk_params = [&] {
        std::vector<double> ps;
        if (!walk) return std::vector<double>{p_start};
        const int n = std::max(2, config.points);
        for (int i = 0; i < n; ++i)
            ps.push_back(config.from + (config.to - config.from) * i / (n - 1.0));
        return ps;
    }();
    for (double p : walk_params) {
        system = build_system(mesh, model_at(p), config.nq);
        const PeriodicOrbit orbit =
            refine_orbit(system, anchor, period, config.rtol / 10.0, config.atol / 10.0);
        anchor = orbit.anchor;
        period = orbit.period;
        for (const auto& mu : floquet_multipliers(orbit.mono.matrix)) {
            out << fmt(p) << "," << fmt(period) << "," << fmt(mu.real()) << ","
                << fmt(mu.imag()) << "," << fmt(std::abs(mu)) << "\n";
        }
    }
}

void cmd_converge(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    const RenewalModel model = build_model(spec.kind, spec.params);
    if (config.M_list.empty()) throw std::invalid_argument("converge needs --Mlist");
    const double b = solve_equilibrium(model, config.start_b);
    const auto table = convergence_study(model, b, config.M_list, config.ref_M, config.nq);

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, model.tau);
    out << "# reference_M=" << config.ref_M << " equilibrium b=" << fmt(b) << "\n";
    out << "M,error,rcond\n";
    for (const ConvergencePoint& pt : table)
        out << pt.M << "," << fmt(pt.error) << "," << fmt(pt.rcond) << "\n";
}

void cmd_bench(const RunConfig& config) {
    const ModelSpec spec = resolve_model_spec(config);
    if (config.param.empty()) throw std::invalid_argument("bench needs --param");
    const ModelFamily family =
        make_family(spec.kind, spec.params, config.param, config.from, config.to);
    if (config.M_list.empty()) throw std::invalid_argument("bench needs --Mlist");

    const double b_ref = solve_equilibrium(family.at(family.from), config.start_b);
    const auto rows = bench_compare(family, b_ref, config.M_list, config.evals,
                                    config.points, config.seed);

    Output output(config);
    std::ostream& out = output.stream();
    write_preamble(out, config, &spec, family.at(family.from).tau);
    out << "# evals=" << config.evals << " continuation_points=" << config.points << "\n";
    out << "M,legacy_rhs_s,current_rhs_s,rhs_ratio,legacy_cont_s,current_cont_s,"
           "cont_ratio,inner_iters_per_rhs,low_confidence\n";
    for (const BenchRow& row : rows) {
        out << row.M << "," << fmt(row.legacy_rhs_seconds) << ","
            << fmt(row.current_rhs_seconds) << "," << fmt(row.rhs_ratio) << ","
            << fmt(row.legacy_continuation_seconds) << ","
            << fmt(row.current_continuation_seconds) << "," << fmt(row.continuation_ratio)
            << "," << fmt(row.inner_iterations_per_rhs) << ","
            << (row.low_confidence ? 1 : 0) << "\n";
    }
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args, bool& help_requested) {
    RunConfig config;
    help_requested = false;

    CLI::App app{"Pseudospectral reduction of renewal equations to ODEs: "
                 "equilibria, spectra, orbits, continuation, benchmarks"};
    app.require_subcommand(1);

    std::string grid_raw, mlist_raw;
    std::vector<std::string> set_raw;

    auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--model", config.model_kind,
                        "built-in model: sirs | blowflies | cannibalism | linear");
        cmd->add_option("--model-file", config.model_file, "JSON model config");
        cmd->add_option("--set", set_raw,
                        "override a model parameter, key=value (repeatable)");
        cmd->add_option("--nq", config.nq, "quadrature nodes per term (0 = auto)");
        cmd->add_option("--guess,--start-b", config.start_b,
                        "equilibrium guess / branch start value");
        cmd->add_option("--out", config.out, "output path (default stdout)");
        cmd->add_option("--seed", config.seed, "random seed");
        cmd->add_flag("--reproducible", config.reproducible,
                      "suppress the timestamp comment");
    };

    CLI::App* mesh = app.add_subcommand("mesh", "dump mesh operators as JSON");
    mesh->add_option("--M", config.M)->required();
    mesh->add_option("--tau", config.tau)->required();
    mesh->add_flag("--json", config.pretty, "pretty-print the JSON");
    mesh->add_option("--out", config.out);

    CLI::App* eig = app.add_subcommand("eig", "spectrum at an equilibrium");
    add_model_flags(eig);
    eig->add_option("--M", config.M);

    CLI::App* simulate = app.add_subcommand("simulate", "time integration");
    add_model_flags(simulate);
    simulate->add_option("--M", config.M);
    simulate->add_option("--t-end", config.t_end);
    simulate->add_option("--x0", config.x0, "equilibrium+eps or a theta,value CSV file");
    simulate->add_option("--eps", config.eps);
    simulate->add_option("--rtol", config.rtol);
    simulate->add_option("--atol", config.atol);

    CLI::App* cont = app.add_subcommand("continue", "equilibrium branch continuation");
    add_model_flags(cont);
    cont->add_option("--M", config.M);
    cont->add_option("--param", config.param)->required();
    cont->add_option("--from", config.from)->required();
    cont->add_option("--to", config.to)->required();
    cont->add_option("--points", config.points);

    CLI::App* hopf = app.add_subcommand("hopf-curve", "Hopf location over a grid");
    add_model_flags(hopf);
    hopf->add_option("--M", config.M);
    hopf->add_option("--param", config.param)->required();
    hopf->add_option("--from", config.from)->required();
    hopf->add_option("--to", config.to)->required();
    hopf->add_option("--points", config.points);
    hopf->add_option("--param2", config.param2)->required();
    hopf->add_option("--grid", grid_raw, "comma-separated param2 values")->required();

    CLI::App* floquet = app.add_subcommand("floquet", "orbit multipliers");
    add_model_flags(floquet);
    floquet->add_option("--M", config.M);
    floquet->add_option("--param", config.param, "walk this parameter by shooting");
    floquet->add_option("--from", config.from);
    floquet->add_option("--to", config.to);
    floquet->add_option("--points", config.points);
    floquet->add_option("--t-end", config.t_end);
    floquet->add_option("--eps", config.eps);
    floquet->add_option("--rtol", config.rtol);
    floquet->add_option("--atol", config.atol);
    floquet->add_option("--transient", config.transient_fraction);

    CLI::App* converge = app.add_subcommand("converge", "rightmost-root error vs M");
    add_model_flags(converge);
    converge->add_option("--Mlist", mlist_raw, "comma-separated M values")->required();
    converge->add_option("--ref", config.ref_M);

    CLI::App* bench = app.add_subcommand("bench", "legacy vs current timing");
    add_model_flags(bench);
    bench->add_option("--Mlist", mlist_raw)->required();
    bench->add_option("--param", config.param)->required();
    bench->add_option("--from", config.from)->required();
    bench->add_option("--to", config.to)->required();
    bench->add_option("--points", config.points, "continuation points");
    bench->add_option("--evals", config.evals, "timing samples per method");

    // CLI11 consumes the vector back to front
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        help_requested = true;
        std::cout << app.help() << std::endl;
        return config;
    } catch (const CLI::ParseError& e) {
        throw std::invalid_argument(e.what());
    }

    config.command = app.get_subcommands().front()->get_name();
    for (const std::string& kv : set_raw) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        config.overrides[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    if (!grid_raw.empty()) config.grid = parse_double_list(grid_raw);
    if (!mlist_raw.empty()) config.M_list = parse_int_list(mlist_raw);
    return config;
}

int run(const RunConfig& config) {
    try {
        if (config.command == "mesh") cmd_mesh(config);
        else if (config.command == "eig") cmd_eig(config);
        else if (config.command == "simulate") cmd_simulate(config);
        else if (config.command == "continue") cmd_continue(config);
        else if (config.command == "hopf-curve") cmd_hopf_curve(config);
        else if (config.command == "floquet") cmd_floquet(config);
        else if (config.command == "converge") cmd_converge(config);
        else if (config.command == "bench") cmd_bench(config);
        else throw std::invalid_argument("unknown command '" + config.command + "'");
        return 0;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace renewal::cli
