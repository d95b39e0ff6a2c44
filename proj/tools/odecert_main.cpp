// Command-line front end: certify equilibria, scan certified regions, validate
// them against simulation, and check CPWL error bounds.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odecert/certificates.hpp"
#include "odecert/cpwl.hpp"
#include "odecert/io.hpp"
#include "odecert/ode.hpp"
#include "odecert/region.hpp"
#include "odecert/system.hpp"

namespace {

using namespace odecert;

constexpr int kExitCertified = 0;
constexpr int kExitNotCertified = 1;
constexpr int kExitParseError = 2;
constexpr int kExitNotApplicable = 3;

struct RunConfig {
    std::string system_path;
    std::string box_spec;
    std::string res_spec;
    std::string divisions_spec;
    std::string mode = "origin";
    std::string f_path;
    std::string lambdas = "auto";
    std::string region_path;
    double horizon = 100.0;
    std::string out_dir = ".";
    unsigned long long seed = 1;
    int samples = 200;
};

Box parse_box(const std::string& spec) {
    Box box;
    std::istringstream in(spec);
    std::string axis;
    while (std::getline(in, axis, ',')) {
        const auto colon = axis.find(':');
        if (colon == std::string::npos)
            throw InputError("bad box axis '" + axis + "', expected lo:hi");
        try {
            box.axes.push_back({std::stod(axis.substr(0, colon)),
                                std::stod(axis.substr(colon + 1))});
        } catch (const InputError&) {
            throw;
        } catch (...) {
            throw InputError("bad box axis '" + axis + "'");
        }
    }
    box.validate();
    return box;
}

std::vector<int> parse_ints(const std::string& spec, const char* what) {
    std::vector<int> out;
    std::istringstream in(spec);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (...) {
            throw InputError(std::string("bad ") + what + " entry '" + tok + "'");
        }
    }
    if (out.empty()) throw InputError(std::string("empty ") + what);
    return out;
}

VectorField load_system(const RunConfig& cfg) {
    if (cfg.system_path.empty()) throw InputError("--system is required");
    return VectorField::parse(read_file(cfg.system_path));
}

CertificateParams build_params(const VectorField& vf, const RunConfig& cfg, const Box& box) {
    Matrix f;
    CertificateMode mode;
    if (cfg.mode == "origin") {
        Vec zero(static_cast<std::size_t>(vf.dimension()), 0.0);
        f = vf.jacobian(zero);
        mode = CertificateMode::jacobian_origin;
    } else if (cfg.mode == "fixed") {
        if (cfg.f_path.empty()) throw InputError("--F is required for mode fixed");
        f = read_matrix_csv(cfg.f_path);
        mode = CertificateMode::fixed_F;
    } else {
        throw InputError("mode '" + cfg.mode + "' does not take certificate parameters");
    }
    if (cfg.lambdas == "auto") {
        CertificateParams p = tune_parameters(vf, f, box);
        p.mode = mode;
        return p;
    }
    auto [lb, lt] = read_lambda_file(cfg.lambdas);
    return make_certificate(std::move(f), std::move(lb), std::move(lt), mode);
}

void ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

int cmd_certify(const RunConfig& cfg) {
    const VectorField vf = load_system(cfg);
    const std::size_t n = static_cast<std::size_t>(vf.dimension());
    Vec zero(n, 0.0);
    ensure_out_dir(cfg);

    std::ostringstream rep;
    bool certified = false;
    if (cfg.mode == "pointwise") {
        const PointVerdict v = systematic_test(vf, zero);
        if (!v.hurwitz_ok)
            throw NotApplicableError("Jacobian at the origin is not Hurwitz");
        certified = v.in_omega;
        const Matrix j0 = vf.jacobian(zero);
        rep << "command=certify\nmode=pointwise\n";
        rep << "verdict=" << (certified ? "certified" : "not-certified") << "\n";
        rep << "lambda_R_origin=" << fmt(v.lambda_R) << "\n";
        rep << matrix_block("F", j0);
        rep << matrix_block("P", solve_lyapunov(j0));
    } else {
        const Box box = cfg.box_spec.empty() ? Box{} : parse_box(cfg.box_spec);
        if (cfg.lambdas == "auto" && cfg.box_spec.empty())
            throw InputError("--box is required with --lambdas auto");
        const CertificateParams params = build_params(vf, cfg, box);
        const PointVerdict origin = omega_membership(vf, params, zero);
        certified = params.rayleigh_ok() && origin.in_omega;
        rep << "command=certify\nmode=" << cfg.mode << "\n";
        rep << "verdict=" << (certified ? "certified" : "not-certified") << "\n";
        rep << "lambda_R=" << fmt(params.lambda_R) << "\n";
        rep << "origin_in_omega=" << (origin.in_omega ? 1 : 0) << "\n";
        rep << "origin_failed_condition=" << to_string(origin.failed) << "\n";
        rep << matrix_block("F", params.F);
        rep << matrix_block("P", params.P);
        rep << bound_block("lambda_bar", params.lambda_bar);
        rep << bound_block("lambda_tilde", params.lambda_tilde);
    }
    std::cout << rep.str();
    write_file(out_path(cfg, "certificate.txt"), rep.str());
    return certified ? kExitCertified : kExitNotCertified;
}

int cmd_region(const RunConfig& cfg) {
    const VectorField vf = load_system(cfg);
    if (cfg.box_spec.empty()) throw InputError("--box is required");
    const Box box = parse_box(cfg.box_spec);
    if (cfg.res_spec.empty()) throw InputError("--res is required");
    const std::vector<int> res = parse_ints(cfg.res_spec, "resolution");
    ensure_out_dir(cfg);

    Certificate cert;
    if (cfg.mode == "pointwise")
        cert = Certificate::systematic();
    else
        cert = Certificate::with_params(build_params(vf, cfg, box));

    RegionEstimate est = scan_region(vf, cert, box, res);
    std::vector<Polyline> lines;
    if (box.dim() == 2) lines = extract_boundary_2d(est);

    write_file(out_path(cfg, "region.csv"), region_csv(est));
    if (box.dim() == 2) {
        write_file(out_path(cfg, "boundary.csv"), boundary_csv(lines));
        write_file(out_path(cfg, "region.svg"), region_svg(est, lines));
    }
    std::cout << "command=region\nmode=" << cfg.mode << "\n";
    std::cout << "certified_fraction=" << fmt(est.certified_fraction) << "\n";

    if (box.dim() == 2) {
        // largest sup-norm radius of cell centers whose full prefix is certified
        std::vector<std::pair<double, bool>> by_norm;
        std::vector<int> cell(2, 0);
        for (cell[0] = 0; cell[0] < res[0]; ++cell[0])
            for (cell[1] = 0; cell[1] < res[1]; ++cell[1]) {
                const Vec c = est.cell_center(cell);
                by_norm.emplace_back(std::max(std::abs(c[0]), std::abs(c[1])),
                                     est.verdicts[est.index(cell)].in_omega);
            }
        std::sort(by_norm.begin(), by_norm.end());
        double half_width = 0.0;
        for (const auto& [norm, ok] : by_norm) {
            if (!ok) break;
            half_width = norm;
        }
        std::cout << "certified_half_width=" << fmt(half_width) << "\n";
    }
    return kExitCertified;
}

int cmd_validate(const RunConfig& cfg) {
    const VectorField vf = load_system(cfg);
    if (cfg.region_path.empty()) throw InputError("--region is required");
    std::vector<Vec> certified = read_certified_points_csv(cfg.region_path);
    ensure_out_dir(cfg);

    std::ostringstream rep;
    rep << "command=validate\ncertified_points=" << certified.size() << "\n";
    if (certified.empty()) {
        rep << "status=vacuous_pass\nwarning=region file contains no certified points\n";
        std::cout << rep.str();
        write_file(out_path(cfg, "validate_report.txt"), rep.str());
        return kExitCertified;
    }
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(certified.begin(), certified.end(), rng);
    if (static_cast<int>(certified.size()) > cfg.samples)
        certified.resize(static_cast<std::size_t>(cfg.samples));

    IntegrationControls controls;
    controls.method = IntegrationControls::Method::rkf45_adaptive;
    if (!cfg.box_spec.empty()) controls.escape_box = parse_box(cfg.box_spec).scaled(10.0);
    const OracleReport oracle = attraction_oracle(vf, certified, cfg.horizon, controls);

    rep << "sampled=" << certified.size() << "\n";
    rep << "converged=" << oracle.n_converged << "\n";
    rep << "escaped=" << oracle.n_escaped << "\n";
    rep << "horizon_reached=" << oracle.n_horizon << "\n";
    rep << "domain_error=" << oracle.n_domain_error << "\n";
    rep << "failures=" << oracle.failures.size() << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(oracle.failures.size(), 10); ++i) {
        rep << "failure_point=";
        const Vec& x = certified[oracle.failures[i]];
        for (std::size_t j = 0; j < x.size(); ++j) rep << (j ? "," : "") << fmt(x[j]);
        rep << "\n";
    }
    std::cout << rep.str();
    write_file(out_path(cfg, "validate_report.txt"), rep.str());
    return oracle.failures.empty() ? kExitCertified : kExitNotCertified;
}

int cmd_cpwl_check(const RunConfig& cfg) {
    const VectorField vf = load_system(cfg);
    if (cfg.box_spec.empty()) throw InputError("--box is required");
    const Box box = parse_box(cfg.box_spec);
    if (cfg.divisions_spec.empty()) throw InputError("--divisions is required");
    const std::vector<int> divs = parse_ints(cfg.divisions_spec, "divisions");
    ensure_out_dir(cfg);

    const SimplicialPartition part = SimplicialPartition::build(box, divs);
    const std::vector<AffinePiece> pieces = fit_pieces(vf, part);
    const Theorem1Verdict verdict = check_theorem1(part, pieces);

    std::ostringstream rep;
    rep << "command=cpwl-check\n";
    rep << "simplices=" << part.size() << "\n";
    double lambda_max = 0.0;
    for (const AffinePiece& p : pieces) lambda_max = std::max(lambda_max, norm_inf(p.lambda));
    rep << "lambda_max=" << fmt(lambda_max) << "\n";
    rep << "theorem1=" << (verdict.certified ? "certified" : "not-certified") << "\n";
    if (!verdict.certified) {
        rep << "failing_simplex=" << *verdict.failing_simplex << "\n";
        rep << "reason=" << verdict.reason << "\n";
    }

    // co-simulated error-bound sandwich from sampled starts
    std::mt19937_64 rng(cfg.seed);
    const Box inner = box.scaled(0.7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int violations = 0;
    double worst = 0.0;
    double spectrum_dev = 0.0;
    const double horizon = cfg.horizon > 0.0 ? std::min(cfg.horizon, 10.0) : 10.0;
    const int n_traj = std::min(cfg.samples, 20);
    for (int s = 0; s < n_traj; ++s) {
        Vec x0(static_cast<std::size_t>(box.dim()));
        for (int i = 0; i < box.dim(); ++i)
            x0[static_cast<std::size_t>(i)] =
                inner.lo(i) + unit(rng) * (inner.hi(i) - inner.lo(i));
        const ErrorBoundRun run = integrate_error_bounds(vf, part, pieces, x0, horizon);
        worst = std::max(worst, run.max_violation);
        if (run.max_violation > 1e-7) ++violations;
        // block-spectrum union on the visited simplex pairs
        std::size_t prev_i = static_cast<std::size_t>(-1), prev_k = static_cast<std::size_t>(-1);
        for (const ErrorBoundSample& smp : run.samples) {
            if (smp.simplex_true == prev_i && smp.simplex_cpwl == prev_k) continue;
            prev_i = smp.simplex_true;
            prev_k = smp.simplex_cpwl;
            spectrum_dev = std::max(
                spectrum_dev, block_spectrum_deviation(pieces[prev_i], pieces[prev_k]));
        }
    }
    rep << "trajectories=" << n_traj << "\n";
    rep << "sandwich_tolerance=1e-07\n";
    rep << "sandwich_violations=" << violations << "\n";
    rep << "max_violation=" << fmt(worst) << "\n";
    rep << "block_spectrum_max_deviation=" << fmt(spectrum_dev) << "\n";

    write_file(out_path(cfg, "pieces.csv"), pieces_csv(part, pieces));
    write_file(out_path(cfg, "cpwl_report.txt"), rep.str());
    std::cout << rep.str();
    return (verdict.certified && violations == 0) ? kExitCertified : kExitNotCertified;
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--system", cfg.system_path, "system-definition file");
    cmd->add_option("--box", cfg.box_spec, "analysis box, e.g. \"-1:1,-1:1\"");
    cmd->add_option("--mode", cfg.mode, "origin | pointwise | fixed")
        ->check(CLI::IsMember({"origin", "pointwise", "fixed"}));
    cmd->add_option("--F", cfg.f_path, "matrix CSV for mode fixed");
    cmd->add_option("--lambdas", cfg.lambdas, "auto or a lambda-pair file");
    cmd->add_option("--horizon", cfg.horizon, "simulation horizon");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.seed, "seed for randomized sampling");
    cmd->add_option("--samples", cfg.samples, "sample budget for randomized checks");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attraction and stability certificates for nonlinear ODEs"};
    app.require_subcommand(1);

    RunConfig cfg;
    CLI::App* certify = app.add_subcommand("certify", "decide attraction at the origin");
    add_common(certify, cfg);
    CLI::App* region = app.add_subcommand("region", "scan a certified region");
    add_common(region, cfg);
    region->add_option("--res", cfg.res_spec, "grid resolution, e.g. 101,101");
    CLI::App* validate = app.add_subcommand("validate", "simulate certified points");
    add_common(validate, cfg);
    validate->add_option("--region", cfg.region_path, "region CSV to validate");
    CLI::App* cpwl = app.add_subcommand("cpwl-check", "CPWL pieces and error bounds");
    add_common(cpwl, cfg);
    cpwl->add_option("--divisions", cfg.divisions_spec, "partition divisions, e.g. 8,8");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParseError;
    }

    try {
        if (certify->parsed()) return cmd_certify(cfg);
        if (region->parsed()) return cmd_region(cfg);
        if (validate->parsed()) return cmd_validate(cfg);
        if (cpwl->parsed()) return cmd_cpwl_check(cfg);
    } catch (const odecert::NotApplicableError& e) {
        std::cerr << "not-applicable: " << e.what() << "\n";
        return kExitNotApplicable;
    } catch (const odecert::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParseError;
    }
    return kExitParseError;
}
