// pscat: command-line front end for point-interaction scattering and plane-data inversion.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 invalid input, 3 near resonance, 4 fit did not converge.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pscat/dataset_io.hpp"
#include "pscat/errors.hpp"
#include "pscat/inverse.hpp"
#include "pscat/krein.hpp"
#include "pscat/random.hpp"
#include "pscat/scattering.hpp"

using namespace pscat;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitResonance = 3;
constexpr int kExitNotConverged = 4;

// Thresholds for the verify report.
constexpr double kOpticalThreshold = 1e-8;
constexpr double kReciprocityThreshold = 1e-10;
constexpr double kRealityThreshold = 1e-10;
constexpr double kUnitarityThreshold = 1e-8;

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& flag) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError(flag + ": '" + item + "' is not a number");
        }
    }
    if (out.size() != expected) {
        throw ValidationError(flag + ": expected " + std::to_string(expected) + " comma-separated numbers");
    }
    return out;
}

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
    const auto v = parse_list(text, 3, flag);
    return {v[0], v[1], v[2]};
}

Point2 parse_point2(const std::string& text, const std::string& flag) {
    const auto v = parse_list(text, 2, flag);
    return {v[0], v[1]};
}

Box parse_box(const std::string& text) {
    const auto v = parse_list(text, 6, "--box");
    return Box{Vec3(v[0], v[2], v[4]), Vec3(v[1], v[3], v[5])};
}

void emit(const json& value) { std::cout << value.dump(2) << "\n"; }

json complex_json(cplx v, const char* re, const char* im) { return json{{re, v.real()}, {im, v.imag()}}; }

// ---------------------------------------------------------------------------

struct ForwardArgs {
    std::string config;
    std::optional<double> z_re, z_im, k;
    std::string x, y;
};

int run_forward(const ForwardArgs& a) {
    const auto config = io::read_config(a.config);
    std::optional<ComplexEnergy> z;
    if (a.k) {
        if (a.z_re || a.z_im) throw ValidationError("--k excludes --z-re/--z-im");
        if (!(*a.k > 0.0)) throw ValidationError("--k must be positive");
        z = ComplexEnergy::from_wavenumber(*a.k);
    } else {
        if (!a.z_re || !a.z_im) throw ValidationError("give --k or both --z-re and --z-im");
        z = ComplexEnergy(cplx(*a.z_re, *a.z_im));
    }
    const Vec3 x = parse_vec3(a.x, "--x"), y = parse_vec3(a.y, "--y");
    if (x == y) throw ValidationError("--x and --y coincide");
    const PerturbedGreen green(config, *z);
    emit(complex_json(green(x, y), "g_re", "g_im"));
    return kExitOk;
}

struct VerifyArgs {
    std::string config;
    double k = 1.0;
    int quad_degree = 24;
    int pairs = 10;
    std::uint64_t seed = 1;
};

int run_verify(const VerifyArgs& a) {
    const auto config = io::read_config(a.config);
    if (!(a.k > 0.0)) throw ValidationError("--k must be positive");
    if (a.quad_degree < 0) throw ValidationError("--quad-degree must be non-negative");
    if (a.pairs < 1) throw ValidationError("--pairs must be at least 1");
    const auto quad = SphereQuadrature::tensor(a.quad_degree);
    const auto dirs = random_directions(2 * std::size_t(a.pairs), a.seed);
    std::vector<DirectionPair> pairs;
    for (int i = 0; i < a.pairs; ++i) pairs.emplace_back(dirs[2 * i], dirs[2 * i + 1]);

    double optical = 0.0;
    for (const auto& [out, in] : pairs) optical = std::max(optical, optical_theorem_residual(config, a.k, quad, out, in));
    const double reciprocity = reciprocity_defect(config, a.k, pairs);
    const double reality = reality_defect(config, a.k, pairs);
    const double unitarity = unitarity_defect(config, a.k, quad, a.pairs, a.seed);

    auto verdict = [](double value, double threshold) { return value < threshold ? "PASS" : "FAIL"; };
    emit(json{{"k", a.k},
              {"quad_degree", a.quad_degree},
              {"pairs", a.pairs},
              {"seed", a.seed},
              {"tan_half_theta_symmetric", config.symmetric()},
              {"tan_half_theta_real", config.real()},
              {"optical_residual", optical},
              {"optical", verdict(optical, kOpticalThreshold)},
              {"reciprocity_defect", reciprocity},
              {"reciprocity", verdict(reciprocity, kReciprocityThreshold)},
              {"reality_defect", reality},
              {"reality", verdict(reality, kRealityThreshold)},
              {"unitarity_defect", unitarity},
              {"unitarity", verdict(unitarity, kUnitarityThreshold)}});
    return kExitOk;
}

struct GridArgs {
    double side = 0.0;
    int count = 0;
    std::string center = "0,0";
};

struct SynthArgs {
    std::string config;
    double k0 = 0.0;
    GridArgs grid;
    double noise = 0.0;
    double noise_rel = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 1;
};

PlaneSamples synthesize(const Configuration& config, double k0, const GridArgs& grid, double noise,
                        double noise_rel, std::uint64_t seed, unsigned threads) {
    if (grid.count < 2) throw ValidationError("--grid-count must be at least 2");
    if (!(grid.side > 0.0)) throw ValidationError("--grid-side must be positive");
    if (noise > 0.0 && noise_rel > 0.0) throw ValidationError("--noise and --noise-rel are exclusive");
    const auto points = square_grid(grid.side, grid.count, parse_point2(grid.center, "--grid-center"));
    if (noise_rel > 0.0) {
        const auto clean = synthesize_plane_data(config, k0, points, 0.0, seed, threads);
        noise = noise_rel * median_abs(clean);
    }
    return synthesize_plane_data(config, k0, points, noise, seed, threads);
}

int run_synth(const SynthArgs& a) {
    const auto config = io::read_config(a.config);
    if (!(a.k0 > 0.0)) throw ValidationError("--k0 must be positive");
    const auto samples = synthesize(config, a.k0, a.grid, a.noise, a.noise_rel, a.seed, a.threads);
    io::write_samples(a.out, samples);
    emit(json{{"out", a.out}, {"pairs", samples.pairs.size()}, {"noise_sigma", samples.noise_sigma},
              {"seed", samples.seed}});
    return kExitOk;
}

struct LiftArgs {
    std::string samples;
    std::string s, y, t;
    std::optional<double> radius, step, taper;
};

int run_lift(const LiftArgs& a) {
    const auto samples = io::read_samples(a.samples);
    LiftSpec spec = LiftSpec::defaults(samples.k0);
    if (a.radius) spec.radius = *a.radius;
    if (a.step) spec.grid_step = *a.step;
    if (a.taper) spec.taper_width = *a.taper;
    const Vec3 s = parse_vec3(a.s, "--s");
    cplx w;
    if (!a.t.empty()) {
        if (!a.y.empty()) throw ValidationError("--y and --t are exclusive");
        w = lift_pair(samples, spec, s, parse_vec3(a.t, "--t"));
    } else {
        if (a.y.empty()) throw ValidationError("give --y (plane point) or --t (point above the plane)");
        w = lift_to_halfspace(samples, spec, s, parse_point2(a.y, "--y"));
    }
    json out = complex_json(w, "w_re", "w_im");
    out["radius"] = spec.radius;
    out["step"] = spec.grid_step;
    out["taper"] = spec.taper_width;
    emit(out);
    return kExitOk;
}

struct InvertArgs {
    std::string samples;
    std::string box;
    double step = 0.0;
    int max_order = 3;
    int candidates = 3;
    std::string out;
    unsigned threads = 1;
};

int run_invert(const InvertArgs& a) {
    const auto samples = io::read_samples(a.samples);
    ReconstructOptions options;
    options.grid_step = a.step;
    options.max_order = a.max_order;
    options.candidates_per_order = a.candidates;
    options.threads = a.threads;
    const auto result = reconstruct(samples, parse_box(a.box), options);
    if (!a.out.empty()) io::write_result(a.out, result);
    emit(io::result_to_json(result));
    for (const auto& d : result.diagnostics) std::cerr << "pscat invert: " << d << "\n";
    return result.converged ? kExitOk : kExitNotConverged;
}

struct PlotArgs {
    std::string config;
    double k = 0.0;
    std::string what = "amplitude";
    int count = 64;
    std::string from, to;
    std::string incident = "0,0,1";
    std::string samples;
    GridArgs grid;
    unsigned threads = 1;
};

std::vector<Vec3> segment(const std::string& from, const std::string& to, int count) {
    if (from.empty() || to.empty()) throw ValidationError("--from and --to are required for this table");
    const Vec3 p = parse_vec3(from, "--from"), q = parse_vec3(to, "--to");
    std::vector<Vec3> out;
    for (int i = 0; i < count; ++i) {
        const double t = count > 1 ? double(i) / (count - 1) : 0.0;
        out.push_back(p + t * (q - p));
    }
    return out;
}

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_plotdata(const PlotArgs& a) {
    if (a.count < 1) throw ValidationError("--count must be at least 1 (empty grid)");
    const auto config = io::read_config(a.config);
    if (!(a.k > 0.0)) throw ValidationError("--k must be positive");
    auto row = [](std::initializer_list<double> values) {
        std::string line;
        for (double v : values) line += (line.empty() ? "" : ",") + csv_number(v);
        std::cout << line << "\n";
    };

    if (a.what == "amplitude") {
        const ScatteringSolution solution(config, a.k);
        const Direction in(parse_vec3(a.incident, "--incident"));
        std::cout << "index,polar,out_x,out_y,out_z,a_re,a_im,a_abs\n";
        for (int i = 0; i < a.count; ++i) {
            const double polar = a.count > 1 ? kPi * i / (a.count - 1) : 0.0;
            const auto out = Direction::spherical(polar, 0.0);
            const cplx amp = solution.amplitude(out, in);
            row({double(i), polar, out.vec().x(), out.vec().y(), out.vec().z(), amp.real(), amp.imag(), std::abs(amp)});
        }
    } else if (a.what == "wave") {
        const ScatteringSolution solution(config, a.k);
        const Direction in(parse_vec3(a.incident, "--incident"));
        std::cout << "index,x,y,z,psi_re,psi_im,psi_abs\n";
        const auto points = segment(a.from, a.to, a.count);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const cplx psi = solution.wave(in, points[i]);
            row({double(i), points[i].x(), points[i].y(), points[i].z(), psi.real(), psi.imag(), std::abs(psi)});
        }
    } else if (a.what == "indicator") {
        const PlaneSamples samples = a.samples.empty()
                                         ? synthesize(config, a.k, a.grid, 0.0, 0.0, 0, a.threads)
                                         : io::read_samples(a.samples);
        const auto points = segment(a.from, a.to, a.count);
        const auto values = indicator_values(samples, points, a.threads);
        std::cout << "index,x,y,z,indicator\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            row({double(i), points[i].x(), points[i].y(), points[i].z(), values[i]});
        }
    } else {
        throw ValidationError("--what must be amplitude, wave or indicator");
    }
    return kExitOk;
}

struct AlphaArgs {
    std::string config;
    std::string out;
};

int run_alpha_to_theta(const AlphaArgs& a) {
    const auto config = io::read_config(a.config);
    json payload = io::config_to_json(config);
    const auto theta = tan_half_to_theta(config.tan_half_theta());
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            rr.push_back(theta.matrix()(i, j).real());
            ri.push_back(theta.matrix()(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    if (!a.out.empty()) io::write_config(a.out, config);
    payload["theta"] = json{{"re", re}, {"im", im}};
    emit(payload);
    return kExitOk;
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const NearResonance& e) {
        std::cerr << "pscat: near resonance: " << e.what() << " (z = " << e.z() << ", condition "
                  << e.condition() << ")\n";
        return kExitResonance;
    } catch (const ValidationError& e) {
        std::cerr << "pscat: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DomainError& e) {
        std::cerr << "pscat: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const CoverageError& e) {
        std::cerr << "pscat: insufficient coverage: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const RankDeficient& e) {
        std::cerr << "pscat: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "pscat: " << e.what() << "\n";
        return kExitFailure;
    }
}

void add_grid_flags(CLI::App* cmd, GridArgs& grid) {
    cmd->add_option("--grid-side", grid.side, "side length of the square plane grid [length]");
    cmd->add_option("--grid-count", grid.count, "points per grid edge [count]");
    cmd->add_option("--grid-center", grid.center, "grid center on the plane as \"x1,x2\" [length]")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pscat: point-interaction scattering and plane-data inversion"};
    app.require_subcommand(1);
    int code = kExitOk;

    ForwardArgs fwd;
    auto* forward = app.add_subcommand("forward", "evaluate the perturbed Green's function G(z, x, y)");
    forward->add_option("--config", fwd.config, "configuration file (.pscat.json)")->required();
    forward->add_option("--z-re", fwd.z_re, "real part of the spectral parameter z [1/length^2]");
    forward->add_option("--z-im", fwd.z_im, "imaginary part of z [1/length^2]");
    forward->add_option("--k", fwd.k, "real wavenumber, z = k^2 on the outgoing boundary branch [1/length]");
    forward->add_option("--x", fwd.x, "first point \"x1,x2,x3\" [length]")->required();
    forward->add_option("--y", fwd.y, "second point \"y1,y2,y3\" [length]")->required();
    forward->callback([&] { code = guarded([&] { return run_forward(fwd); }); });

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "optical theorem, reciprocity, reality and unitarity report");
    verify->add_option("--config", ver.config, "configuration file (.pscat.json)")->required();
    verify->add_option("--k", ver.k, "wavenumber [1/length]")->required();
    verify->add_option("--quad-degree", ver.quad_degree, "sphere quadrature degree L [dimensionless]")
        ->capture_default_str();
    verify->add_option("--pairs", ver.pairs, "random direction pairs and unitarity trials [count]")
        ->capture_default_str();
    verify->add_option("--seed", ver.seed, "random seed [integer]")->capture_default_str();
    verify->callback([&] { code = guarded([&] { return run_verify(ver); }); });

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "synthesize plane data on a square grid");
    synth->add_option("--config", syn.config, "configuration file with all scatterers below the plane")->required();
    synth->add_option("--k0", syn.k0, "wavenumber [1/length]")->required();
    add_grid_flags(synth, syn.grid);
    synth->add_option("--noise", syn.noise, "noise std per real component [units of G, 1/length]")
        ->capture_default_str();
    synth->add_option("--noise-rel", syn.noise_rel, "noise std as a fraction of median |G| [dimensionless]")
        ->capture_default_str();
    synth->add_option("--seed", syn.seed, "noise seed [integer]")->capture_default_str();
    synth->add_option("--out", syn.out, "output samples file (.pscat.json)")->required();
    synth->add_option("--threads", syn.threads, "worker threads, 0 = all cores [count]")->capture_default_str();
    synth->callback([&] { code = guarded([&] { return run_synth(syn); }); });

    LiftArgs lif;
    auto* lift = app.add_subcommand("lift", "lift plane data to a point above the plane");
    lift->add_option("--samples", lif.samples, "samples file (.pscat.json)")->required();
    lift->add_option("--s", lif.s, "target point \"s1,s2,s3\" with s3 > 0 [length]")->required();
    lift->add_option("--y", lif.y, "source point on the plane \"y1,y2\" [length]");
    lift->add_option("--t", lif.t, "second point above the plane \"t1,t2,t3\" for the two-pass lift [length]");
    lift->add_option("--radius", lif.radius, "truncation radius R, default 60/k0 [length]");
    lift->add_option("--step", lif.step, "quadrature step h, default pi/(8 k0) [length]");
    lift->add_option("--taper", lif.taper, "raised-cosine taper width, default 20/k0 [length]");
    lift->callback([&] { code = guarded([&] { return run_lift(lif); }); });

    InvertArgs inv;
    auto* invert = app.add_subcommand("invert", "reconstruct scatterer positions and tan(theta/2)");
    invert->add_option("--samples", inv.samples, "samples file (.pscat.json)")->required();
    invert->add_option("--box", inv.box, "search box \"x0,x1,y0,y1,z0,z1\" below the plane [length]")->required();
    invert->add_option("--step", inv.step, "indicator lattice step, 0 = wavelength/4 [length]")
        ->capture_default_str();
    invert->add_option("--max-order", inv.max_order, "largest model order tried [count]")->capture_default_str();
    invert->add_option("--candidates", inv.candidates, "indicator peaks tried per order [count]")
        ->capture_default_str();
    invert->add_option("--out", inv.out, "result file (.pscat.json)");
    invert->add_option("--threads", inv.threads, "worker threads, 0 = all cores [count]")->capture_default_str();
    invert->callback([&] { code = guarded([&] { return run_invert(inv); }); });

    PlotArgs plt;
    auto* plot = app.add_subcommand("plotdata", "CSV tables for plotting");
    plot->add_option("--config", plt.config, "configuration file (.pscat.json)")->required();
    plot->add_option("--k", plt.k, "wavenumber (k0 for the indicator) [1/length]")->required();
    plot->add_option("--what", plt.what, "table: amplitude | wave | indicator")->capture_default_str();
    plot->add_option("--count", plt.count, "rows in the table [count]")->capture_default_str();
    plot->add_option("--from", plt.from, "segment start \"a,b,c\" for wave/indicator [length]");
    plot->add_option("--to", plt.to, "segment end \"a,b,c\" for wave/indicator [length]");
    plot->add_option("--incident", plt.incident, "incident direction \"a,b,c\" [unit vector]")
        ->capture_default_str();
    plot->add_option("--samples", plt.samples, "samples file for the indicator (else synthesized on the grid)");
    add_grid_flags(plot, plt.grid);
    plot->add_option("--threads", plt.threads, "worker threads, 0 = all cores [count]")->capture_default_str();
    plot->callback([&] { code = guarded([&] { return run_plotdata(plt); }); });

    AlphaArgs alp;
    auto* alpha = app.add_subcommand("alpha-to-theta", "convert a local (alpha) configuration to tan(theta/2) and theta");
    alpha->add_option("--config", alp.config, "configuration file (.pscat.json)")->required();
    alpha->add_option("--out", alp.out, "write the converted configuration (.pscat.json)");
    alpha->callback([&] { code = guarded([&] { return run_alpha_to_theta(alp); }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }
    return code;
}
