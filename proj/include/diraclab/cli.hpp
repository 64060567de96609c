#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diraclab/classifier.hpp"
#include "diraclab/eigensolver.hpp"
#include "diraclab/fields.hpp"
#include "diraclab/manifest.hpp"
#include "diraclab/parallel.hpp"
#include "diraclab/quasimodes.hpp"
#include "diraclab/radial_operator.hpp"
#include "diraclab/zeromodes.hpp"

namespace diraclab::cli {

namespace detail {

struct LoadedSpec {
    RadialFieldSpec spec;
    std::string path;
    std::string digest;
};

inline LoadedSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "E_SPEC_PARSE", "cannot read spec file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        fail("E_SPEC_PARSE", std::string("malformed spec JSON: ") + e.what());
    }
    LoadedSpec loaded{spec_from_json(j), path, ""};
    char buf2[20];
    std::snprintf(buf2, sizeof(buf2), "%016llx",
                  static_cast<unsigned long long>(fnv1a(text)));
    loaded.digest = buf2;
    return loaded;
}

inline std::pair<int, int> parse_sector_range(const std::string& text) {
    // "a..b"
    const auto pos = text.find("..");
    require(pos != std::string::npos, "E_CLI_USAGE", "sector range must look like -3..3");
    try {
        const int lo = std::stoi(text.substr(0, pos));
        const int hi = std::stoi(text.substr(pos + 2));
        require(lo <= hi, "E_CLI_USAGE", "sector range must be ordered");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        fail("E_CLI_USAGE", "cannot parse sector range " + text);
    }
}

inline std::pair<double, double> parse_window(const std::string& text) {
    const auto pos = text.find(',');
    require(pos != std::string::npos, "E_CLI_USAGE", "window must look like lo,hi");
    try {
        const double lo = std::stod(text.substr(0, pos));
        const double hi = std::stod(text.substr(pos + 1));
        require(lo < hi, "E_CLI_USAGE", "window requires lo < hi");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        fail("E_CLI_USAGE", "cannot parse window " + text);
    }
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    require(!out.empty(), "E_CLI_USAGE", "empty numeric list");
    return out;
}

inline std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

} // namespace detail

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"numerical laboratory for planar magnetic Dirac spectra"};
    app.require_subcommand(1);

    std::string spec_path, out_dir = "out";
    std::string sectors_text, window_text = "-3,3";
    double radius = 20.0;
    int cells = 4000;
    double tol = 1e-8;
    int threads = default_thread_count();
    app.add_option("--threads", threads, "worker cap for sector sweeps")->capture_default_str();

    auto add_common = [&](CLI::App* sub, bool needs_spec = true) {
        if (needs_spec) sub->add_option("--spec", spec_path, "field spec JSON")->required();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    };

    // ---- classify ----
    auto* classify = app.add_subcommand("classify", "spectral regime from the power-law table");
    bool probe = false;
    std::string radii_text = "8,12,16,20";
    double density = 100.0, window_e = 1.0;
    add_common(classify);
    classify->add_flag("--probe", probe, "run the finite-volume accumulation probe");
    classify->add_option("--radii", radii_text, "radii for the probe")->capture_default_str();
    classify->add_option("--density", density, "cells per unit radius")->capture_default_str();
    classify->add_option("--window-e", window_e, "probe window half-width")->capture_default_str();
    classify->add_option("--sectors", sectors_text, "explicit sector range a..b (default: auto scan)");

    // ---- spectrum ----
    auto* spectrum = app.add_subcommand("spectrum", "sector eigenvalues in a window");
    bool with_vectors = false;
    add_common(spectrum);
    spectrum->add_option("--radius", radius, "truncation radius")->capture_default_str();
    spectrum->add_option("--cells", cells, "cells across [0, R]")->capture_default_str();
    spectrum->add_option("--sectors", sectors_text, "sector range a..b")->required();
    spectrum->add_option("--window", window_text, "eigenvalue window lo,hi")->required();
    spectrum->add_option("--tol", tol, "bisection tolerance")->capture_default_str();
    spectrum->add_flag("--residuals", with_vectors, "extract eigenvectors and report residuals");

    // ---- zeromode ----
    auto* zeromode = app.add_subcommand("zeromode", "kernel modes and their exact identities");
    int max_deg = 10;
    double fd_step = 1e-3;
    add_common(zeromode);
    zeromode->add_option("--max-degree", max_deg, "largest monomial degree")->capture_default_str();
    zeromode->add_option("--radius", radius, "working radius")->capture_default_str();
    zeromode->add_option("--cells", cells, "grid cells (tail bookkeeping)")->capture_default_str();
    zeromode->add_option("--fd-step", fd_step, "finite-difference step")->capture_default_str();

    // ---- coercivity ----
    auto* coercivity = app.add_subcommand("coercivity", "min |h_j psi| / |v psi| over sectors");
    std::string co_radii = "10,15,20";
    double co_density = 100.0;
    add_common(coercivity);
    coercivity->add_option("--radii", co_radii, "truncation radii")->capture_default_str();
    coercivity->add_option("--density", co_density, "cells per unit radius")->capture_default_str();
    coercivity->add_option("--sectors", sectors_text, "sector range a..b")->required();

    // ---- quasimode ----
    auto* quasimode = app.add_subcommand("quasimode", "localized trial states and residual decay");
    std::string variant_text = "thm3a";
    int q_k = 1, q_count = 8;
    double q_eps = -1.0, q_r0 = 10.0;
    bool no_fd = false;
    add_common(quasimode);
    quasimode->add_option("--variant", variant_text,
                          "fixed-level (alias thm3a) or growing-level (alias thm3)")
        ->capture_default_str();
    quasimode->add_option("--k", q_k, "fixed ladder index")->capture_default_str();
    quasimode->add_option("--eps", q_eps, "cutoff exponent (default 0.5 / 0.2 per variant)");
    quasimode->add_option("--count", q_count, "number of centers")->capture_default_str();
    quasimode->add_option("--r0", q_r0, "first center radius for degenerate families")
        ->capture_default_str();
    quasimode->add_flag("--no-fd", no_fd, "skip the finite-difference cross-check");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "classify a list of (t,s[,V0,B0]) points");
    std::string points_text;
    bool sweep_probe = false;
    sweep->add_option("--points", points_text, "semicolon list: t,s[,V0,B0];...")->required();
    sweep->add_option("--out", out_dir, "output directory")->capture_default_str();
    sweep->add_flag("--probe", sweep_probe, "run the accumulation probe per point");
    sweep->add_option("--radii", radii_text, "radii for the probe")->capture_default_str();
    sweep->add_option("--density", density, "cells per unit radius")->capture_default_str();
    sweep->add_option("--window-e", window_e, "probe window half-width")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "E_CLI_USAGE: " << e.what() << "\n";
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*classify) {
            const auto loaded = detail::load_spec(spec_path);
            require(loaded.spec.kind == FieldKind::PowerLaw, "E_CLASSIFY_KIND",
                    "the regime table applies to power-law specs only");
            const RegimeLabel label =
                predict_regime(loaded.spec.V0, loaded.spec.B0, loaded.spec.t, loaded.spec.s);
            std::cout << "regime=" << regime_name(label.regime) << " clause=" << label.clause;
            if (label.regime == Regime::EssentialAtZero) std::cout << " k=" << label.k;
            std::cout << "\n";
            if (probe) {
                SectorPolicy policy = SectorPolicy::auto_scan();
                if (!sectors_text.empty()) {
                    const auto [lo, hi] = detail::parse_sector_range(sectors_text);
                    policy = SectorPolicy::range(lo, hi);
                }
                const AccumulationReport rep = probe_accumulation(
                    loaded.spec, window_e, detail::parse_list(radii_text), policy, density, threads);
                RunManifest man;
                man.subcommand = "classify";
                man.spec_path = loaded.path;
                man.input_digest = loaded.digest;
                man.add("window_e", window_e);
                man.add("density", density);
                man.add("sectors", sectors_text.empty() ? std::string("auto") : sectors_text);
                man.add("note", "finite-volume count growth; dense-pure-point itself is not "
                                "certifiable on a truncated domain");
                CsvWriter csv(detail::out_path(out_dir, "classify_probe.csv"), man, {"R", "count"});
                for (std::size_t i = 0; i < rep.radii.size(); ++i)
                    csv.row({format9(rep.radii[i]), std::to_string(rep.counts[i])});
                std::cout << "probe verdict=" << verdict_name(rep.verdict)
                          << " slope=" << format9(rep.slope) << "\n";
            }
        } else if (*spectrum) {
            const auto loaded = detail::load_spec(spec_path);
            const auto [lo, hi] = detail::parse_sector_range(sectors_text);
            const auto [wlo, whi] = detail::parse_window(window_text);
            const RadialGrid grid = build_radial_grid(radius, cells);
            const RadialFieldView view = make_view(loaded.spec);
            RunManifest man;
            man.subcommand = "spectrum";
            man.spec_path = loaded.path;
            man.input_digest = loaded.digest;
            man.add("radius", radius);
            man.add("cells", cells);
            man.add("sectors", sectors_text);
            man.add("window", window_text);
            man.add("tol", tol);
            man.add("note", "hard-wall truncation at r=R; statements about the untruncated "
                            "operator require sweeps in R");
            const std::vector<std::string> cols =
                with_vectors ? std::vector<std::string>{"j", "lambda", "residual"}
                             : std::vector<std::string>{"j", "lambda"};
            CsvWriter csv(detail::out_path(out_dir, "spectrum.csv"), man, cols);
            const int nsec = hi - lo + 1;
            std::vector<SpectrumReport> reports(nsec);
            parallel_for(nsec, threads, [&](std::size_t i) {
                const int j = lo + static_cast<int>(i);
                const TridiagonalMatrix T = assemble_h_j_tridiag(view, grid, SectorIndex{j});
                reports[i] = eigs_in_window(T, wlo, whi, tol, with_vectors,
                                            SpectrumMeta{radius, cells, j, ""});
            });
            long total = 0;
            for (int i = 0; i < nsec; ++i) {
                for (std::size_t k = 0; k < reports[i].eigenvalues.size(); ++k) {
                    std::vector<std::string> row{std::to_string(lo + i),
                                                 format9(reports[i].eigenvalues[k])};
                    if (with_vectors) row.push_back(format9(reports[i].residuals[k]));
                    csv.row(row);
                }
                total += reports[i].count;
            }
            std::cout << "eigenvalues=" << total << " window=[" << format9(wlo) << ","
                      << format9(whi) << "] sectors=" << sectors_text << "\n";
        } else if (*zeromode) {
            const auto loaded = detail::load_spec(spec_path);
            const RadialFieldView view = make_view(loaded.spec);
            const RadialGrid grid = build_radial_grid(radius, cells);
            RunManifest man;
            man.subcommand = "zeromode";
            man.spec_path = loaded.path;
            man.input_digest = loaded.digest;
            man.add("max_degree", max_deg);
            man.add("radius", radius);
            man.add("fd_step", fd_step);
            CsvWriter csv(detail::out_path(out_dir, "zeromode.csv"), man,
                          {"m", "norm", "tail", "d_residual", "dstar_identity_relerr",
                           "thm2_ratio", "thm2_bound"});
            bool pair_ok = true;
            try {
                sample_pair_sups(view, grid.R);
            } catch (const Error&) {
                pair_ok = false;  // family violates the bounded-pair hypotheses
            }
            for (int m = 0; m <= max_deg; ++m) {
                const ZeroMode mode = build_zero_mode(view, m, grid);
                const DstarImage img = dstar_on_zero_mode(mode);
                const double dres = residual_d(mode, fd_step);
                std::vector<std::string> row{
                    std::to_string(m), format9(std::exp(0.5 * mode.log_norm2)),
                    format9(mode.mass_tail), format9(dres), format9(img.identity_relerr)};
                if (pair_ok) {
                    const ZeroModePair pair = build_zero_mode_pair(view, m, grid);
                    row.push_back(format9(pair.ratio));
                    row.push_back(format9(pair.bound));
                } else {
                    row.push_back("nan");
                    row.push_back("nan");
                }
                csv.row(row);
            }
            std::cout << "zeromode degrees 0.." << max_deg
                      << (pair_ok ? "" : " (pair columns nan: family violates the bound hypotheses)")
                      << "\n";
        } else if (*coercivity) {
            const auto loaded = detail::load_spec(spec_path);
            const RadialFieldView view = make_view(loaded.spec);
            const auto [lo, hi] = detail::parse_sector_range(sectors_text);
            RunManifest man;
            man.subcommand = "coercivity";
            man.spec_path = loaded.path;
            man.input_digest = loaded.digest;
            man.add("radii", co_radii);
            man.add("density", co_density);
            man.add("sectors", sectors_text);
            CsvWriter csv(detail::out_path(out_dir, "coercivity.csv"), man, {"R", "j", "ratio"});
            for (double R : detail::parse_list(co_radii)) {
                const RadialGrid grid =
                    build_radial_grid(R, std::max(16, static_cast<int>(std::lround(co_density * R))));
                const int nsec = hi - lo + 1;
                std::vector<double> ratios(nsec);
                parallel_for(nsec, threads, [&](std::size_t i) {
                    ratios[i] = coercivity_ratio(view, grid, SectorIndex{lo + static_cast<int>(i)});
                });
                double best = std::numeric_limits<double>::infinity();
                for (int i = 0; i < nsec; ++i) {
                    csv.row({format9(R), std::to_string(lo + i), format9(ratios[i])});
                    best = std::min(best, ratios[i]);
                }
                std::cout << "R=" << format9(R) << " min_ratio=" << format9(best) << "\n";
            }
        } else if (*quasimode) {
            const auto loaded = detail::load_spec(spec_path);
            const Field2DSpec field = lift_to_2d(loaded.spec);
            QuasimodeParams params;
            if (variant_text == "thm3a" || variant_text == "fixed-level") {
                params.variant = WeylVariant::FixedLevel;
                params.eps = q_eps > 0.0 ? q_eps : 0.5;
            } else if (variant_text == "thm3" || variant_text == "growing-level") {
                params.variant = WeylVariant::GrowingLevel;
                params.eps = q_eps > 0.0 ? q_eps : 0.2;
            } else {
                fail("E_CLI_USAGE", "unknown variant " + variant_text);
            }
            params.k = q_k;
            params.count = q_count;
            params.r0 = q_r0;
            const CenterSet centers = choose_centers(field, params);
            std::vector<double> cuts(centers.rho.size());
            for (std::size_t i = 0; i < centers.rho.size(); ++i) {
                const double Bn = field.B({centers.rho[i], 0.0});
                cuts[i] = cutoff_radius(params.variant, params.eps, Bn, centers.p[i]);
            }
            const std::vector<std::size_t> keep = thin_disjoint(centers.rho, cuts);
            RunManifest man;
            man.subcommand = "quasimode";
            man.spec_path = loaded.path;
            man.input_digest = loaded.digest;
            man.add("variant", variant_text);
            man.add("k", params.k);
            man.add("eps", params.eps);
            man.add("count", params.count);
            man.add("cutoff_profile", kCutoffProfile);
            if (centers.degenerate) man.add("centers", "degenerate family: geometric ladder");
            if (centers.truncated) man.add("centers_truncated", "ran out of crossings");
            CsvWriter csv(detail::out_path(out_dir, "quasimode.csv"), man,
                          {"n", "xn", "Bn", "Vn", "pn", "rn", "T1", "T2", "T3", "T4", "ratio_sum",
                           "ratio_fd", "norm_lb_margin"});
            std::vector<Quasimode> modes(keep.size());
            parallel_for(keep.size(), threads, [&](std::size_t i) {
                const std::size_t idx = keep[i];
                modes[i] = residual_terms(field, params, centers.rho[idx], centers.p[idx],
                                          static_cast<int>(i + 1), !no_fd);
            });
            for (const Quasimode& qm : modes) {
                csv.row({std::to_string(qm.n), format9(std::hypot(qm.center[0], qm.center[1])),
                         format9(qm.Bn), format9(qm.Vn), std::to_string(qm.p), format9(qm.r_cut),
                         format9(qm.T1), format9(qm.T2), format9(qm.T3), format9(qm.T4),
                         format9(qm.ratio_sum), format9(qm.ratio_fd),
                         format9(qm.norm_lb_margin)});
                std::cout << "n=" << qm.n << " |xn|=" << format9(std::hypot(qm.center[0], qm.center[1]))
                          << " ratio_sum=" << format9(qm.ratio_sum)
                          << " ratio_fd=" << format9(qm.ratio_fd) << "\n";
            }
        } else if (*sweep) {
            RunManifest man;
            man.subcommand = "sweep";
            man.add("points", points_text);
            std::vector<std::string> cols{"t", "s", "V0", "B0", "regime", "clause"};
            if (sweep_probe) {
                cols.push_back("verdict");
                cols.push_back("slope");
            }
            CsvWriter csv(detail::out_path(out_dir, "sweep.csv"), man, cols);
            std::stringstream ss(points_text);
            std::string point;
            while (std::getline(ss, point, ';')) {
                if (point.empty()) continue;
                const std::vector<double> vals = detail::parse_list(point);
                require(vals.size() == 2 || vals.size() == 4, "E_CLI_USAGE",
                        "each sweep point is t,s or t,s,V0,B0");
                const double t = vals[0], s = vals[1];
                const double V0 = vals.size() == 4 ? vals[2] : 1.0;
                const double B0 = vals.size() == 4 ? vals[3] : 1.0;
                const RegimeLabel label = predict_regime(V0, B0, t, s);
                std::vector<std::string> row{format9(t), format9(s), format9(V0), format9(B0),
                                             regime_name(label.regime), label.clause};
                std::cout << "t=" << format9(t) << " s=" << format9(s)
                          << " regime=" << regime_name(label.regime) << " clause=" << label.clause
                          << "\n";
                if (sweep_probe) {
                    const auto spec = RadialFieldSpec::power_law(V0, B0, t, s);
                    const AccumulationReport rep =
                        probe_accumulation(spec, window_e, detail::parse_list(radii_text),
                                           SectorPolicy::auto_scan(), density, threads);
                    row.push_back(verdict_name(rep.verdict));
                    row.push_back(format9(rep.slope));
                }
                csv.row(row);
            }
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "E_INTERNAL: " << e.what() << "\n";
        return 1;
    }
    const auto t1 = std::chrono::steady_clock::now();
    std::cout << "wall_time_s="
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0
              << "\n";
    return 0;
}

} // namespace diraclab::cli
