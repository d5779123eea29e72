// m12sim: construct the 12D Matryoshka and PDM-QPSK formats, run seeded
// Monte Carlo link sweeps, and emit CSV/SVG reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "m12/harness.hpp"

namespace fs = std::filesystem;
using namespace m12;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    bool svg = false;
};

Config load_config(const CommonOpts& o) {
    if (o.config_path.empty()) {
        std::istringstream empty("");
        return Config::parse(empty);
    }
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError(0, "cannot open config file '" + o.config_path + "'");
    return Config::parse(in);
}

SweepSpec make_spec(const CommonOpts& o, SweepVariable var, std::vector<double> default_grid) {
    SweepSpec s = spec_from_config(load_config(o), var, default_grid);
    if (o.seed) s.master_seed = *o.seed;
    return s;
}

void emit(const SweepReport& rep, const CommonOpts& o, const std::string& name, bool log_y) {
    fs::create_directories(o.out_dir);
    const fs::path csv = fs::path(o.out_dir) / (name + ".csv");
    std::ofstream os(csv);
    write_csv(rep, os);
    std::cout << "wrote " << csv.string() << "\n";
    if (o.svg) {
        const fs::path svg = fs::path(o.out_dir) / (name + ".svg");
        std::ofstream ss(svg);
        write_svg(rep, ss, log_y);
        std::cout << "wrote " << svg.string() << "\n";
    }
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "config file (key/value sections; see 'defaults')");
    cmd->add_option("--seed", o.seed, "master seed override");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--svg", o.svg, "also emit an SVG plot next to the CSV");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"12D Matryoshka / PDM-QPSK coupled-core link simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string gen_scheme = "matryoshka";
    std::size_t llr_dump = 0;
    double llr_snr_db = 10.0;

    auto* gen = app.add_subcommand("gen", "export a constellation as CSV");
    add_common(gen, opts);
    gen->add_option("--scheme", gen_scheme, "matryoshka | pdm_qpsk");

    auto* analyze = app.add_subcommand("analyze", "minimum distance, power stats, 2D projections");
    add_common(analyze, opts);
    analyze->add_option("--scheme", gen_scheme, "matryoshka | pdm_qpsk");
    analyze->add_option("--llr-dump", llr_dump, "also dump exact LLRs for N noisy symbols");
    analyze->add_option("--llr-snr-db", llr_snr_db, "SNR for the LLR dump");

    auto* ber = app.add_subcommand("ber", "BER vs SNR sweep (AWGN)");
    add_common(ber, opts);
    auto* mi = app.add_subcommand("mi", "MI/GMI vs distance sweep through the link budget");
    add_common(mi, opts);
    auto* power = app.add_subcommand("power", "effective SNR vs launch power sweep");
    add_common(power, opts);
    auto* dsp = app.add_subcommand("dsp", "full transmit/equalize/phase-recovery chain demo");
    add_common(dsp, opts);
    auto* defaults = app.add_subcommand("defaults", "print the default config document");

    CLI11_PARSE(app, argc, argv);

    try {
        if (defaults->parsed()) {
            std::cout << default_config_text();
            return 0;
        }
        if (gen->parsed() || analyze->parsed()) {
            SweepSpec s = make_spec(opts, SweepVariable::SnrDb, {10.0});
            const bool qpsk = gen_scheme == "pdm_qpsk";
            if (!qpsk && gen_scheme != "matryoshka") {
                std::cerr << "unknown scheme '" << gen_scheme << "'\n";
                return 2;
            }
            const auto c = qpsk ? build_pdm_qpsk() : build_matryoshka(s.geometry, s.rule);
            if (gen->parsed()) {
                fs::create_directories(opts.out_dir);
                const fs::path p = fs::path(opts.out_dir) / (gen_scheme + "_constellation.csv");
                std::ofstream os(p);
                export_csv(c, os);
                std::cout << "wrote " << p.string() << "\n";
                return 0;
            }
            const MinDistance md = min_distance(c);
            double emin = 1e300, emax = 0.0;
            for (const auto& p : c.points()) {
                emin = std::min(emin, norm2(p));
                emax = std::max(emax, norm2(p));
            }
            std::cout << "scheme: " << gen_scheme << "\n"
                      << "points: " << c.size() << "\n"
                      << "d_min: " << md.distance << "  (pairs at minimum: " << md.multiplicity
                      << ")\n"
                      << "avg energy: " << c.average_energy() << "  per-point range: [" << emin
                      << ", " << emax << "]\n";
            for (int j = 0; j < 6; ++j) {
                const auto proj = projection_2d(c, j);
                std::cout << "coord " << j << ": " << proj.size() << " projection points:";
                for (const auto& p : proj)
                    std::cout << " (" << p.value.real() << "," << p.value.imag() << ")x" << p.count;
                std::cout << "\n";
            }
            if (llr_dump > 0) {
                fs::create_directories(opts.out_dir);
                const fs::path p = fs::path(opts.out_dir) / "llr_dump.csv";
                std::ofstream os(p);
                os << "label,llr0,llr1,llr2,llr3,llr4,llr5,llr6,llr7,llr8,llr9,llr10,llr11\n";
                os.precision(10);
                const double sigma2 = 1.0 / (12.0 * db_to_linear(llr_snr_db));
                const Demapper dm(c);
                Rng rng = make_rng(s.master_seed);
                std::uniform_int_distribution<std::uint32_t> lab(0, 4095);
                for (std::size_t i = 0; i < llr_dump; ++i) {
                    const Label w = static_cast<Label>(lab(rng));
                    const Symbol12 y = awgn(c.point(w), sigma2, rng);
                    const LlrVector l = dm.llr_exact(y, sigma2);
                    os << w;
                    for (double v : l) os << ',' << v;
                    os << '\n';
                }
                std::cout << "wrote " << p.string() << "\n";
            }
            return 0;
        }
        if (ber->parsed()) {
            const SweepSpec s =
                make_spec(opts, SweepVariable::SnrDb, {5, 5.5, 6, 7, 7.5, 8, 8.5, 9});
            emit(run_ber_sweep(s), opts, "ber_sweep", true);
            return 0;
        }
        if (mi->parsed()) {
            const SweepSpec s = make_spec(opts, SweepVariable::DistanceKm,
                                          {345, 690, 1150, 1725, 2300, 3450, 4600, 5750});
            emit(run_mi_distance_sweep(s), opts, "mi_sweep", false);
            return 0;
        }
        if (power->parsed()) {
            const SweepSpec s =
                make_spec(opts, SweepVariable::LaunchPowerDbm, {-2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8});
            emit(run_power_sweep(s), opts, "power_sweep", false);
            return 0;
        }
        if (dsp->parsed()) {
            const SweepSpec s = make_spec(opts, SweepVariable::SnrDb, {10, 15, 20});
            const SweepReport rep = run_dsp_demo(s);
            emit(rep, opts, "dsp_demo", false);
            if (!rep.converged) {
                std::cerr << "equalizer failed to converge on at least one grid point\n";
                return 3;
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
