#ifndef M12_HARNESS_HPP
#define M12_HARNESS_HPP

#include <cmath>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "m12/channel.hpp"
#include "m12/config.hpp"
#include "m12/constellation.hpp"
#include "m12/dsp.hpp"
#include "m12/metrics.hpp"
#include "m12/modem.hpp"
#include "m12/report.hpp"
#include "m12/rng.hpp"

namespace m12 {

enum class SweepVariable { SnrDb, DistanceKm, LaunchPowerDbm };

struct SweepSpec {
    std::vector<Scheme> schemes{Scheme::Matryoshka12D, Scheme::PdmQpsk12D};
    SweepVariable variable = SweepVariable::SnrDb;
    std::vector<double> grid;
    std::vector<double> launch_powers_dbm{0.0, 2.0, 4.0};
    LinkModel link;
    RingGeometry geometry;
    CouplingRule rule = CouplingRule::GlobalRingGlobalParity;
    std::size_t n_symbols = 100000;
    std::uint64_t master_seed = 1;
    // DSP chain parameters
    int n_taps = 1;
    double step_size = 0.005;
    std::size_t pilot_symbols = 1000;
    int phase_window = 64;

    bool valid() const { return !grid.empty() && n_symbols >= 1000; }
};

inline const char* scheme_name(Scheme s) {
    return s == Scheme::Matryoshka12D ? "matryoshka" : "pdm_qpsk";
}

inline std::string default_config_text() {
    return R"([constellation]
rule = global              # global | per_block
r_inner = 1.0
r_outer = 1.0
offset_angle = 0.15
base_angle = 0.7853981633974483

[link]
span_loss_db = 22.8
fiber_loss_db_per_km = 0.18
span_length_equiv_km = 115.0
n_spans = 10
amp_noise_figure_db = 5.0
launch_power_dbm = 0.0
mdl_db = 0.0
nli_coeff = 0.0            # (mW)^-2 per span; negative = calibrate for 4 dBm optimum
linewidth_symbol_product = 0.0

[sweep]
schemes = both             # matryoshka | pdm_qpsk | both
grid = 5,5.5,6,7,7.5,8,8.5,9   # snr_db (ber/dsp), km (mi), dBm (power)
launch_powers_dbm = 0,2,4
n_symbols = 100000
seed = 1

[dsp]
n_taps = 1
step_size = 0.005
pilot_symbols = 1000
phase_window = 64
)";
}

// Builds the spec from a parsed config; grid defaults depend on the sweep.
inline SweepSpec spec_from_config(const Config& cfg, SweepVariable var,
                                  const std::vector<double>& default_grid) {
    SweepSpec s;
    s.variable = var;
    const std::string schemes = cfg.get_string("sweep.schemes", "both");
    if (schemes == "matryoshka")
        s.schemes = {Scheme::Matryoshka12D};
    else if (schemes == "pdm_qpsk")
        s.schemes = {Scheme::PdmQpsk12D};
    else if (schemes == "both")
        s.schemes = {Scheme::Matryoshka12D, Scheme::PdmQpsk12D};
    else
        throw ConfigError(0, "sweep.schemes must be matryoshka | pdm_qpsk | both");

    const std::string rule = cfg.get_string("constellation.rule", "global");
    if (rule == "global")
        s.rule = CouplingRule::GlobalRingGlobalParity;
    else if (rule == "per_block")
        s.rule = CouplingRule::PerBlockParity;
    else
        throw ConfigError(0, "constellation.rule must be global | per_block");

    s.geometry.r_inner = cfg.get_double("constellation.r_inner", 1.0);
    s.geometry.r_outer = cfg.get_double("constellation.r_outer", 1.0);
    s.geometry.offset_angle = cfg.get_double("constellation.offset_angle", 0.15);
    s.geometry.base_angle = cfg.get_double("constellation.base_angle", std::numbers::pi / 4.0);

    s.link.span_loss_db = cfg.get_double("link.span_loss_db", 22.8);
    s.link.fiber_loss_db_per_km = cfg.get_double("link.fiber_loss_db_per_km", 0.18);
    s.link.span_length_equiv_km = cfg.get_double("link.span_length_equiv_km", 115.0);
    s.link.n_spans = static_cast<int>(cfg.get_int("link.n_spans", 10));
    s.link.amp_noise_figure_db = cfg.get_double("link.amp_noise_figure_db", 5.0);
    s.link.launch_power_dbm_per_channel = cfg.get_double("link.launch_power_dbm", 0.0);
    s.link.mdl_db = cfg.get_double("link.mdl_db", 0.0);
    s.link.nli_coeff = cfg.get_double("link.nli_coeff", 0.0);
    if (s.link.nli_coeff < 0.0) s.link.nli_coeff = calibrate_nli(s.link, 4.0);
    s.link.linewidth_symbol_product = cfg.get_double("link.linewidth_symbol_product", 0.0);

    s.grid = cfg.get_grid("sweep.grid", default_grid);
    s.launch_powers_dbm = cfg.get_grid("sweep.launch_powers_dbm", {0.0, 2.0, 4.0});
    s.n_symbols = static_cast<std::size_t>(cfg.get_int("sweep.n_symbols", 100000));
    s.master_seed = static_cast<std::uint64_t>(cfg.get_int("sweep.seed", 1));

    s.n_taps = static_cast<int>(cfg.get_int("dsp.n_taps", 1));
    s.step_size = cfg.get_double("dsp.step_size", 0.005);
    s.pilot_symbols = static_cast<std::size_t>(cfg.get_int("dsp.pilot_symbols", 1000));
    s.phase_window = static_cast<int>(cfg.get_int("dsp.phase_window", 64));

    if (!s.valid()) throw ConfigError(0, "sweep needs a non-empty grid and n_symbols >= 1000");
    if (!s.geometry.valid()) throw ConfigError(0, "invalid constellation geometry");
    if (!s.link.valid()) throw ConfigError(0, "invalid link parameters");
    return s;
}

namespace detail {

inline std::vector<std::string> spec_header(const SweepSpec& s, const std::string& sweep) {
    std::vector<std::string> h;
    std::ostringstream os;
    os.precision(12);
    h.push_back("m12sim sweep=" + sweep);
    os << "seed=" << s.master_seed << " n_symbols=" << s.n_symbols;
    h.push_back(os.str());
    os.str("");
    os << "geometry r_inner=" << s.geometry.r_inner << " r_outer=" << s.geometry.r_outer
       << " offset_angle=" << s.geometry.offset_angle << " base_angle=" << s.geometry.base_angle
       << " rule=" << (s.rule == CouplingRule::GlobalRingGlobalParity ? "global" : "per_block");
    h.push_back(os.str());
    os.str("");
    os << "link span_loss_db=" << s.link.span_loss_db
       << " fiber_loss_db_per_km=" << s.link.fiber_loss_db_per_km
       << " span_length_equiv_km=" << s.link.span_length_equiv_km
       << " n_spans=" << s.link.n_spans << " nf_db=" << s.link.amp_noise_figure_db
       << " launch_dbm=" << s.link.launch_power_dbm_per_channel << " mdl_db=" << s.link.mdl_db
       << " nli_coeff=" << s.link.nli_coeff
       << " linewidth_T=" << s.link.linewidth_symbol_product;
    h.push_back(os.str());
    h.push_back("snr convention: E|x|^2 / E|n|^2 over 12 real dims; sigma2 = 1/(12 snr)");
    return h;
}

// Gray QPSK decision, one complex coordinate, matching build_pdm_qpsk.
inline Label fast_qpsk_demap(const Symbol12& y) {
    Label w = 0;
    for (int j = 0; j < 6; ++j) {
        const bool re = y(j).real() > 0.0, im = y(j).imag() > 0.0;
        int idx;
        if (re && im) idx = 0;
        else if (!re && im) idx = 1;
        else if (!re) idx = 2;
        else idx = 3;
        const int g = idx ^ (idx >> 1);
        w |= static_cast<Label>(((g >> 1) << (2 * j)) | ((g & 1) << (2 * j + 1)));
    }
    return w;
}

inline LabeledConstellation build_scheme(Scheme s, const SweepSpec& spec) {
    return s == Scheme::Matryoshka12D ? build_matryoshka(spec.geometry, spec.rule)
                                      : build_pdm_qpsk();
}

} // namespace detail

// BER vs SNR over the AWGN channel: uniform bits, map, noise, ML hard
// decision. One row per (scheme, grid point).
inline SweepReport run_ber_sweep(const SweepSpec& spec) {
    SweepReport rep;
    rep.header = detail::spec_header(spec, "ber");
    rep.rows.resize(spec.schemes.size() * spec.grid.size());

    std::vector<std::future<void>> jobs;
    for (std::size_t si = 0; si < spec.schemes.size(); ++si) {
        for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
            jobs.push_back(std::async(std::launch::async, [&spec, &rep, si, gi] {
                const Scheme sch = spec.schemes[si];
                const auto c = detail::build_scheme(sch, spec);
                const Demapper dm(c);
                const double snr_db = spec.grid[gi];
                const double sigma2 = 1.0 / (12.0 * db_to_linear(snr_db));
                const std::uint64_t seed = derive_seed(spec.master_seed, gi, si);
                Rng rng = make_rng(seed);
                std::uniform_int_distribution<std::uint32_t> lab(0, 4095);

                std::vector<Label> tx(spec.n_symbols), rx(spec.n_symbols);
                for (std::size_t i = 0; i < spec.n_symbols; ++i) {
                    const Label w = static_cast<Label>(lab(rng));
                    const Symbol12 y = awgn(c.point(w), sigma2, rng);
                    tx[i] = w;
                    rx[i] = (sch == Scheme::PdmQpsk12D) ? detail::fast_qpsk_demap(y)
                                                        : dm.hard(y).label;
                }
                const MetricEstimate est = ber_labels(tx, rx);
                rep.rows[si * spec.grid.size() + gi] =
                    {scheme_name(sch), "snr_db", snr_db, std::numeric_limits<double>::quiet_NaN(),
                     "ber", est.value, est.ci_halfwidth_95, est.n_samples, seed};
            }));
        }
    }
    for (auto& j : jobs) j.get();
    return rep;
}

// MI and GMI vs distance through the linear link budget, one curve per
// launch power.
inline SweepReport run_mi_distance_sweep(const SweepSpec& spec) {
    SweepReport rep;
    rep.header = detail::spec_header(spec, "mi");
    const std::size_t n_jobs = spec.schemes.size() * spec.grid.size() * spec.launch_powers_dbm.size();
    rep.rows.resize(2 * n_jobs);

    std::vector<std::future<void>> jobs;
    std::size_t job = 0;
    for (std::size_t si = 0; si < spec.schemes.size(); ++si)
        for (std::size_t pi = 0; pi < spec.launch_powers_dbm.size(); ++pi)
            for (std::size_t gi = 0; gi < spec.grid.size(); ++gi, ++job) {
                jobs.push_back(std::async(std::launch::async, [&spec, &rep, si, pi, gi, job] {
                    const Scheme sch = spec.schemes[si];
                    const auto c = detail::build_scheme(sch, spec);
                    const Demapper dm(c);
                    LinkModel link = spec.link;
                    link.launch_power_dbm_per_channel = spec.launch_powers_dbm[pi];
                    link.n_spans = std::max(
                        1, static_cast<int>(std::llround(spec.grid[gi] / link.span_length_equiv_km)));
                    const SnrPoint sp = snr_at_distance(link);
                    // paired seeds across schemes: same grid point, same stream
                    const std::uint64_t seed = derive_seed(spec.master_seed, gi * 64 + pi, 0x31);
                    Rng rng_mi = make_rng(derive_seed(seed, 1));
                    Rng rng_gmi = make_rng(derive_seed(seed, 2));
                    const MetricEstimate mi = mi_mc(dm, sp.sigma2, spec.n_symbols, rng_mi);
                    const MetricEstimate gmi =
                        gmi_mc(dm, sp.sigma2, spec.n_symbols, DemapperKind::Exact, rng_gmi);
                    rep.rows[2 * job] = {scheme_name(sch), "distance_km", sp.distance_km,
                                         spec.launch_powers_dbm[pi], "mi", mi.value,
                                         mi.ci_halfwidth_95, mi.n_samples, seed};
                    rep.rows[2 * job + 1] = {scheme_name(sch), "distance_km", sp.distance_km,
                                             spec.launch_powers_dbm[pi], "gmi", gmi.value,
                                             gmi.ci_halfwidth_95, gmi.n_samples, seed};
                }));
            }
    for (auto& j : jobs) j.get();
    return rep;
}

// Effective SNR vs launch power at the configured distance.
inline SweepReport run_power_sweep(const SweepSpec& spec) {
    SweepReport rep;
    rep.header = detail::spec_header(spec, "power");
    rep.rows.resize(spec.schemes.size() * spec.grid.size());

    std::vector<std::future<void>> jobs;
    for (std::size_t si = 0; si < spec.schemes.size(); ++si)
        for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
            jobs.push_back(std::async(std::launch::async, [&spec, &rep, si, gi] {
                const Scheme sch = spec.schemes[si];
                const auto c = detail::build_scheme(sch, spec);
                LinkModel link = spec.link;
                link.launch_power_dbm_per_channel = spec.grid[gi];
                const SnrPoint sp = snr_at_distance(link);
                const std::uint64_t seed = derive_seed(spec.master_seed, gi, 0x70);
                Rng rng = make_rng(seed);
                std::uniform_int_distribution<std::uint32_t> lab(0, 4095);
                std::vector<Symbol12> tx(spec.n_symbols), rx(spec.n_symbols);
                for (std::size_t i = 0; i < spec.n_symbols; ++i) {
                    tx[i] = c.point(static_cast<Label>(lab(rng)));
                    rx[i] = awgn(tx[i], sp.sigma2, rng);
                }
                const EffectiveSnr es = effective_snr(rx, tx);
                const double v_db = linear_to_db(es.est.value);
                const double ci_db =
                    10.0 / std::numbers::ln10 * es.est.ci_halfwidth_95 / es.est.value;
                rep.rows[si * spec.grid.size() + gi] =
                    {scheme_name(sch), "launch_power_dbm", spec.grid[gi],
                     std::numeric_limits<double>::quiet_NaN(), "snr_eff_db", v_db, ci_db,
                     es.est.n_samples, seed};
            }));
        }
    for (auto& j : jobs) j.get();
    return rep;
}

// Full receive chain demo: transmit through the coupled link, LMS-equalize,
// recover phase, report pre/post-DSP effective SNR and post-DSP MI.
// Grid points are target SNRs in dB; launch power is solved per point so the
// link budget lands on the target.
inline SweepReport run_dsp_demo(const SweepSpec& spec) {
    SweepReport rep;
    rep.header = detail::spec_header(spec, "dsp");
    rep.header.push_back("post-DSP mi is a mismatched lower bound (matched-AWGN metric)");
    rep.rows.resize(3 * spec.schemes.size() * spec.grid.size());

    std::vector<std::future<bool>> jobs;
    for (std::size_t si = 0; si < spec.schemes.size(); ++si)
        for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
            jobs.push_back(std::async(std::launch::async, [&spec, &rep, si, gi]() -> bool {
                const Scheme sch = spec.schemes[si];
                const auto c = detail::build_scheme(sch, spec);
                const Demapper dm(c);
                LinkModel link = spec.link;
                const double snr_target = db_to_linear(spec.grid[gi]);
                link.nli_coeff = 0.0;
                link.launch_power_dbm_per_channel = linear_to_db(
                    snr_target * link.n_spans * ase_power_per_span_mw(link));
                const std::uint64_t seed = derive_seed(spec.master_seed, gi, 0xD0 + si);
                Rng rng = make_rng(seed);
                std::uniform_int_distribution<std::uint32_t> lab(0, 4095);

                std::vector<Label> txw(spec.n_symbols);
                std::vector<Symbol12> tx(spec.n_symbols);
                for (std::size_t i = 0; i < spec.n_symbols; ++i) {
                    txw[i] = static_cast<Label>(lab(rng));
                    tx[i] = c.point(txw[i]);
                }
                const TransmitResult tr = transmit(tx, link, derive_seed(seed, 0xCC));

                std::vector<Symbol12> ideal(spec.n_symbols);
                for (std::size_t i = 0; i < spec.n_symbols; ++i) ideal[i] = tr.channel * tx[i];
                const EffectiveSnr pre = effective_snr(tr.rx, ideal);

                EqualizerState st = EqualizerState::identity(spec.n_taps, spec.step_size,
                                                             EqMode::DecisionDirected);
                const std::size_t K = std::min(spec.pilot_symbols, spec.n_symbols / 2);
                auto eq = equalize(tr.rx, std::span(tx).subspan(0, K), c, std::move(st));
                auto ph = phase_recover_dd(eq.out, c, spec.phase_window);

                const std::span<const Symbol12> tx_tail = std::span(tx).subspan(K);
                const std::span<const Label> txw_tail = std::span(txw).subspan(K);
                const EffectiveSnr post = effective_snr(ph.out, tx_tail);
                const double sigma2_eff = 1.0 / (12.0 * post.est.value);
                const MetricEstimate mi = mi_mc_samples(dm, txw_tail, ph.out, sigma2_eff);

                const std::size_t base = 3 * (si * spec.grid.size() + gi);
                const double nan = std::numeric_limits<double>::quiet_NaN();
                auto db = [](const EffectiveSnr& e) { return linear_to_db(e.est.value); };
                auto dbci = [](const EffectiveSnr& e) {
                    return 10.0 / std::numbers::ln10 * e.est.ci_halfwidth_95 / e.est.value;
                };
                rep.rows[base] = {scheme_name(sch), "snr_db", spec.grid[gi], nan,
                                  "snr_eff_pre_db", db(pre), dbci(pre), pre.est.n_samples, seed};
                rep.rows[base + 1] = {scheme_name(sch), "snr_db", spec.grid[gi], nan,
                                      "snr_eff_post_db", db(post), dbci(post),
                                      post.est.n_samples, seed};
                rep.rows[base + 2] = {scheme_name(sch), "snr_db", spec.grid[gi], nan, "mi_post",
                                      mi.value, mi.ci_halfwidth_95, mi.n_samples, seed};
                return eq.converged;
            }));
        }
    for (auto& j : jobs) rep.converged = j.get() && rep.converged;
    return rep;
}

} // namespace m12

#endif
