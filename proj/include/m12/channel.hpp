#ifndef M12_CHANNEL_HPP
#define M12_CHANNEL_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "m12/rng.hpp"
#include "m12/symbol.hpp"

namespace m12 {

// Per-span link budget of the coupled-core link. Powers in mW/dBm, losses in
// dB. nli_coeff is the Gaussian nonlinear-interference coefficient in
// (mW)^-2 per span (0 = linear link).
struct LinkModel {
    double span_loss_db = 22.8;
    double fiber_loss_db_per_km = 0.18;
    double span_length_equiv_km = 115.0;
    int n_spans = 1;
    double amp_noise_figure_db = 5.0;
    double launch_power_dbm_per_channel = 0.0;
    double mdl_db = 0.0;
    double nli_coeff = 0.0;
    // Wiener phase-drift variance per symbol is 2*pi*(linewidth * T_symbol).
    double linewidth_symbol_product = 0.0;

    bool valid() const {
        return span_loss_db >= 0.0 && fiber_loss_db_per_km >= 0.0 &&
               span_length_equiv_km > 0.0 && n_spans >= 1 &&
               amp_noise_figure_db >= 0.0 && mdl_db >= 0.0 &&
               nli_coeff >= 0.0 && linewidth_symbol_product >= 0.0;
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

namespace phys {
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kCarrierHz = 193.4e12;        // ~1549.3 nm
inline constexpr double kSymbolRateHz = 30e9;         // reference bandwidth
} // namespace phys

// ASE power (mW) added by one amplifier that compensates the span loss,
// referred to the symbol-rate bandwidth.
inline double ase_power_per_span_mw(const LinkModel& link) {
    const double gain = db_to_linear(link.span_loss_db);
    const double nf = db_to_linear(link.amp_noise_figure_db);
    const double p_w = nf * phys::kPlanck * phys::kCarrierHz * (gain - 1.0) * phys::kSymbolRateHz;
    return p_w * 1e3;
}

struct SnrPoint {
    double snr_linear = 0.0;
    double distance_km = 0.0;
    double sigma2 = 0.0; // matching AWGN variance per real dimension at unit symbol energy
};

// Multi-span budget: SNR = P / (n (P_ase + eta P^3)).
// SNR is defined over all 12 real dimensions: at unit average symbol energy,
// sigma2 per real dimension = 1 / (12 SNR).
inline SnrPoint snr_at_distance(const LinkModel& link) {
    if (!link.valid()) throw std::invalid_argument("snr_at_distance: invalid LinkModel");
    const double p = dbm_to_mw(link.launch_power_dbm_per_channel);
    const double noise = link.n_spans * (ase_power_per_span_mw(link) + link.nli_coeff * p * p * p);
    SnrPoint out;
    out.snr_linear = p / noise;
    out.distance_km = link.n_spans * link.span_length_equiv_km;
    out.sigma2 = 1.0 / (12.0 * out.snr_linear);
    return out;
}

// Nonlinear coefficient that puts the SNR optimum at the given launch power:
// d/dP [P / (P_ase + eta P^3)] = 0  =>  eta = P_ase / (2 P_opt^3).
inline double calibrate_nli(const LinkModel& link, double p_opt_dbm) {
    const double p = dbm_to_mw(p_opt_dbm);
    return ase_power_per_span_mw(link) / (2.0 * p * p * p);
}

inline void awgn_inplace(Symbol12& x, double sigma2, Rng& rng) {
    if (sigma2 < 0.0) throw std::invalid_argument("awgn: sigma2 must be >= 0");
    if (sigma2 == 0.0) return;
    std::normal_distribution<double> n(0.0, std::sqrt(sigma2));
    for (int j = 0; j < 6; ++j) x(j) += cdouble(n(rng), n(rng));
}

inline Symbol12 awgn(const Symbol12& x, double sigma2, Rng& rng) {
    Symbol12 y = x;
    awgn_inplace(y, sigma2, rng);
    return y;
}

// Haar-distributed 6x6 unitary: QR of an i.i.d. complex Gaussian matrix with
// the R diagonal phases folded into Q (Mezzadri's construction).
inline CMat6 sample_unitary(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMat6 a;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) a(i, j) = cdouble(n(rng), n(rng));
    Eigen::HouseholderQR<CMat6> qr(a);
    CMat6 q = qr.householderQ();
    const CMat6 r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 6; ++j) {
        const cdouble d = r(j, j);
        const double m = std::abs(d);
        q.col(j) *= (m > 0.0 ? d / m : cdouble(1.0, 0.0));
    }
    return q;
}

// U1 D U2 with Haar unitaries and a fixed singular-value profile whose
// extreme ratio is mdl_db, renormalized to unit mean power gain.
inline CMat6 sample_mdl_matrix(double mdl_db, Rng& rng) {
    if (mdl_db < 0.0) throw std::invalid_argument("sample_mdl_matrix: mdl_db must be >= 0");
    Eigen::Matrix<double, 6, 1> s;
    for (int i = 0; i < 6; ++i) {
        const double db = -mdl_db / 2.0 + mdl_db * i / 5.0; // linear in dB
        s(i) = std::pow(10.0, db / 20.0);
    }
    s /= std::sqrt(s.squaredNorm() / 6.0);
    const CMat6 u1 = sample_unitary(rng);
    const CMat6 u2 = sample_unitary(rng);
    return u1 * s.cast<cdouble>().asDiagonal() * u2;
}

inline Symbol12 apply_mdl(const Symbol12& x, double mdl_db, Rng& rng) {
    return sample_mdl_matrix(mdl_db, rng) * x;
}

struct TransmitResult {
    std::vector<Symbol12> rx;
    CMat6 channel;        // composed end-to-end linear channel
    double sigma2 = 0.0;  // total accumulated noise variance per real dim
};

// Span-by-span propagation: per span one static random coupling matrix
// (optionally with MDL), applied to the whole burst, followed by per-symbol
// AWGN carrying 1/n_spans of the end-to-end noise budget. A common Wiener
// phase drift is applied per symbol at the output. Deterministic per seed.
// If fixed_coupling is non-null, every span uses that matrix instead of a
// freshly sampled one (identity gives a coupling-free link).
inline TransmitResult transmit(std::span<const Symbol12> tx, const LinkModel& link,
                               std::uint64_t seed, const CMat6* fixed_coupling = nullptr) {
    if (!link.valid()) throw std::invalid_argument("transmit: invalid LinkModel");
    const SnrPoint sp = snr_at_distance(link);
    const double sigma2_span = sp.sigma2 / link.n_spans;

    TransmitResult out;
    out.sigma2 = sp.sigma2;
    out.channel = CMat6::Identity();
    out.rx.assign(tx.begin(), tx.end());

    for (int s = 0; s < link.n_spans; ++s) {
        Rng span_rng = make_rng(derive_seed(seed, 0xC0, static_cast<std::uint64_t>(s)));
        const CMat6 m = fixed_coupling ? *fixed_coupling
                        : (link.mdl_db > 0.0) ? sample_mdl_matrix(link.mdl_db, span_rng)
                                              : sample_unitary(span_rng);
        out.channel = m * out.channel;
        Rng noise_rng = make_rng(derive_seed(seed, 0xA0, static_cast<std::uint64_t>(s)));
        for (auto& y : out.rx) {
            y = m * y;
            awgn_inplace(y, sigma2_span, noise_rng);
        }
    }

    if (link.linewidth_symbol_product > 0.0) {
        Rng ph_rng = make_rng(derive_seed(seed, 0xF0, 0));
        std::normal_distribution<double> dn(
            0.0, std::sqrt(2.0 * std::numbers::pi * link.linewidth_symbol_product));
        double theta = 0.0;
        for (auto& y : out.rx) {
            theta += dn(ph_rng);
            y *= std::exp(cdouble(0.0, theta));
        }
    }
    return out;
}

} // namespace m12

#endif
