#ifndef M12_METRICS_HPP
#define M12_METRICS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "m12/channel.hpp"
#include "m12/modem.hpp"
#include "m12/rng.hpp"

namespace m12 {

struct MetricEstimate {
    double value = 0.0;
    double ci_halfwidth_95 = 0.0;
    std::size_t n_samples = 0;
};

// Sentinel for an effectively noiseless effective-SNR estimate.
inline constexpr double kSnrCapLinear = 1e15;

namespace detail {

// 95% CI from 10 batch means (Student t, 9 dof).
inline constexpr int kBatches = 10;
inline constexpr double kT95Dof9 = 2.262;

inline MetricEstimate from_batches(const double (&batch)[kBatches], std::size_t n) {
    double mean = 0.0;
    for (double b : batch) mean += b;
    mean /= kBatches;
    double var = 0.0;
    for (double b : batch) var += (b - mean) * (b - mean);
    var /= (kBatches - 1);
    return {mean, kT95Dof9 * std::sqrt(var / kBatches), n};
}

inline double log1pexp(double a) { // log(1 + e^a), stable
    return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
}

} // namespace detail

// Bit-error fraction with a Wilson 95% interval.
inline MetricEstimate ber(std::span<const std::uint8_t> tx_bits,
                          std::span<const std::uint8_t> rx_bits) {
    if (tx_bits.size() != rx_bits.size())
        throw std::invalid_argument("ber: length mismatch");
    const std::size_t n = tx_bits.size();
    if (n == 0) throw std::invalid_argument("ber: empty streams");
    std::size_t errs = 0;
    for (std::size_t i = 0; i < n; ++i) errs += (tx_bits[i] != rx_bits[i]);
    const double p = static_cast<double>(errs) / static_cast<double>(n);
    const double z = 1.959963985;
    const double z2n = z * z / static_cast<double>(n);
    const double hw = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
    return {p, hw, n};
}

// Bit-error rate between label streams (12 bits per symbol).
inline MetricEstimate ber_labels(std::span<const Label> tx, std::span<const Label> rx) {
    if (tx.size() != rx.size()) throw std::invalid_argument("ber_labels: length mismatch");
    if (tx.empty()) throw std::invalid_argument("ber_labels: empty streams");
    std::size_t errs = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) errs += popcount12(tx[i] ^ rx[i]);
    const std::size_t n = 12 * tx.size();
    const double p = static_cast<double>(errs) / static_cast<double>(n);
    const double z = 1.959963985;
    const double z2n = z * z / static_cast<double>(n);
    const double hw = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
    return {p, hw, n};
}

// Monte Carlo mutual information of the 12D AWGN channel with uniform input
// over the constellation, bits per 12D symbol:
//   I = log2 M + E[ (e_x - logsumexp_x' e_x') / ln 2 ],  e_x = -|y-x|^2/(2 s2)
inline MetricEstimate mi_mc(const Demapper& dm, double sigma2, std::size_t n, Rng& rng) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("mi_mc: sigma2 must be > 0");
    const auto& c = dm.constellation();
    std::uniform_int_distribution<std::uint32_t> lab(0, LabeledConstellation::kSize - 1);
    const double log2m = 12.0;
    const double inv_ln2 = 1.0 / std::numbers::ln2;

    double batch[detail::kBatches] = {};
    std::vector<double> d2;
    const std::size_t per = std::max<std::size_t>(1, n / detail::kBatches);
    std::size_t total = 0;
    for (int b = 0; b < detail::kBatches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const Label w = static_cast<Label>(lab(rng));
            const Symbol12 y = awgn(c.point(w), sigma2, rng);
            dm.distances2(y, d2);
            double m = d2[0];
            for (double v : d2) m = std::min(m, v);
            double s = 0.0;
            for (double v : d2) s += std::exp(-(v - m) / (2.0 * sigma2));
            // e_x - lse = -(d2[w]-m)/(2 s2) - log(s)
            acc += (-(d2[w] - m) / (2.0 * sigma2) - std::log(s)) * inv_ln2;
        }
        batch[b] = log2m + acc / static_cast<double>(per);
        total += per;
    }
    return detail::from_batches(batch, total);
}

// MI estimate from recorded (label, received symbol) pairs with the matched
// AWGN likelihood at the given sigma2. For DSP-chain outputs with residual
// impairments this is a mismatched lower bound.
inline MetricEstimate mi_mc_samples(const Demapper& dm, std::span<const Label> tx,
                                    std::span<const Symbol12> rx, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("mi_mc_samples: sigma2 must be > 0");
    if (tx.size() != rx.size() || tx.empty())
        throw std::invalid_argument("mi_mc_samples: need matching non-empty streams");
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    double batch[detail::kBatches] = {};
    std::vector<double> d2;
    const std::size_t n = tx.size();
    const std::size_t per = std::max<std::size_t>(1, n / detail::kBatches);
    for (int b = 0; b < detail::kBatches; ++b) {
        double acc = 0.0;
        const std::size_t lo = b * per, hi = (b == detail::kBatches - 1) ? n : (b + 1) * per;
        std::size_t cnt = 0;
        for (std::size_t i = lo; i < hi && i < n; ++i, ++cnt) {
            dm.distances2(rx[i], d2);
            double m = d2[0];
            for (double v : d2) m = std::min(m, v);
            double s = 0.0;
            for (double v : d2) s += std::exp(-(v - m) / (2.0 * sigma2));
            acc += 12.0 + (-(d2[tx[i]] - m) / (2.0 * sigma2) - std::log(s)) * inv_ln2;
        }
        batch[b] = acc / static_cast<double>(std::max<std::size_t>(1, cnt));
    }
    return detail::from_batches(batch, n);
}

enum class DemapperKind { Exact, MaxLog };

// Monte Carlo generalized mutual information under bit-wise decoding:
//   GMI = sum_i ( 1 - E[ log2(1 + exp(-(1-2 b_i) LLR_i)) ] )
inline MetricEstimate gmi_mc(const Demapper& dm, double sigma2, std::size_t n,
                             DemapperKind kind, Rng& rng) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("gmi_mc: sigma2 must be > 0");
    const auto& c = dm.constellation();
    std::uniform_int_distribution<std::uint32_t> lab(0, LabeledConstellation::kSize - 1);
    const double inv_ln2 = 1.0 / std::numbers::ln2;

    double batch[detail::kBatches] = {};
    const std::size_t per = std::max<std::size_t>(1, n / detail::kBatches);
    std::size_t total = 0;
    for (int b = 0; b < detail::kBatches; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const Label w = static_cast<Label>(lab(rng));
            const Symbol12 y = awgn(c.point(w), sigma2, rng);
            const LlrVector llr = (kind == DemapperKind::Exact) ? dm.llr_exact(y, sigma2)
                                                                : dm.llr_maxlog(y, sigma2);
            double penalty = 0.0;
            for (int k = 0; k < 12; ++k) {
                const double sgn = ((w >> k) & 1) ? -1.0 : 1.0;
                penalty += detail::log1pexp(-sgn * llr[k]) * inv_ln2;
            }
            acc += 12.0 - penalty;
        }
        batch[b] = acc / static_cast<double>(per);
        total += per;
    }
    return detail::from_batches(batch, total);
}

struct EffectiveSnr {
    MetricEstimate est;
    bool sparse_clusters = false; // fewer than 2 symbols per used point on average
};

// Effective SNR from residual variance around the reference points (ideal
// decisions or ground truth), pooled over all 12 real dimensions:
//   SNR_eff = mean |x_ref|^2 / mean |y - x_ref|^2
inline EffectiveSnr effective_snr(std::span<const Symbol12> rx,
                                  std::span<const Symbol12> ref) {
    if (rx.size() != ref.size() || rx.size() < 2)
        throw std::invalid_argument("effective_snr: need matching streams, n >= 2");
    const std::size_t n = rx.size();

    double batch[detail::kBatches];
    const std::size_t per = std::max<std::size_t>(1, n / detail::kBatches);
    double sig_all = 0.0;
    for (int b = 0; b < detail::kBatches; ++b) {
        double sig = 0.0, res = 0.0;
        const std::size_t lo = b * per, hi = (b == detail::kBatches - 1) ? n : (b + 1) * per;
        for (std::size_t i = lo; i < hi && i < n; ++i) {
            sig += norm2(ref[i]);
            res += distance2(rx[i], ref[i]);
        }
        batch[b] = (res > sig / kSnrCapLinear) ? sig / res : kSnrCapLinear;
        sig_all += sig;
    }
    double sig = 0.0, res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sig += norm2(ref[i]);
        res += distance2(rx[i], ref[i]);
    }
    EffectiveSnr out;
    const double snr = (res > sig / kSnrCapLinear) ? sig / res : kSnrCapLinear;
    MetricEstimate est = detail::from_batches(batch, n);
    est.value = snr;
    out.est = est;
    out.sparse_clusters = n < 2 * LabeledConstellation::kSize;
    return out;
}

} // namespace m12

#endif
