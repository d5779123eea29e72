#ifndef M12_MODEM_HPP
#define M12_MODEM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "m12/constellation.hpp"
#include "m12/symbol.hpp"

namespace m12 {

// 12 per-bit log-likelihood ratios, natural log-odds.
// Sign convention: positive means bit value 0 is more likely.
using LlrVector = std::array<double, 12>;

struct HardDecision {
    Label label = 0;
    double dist2 = 0.0;
};

inline Symbol12 map_bits(std::uint32_t word, const LabeledConstellation& c) {
    if (word >= LabeledConstellation::kSize)
        throw std::out_of_range("map_bits: word must be in [0, 4096)");
    return c.point(static_cast<Label>(word));
}

// Maximum-likelihood hard decision: exhaustive scan over all 4096 points,
// ties broken towards the lowest label.
inline HardDecision hard_demap(const Symbol12& y, const LabeledConstellation& c) {
    HardDecision best{0, std::numeric_limits<double>::infinity()};
    for (std::uint32_t w = 0; w < LabeledConstellation::kSize; ++w) {
        const double d2 = distance2(y, c.point(static_cast<Label>(w)));
        if (d2 < best.dist2) {
            best.dist2 = d2;
            best.label = static_cast<Label>(w);
        }
    }
    return best;
}

namespace detail {

inline void check_sigma2(double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
}

// LLRs from per-point exponents e_w = -d2_w / (2 sigma2).
inline LlrVector llrs_from_exponents(const std::vector<double>& e) {
    LlrVector out{};
    // Global-max scaling shares one exp() pass across all 12 bits; if one
    // side of a bit underflows completely, redo that bit with per-side maxima.
    double m = -std::numeric_limits<double>::infinity();
    for (double v : e) m = std::max(m, v);
    static thread_local std::vector<double> t;
    t.resize(e.size());
    for (std::size_t w = 0; w < e.size(); ++w) t[w] = std::exp(e[w] - m);

    for (int i = 0; i < 12; ++i) {
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t w = 0; w < e.size(); ++w)
            ((w >> i) & 1 ? s1 : s0) += t[w];
        if (s0 > 0.0 && s1 > 0.0) {
            out[i] = std::log(s0) - std::log(s1);
            continue;
        }
        double m0 = -std::numeric_limits<double>::infinity(), m1 = m0;
        for (std::size_t w = 0; w < e.size(); ++w)
            ((w >> i) & 1 ? m1 : m0) = std::max((w >> i) & 1 ? m1 : m0, e[w]);
        double a0 = 0.0, a1 = 0.0;
        for (std::size_t w = 0; w < e.size(); ++w) {
            if ((w >> i) & 1)
                a1 += std::exp(e[w] - m1);
            else
                a0 += std::exp(e[w] - m0);
        }
        out[i] = (m0 + std::log(a0)) - (m1 + std::log(a1));
    }
    return out;
}

} // namespace detail

// Exact per-bit LLRs with a numerically stable log-sum-exp, uniform prior:
//   LLR_i = log sum_{x: b_i=0} exp(-|y-x|^2 / 2s2) - log sum_{x: b_i=1} ...
inline LlrVector soft_demap_exact(const Symbol12& y, const LabeledConstellation& c,
                                  double sigma2) {
    detail::check_sigma2(sigma2);
    std::vector<double> e(LabeledConstellation::kSize);
    for (std::uint32_t w = 0; w < LabeledConstellation::kSize; ++w)
        e[w] = -distance2(y, c.point(static_cast<Label>(w))) / (2.0 * sigma2);
    return detail::llrs_from_exponents(e);
}

// Max-log approximation: log-sum-exp replaced by the dominating term.
inline LlrVector soft_demap_maxlog(const Symbol12& y, const LabeledConstellation& c,
                                   double sigma2) {
    detail::check_sigma2(sigma2);
    LlrVector out{};
    std::array<double, 12> d0, d1;
    d0.fill(std::numeric_limits<double>::infinity());
    d1.fill(std::numeric_limits<double>::infinity());
    for (std::uint32_t w = 0; w < LabeledConstellation::kSize; ++w) {
        const double d2 = distance2(y, c.point(static_cast<Label>(w)));
        for (int i = 0; i < 12; ++i)
            ((w >> i) & 1 ? d1[i] : d0[i]) = std::min((w >> i) & 1 ? d1[i] : d0[i], d2);
    }
    for (int i = 0; i < 12; ++i) out[i] = (d1[i] - d0[i]) / (2.0 * sigma2);
    return out;
}

// Hot-path demapper. Exploits that each complex coordinate only takes a
// handful of distinct values (8 for Matryoshka, 4 for PDM-QPSK): squared
// distance to every point is assembled from six small per-coordinate tables.
// Produces the same decisions and LLRs as the plain-scan functions above;
// bit-exact agreement with hard_demap is covered by test.
class Demapper {
public:
    explicit Demapper(const LabeledConstellation& c) : c_(&c) {
        for (int j = 0; j < 6; ++j) {
            auto proj = projection_2d(c, j);
            if (proj.size() > 8) {
                // no small per-coordinate alphabet (e.g. an arbitrary rotated
                // point set): fall back to direct distance evaluation
                generic_ = true;
                return;
            }
            for (const auto& p : proj) proto_[j].push_back(p.value);
        }
        idx_.resize(c.size());
        for (std::size_t w = 0; w < c.size(); ++w) {
            const auto& p = c.point(static_cast<Label>(w));
            for (int j = 0; j < 6; ++j) {
                std::size_t k = 0;
                while (k < proto_[j].size() && std::norm(proto_[j][k] - p(j)) > 1e-18) ++k;
                idx_[w][j] = static_cast<std::uint8_t>(k);
            }
        }
    }

    const LabeledConstellation& constellation() const { return *c_; }

    // Squared distances from y to all 4096 points, indexed by label.
    void distances2(const Symbol12& y, std::vector<double>& out) const {
        out.resize(c_->size());
        if (generic_) {
            for (std::size_t w = 0; w < out.size(); ++w)
                out[w] = distance2(y, c_->point(static_cast<Label>(w)));
            return;
        }
        double tab[6][8];
        for (int j = 0; j < 6; ++j)
            for (std::size_t k = 0; k < proto_[j].size(); ++k)
                tab[j][k] = std::norm(y(j) - proto_[j][k]);
        for (std::size_t w = 0; w < out.size(); ++w) {
            const auto& ix = idx_[w];
            out[w] = tab[0][ix[0]] + tab[1][ix[1]] + tab[2][ix[2]] +
                     tab[3][ix[3]] + tab[4][ix[4]] + tab[5][ix[5]];
        }
    }

    HardDecision hard(const Symbol12& y) const {
        static thread_local std::vector<double> d2;
        distances2(y, d2);
        HardDecision best{0, std::numeric_limits<double>::infinity()};
        for (std::size_t w = 0; w < d2.size(); ++w) {
            if (d2[w] < best.dist2) {
                best.dist2 = d2[w];
                best.label = static_cast<Label>(w);
            }
        }
        return best;
    }

    LlrVector llr_exact(const Symbol12& y, double sigma2) const {
        detail::check_sigma2(sigma2);
        static thread_local std::vector<double> e;
        distances2(y, e);
        for (double& v : e) v = -v / (2.0 * sigma2);
        return detail::llrs_from_exponents(e);
    }

    LlrVector llr_maxlog(const Symbol12& y, double sigma2) const {
        detail::check_sigma2(sigma2);
        static thread_local std::vector<double> d2;
        distances2(y, d2);
        LlrVector out{};
        for (int i = 0; i < 12; ++i) {
            double m0 = std::numeric_limits<double>::infinity(), m1 = m0;
            for (std::size_t w = 0; w < d2.size(); ++w)
                ((w >> i) & 1 ? m1 : m0) = std::min((w >> i) & 1 ? m1 : m0, d2[w]);
            out[i] = (m1 - m0) / (2.0 * sigma2);
        }
        return out;
    }

private:
    const LabeledConstellation* c_;
    bool generic_ = false;
    std::array<std::vector<cdouble>, 6> proto_;
    std::vector<std::array<std::uint8_t, 6>> idx_;
};

} // namespace m12

#endif
