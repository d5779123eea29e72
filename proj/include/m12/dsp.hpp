#ifndef M12_DSP_HPP
#define M12_DSP_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "m12/constellation.hpp"
#include "m12/symbol.hpp"

namespace m12 {

enum class EqMode { DataAided, DecisionDirected };

// Symbol-spaced 6x6 LMS equalizer state. taps[t] multiplies the input
// delayed by t symbols.
struct EqualizerState {
    std::vector<CMat6> taps;
    double step_size = 0.01;
    EqMode mode = EqMode::DataAided;

    static EqualizerState identity(int n_taps, double step = 0.01,
                                   EqMode mode = EqMode::DataAided) {
        if (n_taps < 1) throw std::invalid_argument("EqualizerState: n_taps must be >= 1");
        EqualizerState s;
        s.taps.assign(static_cast<std::size_t>(n_taps), CMat6::Zero());
        s.taps[0] = CMat6::Identity();
        s.step_size = step;
        s.mode = mode;
        return s;
    }
};

namespace detail {

// Per-coordinate nearest prototype, for decision-directed adaptation.
class CoordinateSlicer {
public:
    explicit CoordinateSlicer(const LabeledConstellation& c) {
        for (int j = 0; j < 6; ++j)
            for (const auto& p : projection_2d(c, j)) proto_[j].push_back(p.value);
    }
    cdouble slice(int coord, cdouble v) const {
        double best = std::numeric_limits<double>::infinity();
        cdouble out = proto_[coord].front();
        for (const cdouble& q : proto_[coord]) {
            const double d = std::norm(v - q);
            if (d < best) { best = d; out = q; }
        }
        return out;
    }
    Symbol12 slice(const Symbol12& y) const {
        Symbol12 d;
        for (int j = 0; j < 6; ++j) d(j) = slice(j, y(j));
        return d;
    }

private:
    std::array<std::vector<cdouble>, 6> proto_;
};

} // namespace detail

struct EqualizeResult {
    std::vector<Symbol12> out; // convergence prefix (pilot region) excluded
    EqualizerState state;
    bool converged = false;
    std::vector<double> mse_trace; // per-symbol |error|^2, full stream
};

// LMS adaptation, one update per symbol:
//   y_k = sum_t W_t r_{k-t};  e_k = d_k - y_k;  W_t += mu e_k r_{k-t}^H
// d_k is the pilot symbol while pilots last (data-aided), then the sliced
// decision (decision-directed) when the state allows it. The first
// pilots.size() outputs are treated as the convergence prefix and excluded.
// converged is false when the trailing-window MSE stays above mse_threshold
// (relative to unit symbol energy).
inline EqualizeResult equalize(std::span<const Symbol12> rx,
                               std::span<const Symbol12> pilots,
                               const LabeledConstellation& c,
                               EqualizerState state,
                               double mse_threshold = 0.3) {
    if (rx.size() < pilots.size() || rx.empty())
        throw std::invalid_argument("equalize: stream shorter than pilot prefix");
    const int n_taps = static_cast<int>(state.taps.size());
    detail::CoordinateSlicer slicer(c);

    EqualizeResult res;
    res.mse_trace.reserve(rx.size());
    res.out.reserve(rx.size() - pilots.size());

    for (std::size_t k = 0; k < rx.size(); ++k) {
        Symbol12 y = Symbol12::Zero();
        for (int t = 0; t < n_taps; ++t) {
            if (k < static_cast<std::size_t>(t)) break;
            y += state.taps[t] * rx[k - t];
        }
        Symbol12 ref;
        if (k < pilots.size())
            ref = pilots[k];
        else if (state.mode == EqMode::DecisionDirected)
            ref = slicer.slice(y);
        else
            ref = slicer.slice(y); // data-aided beyond pilots: fall back to decisions
        const Symbol12 e = ref - y;
        res.mse_trace.push_back(norm2(e));
        for (int t = 0; t < n_taps; ++t) {
            if (k < static_cast<std::size_t>(t)) break;
            state.taps[t] += state.step_size * e * rx[k - t].adjoint();
        }
        if (k >= pilots.size()) res.out.push_back(y);
    }

    const std::size_t win = std::min<std::size_t>(1000, res.mse_trace.size());
    double tail = 0.0;
    for (std::size_t i = res.mse_trace.size() - win; i < res.mse_trace.size(); ++i)
        tail += res.mse_trace[i];
    tail /= static_cast<double>(win);
    res.converged = tail < mse_threshold;
    res.state = std::move(state);
    return res;
}

struct PhaseRecoveryResult {
    std::vector<Symbol12> out;
    int cycle_slips = 0;
};

namespace detail {

inline void apply_tributary_phases(Symbol12& y, const double (&theta)[3]) {
    for (int m = 0; m < 3; ++m) {
        const cdouble rot = std::exp(cdouble(0.0, -theta[m]));
        y(2 * m) *= rot;
        y(2 * m + 1) *= rot;
    }
}

} // namespace detail

// Block-wise common-phase recovery per spatial tributary (coordinate pairs
// (0,1), (2,3), (4,5) share one phase). Reference-aided: theta_m per block is
// arg sum y conj(ref) over the block. Cycle slips are counted as block-to-
// block phase jumps beyond pi/2.
inline PhaseRecoveryResult phase_recover(std::span<const Symbol12> in,
                                         std::span<const Symbol12> ref,
                                         int window) {
    if (window < 1 || static_cast<std::size_t>(window) > in.size())
        throw std::invalid_argument("phase_recover: window out of range");
    if (ref.size() != in.size())
        throw std::invalid_argument("phase_recover: reference length mismatch");

    PhaseRecoveryResult res;
    res.out.assign(in.begin(), in.end());
    double prev[3] = {0.0, 0.0, 0.0};
    bool have_prev = false;
    for (std::size_t blk = 0; blk < in.size(); blk += window) {
        const std::size_t hi = std::min(in.size(), blk + window);
        double theta[3];
        for (int m = 0; m < 3; ++m) {
            cdouble acc = 0.0;
            for (std::size_t k = blk; k < hi; ++k)
                acc += in[k](2 * m) * std::conj(ref[k](2 * m)) +
                       in[k](2 * m + 1) * std::conj(ref[k](2 * m + 1));
            theta[m] = std::arg(acc);
            if (have_prev) {
                double d = theta[m] - prev[m];
                while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
                while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
                if (std::abs(d) > std::numbers::pi / 2.0) ++res.cycle_slips;
            }
            prev[m] = theta[m];
        }
        have_prev = true;
        for (std::size_t k = blk; k < hi; ++k) detail::apply_tributary_phases(res.out[k], theta);
    }
    return res;
}

// Decision-feedback variant: each block is first de-rotated by the previous
// block's estimate, sliced per coordinate, then re-estimated against the
// decisions.
inline PhaseRecoveryResult phase_recover_dd(std::span<const Symbol12> in,
                                            const LabeledConstellation& c,
                                            int window) {
    if (window < 1 || static_cast<std::size_t>(window) > in.size())
        throw std::invalid_argument("phase_recover_dd: window out of range");
    detail::CoordinateSlicer slicer(c);

    PhaseRecoveryResult res;
    res.out.assign(in.begin(), in.end());
    double prev[3] = {0.0, 0.0, 0.0};
    bool have_prev = false;
    for (std::size_t blk = 0; blk < in.size(); blk += window) {
        const std::size_t hi = std::min(in.size(), blk + window);
        double theta[3];
        for (int m = 0; m < 3; ++m) {
            cdouble acc = 0.0;
            const cdouble undo = std::exp(cdouble(0.0, -prev[m]));
            for (std::size_t k = blk; k < hi; ++k) {
                for (int j = 2 * m; j <= 2 * m + 1; ++j) {
                    const cdouble d = slicer.slice(j, in[k](j) * undo);
                    acc += in[k](j) * std::conj(d);
                }
            }
            theta[m] = std::arg(acc);
            if (have_prev && std::abs(std::remainder(theta[m] - prev[m], 2.0 * std::numbers::pi)) >
                                 std::numbers::pi / 2.0)
                ++res.cycle_slips;
            prev[m] = theta[m];
        }
        have_prev = true;
        for (std::size_t k = blk; k < hi; ++k) detail::apply_tributary_phases(res.out[k], theta);
    }
    return res;
}

} // namespace m12

#endif
