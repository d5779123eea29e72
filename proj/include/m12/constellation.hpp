#ifndef M12_CONSTELLATION_HPP
#define M12_CONSTELLATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "m12/symbol.hpp"

namespace m12 {

enum class Scheme { Matryoshka12D, PdmQpsk12D };

// How the ring-selection and parity constraints couple the three 4D blocks.
enum class CouplingRule {
    GlobalRingGlobalParity, // one ring bit shared by all blocks, one overall parity
    PerBlockParity          // independent ring bit + parity per 4D block
};

// Dual-ring geometry of each 2D projection: four points per ring, the second
// ring rotated by offset_angle. Radii are pre-normalization amplitudes.
struct RingGeometry {
    double r_inner = 1.0;
    double r_outer = 1.0;
    double offset_angle = 0.15;
    double base_angle = std::numbers::pi / 4.0;

    bool valid() const {
        return r_inner > 0.0 && r_outer > 0.0 &&
               offset_angle > 0.0 && offset_angle < std::numbers::pi / 2.0;
    }
};

class LabeledConstellation {
public:
    static constexpr std::size_t kSize = 4096;
    static constexpr int kBits = 12;

    Scheme scheme{};
    CouplingRule rule{};
    RingGeometry geometry{};

    // Point index == 12-bit label.
    const Symbol12& point(Label w) const { return points_.at(w); }
    const std::vector<Symbol12>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    double average_energy() const {
        double s = 0.0;
        for (const auto& p : points_) s += norm2(p);
        return s / static_cast<double>(points_.size());
    }

    // Ring-selection bit implied by a label: the parity completion of the
    // information bits. Meaningful for Matryoshka only.
    static int ring_bit_global(Label w) { return popcount12(w) & 1; }
    static int ring_bit_block(Label w, int block) {
        return __builtin_popcount((w >> (4 * block)) & 0xF) & 1;
    }

    // Wrap an externally transformed point set (e.g. a rotated copy) keeping
    // the label order. Mostly useful for invariance checks.
    static LabeledConstellation with_points(Scheme scheme, std::vector<Symbol12> pts) {
        if (pts.size() != kSize)
            throw std::invalid_argument("with_points: need exactly 4096 points");
        LabeledConstellation c;
        c.scheme = scheme;
        c.points_ = std::move(pts);
        return c;
    }

    friend LabeledConstellation build_matryoshka(const RingGeometry&, CouplingRule);
    friend LabeledConstellation build_pdm_qpsk();

private:
    std::vector<Symbol12> points_;
};

namespace detail {

// Two-bit Gray word (hi,lo) -> phase index 0..3. Sequence 00,01,11,10 walks
// the ring so angular neighbours differ in exactly one bit.
inline int gray_to_index(int hi, int lo) {
    const int g = (hi << 1) | lo;
    return g ^ (g >> 1);
}

inline cdouble ring_point(const RingGeometry& g, bool inner, int index) {
    const double r = inner ? g.r_inner : g.r_outer;
    const double base = inner ? g.base_angle : g.base_angle + g.offset_angle;
    const double a = base + index * (std::numbers::pi / 2.0);
    return cdouble(r * std::cos(a), r * std::sin(a));
}

} // namespace detail

// Matryoshka construction. Label bits 2j and 2j+1 are the Gray phase bits of
// complex coordinate j. Ring-selection bits are the even-parity completion of
// the label (the punctured-out bit), so every 12-bit word is a valid point:
//   GlobalRingGlobalParity: b = XOR of all 12 label bits; within each
//     coordinate pair, b decides which member sits on the inner ring.
//   PerBlockParity: each 4D block has its own ring bit, the XOR of that
//     block's 4 label bits.
// Points are scaled to unit average (here also per-point) energy.
inline LabeledConstellation build_matryoshka(const RingGeometry& geometry,
                                             CouplingRule rule = CouplingRule::GlobalRingGlobalParity) {
    if (!geometry.valid())
        throw std::invalid_argument("build_matryoshka: invalid RingGeometry");

    LabeledConstellation c;
    c.scheme = Scheme::Matryoshka12D;
    c.rule = rule;
    c.geometry = geometry;
    c.points_.resize(LabeledConstellation::kSize);

    const double e12 = 3.0 * (geometry.r_inner * geometry.r_inner +
                              geometry.r_outer * geometry.r_outer);
    const double scale = 1.0 / std::sqrt(e12);

    for (std::uint32_t w = 0; w < LabeledConstellation::kSize; ++w) {
        Symbol12 p;
        for (int j = 0; j < 6; ++j) {
            const int hi = (w >> (2 * j)) & 1;
            const int lo = (w >> (2 * j + 1)) & 1;
            const int idx = detail::gray_to_index(hi, lo);
            const int b = (rule == CouplingRule::GlobalRingGlobalParity)
                              ? LabeledConstellation::ring_bit_global(static_cast<Label>(w))
                              : LabeledConstellation::ring_bit_block(static_cast<Label>(w), j / 2);
            const bool inner = ((j % 2) == 0) != (b == 1);
            p(j) = scale * detail::ring_point(geometry, inner, idx);
        }
        c.points_[w] = p;
    }
    return c;
}

// PDM-QPSK over the three spatial modes, read as one 4096-point 12D product
// constellation: Gray QPSK per complex coordinate, label bits 2j,2j+1 for
// coordinate j, unit average energy. Label 0 maps every coordinate to
// (1+i)/sqrt(12).
inline LabeledConstellation build_pdm_qpsk() {
    LabeledConstellation c;
    c.scheme = Scheme::PdmQpsk12D;
    c.rule = CouplingRule::GlobalRingGlobalParity;
    c.points_.resize(LabeledConstellation::kSize);

    const double r = 1.0 / std::sqrt(6.0);
    for (std::uint32_t w = 0; w < LabeledConstellation::kSize; ++w) {
        Symbol12 p;
        for (int j = 0; j < 6; ++j) {
            const int hi = (w >> (2 * j)) & 1;
            const int lo = (w >> (2 * j + 1)) & 1;
            const int idx = detail::gray_to_index(hi, lo);
            const double a = std::numbers::pi / 4.0 + idx * (std::numbers::pi / 2.0);
            p(j) = cdouble(r * std::cos(a), r * std::sin(a));
        }
        c.points_[w] = p;
    }
    return c;
}

struct MinDistance {
    double distance = 0.0;
    std::size_t multiplicity = 0; // number of point pairs at the minimum
};

// Exact minimum pairwise Euclidean distance by exhaustive scan.
inline MinDistance min_distance(const LabeledConstellation& c) {
    if (c.size() < 2) throw std::invalid_argument("min_distance: need at least 2 points");
    const auto& pts = c.points();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t k = i + 1; k < pts.size(); ++k)
            best = std::min(best, distance2(pts[i], pts[k]));

    std::size_t mult = 0;
    const double thresh = best * (1.0 + 1e-9);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t k = i + 1; k < pts.size(); ++k)
            if (distance2(pts[i], pts[k]) <= thresh) ++mult;

    return {std::sqrt(best), mult};
}

struct ProjectionPoint {
    cdouble value;
    std::size_t count = 0;
};

// Multiset of 2D projections of one complex coordinate, with usage counts.
// Counts sum to 4096.
inline std::vector<ProjectionPoint> projection_2d(const LabeledConstellation& c, int coord) {
    if (coord < 0 || coord > 5) throw std::invalid_argument("projection_2d: coord must be 0..5");
    std::vector<ProjectionPoint> out;
    const double tol2 = 1e-18;
    for (const auto& p : c.points()) {
        const cdouble v = p(coord);
        auto it = std::find_if(out.begin(), out.end(), [&](const ProjectionPoint& q) {
            return std::norm(q.value - v) < tol2;
        });
        if (it == out.end())
            out.push_back({v, 1});
        else
            ++it->count;
    }
    std::sort(out.begin(), out.end(), [](const ProjectionPoint& a, const ProjectionPoint& b) {
        return std::arg(a.value) < std::arg(b.value);
    });
    return out;
}

// CSV export: one row per label, hex label plus re/im of the 6 coordinates.
inline void export_csv(const LabeledConstellation& c, std::ostream& os) {
    os << "label_hex,re0,im0,re1,im1,re2,im2,re3,im3,re4,im4,re5,im5\n";
    os.precision(17);
    char buf[8];
    for (std::size_t w = 0; w < c.size(); ++w) {
        std::snprintf(buf, sizeof buf, "%03zx", w);
        os << buf;
        const auto& p = c.point(static_cast<Label>(w));
        for (int j = 0; j < 6; ++j)
            os << ',' << p(j).real() << ',' << p(j).imag();
        os << '\n';
    }
}

} // namespace m12

#endif
