#ifndef M12_SYMBOL_HPP
#define M12_SYMBOL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace m12 {

using cdouble = std::complex<double>;

// One 12-real-dimensional channel symbol: 6 complex coordinates ordered
// (mode1-polX, mode1-polY, mode2-polX, mode2-polY, mode3-polX, mode3-polY).
using Symbol12 = Eigen::Matrix<cdouble, 6, 1>;

using CMat6 = Eigen::Matrix<cdouble, 6, 6>;

inline double norm2(const Symbol12& x) { return x.squaredNorm(); }

inline double distance2(const Symbol12& a, const Symbol12& b) {
    return (a - b).squaredNorm();
}

// 12-bit label, values in [0, 4096).
using Label = std::uint16_t;

inline int popcount12(Label w) { return __builtin_popcount(w & 0xFFF); }

} // namespace m12

#endif
