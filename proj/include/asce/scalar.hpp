#pragma once
// Small helpers shared by the real- and complex-valued code paths.

#include <complex>
#include <type_traits>

#include <Eigen/Core>

namespace asce {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// sign(x) with sign(0) = 0; for complex scalars the sign is applied to the
// real and imaginary parts independently.
inline double component_sign(double x) {
    return (x > 0.0) ? 1.0 : (x < 0.0) ? -1.0 : 0.0;
}
inline std::complex<double> component_sign(const std::complex<double>& x) {
    return {component_sign(x.real()), component_sign(x.imag())};
}

}  // namespace asce
