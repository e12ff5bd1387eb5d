#ifndef CHD_TENSOR_HPP
#define CHD_TENSOR_HPP

#include <Eigen/Core>

namespace chd {

/// Symmetric n x n strain/stress tensor, n in {1, 2}; stored without heap use.
using SymTensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

inline SymTensor zero_tensor(int n) { return SymTensor::Zero(n, n); }
inline SymTensor identity_tensor(int n) { return SymTensor::Identity(n, n); }

/// Frobenius contraction a : b.
inline double contract(const SymTensor& a, const SymTensor& b) { return a.cwiseProduct(b).sum(); }

}  // namespace chd

#endif  // CHD_TENSOR_HPP
