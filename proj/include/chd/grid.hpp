#ifndef CHD_GRID_HPP
#define CHD_GRID_HPP

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "chd/tensor.hpp"

namespace chd {

/// Nodal scalar field (one value per node).
using ScalarField = Eigen::VectorXd;
/// Nodal vector field, component-major: entry k*N + i is component k at node i.
using VectorField = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class BoundaryTag { Interior, Dirichlet, Neumann };

/// Faces of the box domain. In 1D only Left and Right exist.
enum class Face { Left = 0, Right = 1, Bottom = 2, Top = 3 };

std::string to_string(BoundaryTag tag);

struct GridConfig {
  int dimension = 1;
  std::array<double, 2> lengths{1.0, 1.0};
  std::array<int, 2> nodes{3, 3};
  /// Tag per face, indexed by Face. Bottom/Top are ignored in 1D.
  std::array<BoundaryTag, 4> faces{BoundaryTag::Dirichlet, BoundaryTag::Neumann,
                                   BoundaryTag::Neumann, BoundaryTag::Neumann};
};

/// One vertex quadrature point of a cell. Gradients at a quadrature point use
/// the cell edges that meet at the vertex, so every nodal integrand reduces to
/// the trapezoidal rule and no hourglass modes survive in 2D.
struct QuadraturePoint {
  int node = 0;
  double weight = 0.0;
  /// For each axis: the two nodes (minus, plus) of the edge used for the
  /// difference quotient along that axis.
  std::array<std::array<int, 2>, 2> edge{};
};

/// Uniform tensor-product grid on [0,Lx] (x [0,Ly]) with tagged boundary.
class Grid {
public:
  explicit Grid(const GridConfig& config);

  int dimension() const { return dim_; }
  int nodes_along(int axis) const { return counts_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  int num_nodes() const { return num_nodes_; }
  int num_cells() const { return num_cells_; }
  double volume() const { return volume_; }

  int node_index(int i, int j = 0) const { return i + counts_[0] * j; }
  std::array<int, 2> node_ij(int node) const { return {node % counts_[0], node / counts_[0]}; }
  std::array<double, 2> coordinate(int node) const;

  BoundaryTag tag(int node) const { return tags_[static_cast<std::size_t>(node)]; }
  BoundaryTag face_tag(Face f) const { return faces_[static_cast<std::size_t>(f)]; }
  /// Outer unit normal of a face.
  std::array<double, 2> normal(Face f) const;
  const std::vector<int>& dirichlet_nodes() const { return dirichlet_; }
  bool is_dirichlet(int node) const { return tag(node) == BoundaryTag::Dirichlet; }

  /// Trapezoidal (lumped mass) weights; sum equals the domain volume.
  const Eigen::VectorXd& node_weights() const { return weights_; }

  const std::vector<QuadraturePoint>& quadrature() const { return qps_; }
  int num_quadrature_points() const { return static_cast<int>(qps_.size()); }
  /// Quadrature points belonging to a cell occupy [cell*per_cell, (cell+1)*per_cell).
  int quadrature_per_cell() const { return dim_ == 1 ? 2 : 4; }

  // Quadrature-level linear maps and their transposes.
  Eigen::VectorXd qp_values(const ScalarField& f) const;
  /// Rows are quadrature points, columns are axes.
  Eigen::MatrixXd qp_gradient(const ScalarField& f) const;
  std::vector<SymTensor> qp_strain(const VectorField& u) const;
  ScalarField scatter_values(const Eigen::VectorXd& qp) const;
  ScalarField scatter_gradient(const Eigen::MatrixXd& qp) const;
  /// Adjoint of qp_strain: returns sum_q stress_q : eps_q(.) as a nodal covector.
  VectorField scatter_strain(const std::vector<SymTensor>& stress) const;

  /// Sum over quadrature points of factor_q * grad(phi_i).grad(phi_j).
  SparseMatrix stiffness_matrix(const Eigen::VectorXd& qp_factor) const;
  /// Scalar second-difference operators (xx, yy, xy) on nodes.
  const std::vector<SparseMatrix>& second_difference_ops() const { return d2_; }
  /// Multiplicity of each second-difference operator in the H^2 form.
  const std::vector<double>& second_difference_multiplicity() const { return d2_mult_; }
  /// Scalar matrix S with second_gradient_form(u,w) = sum_k u_k^T S w_k.
  const SparseMatrix& second_gradient_matrix() const { return s2_; }

private:
  int dim_;
  std::array<int, 2> counts_{1, 1};
  std::array<double, 2> h_{1.0, 1.0};
  std::array<double, 2> lengths_{1.0, 1.0};
  std::array<BoundaryTag, 4> faces_{};
  int num_nodes_ = 0;
  int num_cells_ = 0;
  double volume_ = 0.0;
  std::vector<BoundaryTag> tags_;
  std::vector<int> dirichlet_;
  Eigen::VectorXd weights_;
  std::vector<QuadraturePoint> qps_;
  std::vector<SparseMatrix> d2_;
  std::vector<double> d2_mult_;
  SparseMatrix s2_;
};

/// Validates the configuration and builds the grid. Throws std::invalid_argument
/// on bad sizes or when no face is Dirichlet.
Grid build_grid(const GridConfig& config);

/// Trapezoidal quadrature of a nodal field.
double integrate(const Grid& g, const ScalarField& field);

/// Cell-centred gradient (average over the cell's quadrature points).
/// Rows are cells, columns are axes.
Eigen::MatrixXd gradient(const Grid& g, const ScalarField& field);

/// Cell-centred symmetrized gradient of a vector field.
std::vector<SymTensor> symmetric_gradient(const Grid& g, const VectorField& u);

/// Discrete sum_{i,j,k} int d_ij u_k d_ij w_k dx with one-sided boundary stencils.
double second_gradient_form(const Grid& g, const VectorField& u, const VectorField& w);

/// Returns u with every component at Dirichlet nodes replaced by b.
VectorField apply_dirichlet(const Grid& g, const VectorField& u, const VectorField& b);

/// Component k of a vector field as a scalar field view.
inline auto component(const VectorField& u, int k, int num_nodes) {
  return u.segment(static_cast<Eigen::Index>(k) * num_nodes, num_nodes);
}
inline auto component(VectorField& u, int k, int num_nodes) {
  return u.segment(static_cast<Eigen::Index>(k) * num_nodes, num_nodes);
}

}  // namespace chd

#endif  // CHD_GRID_HPP
