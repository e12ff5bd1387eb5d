#include "chd/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace chd {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::Neumann: return "neumann";
  }
  return "unknown";
}

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

Grid::Grid(const GridConfig& config) : dim_(config.dimension), faces_(config.faces) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("grid: dimension must be 1 or 2");
  for (int a = 0; a < dim_; ++a) {
    if (config.nodes[a] < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
    if (!(config.lengths[a] > 0.0)) throw std::invalid_argument("grid: axis lengths must be positive");
    counts_[a] = config.nodes[a];
    lengths_[a] = config.lengths[a];
    h_[a] = lengths_[a] / (counts_[a] - 1);
  }
  if (dim_ == 1) {
    faces_[2] = faces_[3] = BoundaryTag::Neumann;
  }
  const int nfaces = 2 * dim_;
  bool any_dirichlet = false;
  for (int f = 0; f < nfaces; ++f) {
    if (faces_[f] == BoundaryTag::Interior)
      throw std::invalid_argument("grid: a face must be tagged dirichlet or neumann");
    any_dirichlet = any_dirichlet || faces_[f] == BoundaryTag::Dirichlet;
  }
  if (!any_dirichlet) throw std::invalid_argument("grid: the Dirichlet boundary must be nonempty");

  num_nodes_ = counts_[0] * counts_[1];
  num_cells_ = (counts_[0] - 1) * (dim_ == 2 ? counts_[1] - 1 : 1);
  volume_ = lengths_[0] * (dim_ == 2 ? lengths_[1] : 1.0);

  // Tags: a node on several faces takes Dirichlet if any of them is Dirichlet.
  tags_.assign(static_cast<std::size_t>(num_nodes_), BoundaryTag::Interior);
  for (int n = 0; n < num_nodes_; ++n) {
    auto [i, j] = node_ij(n);
    std::vector<Face> on;
    if (i == 0) on.push_back(Face::Left);
    if (i == counts_[0] - 1) on.push_back(Face::Right);
    if (dim_ == 2) {
      if (j == 0) on.push_back(Face::Bottom);
      if (j == counts_[1] - 1) on.push_back(Face::Top);
    }
    if (on.empty()) continue;
    BoundaryTag t = BoundaryTag::Neumann;
    for (Face f : on)
      if (face_tag(f) == BoundaryTag::Dirichlet) t = BoundaryTag::Dirichlet;
    tags_[static_cast<std::size_t>(n)] = t;
    if (t == BoundaryTag::Dirichlet) dirichlet_.push_back(n);
  }

  // Quadrature: one point per cell vertex.
  const double cell_volume = h_[0] * (dim_ == 2 ? h_[1] : 1.0);
  const int per_cell = quadrature_per_cell();
  qps_.reserve(static_cast<std::size_t>(num_cells_ * per_cell));
  const int ncy = dim_ == 2 ? counts_[1] - 1 : 1;
  for (int cj = 0; cj < ncy; ++cj) {
    for (int ci = 0; ci < counts_[0] - 1; ++ci) {
      for (int b = 0; b < (dim_ == 2 ? 2 : 1); ++b) {
        for (int a = 0; a < 2; ++a) {
          QuadraturePoint q;
          q.weight = cell_volume / per_cell;
          if (dim_ == 1) {
            q.node = ci + a;
            q.edge[0] = {ci, ci + 1};
            q.edge[1] = {q.node, q.node};
          } else {
            q.node = node_index(ci + a, cj + b);
            q.edge[0] = {node_index(ci, cj + b), node_index(ci + 1, cj + b)};
            q.edge[1] = {node_index(ci + a, cj), node_index(ci + a, cj + 1)};
          }
          qps_.push_back(q);
        }
      }
    }
  }

  weights_ = Eigen::VectorXd::Zero(num_nodes_);
  for (const auto& q : qps_) weights_[q.node] += q.weight;

  // Second differences. Boundary rows reuse the nearest interior stencil.
  auto second_diff_1d = [&](int axis) {
    std::vector<Triplet> t;
    const double s = 1.0 / (h_[axis] * h_[axis]);
    for (int n = 0; n < num_nodes_; ++n) {
      auto ij = node_ij(n);
      const int k = std::clamp(ij[axis], 1, counts_[axis] - 2);
      auto at = [&](int m) {
        auto c = ij;
        c[axis] = m;
        return node_index(c[0], c[1]);
      };
      t.emplace_back(n, at(k - 1), s);
      t.emplace_back(n, at(k), -2.0 * s);
      t.emplace_back(n, at(k + 1), s);
    }
    return from_triplets(num_nodes_, num_nodes_, t);
  };
  auto first_diff = [&](int axis) {
    std::vector<Triplet> t;
    for (int n = 0; n < num_nodes_; ++n) {
      auto ij = node_ij(n);
      auto at = [&](int m) {
        auto c = ij;
        c[axis] = m;
        return node_index(c[0], c[1]);
      };
      const int i = ij[axis];
      const int lo = std::max(i - 1, 0);
      const int hi = std::min(i + 1, counts_[axis] - 1);
      const double inv = 1.0 / ((hi - lo) * h_[axis]);
      t.emplace_back(n, at(hi), inv);
      t.emplace_back(n, at(lo), -inv);
    }
    return from_triplets(num_nodes_, num_nodes_, t);
  };
  d2_.push_back(second_diff_1d(0));
  d2_mult_.push_back(1.0);
  if (dim_ == 2) {
    d2_.push_back(second_diff_1d(1));
    d2_mult_.push_back(1.0);
    SparseMatrix mixed = first_diff(0) * first_diff(1);
    d2_.push_back(mixed);
    d2_mult_.push_back(2.0);
  }
  s2_.resize(num_nodes_, num_nodes_);
  for (std::size_t k = 0; k < d2_.size(); ++k) {
    SparseMatrix wd = weights_.asDiagonal() * d2_[k];
    SparseMatrix term = SparseMatrix(d2_[k].transpose()) * wd;
    s2_ += d2_mult_[k] * term;
  }
  s2_.makeCompressed();
}

std::array<double, 2> Grid::coordinate(int node) const {
  auto [i, j] = node_ij(node);
  return {i * h_[0], dim_ == 2 ? j * h_[1] : 0.0};
}

std::array<double, 2> Grid::normal(Face f) const {
  switch (f) {
    case Face::Left: return {-1.0, 0.0};
    case Face::Right: return {1.0, 0.0};
    case Face::Bottom: return {0.0, -1.0};
    case Face::Top: return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

Eigen::VectorXd Grid::qp_values(const ScalarField& f) const {
  Eigen::VectorXd out(num_quadrature_points());
  for (int q = 0; q < num_quadrature_points(); ++q) out[q] = f[qps_[static_cast<std::size_t>(q)].node];
  return out;
}

Eigen::MatrixXd Grid::qp_gradient(const ScalarField& f) const {
  Eigen::MatrixXd out(num_quadrature_points(), dim_);
  for (int q = 0; q < num_quadrature_points(); ++q) {
    const auto& qp = qps_[static_cast<std::size_t>(q)];
    for (int d = 0; d < dim_; ++d) out(q, d) = (f[qp.edge[d][1]] - f[qp.edge[d][0]]) / h_[d];
  }
  return out;
}

std::vector<SymTensor> Grid::qp_strain(const VectorField& u) const {
  std::vector<SymTensor> out(qps_.size(), zero_tensor(dim_));
  for (std::size_t q = 0; q < qps_.size(); ++q) {
    const auto& qp = qps_[q];
    SymTensor grad(dim_, dim_);
    for (int k = 0; k < dim_; ++k) {
      const int off = k * num_nodes_;
      for (int d = 0; d < dim_; ++d)
        grad(k, d) = (u[off + qp.edge[d][1]] - u[off + qp.edge[d][0]]) / h_[d];
    }
    out[q] = 0.5 * (grad + grad.transpose());
  }
  return out;
}

ScalarField Grid::scatter_values(const Eigen::VectorXd& qp) const {
  ScalarField out = ScalarField::Zero(num_nodes_);
  for (std::size_t q = 0; q < qps_.size(); ++q) out[qps_[q].node] += qp[static_cast<Eigen::Index>(q)];
  return out;
}

ScalarField Grid::scatter_gradient(const Eigen::MatrixXd& qp) const {
  ScalarField out = ScalarField::Zero(num_nodes_);
  for (std::size_t q = 0; q < qps_.size(); ++q) {
    const auto& p = qps_[q];
    for (int d = 0; d < dim_; ++d) {
      const double v = qp(static_cast<Eigen::Index>(q), d) / h_[d];
      out[p.edge[d][1]] += v;
      out[p.edge[d][0]] -= v;
    }
  }
  return out;
}

VectorField Grid::scatter_strain(const std::vector<SymTensor>& stress) const {
  VectorField out = VectorField::Zero(static_cast<Eigen::Index>(dim_) * num_nodes_);
  for (std::size_t q = 0; q < qps_.size(); ++q) {
    const auto& p = qps_[q];
    const SymTensor s = 0.5 * (stress[q] + stress[q].transpose());
    for (int k = 0; k < dim_; ++k) {
      const int off = k * num_nodes_;
      for (int d = 0; d < dim_; ++d) {
        const double v = s(k, d) / h_[d];
        out[off + p.edge[d][1]] += v;
        out[off + p.edge[d][0]] -= v;
      }
    }
  }
  return out;
}

SparseMatrix Grid::stiffness_matrix(const Eigen::VectorXd& qp_factor) const {
  std::vector<Triplet> t;
  t.reserve(qps_.size() * static_cast<std::size_t>(4 * dim_));
  for (std::size_t q = 0; q < qps_.size(); ++q) {
    const auto& p = qps_[q];
    for (int d = 0; d < dim_; ++d) {
      const double s = p.weight * qp_factor[static_cast<Eigen::Index>(q)] / (h_[d] * h_[d]);
      const int a = p.edge[d][0];
      const int b = p.edge[d][1];
      t.emplace_back(a, a, s);
      t.emplace_back(b, b, s);
      t.emplace_back(a, b, -s);
      t.emplace_back(b, a, -s);
    }
  }
  return from_triplets(num_nodes_, num_nodes_, t);
}

Grid build_grid(const GridConfig& config) { return Grid(config); }

double integrate(const Grid& g, const ScalarField& field) { return g.node_weights().dot(field); }

Eigen::MatrixXd gradient(const Grid& g, const ScalarField& field) {
  const Eigen::MatrixXd qp = g.qp_gradient(field);
  const int per = g.quadrature_per_cell();
  Eigen::MatrixXd out(g.num_cells(), g.dimension());
  for (int c = 0; c < g.num_cells(); ++c) out.row(c) = qp.middleRows(c * per, per).colwise().mean();
  return out;
}

std::vector<SymTensor> symmetric_gradient(const Grid& g, const VectorField& u) {
  const auto qp = g.qp_strain(u);
  const int per = g.quadrature_per_cell();
  std::vector<SymTensor> out(static_cast<std::size_t>(g.num_cells()), zero_tensor(g.dimension()));
  for (int c = 0; c < g.num_cells(); ++c) {
    SymTensor acc = zero_tensor(g.dimension());
    for (int k = 0; k < per; ++k) acc += qp[static_cast<std::size_t>(c * per + k)];
    out[static_cast<std::size_t>(c)] = acc / per;
  }
  return out;
}

double second_gradient_form(const Grid& g, const VectorField& u, const VectorField& w) {
  const int n = g.num_nodes();
  double sum = 0.0;
  for (int k = 0; k < g.dimension(); ++k) {
    Eigen::VectorXd uk = component(u, k, n);
    Eigen::VectorXd wk = component(w, k, n);
    sum += uk.dot(g.second_gradient_matrix() * wk);
  }
  return sum;
}

VectorField apply_dirichlet(const Grid& g, const VectorField& u, const VectorField& b) {
  VectorField out = u;
  const int n = g.num_nodes();
  for (int k = 0; k < g.dimension(); ++k)
    for (int node : g.dirichlet_nodes()) out[k * n + node] = b[k * n + node];
  return out;
}

}  // namespace chd
