#ifndef ANISOCRIT_DISCRETIZATION_HPP
#define ANISOCRIT_DISCRETIZATION_HPP

// Hexahedral-cell approximation of Omega, multilinear grid functions and the
// energy J(u) = (1/p) int [H(grad u)^p + |u|^p] - (lambda/q) int (u+)^q
//              - (1/p*) int (u+)^{p*}
// together with its first variation.

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "anisocrit/anisotropy.hpp"

namespace anisocrit {

enum class DomainKind { Box, HalfBall, Ball, ConeSector };

const char* to_string(DomainKind kind);

struct DomainSpec {
  DomainKind kind = DomainKind::Box;
  int dimension = 3;
  Eigen::VectorXd lower;  // box only
  Eigen::VectorXd upper;
  double radius = 1.0;
  double opening = 0.0;  // full opening angle of a cone sector, radians

  static DomainSpec box(int dimension, double a, double b);
  static DomainSpec box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  /// {|x| < R, x_N > 0}
  static DomainSpec half_ball(int dimension, double radius);
  static DomainSpec ball(int dimension, double radius);
  /// {|x| < R, angle(x, e_N) < opening/2}
  static DomainSpec cone_sector(int dimension, double radius, double opening);

  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd bounding_lower() const;
  Eigen::VectorXd bounding_upper() const;
  std::optional<double> exact_measure() const;

  /// Boundary point x0 used for concentration, and the principal curvatures
  /// of the boundary there (graph x_n = 1/2 sum alpha_i x_i^2 in local frame).
  Eigen::VectorXd concentration_point() const;
  std::vector<double> curvatures() const;
};

/// Union of active axis-aligned cells of a uniform grid. Nodes are numbered
/// compactly over the active cells only.
class Mesh {
 public:
  /// Cells are identified by their lattice index (one entry per axis).
  Mesh(int dimension, Eigen::VectorXd origin, Eigen::VectorXd spacing, Eigen::VectorXi counts,
       const std::vector<Eigen::VectorXi>& active_cells);

  int dimension() const { return dim_; }
  int nodes_per_cell() const { return 1 << dim_; }
  const Eigen::VectorXd& origin() const { return origin_; }
  const Eigen::VectorXd& spacing() const { return spacing_; }
  const Eigen::VectorXi& counts() const { return counts_; }
  Eigen::Index num_nodes() const { return nodes_.rows(); }
  Eigen::Index num_cells() const { return cells_.rows(); }

  /// num_nodes x N coordinates
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  Eigen::VectorXd node(Eigen::Index i) const { return nodes_.row(i).transpose(); }
  /// num_cells x 2^N node ids; local bit d of the column selects the upper side on axis d
  const Eigen::MatrixXi& cells() const { return cells_; }
  const Eigen::MatrixXi& cell_lattice() const { return cell_lattice_; }
  const Eigen::MatrixXi& node_lattice() const { return node_lattice_; }

  double cell_volume() const { return spacing_.prod(); }
  double measure() const { return cell_volume() * static_cast<double>(num_cells()); }

  /// Nodes shared by fewer than 2^N active cells.
  const std::vector<bool>& boundary_nodes() const { return boundary_; }
  std::optional<Eigen::Index> find_node(const Eigen::VectorXi& lattice) const;
  std::optional<Eigen::Index> nearest_node(const Eigen::VectorXd& x) const;
  /// Active cell containing x, and the local coordinates of x in [0,1]^N.
  std::optional<std::pair<Eigen::Index, Eigen::VectorXd>> locate(const Eigen::VectorXd& x) const;

  bool connected() const;

 private:
  Eigen::Index lattice_key(const Eigen::VectorXi& idx) const;

  int dim_;
  Eigen::VectorXd origin_;
  Eigen::VectorXd spacing_;
  Eigen::VectorXi counts_;
  Eigen::MatrixXd nodes_;
  Eigen::MatrixXi cells_;
  Eigen::MatrixXi cell_lattice_;
  Eigen::MatrixXi node_lattice_;
  std::vector<Eigen::Index> node_of_key_;  // -1 when absent
  std::vector<Eigen::Index> cell_of_key_;
  std::vector<bool> boundary_;
};

/// Active cells are those whose centers lie in the domain; `resolution` is the
/// number of cells per axis over the bounding box (>= 4).
std::shared_ptr<const Mesh> build_mesh(const DomainSpec& domain, int resolution);

/// Nodal coefficients of a multilinear function on a mesh.
class GridFunction {
 public:
  GridFunction(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values);

  static GridFunction interpolate(std::shared_ptr<const Mesh> mesh,
                                  const std::function<double(const Eigen::VectorXd&)>& f);
  static GridFunction constant(std::shared_ptr<const Mesh> mesh, double c);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  GridFunction with_values(Eigen::VectorXd values) const { return {mesh_, std::move(values)}; }

  /// Multilinear interpolation; nullopt outside the active cells.
  std::optional<double> evaluate(const Eigen::VectorXd& x) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd values_;
};

/// Header line `N h_1..h_N n_1..n_N num_nodes`, then one line per node with its
/// coordinates and value, 17 significant digits.
void write_grid_function(std::ostream& os, const GridFunction& u);
/// Rebuilds the mesh as the closure of the listed nodes.
GridFunction read_grid_function(std::istream& is);
/// Reads values onto an existing mesh; node coordinates must match.
GridFunction read_grid_function(std::istream& is, std::shared_ptr<const Mesh> mesh);

// ---------------------------------------------------------------------------
// Reference cell: tensor Gauss rule with two points per axis.

struct ReferenceCell {
  int dimension;
  int points;          // 2^N
  int shape_count;     // 2^N
  Eigen::MatrixXd shape;     // points x shape_count
  // gradient of shape function a at point q along axis d: grad[d](q, a), unit cell
  std::vector<Eigen::MatrixXd> grad;
  double unit_weight;  // weight per point on the unit cell

  static const ReferenceCell& get(int dimension);
};

/// Calls f(cell, point, value, gradient, weight) for every quadrature point.
template <typename F>
void for_each_quadrature_point(const Mesh& mesh, const Eigen::VectorXd& coeffs, F&& f) {
  const ReferenceCell& ref = ReferenceCell::get(mesh.dimension());
  const int n = mesh.dimension();
  const double weight = ref.unit_weight * mesh.cell_volume();
  Eigen::VectorXd local(ref.shape_count);
  Eigen::VectorXd grad(n);
  for (Eigen::Index c = 0; c < mesh.num_cells(); ++c) {
    // offsets from the first node, so constants are reproduced exactly
    const double base = coeffs[mesh.cells()(c, 0)];
    for (int a = 0; a < ref.shape_count; ++a) local[a] = coeffs[mesh.cells()(c, a)] - base;
    for (int q = 0; q < ref.points; ++q) {
      const double value = base + ref.shape.row(q).dot(local);
      for (int d = 0; d < n; ++d) grad[d] = ref.grad[d].row(q).dot(local) / mesh.spacing()[d];
      f(c, q, value, grad, weight);
    }
  }
}

// ---------------------------------------------------------------------------
// Problem data and assembly

struct ProblemParams {
  int N = 3;
  double p = 2.0;
  double q = 4.0;
  double lambda = 0.0;
  Norm<double> norm = Norm<double>::euclidean(3);

  double critical_exponent() const { return p * N / (N - p); }
  /// N >= p^2 or N = p^2 - p + 1
  bool theorem_regime() const;
  /// p >= 2, p < N, p < q < p*, lambda >= 0, norm dimension N.
  void validate() const;
};

struct EnergyTerms {
  double gradient = 0;  // int H(grad u)^p
  double p_term = 0;    // int |u|^p
  double q_term = 0;    // int (u+)^q
  double critical = 0;  // int (u+)^{p*}
};

struct EnergyReport {
  double J = 0;
  EnergyTerms terms;
  double residual_sup = 0;
  double residual_dual = 0;  // sqrt(r^T K^{-1} r), K = mass + stiffness
  double min_u = 0;
  double max_u = 0;
  double norm = 0;  // (int H(grad u)^p + |u|^p)^{1/p}
};

/// Euclidean H^1 Riesz map: mass + stiffness, factorized once per mesh.
class SobolevPreconditioner {
 public:
  explicit SobolevPreconditioner(const Mesh& mesh);

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  double dual_norm(const Eigen::VectorXd& r) const;
  /// (u^T K u)^{1/2}
  double primal_norm(const Eigen::VectorXd& u) const;
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

 private:
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

EnergyTerms energy_terms(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u);
double energy_value(const ProblemParams& params, const EnergyTerms& terms);
double energy(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u);

/// <r, v> = J'(u) v for every nodal basis function v.
Eigen::VectorXd assemble_residual(const ProblemParams& params, const Mesh& mesh,
                                  const Eigen::VectorXd& u);
GridFunction assemble_residual(const ProblemParams& params, const GridFunction& u);

/// Full report; the dual residual norm uses `preconditioner` when given and
/// builds one otherwise.
EnergyReport assemble_energy(const ProblemParams& params, const GridFunction& u,
                             const SobolevPreconditioner* preconditioner = nullptr);

double anisotropic_norm(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u);
double anisotropic_norm(const ProblemParams& params, const GridFunction& u);

}  // namespace anisocrit

#endif  // ANISOCRIT_DISCRETIZATION_HPP
