#include "anisocrit/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "anisocrit/error.hpp"

namespace anisocrit {

namespace {

constexpr double kGradientCutoff = 1e-14;

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Box: return "box";
    case DomainKind::HalfBall: return "half-ball";
    case DomainKind::Ball: return "ball";
    case DomainKind::ConeSector: return "cone-sector";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DomainSpec

DomainSpec DomainSpec::box(int dimension, double a, double b) {
  return box(Eigen::VectorXd::Constant(dimension, a), Eigen::VectorXd::Constant(dimension, b));
}

DomainSpec DomainSpec::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "box corners must have equal dimension");
  }
  if ((upper - lower).minCoeff() <= 0.0) throw Error(ErrorKind::InvalidArgument, "box must have b > a");
  DomainSpec d;
  d.kind = DomainKind::Box;
  d.dimension = static_cast<int>(lower.size());
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  return d;
}

DomainSpec DomainSpec::half_ball(int dimension, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  DomainSpec d;
  d.kind = DomainKind::HalfBall;
  d.dimension = dimension;
  d.radius = radius;
  return d;
}

DomainSpec DomainSpec::ball(int dimension, double radius) {
  DomainSpec d = half_ball(dimension, radius);
  d.kind = DomainKind::Ball;
  return d;
}

DomainSpec DomainSpec::cone_sector(int dimension, double radius, double opening) {
  if (!(opening > 0.0) || !(opening < 2.0 * std::numbers::pi)) {
    throw Error(ErrorKind::InvalidArgument, "cone opening must lie in (0, 2 pi)");
  }
  DomainSpec d = half_ball(dimension, radius);
  d.kind = DomainKind::ConeSector;
  d.opening = opening;
  return d;
}

bool DomainSpec::contains(const Eigen::VectorXd& x) const {
  const double last = x[dimension - 1];
  switch (kind) {
    case DomainKind::Box:
      return (x.array() > lower.array()).all() && (x.array() < upper.array()).all();
    case DomainKind::HalfBall:
      return x.norm() < radius && last > 0.0;
    case DomainKind::Ball:
      return x.norm() < radius;
    case DomainKind::ConeSector: {
      const double r = x.norm();
      return r < radius && r > 0.0 && last > r * std::cos(opening / 2.0);
    }
  }
  return false;
}

Eigen::VectorXd DomainSpec::bounding_lower() const {
  if (kind == DomainKind::Box) return lower;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dimension, -radius);
  if (kind == DomainKind::HalfBall) lo[dimension - 1] = 0.0;
  if (kind == DomainKind::ConeSector) {
    const double half = opening / 2.0;
    if (half <= std::numbers::pi / 2.0) {
      lo.setConstant(-radius * std::sin(half));
      lo[dimension - 1] = 0.0;
    } else {
      lo[dimension - 1] = radius * std::cos(half);
    }
  }
  return lo;
}

Eigen::VectorXd DomainSpec::bounding_upper() const {
  if (kind == DomainKind::Box) return upper;
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(dimension, radius);
  if (kind == DomainKind::ConeSector && opening / 2.0 <= std::numbers::pi / 2.0) {
    hi.setConstant(radius * std::sin(opening / 2.0));
    hi[dimension - 1] = radius;
  }
  return hi;
}

std::optional<double> DomainSpec::exact_measure() const {
  switch (kind) {
    case DomainKind::Box:
      return (upper - lower).prod();
    case DomainKind::Ball:
      return unit_ball_volume(dimension) * std::pow(radius, dimension);
    case DomainKind::HalfBall:
      return 0.5 * unit_ball_volume(dimension) * std::pow(radius, dimension);
    case DomainKind::ConeSector:
      if (dimension == 2) return opening / 2.0 * radius * radius;
      if (dimension == 3) {
        return 2.0 * std::numbers::pi * (1.0 - std::cos(opening / 2.0)) * std::pow(radius, 3) / 3.0;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

Eigen::VectorXd DomainSpec::concentration_point() const {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dimension);
  if (kind == DomainKind::Box) {
    x0 = (lower + upper) / 2.0;
    x0[dimension - 1] = upper[dimension - 1];
  } else {
    x0[dimension - 1] = radius;
  }
  return x0;
}

std::vector<double> DomainSpec::curvatures() const {
  const double k = kind == DomainKind::Box ? 0.0 : 1.0 / radius;
  return std::vector<double>(static_cast<std::size_t>(dimension - 1), k);
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(int dimension, Eigen::VectorXd origin, Eigen::VectorXd spacing, Eigen::VectorXi counts,
           const std::vector<Eigen::VectorXi>& active_cells)
    : dim_(dimension), origin_(std::move(origin)), spacing_(std::move(spacing)), counts_(std::move(counts)) {
  if (dim_ < 1 || dim_ > 3) throw Error(ErrorKind::InvalidArgument, "mesh dimension must be 1, 2 or 3");
  if (origin_.size() != dim_ || spacing_.size() != dim_ || counts_.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "mesh: origin/spacing/counts dimension mismatch");
  }
  if (active_cells.empty()) throw Error(ErrorKind::EmptyDomain, "mesh has no active cells");

  Eigen::Index node_keys = 1;
  Eigen::Index cell_keys = 1;
  for (int d = 0; d < dim_; ++d) {
    node_keys *= counts_[d] + 1;
    cell_keys *= counts_[d];
  }
  node_of_key_.assign(static_cast<std::size_t>(node_keys), -1);
  cell_of_key_.assign(static_cast<std::size_t>(cell_keys), -1);

  // cells ordered by lattice key for a deterministic numbering
  std::vector<std::pair<Eigen::Index, Eigen::VectorXi>> sorted;
  sorted.reserve(active_cells.size());
  for (const auto& c : active_cells) {
    if (c.size() != dim_ || (c.array() < 0).any() || (c.array() >= counts_.array()).any()) {
      throw Error(ErrorKind::InvalidArgument, "mesh: cell lattice index out of range");
    }
    Eigen::Index key = 0;
    for (int d = dim_ - 1; d >= 0; --d) key = key * counts_[d] + c[d];
    sorted.emplace_back(key, c);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const auto& a, const auto& b) { return a.first == b.first; }),
               sorted.end());

  const int per_cell = nodes_per_cell();
  std::vector<bool> used(static_cast<std::size_t>(node_keys), false);
  Eigen::VectorXi corner(dim_);
  for (const auto& [key, c] : sorted) {
    for (int a = 0; a < per_cell; ++a) {
      for (int d = 0; d < dim_; ++d) corner[d] = c[d] + ((a >> d) & 1);
      used[static_cast<std::size_t>(lattice_key(corner))] = true;
    }
  }
  Eigen::Index count = 0;
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (used[k]) node_of_key_[k] = count++;
  }
  nodes_.resize(count, dim_);
  node_lattice_.resize(count, dim_);
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) continue;
    const Eigen::Index id = node_of_key_[k];
    Eigen::Index rest = static_cast<Eigen::Index>(k);
    for (int d = 0; d < dim_; ++d) {
      const int i = static_cast<int>(rest % (counts_[d] + 1));
      rest /= counts_[d] + 1;
      node_lattice_(id, d) = i;
      nodes_(id, d) = origin_[d] + i * spacing_[d];
    }
  }

  cells_.resize(static_cast<Eigen::Index>(sorted.size()), per_cell);
  cell_lattice_.resize(static_cast<Eigen::Index>(sorted.size()), dim_);
  std::vector<int> incidence(static_cast<std::size_t>(count), 0);
  for (std::size_t ci = 0; ci < sorted.size(); ++ci) {
    const auto& c = sorted[ci].second;
    cell_of_key_[static_cast<std::size_t>(sorted[ci].first)] = static_cast<Eigen::Index>(ci);
    cell_lattice_.row(static_cast<Eigen::Index>(ci)) = c.transpose();
    for (int a = 0; a < per_cell; ++a) {
      for (int d = 0; d < dim_; ++d) corner[d] = c[d] + ((a >> d) & 1);
      const Eigen::Index id = node_of_key_[static_cast<std::size_t>(lattice_key(corner))];
      cells_(static_cast<Eigen::Index>(ci), a) = static_cast<int>(id);
      ++incidence[static_cast<std::size_t>(id)];
    }
  }
  boundary_.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < incidence.size(); ++i) boundary_[i] = incidence[i] < per_cell;
}

Eigen::Index Mesh::lattice_key(const Eigen::VectorXi& idx) const {
  Eigen::Index key = 0;
  for (int d = dim_ - 1; d >= 0; --d) key = key * (counts_[d] + 1) + idx[d];
  return key;
}

std::optional<Eigen::Index> Mesh::find_node(const Eigen::VectorXi& lattice) const {
  if (lattice.size() != dim_ || (lattice.array() < 0).any() || (lattice.array() > counts_.array()).any()) {
    return std::nullopt;
  }
  const Eigen::Index id = node_of_key_[static_cast<std::size_t>(lattice_key(lattice))];
  if (id < 0) return std::nullopt;
  return id;
}

std::optional<Eigen::Index> Mesh::nearest_node(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "nearest_node: dimension mismatch");
  if (num_nodes() == 0) return std::nullopt;
  Eigen::Index best = 0;
  (nodes_.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return best;
}

std::optional<std::pair<Eigen::Index, Eigen::VectorXd>> Mesh::locate(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "locate: dimension mismatch");
  Eigen::VectorXi cell(dim_);
  Eigen::VectorXd local(dim_);
  for (int d = 0; d < dim_; ++d) {
    const double t = (x[d] - origin_[d]) / spacing_[d];
    if (t < 0.0 || t > counts_[d]) return std::nullopt;
    int i = static_cast<int>(std::floor(t));
    if (i == counts_[d]) --i;
    cell[d] = i;
    local[d] = t - i;
  }
  Eigen::Index key = 0;
  for (int d = dim_ - 1; d >= 0; --d) key = key * counts_[d] + cell[d];
  const Eigen::Index id = cell_of_key_[static_cast<std::size_t>(key)];
  if (id < 0) return std::nullopt;
  return std::make_pair(id, local);
}

bool Mesh::connected() const {
  const Eigen::Index n = num_cells();
  if (n == 0) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<Eigen::Index> queue{0};
  seen[0] = true;
  Eigen::Index reached = 1;
  while (!queue.empty()) {
    const Eigen::Index c = queue.front();
    queue.pop_front();
    for (int d = 0; d < dim_; ++d) {
      for (int step : {-1, 1}) {
        Eigen::VectorXi nb = cell_lattice_.row(c).transpose();
        nb[d] += step;
        if (nb[d] < 0 || nb[d] >= counts_[d]) continue;
        Eigen::Index key = 0;
        for (int e = dim_ - 1; e >= 0; --e) key = key * counts_[e] + nb[e];
        const Eigen::Index other = cell_of_key_[static_cast<std::size_t>(key)];
        if (other >= 0 && !seen[static_cast<std::size_t>(other)]) {
          seen[static_cast<std::size_t>(other)] = true;
          ++reached;
          queue.push_back(other);
        }
      }
    }
  }
  return reached == n;
}

std::shared_ptr<const Mesh> build_mesh(const DomainSpec& domain, int resolution) {
  if (resolution < 4) {
    throw Error(ErrorKind::InvalidArgument, "mesh resolution must be at least 4 cells per axis");
  }
  if (domain.dimension < 2 || domain.dimension > 3) {
    throw Error(ErrorKind::InvalidArgument, "mesh dimension must be 2 or 3");
  }
  const int n = domain.dimension;
  const Eigen::VectorXd lo = domain.bounding_lower();
  const Eigen::VectorXd hi = domain.bounding_upper();
  const Eigen::VectorXd h = (hi - lo) / resolution;
  const Eigen::VectorXi counts = Eigen::VectorXi::Constant(n, resolution);

  std::vector<Eigen::VectorXi> active;
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(n);
  Eigen::VectorXd center(n);
  for (;;) {
    for (int d = 0; d < n; ++d) center[d] = lo[d] + (idx[d] + 0.5) * h[d];
    if (domain.contains(center)) active.push_back(idx);
    int d = 0;
    while (d < n && ++idx[d] == resolution) idx[d++] = 0;
    if (d == n) break;
  }
  if (active.empty()) throw Error(ErrorKind::EmptyDomain, "no cell center lies inside the domain");
  auto mesh = std::make_shared<const Mesh>(n, lo, h, counts, active);
  if (!mesh->connected()) {
    throw Error(ErrorKind::DisconnectedDomain, "active cells do not form a connected region");
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw Error(ErrorKind::InvalidArgument, "grid function needs a mesh");
  if (values_.size() != mesh_->num_nodes()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient count must equal node count");
  }
}

GridFunction GridFunction::interpolate(std::shared_ptr<const Mesh> mesh,
                                       const std::function<double(const Eigen::VectorXd&)>& f) {
  Eigen::VectorXd v(mesh->num_nodes());
  for (Eigen::Index i = 0; i < mesh->num_nodes(); ++i) v[i] = f(mesh->node(i));
  return {std::move(mesh), std::move(v)};
}

GridFunction GridFunction::constant(std::shared_ptr<const Mesh> mesh, double c) {
  const Eigen::Index n = mesh->num_nodes();
  return {std::move(mesh), Eigen::VectorXd::Constant(n, c)};
}

std::optional<double> GridFunction::evaluate(const Eigen::VectorXd& x) const {
  const auto hit = mesh_->locate(x);
  if (!hit) return std::nullopt;
  const auto& [cell, local] = *hit;
  double sum = 0.0;
  for (int a = 0; a < mesh_->nodes_per_cell(); ++a) {
    double phi = 1.0;
    for (int d = 0; d < mesh_->dimension(); ++d) phi *= ((a >> d) & 1) ? local[d] : 1.0 - local[d];
    sum += phi * values_[mesh_->cells()(cell, a)];
  }
  return sum;
}

void write_grid_function(std::ostream& os, const GridFunction& u) {
  const Mesh& m = u.mesh();
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << m.dimension();
  for (int d = 0; d < m.dimension(); ++d) buf << ' ' << m.spacing()[d];
  for (int d = 0; d < m.dimension(); ++d) buf << ' ' << m.counts()[d];
  buf << ' ' << m.num_nodes() << '\n';
  for (Eigen::Index i = 0; i < m.num_nodes(); ++i) {
    for (int d = 0; d < m.dimension(); ++d) buf << m.nodes()(i, d) << ' ';
    buf << u.values()[i] << '\n';
  }
  os << buf.str();
}

namespace {

struct ParsedGrid {
  int dim = 0;
  Eigen::VectorXd spacing;
  Eigen::VectorXi counts;
  Eigen::MatrixXd coords;
  Eigen::VectorXd values;
};

ParsedGrid parse_grid(std::istream& is) {
  ParsedGrid g;
  std::string header;
  if (!std::getline(is, header)) throw Error(ErrorKind::Io, "grid function: missing header line");
  std::istringstream hs(header);
  hs >> g.dim;
  if (!hs || g.dim < 1 || g.dim > 3) throw Error(ErrorKind::Io, "grid function: bad dimension in header");
  g.spacing.resize(g.dim);
  g.counts.resize(g.dim);
  for (int d = 0; d < g.dim; ++d) hs >> g.spacing[d];
  for (int d = 0; d < g.dim; ++d) hs >> g.counts[d];
  Eigen::Index n = 0;
  hs >> n;
  if (!hs || n <= 0) throw Error(ErrorKind::Io, "grid function: malformed header `" + header + "`");
  g.coords.resize(n, g.dim);
  g.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < g.dim; ++d) is >> g.coords(i, d);
    is >> g.values[i];
    if (!is) {
      std::ostringstream os;
      os << "grid function: malformed node line " << i + 2;
      throw Error(ErrorKind::Io, os.str());
    }
  }
  return g;
}

}  // namespace

GridFunction read_grid_function(std::istream& is) {
  ParsedGrid g = parse_grid(is);
  const Eigen::VectorXd origin = g.coords.colwise().minCoeff().transpose();
  const Eigen::Index n = g.coords.rows();
  std::map<std::vector<int>, Eigen::Index> present;
  Eigen::VectorXi max_idx = Eigen::VectorXi::Zero(g.dim);
  std::vector<std::vector<int>> lattice(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<int> idx(static_cast<std::size_t>(g.dim));
    for (int d = 0; d < g.dim; ++d) {
      idx[static_cast<std::size_t>(d)] =
          static_cast<int>(std::lround((g.coords(i, d) - origin[d]) / g.spacing[d]));
      max_idx[d] = std::max(max_idx[d], idx[static_cast<std::size_t>(d)]);
    }
    present[idx] = i;
    lattice[static_cast<std::size_t>(i)] = idx;
  }
  const Eigen::VectorXi counts = max_idx.cwiseMax(1);
  std::vector<Eigen::VectorXi> cells;
  const int per_cell = 1 << g.dim;
  for (const auto& [idx, id] : present) {
    bool inside = true;
    for (int d = 0; d < g.dim; ++d) inside = inside && idx[static_cast<std::size_t>(d)] < counts[d];
    if (!inside) continue;
    bool complete = true;
    for (int a = 0; a < per_cell && complete; ++a) {
      std::vector<int> corner = idx;
      for (int d = 0; d < g.dim; ++d) corner[static_cast<std::size_t>(d)] += (a >> d) & 1;
      complete = present.count(corner) > 0;
    }
    if (complete) cells.push_back(Eigen::Map<const Eigen::VectorXi>(idx.data(), g.dim));
  }
  auto mesh = std::make_shared<const Mesh>(g.dim, origin, g.spacing, counts, cells);
  if (mesh->num_nodes() != n) {
    throw Error(ErrorKind::Io, "grid function: listed nodes do not form a cell union");
  }
  Eigen::VectorXd values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& idx = lattice[static_cast<std::size_t>(i)];
    const auto id = mesh->find_node(Eigen::Map<const Eigen::VectorXi>(idx.data(), g.dim));
    values[*id] = g.values[i];
  }
  return {mesh, values};
}

GridFunction read_grid_function(std::istream& is, std::shared_ptr<const Mesh> mesh) {
  ParsedGrid g = parse_grid(is);
  if (g.dim != mesh->dimension() || g.coords.rows() != mesh->num_nodes()) {
    throw Error(ErrorKind::Io, "grid function does not match the mesh (dimension or node count)");
  }
  const double scale = mesh->spacing().minCoeff();
  if ((g.coords - mesh->nodes()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorKind::Io, "grid function node coordinates do not match the mesh");
  }
  return {std::move(mesh), g.values};
}

// ---------------------------------------------------------------------------
// Reference cell

namespace {

ReferenceCell make_reference(int n) {
  ReferenceCell ref;
  ref.dimension = n;
  ref.points = 1 << n;
  ref.shape_count = 1 << n;
  ref.unit_weight = 1.0 / ref.points;
  const double g = 0.5 / std::sqrt(3.0);
  const double pts[2] = {0.5 - g, 0.5 + g};
  ref.shape.resize(ref.points, ref.shape_count);
  ref.grad.assign(static_cast<std::size_t>(n), Eigen::MatrixXd(ref.points, ref.shape_count));
  for (int q = 0; q < ref.points; ++q) {
    for (int a = 0; a < ref.shape_count; ++a) {
      double value = 1.0;
      for (int d = 0; d < n; ++d) {
        const double x = pts[(q >> d) & 1];
        value *= ((a >> d) & 1) ? x : 1.0 - x;
      }
      ref.shape(q, a) = value;
      for (int d = 0; d < n; ++d) {
        double dv = ((a >> d) & 1) ? 1.0 : -1.0;
        for (int e = 0; e < n; ++e) {
          if (e == d) continue;
          const double x = pts[(q >> e) & 1];
          dv *= ((a >> e) & 1) ? x : 1.0 - x;
        }
        ref.grad[static_cast<std::size_t>(d)](q, a) = dv;
      }
    }
  }
  return ref;
}

}  // namespace

const ReferenceCell& ReferenceCell::get(int dimension) {
  static const ReferenceCell cells[3] = {make_reference(1), make_reference(2), make_reference(3)};
  if (dimension < 1 || dimension > 3) throw Error(ErrorKind::InvalidArgument, "reference cell dimension");
  return cells[dimension - 1];
}

// ---------------------------------------------------------------------------
// Problem data

bool ProblemParams::theorem_regime() const {
  const double p2 = p * p;
  return N >= p2 || std::abs(N - (p2 - p + 1.0)) < 1e-12;
}

void ProblemParams::validate() const {
  std::ostringstream os;
  if (N < 2) os << "N must be >= 2";
  else if (!(p >= 2.0)) os << "p must satisfy p >= 2";
  else if (!(p < N)) os << "p must satisfy p < N";
  else if (!(q > p) || !(q < critical_exponent())) os << "q must satisfy p < q < p*";
  else if (!(lambda >= 0.0)) os << "lambda must be >= 0";
  else if (norm.dimension() != N) os << "norm dimension must equal N";
  const std::string msg = os.str();
  if (!msg.empty()) throw Error(ErrorKind::InvalidArgument, msg);
}

// ---------------------------------------------------------------------------
// Assembly

SobolevPreconditioner::SobolevPreconditioner(const Mesh& mesh) {
  const ReferenceCell& ref = ReferenceCell::get(mesh.dimension());
  const int k = ref.shape_count;
  const double w = ref.unit_weight * mesh.cell_volume();
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(k, k);
  for (int q = 0; q < ref.points; ++q) {
    local += w * ref.shape.row(q).transpose() * ref.shape.row(q);
    for (int d = 0; d < mesh.dimension(); ++d) {
      const double s = 1.0 / (mesh.spacing()[d] * mesh.spacing()[d]);
      local += w * s * ref.grad[static_cast<std::size_t>(d)].row(q).transpose() *
               ref.grad[static_cast<std::size_t>(d)].row(q);
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_cells() * k * k));
  for (Eigen::Index c = 0; c < mesh.num_cells(); ++c) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        triplets.emplace_back(mesh.cells()(c, a), mesh.cells()(c, b), local(a, b));
      }
    }
  }
  matrix_.resize(mesh.num_nodes(), mesh.num_nodes());
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  solver_.compute(matrix_);
  if (solver_.info() != Eigen::Success) {
    throw Error(ErrorKind::NonConvergence, "failed to factorize the H^1 preconditioner");
  }
}

Eigen::VectorXd SobolevPreconditioner::apply(const Eigen::VectorXd& r) const { return solver_.solve(r); }

double SobolevPreconditioner::dual_norm(const Eigen::VectorXd& r) const {
  return std::sqrt(std::max(0.0, r.dot(apply(r))));
}

double SobolevPreconditioner::primal_norm(const Eigen::VectorXd& u) const {
  return std::sqrt(std::max(0.0, u.dot(matrix_ * u)));
}

EnergyTerms energy_terms(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u) {
  if (mesh.dimension() != params.N) {
    throw Error(ErrorKind::DimensionMismatch, "problem dimension differs from mesh dimension");
  }
  if (u.size() != mesh.num_nodes()) throw Error(ErrorKind::DimensionMismatch, "coefficient count");
  const double p = params.p;
  const double q = params.q;
  const double ps = params.critical_exponent();
  EnergyTerms t;
  for_each_quadrature_point(mesh, u, [&](Eigen::Index, int, double value, const Eigen::VectorXd& grad,
                                         double w) {
    if (grad.norm() >= kGradientCutoff) t.gradient += w * std::pow(params.norm.value(grad), p);
    t.p_term += w * std::pow(std::abs(value), p);
    const double up = positive_part(value);
    if (up > 0.0) {
      t.q_term += w * std::pow(up, q);
      t.critical += w * std::pow(up, ps);
    }
  });
  return t;
}

double energy_value(const ProblemParams& params, const EnergyTerms& t) {
  return (t.gradient + t.p_term) / params.p - params.lambda / params.q * t.q_term -
         t.critical / params.critical_exponent();
}

double energy(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u) {
  return energy_value(params, energy_terms(params, mesh, u));
}

Eigen::VectorXd assemble_residual(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u) {
  if (mesh.dimension() != params.N) {
    throw Error(ErrorKind::DimensionMismatch, "problem dimension differs from mesh dimension");
  }
  if (u.size() != mesh.num_nodes()) throw Error(ErrorKind::DimensionMismatch, "coefficient count");
  const ReferenceCell& ref = ReferenceCell::get(mesh.dimension());
  const int n = mesh.dimension();
  const int k = ref.shape_count;
  const double p = params.p;
  const double q = params.q;
  const double ps = params.critical_exponent();
  const double w = ref.unit_weight * mesh.cell_volume();

  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_nodes());
  Eigen::VectorXd local(k);
  Eigen::VectorXd contrib(k);
  Eigen::VectorXd grad(n);
  for (Eigen::Index c = 0; c < mesh.num_cells(); ++c) {
    const double base = u[mesh.cells()(c, 0)];
    for (int a = 0; a < k; ++a) local[a] = u[mesh.cells()(c, a)] - base;
    contrib.setZero();
    for (int qp = 0; qp < ref.points; ++qp) {
      const double value = base + ref.shape.row(qp).dot(local);
      for (int d = 0; d < n; ++d) {
        grad[d] = ref.grad[static_cast<std::size_t>(d)].row(qp).dot(local) / mesh.spacing()[d];
      }
      // zeroth-order part: |u|^{p-2} u - lambda (u+)^{q-1} - (u+)^{p*-1}
      const double up = positive_part(value);
      double source = std::pow(std::abs(value), p - 1.0) * (value < 0.0 ? -1.0 : 1.0);
      if (up > 0.0) source -= params.lambda * std::pow(up, q - 1.0) + std::pow(up, ps - 1.0);
      contrib += (w * source) * ref.shape.row(qp).transpose();
      if (grad.norm() >= kGradientCutoff) {
        const Eigen::VectorXd flux = operator_map(params.norm, p, grad);
        for (int d = 0; d < n; ++d) {
          contrib += (w * flux[d] / mesh.spacing()[d]) *
                     ref.grad[static_cast<std::size_t>(d)].row(qp).transpose();
        }
      }
    }
    for (int a = 0; a < k; ++a) r[mesh.cells()(c, a)] += contrib[a];
  }
  return r;
}

GridFunction assemble_residual(const ProblemParams& params, const GridFunction& u) {
  return u.with_values(assemble_residual(params, u.mesh(), u.values()));
}

EnergyReport assemble_energy(const ProblemParams& params, const GridFunction& u,
                             const SobolevPreconditioner* preconditioner) {
  EnergyReport rep;
  rep.terms = energy_terms(params, u.mesh(), u.values());
  rep.J = energy_value(params, rep.terms);
  const Eigen::VectorXd r = assemble_residual(params, u.mesh(), u.values());
  rep.residual_sup = r.cwiseAbs().maxCoeff();
  if (preconditioner) {
    rep.residual_dual = preconditioner->dual_norm(r);
  } else {
    rep.residual_dual = SobolevPreconditioner(u.mesh()).dual_norm(r);
  }
  rep.min_u = u.values().minCoeff();
  rep.max_u = u.values().maxCoeff();
  rep.norm = std::pow(rep.terms.gradient + rep.terms.p_term, 1.0 / params.p);
  return rep;
}

double anisotropic_norm(const ProblemParams& params, const Mesh& mesh, const Eigen::VectorXd& u) {
  const EnergyTerms t = energy_terms(params, mesh, u);
  return std::pow(t.gradient + t.p_term, 1.0 / params.p);
}

double anisotropic_norm(const ProblemParams& params, const GridFunction& u) {
  return anisotropic_norm(params, u.mesh(), u.values());
}

}  // namespace anisocrit
