#include "mctdhf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mctdhf/quadrature.hpp"

namespace mctdhf {

namespace {

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Interpolant evaluation helper: value and gradient of the leaf polynomial at
// a physical point.
struct CellEvaluator {
  int order;
  int dim;
  LagrangeBasis basis;

  CellEvaluator(int order_, int dim_)
      : order(order_), dim(dim_), basis(gauss_lobatto(order_ + 1).nodes) {}

  std::array<double, 3> gradient(const Mesh& mesh, int leaf, const double* coeff,
                                 const Point& x) const {
    const int n = order + 1;
    const double h = mesh.size(leaf);
    const Point a = mesh.anchor(leaf);
    double val[3][16], der[3][16];
    for (int ax = 0; ax < dim; ++ax) {
      const double xi = 2.0 * (x[ax] - a[ax]) / h - 1.0;
      basis.values(xi, val[ax]);
      basis.derivatives(xi, der[ax]);
      for (int j = 0; j < n; ++j) der[ax][j] *= 2.0 / h;
    }
    std::array<double, 3> g{0.0, 0.0, 0.0};
    const int total = ipow(n, dim);
    for (int k = 0; k < total; ++k) {
      int j[3] = {0, 0, 0};
      int rem = k;
      for (int ax = 0; ax < dim; ++ax) {
        j[ax] = rem % n;
        rem /= n;
      }
      for (int ax = 0; ax < dim; ++ax) {
        double t = coeff[k];
        for (int b = 0; b < dim; ++b) t *= (b == ax) ? der[b][j[b]] : val[b][j[b]];
        g[ax] += t;
      }
    }
    return g;
  }
};

}  // namespace

double SimulationBox::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent(a);
  return v;
}

std::size_t Mesh::KeyHash::operator()(const std::array<std::int64_t, 4>& k) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : k) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::array<std::int64_t, 4> Mesh::key(int level, const std::array<std::int64_t, 3>& index) const {
  return {level, index[0], index[1], index[2]};
}

Mesh Mesh::build_uniform(const SimulationBox& box, double coarse_size) {
  if (box.dim < 1 || box.dim > 3) throw ConfigError(fmt::format("dimension {} not in 1..3", box.dim));
  if (!(coarse_size > 0.0)) throw NonDivisibleExtent("coarse cell size must be positive");
  Mesh m;
  m.box_ = box;
  m.coarse_size_ = coarse_size;
  for (int a = 0; a < 3; ++a) {
    if (a >= box.dim) {
      m.box_.lo[a] = 0.0;
      m.box_.hi[a] = 0.0;
      m.n_coarse_[a] = 1;
      continue;
    }
    const double ext = box.extent(a);
    if (!(ext > 0.0)) throw NonDivisibleExtent(fmt::format("empty extent along axis {}", a));
    const double q = ext / coarse_size;
    const double r = std::round(q);
    if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q)) {
      throw NonDivisibleExtent(
          fmt::format("extent {} along axis {} is not a multiple of {}", ext, a, coarse_size));
    }
    m.n_coarse_[a] = static_cast<std::int64_t>(r);
  }
  for (std::int64_t k = 0; k < m.n_coarse_[2]; ++k)
    for (std::int64_t j = 0; j < m.n_coarse_[1]; ++j)
      for (std::int64_t i = 0; i < m.n_coarse_[0]; ++i) {
        Cell c;
        c.level = 0;
        c.index = {i, j, k};
        const int id = static_cast<int>(m.cells_.size());
        m.cells_.push_back(c);
        m.roots_.push_back(id);
        m.lookup_.emplace(m.key(0, c.index), id);
      }
  m.rebuild_leaves();
  return m;
}

double Mesh::size(int id) const { return std::ldexp(coarse_size_, -cell(id).level); }

Point Mesh::anchor(int id) const {
  const Cell& c = cell(id);
  const double h = size(id);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim(); ++a) p[a] = box_.lo[a] + static_cast<double>(c.index[a]) * h;
  return p;
}

int Mesh::max_level() const {
  int l = 0;
  for (int id : leaves_) l = std::max(l, cell(id).level);
  return l;
}

int Mesh::find(int level, const std::array<std::int64_t, 3>& index) const {
  auto it = lookup_.find(key(level, index));
  return it == lookup_.end() ? -1 : it->second;
}

void Mesh::collect_face_leaves(int id, int axis, int child_bit, std::vector<int>& out) const {
  const Cell& c = cell(id);
  if (c.is_leaf()) {
    out.push_back(id);
    return;
  }
  const int nchild = 1 << dim();
  for (int ch = 0; ch < nchild; ++ch) {
    if (((ch >> axis) & 1) != child_bit) continue;
    collect_face_leaves(c.first_child + ch, axis, child_bit, out);
  }
}

std::vector<int> Mesh::face_neighbors(int leaf, int axis, int side) const {
  std::vector<int> out;
  const Cell& c = cell(leaf);
  std::array<std::int64_t, 3> idx = c.index;
  idx[axis] += side;
  const std::int64_t extent = n_coarse_[axis] << c.level;
  if (idx[axis] < 0 || idx[axis] >= extent) return out;
  int level = c.level;
  while (level >= 0) {
    const int nb = find(level, idx);
    if (nb >= 0) {
      if (level == c.level) {
        // finer descendants touch our face with their opposite side
        collect_face_leaves(nb, axis, side > 0 ? 0 : 1, out);
      } else {
        out.push_back(nb);
      }
      return out;
    }
    for (int a = 0; a < 3; ++a) idx[a] >>= 1;
    --level;
  }
  return out;
}

int Mesh::locate(const Point& p) const {
  std::array<std::int64_t, 3> idx{0, 0, 0};
  for (int a = 0; a < dim(); ++a) {
    if (p[a] < box_.lo[a] || p[a] > box_.hi[a]) return -1;
    auto i = static_cast<std::int64_t>(std::floor((p[a] - box_.lo[a]) / coarse_size_));
    idx[a] = std::clamp<std::int64_t>(i, 0, n_coarse_[a] - 1);
  }
  int id = find(0, idx);
  while (id >= 0 && !cell(id).is_leaf()) {
    const Point a = anchor(id);
    const double half = 0.5 * size(id);
    int ch = 0;
    for (int ax = 0; ax < dim(); ++ax)
      if (p[ax] >= a[ax] + half) ch |= 1 << ax;
    id = cell(id).first_child + ch;
  }
  return id;
}

void Mesh::refine(std::span<const int> leaf_ids) {
  std::vector<int> ids(leaf_ids.begin(), leaf_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const int nchild = 1 << dim();
  for (int id : ids) {
    if (!cell(id).is_leaf()) continue;
    const int first = static_cast<int>(cells_.size());
    const Cell parent = cell(id);
    for (int ch = 0; ch < nchild; ++ch) {
      Cell c;
      c.level = parent.level + 1;
      c.parent = id;
      for (int a = 0; a < 3; ++a)
        c.index[a] = a < dim() ? 2 * parent.index[a] + ((ch >> a) & 1) : 0;
      cells_.push_back(c);
      lookup_.emplace(key(c.level, c.index), first + ch);
    }
    cells_[static_cast<std::size_t>(id)].first_child = first;
  }
  rebuild_leaves();
}

void Mesh::rebuild_leaves() {
  leaves_.clear();
  leaf_pos_.assign(cells_.size(), -1);
  const int nchild = 1 << dim();
  std::vector<int> stack;
  for (auto it = roots_.rbegin(); it != roots_.rend(); ++it) stack.push_back(*it);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const Cell& c = cell(id);
    if (c.is_leaf()) {
      leaf_pos_[static_cast<std::size_t>(id)] = static_cast<int>(leaves_.size());
      leaves_.push_back(id);
    } else {
      for (int ch = nchild - 1; ch >= 0; --ch) stack.push_back(c.first_child + ch);
    }
  }
}

void Mesh::balance() {
  for (;;) {
    std::vector<int> marked;
    for (int id : leaves_) {
      const int lvl = cell(id).level;
      for (int a = 0; a < dim(); ++a)
        for (int s : {-1, 1}) {
          auto nb = face_neighbors(id, a, s);
          if (nb.size() == 1 && cell(nb[0]).level < lvl - 1) marked.push_back(nb[0]);
        }
    }
    if (marked.empty()) return;
    refine(marked);
  }
}

bool Mesh::is_balanced() const {
  for (int id : leaves_) {
    const int lvl = cell(id).level;
    for (int a = 0; a < dim(); ++a)
      for (int s : {-1, 1})
        for (int nb : face_neighbors(id, a, s))
          if (std::abs(cell(nb).level - lvl) > 1) return false;
  }
  return true;
}

void Mesh::write_text(std::ostream& os) const {
  os << "# level";
  for (int a = 0; a < dim(); ++a) os << " anchor" << "xyz"[a];
  os << " size\n";
  for (int id : leaves_) {
    const Point p = anchor(id);
    os << cell(id).level;
    for (int a = 0; a < dim(); ++a) os << ' ' << fmt::format("{:.17g}", p[a]);
    os << ' ' << fmt::format("{:.17g}", size(id)) << '\n';
  }
}

void Mesh::write_vtk(std::ostream& os) const {
  const int ncorner = 1 << dim();
  const std::size_t nl = leaves_.size();
  os << "# vtk DataFile Version 3.0\nmctdhf mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nl * ncorner << " double\n";
  for (int id : leaves_) {
    const Point p = anchor(id);
    const double h = size(id);
    for (int c = 0; c < ncorner; ++c) {
      for (int a = 0; a < 3; ++a) {
        const double v = a < dim() ? p[a] + (((c >> a) & 1) ? h : 0.0) : 0.0;
        os << fmt::format("{:.17g}", v) << (a == 2 ? '\n' : ' ');
      }
    }
  }
  os << "CELLS " << nl << ' ' << nl * (ncorner + 1) << '\n';
  for (std::size_t i = 0; i < nl; ++i) {
    os << ncorner;
    for (int c = 0; c < ncorner; ++c) os << ' ' << i * ncorner + c;
    os << '\n';
  }
  const int type = dim() == 1 ? 3 : dim() == 2 ? 8 : 11;  // line, pixel, voxel
  os << "CELL_TYPES " << nl << '\n';
  for (std::size_t i = 0; i < nl; ++i) os << type << '\n';
  os << "CELL_DATA " << nl << "\nSCALARS level int 1\nLOOKUP_TABLE default\n";
  for (int id : leaves_) os << cell(id).level << '\n';
}

bool Mesh::same_leaves(const Mesh& other) const {
  if (dim() != other.dim() || n_leaves() != other.n_leaves()) return false;
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const Cell& a = cell(leaves_[i]);
    const Cell& b = other.cell(other.leaves_[i]);
    if (a.level != b.level || a.index != b.index) return false;
  }
  return box_.lo == other.box_.lo && box_.hi == other.box_.hi && coarse_size_ == other.coarse_size_;
}

CellField interpolate(const Mesh& mesh, int order, const std::function<double(const Point&)>& f) {
  const int n = order + 1;
  const int dim = mesh.dim();
  const int per = ipow(n, dim);
  const auto rule = gauss_lobatto(n);
  CellField field;
  field.order = order;
  field.values.resize(mesh.n_leaves() * static_cast<std::size_t>(per));
  std::size_t pos = 0;
  for (int id : mesh.leaves()) {
    const Point a = mesh.anchor(id);
    const double h = mesh.size(id);
    for (int k = 0; k < per; ++k) {
      Point x{0.0, 0.0, 0.0};
      int rem = k;
      for (int ax = 0; ax < dim; ++ax) {
        x[ax] = a[ax] + 0.5 * h * (rule.nodes[static_cast<std::size_t>(rem % n)] + 1.0);
        rem /= n;
      }
      field.values[pos++] = f(x);
    }
  }
  return field;
}

std::vector<double> kelly_indicator(const Mesh& mesh, const CellField& field) {
  const int dim = mesh.dim();
  const int per = ipow(field.order + 1, dim);
  const CellEvaluator eval(field.order, dim);
  const auto face_rule = gauss_lobatto(field.order + 2);
  const int nq = face_rule.size();
  const int nface_pts = ipow(nq, dim - 1);

  std::vector<double> eta(mesh.n_leaves(), 0.0);
  auto coeff = [&](int leaf) {
    return field.values.data() + static_cast<std::size_t>(mesh.leaf_position(leaf)) * per;
  };

  for (std::size_t li = 0; li < mesh.n_leaves(); ++li) {
    const int id = mesh.leaves()[li];
    double acc = 0.0;
    for (int axis = 0; axis < dim; ++axis)
      for (int side : {-1, 1}) {
        for (int nb : mesh.face_neighbors(id, axis, side)) {
          // integrate over the smaller of the two faces
          const int small = mesh.cell(nb).level > mesh.cell(id).level ? nb : id;
          const double hs = mesh.size(small);
          const Point as = mesh.anchor(small);
          const double hf = dim == 1 ? hs : hs * std::sqrt(static_cast<double>(dim - 1));
          // face plane coordinate: our face on `side`
          const Point ai = mesh.anchor(id);
          const double plane = ai[axis] + (side > 0 ? mesh.size(id) : 0.0);
          double integral = 0.0;
          for (int q = 0; q < nface_pts; ++q) {
            Point x{0.0, 0.0, 0.0};
            double w = 1.0;
            int rem = q;
            for (int ax = 0; ax < dim; ++ax) {
              if (ax == axis) {
                x[ax] = plane;
                continue;
              }
              const auto k = static_cast<std::size_t>(rem % nq);
              rem /= nq;
              x[ax] = as[ax] + 0.5 * hs * (face_rule.nodes[k] + 1.0);
              w *= 0.5 * hs * face_rule.weights[k];
            }
            const double jump = eval.gradient(mesh, id, coeff(id), x)[axis] -
                                eval.gradient(mesh, nb, coeff(nb), x)[axis];
            integral += w * jump * jump;
          }
          acc += hf / 24.0 * integral;
        }
      }
    eta[li] = std::sqrt(acc);
  }
  return eta;
}

Mesh refine_adapt(Mesh mesh, const std::function<double(const Point&)>& target,
                  const RefinementPolicy& policy) {
  if (policy.min_size > policy.max_size) throw ConfigError("min_size exceeds max_size");
  const double rel = 1e-12;
  auto check_cap = [&] {
    if (mesh.n_leaves() > policy.max_leaves) {
      throw BudgetExceeded(fmt::format("mesh has {} leaves, cap is {}", mesh.n_leaves(),
                                       policy.max_leaves));
    }
  };

  for (;;) {
    std::vector<int> big;
    for (int id : mesh.leaves())
      if (mesh.size(id) > policy.max_size * (1.0 + rel)) big.push_back(id);
    if (big.empty()) break;
    mesh.refine(big);
    check_cap();
  }
  mesh.balance();
  check_cap();

  if (!std::isfinite(policy.threshold)) return mesh;

  for (int pass = 0; pass < policy.max_passes; ++pass) {
    const CellField field = interpolate(mesh, policy.order, target);
    const auto eta = kelly_indicator(mesh, field);
    std::vector<int> marked;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      const int id = mesh.leaves()[i];
      if (eta[i] > policy.threshold && 0.5 * mesh.size(id) >= policy.min_size * (1.0 - rel))
        marked.push_back(id);
    }
    spdlog::debug("refine pass {}: {} leaves, {} marked", pass, mesh.n_leaves(), marked.size());
    if (marked.empty()) break;
    mesh.refine(marked);
    check_cap();
    mesh.balance();
    check_cap();
  }
  return mesh;
}

}  // namespace mctdhf
