#include "mctdhf/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace mctdhf {

namespace {

constexpr std::uint64_t kInteriorTag = 1ull << 63;

using NodeKey = std::array<std::uint64_t, 3>;

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto v : k) {
      h ^= v;
      h *= 0x100000001b3ull;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

bool EcsConfig::active() const {
  if (theta == 0.0) return false;
  for (double r : r0)
    if (std::isfinite(r)) return true;
  return false;
}

std::span<const int> FeSpace::cell_nodes(std::size_t leaf_pos) const {
  return {cell_nodes_.data() + leaf_pos * static_cast<std::size_t>(per_cell_),
          static_cast<std::size_t>(per_cell_)};
}

std::array<cplx, 3> FeSpace::complex_coordinate(const Point& x) const {
  std::array<cplx, 3> z{x[0], x[1], x[2]};
  if (!ecs_.active()) return z;
  const cplx e = std::polar(1.0, ecs_.theta);
  for (int a = 0; a < dim(); ++a) {
    const double r = ecs_.r0[static_cast<std::size_t>(a)];
    if (!std::isfinite(r)) continue;
    if (x[a] > r) z[a] = r + e * (x[a] - r);
    if (x[a] < -r) z[a] = -r + e * (x[a] + r);
  }
  return z;
}

void FeSpace::local_values(std::size_t leaf_pos, const Point& x, double* out) const {
  const int leaf = mesh_->leaves()[leaf_pos];
  const Point a = mesh_->anchor(leaf);
  const double h = mesh_->size(leaf);
  const int n = order_ + 1;
  for (int ax = 0; ax < dim(); ++ax) {
    const double xi = std::clamp(2.0 * (x[ax] - a[ax]) / h - 1.0, -1.0, 1.0);
    basis_.values(xi, out + ax * n);
  }
}

FeSpace FeSpace::build(std::shared_ptr<const Mesh> mesh, int order,
                       const std::optional<EcsConfig>& ecs) {
  if (order < 1 || order > 15) throw ConfigError(fmt::format("polynomial order {} not in 1..15", order));
  FeSpace s;
  s.mesh_ = std::move(mesh);
  s.order_ = order;
  const Mesh& m = *s.mesh_;
  const int d = m.dim();
  const int n = order + 1;
  s.per_cell_ = 1;
  for (int a = 0; a < d; ++a) s.per_cell_ *= n;
  s.rule_ = gauss_lobatto(n);
  s.basis_ = LagrangeBasis(s.rule_.nodes);
  if (ecs) s.ecs_ = *ecs;

  const auto& dm = s.basis_.derivative_matrix();
  s.s1d_.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int q = 0; q < n; ++q) acc += s.rule_.weights[q] * dm[q * n + j] * dm[q * n + k];
      s.s1d_[j * n + k] = acc;
    }

  const int lmax = m.max_level();
  // Nodes at cell ends and (for even order) cell midpoints live on the
  // half-cell lattice of the finest level; all other nodes are keyed by the
  // owning cell line so that only same-level neighbours share them.
  const double lattice_h = std::ldexp(m.coarse_size(), -lmax) * 0.5;
  auto axis_key = [&](int level, std::int64_t idx, int j) -> std::uint64_t {
    const auto sc = static_cast<std::uint64_t>(1) << (lmax - level);
    if (j == 0) return 2 * static_cast<std::uint64_t>(idx) * sc;
    if (j == order) return 2 * static_cast<std::uint64_t>(idx + 1) * sc;
    if (order % 2 == 0 && 2 * j == order) return (2 * static_cast<std::uint64_t>(idx) + 1) * sc;
    return kInteriorTag | (static_cast<std::uint64_t>(level) << 56) |
           (static_cast<std::uint64_t>(idx) << 8) | static_cast<std::uint64_t>(j);
  };
  auto axis_coord = [&](int a, int level, std::int64_t idx, int j, std::uint64_t key) {
    if (!(key & kInteriorTag)) return m.box().lo[a] + static_cast<double>(key) * lattice_h;
    const double h = std::ldexp(m.coarse_size(), -level);
    return m.box().lo[a] + (static_cast<double>(idx) + 0.5 * (s.rule_.nodes[j] + 1.0)) * h;
  };

  const std::size_t nleaf = m.n_leaves();
  s.cell_nodes_.resize(nleaf * static_cast<std::size_t>(s.per_cell_));
  std::unordered_map<NodeKey, int, NodeKeyHash> lookup;
  lookup.reserve(nleaf * static_cast<std::size_t>(s.per_cell_));
  std::vector<std::array<bool, 3>> on_boundary;

  for (std::size_t li = 0; li < nleaf; ++li) {
    const Cell& c = m.cell(m.leaves()[li]);
    for (int k = 0; k < s.per_cell_; ++k) {
      NodeKey key{0, 0, 0};
      Point x{0.0, 0.0, 0.0};
      std::array<bool, 3> bnd{false, false, false};
      int rem = k;
      for (int a = 0; a < d; ++a) {
        const int j = rem % n;
        rem /= n;
        key[a] = axis_key(c.level, c.index[a], j);
        x[a] = axis_coord(a, c.level, c.index[a], j, key[a]);
        const auto top = 2 * static_cast<std::uint64_t>(m.coarse_counts()[a]) << lmax;
        bnd[a] = !(key[a] & kInteriorTag) && (key[a] == 0 || key[a] == top);
      }
      auto [it, inserted] = lookup.emplace(key, static_cast<int>(s.points_.size()));
      if (inserted) {
        s.points_.push_back(x);
        on_boundary.push_back(bnd);
      }
      s.cell_nodes_[li * s.per_cell_ + k] = it->second;
    }
  }
  const std::size_t nraw = s.points_.size();

  // Hanging nodes: nodes of a fine face that the coarser neighbour does not own.
  std::vector<int> slave_slot(nraw, -1);
  std::vector<double> vals(static_cast<std::size_t>(3 * n));
  for (std::size_t li = 0; li < nleaf; ++li) {
    const int fine = m.leaves()[li];
    for (int a = 0; a < d; ++a)
      for (int side : {-1, 1}) {
        const auto nb = m.face_neighbors(fine, a, side);
        if (nb.size() != 1 || m.cell(nb[0]).level >= m.cell(fine).level) continue;
        const auto cpos = static_cast<std::size_t>(m.leaf_position(nb[0]));
        const auto coarse_nodes = s.cell_nodes(cpos);
        const int jface = side > 0 ? order : 0;
        for (int k = 0; k < s.per_cell_; ++k) {
          int ja = k;
          for (int b = 0; b < a; ++b) ja /= n;
          if (ja % n != jface) continue;
          const int r = s.cell_nodes_[li * s.per_cell_ + k];
          if (slave_slot[static_cast<std::size_t>(r)] >= 0) continue;
          if (std::find(coarse_nodes.begin(), coarse_nodes.end(), r) != coarse_nodes.end()) continue;
          Constraint con;
          con.slave = r;
          s.local_values(cpos, s.points_[static_cast<std::size_t>(r)], vals.data());
          for (int kc = 0; kc < s.per_cell_; ++kc) {
            double coeff = 1.0;
            int rem = kc;
            for (int b = 0; b < d; ++b) {
              coeff *= vals[static_cast<std::size_t>(b * n + rem % n)];
              rem /= n;
            }
            if (std::abs(coeff) > 1e-13) con.masters.emplace_back(coarse_nodes[static_cast<std::size_t>(kc)], coeff);
          }
          slave_slot[static_cast<std::size_t>(r)] = static_cast<int>(s.constraints_.size());
          s.constraints_.push_back(std::move(con));
        }
      }
  }

  // Resolve chains so every constraint references unconstrained nodes only.
  std::vector<char> state(s.constraints_.size(), 0);
  std::function<void(int)> close = [&](int ci) {
    if (state[static_cast<std::size_t>(ci)] == 2) return;
    if (state[static_cast<std::size_t>(ci)] == 1) throw Error("cyclic hanging-node constraints");
    state[static_cast<std::size_t>(ci)] = 1;
    std::map<int, double> acc;
    for (auto [raw, c] : s.constraints_[static_cast<std::size_t>(ci)].masters) {
      const int sub = slave_slot[static_cast<std::size_t>(raw)];
      if (sub < 0) {
        acc[raw] += c;
        continue;
      }
      close(sub);
      for (auto [raw2, c2] : s.constraints_[static_cast<std::size_t>(sub)].masters) acc[raw2] += c * c2;
    }
    auto& out = s.constraints_[static_cast<std::size_t>(ci)].masters;
    out.clear();
    for (auto [raw, c] : acc)
      if (std::abs(c) > 1e-13) out.emplace_back(raw, c);
    state[static_cast<std::size_t>(ci)] = 2;
  };
  for (std::size_t ci = 0; ci < s.constraints_.size(); ++ci) close(static_cast<int>(ci));

  s.class_.resize(nraw);
  s.master_.assign(nraw, -1);
  for (std::size_t r = 0; r < nraw; ++r) {
    const auto& b = on_boundary[r];
    if (slave_slot[r] >= 0)
      s.class_[r] = NodeClass::slave;
    else if (b[0] || b[1] || b[2])
      s.class_[r] = NodeClass::boundary;
    else
      s.class_[r] = NodeClass::free;
  }
  for (std::size_t r = 0; r < nraw; ++r)
    if (s.class_[r] == NodeClass::free) {
      s.master_[r] = static_cast<int>(s.raw_of_master_.size());
      s.raw_of_master_.push_back(static_cast<int>(r));
    }
  s.n_free_ = s.raw_of_master_.size();
  for (std::size_t r = 0; r < nraw; ++r)
    if (s.class_[r] == NodeClass::boundary) {
      s.master_[r] = static_cast<int>(s.raw_of_master_.size());
      s.raw_of_master_.push_back(static_cast<int>(r));
    }
  s.n_boundary_ = s.raw_of_master_.size() - s.n_free_;

  {
    std::vector<Eigen::Triplet<double>> tf, tb, ta;
    auto add = [&](int row, int raw_master, double c) {
      const int mi = s.master_[static_cast<std::size_t>(raw_master)];
      ta.emplace_back(row, mi, c);
      if (static_cast<std::size_t>(mi) < s.n_free_)
        tf.emplace_back(row, mi, c);
      else
        tb.emplace_back(row, mi - static_cast<int>(s.n_free_), c);
    };
    for (std::size_t r = 0; r < nraw; ++r) {
      if (slave_slot[r] < 0) {
        add(static_cast<int>(r), static_cast<int>(r), 1.0);
      } else {
        for (auto [raw, c] : s.constraints_[static_cast<std::size_t>(slave_slot[r])].masters)
          add(static_cast<int>(r), raw, c);
      }
    }
    const auto nr = static_cast<Eigen::Index>(nraw);
    s.e_free_.resize(nr, static_cast<Eigen::Index>(s.n_free_));
    s.e_boundary_.resize(nr, static_cast<Eigen::Index>(s.n_boundary_));
    s.e_all_.resize(nr, static_cast<Eigen::Index>(s.n_masters()));
    s.e_free_.setFromTriplets(tf.begin(), tf.end());
    s.e_boundary_.setFromTriplets(tb.begin(), tb.end());
    s.e_all_.setFromTriplets(ta.begin(), ta.end());
  }

  // ECS tagging per leaf and axis.
  s.cell_jac_.assign(nleaf * 3, cplx(1.0, 0.0));
  if (s.ecs_.active()) {
    if (!(s.ecs_.theta >= 0.0 && s.ecs_.theta < 0.5 * kPi))
      throw ConfigError(fmt::format("ECS angle {} outside [0, pi/2)", s.ecs_.theta));
    const cplx e = std::polar(1.0, s.ecs_.theta);
    for (int a = 0; a < d; ++a) {
      const double r = s.ecs_.r0[static_cast<std::size_t>(a)];
      if (!std::isfinite(r)) continue;
      if (!(r > 0.0 && -r > m.box().lo[a] && r < m.box().hi[a]))
        throw EcsMisaligned(fmt::format("ECS radius {} on axis {} is not inside the box", r, a));
    }
    for (std::size_t li = 0; li < nleaf; ++li) {
      const int id = m.leaves()[li];
      const Point an = m.anchor(id);
      const double h = m.size(id);
      for (int a = 0; a < d; ++a) {
        const double r = s.ecs_.r0[static_cast<std::size_t>(a)];
        if (!std::isfinite(r)) continue;
        const double lo = an[a], hi = an[a] + h;
        const double tol = 1e-10 * h;
        for (double surf : {-r, r})
          if (lo + tol < surf && surf < hi - tol)
            throw EcsMisaligned(
                fmt::format("ECS surface {} on axis {} cuts cell [{}, {}]", surf, a, lo, hi));
        if (hi <= -r + tol || lo >= r - tol) s.cell_jac_[li * 3 + static_cast<std::size_t>(a)] = e;
      }
    }
  }

  s.weights_ = RVec::Zero(static_cast<Eigen::Index>(nraw));
  s.cweights_ = CVec::Zero(static_cast<Eigen::Index>(nraw));
  for (std::size_t li = 0; li < nleaf; ++li) {
    const double h = m.size(m.leaves()[li]);
    for (int k = 0; k < s.per_cell_; ++k) {
      double w = 1.0;
      cplx jac = 1.0;
      int rem = k;
      for (int a = 0; a < d; ++a) {
        w *= 0.5 * h * s.rule_.weights[static_cast<std::size_t>(rem % n)];
        jac *= s.cell_jac_[li * 3 + static_cast<std::size_t>(a)];
        rem /= n;
      }
      const int r = s.cell_nodes_[li * s.per_cell_ + k];
      s.weights_[r] += w;
      s.cweights_[r] += w * jac;
    }
  }
  s.node_scale_ = CVec::Ones(static_cast<Eigen::Index>(nraw));
  for (Eigen::Index r = 0; r < s.node_scale_.size(); ++r)
    s.node_scale_[r] = std::sqrt(s.cweights_[r] / s.weights_[r]);

  spdlog::debug("fe space: order {}, {} raw nodes, {} free, {} boundary, {} hanging", order, nraw,
                s.n_free_, s.n_boundary_, s.constraints_.size());
  return s;
}

}  // namespace mctdhf
