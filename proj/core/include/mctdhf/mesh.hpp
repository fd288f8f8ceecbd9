#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "mctdhf/common.hpp"

namespace mctdhf {

/// Axis-aligned simulation box in bohr; only the first `dim` axes are used.
struct SimulationBox {
  int dim = 3;
  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
};

/// Node of the refinement tree. `index` is the integer position of the cell
/// on the uniform lattice of its level.
struct Cell {
  int level = 0;
  std::array<std::int64_t, 3> index{0, 0, 0};
  int parent = -1;
  int first_child = -1;  ///< children are stored contiguously

  bool is_leaf() const { return first_child < 0; }
};

struct RefinementPolicy {
  double threshold = std::numeric_limits<double>::infinity();
  double min_size = 0.0;
  double max_size = std::numeric_limits<double>::infinity();
  int max_passes = 32;
  /// Polynomial degree of the interpolant fed to the error indicator.
  int order = 1;
  /// Refinement aborts with BudgetExceeded when the leaf count exceeds this.
  std::size_t max_leaves = 5'000'000;
};

/// Hierarchical 2^d-tree of cubic cells with face adjacency queries.
///
/// Cells are never removed. The leaf list is kept in depth-first order (root
/// cells lexicographically with axis 0 fastest, children in Morton order), so
/// two meshes built by the same sequence of operations enumerate their leaves
/// identically.
class Mesh {
 public:
  static Mesh build_uniform(const SimulationBox& box, double coarse_size);

  int dim() const { return box_.dim; }
  const SimulationBox& box() const { return box_; }
  double coarse_size() const { return coarse_size_; }
  const std::array<std::int64_t, 3>& coarse_counts() const { return n_coarse_; }

  const Cell& cell(int id) const { return cells_[static_cast<std::size_t>(id)]; }
  std::size_t n_cells() const { return cells_.size(); }
  std::span<const int> leaves() const { return leaves_; }
  std::size_t n_leaves() const { return leaves_.size(); }
  /// Position of a cell id in leaves(), or -1 for interior tree nodes.
  int leaf_position(int id) const { return leaf_pos_[static_cast<std::size_t>(id)]; }

  double size(int id) const;
  Point anchor(int id) const;
  int max_level() const;

  /// Cell id at (level, index), or -1 when that cell has not been created.
  int find(int level, const std::array<std::int64_t, 3>& index) const;

  /// Leaves sharing (part of) the face of `leaf` normal to `axis` on `side`
  /// (-1 or +1). Empty on the box boundary. The result is either one leaf of
  /// the same or a coarser level, or several finer leaves.
  std::vector<int> face_neighbors(int leaf, int axis, int side) const;

  /// Leaf containing `p`, or -1 outside the box. Points on a shared face go
  /// to the upper cell except on the upper box boundary.
  int locate(const Point& p) const;

  /// Splits the given leaves into 2^d children each.
  void refine(std::span<const int> leaf_ids);

  /// Refines until face-adjacent leaves differ by at most one level.
  void balance();
  bool is_balanced() const;

  void write_text(std::ostream& os) const;
  void write_vtk(std::ostream& os) const;

  bool same_leaves(const Mesh& other) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 4>& k) const noexcept;
  };

  void rebuild_leaves();
  std::array<std::int64_t, 4> key(int level, const std::array<std::int64_t, 3>& index) const;
  void collect_face_leaves(int id, int axis, int child_bit, std::vector<int>& out) const;

  SimulationBox box_;
  double coarse_size_ = 1.0;
  std::array<std::int64_t, 3> n_coarse_{1, 1, 1};
  std::vector<Cell> cells_;
  std::vector<int> roots_;
  std::vector<int> leaves_;
  std::vector<int> leaf_pos_;
  std::unordered_map<std::array<std::int64_t, 4>, int, KeyHash> lookup_;
};

/// Per-leaf tensor-product Lagrange interpolant on Gauss-Lobatto nodes. Values
/// of leaf i (in Mesh::leaves() order) start at i * (order+1)^dim, axis 0
/// fastest. Each leaf interpolates independently, so the field may be
/// discontinuous across faces with a level change.
struct CellField {
  int order = 1;
  std::vector<double> values;
};

CellField interpolate(const Mesh& mesh, int order, const std::function<double(const Point&)>& f);

/// Kelly's face-jump error indicator, one value per leaf:
/// eta_K^2 = sum_F (h_F / 24) * integral_F [du/dn]^2, with h_F the diameter of
/// the smaller face (the smaller cell size in 1D). Box-boundary faces
/// contribute nothing.
std::vector<double> kelly_indicator(const Mesh& mesh, const CellField& field);

/// Repeats interpolate -> indicate -> split -> balance until no leaf is marked
/// or max_passes is reached. Leaves larger than policy.max_size are split first.
Mesh refine_adapt(Mesh mesh, const std::function<double(const Point&)>& target,
                  const RefinementPolicy& policy);

}  // namespace mctdhf
