#include "mctdhf/observables.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "mctdhf/parallel.hpp"

namespace mctdhf {

namespace {

constexpr const char* kAxes = "xyz";

std::vector<int> occupied(std::uint64_t s) {
  std::vector<int> out;
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

// X(I, J) = det S[occ(I), occ(J)] over all strings of one spin.
CMat string_overlaps(const StringSpace& ss, const CMat& s) {
  const int n = ss.size();
  CMat x(n, n);
  if (ss.n_electrons() == 0) {
    x.setOnes();
    return x;
  }
  std::vector<std::vector<int>> occ;
  for (int i = 0; i < n; ++i) occ.push_back(occupied(ss.string(i)));
  const int k = ss.n_electrons();
  CMat sub(k, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = s(occ[i][a], occ[j][b]);
      x(i, j) = sub.determinant();
    }
  return x;
}

}  // namespace

cplx wavefunction_overlap(const Model& model, const WaveFunction& a, const WaveFunction& b) {
  const int m = model.n_orbitals();
  CMat s(m, m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      s(p, q) = model.inner(a.orbitals[static_cast<std::size_t>(p)], b.orbitals[static_cast<std::size_t>(q)]);
  const DeterminantSpace& dets = model.determinants();
  const CMat xa = string_overlaps(dets.alpha(), s);
  const CMat xb = string_overlaps(dets.beta(), s);
  const int na = dets.alpha().size(), nb = dets.beta().size();
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> ca(a.ci.data(), na, nb);
  const Eigen::Map<const RowMat> cb(b.ci.data(), na, nb);
  const CMat t = xa * cb * xb.transpose();
  return (ca.conjugate().cwiseProduct(t)).sum();
}

ObservableRecord observables_step(const Model& model, const FrozenCoupling& fc, const WaveFunction& initial) {
  ObservableRecord rec;
  rec.t = fc.time();
  rec.norm = fc.ci().norm();
  rec.energy = fc.total_energy();
  const int m = model.n_orbitals();
  const int dim = model.space().dim();
  const FeSpace& space = model.space();
  const RSparse& e = space.expand_free();
  const RVec& w = space.raw_weights();
  const CMat& d = fc.d();

  std::vector<CVec> raw;
  for (const auto& phi : fc.orbitals()) raw.push_back(e * phi);
  const cplx trace = d.trace();
  for (int a = 0; a < dim; ++a) {
    const RVec& x = model.coordinates()[static_cast<std::size_t>(a)];
    const RVec wx = w.cwiseProduct(x);
    cplx dip = 0.0, vel = 0.0;
    for (int p = 0; p < m; ++p) {
      CVec gp(fc.orbitals()[0].size());
      parallel::multiply(model.operators().gradient[static_cast<std::size_t>(a)], fc.orbitals()[static_cast<std::size_t>(p)], gp);
      for (int q = 0; q < m; ++q) {
        // <phi_q | O | phi_p> weighted by D(p, q)
        const cplx xqp = (raw[static_cast<std::size_t>(q)].conjugate().array() * wx.cast<cplx>().array() *
                          raw[static_cast<std::size_t>(p)].array()).sum();
        const cplx gqp = -kI * parallel::dot(fc.orbitals()[static_cast<std::size_t>(q)], gp);
        dip += d(p, q) * xqp;
        vel += d(p, q) * gqp;
      }
    }
    rec.dipole[a] = dip.real();
    rec.velocity[a] = vel.real() + trace.real() * fc.vector_potential()[a];
  }
  WaveFunction now{fc.orbitals(), fc.ci()};
  rec.overlap = wavefunction_overlap(model, initial, now);
  return rec;
}

void write_observable_header(std::ostream& os, int dim) {
  os << "# t[au] norm ReE[hartree] ImE[hartree]";
  for (int a = 0; a < dim; ++a) os << " d_" << kAxes[a] << "[bohr]";
  for (int a = 0; a < dim; ++a) os << " v_" << kAxes[a] << "[au]";
  os << " ReS ImS\n";
}

void write_observable_record(std::ostream& os, const ObservableRecord& rec, int dim) {
  os << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g}", rec.t, rec.norm, rec.energy.real(), rec.energy.imag());
  for (int a = 0; a < dim; ++a) os << fmt::format(" {:.17g}", rec.dipole[a]);
  for (int a = 0; a < dim; ++a) os << fmt::format(" {:.17g}", rec.velocity[a]);
  os << fmt::format(" {:.17g} {:.17g}\n", rec.overlap.real(), rec.overlap.imag());
}

int ObservableTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const std::string& c = columns[i];
    if (c == name || c.substr(0, c.find('[')) == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> ObservableTable::series(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ConfigError(fmt::format("column '{}' not found", name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

ObservableTable read_observables(std::istream& is) {
  ObservableTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      if (t.columns.empty()) {
        std::string tok;
        ls >> tok;  // '#'
        while (ls >> tok) t.columns.push_back(tok);
      }
      continue;
    }
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!t.columns.empty() && row.size() != t.columns.size())
      throw ConfigError(fmt::format("row with {} values, header has {} columns", row.size(), t.columns.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace mctdhf
