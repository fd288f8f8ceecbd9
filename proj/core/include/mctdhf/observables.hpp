#pragma once

#include <iosfwd>
#include <vector>

#include "mctdhf/eom.hpp"
#include "mctdhf/model.hpp"

namespace mctdhf {

struct ObservableRecord {
  double t = 0.0;
  double norm = 0.0;  ///< |C|
  cplx energy = 0.0;
  Point dipole{0.0, 0.0, 0.0};
  Point velocity{0.0, 0.0, 0.0};  ///< <-i grad> + N A(t)
  cplx overlap = 0.0;             ///< <Psi(0)|Psi(t)>
};

/// <Psi_a|Psi_b> for two wave functions in the same determinant space with
/// possibly different orbitals.
cplx wavefunction_overlap(const Model& model, const WaveFunction& a, const WaveFunction& b);

/// One record from the snapshot fc (frozen from the current wave function).
ObservableRecord observables_step(const Model& model, const FrozenCoupling& fc, const WaveFunction& initial);

/// Columnar text, one line per record, all values printed with 17 digits.
void write_observable_header(std::ostream& os, int dim);
void write_observable_record(std::ostream& os, const ObservableRecord& rec, int dim);

/// Named columns of an observable file.
struct ObservableTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  ///< -1 when absent
  std::vector<double> series(const std::string& name) const;
};

ObservableTable read_observables(std::istream& is);

}  // namespace mctdhf
