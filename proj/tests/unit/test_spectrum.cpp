#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "mctdhf/spectrum.hpp"

using namespace mctdhf;

namespace {
std::size_t peak(const Spectrum& s) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < s.intensity.size(); ++i)
    if (s.intensity[i] > s.intensity[k]) k = i;
  return k;
}
}  // namespace

TEST_CASE("a cosine gives a sharp peak at its frequency") {
  const double dt = 0.1, w0 = 2.0 * kPi * 25.0 / (1024 * dt);
  std::vector<double> x(1024);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(w0 * dt * i);
  for (auto q : {SpectrumQuantity::dipole, SpectrumQuantity::acceleration}) {
    const Spectrum s = hhg_spectrum(x, dt, SpectrumWindow::hann, q);
    CHECK(s.omega.size() == 513);
    const std::size_t k = peak(s);
    CHECK(k == 25);
    CHECK(s.omega[k] == doctest::Approx(w0));
    CHECK(s.intensity[k] == 1.0);
    // far from the line the leakage is at least 40 dB down
    for (std::size_t i = 0; i < s.intensity.size(); ++i)
      if (i + 5 < k || i > k + 5) CHECK(s.intensity[i] < 1e-4);
  }
}

TEST_CASE("degenerate inputs") {
  const std::vector<double> z(32, 0.0);
  const Spectrum s = hhg_spectrum(z, 0.1);
  for (double v : s.intensity) CHECK(v == 0.0);
  CHECK_THROWS_AS(hhg_spectrum(std::vector<double>(7, 1.0), 0.1), TooFewSamples);
  CHECK_THROWS_AS(parse_window("blackman"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("jerk"), ConfigError);
  CHECK(parse_window("none") == SpectrumWindow::none);
  CHECK(parse_quantity("velocity") == SpectrumQuantity::velocity);
}

TEST_CASE("harmonic column") {
  std::vector<double> x(16);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.5 * i);
  const Spectrum s = hhg_spectrum(x, 1.0, SpectrumWindow::none, SpectrumQuantity::dipole);
  std::ostringstream os;
  write_spectrum(os, s, s.omega[1]);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double w, i, h;
    ls >> w >> h >> i;
    CHECK(h == doctest::Approx(static_cast<double>(rows)));
    ++rows;
  }
  CHECK(rows == 9);
}
