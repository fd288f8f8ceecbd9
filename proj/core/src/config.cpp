#include "mctdhf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace mctdhf {

namespace pt = boost::property_tree;

std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Tracks which keys were consumed so that typos are reported.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(path(key)).has_value(); }
  bool has_section(const std::string& s) const { return tree_.get_child_optional(s).has_value(); }

  std::string raw(const std::string& key) {
    used_.insert(key);
    auto v = tree_.get_optional<std::string>(path(key));
    if (!v) throw ConfigError(fmt::format("missing required key '{}'", key));
    return trim(*v);
  }

  double number(const std::string& key) { return to_double(key, raw(key)); }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(fmt::format("'{}' must be an integer", key));
    return static_cast<int>(v);
  }
  int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = raw(key);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(fmt::format("'{}' must be a boolean, got '{}'", key, v));
  }

  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? raw(key) : fallback; }

  std::vector<double> list(const std::string& key) {
    const std::string v = raw(key);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [section, child] : tree_) {
      if (child.empty() && !child.data().empty())
        throw ConfigError(fmt::format("key '{}' outside of any section", section));
      for (const auto& [key, value] : child) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError(fmt::format("unknown key '{}'", full));
      }
    }
  }

 private:
  static pt::ptree::path_type path(const std::string& key) { return pt::ptree::path_type(key, '.'); }

  static double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (!s.empty() && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ConfigError(fmt::format("'{}': cannot parse '{}' as a number", key, s));
    return v;
  }

  const pt::ptree& tree_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Point to_point(const std::vector<double>& v, std::size_t offset, int dim) {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = v[offset + static_cast<std::size_t>(a)];
  return p;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("malformed configuration: {}", e.message()));
  }
  Reader in(tree);
  RunConfig cfg;
  cfg.text = text;
  ModelSpec& m = cfg.model;

  // system
  const int d = in.integer("system.dimension");
  require(d >= 1 && d <= 3, "system.dimension must be 1, 2 or 3");
  m.box.dim = d;
  const auto lo = in.list("system.box_lo");
  const auto hi = in.list("system.box_hi");
  require(static_cast<int>(lo.size()) == d && static_cast<int>(hi.size()) == d,
          fmt::format("system.box_lo and system.box_hi need {} values", d));
  m.box.lo = to_point(lo, 0, d);
  m.box.hi = to_point(hi, 0, d);
  m.coarse_size = in.number("system.coarse_size");
  require(m.coarse_size > 0.0, "system.coarse_size must be positive");
  for (int a = 0; a < d; ++a) {
    require(m.box.hi[a] > m.box.lo[a], "system.box_hi must exceed system.box_lo on every axis");
    const double r = m.box.extent(a) / m.coarse_size;
    require(std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r),
            fmt::format("box extent {} on axis {} is not a multiple of coarse_size {}", m.box.extent(a), a,
                        m.coarse_size));
  }
  m.order = in.integer("system.order", 4);
  require(m.order >= 1 && m.order <= 15, "system.order must be in 1..15");
  const std::string nq = in.text("system.nuclear_quadrature", "lobatto");
  if (nq == "lobatto")
    m.nuclear_quadrature = NuclearQuadrature::lobatto;
  else if (nq == "refined")
    m.nuclear_quadrature = NuclearQuadrature::refined;
  else
    throw ConfigError("system.nuclear_quadrature must be lobatto or refined");

  // refinement
  if (in.has("refinement.threshold")) {
    m.refinement.threshold = in.number("refinement.threshold");
    require(m.refinement.threshold > 0.0, "refinement.threshold must be positive");
  }
  m.refinement.min_size = in.number("refinement.min_size", 0.0);
  m.refinement.max_size = in.number("refinement.max_size", std::numeric_limits<double>::infinity());
  require(m.refinement.min_size >= 0.0, "refinement.min_size must be non-negative");
  require(m.refinement.max_size > 0.0 && m.refinement.max_size >= m.refinement.min_size,
          "refinement.max_size must be positive and not below min_size");
  m.refinement.max_passes = in.integer("refinement.max_passes", m.refinement.max_passes);
  require(m.refinement.max_passes >= 0, "refinement.max_passes must be non-negative");
  m.refinement.order = in.integer("refinement.indicator_order", m.refinement.order);
  require(m.refinement.order >= 1 && m.refinement.order <= 15, "refinement.indicator_order must be in 1..15");
  const double max_leaves = in.number("refinement.max_leaves", static_cast<double>(m.refinement.max_leaves));
  require(max_leaves >= 1.0, "refinement.max_leaves must be at least 1");
  m.refinement.max_leaves = static_cast<std::size_t>(max_leaves);

  // nuclei
  if (in.has("nuclei.charges")) {
    const auto charges = in.list("nuclei.charges");
    const auto pos = in.list("nuclei.positions");
    require(pos.size() == charges.size() * static_cast<std::size_t>(d),
            fmt::format("nuclei.positions needs {} values ({} per nucleus)", charges.size() * d, d));
    for (std::size_t k = 0; k < charges.size(); ++k) {
      Nucleus n;
      n.charge = charges[k];
      n.position = to_point(pos, k * static_cast<std::size_t>(d), d);
      for (int a = 0; a < d; ++a)
        require(n.position[a] >= m.box.lo[a] && n.position[a] <= m.box.hi[a], "nucleus outside the box");
      m.nuclei.centers.push_back(n);
    }
  }
  m.nuclei.softening = in.number("nuclei.softening", 0.0);
  require(m.nuclei.softening >= 0.0, "nuclei.softening must be non-negative");

  // electrons
  m.n_alpha = in.integer("electrons.n_alpha");
  m.n_beta = in.integer("electrons.n_beta");
  m.n_orbitals = in.integer("electrons.orbitals");
  require(m.n_alpha >= 0 && m.n_beta >= 0 && m.n_alpha + m.n_beta >= 1, "need at least one electron");
  require(m.n_orbitals >= std::max(m.n_alpha, m.n_beta),
          fmt::format("electrons.orbitals = {} is smaller than max(n_alpha, n_beta) = {}", m.n_orbitals,
                      std::max(m.n_alpha, m.n_beta)));
  require(m.n_orbitals <= 63, "electrons.orbitals must be at most 63");
  m.max_ci_dimension =
      static_cast<std::size_t>(in.number("electrons.max_ci_dimension", static_cast<double>(m.max_ci_dimension)));
  const double ci_dim = binomial(m.n_orbitals, m.n_alpha) * binomial(m.n_orbitals, m.n_beta);
  require(ci_dim <= static_cast<double>(m.max_ci_dimension),
          fmt::format("CI dimension {:.0f} exceeds electrons.max_ci_dimension", ci_dim));

  // mean field
  m.meanfield.softening = in.number("meanfield.softening", m.meanfield.softening);
  require(m.meanfield.softening >= 0.0, "meanfield.softening must be non-negative");
  require(d == 3 || m.meanfield.softening > 0.0, "meanfield.softening must be positive in 1D and 2D");
  m.meanfield.poisson_tol = in.number("meanfield.poisson_tol", m.meanfield.poisson_tol);
  require(m.meanfield.poisson_tol > 0.0, "meanfield.poisson_tol must be positive");
  m.meanfield.dense_kernel_limit = static_cast<std::size_t>(
      in.number("meanfield.dense_kernel_limit", static_cast<double>(m.meanfield.dense_kernel_limit)));

  // ecs
  if (in.has_section("ecs")) {
    EcsConfig ecs;
    const auto r0 = in.list("ecs.r0");
    require(static_cast<int>(r0.size()) == d, fmt::format("ecs.r0 needs {} values", d));
    ecs.theta = in.number("ecs.theta");
    require(ecs.theta >= 0.0 && ecs.theta < kPi / 2, "ecs.theta must be in [0, pi/2)");
    for (int a = 0; a < d; ++a) {
      ecs.r0[static_cast<std::size_t>(a)] = r0[static_cast<std::size_t>(a)];
      require(r0[static_cast<std::size_t>(a)] > 0.0, "ecs.r0 must be positive");
      require(r0[static_cast<std::size_t>(a)] < std::max(-m.box.lo[a], m.box.hi[a]), "ecs.r0 lies outside the box");
    }
    if (ecs.theta > 0.0) m.ecs = ecs;
  }

  // pulse
  if (in.has_section("pulse")) {
    Pulse p;
    p.n_cycles = in.integer("pulse.cycles", 2);
    require(p.n_cycles >= 1, "pulse.cycles must be at least 1");
    if (in.has("pulse.omega") || in.has("pulse.e0")) {
      p.omega = in.number("pulse.omega");
      p.e0 = in.number("pulse.e0");
    } else {
      const double nm = in.number("pulse.wavelength_nm");
      const double inten = in.number("pulse.intensity_w_cm2");
      require(nm > 0.0, "pulse.wavelength_nm must be positive");
      require(inten >= 0.0, "pulse.intensity_w_cm2 must be non-negative");
      p = Pulse::from_wavelength(nm, inten, p.n_cycles);
    }
    require(p.omega > 0.0, "pulse frequency must be positive");
    require(p.e0 >= 0.0, "pulse amplitude must be non-negative");
    Point pol{1.0, 0.0, 0.0};
    if (in.has("pulse.polarization")) {
      const auto v = in.list("pulse.polarization");
      require(static_cast<int>(v.size()) == d, fmt::format("pulse.polarization needs {} values", d));
      pol = to_point(v, 0, d);
      double n2 = 0.0;
      for (double x : pol) n2 += x * x;
      require(n2 > 0.0, "pulse.polarization must be nonzero");
      for (double& x : pol) x /= std::sqrt(n2);
    }
    p.polarization = pol;
    m.pulse = p;
  }

  // propagation
  cfg.dt = in.number("propagation.dt", cfg.dt);
  require(cfg.dt > 0.0, "propagation.dt must be positive");
  cfg.steps = in.integer("propagation.steps", 0);
  require(cfg.steps >= 0, "propagation.steps must be non-negative");
  cfg.propagator.tol = in.number("propagation.arnoldi_tol", cfg.propagator.tol);
  cfg.propagator.m_max = in.integer("propagation.arnoldi_max_dim", cfg.propagator.m_max);
  require(cfg.propagator.tol > 0.0, "propagation.arnoldi_tol must be positive");
  require(cfg.propagator.m_max >= 1 && cfg.propagator.m_max <= 64, "propagation.arnoldi_max_dim must be in 1..64");
  cfg.propagator.symmetric_split = in.flag("propagation.symmetric_split", false);
  cfg.propagator.reorthonormalize = in.flag("propagation.reorthonormalize", true);
  m.mass_tol = in.number("propagation.mass_tol", m.mass_tol);
  require(m.mass_tol > 0.0, "propagation.mass_tol must be positive");
  cfg.propagator.eom.dinv_cutoff = in.number("propagation.dinv_cutoff", cfg.propagator.eom.dinv_cutoff);
  require(cfg.propagator.eom.dinv_cutoff > 0.0, "propagation.dinv_cutoff must be positive");
  cfg.propagator.eom.multiplier_shift = in.flag("propagation.multiplier_shift", cfg.propagator.eom.multiplier_shift);

  // imaginary time
  cfg.imaginary = in.flag("imaginary.enabled", true);
  cfg.imag.dtau = in.number("imaginary.dtau", cfg.imag.dtau);
  cfg.imag.tol_energy = in.number("imaginary.tol", cfg.imag.tol_energy);
  cfg.imag.max_steps = in.integer("imaginary.max_steps", cfg.imag.max_steps);
  cfg.imag.m_max = in.integer("imaginary.arnoldi_max_dim", cfg.imag.m_max);
  cfg.imag.krylov_tol = in.number("imaginary.arnoldi_tol", cfg.imag.krylov_tol);
  cfg.imag.eom = cfg.propagator.eom;
  require(cfg.imag.dtau > 0.0, "imaginary.dtau must be positive");
  require(cfg.imag.tol_energy > 0.0, "imaginary.tol must be positive");
  require(cfg.imag.max_steps >= 1, "imaginary.max_steps must be at least 1");
  require(cfg.imag.m_max >= 1 && cfg.imag.m_max <= 64, "imaginary.arnoldi_max_dim must be in 1..64");
  require(cfg.imag.krylov_tol > 0.0, "imaginary.arnoldi_tol must be positive");
  cfg.imag.min_steps = in.integer("imaginary.min_steps", cfg.imag.min_steps);
  const std::string guess = in.text("imaginary.guess", "core");
  if (guess == "core")
    cfg.guess = InitialGuess::core;
  else if (guess == "gaussian")
    cfg.guess = InitialGuess::gaussian;
  else
    throw ConfigError("imaginary.guess must be core or gaussian");
  cfg.gaussian_alpha = in.number("imaginary.gaussian_alpha", cfg.gaussian_alpha);
  require(cfg.gaussian_alpha > 0.0, "imaginary.gaussian_alpha must be positive");
  if (in.has("imaginary.gaussian_center")) {
    const auto c = in.list("imaginary.gaussian_center");
    require(static_cast<int>(c.size()) == d, fmt::format("imaginary.gaussian_center needs {} values", d));
    cfg.gaussian_center = to_point(c, 0, d);
  }

  // output
  cfg.output_dir = in.text("output.directory", "run");
  cfg.output_cadence = in.integer("output.cadence", 1);
  cfg.checkpoint_cadence = in.integer("output.checkpoint_cadence", 0);
  require(cfg.output_cadence >= 1, "output.cadence must be at least 1");
  require(cfg.checkpoint_cadence >= 0, "output.checkpoint_cadence must be non-negative");
  cfg.window = parse_window(in.text("output.window", "hann"));
  cfg.quantity = parse_quantity(in.text("output.quantity", "acceleration"));
  cfg.spectrum_axis = in.integer("output.axis", 0);
  require(cfg.spectrum_axis >= 0 && cfg.spectrum_axis < d, "output.axis out of range");

  // parallel
  cfg.threads = in.integer("parallel.threads", 0);
  require(cfg.threads >= 0, "parallel.threads must be non-negative");
  const std::string red = in.text("parallel.reduction", "deterministic");
  if (red == "deterministic")
    cfg.reduction = parallel::Reduction::deterministic;
  else if (red == "fast")
    cfg.reduction = parallel::Reduction::fast;
  else
    throw ConfigError("parallel.reduction must be deterministic or fast");

  in.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot open configuration '{}'", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mctdhf
