#include "fcarab/coupling.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace fcarab {

CouplingMatrix CouplingMatrix::identity(Eigen::Index size, double r1_mm, double r2_mm) {
  return {ComplexMatrix::Identity(size, size), CouplingSource::identity, r1_mm, r2_mm};
}

CouplingMatrix mcm_from_impedance(const ComplexMatrix& impedance, CouplingSource provenance,
                                  double r1_mm, double r2_mm) {
  if (impedance.rows() != impedance.cols() || impedance.rows() == 0) {
    throw DomainError("impedance matrix must be square and nonempty");
  }
  if (!impedance.allFinite()) throw NumericalError("impedance matrix has non-finite entries");
  const Eigen::Index s = impedance.rows();
  const cplx z11 = impedance(0, 0);
  const cplx load = std::conj(z11);
  const double prefactor = 2.0 * z11.real();

  const ComplexMatrix loaded = impedance + load * ComplexMatrix::Identity(s, s);
  Eigen::JacobiSVD<ComplexMatrix> svd(loaded);
  const auto& sv = svd.singularValues();
  const double largest = sv(0);
  const double smallest = sv(sv.size() - 1);
  const double cond = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  if (!(smallest > 0.0) || cond > 1e12) {
    std::ostringstream msg;
    msg << "Z + Z_T I is singular (condition number " << cond << ")";
    throw NumericalError(msg.str(), cond);
  }
  ComplexMatrix c = prefactor * loaded.partialPivLu().inverse();
  return {std::move(c), provenance, r1_mm, r2_mm};
}

ComplexMatrix synthetic_impedance(const NominalGeometry& geom, double r1, double r2,
                                  double coupling_scale, double decay_length_mm) {
  if (!(coupling_scale >= 0.0 && coupling_scale < 1.0)) {
    throw DomainError("coupling_scale must lie in [0, 1)");
  }
  if (!(decay_length_mm > 0.0)) throw DomainError("decay_length must be positive");
  constexpr double kSelf = 50.0;
  const auto pos = element_positions(geom, r1, r2);
  const Eigen::Index s = geom.size();
  ComplexMatrix z = ComplexMatrix::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    z(i, i) = kSelf;
    for (Eigen::Index j = i + 1; j < s; ++j) {
      const double d = (pos[static_cast<std::size_t>(i)] - pos[static_cast<std::size_t>(j)]).norm();
      const double mag = kSelf * coupling_scale * std::exp(-d / decay_length_mm);
      const double phase = -geom.wavenumber * d;
      z(i, j) = z(j, i) = mag * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return z;
}

void MCMLibrary::add(double r1_mm, double r2_mm, CouplingMatrix mcm) {
  if (!mcm.entries.allFinite()) throw ConfigError("MCM library entry has non-finite values");
  for (const auto& rec : records_) {
    if (rec.r1_mm == r1_mm && rec.r2_mm == r2_mm) {
      throw ConfigError("duplicate MCM library key");
    }
    if (rec.mcm.size() != mcm.size()) throw ConfigError("MCM library dimensions differ");
  }
  mcm.r1_mm = r1_mm;
  mcm.r2_mm = r2_mm;
  records_.push_back({r1_mm, r2_mm, std::move(mcm)});
}

CouplingMatrix select_mcm(const MCMLibrary& library, double r1, double r2,
                          const NominalGeometry& geom) {
  const double threshold = library.spacing_threshold_mm() > 0.0 ? library.spacing_threshold_mm()
                                                                : 2.0 * geom.wavelength_mm;
  if (min_geodesic_spacing(geom, r1, r2) >= threshold) {
    return CouplingMatrix::identity(geom.size(), r1, r2);
  }
  if (library.empty()) {
    throw ConfigError("element spacing is below the coupling threshold but the MCM library is empty");
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  const auto& recs = library.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const double d = std::hypot(recs[i].r1_mm - r1, recs[i].r2_mm - r2);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  if (recs[best].mcm.size() != geom.size()) {
    throw ConfigError("MCM library dimension does not match the array");
  }
  return recs[best].mcm;
}

namespace {

// Next non-blank, non-comment line; false at EOF.
bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

ComplexMatrix parse_impedance(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_content_line(in, line, lineno)) throw ParseError("missing `S <dimension>` header", 1);
  long long dim = 0;
  {
    std::istringstream hs(line);
    std::string tag, extra;
    if (!(hs >> tag >> dim) || tag != "S" || dim < 1 || (hs >> extra)) {
      throw ParseError("expected header `S <dimension>`", lineno);
    }
  }
  const auto s = static_cast<Eigen::Index>(dim);
  ComplexMatrix z(s, s);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(s, s, false);
  for (Eigen::Index n = 0; n < s * s; ++n) {
    if (!next_content_line(in, line, lineno)) {
      throw ParseError("expected " + std::to_string(s * s) + " entries, found " + std::to_string(n),
                       lineno + 1);
    }
    std::istringstream ls(line);
    long long i = 0, j = 0;
    double re = 0.0, im = 0.0;
    std::string extra;
    if (!(ls >> i >> j >> re >> im) || (ls >> extra)) {
      throw ParseError("expected `i j re im`", lineno);
    }
    if (i < 1 || j < 1 || i > dim || j > dim) throw ParseError("index out of range", lineno);
    if (!std::isfinite(re) || !std::isfinite(im)) throw ParseError("non-finite value", lineno);
    if (seen(i - 1, j - 1)) throw ParseError("duplicate entry", lineno);
    seen(i - 1, j - 1) = true;
    z(i - 1, j - 1) = {re, im};
  }
  if (next_content_line(in, line, lineno)) throw ParseError("trailing content", lineno);
  return z;
}

ComplexMatrix read_impedance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open impedance file " + path.string());
  try {
    return parse_impedance(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void write_impedance(std::ostream& out, const ComplexMatrix& impedance) {
  out << "S " << impedance.rows() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < impedance.rows(); ++i) {
    for (Eigen::Index j = 0; j < impedance.cols(); ++j) {
      out << i + 1 << ' ' << j + 1 << ' ' << impedance(i, j).real() << ' '
          << impedance(i, j).imag() << '\n';
    }
  }
}

MCMLibrary load_mcm_library(const std::filesystem::path& manifest, double spacing_threshold_mm) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open MCM manifest " + manifest.string());
  MCMLibrary lib(spacing_threshold_mm);
  const auto base = manifest.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (next_content_line(in, line, lineno)) {
    std::istringstream ls(line);
    double r1 = 0.0, r2 = 0.0;
    std::string file, extra;
    if (!(ls >> r1 >> r2 >> file) || (ls >> extra)) {
      throw ParseError(manifest.string() + ": expected `r1_mm r2_mm path`", lineno);
    }
    if (!(r1 > 0.0) || !(r2 > 0.0)) {
      throw ParseError(manifest.string() + ": radii must be positive", lineno);
    }
    std::filesystem::path p(file);
    if (p.is_relative()) p = base / p;
    auto z = read_impedance_file(p);
    try {
      lib.add(r1, r2, mcm_from_impedance(z, CouplingSource::file, r1, r2));
    } catch (const ConfigError& e) {
      throw ParseError(manifest.string() + ": " + e.what(), lineno);
    }
  }
  return lib;
}

}  // namespace fcarab
