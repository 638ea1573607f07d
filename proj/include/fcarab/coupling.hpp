#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fcarab/geometry.hpp"

namespace fcarab {

enum class CouplingSource { identity, file, synthetic };

/// Mutual coupling matrix C: the effective steering vector is C * a(theta).
struct CouplingMatrix {
  ComplexMatrix entries;
  CouplingSource provenance = CouplingSource::identity;
  double r1_mm = 0.0;  // ACP state the matrix belongs to
  double r2_mm = 0.0;

  static CouplingMatrix identity(Eigen::Index size, double r1_mm = 0.0, double r2_mm = 0.0);
  Eigen::Index size() const { return entries.rows(); }
};

/// C = (Z_A + Z_T) (Z + Z_T I)^-1 for identical elements with matched loads:
/// Z_T = conj(Z_11) and the scalar Z_A + Z_T = 2 Re{Z_11}.
CouplingMatrix mcm_from_impedance(const ComplexMatrix& impedance,
                                  CouplingSource provenance = CouplingSource::file,
                                  double r1_mm = 0.0, double r2_mm = 0.0);

/// Stand-in for a measured impedance matrix. Z_ii = 50 ohm and
/// Z_ij = 50 * scale * exp(-d_ij / decay) * exp(-j k d_ij), d_ij Euclidean.
ComplexMatrix synthetic_impedance(const NominalGeometry& geom, double r1, double r2,
                                  double coupling_scale, double decay_length_mm);

struct MCMRecord {
  double r1_mm;
  double r2_mm;
  CouplingMatrix mcm;
};

/// Offline set of coupling matrices keyed by the ACPs they were measured at.
class MCMLibrary {
 public:
  MCMLibrary() = default;
  explicit MCMLibrary(double spacing_threshold_mm) : spacing_threshold_mm_(spacing_threshold_mm) {}

  /// Throws ConfigError on a duplicate key or mismatched dimension.
  void add(double r1_mm, double r2_mm, CouplingMatrix mcm);

  const std::vector<MCMRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  /// Spacing at or above which coupling is neglected; <= 0 means 2 lambda.
  double spacing_threshold_mm() const { return spacing_threshold_mm_; }
  void set_spacing_threshold_mm(double v) { spacing_threshold_mm_ = v; }

 private:
  std::vector<MCMRecord> records_;
  double spacing_threshold_mm_ = 0.0;
};

/// Identity when the minimum geodesic spacing at (r1, r2) reaches the
/// library threshold, otherwise the record nearest to (r1, r2) in Euclidean
/// distance (first record wins ties). ConfigError when that record is needed
/// but the library is empty.
CouplingMatrix select_mcm(const MCMLibrary& library, double r1, double r2,
                          const NominalGeometry& geom);

/// Impedance text format: a header `S <dim>` followed by S*S lines
/// `i j re im` with 1-based indices. Blank lines and `#` comments are skipped.
ComplexMatrix parse_impedance(std::istream& in);
ComplexMatrix read_impedance_file(const std::filesystem::path& path);
void write_impedance(std::ostream& out, const ComplexMatrix& impedance);

/// Manifest lines `r1_mm r2_mm path`; relative paths resolve against the
/// manifest's directory. Each impedance file is converted with
/// mcm_from_impedance().
MCMLibrary load_mcm_library(const std::filesystem::path& manifest, double spacing_threshold_mm = 0.0);

}  // namespace fcarab
