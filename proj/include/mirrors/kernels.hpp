#pragma once
/**
 * @file kernels.hpp
 * @brief Target reflection kernels, their cosine-cell mass matrices and the
 *        kernel text format.
 *
 * The angle range (-pi, 0) is cut into 2^(m+1) cells of equal measure
 * -sin(alpha) d alpha; each cell carries mass 2^-m. A kernel restricted to one
 * x-strip becomes a square matrix a(n, j): the invariant mass of rays that
 * enter through cell n and leave through cell j. Reversible kernels have
 * symmetric matrices.
 */

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirrors {

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CosineGrid {
  int m = 0;
  std::vector<double> gamma;  // 2^(m+1) + 1 breakpoints from -pi to 0

  int cells() const { return static_cast<int>(gamma.size()) - 1; }
  /// Sine mass of one cell, 2^-m.
  double cell_mass() const;
  /// Index of the cell (gamma[k], gamma[k+1]] containing alpha; cell 0 also takes -pi.
  int cell_of(double alpha) const;
};

CosineGrid cosine_grid(int m);

/// Dense square matrix, row-major.
struct MassMatrix {
  int dim = 0;
  std::vector<double> v;

  MassMatrix() = default;
  explicit MassMatrix(int n) : dim(n), v(static_cast<std::size_t>(n) * n, 0.0) {}

  double& operator()(int n, int j) { return v[static_cast<std::size_t>(n) * dim + j]; }
  double operator()(int n, int j) const { return v[static_cast<std::size_t>(n) * dim + j]; }
  double row_sum(int n) const;
  double total() const;
  double max_asymmetry() const;

  friend bool operator==(const MassMatrix&, const MassMatrix&) = default;
};

/// Sum 2x2 blocks: a level-(m+1) matrix becomes a level-m matrix.
MassMatrix aggregate(const MassMatrix& a);

/// Uniform partition of the entry line into `count` strips of equal width.
struct StripLayout {
  double x0 = 0.0;
  double width = 1.0;
  int count = 1;

  double lo(int k) const { return x0 + k * width; }
  double hi(int k) const { return x0 + (k + 1) * width; }
  double x_end() const { return hi(count - 1); }
  /// Strip (lo, hi] containing x, or -1.
  int strip_of(double x) const;

  friend bool operator==(const StripLayout&, const StripLayout&) = default;
};

enum class KernelVariant { Retro, SpecularFlat, KnudsenCosine, Matrix };

const char* to_string(KernelVariant v);

class ReflectionKernel {
 public:
  static ReflectionKernel retro(StripLayout strips = {});
  static ReflectionKernel specular_flat(StripLayout strips = {});
  static ReflectionKernel knudsen_cosine(StripLayout strips = {});
  /// One matrix per strip, all at grid level `level`. Checks shape and
  /// nonnegativity; symmetry is left to check_symmetry.
  static ReflectionKernel matrix(int level, StripLayout strips, std::vector<MassMatrix> mass);

  KernelVariant variant() const { return variant_; }
  const StripLayout& strips() const { return strips_; }
  int level() const { return level_; }
  const std::vector<MassMatrix>& matrices() const { return mass_; }

  friend bool operator==(const ReflectionKernel&, const ReflectionKernel&) = default;

 private:
  KernelVariant variant_ = KernelVariant::KnudsenCosine;
  StripLayout strips_;
  int level_ = 0;
  std::vector<MassMatrix> mass_;
};

/// Raw level-m matrix of one strip without the symmetry check.
MassMatrix raw_mass_matrix(const ReflectionKernel& kernel, int m, int strip);

/// Level-m matrix of one strip. Throws KernelError when the matrix is
/// asymmetric beyond 1e-9 times the strip mass, or when a matrix kernel is
/// stored at a level below m.
MassMatrix kernel_mass_matrix(const ReflectionKernel& kernel, int m, int strip = 0);

struct SymmetryReport {
  double max_asymmetry = 0.0;
  bool pass = true;
};

SymmetryReport check_symmetry(const ReflectionKernel& kernel, int m);

/// Largest |row sum - strip width * cell mass| over all strips at level m.
double row_sum_defect(const ReflectionKernel& kernel, int m);

/// Exit angle for entry angle alpha by inverse CDF with u in [0, 1). Matrix
/// kernels use the strip containing x and spread mass within a cell by sine
/// measure.
double sample_exit(const ReflectionKernel& kernel, double alpha, double u, double x = 0.0);

/// Text format:
///
///   mirror-kernel 1
///   variant = knudsen | retro | specular | matrix
///   level = <m>                      (matrix only)
///   strips = <x0> <width> <count>
///   matrix <strip>                   (matrix only, once per strip)
///   <2^(m+1) rows of 2^(m+1) numbers>
///   end
///
/// '#' starts a comment. Throws KernelError with a line number on bad input,
/// including asymmetric matrices and row sums that disagree with the grid.
ReflectionKernel parse_kernel(std::istream& in);
ReflectionKernel load_kernel(const std::string& path);
void write_kernel(std::ostream& out, const ReflectionKernel& kernel);

/// FNV-1a 64 of the serialized kernel; identifies the target in scene files.
std::uint64_t kernel_hash(const ReflectionKernel& kernel);

}  // namespace mirrors
