#include "mirrors/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mirrors/textio.hpp"

namespace mirrors {

namespace {

constexpr double kPiK = std::numbers::pi;
constexpr double kSymmetryTol = 1e-9;

// -integral of sin over (lo, hi).
double sine_mass(double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate([](double a) { return -std::sin(a); }, lo, hi, 15, 1e-12);
}

std::vector<double> cell_masses(const CosineGrid& g) {
  std::vector<double> out(g.cells());
  for (int k = 0; k < g.cells(); ++k) out[k] = sine_mass(g.gamma[k], g.gamma[k + 1]);
  return out;
}

void check_level(int m) {
  if (m < 0 || m > 20) throw KernelError("grid level must be in [0, 20]");
}

void check_strip(const ReflectionKernel& kernel, int strip) {
  if (strip < 0 || strip >= kernel.strips().count) throw KernelError("strip index out of range");
}

}  // namespace

double CosineGrid::cell_mass() const { return std::ldexp(1.0, -m); }

int CosineGrid::cell_of(double alpha) const {
  const auto it = std::lower_bound(gamma.begin() + 1, gamma.end(), alpha);
  const int k = static_cast<int>(it - (gamma.begin() + 1));
  return std::clamp(k, 0, cells() - 1);
}

CosineGrid cosine_grid(int m) {
  check_level(m);
  CosineGrid g;
  g.m = m;
  const int n = 1 << (m + 1);
  g.gamma.resize(n + 1);
  const double step = std::ldexp(1.0, -m);
  for (int k = 0; k <= n; ++k) g.gamma[k] = -std::acos(k * step - 1.0);
  g.gamma.front() = -kPiK;
  g.gamma.back() = 0.0;
  return g;
}

double MassMatrix::row_sum(int n) const {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) s += (*this)(n, j);
  return s;
}

double MassMatrix::total() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double MassMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (int n = 0; n < dim; ++n) {
    for (int j = n + 1; j < dim; ++j) worst = std::max(worst, std::abs((*this)(n, j) - (*this)(j, n)));
  }
  return worst;
}

MassMatrix aggregate(const MassMatrix& a) {
  if (a.dim < 2 || a.dim % 2 != 0) throw KernelError("cannot aggregate a matrix of odd dimension");
  MassMatrix out(a.dim / 2);
  for (int n = 0; n < a.dim; ++n) {
    for (int j = 0; j < a.dim; ++j) out(n / 2, j / 2) += a(n, j);
  }
  return out;
}

int StripLayout::strip_of(double x) const {
  if (!(x > x0) || x > x_end()) return -1;
  int k = std::clamp(static_cast<int>(std::ceil((x - x0) / width)) - 1, 0, count - 1);
  // The division can round across an edge; settle against the edges themselves.
  while (k > 0 && x <= lo(k)) --k;
  while (k < count - 1 && x > hi(k)) ++k;
  return k;
}

const char* to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::Retro: return "retro";
    case KernelVariant::SpecularFlat: return "specular";
    case KernelVariant::KnudsenCosine: return "knudsen";
    case KernelVariant::Matrix: return "matrix";
  }
  return "unknown";
}

static void check_layout(const StripLayout& s) {
  if (!std::isfinite(s.x0) || !(s.width > 0.0) || !std::isfinite(s.width) || s.count < 1) {
    throw KernelError("strip layout needs finite x0, positive width and count >= 1");
  }
}

ReflectionKernel ReflectionKernel::retro(StripLayout strips) {
  check_layout(strips);
  ReflectionKernel k;
  k.variant_ = KernelVariant::Retro;
  k.strips_ = strips;
  return k;
}

ReflectionKernel ReflectionKernel::specular_flat(StripLayout strips) {
  check_layout(strips);
  ReflectionKernel k;
  k.variant_ = KernelVariant::SpecularFlat;
  k.strips_ = strips;
  return k;
}

ReflectionKernel ReflectionKernel::knudsen_cosine(StripLayout strips) {
  check_layout(strips);
  ReflectionKernel k;
  k.variant_ = KernelVariant::KnudsenCosine;
  k.strips_ = strips;
  return k;
}

ReflectionKernel ReflectionKernel::matrix(int level, StripLayout strips, std::vector<MassMatrix> mass) {
  check_layout(strips);
  check_level(level);
  if (static_cast<int>(mass.size()) != strips.count) throw KernelError("need one matrix per strip");
  const int dim = 1 << (level + 1);
  for (const auto& a : mass) {
    if (a.dim != dim || a.v.size() != static_cast<std::size_t>(dim) * dim) {
      throw KernelError("matrix dimension does not match the grid level");
    }
    for (double x : a.v) {
      if (!std::isfinite(x) || x < 0.0) throw KernelError("matrix entries must be finite and nonnegative");
    }
  }
  ReflectionKernel k;
  k.variant_ = KernelVariant::Matrix;
  k.strips_ = strips;
  k.level_ = level;
  k.mass_ = std::move(mass);
  return k;
}

MassMatrix raw_mass_matrix(const ReflectionKernel& kernel, int m, int strip) {
  check_level(m);
  check_strip(kernel, strip);
  const double w = kernel.strips().width;
  if (kernel.variant() == KernelVariant::Matrix) {
    if (kernel.level() < m) throw KernelError("matrix kernel is stored at a coarser level than requested");
    MassMatrix a = kernel.matrices()[strip];
    for (int l = kernel.level(); l > m; --l) a = aggregate(a);
    return a;
  }
  const CosineGrid g = cosine_grid(m);
  const auto mass = cell_masses(g);
  const int n = g.cells();
  MassMatrix a(n);
  switch (kernel.variant()) {
    case KernelVariant::Retro:
      for (int k = 0; k < n; ++k) a(k, k) = w * mass[k];
      break;
    case KernelVariant::SpecularFlat:
      // Cells k and n-1-k are mirror images; average so the matrix is exactly symmetric.
      for (int k = 0; k < n; ++k) a(k, n - 1 - k) = w * 0.5 * (mass[k] + mass[n - 1 - k]);
      break;
    case KernelVariant::KnudsenCosine:
      for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) a(k, j) = w * (mass[k] * mass[j]) / 2.0;
      }
      break;
    case KernelVariant::Matrix:
      break;
  }
  return a;
}

MassMatrix kernel_mass_matrix(const ReflectionKernel& kernel, int m, int strip) {
  MassMatrix a = raw_mass_matrix(kernel, m, strip);
  const double limit = kSymmetryTol * 2.0 * kernel.strips().width;
  if (const double asym = a.max_asymmetry(); asym > limit) {
    throw KernelError("kernel is not symmetric: max asymmetry " + textio::format_double(asym));
  }
  return a;
}

SymmetryReport check_symmetry(const ReflectionKernel& kernel, int m) {
  SymmetryReport r;
  const double limit = kSymmetryTol * 2.0 * kernel.strips().width;
  for (int s = 0; s < kernel.strips().count; ++s) {
    r.max_asymmetry = std::max(r.max_asymmetry, raw_mass_matrix(kernel, m, s).max_asymmetry());
  }
  r.pass = r.max_asymmetry <= limit;
  return r;
}

double row_sum_defect(const ReflectionKernel& kernel, int m) {
  const double target = kernel.strips().width * std::ldexp(1.0, -m);
  double worst = 0.0;
  for (int s = 0; s < kernel.strips().count; ++s) {
    const MassMatrix a = raw_mass_matrix(kernel, m, s);
    for (int n = 0; n < a.dim; ++n) worst = std::max(worst, std::abs(a.row_sum(n) - target));
  }
  return worst;
}

double sample_exit(const ReflectionKernel& kernel, double alpha, double u, double x) {
  if (!(alpha > -kPiK && alpha < 0.0)) throw KernelError("entry angle must lie in (-pi, 0)");
  if (!(u >= 0.0 && u < 1.0)) throw KernelError("variate must lie in [0, 1)");
  switch (kernel.variant()) {
    case KernelVariant::Retro: return alpha;
    case KernelVariant::SpecularFlat: return -kPiK - alpha;
    case KernelVariant::KnudsenCosine: return -std::acos(2.0 * u - 1.0);
    case KernelVariant::Matrix: break;
  }
  const int s = kernel.strips().strip_of(x);
  if (s < 0) throw KernelError("x lies outside the kernel's strips");
  const CosineGrid g = cosine_grid(kernel.level());
  const MassMatrix& a = kernel.matrices()[s];
  const int n = g.cell_of(alpha);
  const double row = a.row_sum(n);
  if (!(row > 0.0)) throw KernelError("entry cell carries no mass");
  double target = u * row;
  int j = 0;
  for (; j < a.dim - 1; ++j) {
    if (target < a(n, j)) break;
    target -= a(n, j);
  }
  const double f = a(n, j) > 0.0 ? std::clamp(target / a(n, j), 0.0, 1.0) : 0.5;
  const double c_lo = std::cos(g.gamma[j]);
  const double c_hi = std::cos(g.gamma[j + 1]);
  return -std::acos(std::clamp(c_lo + f * (c_hi - c_lo), -1.0, 1.0));
}

ReflectionKernel parse_kernel(std::istream& in) {
  textio::LineReader reader(in);
  std::vector<std::string_view> t;
  auto fail = [&](const std::string& what) -> KernelError {
    return KernelError("kernel file line " + std::to_string(reader.number()) + ": " + what);
  };

  if (!reader.next(t) || t.size() != 2 || t[0] != "mirror-kernel") throw fail("expected 'mirror-kernel 1'");
  if (t[1] != "1") throw fail("unsupported kernel format version");

  std::string variant;
  std::optional<int> level;
  std::optional<StripLayout> strips;
  std::vector<std::optional<MassMatrix>> mats;
  bool ended = false;

  while (reader.next(t)) {
    if (t[0] == "end") {
      if (t.size() != 1) throw fail("trailing tokens after 'end'");
      ended = true;
      break;
    }
    if (t.size() >= 2 && t[1] == "=") {
      if (t[0] == "variant") {
        if (t.size() != 3) throw fail("variant takes one value");
        variant = std::string(t[2]);
        if (variant != "knudsen" && variant != "retro" && variant != "specular" && variant != "matrix") {
          throw fail("unknown variant '" + variant + "'");
        }
      } else if (t[0] == "level") {
        const auto v = t.size() == 3 ? textio::parse_int(t[2]) : std::nullopt;
        if (!v || *v < 0 || *v > 20) throw fail("level must be an integer in [0, 20]");
        level = static_cast<int>(*v);
      } else if (t[0] == "strips") {
        if (t.size() != 5) throw fail("strips takes x0 width count");
        const auto x0 = textio::parse_double(t[2]);
        const auto w = textio::parse_double(t[3]);
        const auto c = textio::parse_int(t[4]);
        if (!x0 || !w || !c || !std::isfinite(*x0) || !(*w > 0.0) || !std::isfinite(*w) || *c < 1 || *c > 1'000'000) {
          throw fail("bad strip layout");
        }
        strips = StripLayout{*x0, *w, static_cast<int>(*c)};
        mats.assign(strips->count, std::nullopt);
      } else {
        throw fail("unknown key '" + std::string(t[0]) + "'");
      }
      continue;
    }
    if (t[0] == "matrix") {
      if (variant != "matrix") throw fail("matrix block in a non-matrix kernel");
      if (!level || !strips) throw fail("level and strips must precede matrix blocks");
      const auto s = t.size() == 2 ? textio::parse_int(t[1]) : std::nullopt;
      if (!s || *s < 0 || *s >= strips->count) throw fail("bad strip index");
      if (mats[*s]) throw fail("duplicate matrix for strip " + std::to_string(*s));
      const int dim = 1 << (*level + 1);
      MassMatrix a(dim);
      for (int r = 0; r < dim; ++r) {
        if (!reader.next(t)) throw fail("matrix ended early");
        if (static_cast<int>(t.size()) != dim) throw fail("expected " + std::to_string(dim) + " entries");
        for (int j = 0; j < dim; ++j) {
          const auto v = textio::parse_double(t[j]);
          if (!v || !std::isfinite(*v) || *v < 0.0) throw fail("matrix entries must be finite and nonnegative");
          a(r, j) = *v;
        }
      }
      mats[*s] = std::move(a);
      continue;
    }
    throw fail("unexpected line");
  }
  if (!ended) throw fail("missing 'end'");
  if (variant.empty()) throw fail("missing variant");
  const StripLayout layout = strips.value_or(StripLayout{});

  if (variant != "matrix") {
    if (level) throw fail("level applies only to matrix kernels");
    if (variant == "knudsen") return ReflectionKernel::knudsen_cosine(layout);
    if (variant == "retro") return ReflectionKernel::retro(layout);
    return ReflectionKernel::specular_flat(layout);
  }
  if (!level || !strips) throw fail("matrix kernels need level and strips");
  std::vector<MassMatrix> mass;
  for (int s = 0; s < strips->count; ++s) {
    if (!mats[s]) throw fail("missing matrix for strip " + std::to_string(s));
    mass.push_back(std::move(*mats[s]));
  }
  ReflectionKernel k = ReflectionKernel::matrix(*level, layout, std::move(mass));
  if (const auto sym = check_symmetry(k, *level); !sym.pass) {
    throw fail("matrix is not symmetric (max asymmetry " + textio::format_double(sym.max_asymmetry) + ")");
  }
  if (row_sum_defect(k, *level) > kSymmetryTol * 2.0 * layout.width) {
    throw fail("row sums must equal strip width times 2^-level");
  }
  return k;
}

ReflectionKernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KernelError("cannot open kernel file " + path);
  return parse_kernel(in);
}

void write_kernel(std::ostream& out, const ReflectionKernel& kernel) {
  const auto& s = kernel.strips();
  out << "mirror-kernel 1\n";
  out << "variant = " << to_string(kernel.variant()) << '\n';
  if (kernel.variant() == KernelVariant::Matrix) out << "level = " << kernel.level() << '\n';
  out << "strips = " << textio::format_double(s.x0) << ' ' << textio::format_double(s.width) << ' ' << s.count
      << '\n';
  if (kernel.variant() == KernelVariant::Matrix) {
    for (int k = 0; k < s.count; ++k) {
      const MassMatrix& a = kernel.matrices()[k];
      out << "matrix " << k << '\n';
      for (int n = 0; n < a.dim; ++n) {
        for (int j = 0; j < a.dim; ++j) out << (j ? " " : "") << textio::format_double(a(n, j));
        out << '\n';
      }
    }
  }
  out << "end\n";
}

std::uint64_t kernel_hash(const ReflectionKernel& kernel) {
  std::ostringstream os;
  write_kernel(os, kernel);
  return textio::fnv1a64(os.str());
}

}  // namespace mirrors
