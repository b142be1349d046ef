#include "svlq/kernels.hpp"

#include "svlq/csv.hpp"
#include "svlq/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace svlq {

namespace {

constexpr double kCellRelTol = 1e-10;
constexpr double kEmptyCellMass = 1e-12;
constexpr int kMeshCells = 200;
constexpr double kMeshRatio = 1.2;

double fractional_density_constant(double alpha) {
  return 1.0 / (std::tgamma(alpha) * std::tgamma(1.0 - alpha));
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst <= 0.5))
    throw ValidationError("hurst_range", "Hurst index must lie in (0, 1/2], got " + std::to_string(hurst));
}

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

// (1 - exp(-x)) / x with the limit 1 at x = 0.
double phi1(double x) { return x == 0.0 ? 1.0 : -std::expm1(-x) / x; }

// Atoms of a finite measure, merged by identical node, zero weights removed.
std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.node < b.node; });
  std::vector<Atom> out;
  for (auto& a : atoms) {
    if (!out.empty() && out.back().node == a.node) {
      out.back().weight += a.weight;
    } else {
      out.push_back(std::move(a));
    }
  }
  std::erase_if(out, [](const Atom& a) { return a.weight.isZero(0.0); });
  return out;
}

const std::vector<Atom>* atoms_of(const KernelView& k) {
  if (auto m = k.measure()) return &m->atoms();
  if (auto s = k.spec()) {
    if (auto a = std::get_if<AtomicKernel>(&s->variant())) return &a->atoms;
    if (auto f = std::get_if<FractionalKernel>(&s->variant()); f && f->hurst == 0.5) {
      static const std::vector<Atom> dirac{Atom{scalar(1.0), 0.0}};
      return &dirac;
    }
  }
  return nullptr;
}

// Integral of a matrix-valued function, entry by entry.
Mat integrate_matrix(const std::function<Mat(double)>& f, Index rows, Index cols, double a, double b,
                     bool singular_at_a) {
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      out(i, j) = quad::integrate([&](double x) { return f(x)(i, j); }, a, b, kCellRelTol, singular_at_a).value;
  return out;
}

// Leading small-time behaviour K(t) ~ coeff * t^power, used on [0, t_min] of
// the graded L2 mesh.
struct SmallTime {
  Mat coeff;
  double power = 0.0;
};

SmallTime small_time(const KernelView& k, double t_min) {
  if (auto m = k.measure()) return {m->eval(0.0), 0.0};
  const auto& v = k.spec()->variant();
  if (auto f = std::get_if<FractionalKernel>(&v))
    return {scalar(1.0 / std::tgamma(f->hurst + 0.5)), f->hurst - 0.5};
  if (auto g = std::get_if<GammaKernel>(&v))
    return {scalar(1.0 / std::tgamma(g->hurst + 0.5)), g->hurst - 0.5};
  if (std::holds_alternative<AtomicKernel>(v)) return {kernel_eval(k, 0.0), 0.0};
  return {kernel_eval(k, t_min), 0.0};
}

double abs_measure_integral(const KernelSpec& spec, const std::function<double(double)>& g) {
  const auto& v = spec.variant();
  if (auto a = std::get_if<AtomicKernel>(&v)) {
    double s = 0.0;
    for (const auto& at : a->atoms) s += at.weight.norm() * g(at.node);
    return s;
  }
  if (auto f = std::get_if<FractionalKernel>(&v)) {
    if (f->hurst == 0.5) return g(0.0);
    const double alpha = f->hurst + 0.5;
    const double k = fractional_density_constant(alpha);
    auto integrand = [&](double th) { return k * std::pow(th, -alpha) * g(th); };
    return quad::integrate(integrand, 0.0, 1.0, kCellRelTol, true).value +
           quad::integrate(integrand, 1.0, std::numeric_limits<double>::infinity(), kCellRelTol).value;
  }
  if (auto gk = std::get_if<GammaKernel>(&v)) {
    const double alpha = gk->hurst + 0.5;
    const double k = fractional_density_constant(alpha);
    const double z = gk->damping;
    auto integrand = [&](double u) { return k * std::pow(u, -alpha) * g(u + z); };
    return quad::integrate(integrand, 0.0, 1.0, kCellRelTol, true).value +
           quad::integrate(integrand, 1.0, std::numeric_limits<double>::infinity(), kCellRelTol).value;
  }
  const auto& d = std::get<DensityKernel>(v);
  auto integrand = [&](double th) { return d.density(th).norm() * g(th); };
  const double split = std::clamp(1.0, d.lower, d.upper);
  double total = 0.0;
  if (split > d.lower) total += quad::integrate(integrand, d.lower, split, kCellRelTol, true).value;
  if (d.upper > split) total += quad::integrate(integrand, split, d.upper, kCellRelTol).value;
  return total;
}

}  // namespace

std::string KernelSpec::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, FractionalKernel>) return "fractional";
        if constexpr (std::is_same_v<T, GammaKernel>) return "gamma";
        if constexpr (std::is_same_v<T, AtomicKernel>) return "atomic";
        return "density";
      },
      variant_);
}

KernelSpec KernelSpec::fractional(double hurst) {
  check_hurst(hurst);
  return KernelSpec(FractionalKernel{hurst}, 1, 1);
}

KernelSpec KernelSpec::gamma(double hurst, double damping) {
  check_hurst(hurst);
  if (!(damping >= 0.0) || !std::isfinite(damping))
    throw ValidationError("nonnegative_nodes", "gamma kernel damping rate must be finite and >= 0");
  return KernelSpec(GammaKernel{hurst, damping}, 1, 1);
}

KernelSpec KernelSpec::atomic(std::vector<Atom> atoms) {
  DiscreteMeasure canon(atoms);  // validates
  return KernelSpec(AtomicKernel{canon.atoms()}, canon.rows(), canon.cols());
}

KernelSpec KernelSpec::density(std::function<Mat(double)> density, double lower, double upper, Index rows,
                               Index cols) {
  if (rows < 1 || cols < 1) throw ValidationError("dimensions", "kernel dimensions must be positive");
  if (!(lower >= 0.0) || !(upper > lower) || std::isnan(upper))
    throw ValidationError("support_bounds", "density support must satisfy 0 <= lower < upper");
  if (!density) throw ValidationError("density_callback", "density callback is empty");
  const double probe = std::isinf(upper) ? lower + 1.0 : 0.5 * (lower + upper);
  const Mat p = density(probe);
  if (p.rows() != rows || p.cols() != cols)
    throw ValidationError("dimensions", "density callback returned a matrix of the wrong shape");
  KernelSpec spec(DensityKernel{std::move(density), lower, upper}, rows, cols);
  double adm = std::numeric_limits<double>::quiet_NaN();
  try {
    adm = admissibility_integral(spec);
  } catch (const std::exception&) {
  }
  if (!std::isfinite(adm))
    throw ValidationError("admissibility", "int (1 ^ theta^{-1/2}) |mu|(d theta) is not finite");
  return spec;
}

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, Provenance provenance)
    : provenance_(std::move(provenance)) {
  if (atoms.empty()) throw ValidationError("nonempty_measure", "a discrete measure needs at least one atom");
  rows_ = atoms.front().weight.rows();
  cols_ = atoms.front().weight.cols();
  if (rows_ < 1 || cols_ < 1) throw ValidationError("dimensions", "atom weights must be non-empty matrices");
  for (const auto& a : atoms) {
    if (a.weight.rows() != rows_ || a.weight.cols() != cols_)
      throw ValidationError("dimensions", "all atom weights must share the same shape");
    if (!std::isfinite(a.node) || a.node < 0.0)
      throw ValidationError("nonnegative_nodes", "atom nodes must be finite and nonnegative");
    if (!a.weight.allFinite()) throw ValidationError("finite_weights", "atom weights must be finite");
  }
  atoms_ = merge_atoms(std::move(atoms));
  if (atoms_.empty())
    throw ValidationError("nonempty_measure", "every atom weight vanished after canonicalization");
}

Mat DiscreteMeasure::stacked_weights() const {
  Mat out(rows_, cols_ * static_cast<Index>(atoms_.size()));
  for (std::size_t i = 0; i < atoms_.size(); ++i) out.middleCols(static_cast<Index>(i) * cols_, cols_) = atoms_[i].weight;
  return out;
}

Mat DiscreteMeasure::eval(double t) const {
  Mat out = Mat::Zero(rows_, cols_);
  for (const auto& a : atoms_) out += a.weight * std::exp(-a.node * t);
  return out;
}

Index KernelView::rows() const { return spec() ? spec()->rows() : measure()->rows(); }
Index KernelView::cols() const { return spec() ? spec()->cols() : measure()->cols(); }

std::vector<double> geometric_partition(int n, double r) {
  if (n < 2 || n % 2 != 0) throw ValidationError("even_partition_size", "geometric partition needs an even n >= 2");
  if (!(r > 1.0) || !std::isfinite(r)) throw ValidationError("ratio_gt_one", "geometric partition ratio must exceed 1");
  std::vector<double> eta(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) eta[static_cast<std::size_t>(i)] = std::pow(r, i - n / 2);
  return eta;
}

DiscreteMeasure discretize(const KernelSpec& spec, std::span<const double> partition) {
  if (partition.size() < 2) throw ValidationError("partition", "partition needs at least two boundaries");
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (!std::isfinite(partition[i]) || partition[i] < 0.0)
      throw ValidationError("partition", "partition boundaries must be finite and nonnegative");
    if (i > 0 && !(partition[i] > partition[i - 1]))
      throw ValidationError("partition", "partition boundaries must be strictly increasing");
  }
  Provenance prov;
  prov.partition.assign(partition.begin(), partition.end());
  const auto& v = spec.variant();

  if (auto f = std::get_if<FractionalKernel>(&v); f && f->hurst == 0.5)
    return DiscreteMeasure({Atom{scalar(1.0), 0.0}}, prov);

  if (auto a = std::get_if<AtomicKernel>(&v)) {
    std::vector<Atom> out;
    const std::size_t cells = partition.size() - 1;
    for (std::size_t c = 0; c < cells; ++c) {
      const double lo = partition[c], hi = partition[c + 1];
      const bool last = c + 1 == cells;
      Mat mass = Mat::Zero(spec.rows(), spec.cols());
      double tv = 0.0, moment = 0.0;
      for (const auto& at : a->atoms) {
        if (at.node >= lo && (at.node < hi || (last && at.node == hi))) {
          mass += at.weight;
          tv += at.weight.norm();
          moment += at.weight.norm() * at.node;
        }
      }
      if (tv == 0.0 || mass.isZero(0.0)) {
        ++prov.dropped_cells;
        continue;
      }
      out.push_back({mass, std::clamp(moment / tv, lo, hi)});
    }
    return DiscreteMeasure(std::move(out), prov);
  }

  // Density route: each cell is integrated numerically.
  std::function<Mat(double)> density;
  double support_lo = 0.0, support_hi = std::numeric_limits<double>::infinity();
  std::vector<double> cells(partition.begin(), partition.end());
  if (auto f = std::get_if<FractionalKernel>(&v)) {
    const double alpha = f->hurst + 0.5, k = fractional_density_constant(alpha);
    density = [=](double th) { return scalar(k * std::pow(th, -alpha)); };
  } else if (auto g = std::get_if<GammaKernel>(&v)) {
    const double alpha = g->hurst + 0.5, k = fractional_density_constant(alpha), z = g->damping;
    density = [=](double th) { return scalar(th > z ? k * std::pow(th - z, -alpha) : 0.0); };
    support_lo = z;
  } else {
    const auto& d = std::get<DensityKernel>(v);
    density = d.density;
    support_lo = d.lower;
    support_hi = d.upper;
    // Mass below the first boundary carries the long-memory part of K.
    const double floor = std::max(0.0, support_lo);
    if (floor < cells.front()) cells.insert(cells.begin(), floor);
  }

  std::vector<Atom> out;
  const bool prepended = cells.size() != partition.size();
  for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
    const double lo = std::max(cells[c], support_lo);
    const double hi = std::min(cells[c + 1], support_hi);
    if (!(hi > lo)) {
      ++prov.dropped_cells;
      continue;
    }
    const bool singular = lo == support_lo;
    // Integrate in u = theta - lo so the support edge sits at u = 0.
    auto shifted = [&](double u) { return density(u + lo); };
    const Mat mass = integrate_matrix(shifted, spec.rows(), spec.cols(), 0.0, hi - lo, singular);
    const double tv = quad::integrate([&](double u) { return shifted(u).norm(); }, 0.0, hi - lo, kCellRelTol,
                                      singular).value;
    const double moment = quad::integrate([&](double u) { return (u + lo) * shifted(u).norm(); }, 0.0, hi - lo,
                                          kCellRelTol, singular).value;
    if (!mass.allFinite() || !std::isfinite(tv) || !std::isfinite(moment))
      throw ValidationError("admissibility", "density is not integrable on a partition cell");
    const bool is_prepended = prepended && c == 0;
    if (mass.norm() <= kEmptyCellMass || tv <= 0.0) {
      if (!is_prepended) ++prov.dropped_cells;
      continue;
    }
    out.push_back({mass, std::clamp(moment / tv, lo, hi)});
  }
  return DiscreteMeasure(std::move(out), prov);
}

DiscreteMeasure fractional_atoms(double hurst, int n, double r) {
  check_hurst(hurst);
  if (n < 1) throw ValidationError("partition_size", "number of atoms must be positive");
  if (!(r > 1.0) || !std::isfinite(r)) throw ValidationError("ratio_gt_one", "geometric ratio must exceed 1");
  Provenance prov;
  prov.ratio = r;
  const double half = 0.5 * n;
  for (int i = 0; i <= n; ++i) prov.partition.push_back(std::pow(r, i - half));
  // H = 1/2: mu is the Dirac mass at 0 (K == 1).
  if (hurst == 0.5) return DiscreteMeasure({Atom{scalar(1.0), 0.0}}, prov);

  const double alpha = hurst + 0.5;
  const double lr = std::log(r);
  const double a1 = std::expm1((1.0 - alpha) * lr);  // r^{1-alpha} - 1
  const double a2 = std::expm1((2.0 - alpha) * lr);  // r^{2-alpha} - 1
  const double weight_prefactor = a1 * std::pow(r, (alpha - 1.0) * (1.0 + half)) /
                                  (std::tgamma(alpha) * std::tgamma(2.0 - alpha));
  const double node_prefactor = (1.0 - alpha) / (2.0 - alpha) * a2 / a1;
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double c = weight_prefactor * std::pow(r, (1.0 - alpha) * i);
    const double x = node_prefactor * std::pow(r, i - 1 - half);
    atoms.push_back({scalar(c), x});
  }
  return DiscreteMeasure(std::move(atoms), prov);
}

DiscreteMeasure gamma_atoms(double hurst, double damping, int n, double r) {
  if (!(damping >= 0.0) || !std::isfinite(damping))
    throw ValidationError("nonnegative_nodes", "gamma kernel damping rate must be finite and >= 0");
  const DiscreteMeasure base = fractional_atoms(hurst, n, r);
  std::vector<Atom> atoms = base.atoms();
  for (auto& a : atoms) a.node += damping;
  Provenance prov = base.provenance();
  for (auto& eta : prov.partition) eta += damping;
  return DiscreteMeasure(std::move(atoms), prov);
}

Mat kernel_eval(KernelView kernel, double t) {
  if (!(t >= 0.0) || std::isinf(t)) throw ValidationError("time_domain", "kernel time must be finite and >= 0");
  if (auto m = kernel.measure()) return m->eval(t);
  const auto& v = kernel.spec()->variant();
  if (auto f = std::get_if<FractionalKernel>(&v)) {
    if (f->hurst == 0.5) return scalar(1.0);
    if (t == 0.0) throw ValidationError("time_domain", "fractional kernel is singular at t = 0");
    return scalar(std::pow(t, f->hurst - 0.5) / std::tgamma(f->hurst + 0.5));
  }
  if (auto g = std::get_if<GammaKernel>(&v)) {
    if (t == 0.0 && g->hurst < 0.5) throw ValidationError("time_domain", "gamma kernel is singular at t = 0");
    return scalar(std::pow(t, g->hurst - 0.5) * std::exp(-g->damping * t) / std::tgamma(g->hurst + 0.5));
  }
  if (auto a = std::get_if<AtomicKernel>(&v)) {
    Mat out = Mat::Zero(kernel.rows(), kernel.cols());
    for (const auto& at : a->atoms) out += at.weight * std::exp(-at.node * t);
    return out;
  }
  const auto& d = std::get<DensityKernel>(v);
  const Mat out = integrate_matrix([&](double th) -> Mat { return d.density(th) * std::exp(-th * t); },
                                   kernel.rows(), kernel.cols(), d.lower, d.upper, true);
  if (!out.allFinite()) throw ValidationError("time_domain", "density kernel is not finite at this time");
  return out;
}

Mat kernel_integral(KernelView kernel, double a, double b) {
  if (!(a >= 0.0) || !(b >= a) || std::isinf(b))
    throw ValidationError("time_domain", "kernel integral needs 0 <= a <= b < inf");
  auto atomic_integral = [&](const std::vector<Atom>& atoms) {
    Mat out = Mat::Zero(kernel.rows(), kernel.cols());
    for (const auto& at : atoms) out += at.weight * (std::exp(-at.node * a) * (b - a) * phi1(at.node * (b - a)));
    return out;
  };
  if (auto atoms = atoms_of(kernel)) return atomic_integral(*atoms);
  const auto& v = kernel.spec()->variant();
  if (auto f = std::get_if<FractionalKernel>(&v)) {
    const double alpha = f->hurst + 0.5;
    return scalar((std::pow(b, alpha) - std::pow(a, alpha)) / std::tgamma(alpha + 1.0));
  }
  if (auto g = std::get_if<GammaKernel>(&v)) {
    const double alpha = g->hurst + 0.5;
    if (g->damping == 0.0) return scalar((std::pow(b, alpha) - std::pow(a, alpha)) / std::tgamma(alpha + 1.0));
    const double z = g->damping;
    return scalar(std::pow(z, -alpha) *
                  (boost::math::gamma_p(alpha, z * b) - (a > 0.0 ? boost::math::gamma_p(alpha, z * a) : 0.0)));
  }
  const auto& d = std::get<DensityKernel>(v);
  return integrate_matrix(
      [&](double th) -> Mat { return d.density(th) * (std::exp(-th * a) * (b - a) * phi1(th * (b - a))); },
      kernel.rows(), kernel.cols(), d.lower, d.upper, true);
}

namespace {

// ||sum_i c_i exp(-theta_i t)||^2_{L2(0,T)} in closed form.
double atomic_sq_norm(const std::vector<Atom>& atoms, double horizon) {
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const double lambda = atoms[i].node + atoms[j].node;
      s += (atoms[i].weight.array() * atoms[j].weight.array()).sum() * horizon * phi1(lambda * horizon);
    }
  return std::max(0.0, s);
}

double graded_sq_distance(const KernelView& a, const KernelView* b, double horizon) {
  const double t_min = horizon * std::pow(kMeshRatio, -kMeshCells);
  auto diff = [&](double t) -> double {
    Mat k = kernel_eval(a, t);
    if (b) k -= kernel_eval(*b, t);
    const double s = k.squaredNorm();
    if (!std::isfinite(s)) throw ValidationError("square_integrable", "kernel is not finite on (0, T]");
    return s;
  };
  double total = 0.0;
  double lo = t_min;
  for (int k = 1; k <= kMeshCells; ++k) {
    const double hi = (k == kMeshCells) ? horizon : horizon * std::pow(kMeshRatio, k - kMeshCells);
    total += quad::gauss_legendre16(diff, lo, hi);
    lo = hi;
  }
  // Head cell [0, t_min] from the leading power laws.
  const SmallTime sa = small_time(a, t_min);
  auto head = [&](double p) {
    if (!(2.0 * p + 1.0 > 0.0)) throw ValidationError("square_integrable", "kernel is not square integrable at 0");
    return std::pow(t_min, 2.0 * p + 1.0) / (2.0 * p + 1.0);
  };
  total += sa.coeff.squaredNorm() * head(sa.power);
  if (b) {
    const SmallTime sb = small_time(*b, t_min);
    const double pq = sa.power + sb.power + 1.0;
    total += sb.coeff.squaredNorm() * head(sb.power) -
             2.0 * (sa.coeff.array() * sb.coeff.array()).sum() * std::pow(t_min, pq) / pq;
  }
  return std::max(0.0, total);
}

}  // namespace

double kernel_l2_norm(KernelView kernel, double horizon) {
  if (!(horizon > 0.0) || std::isinf(horizon)) throw ValidationError("horizon", "horizon must be positive and finite");
  if (auto atoms = atoms_of(kernel)) return std::sqrt(atomic_sq_norm(*atoms, horizon));
  if (auto s = kernel.spec()) {
    if (auto f = std::get_if<FractionalKernel>(&s->variant())) {
      const double H = f->hurst;
      return std::sqrt(std::pow(horizon, 2.0 * H) / (2.0 * H)) / std::tgamma(H + 0.5);
    }
  }
  return std::sqrt(graded_sq_distance(kernel, nullptr, horizon));
}

double kernel_l2_error(KernelView a, KernelView b, double horizon) {
  if (!(horizon > 0.0) || std::isinf(horizon)) throw ValidationError("horizon", "horizon must be positive and finite");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("dimensions", "kernels must have the same shape");
  const auto* atoms_a = atoms_of(a);
  const auto* atoms_b = atoms_of(b);
  if (atoms_a && atoms_b) {
    std::vector<Atom> combined = *atoms_a;
    for (const auto& at : *atoms_b) combined.push_back({-at.weight, at.node});
    return std::sqrt(atomic_sq_norm(merge_atoms(std::move(combined)), horizon));
  }
  return std::sqrt(graded_sq_distance(a, &b, horizon));
}

double admissibility_integral(const KernelSpec& spec) {
  if (auto f = std::get_if<FractionalKernel>(&spec.variant())) {
    if (f->hurst == 0.5) return 1.0;
    const double alpha = f->hurst + 0.5;
    return fractional_density_constant(alpha) * (1.0 / (1.0 - alpha) + 1.0 / (alpha - 0.5));
  }
  return abs_measure_integral(spec, [](double th) { return th <= 1.0 ? 1.0 : 1.0 / std::sqrt(th); });
}

double l2_norm_bound(KernelView kernel, double horizon) {
  if (!(horizon > 0.0)) throw ValidationError("horizon", "horizon must be positive");
  auto g = [horizon](double th) { return std::sqrt(horizon * phi1(2.0 * th * horizon)); };
  if (auto atoms = atoms_of(kernel)) {
    double s = 0.0;
    for (const auto& at : *atoms) s += at.weight.norm() * g(at.node);
    return s;
  }
  return abs_measure_integral(*kernel.spec(), g);
}

void write_atoms_csv(const DiscreteMeasure& measure, const std::string& path) {
  std::vector<std::string> header{"i", "theta"};
  for (Index r = 0; r < measure.rows(); ++r)
    for (Index c = 0; c < measure.cols(); ++c) header.push_back("c_" + std::to_string(r) + "_" + std::to_string(c));
  csv::Table table(std::move(header));
  for (std::size_t i = 0; i < measure.size(); ++i) {
    std::vector<std::string> row{std::to_string(i + 1), csv::format_double(measure.node(i))};
    for (Index r = 0; r < measure.rows(); ++r)
      for (Index c = 0; c < measure.cols(); ++c) row.push_back(csv::format_double(measure.weight(i)(r, c)));
    table.add_row(std::move(row));
  }
  table.write(path);
}

DiscreteMeasure read_atoms_csv(const std::string& path, Index rows, Index cols) {
  const auto records = csv::parse(csv::read_file(path));
  if (records.size() < 2) throw ValidationError("atoms_csv", "atom CSV has no data rows");
  const std::size_t width = 2 + static_cast<std::size_t>(rows * cols);
  std::vector<Atom> atoms;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& rec = records[k];
    if (rec.size() != width) throw ValidationError("atoms_csv", "atom CSV row has the wrong number of columns");
    Atom a{Mat(rows, cols), 0.0};
    try {
      a.node = std::stod(rec[1]);
      for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) a.weight(r, c) = std::stod(rec[2 + static_cast<std::size_t>(r * cols + c)]);
    } catch (const std::logic_error&) {
      throw ValidationError("atoms_csv", "atom CSV contains a non-numeric field");
    }
    atoms.push_back(std::move(a));
  }
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace svlq
