#pragma once

#include "svlq/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace svlq {

/// One exponential factor of a completely monotone kernel: weight * exp(-node t).
struct Atom {
  Mat weight;  // d x d'
  double node = 0.0;
};

struct FractionalKernel {
  double hurst = 0.5;
};

struct GammaKernel {
  double hurst = 0.5;
  double damping = 0.0;
};

struct AtomicKernel {
  std::vector<Atom> atoms;
};

struct DensityKernel {
  std::function<Mat(double)> density;  // theta -> d mu / d theta, d x d'
  double lower = 0.0;
  double upper = 0.0;  // may be +inf
};

/// Symbolic description of K(t) = int exp(-theta t) mu(d theta).
class KernelSpec {
 public:
  using Variant = std::variant<FractionalKernel, GammaKernel, AtomicKernel, DensityKernel>;

  static KernelSpec fractional(double hurst);
  static KernelSpec gamma(double hurst, double damping);
  static KernelSpec atomic(std::vector<Atom> atoms);
  // Throws ValidationError when int (1 ^ theta^{-1/2}) |mu|(d theta) is not finite.
  static KernelSpec density(std::function<Mat(double)> density, double lower, double upper,
                            Index rows, Index cols);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Variant& variant() const { return variant_; }
  std::string name() const;

 private:
  KernelSpec(Variant v, Index rows, Index cols) : variant_(std::move(v)), rows_(rows), cols_(cols) {}
  Variant variant_;
  Index rows_ = 1;
  Index cols_ = 1;
};

/// Record of how a DiscreteMeasure was produced.
struct Provenance {
  std::vector<double> partition;
  std::optional<double> ratio;
  std::size_t dropped_cells = 0;
};

/// Finite atomic measure sum_i c_i delta_{theta_i}.
///
/// Canonical form: nodes strictly increasing, atoms sharing a node merged,
/// atoms with identically zero weight removed, at least one atom left.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms, Provenance provenance = {});

  std::size_t size() const { return atoms_.size(); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  double node(std::size_t i) const { return atoms_[i].node; }
  const Mat& weight(std::size_t i) const { return atoms_[i].weight; }
  const Provenance& provenance() const { return provenance_; }

  double max_node() const { return atoms_.back().node; }
  // [c_1 ... c_n], d x (n d').
  Mat stacked_weights() const;
  Mat eval(double t) const;

 private:
  std::vector<Atom> atoms_;
  Index rows_ = 0;
  Index cols_ = 0;
  Provenance provenance_;
};

/// Non-owning handle accepted by the kernel-level operations.
class KernelView {
 public:
  KernelView(const KernelSpec& spec) : ref_(&spec) {}           // NOLINT
  KernelView(const DiscreteMeasure& measure) : ref_(&measure) {}  // NOLINT

  const KernelSpec* spec() const {
    auto p = std::get_if<const KernelSpec*>(&ref_);
    return p ? *p : nullptr;
  }
  const DiscreteMeasure* measure() const {
    auto p = std::get_if<const DiscreteMeasure*>(&ref_);
    return p ? *p : nullptr;
  }
  Index rows() const;
  Index cols() const;

 private:
  std::variant<const KernelSpec*, const DiscreteMeasure*> ref_;
};

// Boundaries r^{-n/2}, ..., r^{n/2}. n must be even and positive, r > 1.
std::vector<double> geometric_partition(int n, double r);

// Barycentric discretization: c_i is the mu-mass of cell i and theta_i the
// |mu|-barycenter of that cell. Cells with zero mass are dropped and counted.
DiscreteMeasure discretize(const KernelSpec& spec, std::span<const double> partition);

// Closed-form atoms of the fractional measure on the geometric partition.
// n >= 1 (odd n uses half-integer exponents), r > 1, 0 < H <= 1/2.
DiscreteMeasure fractional_atoms(double hurst, int n, double r);
// Same cells for the gamma kernel; nodes are shifted by the damping rate.
DiscreteMeasure gamma_atoms(double hurst, double damping, int n, double r);

Mat kernel_eval(KernelView kernel, double t);
// int_a^b K(s) ds, 0 <= a <= b.
Mat kernel_integral(KernelView kernel, double a, double b);

double kernel_l2_norm(KernelView kernel, double horizon);
double kernel_l2_error(KernelView a, KernelView b, double horizon);

// int (1 ^ theta^{-1/2}) |mu|(d theta).
double admissibility_integral(const KernelSpec& spec);
// int sqrt((1 - exp(-2 theta T)) / (2 theta)) |mu|(d theta), an upper bound
// on ||K||_{L2(0,T)}.
double l2_norm_bound(KernelView kernel, double horizon);

void write_atoms_csv(const DiscreteMeasure& measure, const std::string& path);
DiscreteMeasure read_atoms_csv(const std::string& path, Index rows, Index cols);

}  // namespace svlq
