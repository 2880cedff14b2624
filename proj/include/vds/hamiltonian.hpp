#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace vds {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Raised for invalid inputs and failed numerical preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SiteId = std::size_t;

/// Structured site label: unit-cell coordinates plus a sublattice tag.
struct SiteLabel {
  int cell_x = 0;
  int cell_y = 0;
  int sublattice = 0;
  bool operator==(const SiteLabel&) const = default;
};

enum class Boundary { periodic, open };

/// One stored hopping: the operator element H(i, j) = value, with
/// H(j, i) = conj(value) implied.
struct Coupling {
  SiteId i = 0;
  SiteId j = 0;
  cplx value;
  bool operator==(const Coupling&) const = default;
};

struct BathMetadata {
  int cell_size = 1;       // sites per unit cell
  int range = 1;           // hopping range in cells
  Boundary boundary = Boundary::open;
  bool operator==(const BathMetadata&) const = default;
};

/// Coupled-cavity network. Immutable after construction; every instance
/// satisfies: dense indices, no self couplings, one entry per unordered pair.
class BathGraph {
 public:
  BathGraph() = default;

  /// Validating constructor. Entries given for both (i, j) and (j, i) must
  /// be mutual conjugates and are merged; anything else throws vds::Error.
  BathGraph(std::vector<double> omega, std::vector<Coupling> couplings,
            BathMetadata meta = {}, std::vector<SiteLabel> labels = {},
            std::vector<std::array<double, 2>> positions = {});

  std::size_t size() const { return omega_.size(); }
  const std::vector<double>& omega() const { return omega_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }
  const BathMetadata& metadata() const { return meta_; }
  const std::vector<SiteLabel>& labels() const { return labels_; }
  const std::vector<std::array<double, 2>>& positions() const {
    return positions_;
  }

  /// For a bath produced by remove_site: index in the parent bath for every
  /// site. Empty for baths built directly.
  const std::vector<SiteId>& parent_index() const { return parent_; }

  /// Site carrying the given label, if any.
  std::optional<SiteId> find(const SiteLabel& label) const;

  /// Neighbour list of site i as (neighbour, H(i, neighbour)).
  std::vector<std::pair<SiteId, cplx>> neighbours(SiteId i) const;

  /// Position of site i; falls back to (i, 0) when no geometry is stored.
  std::array<double, 2> position(SiteId i) const;

  /// Attach a parent map (vacancy baths); sizes must agree.
  static BathGraph with_parent(BathGraph bath, std::vector<SiteId> parent);

  bool operator==(const BathGraph&) const = default;

 private:

  std::vector<double> omega_;
  std::vector<Coupling> couplings_;
  BathMetadata meta_;
  std::vector<SiteLabel> labels_;
  std::vector<std::array<double, 2>> positions_;
  std::vector<SiteId> parent_;
};

struct AtomSpec {
  double omega0 = 0.0;
  double g = 0.0;
  SiteId site = 0;
};

/// Hermitian operator stored densely up to kDenseLimit, as a sparse
/// coordinate matrix beyond.
class HermitianOperator {
 public:
  static constexpr std::size_t kDenseLimit = 4096;

  explicit HermitianOperator(CMatrix dense, std::vector<std::string> labels = {});
  explicit HermitianOperator(Eigen::SparseMatrix<cplx> sparse,
                             std::vector<std::string> labels = {});

  std::size_t dimension() const { return dim_; }
  bool is_sparse() const { return sparse_.has_value(); }
  const std::vector<std::string>& basis_labels() const { return labels_; }

  CMatrix dense() const;
  CVector apply(const CVector& x) const;
  cplx element(std::size_t r, std::size_t c) const;

  /// Largest |H(r, c) - conj(H(c, r))|.
  double hermiticity_defect() const;

 private:
  std::size_t dim_ = 0;
  std::optional<CMatrix> dense_;
  std::optional<Eigen::SparseMatrix<cplx>> sparse_;
  std::vector<std::string> labels_;
};

HermitianOperator assemble_bath(const BathGraph& bath);

/// Bath with site v deleted together with all of its couplings. Remaining
/// sites keep their relative order; parent_index() records the map.
BathGraph remove_site(const BathGraph& bath, SiteId v);

/// Single-excitation atom + bath operator. Basis order: one excited-atom
/// state per atom (in the given order), then the bath sites.
HermitianOperator assemble_full(const BathGraph& bath,
                                const std::vector<AtomSpec>& atoms);

/// <v|H_B|psi> = sum_{i != v} J_{v,i} psi_i for psi living on B_v.
cplx boundary_element(const BathGraph& bath, SiteId v, const CVector& psi_vacancy);

/// Lift a state on B_v back to B with an explicit zero at v.
CVector embed_vacancy_state(const CVector& psi_vacancy, SiteId v);

/// Inverse of embed_vacancy_state (drops component v).
CVector restrict_to_vacancy(const CVector& psi, SiteId v);

/// Structured-text (JSON) serialization; lossless round trip.
std::string serialize(const BathGraph& bath);
BathGraph deserialize_bath(const std::string& text);

}  // namespace vds
