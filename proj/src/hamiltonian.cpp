#include "vds/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace vds {

namespace {

constexpr double kHermitianTol = 1e-12;

std::string pair_name(SiteId i, SiteId j) {
  std::ostringstream os;
  os << "(" << i << ", " << j << ")";
  return os.str();
}

}  // namespace

BathGraph::BathGraph(std::vector<double> omega, std::vector<Coupling> couplings,
                     BathMetadata meta, std::vector<SiteLabel> labels,
                     std::vector<std::array<double, 2>> positions)
    : omega_(std::move(omega)),
      meta_(meta),
      labels_(std::move(labels)),
      positions_(std::move(positions)) {
  const std::size_t m = omega_.size();
  if (!labels_.empty() && labels_.size() != m)
    throw Error("bath: label count " + std::to_string(labels_.size()) +
                " does not match site count " + std::to_string(m));
  if (!positions_.empty() && positions_.size() != m)
    throw Error("bath: position count does not match site count");

  // keyed by (min, max); value stored in the (min, max) orientation
  std::map<std::pair<SiteId, SiteId>, cplx> merged;
  std::map<std::pair<SiteId, SiteId>, bool> seen_directed;
  for (const auto& c : couplings) {
    if (c.i >= m || c.j >= m)
      throw Error("bath: coupling " + pair_name(c.i, c.j) + " references a site outside 0.." +
                  std::to_string(m == 0 ? 0 : m - 1));
    if (c.i == c.j)
      throw Error("bath: self coupling " + pair_name(c.i, c.j) +
                  " belongs in the site frequencies");
    if (!seen_directed.emplace(std::make_pair(c.i, c.j), true).second)
      throw Error("bath: duplicate coupling " + pair_name(c.i, c.j));
    const auto key = std::minmax(c.i, c.j);
    const cplx oriented = c.i < c.j ? c.value : std::conj(c.value);
    auto [it, inserted] = merged.emplace(key, oriented);
    if (!inserted) {
      if (std::abs(it->second - oriented) > kHermitianTol)
        throw Error("bath: non-Hermitian coupling pair " + pair_name(c.i, c.j) +
                    ": J_ji must equal conj(J_ij)");
    }
  }
  // keep the caller's order and orientation for first occurrences
  couplings_.reserve(merged.size());
  std::map<std::pair<SiteId, SiteId>, bool> emitted;
  for (const auto& c : couplings) {
    const auto key = std::minmax(c.i, c.j);
    if (emitted.emplace(key, true).second) couplings_.push_back(c);
  }
}

BathGraph BathGraph::with_parent(BathGraph bath, std::vector<SiteId> parent) {
  if (parent.size() != bath.size()) throw Error("bath: parent map size mismatch");
  bath.parent_ = std::move(parent);
  return bath;
}

std::optional<SiteId> BathGraph::find(const SiteLabel& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<SiteId>(it - labels_.begin());
}

std::vector<std::pair<SiteId, cplx>> BathGraph::neighbours(SiteId i) const {
  std::vector<std::pair<SiteId, cplx>> out;
  for (const auto& c : couplings_) {
    if (c.i == i) out.emplace_back(c.j, c.value);
    else if (c.j == i) out.emplace_back(c.i, std::conj(c.value));
  }
  return out;
}

std::array<double, 2> BathGraph::position(SiteId i) const {
  if (!positions_.empty()) return positions_.at(i);
  return {static_cast<double>(i), 0.0};
}

HermitianOperator::HermitianOperator(CMatrix dense, std::vector<std::string> labels)
    : dim_(static_cast<std::size_t>(dense.rows())), labels_(std::move(labels)) {
  if (dense.rows() != dense.cols()) throw Error("operator: matrix is not square");
  dense_ = std::move(dense);
  if (hermiticity_defect() > kHermitianTol)
    throw Error("operator: matrix is not Hermitian (defect " +
                std::to_string(hermiticity_defect()) + ")");
}

HermitianOperator::HermitianOperator(Eigen::SparseMatrix<cplx> sparse,
                                     std::vector<std::string> labels)
    : dim_(static_cast<std::size_t>(sparse.rows())), labels_(std::move(labels)) {
  if (sparse.rows() != sparse.cols()) throw Error("operator: matrix is not square");
  sparse.makeCompressed();
  sparse_ = std::move(sparse);
  if (hermiticity_defect() > kHermitianTol)
    throw Error("operator: matrix is not Hermitian");
}

CMatrix HermitianOperator::dense() const {
  if (dense_) return *dense_;
  return CMatrix(*sparse_);
}

CVector HermitianOperator::apply(const CVector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw Error("operator: vector dimension mismatch");
  if (dense_) return (*dense_) * x;
  return (*sparse_) * x;
}

cplx HermitianOperator::element(std::size_t r, std::size_t c) const {
  if (dense_) return (*dense_)(r, c);
  return sparse_->coeff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

double HermitianOperator::hermiticity_defect() const {
  if (dense_) return (*dense_ - dense_->adjoint()).cwiseAbs().maxCoeff();
  const Eigen::SparseMatrix<cplx> adj = sparse_->adjoint();
  const Eigen::SparseMatrix<cplx> diff = *sparse_ - adj;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(diff, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

void bath_triplets(const BathGraph& bath, std::size_t offset, Triplets& out) {
  const auto& omega = bath.omega();
  for (std::size_t i = 0; i < omega.size(); ++i)
    out.emplace_back(offset + i, offset + i, omega[i]);
  for (const auto& c : bath.couplings()) {
    out.emplace_back(offset + c.i, offset + c.j, c.value);
    out.emplace_back(offset + c.j, offset + c.i, std::conj(c.value));
  }
}

HermitianOperator from_triplets(std::size_t dim, const Triplets& t,
                                std::vector<std::string> labels) {
  if (dim <= HermitianOperator::kDenseLimit) {
    CMatrix h = CMatrix::Zero(dim, dim);
    for (const auto& e : t) h(e.row(), e.col()) += e.value();
    return HermitianOperator(std::move(h), std::move(labels));
  }
  Eigen::SparseMatrix<cplx> s(dim, dim);
  s.setFromTriplets(t.begin(), t.end());
  return HermitianOperator(std::move(s), std::move(labels));
}

std::vector<std::string> site_labels(const BathGraph& bath) {
  std::vector<std::string> out;
  out.reserve(bath.size());
  for (std::size_t i = 0; i < bath.size(); ++i) out.push_back("site " + std::to_string(i));
  return out;
}

}  // namespace

HermitianOperator assemble_bath(const BathGraph& bath) {
  Triplets t;
  bath_triplets(bath, 0, t);
  return from_triplets(bath.size(), t, site_labels(bath));
}

BathGraph remove_site(const BathGraph& bath, SiteId v) {
  const std::size_t m = bath.size();
  if (v >= m)
    throw Error("remove_site: site " + std::to_string(v) + " out of range (size " +
                std::to_string(m) + ")");
  auto shift = [v](SiteId i) { return i < v ? i : i - 1; };

  std::vector<double> omega;
  std::vector<SiteLabel> labels;
  std::vector<std::array<double, 2>> positions;
  std::vector<SiteId> parent;
  for (SiteId i = 0; i < m; ++i) {
    if (i == v) continue;
    omega.push_back(bath.omega()[i]);
    if (!bath.labels().empty()) labels.push_back(bath.labels()[i]);
    if (!bath.positions().empty()) positions.push_back(bath.positions()[i]);
    parent.push_back(bath.parent_index().empty() ? i : bath.parent_index()[i]);
  }
  std::vector<Coupling> couplings;
  for (const auto& c : bath.couplings()) {
    if (c.i == v || c.j == v) continue;
    couplings.push_back({shift(c.i), shift(c.j), c.value});
  }
  return BathGraph::with_parent(BathGraph(std::move(omega), std::move(couplings),
                                          bath.metadata(), std::move(labels),
                                          std::move(positions)),
                                std::move(parent));
}

HermitianOperator assemble_full(const BathGraph& bath, const std::vector<AtomSpec>& atoms) {
  const std::size_t na = atoms.size();
  std::vector<SiteId> used;
  for (const auto& a : atoms) {
    if (a.site >= bath.size())
      throw Error("assemble_full: atom site " + std::to_string(a.site) + " out of range");
    if (a.g < 0.0) throw Error("assemble_full: coupling g must be non-negative");
    if (std::find(used.begin(), used.end(), a.site) != used.end())
      throw Error("assemble_full: duplicate attachment site " + std::to_string(a.site));
    used.push_back(a.site);
  }
  Triplets t;
  for (std::size_t k = 0; k < na; ++k) {
    t.emplace_back(k, k, atoms[k].omega0);
    if (atoms[k].g != 0.0) {
      t.emplace_back(k, na + atoms[k].site, atoms[k].g);
      t.emplace_back(na + atoms[k].site, k, atoms[k].g);
    }
  }
  bath_triplets(bath, na, t);
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < na; ++k) labels.push_back("atom " + std::to_string(k));
  for (auto& s : site_labels(bath)) labels.push_back(std::move(s));
  return from_triplets(na + bath.size(), t, std::move(labels));
}

cplx boundary_element(const BathGraph& bath, SiteId v, const CVector& psi_vacancy) {
  if (v >= bath.size()) throw Error("boundary_element: site out of range");
  if (static_cast<std::size_t>(psi_vacancy.size()) + 1 != bath.size())
    throw Error("boundary_element: state has dimension " + std::to_string(psi_vacancy.size()) +
                ", expected " + std::to_string(bath.size() - 1));
  cplx sum = 0.0;
  for (const auto& [i, jvi] : bath.neighbours(v)) sum += jvi * psi_vacancy(i < v ? i : i - 1);
  return sum;
}

CVector embed_vacancy_state(const CVector& psi_vacancy, SiteId v) {
  const Eigen::Index n = psi_vacancy.size();
  if (static_cast<Eigen::Index>(v) > n) throw Error("embed: vacancy index out of range");
  CVector out(n + 1);
  out.head(v) = psi_vacancy.head(v);
  out(v) = 0.0;
  out.tail(n - v) = psi_vacancy.tail(n - v);
  return out;
}

CVector restrict_to_vacancy(const CVector& psi, SiteId v) {
  const Eigen::Index n = psi.size();
  if (static_cast<Eigen::Index>(v) >= n) throw Error("restrict: vacancy index out of range");
  CVector out(n - 1);
  out.head(v) = psi.head(v);
  out.tail(n - 1 - v) = psi.tail(n - 1 - v);
  return out;
}

// Schema (schema "vds.bath", version 1):
//   sites:     [{"omega": w, "label": [cx, cy, sub]?, "pos": [x, y]?}, ...]
//   couplings: [[i, j, re, im], ...]   meaning H(i, j) = re + i im
//   metadata:  {"cell_size": d, "range": R, "boundary": "periodic" | "open"}
//   parent:    [old index, ...]  (present only for vacancy baths)
std::string serialize(const BathGraph& bath) {
  using nlohmann::json;
  json j;
  j["schema"] = "vds.bath";
  j["version"] = 1;
  json sites = json::array();
  for (std::size_t i = 0; i < bath.size(); ++i) {
    json s;
    s["omega"] = bath.omega()[i];
    if (!bath.labels().empty()) {
      const auto& l = bath.labels()[i];
      s["label"] = {l.cell_x, l.cell_y, l.sublattice};
    }
    if (!bath.positions().empty()) s["pos"] = {bath.positions()[i][0], bath.positions()[i][1]};
    sites.push_back(std::move(s));
  }
  j["sites"] = std::move(sites);
  json cs = json::array();
  for (const auto& c : bath.couplings()) cs.push_back({c.i, c.j, c.value.real(), c.value.imag()});
  j["couplings"] = std::move(cs);
  const auto& m = bath.metadata();
  j["metadata"] = {{"cell_size", m.cell_size},
                   {"range", m.range},
                   {"boundary", m.boundary == Boundary::periodic ? "periodic" : "open"}};
  if (!bath.parent_index().empty()) j["parent"] = bath.parent_index();
  return j.dump(1);
}

BathGraph deserialize_bath(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("bath: parse error: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "vds.bath") throw Error("bath: wrong schema tag");
    std::vector<double> omega;
    std::vector<SiteLabel> labels;
    std::vector<std::array<double, 2>> positions;
    for (const auto& s : j.at("sites")) {
      omega.push_back(s.at("omega").get<double>());
      if (s.contains("label")) {
        const auto& l = s["label"];
        labels.push_back({l.at(0).get<int>(), l.at(1).get<int>(), l.at(2).get<int>()});
      }
      if (s.contains("pos")) positions.push_back({s["pos"].at(0).get<double>(), s["pos"].at(1).get<double>()});
    }
    std::vector<Coupling> couplings;
    for (const auto& c : j.at("couplings"))
      couplings.push_back({c.at(0).get<SiteId>(), c.at(1).get<SiteId>(),
                           cplx(c.at(2).get<double>(), c.at(3).get<double>())});
    BathMetadata meta;
    const auto& m = j.at("metadata");
    meta.cell_size = m.at("cell_size").get<int>();
    meta.range = m.at("range").get<int>();
    const auto bc = m.at("boundary").get<std::string>();
    if (bc != "periodic" && bc != "open") throw Error("bath: unknown boundary tag '" + bc + "'");
    meta.boundary = bc == "periodic" ? Boundary::periodic : Boundary::open;
    if (!j.contains("parent"))
      return BathGraph(std::move(omega), std::move(couplings), meta, std::move(labels),
                       std::move(positions));
    return BathGraph::with_parent(
        BathGraph(std::move(omega), std::move(couplings), meta, std::move(labels),
                  std::move(positions)),
        j["parent"].get<std::vector<SiteId>>());
  } catch (const json::exception& e) {
    throw Error(std::string("bath: malformed document: ") + e.what());
  }
}

}  // namespace vds
