#include "vds/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

extern "C" void openblas_set_num_threads(int);

namespace vds {

namespace {

// Single-threaded BLAS keeps results independent of how many sweep workers
// call in concurrently.
void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

lapack_complex_double* lapack_ptr(CMatrix& a) {
  return reinterpret_cast<lapack_complex_double*>(a.data());
}

void fix_phases(CMatrix& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) fix_phase(vectors.col(k));
}

}  // namespace

void fix_phase(Eigen::Ref<CVector> v) {
  if (v.size() == 0) return;
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return;
  Eigen::Index pick = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) >= top * (1.0 - 1e-9)) {
      pick = i;
      break;
    }
  v *= std::conj(v(pick)) / std::abs(v(pick));
  v(pick) = std::abs(v(pick));
}

EigenSystem diagonalize(const CMatrix& h) {
  pin_blas_threads();
  const auto n = static_cast<lapack_int>(h.rows());
  EigenSystem es;
  es.vectors = h;
  es.values.resize(n);
  if (n == 0) return es;
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, lapack_ptr(es.vectors), n, es.values.data());
  if (info != 0) {
    // report how far the best available decomposition is from converged
    Eigen::SelfAdjointEigenSolver<CMatrix> fallback(h);
    const double residual =
        (h * fallback.eigenvectors() - fallback.eigenvectors() * fallback.eigenvalues().asDiagonal())
            .cwiseAbs()
            .maxCoeff();
    throw Error("diagonalize: zheevd failed to converge (info " + std::to_string(info) +
                "), achieved residual " + std::to_string(residual));
  }
  fix_phases(es.vectors);
  return es;
}

EigenSystem diagonalize(const HermitianOperator& h) { return diagonalize(h.dense()); }

EigenSystem diagonalize_window(const CMatrix& h, double lo, double hi) {
  pin_blas_threads();
  const auto n = static_cast<lapack_int>(h.rows());
  EigenSystem es;
  if (n == 0 || !(hi > lo)) {
    es.vectors.resize(n, 0);
    return es;
  }
  CMatrix a = h;
  RVector w(n);
  CMatrix z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info =
      LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, lapack_ptr(a), n, lo, hi, 0, 0, abstol,
                     &found, w.data(), lapack_ptr(z), n, support.data());
  if (info != 0)
    throw Error("diagonalize_window: zheevr failed (info " + std::to_string(info) + ")");
  es.values = w.head(found);
  es.vectors = z.leftCols(found);
  fix_phases(es.vectors);
  return es;
}

RVector eigenvalues(const CMatrix& h) {
  pin_blas_threads();
  const auto n = static_cast<lapack_int>(h.rows());
  CMatrix a = h;
  RVector w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, lapack_ptr(a), n, w.data());
  if (info != 0) throw Error("eigenvalues: zheevd failed (info " + std::to_string(info) + ")");
  return w;
}

RVector eigenvalues(const HermitianOperator& h) { return eigenvalues(h.dense()); }

std::vector<GapInfo> find_gaps(const RVector& values, double min_width) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  std::vector<GapInfo> out;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double w = v[k] - v[k - 1];
    if (w > min_width) out.push_back({0.5 * (v[k] + v[k - 1]), w});
  }
  return out;
}

std::optional<GapInfo> widest_gap(const RVector& values, double min_width) {
  const auto gaps = find_gaps(values, min_width);
  if (gaps.empty()) return std::nullopt;
  return *std::max_element(gaps.begin(), gaps.end(),
                           [](const GapInfo& a, const GapInfo& b) { return a.width < b.width; });
}

std::vector<InGapState> find_ingap_states(const EigenSystem& es, const GapInfo& gap,
                                          double margin) {
  const double lo = gap.lower() + margin * gap.width;
  const double hi = gap.upper() - margin * gap.width;
  std::vector<InGapState> out;
  for (Eigen::Index k = 0; k < es.size(); ++k)
    if (es.values(k) > lo && es.values(k) < hi) out.push_back({es.values(k), es.vector(k)});
  return out;
}

std::vector<double> ingap_values(const RVector& values, const GapInfo& gap, double margin) {
  const double lo = gap.lower() + margin * gap.width;
  const double hi = gap.upper() - margin * gap.width;
  std::vector<double> out;
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (values(k) > lo && values(k) < hi) out.push_back(values(k));
  return out;
}

std::size_t count_levels(std::vector<double> values, double tol) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  std::size_t levels = 1;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] - values[k - 1] > tol) ++levels;
  return levels;
}

std::vector<int> cell_distances(const BathGraph& bath, SiteId center) {
  const std::size_t m = bath.size();
  if (center >= m) throw Error("cell_distances: center out of range");
  // cells from labels; unlabeled baths treat every site as a cell
  std::map<std::pair<int, int>, int> cell_id;
  std::vector<int> cell_of(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (bath.labels().empty()) {
      cell_of[i] = static_cast<int>(i);
      continue;
    }
    const auto& l = bath.labels()[i];
    auto [it, _] = cell_id.emplace(std::make_pair(l.cell_x, l.cell_y), static_cast<int>(cell_id.size()));
    cell_of[i] = it->second;
  }
  const int ncell = bath.labels().empty() ? static_cast<int>(m) : static_cast<int>(cell_id.size());
  std::vector<std::vector<int>> adj(ncell);
  for (const auto& c : bath.couplings()) {
    const int a = cell_of[c.i];
    const int b = cell_of[c.j];
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> dist(ncell, -1);
  std::queue<int> q;
  dist[cell_of[center]] = 0;
  q.push(cell_of[center]);
  while (!q.empty()) {
    const int a = q.front();
    q.pop();
    for (int b : adj[a])
      if (dist[b] < 0) {
        dist[b] = dist[a] + 1;
        q.push(b);
      }
  }
  std::vector<int> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = dist[cell_of[i]];
  return out;
}

LocalizationMetrics localization(const CVector& state, const BathGraph& bath, SiteId center) {
  if (static_cast<std::size_t>(state.size()) != bath.size())
    throw Error("localization: state dimension does not match bath");
  const double norm2 = state.squaredNorm();
  if (norm2 == 0.0) throw Error("localization: zero state");
  LocalizationMetrics out;
  out.center = center;
  const RVector p = state.cwiseAbs2() / norm2;
  out.ipr = p.cwiseAbs2().sum();

  const auto dist = cell_distances(bath, center);
  const int dmax = *std::max_element(dist.begin(), dist.end());
  out.cell_probability.assign(static_cast<std::size_t>(std::max(dmax, 0)) + 1, 0.0);
  for (std::size_t i = 0; i < bath.size(); ++i)
    if (dist[i] >= 0) out.cell_probability[dist[i]] += p(static_cast<Eigen::Index>(i));

  const auto& cp = out.cell_probability;
  const auto peak = static_cast<std::size_t>(std::max_element(cp.begin(), cp.end()) - cp.begin());
  constexpr double floor = 1e-18;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t d = peak; d < cp.size(); ++d) {
    if (cp[d] <= floor * cp[peak]) break;
    if (d > peak && cp[d] > cp[d - 1]) break;
    xs.push_back(static_cast<double>(d));
    ys.push_back(std::log(cp[d]));
  }
  if (xs.size() < 3) return out;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (slope < 0.0) out.decay_length = -2.0 / slope;
  return out;
}

}  // namespace vds
