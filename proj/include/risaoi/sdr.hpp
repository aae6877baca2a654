#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "risaoi/channel.hpp"
#include "risaoi/rng.hpp"

namespace risaoi {

// ---------------------------------------------------------------------------
// SDR matrix construction
// ---------------------------------------------------------------------------

/// Per-stream SDR data. theta is the (F+1)x(F+1) Hermitian lift matrix with a
/// zero bottom-right entry, and q is its rank-one generator:
///   theta = q q^H - direct_power * E_{F,F},   q = [conj(w); conj(h_bi)].
/// For vbar = [e^{j theta_1} ... e^{j theta_F} 1]^T the identity
///   vbar^H theta vbar + |h_bi|^2 = |sum_f w_f e^{j theta_f} + h_bi|^2
/// holds exactly, i.e. the lifted quadratic form reproduces the overall
/// channel gain of effective_gain().
struct StreamMatrices {
  Eigen::VectorXcd w;        // diag(h_bR^H) * h_Ri, length F
  Eigen::MatrixXcd theta;    // (F+1) x (F+1)
  double direct_power = 0.0; // |h_bi|^2
  Eigen::VectorXcd q;        // length F+1
};

/// Lightweight slice of StreamMatrices used by the solvers: the generator q,
/// the direct-link power and an objective weight.
struct GainTarget {
  Eigen::VectorXcd q;
  double direct_power = 0.0;
  double weight = 1.0;
};

inline Eigen::VectorXcd gain_generator(const ChannelRealization& ch, std::size_t i) {
  const Eigen::Index f = ch.elements();
  Eigen::VectorXcd q(f + 1);
  for (Eigen::Index k = 0; k < f; ++k) q[k] = ch.h_bR[k] * std::conj(ch.h_Ri[i][k]);
  q[f] = std::conj(ch.h_bi[i]);
  return q;
}

inline StreamMatrices build_matrices(const ChannelRealization& ch, std::size_t i) {
  if (i >= ch.streams()) throw std::out_of_range("build_matrices: stream index out of range");
  StreamMatrices m;
  const Eigen::Index f = ch.elements();
  m.w.resize(f);
  for (Eigen::Index k = 0; k < f; ++k) m.w[k] = std::conj(ch.h_bR[k]) * ch.h_Ri[i][k];
  m.direct_power = std::norm(ch.h_bi[i]);
  m.q = gain_generator(ch, i);
  m.theta = m.q * m.q.adjoint();
  m.theta(f, f) = 0.0;
  return m;
}

inline GainTarget make_gain_target(const ChannelRealization& ch, std::size_t i, double weight = 1.0) {
  return GainTarget{gain_generator(ch, i), std::norm(ch.h_bi[i]), weight};
}

/// Gain of stream target at a unit-modulus lifted vector vbar (last entry is
/// the reference phase): |q^H vbar|^2 == vbar^H theta vbar + direct_power.
inline double lifted_gain(const GainTarget& t, const Eigen::VectorXcd& vbar) {
  return std::norm(t.q.dot(vbar));  // Eigen's dot conjugates the left operand
}

// ---------------------------------------------------------------------------
// Rank-relaxed SDP: instance / solution types
// ---------------------------------------------------------------------------

enum class SdpStatus { optimal, infeasible, max_iter };

/// Complex-Hermitian SDP: maximize Re tr(C V) over V >= 0 with unit diagonal,
/// subject to tr(matrix_k V) + offset_k >= rhs_k.
struct SdpInstance {
  Eigen::MatrixXcd objective;  // C
  struct TraceInequality {
    Eigen::MatrixXcd matrix;
    double offset = 0.0;
    double rhs = 0.0;
  };
  std::vector<TraceInequality> inequalities;

  Eigen::Index dim() const { return objective.rows(); }
};

struct SdpSolution {
  Eigen::MatrixXcd V;
  double objective_value = 0.0;
  SdpStatus status = SdpStatus::max_iter;
  int iterations = 0;
  Eigen::VectorXd aux;  // auxiliary scalar variables, when the instance has them
};

namespace detail {

inline double herm_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.conjugate().cwiseProduct(b).sum().real();
}

inline void require_hermitian(const Eigen::MatrixXcd& a, const char* what) {
  const double scale = 1.0 + a.norm();
  if ((a - a.adjoint()).norm() > 1e-9 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
}

enum class ScalarSet { free_var, nonneg, box01 };

/// General conic program handled by the splitting solver:
///   maximize Re tr(C V) + c_y . y
///   s.t.     V_ff = 1 for all f,   Re tr(B_k V) + a_k . y = b_k,
///            V >= 0,               y_j in S_j.
struct SplitProblem {
  Eigen::Index dim = 0;
  Eigen::MatrixXcd objective;           // C
  Eigen::VectorXd objective_y;          // c_y
  std::vector<ScalarSet> scalar_sets;   // one per y entry
  struct Row {
    Eigen::MatrixXcd matrix;            // B_k
    Eigen::VectorXd coeff_y;            // a_k
    double rhs = 0.0;
  };
  std::vector<Row> rows;
};

struct SplitResult {
  Eigen::MatrixXcd V;
  Eigen::VectorXd y;
  SdpStatus status = SdpStatus::max_iter;
  int iterations = 0;
};

inline Eigen::MatrixXcd project_psd(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Two-block consensus ADMM. One copy of the variables lives on the affine
/// set (diagonal + trace rows), the other on the cone (PSD x scalar sets);
/// the affine projection solves a small dense normal system whose
/// factorization is computed once per instance.
inline SplitResult solve_split(const SplitProblem& pb, double tol, int max_iter) {
  const Eigen::Index n = pb.dim;
  const int m = static_cast<int>(pb.rows.size());
  const int p = static_cast<int>(pb.scalar_sets.size());

  require_hermitian(pb.objective, "solve_split objective");
  for (const auto& r : pb.rows) require_hermitian(r.matrix, "solve_split constraint");

  // Row scaling.
  std::vector<Eigen::MatrixXcd> B(m);
  Eigen::MatrixXd Ay(p, m);  // scaled a_k as columns
  Eigen::VectorXd b(std::max(m, 1));
  for (int k = 0; k < m; ++k) {
    const auto& row = pb.rows[k];
    const double s = std::max(1.0, std::sqrt(herm_inner(row.matrix, row.matrix) + row.coeff_y.squaredNorm()));
    B[k] = row.matrix / s;
    if (p > 0) Ay.col(k) = row.coeff_y / s;
    b[k] = row.rhs / s;
  }

  // Objective scaling (absorbed into the step size). Tiny objectives are
  // scaled up as well, otherwise the iteration stalls at its starting point.
  double obj_scale = pb.objective.norm();
  if (p > 0) obj_scale = std::max(obj_scale, pb.objective_y.lpNorm<Eigen::Infinity>());
  if (!(obj_scale > 1e-300)) obj_scale = 1.0;
  const Eigen::MatrixXcd Cs = pb.objective / obj_scale;
  const Eigen::VectorXd cys = (p > 0) ? Eigen::VectorXd(pb.objective_y / obj_scale) : Eigen::VectorXd();

  // Normal system for the affine projection.
  Eigen::MatrixXd D(n, std::max(m, 1));
  Eigen::MatrixXd H(std::max(m, 1), std::max(m, 1));
  for (int k = 0; k < m; ++k) {
    for (Eigen::Index f = 0; f < n; ++f) D(f, k) = B[k](f, f).real();
    for (int l = 0; l <= k; ++l) {
      double h = herm_inner(B[k], B[l]);
      if (p > 0) h += Ay.col(k).dot(Ay.col(l));
      H(k, l) = h;
      H(l, k) = h;
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> schur;
  if (m > 0) {
    Eigen::MatrixXd S = H.topLeftCorner(m, m) - D.leftCols(m).transpose() * D.leftCols(m);
    schur.compute(S);
    if (schur.info() != Eigen::Success)
      throw std::runtime_error("solve_split: affine projection system is singular");
  }

  auto project_scalars = [&](Eigen::VectorXd& y) {
    for (int j = 0; j < p; ++j) {
      switch (pb.scalar_sets[j]) {
        case ScalarSet::free_var: break;
        case ScalarSet::nonneg: y[j] = std::max(0.0, y[j]); break;
        case ScalarSet::box01: y[j] = std::clamp(y[j], 0.0, 1.0); break;
      }
    }
  };

  Eigen::MatrixXcd Vq = Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXd yq = Eigen::VectorXd::Zero(p);
  project_scalars(yq);
  Eigen::MatrixXcd Uv = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXd uy = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXcd Vp(n, n);
  Eigen::VectorXd yp(p);

  double rho = 1.0;
  double best_rel_rp = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  SdpStatus status = SdpStatus::max_iter;
  int it = 0;
  const int stall_window = 300;

  for (it = 1; it <= max_iter; ++it) {
    // Affine projection of (Vq - Uv + C/rho, yq - uy + c_y/rho).
    Vp = Vq - Uv + Cs / rho;
    if (p > 0) yp = yq - uy + cys / rho;
    Eigen::VectorXd rhs1(n);
    for (Eigen::Index f = 0; f < n; ++f) rhs1[f] = 1.0 - Vp(f, f).real();
    if (m > 0) {
      Eigen::VectorXd rhs2(m);
      for (int k = 0; k < m; ++k) {
        double r = herm_inner(B[k], Vp);
        if (p > 0) r += Ay.col(k).dot(yp);
        rhs2[k] = b[k] - r;
      }
      Eigen::VectorXd mu = schur.solve(rhs2 - D.leftCols(m).transpose() * rhs1);
      Eigen::VectorXd alpha = rhs1 - D.leftCols(m) * mu;
      for (Eigen::Index f = 0; f < n; ++f) Vp(f, f) += alpha[f];
      for (int k = 0; k < m; ++k) Vp += mu[k] * B[k];
      if (p > 0) yp += Ay.leftCols(m) * mu;
    } else {
      for (Eigen::Index f = 0; f < n; ++f) Vp(f, f) += rhs1[f];
    }

    // Cone projection.
    Eigen::MatrixXcd Vq_new = project_psd(Vp + Uv);
    Eigen::VectorXd yq_new = (p > 0) ? Eigen::VectorXd(yp + uy) : Eigen::VectorXd();
    project_scalars(yq_new);

    double r_dual = rho * std::sqrt((Vq_new - Vq).squaredNorm() +
                                    (p > 0 ? (yq_new - yq).squaredNorm() : 0.0));
    Vq.swap(Vq_new);
    if (p > 0) yq.swap(yq_new);

    Uv += Vp - Vq;
    if (p > 0) uy += yp - yq;

    const double r_prim = std::sqrt((Vp - Vq).squaredNorm() + (p > 0 ? (yp - yq).squaredNorm() : 0.0));
    const double scale_p = std::max({1.0, Vp.norm(), Vq.norm()});
    const double scale_d = std::max(1.0, rho * std::sqrt(Uv.squaredNorm() + uy.squaredNorm()));
    const double rel_rp = r_prim / scale_p;

    if (rel_rp < best_rel_rp * 0.99) {
      best_rel_rp = rel_rp;
      best_iter = it;
    }

    if (r_prim <= tol * scale_p && r_dual <= tol * scale_d) {
      status = SdpStatus::optimal;
      break;
    }
    // A primal residual pinned away from zero means the affine set and the
    // cone do not intersect.
    if (it - best_iter > stall_window && best_rel_rp > 100.0 * tol) {
      status = SdpStatus::infeasible;
      break;
    }
    if (it % 25 == 0) {
      const double rp = r_prim / (tol * scale_p + 1e-300);
      const double rd = r_dual / (tol * scale_d + 1e-300);
      if (rp > 10.0 * rd && rho < 1e6) {
        rho *= 2.0;
        Uv *= 0.5;
        uy *= 0.5;
      } else if (rd > 10.0 * rp && rho > 1e-6) {
        rho *= 0.5;
        Uv *= 2.0;
        uy *= 2.0;
      }
    }
  }
  if (it > max_iter) {
    it = max_iter;
    if (best_rel_rp > std::sqrt(tol)) status = SdpStatus::infeasible;
  }

  // Rescale the cone-side iterate so the diagonal is exactly one; a
  // congruence transform keeps it positive semidefinite.
  Eigen::VectorXd d(n);
  for (Eigen::Index f = 0; f < n; ++f) d[f] = 1.0 / std::sqrt(std::max(Vq(f, f).real(), 1e-12));
  SplitResult out;
  out.V = d.asDiagonal() * Vq * d.asDiagonal();
  out.y = yq;
  out.status = status;
  out.iterations = it;
  return out;
}

}  // namespace detail

/// Solve the rank-relaxed SDP by operator splitting (consensus ADMM with PSD
/// projection by eigendecomposition). Returns the best iterate with status
/// max_iter when the iteration cap is reached, and status infeasible when the
/// constraints cannot be met within tolerance.
inline SdpSolution solve_sdp(const SdpInstance& instance, double tol = 1e-6, int max_iter = 5000) {
  detail::require_hermitian(instance.objective, "solve_sdp objective");
  detail::SplitProblem pb;
  pb.dim = instance.dim();
  pb.objective = instance.objective;
  const int m = static_cast<int>(instance.inequalities.size());
  pb.objective_y = Eigen::VectorXd::Zero(m);
  pb.scalar_sets.assign(m, detail::ScalarSet::nonneg);
  for (int k = 0; k < m; ++k) {
    const auto& iq = instance.inequalities[k];
    if (!std::isfinite(iq.rhs) || !std::isfinite(iq.offset))
      throw std::invalid_argument("solve_sdp: constraint bound is not finite");
    detail::SplitProblem::Row row;
    row.matrix = iq.matrix;
    row.coeff_y = Eigen::VectorXd::Zero(m);
    row.coeff_y[k] = -1.0;  // slack
    row.rhs = iq.rhs - iq.offset;
    pb.rows.push_back(std::move(row));
  }
  detail::SplitResult r = detail::solve_split(pb, tol, max_iter);
  SdpSolution sol;
  sol.V = std::move(r.V);
  sol.objective_value = detail::herm_inner(instance.objective, sol.V);
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.aux = std::move(r.y);
  return sol;
}

// ---------------------------------------------------------------------------
// Low-rank factored solver for unit-diagonal gain SDPs
// ---------------------------------------------------------------------------

struct LowRankOptions {
  int rank = 0;          // 0 = automatic: ceil(sqrt(2 n)) + 1
  int max_sweeps = 2000;
  double tol = 1e-11;    // relative objective improvement per sweep
};

struct FactoredSolution {
  Eigen::MatrixXcd factor;  // n x r with unit-norm rows; V = factor factor^H
  double value = 0.0;       // sum_i w_i (tr(theta_i V) + d_i)
  int sweeps = 0;
};

namespace detail {

inline int auto_rank(Eigen::Index n, int requested) {
  if (requested > 0) return std::min<int>(requested, static_cast<int>(n));
  const int r = static_cast<int>(std::ceil(std::sqrt(2.0 * static_cast<double>(n)))) + 1;
  return std::max(2, std::min<int>(r, static_cast<int>(n)));
}

inline Eigen::MatrixXcd random_factor(Eigen::Index n, int r, RandomStream& rng) {
  Eigen::MatrixXcd m(n, r);
  for (Eigen::Index f = 0; f < n; ++f) {
    for (int j = 0; j < r; ++j) m(f, j) = rng.cscg();
    const double nr = m.row(f).norm();
    if (nr > 0.0) m.row(f) /= nr;
    else m(f, 0) = 1.0;
  }
  return m;
}

}  // namespace detail

/// Block-coordinate maximization of sum_i w_i q_i^H V q_i over V >= 0 with
/// unit diagonal, through the factorization V = R R^H with unit-norm rows.
/// Each row update is the exact maximizer given the other rows, so the
/// objective ascends monotonically. The factor width exceeds sqrt(2n), which
/// removes spurious local maxima for generic data.
inline FactoredSolution maximize_gain_lowrank(const std::vector<GainTarget>& targets,
                                              Eigen::Index dim, RandomStream& rng,
                                              const LowRankOptions& opt = {},
                                              const Eigen::MatrixXcd* warm_start = nullptr) {
  const int r = detail::auto_rank(dim, opt.rank);
  Eigen::MatrixXcd R;
  if (warm_start && warm_start->rows() == dim && warm_start->cols() == r) R = *warm_start;
  else R = detail::random_factor(dim, r, rng);

  const int nt = static_cast<int>(targets.size());
  std::vector<Eigen::RowVectorXcd> P(nt);  // P_i = q_i^H R
  for (int i = 0; i < nt; ++i) P[i] = targets[i].q.adjoint() * R;

  auto value = [&]() {
    double v = 0.0;
    for (int i = 0; i < nt; ++i) v += targets[i].weight * P[i].squaredNorm();
    return v;
  };

  double prev = value();
  int sweep = 0;
  Eigen::RowVectorXcd bf(r), delta(r);
  for (sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    for (Eigen::Index f = 0; f < dim; ++f) {
      bf.setZero();
      for (int i = 0; i < nt; ++i) {
        const cxd qf = targets[i].q[f];
        if (qf == cxd(0.0, 0.0)) continue;
        bf.noalias() += (targets[i].weight * qf) * (P[i] - std::conj(qf) * R.row(f));
      }
      const double nb = bf.norm();
      if (nb <= 1e-300) continue;
      delta = bf / nb - R.row(f);
      if (delta.squaredNorm() == 0.0) continue;
      for (int i = 0; i < nt; ++i) {
        const cxd qf = targets[i].q[f];
        if (qf != cxd(0.0, 0.0)) P[i].noalias() += std::conj(qf) * delta;
      }
      R.row(f) += delta;
    }
    const double cur = value();
    if (cur - prev <= opt.tol * std::max(1.0, std::abs(cur))) {
      prev = cur;
      break;
    }
    prev = cur;
  }

  // Refresh the inner products to clear accumulated drift.
  FactoredSolution out;
  out.factor = std::move(R);
  double v = 0.0;
  for (int i = 0; i < nt; ++i) v += targets[i].weight * (targets[i].q.adjoint() * out.factor).squaredNorm();
  out.value = v;
  out.sweeps = std::min(sweep, opt.max_sweeps);
  return out;
}

/// Exact maximizer of a single-stream gain q^H V q over unit-diagonal PSD V:
/// the rank-one aligned-phase vector.
inline Eigen::VectorXcd aligned_vector(const Eigen::VectorXcd& q) {
  Eigen::VectorXcd v(q.size());
  for (Eigen::Index f = 0; f < q.size(); ++f) {
    const double a = std::abs(q[f]);
    v[f] = (a > 0.0) ? q[f] / a : cxd(1.0, 0.0);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Gaussian randomization
// ---------------------------------------------------------------------------

struct RandomizationResult {
  PhaseProfile profile;
  double objective = 0.0;          // sum_i w_i (vbar^H theta_i vbar + d_i) at the result
  Eigen::VectorXcd lifted;         // the unit-modulus vbar behind the profile
};

namespace detail {

inline PhaseProfile extract_profile(const Eigen::VectorXcd& vbar_raw) {
  const Eigen::Index n = vbar_raw.size();
  std::vector<double> phases(static_cast<std::size_t>(n - 1));
  const cxd ref = (vbar_raw[n - 1] != cxd(0.0, 0.0)) ? vbar_raw[n - 1] : cxd(1.0, 0.0);
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    const cxd w = vbar_raw[f] / ref;
    double t = std::atan2(w.imag(), w.real());
    if (t < 0.0) t += kTwoPi;
    phases[static_cast<std::size_t>(f)] = (w == cxd(0.0, 0.0)) ? 0.0 : t;
  }
  return PhaseProfile(std::move(phases));
}

inline Eigen::VectorXcd lift_profile(const PhaseProfile& p) {
  Eigen::VectorXcd v(p.size() + 1);
  for (std::size_t f = 0; f < p.size(); ++f) v[static_cast<Eigen::Index>(f)] = p.coefficient(f);
  v[static_cast<Eigen::Index>(p.size())] = 1.0;
  return v;
}

inline double weighted_objective(const std::vector<GainTarget>& targets, const Eigen::VectorXcd& vbar) {
  double v = 0.0;
  for (const auto& t : targets) v += t.weight * lifted_gain(t, vbar);
  return v;
}

struct CandidateTracker {
  explicit CandidateTracker(const std::vector<GainTarget>& t) : targets(t) {}

  const std::vector<GainTarget>& targets;
  double best = -std::numeric_limits<double>::infinity();
  PhaseProfile best_profile;
  Eigen::VectorXcd best_lifted;

  void consider(const Eigen::VectorXcd& raw) {
    PhaseProfile p = extract_profile(raw);
    Eigen::VectorXcd lifted = lift_profile(p);
    const double obj = weighted_objective(targets, lifted);
    if (obj > best) {
      best = obj;
      best_profile = std::move(p);
      best_lifted = std::move(lifted);
    }
  }
};

}  // namespace detail

/// Gaussian randomization from a solved relaxation: draw CSCG samples with
/// covariance V, project each onto unit-modulus phases through
/// v = exp(j arg(vbar_{1:F} / vbar_{F+1})), and keep the best weighted gain.
/// The deterministic principal-eigenvector candidate is always evaluated too.
inline RandomizationResult gaussian_randomization(const SdpSolution& solution,
                                                  const std::vector<GainTarget>& targets,
                                                  int samples, RandomStream& rng) {
  if (samples < 1) throw std::invalid_argument("gaussian_randomization: samples must be >= 1");
  const Eigen::Index n = solution.V.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (solution.V + solution.V.adjoint()));
  const double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-7 * lmax)
    throw std::logic_error("gaussian_randomization: V is not positive semidefinite");

  detail::CandidateTracker tracker{targets};
  // Principal eigenvector (deterministic candidate).
  tracker.consider(es.eigenvectors().col(n - 1));

  Eigen::VectorXd sigma_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXcd rvec(n), vbar(n);
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < n; ++k) rvec[k] = rng.cscg() * sigma_sqrt[k];
    vbar.noalias() = es.eigenvectors() * rvec;
    tracker.consider(vbar);
  }
  return RandomizationResult{std::move(tracker.best_profile), tracker.best, std::move(tracker.best_lifted)};
}

/// Randomization from a factored relaxation V = R R^H: samples R xi with
/// xi ~ CN(0, I) have covariance V, so no eigendecomposition is needed. The
/// deterministic candidate is the exact principal eigenvector of V, obtained
/// from the small Gram matrix of R.
inline RandomizationResult gaussian_randomization(const Eigen::MatrixXcd& factor,
                                                  const std::vector<GainTarget>& targets,
                                                  int samples, RandomStream& rng) {
  if (samples < 1) throw std::invalid_argument("gaussian_randomization: samples must be >= 1");
  const Eigen::Index n = factor.rows();
  const Eigen::Index r = factor.cols();

  detail::CandidateTracker tracker{targets};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gram(factor.adjoint() * factor);
  tracker.consider(factor * gram.eigenvectors().col(r - 1));

  Eigen::VectorXcd xi(r), vbar(n);
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < r; ++k) xi[k] = rng.cscg();
    vbar.noalias() = factor * xi;
    tracker.consider(vbar);
  }
  return RandomizationResult{std::move(tracker.best_profile), tracker.best, std::move(tracker.best_lifted)};
}

/// Phases of a unit-modulus vector, mapped into [0, 2*pi).
inline PhaseProfile phases_from_vector(const Eigen::VectorXcd& v) {
  std::vector<double> phases(static_cast<std::size_t>(v.size()));
  for (Eigen::Index f = 0; f < v.size(); ++f) {
    if (std::abs(std::abs(v[f]) - 1.0) >= 1e-6)
      throw std::logic_error("phases_from_vector: entry is not unit modulus");
    double t = std::atan2(v[f].imag(), v[f].real());
    if (t < 0.0) t += kTwoPi;
    phases[static_cast<std::size_t>(f)] = t;
  }
  return PhaseProfile(std::move(phases));
}

// ---------------------------------------------------------------------------
// Scheduling-level solves shared by the policies
// ---------------------------------------------------------------------------

enum class SdpSolverKind { lowrank, splitting };

struct SdrEngineOptions {
  SdpSolverKind kind = SdpSolverKind::lowrank;
  double tol = 1e-6;   // splitting-path tolerance
  int max_iter = 5000; // splitting-path iteration cap
  LowRankOptions lowrank;
  int op2_outer = 10;
  int op3_outer = 12;
  int samples = 100;   // randomization samples
};

/// Outcome of one relaxation solve, in either representation.
struct GainSolve {
  std::optional<Eigen::MatrixXcd> factor;  // lowrank path
  std::optional<SdpSolution> sdp;          // splitting path
  double relax_value = 0.0;                // sum_i w_i (tr(theta_i V) + d_i)
  int iterations = 0;
  int solves = 0;
};

inline Eigen::MatrixXcd dense_objective(const std::vector<GainTarget>& targets, Eigen::Index dim) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : targets) {
    c.noalias() += t.weight * (t.q * t.q.adjoint());
    c(dim - 1, dim - 1) -= t.weight * t.direct_power;
  }
  return c;
}

/// Weighted sum-gain relaxation max sum_i w_i (tr(theta_i V) + d_i).
inline GainSolve solve_weighted_gain(const std::vector<GainTarget>& targets, Eigen::Index dim,
                                     const SdrEngineOptions& opt, RandomStream& rng) {
  GainSolve out;
  out.solves = 1;
  if (opt.kind == SdpSolverKind::lowrank) {
    FactoredSolution f = maximize_gain_lowrank(targets, dim, rng, opt.lowrank);
    out.relax_value = f.value;
    out.iterations = f.sweeps;
    out.factor = std::move(f.factor);
  } else {
    SdpInstance inst;
    inst.objective = dense_objective(targets, dim);
    SdpSolution s = solve_sdp(inst, opt.tol, opt.max_iter);
    double constants = 0.0;
    for (const auto& t : targets) constants += t.weight * t.direct_power;
    out.relax_value = s.objective_value + constants;
    out.iterations = s.iterations;
    out.sdp = std::move(s);
  }
  return out;
}

inline RandomizationResult randomize(const GainSolve& solve, const std::vector<GainTarget>& targets,
                                     int samples, RandomStream& rng) {
  if (solve.factor) return gaussian_randomization(*solve.factor, targets, samples, rng);
  return gaussian_randomization(*solve.sdp, targets, samples, rng);
}

/// Candidate selection with a caller-chosen score. Candidates are the
/// Gaussian samples, the principal eigenvector and (optionally) the
/// single-stream aligned beams; scores compare lexicographically.
template <typename Scorer>
inline RandomizationResult randomize_scored(const GainSolve& solve,
                                            const std::vector<GainTarget>& targets, int samples,
                                            RandomStream& rng, bool include_aligned,
                                            Scorer&& score_of) {
  if (samples < 1) throw std::invalid_argument("randomize_scored: samples must be >= 1");
  RandomizationResult best;
  std::pair<double, double> best_score{-std::numeric_limits<double>::infinity(),
                                       -std::numeric_limits<double>::infinity()};
  bool have = false;
  auto consider = [&](const Eigen::VectorXcd& raw) {
    PhaseProfile p = detail::extract_profile(raw);
    Eigen::VectorXcd lifted = detail::lift_profile(p);
    const std::pair<double, double> s = score_of(lifted);
    if (!have || s > best_score) {
      have = true;
      best_score = s;
      best.objective = s.first;
      best.profile = std::move(p);
      best.lifted = std::move(lifted);
    }
  };
  if (include_aligned)
    for (const auto& t : targets) consider(aligned_vector(t.q));
  if (solve.factor) {
    const Eigen::MatrixXcd& factor = *solve.factor;
    const Eigen::Index r = factor.cols();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gram(factor.adjoint() * factor);
    consider(factor * gram.eigenvectors().col(r - 1));
    Eigen::VectorXcd xi(r);
    for (int s = 0; s < samples; ++s) {
      for (Eigen::Index k = 0; k < r; ++k) xi[k] = rng.cscg();
      consider(factor * xi);
    }
  } else {
    const Eigen::MatrixXcd& V = solve.sdp->V;
    const Eigen::Index n = V.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (V + V.adjoint()));
    consider(es.eigenvectors().col(n - 1));
    const Eigen::VectorXd sig = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXcd rvec(n);
    for (int s = 0; s < samples; ++s) {
      for (Eigen::Index k = 0; k < n; ++k) rvec[k] = rng.cscg() * sig[k];
      consider(es.eigenvectors() * rvec);
    }
  }
  return best;
}

/// Randomization scored by (streams cleared, weakest gain): fair to the kept
/// set when jointly reachable, concentrated on the reachable member when not.
inline RandomizationResult randomize_served_min(const GainSolve& solve,
                                                const std::vector<GainTarget>& targets,
                                                double floor_gain, int cap, int samples,
                                                RandomStream& rng) {
  return randomize_scored(solve, targets, samples, rng, true,
                          [&](const Eigen::VectorXcd& lifted) {
                            int count = 0;
                            double ming = std::numeric_limits<double>::infinity();
                            for (const auto& t : targets) {
                              const double g = lifted_gain(t, lifted);
                              if (g >= floor_gain) ++count;
                              ming = std::min(ming, g);
                            }
                            return std::pair<double, double>(std::min(count, cap), ming);
                          });
}

/// Feasibility-style solve: maximize the minimum per-stream gain
/// min_i (tr(theta_i V) + d_i) over the kept set. The kept set is feasible at
/// threshold tau when the optimum is >= tau.
struct MaxMinResult {
  GainSolve solve;
  double min_gain = 0.0;  // best certified min_i gain
};

inline MaxMinResult solve_maxmin_gain(const std::vector<GainTarget>& targets, Eigen::Index dim,
                                      const SdrEngineOptions& opt, RandomStream& rng) {
  if (targets.empty()) throw std::invalid_argument("solve_maxmin_gain: empty target set");
  MaxMinResult out;

  if (opt.kind == SdpSolverKind::splitting) {
    // maximize t s.t. tr(theta_i V) - t - s_i = tau-ish; here tau folded out:
    // rows: tr(theta_i V) + d_i - t >= 0 as equality with slack.
    detail::SplitProblem pb;
    pb.dim = dim;
    pb.objective = Eigen::MatrixXcd::Zero(dim, dim);
    const int k = static_cast<int>(targets.size());
    const int p = k + 1;  // slacks + t
    pb.objective_y = Eigen::VectorXd::Zero(p);
    pb.objective_y[k] = 1.0;  // maximize t
    pb.scalar_sets.assign(k, detail::ScalarSet::nonneg);
    pb.scalar_sets.push_back(detail::ScalarSet::free_var);
    for (int i = 0; i < k; ++i) {
      detail::SplitProblem::Row row;
      row.matrix = targets[i].q * targets[i].q.adjoint();
      row.matrix(dim - 1, dim - 1) -= targets[i].direct_power;
      row.coeff_y = Eigen::VectorXd::Zero(p);
      row.coeff_y[i] = -1.0;  // slack
      row.coeff_y[k] = -1.0;  // - t
      row.rhs = -targets[i].direct_power;
      pb.rows.push_back(std::move(row));
    }
    detail::SplitResult r = detail::solve_split(pb, opt.tol, opt.max_iter);
    GainSolve gs;
    gs.solves = 1;
    gs.iterations = r.iterations;
    SdpSolution sol;
    sol.V = std::move(r.V);
    sol.status = r.status;
    sol.iterations = r.iterations;
    gs.sdp = std::move(sol);
    double ming = std::numeric_limits<double>::infinity();
    for (const auto& t : targets) {
      const double g = (t.q.adjoint() * gs.sdp->V * t.q).real().value();
      ming = std::min(ming, g);
    }
    gs.relax_value = ming;
    out.min_gain = ming;
    out.solve = std::move(gs);
    return out;
  }

  const int k = static_cast<int>(targets.size());
  GainSolve gs;
  gs.solves = 0;

  auto gains_of = [&](const Eigen::MatrixXcd& R) {
    Eigen::VectorXd g(k);
    for (int i = 0; i < k; ++i) g[i] = (targets[i].q.adjoint() * R).squaredNorm();
    return g;
  };

  double best = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd best_factor;

  // Single-stream aligned vectors are exact for k = 1 and useful fallbacks
  // otherwise.
  for (int j = 0; j < k; ++j) {
    Eigen::MatrixXcd cand = aligned_vector(targets[j].q);
    const double ming = gains_of(cand).minCoeff();
    if (ming > best) {
      best = ming;
      best_factor = std::move(cand);
    }
  }

  if (k > 1) {
    // Multiplicative-weights descent on the simplex of constraint weights.
    Eigen::VectorXd lambda = Eigen::VectorXd::Constant(k, 1.0 / k);
    std::vector<GainTarget> weighted = targets;
    Eigen::MatrixXcd warm;
    for (int outer = 1; outer <= opt.op3_outer; ++outer) {
      for (int i = 0; i < k; ++i) weighted[i].weight = lambda[i];
      FactoredSolution f = maximize_gain_lowrank(weighted, dim, rng, opt.lowrank,
                                                 warm.size() > 0 ? &warm : nullptr);
      gs.solves += 1;
      gs.iterations += f.sweeps;
      warm = f.factor;
      Eigen::VectorXd g = gains_of(f.factor);
      const double ming = g.minCoeff();
      if (ming > best) {
        best = ming;
        best_factor = f.factor;
      }
      const double gmax = std::max(g.maxCoeff(), 1e-300);
      const double eta = 1.0 / std::sqrt(static_cast<double>(outer));
      for (int i = 0; i < k; ++i) lambda[i] *= std::exp(-eta * g[i] / gmax);
      const double z = lambda.sum();
      if (z <= 0.0) lambda.setConstant(1.0 / k);
      else lambda /= z;
      for (int i = 0; i < k; ++i) lambda[i] = std::max(lambda[i], 1e-12);
      lambda /= lambda.sum();
    }
  }

  gs.factor = std::move(best_factor);
  gs.relax_value = best;
  gs.solves = std::max(gs.solves, 1);
  out.min_gain = best;
  out.solve = std::move(gs);
  return out;
}

/// Joint scheduling relaxation: maximize sum_i age_i x_i over x in [0,1]^I
/// with sum x <= budget and per-stream gain constraints
/// tr(theta_i V) + d_i >= snr_floor * x_i for streams with a queued packet.
struct Op2Result {
  std::vector<double> scores;  // relaxed x, zero for streams without a packet
  GainSolve solve;             // relaxation handle for the final V
};

inline Op2Result solve_scheduling_relaxation(const std::vector<GainTarget>& targets,
                                             const std::vector<bool>& has_packet,
                                             const std::vector<double>& ages, double snr_floor,
                                             int budget, Eigen::Index dim,
                                             const SdrEngineOptions& opt, RandomStream& rng) {
  const int total = static_cast<int>(targets.size());
  Op2Result out;
  out.scores.assign(total, 0.0);
  std::vector<int> active;
  for (int i = 0; i < total; ++i)
    if (has_packet[i]) active.push_back(i);
  if (active.empty()) return out;

  if (opt.kind == SdpSolverKind::splitting) {
    const int m = static_cast<int>(active.size());
    detail::SplitProblem pb;
    pb.dim = dim;
    pb.objective = Eigen::MatrixXcd::Zero(dim, dim);
    // y layout: [x_0..x_{m-1} | s_0..s_{m-1} | u_budget]
    const int p = 2 * m + 1;
    pb.objective_y = Eigen::VectorXd::Zero(p);
    pb.scalar_sets.assign(m, detail::ScalarSet::box01);
    pb.scalar_sets.insert(pb.scalar_sets.end(), m, detail::ScalarSet::nonneg);
    pb.scalar_sets.push_back(detail::ScalarSet::nonneg);
    for (int j = 0; j < m; ++j) pb.objective_y[j] = ages[active[j]];
    for (int j = 0; j < m; ++j) {
      const auto& t = targets[active[j]];
      detail::SplitProblem::Row row;
      row.matrix = t.q * t.q.adjoint();
      row.matrix(dim - 1, dim - 1) -= t.direct_power;
      row.coeff_y = Eigen::VectorXd::Zero(p);
      row.coeff_y[j] = -snr_floor;
      row.coeff_y[m + j] = -1.0;
      row.rhs = -t.direct_power;
      pb.rows.push_back(std::move(row));
    }
    {
      detail::SplitProblem::Row row;
      row.matrix = Eigen::MatrixXcd::Zero(dim, dim);
      row.coeff_y = Eigen::VectorXd::Zero(p);
      for (int j = 0; j < m; ++j) row.coeff_y[j] = 1.0;
      row.coeff_y[2 * m] = 1.0;
      row.rhs = static_cast<double>(budget);
      pb.rows.push_back(std::move(row));
    }
    detail::SplitResult r = detail::solve_split(pb, opt.tol, opt.max_iter);
    for (int j = 0; j < m; ++j) out.scores[active[j]] = std::clamp(r.y[j], 0.0, 1.0);
    GainSolve gs;
    gs.solves = 1;
    gs.iterations = r.iterations;
    SdpSolution sol;
    sol.V = std::move(r.V);
    sol.status = r.status;
    sol.iterations = r.iterations;
    gs.sdp = std::move(sol);
    out.solve = std::move(gs);
    return out;
  }

  // Low-rank path: dual subgradient on the gain constraints. The inner
  // problem for fixed multipliers is a weighted sum-gain relaxation.
  const int m = static_cast<int>(active.size());
  double age_max = 1.0;
  for (int i : active) age_max = std::max(age_max, ages[i]);
  Eigen::VectorXd nu(m);
  for (int j = 0; j < m; ++j) nu[j] = 0.5 * ages[active[j]];

  std::vector<GainTarget> weighted;
  weighted.reserve(m);
  for (int j = 0; j < m; ++j) weighted.push_back(targets[active[j]]);

  GainSolve gs;
  gs.solves = 0;
  Eigen::MatrixXcd warm;
  Eigen::VectorXd ghat = Eigen::VectorXd::Zero(m);
  for (int outer = 1; outer <= opt.op2_outer; ++outer) {
    for (int j = 0; j < m; ++j)
      weighted[j].weight = std::max(nu[j], 0.05 * ages[active[j]]);
    FactoredSolution f = maximize_gain_lowrank(weighted, dim, rng, opt.lowrank,
                                               warm.size() > 0 ? &warm : nullptr);
    gs.solves += 1;
    gs.iterations += f.sweeps;
    warm = f.factor;
    for (int j = 0; j < m; ++j)
      ghat[j] = (targets[active[j]].q.adjoint() * f.factor).squaredNorm() / snr_floor;

    // Budget-constrained x for the current multipliers.
    std::vector<int> order(m);
    for (int j = 0; j < m; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double ca = ages[active[a]] - nu[a], cb = ages[active[b]] - nu[b];
      if (ca != cb) return ca > cb;
      return active[a] < active[b];
    });
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    int used = 0;
    for (int j : order) {
      if (used >= budget) break;
      if (ages[active[j]] - nu[j] <= 0.0) break;
      x[j] = 1.0;
      ++used;
    }

    const double eta = 0.5 * age_max / std::sqrt(static_cast<double>(outer));
    for (int j = 0; j < m; ++j)
      nu[j] = std::clamp(nu[j] - eta * (ghat[j] - x[j]), 0.0, 2.0 * age_max);
  }

  // Relaxed scores: the exact optimum of the x-subproblem at the final V.
  std::vector<int> order(m);
  for (int j = 0; j < m; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ages[active[a]] != ages[active[b]]) return ages[active[a]] > ages[active[b]];
    return active[a] < active[b];
  });
  double remaining = static_cast<double>(budget);
  for (int j : order) {
    if (remaining <= 0.0) break;
    const double cap = std::clamp(ghat[j], 0.0, 1.0);
    const double xi = std::min(cap, remaining);
    out.scores[active[j]] = xi;
    remaining -= xi;
  }

  gs.factor = std::move(warm);
  gs.relax_value = 0.0;
  out.solve = std::move(gs);
  return out;
}

}  // namespace risaoi
