#include "fdi2d/lmi.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace fdi2d {

namespace {

double lambda_max(const Matrix& a) {
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  const Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min(const Matrix& a) {
  const Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool nearly_symmetric(const Matrix& a) {
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Matrix hstack(const std::vector<Matrix>& blocks) {
  Eigen::Index cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  Matrix out(blocks.empty() ? 0 : blocks[0].rows(), cols);
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

void require_spd(const std::vector<Matrix>& r, Eigen::Index n) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].rows() != n || r[i].cols() != n)
      throw DimensionError("Lyapunov matrix R" + std::to_string(i + 1) + " has the wrong size");
    if (!nearly_symmetric(r[i]))
      throw std::invalid_argument("Lyapunov matrix R" + std::to_string(i + 1) + " is not symmetric");
    if (lambda_min(r[i]) <= 0.0)
      throw std::invalid_argument("Lyapunov matrix R" + std::to_string(i + 1) + " is not positive definite");
  }
}

void require_ops(const std::vector<Matrix>& ops) {
  if (ops.empty()) throw DimensionError("no shift operators");
  for (const auto& a : ops)
    if (a.rows() != ops[0].rows() || a.cols() != ops[0].rows())
      throw DimensionError("shift operators must be square and of equal size");
}

struct Affine {
  Matrix f0;
  std::vector<Matrix> fi;
};

}  // namespace

int SdpProblem::add_variable(int rows, int cols, bool symmetric) {
  if (rows < 0 || cols < 0 || (symmetric && rows != cols))
    throw MalformedLmi("invalid variable shape");
  vars_.push_back({rows, cols, symmetric});
  return static_cast<int>(vars_.size()) - 1;
}

void SdpProblem::add_constraint(Function g, std::string label) {
  cons_.push_back({std::move(g), std::move(label)});
}

SdpResult SdpProblem::solve(const SdpOptions& opt) const {
  if (cons_.empty()) throw MalformedLmi("no constraints");

  struct Slot {
    int var, r, c;
  };
  std::vector<Slot> slots;
  for (int v = 0; v < static_cast<int>(vars_.size()); ++v) {
    const auto& var = vars_[v];
    for (int c = 0; c < var.cols; ++c)
      for (int r = 0; r < (var.symmetric ? c + 1 : var.rows); ++r) slots.push_back({v, r, c});
  }
  const int p = static_cast<int>(slots.size());

  auto assemble = [&](const Vector& x) {
    std::vector<Matrix> vals;
    for (const auto& var : vars_) vals.push_back(Matrix::Zero(var.rows, var.cols));
    for (int s = 0; s < p; ++s) {
      const auto& sl = slots[s];
      vals[sl.var](sl.r, sl.c) = x(s);
      if (vars_[sl.var].symmetric) vals[sl.var](sl.c, sl.r) = x(s);
    }
    return vals;
  };

  std::vector<Affine> aff;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& con : cons_) {
    const std::string tag = con.label.empty() ? "constraint" : "constraint '" + con.label + "'";
    Affine a;
    a.f0 = con.g(assemble(Vector::Zero(p)));
    if (a.f0.rows() != a.f0.cols()) throw MalformedLmi(tag + " is not square");
    if (a.f0.size() == 0) continue;  // vacuous block
    if (!nearly_symmetric(a.f0)) throw MalformedLmi(tag + " is not symmetric");
    for (int s = 0; s < p; ++s) {
      Matrix fi = con.g(assemble(Vector::Unit(p, s))) - a.f0;
      if (fi.rows() != a.f0.rows() || fi.cols() != a.f0.cols()) throw MalformedLmi(tag + " changes shape");
      if (!nearly_symmetric(fi)) throw MalformedLmi(tag + " is not symmetric in the unknowns");
      a.fi.push_back(0.5 * (fi + fi.transpose()));
    }
    a.f0 = 0.5 * (a.f0 + a.f0.transpose());
    Vector x(p);
    for (int s = 0; s < p; ++s) x(s) = unif(rng);
    Matrix predicted = a.f0;
    for (int s = 0; s < p; ++s) predicted += x(s) * a.fi[s];
    const Matrix actual = con.g(assemble(x));
    const double scale = 1.0 + predicted.cwiseAbs().maxCoeff();
    if ((actual - predicted).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw MalformedLmi(tag + " is not affine in the unknowns");
    aff.push_back(std::move(a));
  }

  SdpResult res;
  if (aff.empty()) {
    res.feasible = true;
    res.values = assemble(Vector::Zero(p));
    res.margin = std::numeric_limits<double>::infinity();
    res.diagnostics = "all constraints are empty";
    return res;
  }

  int m_total = 0;
  for (const auto& a : aff) m_total += static_cast<int>(a.f0.rows());

  auto value_at = [&](const Affine& a, const Vector& x) {
    Matrix g = a.f0;
    for (int s = 0; s < p; ++s)
      if (x(s) != 0.0) g += x(s) * a.fi[s];
    return g;
  };

  // z = [x; t]; barrier phi(z) = -sum log det(t I - G_k(x))
  auto barrier = [&](const Vector& z, double& phi) {
    phi = 0.0;
    const Vector x = z.head(p);
    for (const auto& a : aff) {
      const Matrix s = z(p) * Matrix::Identity(a.f0.rows(), a.f0.rows()) - value_at(a, x);
      Eigen::LLT<Matrix> llt(s);
      if (llt.info() != Eigen::Success) return false;
      const auto d = llt.matrixLLT().diagonal();
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d(i) > 0.0)) return false;
        phi -= 2.0 * std::log(d(i));
      }
    }
    return true;
  };

  Vector z = Vector::Zero(p + 1);
  double t0 = -std::numeric_limits<double>::infinity();
  for (const auto& a : aff) t0 = std::max(t0, lambda_max(a.f0));
  z(p) = t0 + 1.0;

  double s = 1.0;
  const double mu = 8.0;
  int iters = 0;
  std::string verdict;
  bool done = false;
  while (!done) {
    // centering
    while (iters < opt.max_iterations) {
      Vector grad = Vector::Zero(p + 1);
      Matrix hess = Matrix::Zero(p + 1, p + 1);
      const Vector x = z.head(p);
      for (const auto& a : aff) {
        const auto n = a.f0.rows();
        const Matrix slack = z(p) * Matrix::Identity(n, n) - value_at(a, x);
        Eigen::LLT<Matrix> llt(slack);
        std::vector<Matrix> y;
        y.reserve(p + 1);
        for (int i = 0; i < p; ++i) y.push_back(-llt.solve(a.fi[i]));
        y.push_back(llt.solve(Matrix::Identity(n, n)));
        for (int i = 0; i <= p; ++i) {
          grad(i) -= y[i].trace();
          for (int j = 0; j <= i; ++j) {
            const double h = y[i].cwiseProduct(y[j].transpose()).sum();
            hess(i, j) += h;
            if (i != j) hess(j, i) += h;
          }
        }
      }
      grad(p) += s;
      const double ridge = 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      hess.diagonal().array() += ridge;
      Eigen::LDLT<Matrix> ldlt(hess);
      const Vector step = -ldlt.solve(grad);
      const double decrement = -grad.dot(step);
      if (!(decrement > 0.0) || decrement / 2.0 < 1e-10) break;

      double phi0 = 0.0;
      barrier(z, phi0);
      const double f0 = s * z(p) + phi0;
      double alpha = 1.0;
      Vector trial;
      bool accepted = false;
      while (alpha > 1e-14) {
        trial = z + alpha * step;
        double phi1 = 0.0;
        if (barrier(trial, phi1) && s * trial(p) + phi1 <= f0 - 0.25 * alpha * decrement) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      z = trial;
      ++iters;
    }
    const double t = z(p);
    const double gap = m_total / s;
    if (t < -opt.margin_min && gap <= 0.1 * std::abs(t)) {
      verdict = "strictly feasible point found";
      done = true;
    } else if (t - gap >= -opt.margin_min) {
      verdict = "no point with margin >= " + std::to_string(opt.margin_min) + " exists (barrier bound)";
      done = true;
    } else if (iters >= opt.max_iterations) {
      verdict = "iteration budget exhausted";
      done = true;
    } else if (s > 1e14) {
      verdict = "barrier parameter limit reached";
      done = true;
    }
    s *= mu;
  }

  res.values = assemble(z.head(p));
  res.iterations = iters;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& a : aff) worst = std::max(worst, lambda_max(value_at(a, z.head(p))));
  res.margin = -worst;
  res.feasible = res.margin >= opt.margin_min;
  std::ostringstream os;
  os << verdict << "; t = " << z(p) << ", margin = " << res.margin << ", Newton steps = " << iters;
  res.diagnostics = os.str();
  return res;
}

Matrix lyapunov_matrix(const std::vector<Matrix>& ops, const std::vector<Matrix>& r) {
  require_ops(ops);
  if (r.size() != ops.size()) throw DimensionError("need one Lyapunov matrix per shift operator");
  const auto n = ops[0].rows();
  Matrix total = Matrix::Zero(n, n);
  for (const auto& ri : r) {
    if (ri.rows() != n || ri.cols() != n) throw DimensionError("Lyapunov matrix has the wrong size");
    total += ri;
  }
  const Matrix a = hstack(ops);
  return a.transpose() * total * a - block_diag(r);
}

LyapunovVerdict lyapunov_check(const std::vector<Matrix>& ops, const std::vector<Matrix>& r, double tol_psd) {
  require_ops(ops);
  require_spd(r, ops[0].rows());
  const double lm = lambda_max(lyapunov_matrix(ops, r));
  return {lm < -tol_psd, -lm};
}

Matrix projected_lyapunov_matrix(const std::vector<Matrix>& ops, const Matrix& c,
                                 const std::vector<Matrix>& r) {
  require_ops(ops);
  if (c.cols() != ops[0].rows()) throw DimensionError("C does not match the shift operators");
  const Matrix wc = kernel(c).basis();
  const Matrix wcd = block_diag(std::vector<Matrix>(ops.size(), wc));
  return wcd.transpose() * lyapunov_matrix(ops, r) * wcd;
}

FeasibilityOutcome projected_feasibility(const std::vector<Matrix>& ops, const Matrix& c, const SdpOptions& opt) {
  require_ops(ops);
  const auto n = ops[0].rows();
  if (c.cols() != n) throw DimensionError("C does not match the shift operators");
  if (c.rows() > n || numerical_rank(c) != c.rows())
    throw std::invalid_argument("projected_feasibility: C must have full row rank");
  const auto k = ops.size();

  SdpProblem prob;
  for (std::size_t i = 0; i < k; ++i) prob.add_variable(static_cast<int>(n), static_cast<int>(n), true);
  const Matrix eye = Matrix::Identity(n, n);
  for (std::size_t i = 0; i < k; ++i) {
    prob.add_constraint([i](const std::vector<Matrix>& v) { return Matrix(-v[i]); }, "R" + std::to_string(i + 1) + " > 0");
    prob.add_constraint([i, eye](const std::vector<Matrix>& v) { return Matrix(v[i] - eye); }, "normalization");
  }
  prob.add_constraint([&ops, &c](const std::vector<Matrix>& v) { return projected_lyapunov_matrix(ops, c, v); },
                      "projected Lyapunov");

  FeasibilityOutcome out;
  out.solver = prob.solve(opt);
  if (!out.solver.feasible) return out;
  LyapunovCertificate cert;
  for (const auto& r : out.solver.values) cert.R.push_back(0.5 * (r + r.transpose()));
  for (const auto& r : cert.R)
    if (lambda_min(r) <= 0.0) return out;
  cert.margin = -lambda_max(projected_lyapunov_matrix(ops, c, cert.R));
  if (cert.margin > opt.tol_psd) out.certificate = std::move(cert);
  return out;
}

Matrix gain_lmi_matrix(const std::vector<Matrix>& ops, const Matrix& c, const std::vector<Matrix>& r,
                       const std::vector<Matrix>& gains) {
  require_ops(ops);
  const auto n = ops[0].rows();
  const auto k = ops.size();
  if (r.size() != k || gains.size() != k) throw DimensionError("gain LMI: list sizes differ");
  Matrix total = Matrix::Zero(n, n);
  for (const auto& ri : r) total += ri;
  std::vector<Matrix> closed;
  for (std::size_t i = 0; i < k; ++i) closed.push_back(ops[i] + gains[i] * c);
  const Matrix g = hstack(closed);
  const auto kn = g.cols();
  Matrix phi(n + kn, n + kn);
  phi.topLeftCorner(n, n) = -total.inverse();
  phi.topRightCorner(n, kn) = g;
  phi.bottomLeftCorner(kn, n) = g.transpose();
  phi.bottomRightCorner(kn, kn) = -block_diag(r);
  return phi;
}

std::vector<Matrix> recover_gains(const std::vector<Matrix>& ops, const Matrix& c, const LyapunovCertificate& cert,
                                  const SdpOptions& opt) {
  require_ops(ops);
  const auto n = ops[0].rows();
  if (c.cols() != n) throw DimensionError("C does not match the shift operators");
  require_spd(cert.R, n);
  const auto k = ops.size();

  SdpProblem prob;
  for (std::size_t i = 0; i < k; ++i) prob.add_variable(static_cast<int>(n), static_cast<int>(c.rows()), false);
  prob.add_constraint([&](const std::vector<Matrix>& v) { return gain_lmi_matrix(ops, c, cert.R, v); }, "gain LMI");
  const SdpResult res = prob.solve(opt);
  std::vector<Matrix> closed;
  for (std::size_t i = 0; i < k; ++i) closed.push_back(ops[i] + res.values[i] * c);
  const auto check = lyapunov_check(closed, cert.R, opt.tol_psd);
  if (!res.feasible || !check.stable)
    throw std::runtime_error("recover_gains: no stabilizing gains found (" + res.diagnostics + ")");
  return res.values;
}

}  // namespace fdi2d
