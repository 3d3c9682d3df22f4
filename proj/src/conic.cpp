#include "see/conic.hpp"

#include <algorithm>
#include <cmath>

namespace see::conic {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kHermTol = 1e-10;

bool is_hermitian(const MatrixXcd& a) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= kHermTol * scale;
}

// Hermitian parameterization: dim*dim real parameters per matrix variable,
// ordered column-major over the upper triangle as (re, im) pairs with a
// single parameter on the diagonal.
int herm_param_count(int n) { return n * n; }

MatrixXcd herm_unpack(const double* x, int n) {
  MatrixXcd m(n, n);
  int p = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      m(i, j) = cxd(x[p], x[p + 1]);
      m(j, i) = std::conj(m(i, j));
      p += 2;
    }
    m(j, j) = x[p++];
  }
  return m;
}

// g_p = real tr(A * B_p) for the Hermitian basis B_p; equivalently the packed
// gradient of real tr(A * M) with respect to M's parameters.
void herm_pack_grad(const MatrixXcd& a, int n, double* g) {
  int p = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      g[p++] = 2.0 * a(i, j).real();
      g[p++] = 2.0 * a(i, j).imag();
    }
    g[p++] = a(j, j).real();
  }
}

MatrixXcd herm_basis(int n, int p) {
  VectorXd e = VectorXd::Zero(herm_param_count(n));
  e(p) = 1.0;
  return herm_unpack(e.data(), n);
}

struct Row {
  VectorXd a;
  double b;
  double scale;  // normalization used for residuals
};

struct Block {
  int dim;
  MatrixXcd f0;
  std::vector<std::pair<int, MatrixXcd>> terms;  // (param index, coefficient)

  MatrixXcd eval(const VectorXd& x) const {
    MatrixXcd m = f0;
    for (const auto& [p, f] : terms) m.noalias() += x(p) * f;
    return m;
  }
};

struct LogTermC {
  double w;
  VectorXd a;
  double b;
};

struct Compiled {
  int n_params = 0;
  bool structured = true;        // false after nullspace reduction
  std::vector<int> mat_offsets;  // per matrix var (structured form only)
  std::vector<int> mat_dims;
  std::vector<int> scalar_offsets;
  VectorXd c;  // objective linear gradient (maximize)
  double obj_const = 0.0;
  std::vector<LogTermC> logs;
  std::vector<Row> ineqs;   // a.x <= b
  std::vector<Row> eqs;     // a.x == b
  std::vector<int> bounds;  // params constrained >= 0
  std::vector<Block> blocks;
  bool trivially_infeasible = false;
};

VectorXd pack_expr(const LinExpr& e, const Compiled& c, const std::vector<int>& mat_dims) {
  VectorXd v = VectorXd::Zero(c.n_params);
  for (const auto& [idx, a] : e.mat_coeffs) {
    if (idx < 0 || idx >= static_cast<int>(c.mat_offsets.size()))
      throw MalformedProgram("LinExpr references unknown matrix variable");
    if (a.rows() != mat_dims[idx] || a.cols() != mat_dims[idx])
      throw MalformedProgram("LinExpr coefficient dimension mismatch");
    if (!is_hermitian(a)) throw MalformedProgram("LinExpr coefficient is not Hermitian");
    herm_pack_grad(a, mat_dims[idx], v.data() + c.mat_offsets[idx]);
  }
  for (const auto& [idx, coef] : e.scalar_coeffs) {
    if (idx < 0 || idx >= static_cast<int>(c.scalar_offsets.size()))
      throw MalformedProgram("LinExpr references unknown scalar variable");
    v(c.scalar_offsets[idx]) += coef;
  }
  return v;
}

Compiled compile(const ConicProgram& prog, const SolverOptions& opts) {
  Compiled c;
  for (const auto& mv : prog.matrix_vars()) {
    if (mv.dim < 1) throw MalformedProgram("matrix variable dimension must be >= 1");
    c.mat_offsets.push_back(c.n_params);
    c.mat_dims.push_back(mv.dim);
    c.n_params += herm_param_count(mv.dim);
  }
  for (const auto& sv : prog.scalar_vars()) {
    c.scalar_offsets.push_back(c.n_params);
    if (sv.nonneg) c.bounds.push_back(c.n_params);
    c.n_params += 1;
  }

  c.c = pack_expr(prog.objective_linear(), c, c.mat_dims);
  c.obj_const = prog.objective_linear().constant;
  for (const auto& lt : prog.log_terms()) {
    if (!(lt.weight > 0)) throw MalformedProgram("log-term weight must be > 0");
    c.logs.push_back({lt.weight, pack_expr(lt.arg, c, c.mat_dims), lt.arg.constant});
  }

  for (const auto& con : prog.constraints()) {
    VectorXd a = pack_expr(con.lhs, c, c.mat_dims);
    double b = con.rhs - con.lhs.constant;
    if (con.rel == Rel::Ge) {
      a = -a;
      b = -b;
    }
    const double an = a.lpNorm<Eigen::Infinity>();
    const double scale = std::max({1.0, an, std::abs(b)});
    if (an <= 1e-14 * scale) {
      const bool violated =
          con.rel == Rel::Eq ? std::abs(b) > opts.feas_tol * scale : b < -opts.feas_tol * scale;
      if (violated) c.trivially_infeasible = true;
      continue;
    }
    if (con.rel == Rel::Eq)
      c.eqs.push_back({a, b, scale});
    else
      c.ineqs.push_back({a, b, scale});
  }

  // PSD-ness of every matrix variable is itself an LMI block
  for (size_t v = 0; v < c.mat_dims.size(); ++v) {
    Block blk;
    blk.dim = c.mat_dims[v];
    blk.f0 = MatrixXcd::Zero(blk.dim, blk.dim);
    for (int p = 0; p < herm_param_count(blk.dim); ++p)
      blk.terms.emplace_back(c.mat_offsets[v] + p, herm_basis(blk.dim, p));
    c.blocks.push_back(std::move(blk));
  }

  for (const auto& lb : prog.lmi_blocks()) {
    Block blk;
    blk.dim = lb.dim;
    blk.f0 = lb.f0.size() > 0 ? lb.f0 : MatrixXcd::Zero(lb.dim, lb.dim);
    if (!is_hermitian(blk.f0)) throw MalformedProgram("LMI constant is not Hermitian");
    std::map<int, MatrixXcd> acc;
    for (const auto& [var, map] : lb.mat_terms) {
      if (var.idx < 0 || var.idx >= static_cast<int>(c.mat_dims.size()))
        throw MalformedProgram("LMI references unknown matrix variable");
      const int n = c.mat_dims[var.idx];
      for (int p = 0; p < herm_param_count(n); ++p) {
        MatrixXcd f = map(herm_basis(n, p));
        if (f.rows() != lb.dim || f.cols() != lb.dim || !is_hermitian(f))
          throw MalformedProgram("LMI matrix map must produce Hermitian blocks of the block size");
        auto [it, fresh] = acc.try_emplace(c.mat_offsets[var.idx] + p, f);
        if (!fresh) it->second += f;
      }
    }
    for (const auto& [var, f] : lb.scalar_terms) {
      if (var.idx < 0 || var.idx >= static_cast<int>(c.scalar_offsets.size()))
        throw MalformedProgram("LMI references unknown scalar variable");
      if (f.rows() != lb.dim || f.cols() != lb.dim || !is_hermitian(f))
        throw MalformedProgram("LMI scalar coefficient must be Hermitian of the block size");
      auto [it, fresh] = acc.try_emplace(c.scalar_offsets[var.idx], f);
      if (!fresh) it->second += f;
    }
    for (auto& [p, f] : acc)
      if (f.cwiseAbs().maxCoeff() > 0) blk.terms.emplace_back(p, std::move(f));
    c.blocks.push_back(std::move(blk));
  }
  return c;
}

// Eliminate equality constraints by parameterizing their solution manifold:
// x = x_part + K z.  Bounds become plain rows in the reduced space.
struct Reduction {
  bool active = false;
  bool inconsistent = false;
  MatrixXd k;      // n x m nullspace basis
  VectorXd x_part;  // particular solution
};

Compiled reduce_equalities(const Compiled& cp, Reduction& red, const SolverOptions& opts) {
  const int n = cp.n_params;
  MatrixXd a(cp.eqs.size(), n);
  VectorXd b(cp.eqs.size());
  for (size_t i = 0; i < cp.eqs.size(); ++i) {
    a.row(i) = cp.eqs[i].a / cp.eqs[i].scale;
    b(i) = cp.eqs[i].b / cp.eqs[i].scale;
  }
  red.active = true;
  red.x_part = a.completeOrthogonalDecomposition().solve(b);
  if ((a * red.x_part - b).lpNorm<Eigen::Infinity>() > opts.feas_tol) {
    red.inconsistent = true;
    return cp;
  }
  Eigen::FullPivLU<MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  red.k = lu.kernel();
  if (lu.dimensionOfKernel() == 0) red.k = MatrixXd::Zero(n, 0);
  const int m = static_cast<int>(red.k.cols());

  Compiled rp;
  rp.n_params = m;
  rp.structured = false;
  rp.c = red.k.transpose() * cp.c;
  rp.obj_const = cp.obj_const + cp.c.dot(red.x_part);
  for (const auto& lt : cp.logs)
    rp.logs.push_back({lt.w, red.k.transpose() * lt.a, lt.b + lt.a.dot(red.x_part)});
  auto push_row = [&](const VectorXd& a0, double b0) {
    VectorXd ar = red.k.transpose() * a0;
    const double br = b0 - a0.dot(red.x_part);
    const double an = ar.lpNorm<Eigen::Infinity>();
    const double scale = std::max({1.0, an, std::abs(br)});
    if (an <= 1e-14 * scale) {
      if (br < -opts.feas_tol * scale) rp.trivially_infeasible = true;
      return;
    }
    rp.ineqs.push_back({ar, br, scale});
  };
  for (const auto& row : cp.ineqs) push_row(row.a, row.b);
  for (int p : cp.bounds) push_row(-VectorXd::Unit(n, p), 0.0);
  for (const auto& blk : cp.blocks) {
    Block b2;
    b2.dim = blk.dim;
    b2.f0 = blk.f0;
    std::vector<MatrixXcd> fq(m, MatrixXcd::Zero(blk.dim, blk.dim));
    for (const auto& [p, f] : blk.terms) {
      b2.f0.noalias() += red.x_part(p) * f;
      for (int q = 0; q < m; ++q)
        if (red.k(p, q) != 0.0) fq[q].noalias() += red.k(p, q) * f;
    }
    for (int q = 0; q < m; ++q)
      if (fq[q].cwiseAbs().maxCoeff() > 1e-14) b2.terms.emplace_back(q, std::move(fq[q]));
    rp.blocks.push_back(std::move(b2));
  }
  return rp;
}

// ---------------------------------------------------------------------------
// Barrier machinery.  Minimizes t*f0(x) + phi(x) for increasing t, where
// f0 = -(c.x + sum w ln(a.x+b)) and phi collects -ln barriers of all rows,
// bounds and blocks.

struct BarrierProblem {
  int n = 0;
  VectorXd c;  // maximize c.x ...
  std::vector<LogTermC> logs;
  std::vector<Row> ineqs;
  std::vector<int> bounds;
  const std::vector<Block>* blocks = nullptr;
  std::vector<Block> own_blocks;  // phase-1 uses modified blocks

  const std::vector<Block>& blks() const {
    return own_blocks.empty() && blocks ? *blocks : own_blocks;
  }

  double barrier_nu() const {
    double nu = static_cast<double>(ineqs.size() + bounds.size());
    for (const auto& b : blks()) nu += b.dim;
    return nu;
  }
};

struct EvalState {
  double psi = std::numeric_limits<double>::infinity();
  bool interior = false;
  VectorXd slacks;
  std::vector<Eigen::LLT<MatrixXcd>> llts;
  VectorXd log_args;
};

bool eval_point(const BarrierProblem& bp, const VectorXd& x, double t, EvalState& st) {
  st.interior = false;
  st.psi = std::numeric_limits<double>::infinity();
  double val = -t * bp.c.dot(x);
  st.log_args.resize(bp.logs.size());
  for (size_t j = 0; j < bp.logs.size(); ++j) {
    const double u = bp.logs[j].a.dot(x) + bp.logs[j].b;
    if (!(u > 0)) return false;
    st.log_args(j) = u;
    val -= t * bp.logs[j].w * std::log(u);
  }
  st.slacks.resize(bp.ineqs.size());
  for (size_t i = 0; i < bp.ineqs.size(); ++i) {
    const double s = bp.ineqs[i].b - bp.ineqs[i].a.dot(x);
    if (!(s > 0)) return false;
    st.slacks(i) = s;
    val -= std::log(s);
  }
  for (int p : bp.bounds) {
    if (!(x(p) > 0)) return false;
    val -= std::log(x(p));
  }
  st.llts.clear();
  st.llts.reserve(bp.blks().size());
  for (const auto& blk : bp.blks()) {
    MatrixXcd m = blk.eval(x);
    Eigen::LLT<MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    double ld = 0.0;
    for (int i = 0; i < blk.dim; ++i) {
      const double d = std::real(llt.matrixL()(i, i));
      if (!(d > 0)) return false;
      ld += std::log(d);
    }
    val -= 2.0 * ld;
    st.llts.push_back(std::move(llt));
  }
  if (!std::isfinite(val)) return false;
  st.psi = val;
  st.interior = true;
  return true;
}

void eval_grad_hess(const BarrierProblem& bp, const VectorXd& x, double t, const EvalState& st,
                    VectorXd& g, MatrixXd& h) {
  const int n = bp.n;
  g = -t * bp.c;
  h = MatrixXd::Zero(n, n);
  for (size_t j = 0; j < bp.logs.size(); ++j) {
    const double u = st.log_args(j);
    const double w = t * bp.logs[j].w;
    g.noalias() -= (w / u) * bp.logs[j].a;
    h.noalias() += (w / (u * u)) * (bp.logs[j].a * bp.logs[j].a.transpose());
  }
  for (size_t i = 0; i < bp.ineqs.size(); ++i) {
    const double s = st.slacks(i);
    g.noalias() += bp.ineqs[i].a / s;
    h.noalias() += (bp.ineqs[i].a * bp.ineqs[i].a.transpose()) / (s * s);
  }
  for (int p : bp.bounds) {
    g(p) -= 1.0 / x(p);
    h(p, p) += 1.0 / (x(p) * x(p));
  }
  for (size_t kb = 0; kb < bp.blks().size(); ++kb) {
    const Block& blk = bp.blks()[kb];
    const auto& llt = st.llts[kb];
    const int nt = static_cast<int>(blk.terms.size());
    std::vector<MatrixXcd> pk(nt);
    for (int k = 0; k < nt; ++k) pk[k] = llt.solve(blk.terms[k].second);
    for (int k = 0; k < nt; ++k) {
      g(blk.terms[k].first) -= pk[k].trace().real();
      for (int l = k; l < nt; ++l) {
        const double v = pk[k].cwiseProduct(pk[l].transpose()).sum().real();
        h(blk.terms[k].first, blk.terms[l].first) += v;
        if (l != k) h(blk.terms[l].first, blk.terms[k].first) += v;
      }
    }
  }
}

double max_block_step(const BarrierProblem& bp, const EvalState& st, const VectorXd& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (size_t kb = 0; kb < bp.blks().size(); ++kb) {
    const Block& blk = bp.blks()[kb];
    MatrixXcd dm = MatrixXcd::Zero(blk.dim, blk.dim);
    bool moving = false;
    for (const auto& [p, f] : blk.terms)
      if (dx(p) != 0.0) {
        dm.noalias() += dx(p) * f;
        moving = true;
      }
    if (!moving) continue;
    // M + a*DM > 0  <=>  I + a * L^-1 DM L^-H > 0
    const auto& llt = st.llts[kb];
    MatrixXcd l = llt.matrixL();
    MatrixXcd tmp = l.triangularView<Eigen::Lower>().solve(dm);
    MatrixXcd w = l.triangularView<Eigen::Lower>().solve(tmp.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es((w + w.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

struct NewtonResult {
  bool converged = false;
  bool diverged = false;
  bool stopped = false;  // stop_when fired
  int steps = 0;
};

NewtonResult newton_center(const BarrierProblem& bp, VectorXd& x, double t, int max_steps,
                           int& budget,
                           const std::function<bool(const VectorXd&)>* stop_when = nullptr) {
  NewtonResult res;
  EvalState st;
  if (!eval_point(bp, x, t, st)) {
    res.diverged = true;
    return res;
  }
  const int n = bp.n;
  VectorXd g(n);
  MatrixXd h(n, n);
  for (int it = 0; it < max_steps && budget > 0; ++it, --budget) {
    eval_grad_hess(bp, x, t, st, g, h);
    VectorXd dx = VectorXd::Zero(n);
    {
      MatrixXd hr = h;
      double reg = 1e-13 * std::max(1.0, h.diagonal().maxCoeff());
      for (int tries = 0; tries < 8; ++tries) {
        Eigen::LDLT<MatrixXd> ldlt(hr);
        dx = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && dx.allFinite() && -g.dot(dx) >= 0) break;
        hr = h + reg * MatrixXd::Identity(n, n);
        reg *= 100.0;
        dx.setZero();
      }
    }
    if (!dx.allFinite()) {
      res.diverged = true;
      return res;
    }
    const double decrement = -g.dot(dx);
    if (decrement <= 2e-11) {
      res.converged = true;
      res.steps = it;
      return res;
    }
    double alpha = std::min(1.0, 0.99 * max_block_step(bp, st, dx));
    {
      // keep single steps bounded; unbounded rays still diverge, just in
      // several steps instead of one numerically hopeless jump
      const double dxn = dx.lpNorm<Eigen::Infinity>();
      const double cap = std::max(1e4, 100.0 * (1.0 + x.lpNorm<Eigen::Infinity>()));
      if (alpha * dxn > cap) alpha = cap / dxn;
    }
    for (size_t i = 0; i < bp.ineqs.size(); ++i) {
      const double ds = -bp.ineqs[i].a.dot(dx);
      if (ds < 0) alpha = std::min(alpha, -0.99 * st.slacks(i) / ds);
    }
    for (int p : bp.bounds)
      if (dx(p) < 0) alpha = std::min(alpha, -0.99 * x(p) / dx(p));
    for (size_t j = 0; j < bp.logs.size(); ++j) {
      const double du = bp.logs[j].a.dot(dx);
      if (du < 0) alpha = std::min(alpha, -0.99 * st.log_args(j) / du);
    }
    EvalState st_next;
    int backtracks = 0;
    while (backtracks < 60) {
      if (eval_point(bp, x + alpha * dx, t, st_next) &&
          st_next.psi <= st.psi - 1e-4 * alpha * decrement)
        break;
      alpha *= 0.5;
      ++backtracks;
    }
    if (backtracks >= 60) {
      res.converged = true;  // progress floor reached at this t
      res.steps = it;
      return res;
    }
    x += alpha * dx;
    st = std::move(st_next);
    if (stop_when && (*stop_when)(x)) {
      res.stopped = true;
      res.steps = it;
      return res;
    }
    if (x.lpNorm<Eigen::Infinity>() > 1e13) {
      res.diverged = true;
      return res;
    }
  }
  return res;
}

double objective_value(const Compiled& cp, const VectorXd& x) {
  double v = cp.c.dot(x) + cp.obj_const;
  for (const auto& lt : cp.logs) v += lt.w * std::log(std::max(lt.a.dot(x) + lt.b, 1e-300));
  return v;
}

// Primal residual on the original (unscaled) data.
double primal_residual(const Compiled& cp, const VectorXd& x) {
  double r = 0.0;
  for (const auto& row : cp.ineqs) r = std::max(r, (row.a.dot(x) - row.b) / row.scale);
  for (const auto& row : cp.eqs) r = std::max(r, std::abs(row.a.dot(x) - row.b) / row.scale);
  for (int p : cp.bounds) r = std::max(r, -x(p));
  for (const auto& blk : cp.blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(blk.eval(x), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, blk.f0.cwiseAbs().maxCoeff());
    r = std::max(r, -es.eigenvalues()(0) / scale);
  }
  return std::max(r, 0.0);
}

struct Phase1Result {
  bool feasible = false;
  bool decided = false;
  double s_star = std::numeric_limits<double>::infinity();
  VectorXd x;
};

Phase1Result run_phase1(const Compiled& cp, const SolverOptions& opts, int& budget) {
  const int n = cp.n_params;
  const int ns = n + 1;  // relaxation variable s at the last position
  BarrierProblem bp;
  bp.n = ns;
  bp.c = VectorXd::Zero(ns);
  bp.c(n) = -1.0;  // maximize -s
  for (const auto& row : cp.ineqs) {
    VectorXd a(ns);
    a.head(n) = row.a / row.scale;
    a(n) = -1.0;
    bp.ineqs.push_back({a, row.b / row.scale, 1.0});
  }
  for (int p : cp.bounds) {
    VectorXd a = VectorXd::Zero(ns);
    a(p) = -1.0;
    a(n) = -1.0;
    bp.ineqs.push_back({a, 0.0, 1.0});
  }
  for (const auto& lt : cp.logs) {
    // keep log arguments strictly positive: a.x + b >= u_min - s
    const double u_min = 1e-6 * std::max(1.0, std::abs(lt.b));
    VectorXd a(ns);
    a.head(n) = -lt.a;
    a(n) = -1.0;
    bp.ineqs.push_back({a, lt.b - u_min, 1.0});
  }
  bp.own_blocks.reserve(cp.blocks.size());
  for (const auto& blk : cp.blocks) {
    Block b2 = blk;
    b2.terms.emplace_back(n, MatrixXcd::Identity(blk.dim, blk.dim));
    bp.own_blocks.push_back(std::move(b2));
  }

  // start: identity matrices, ones for nonneg scalars, zeros elsewhere
  VectorXd x0 = VectorXd::Zero(ns);
  if (cp.structured) {
    for (size_t v = 0; v < cp.mat_dims.size(); ++v) {
      const int nd = cp.mat_dims[v];
      int p = cp.mat_offsets[v];
      for (int j = 0; j < nd; ++j) {
        p += 2 * j;
        x0(p++) = 1.0;
      }
    }
    for (int p : cp.bounds) x0(p) = 1.0;
  }
  double s0 = 1.0;
  for (const auto& row : bp.ineqs) s0 = std::max(s0, row.a.dot(x0) - row.b + 1.0);
  for (const auto& blk : cp.blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(blk.eval(x0.head(n)), Eigen::EigenvaluesOnly);
    s0 = std::max(s0, -es.eigenvalues()(0) + 1.0);
  }
  x0(n) = s0;

  Phase1Result out;
  out.x = x0;
  if (bp.ineqs.empty() && bp.own_blocks.empty()) {
    out.feasible = true;
    out.decided = true;
    out.s_star = -1.0;
    out.x.conservativeResize(n);
    return out;
  }
  const double nu = bp.barrier_nu();
  const double margin = 1e-7;
  const std::function<bool(const VectorXd&)> deep_enough = [n](const VectorXd& x) {
    return x(n) < -1e-3;
  };
  double t = 1.0;
  for (int stage = 0; stage < 64 && budget > 0; ++stage) {
    NewtonResult nr = newton_center(bp, out.x, t, opts.max_iters, budget, &deep_enough);
    if (nr.stopped || out.x(n) < -1e-3) {
      out.feasible = true;
      out.decided = true;
      out.s_star = out.x(n);
      out.x.conservativeResize(n);
      return out;
    }
    if (nr.diverged) break;
    if (nu / t <= 0.05 * std::max(opts.feas_tol, 1e-12)) {
      out.decided = true;
      break;
    }
    t *= 20.0;
  }
  out.s_star = out.x(n);
  if (out.s_star < -margin) out.feasible = true;
  out.x.conservativeResize(n);
  return out;
}

}  // namespace

LinExpr& LinExpr::add(MatVar v, const MatrixXcd& a) {
  auto [it, fresh] = mat_coeffs.try_emplace(v.idx, a);
  if (!fresh) it->second += a;
  return *this;
}

LinExpr& LinExpr::add(ScalarVar v, double c) {
  scalar_coeffs[v.idx] += c;
  return *this;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  for (const auto& [idx, a] : other.mat_coeffs) {
    auto [it, fresh] = mat_coeffs.try_emplace(idx, a);
    if (!fresh) it->second += a;
  }
  for (const auto& [idx, c] : other.scalar_coeffs) scalar_coeffs[idx] += c;
  constant += other.constant;
  return *this;
}

LinExpr quad_form_expr(MatVar v, const VectorXcd& h, double scale) {
  LinExpr e;
  e.add(v, scale * (h * h.adjoint()));
  return e;
}

LinExpr trace_expr(MatVar v, int dim, double scale) {
  LinExpr e;
  e.add(v, scale * MatrixXcd::Identity(dim, dim));
  return e;
}

LinExpr trace_prod_expr(MatVar v, const MatrixXcd& a, double scale) {
  LinExpr e;
  e.add(v, scale * a);
  return e;
}

LinExpr scalar_expr(ScalarVar v, double c) {
  LinExpr e;
  e.add(v, c);
  return e;
}

MatVar ConicProgram::add_matrix_var(const std::string& name, int dim) {
  mat_vars_.push_back({name, dim});
  return {static_cast<int>(mat_vars_.size()) - 1};
}

ScalarVar ConicProgram::add_scalar_var(const std::string& name, bool nonneg) {
  scalar_vars_.push_back({name, nonneg});
  return {static_cast<int>(scalar_vars_.size()) - 1};
}

void ConicProgram::set_objective_linear(const LinExpr& linear) { obj_linear_ = linear; }

void ConicProgram::add_objective_log_term(double weight, const LinExpr& arg) {
  log_terms_.push_back({weight, arg});
}

void ConicProgram::add_constraint(const LinExpr& lhs, Rel rel, double rhs) {
  constraints_.push_back({lhs, rel, rhs});
}

int ConicProgram::add_lmi_block(int dim) {
  LmiBlock b;
  b.dim = dim;
  lmi_blocks_.push_back(std::move(b));
  return static_cast<int>(lmi_blocks_.size()) - 1;
}

void ConicProgram::lmi_add_constant(int block, const MatrixXcd& f0) {
  auto& b = lmi_blocks_.at(block);
  if (b.f0.size() == 0)
    b.f0 = f0;
  else
    b.f0 += f0;
}

void ConicProgram::lmi_add_matrix_map(int block, MatVar v,
                                      const std::function<MatrixXcd(const MatrixXcd&)>& map) {
  lmi_blocks_.at(block).mat_terms.emplace_back(v, map);
}

void ConicProgram::lmi_add_scalar_coeff(int block, ScalarVar v, const MatrixXcd& f) {
  lmi_blocks_.at(block).scalar_terms.emplace_back(v, f);
}

ConicSolution solve_conic(const ConicProgram& prog, const SolverOptions& opts) {
  Compiled cp = compile(prog, opts);
  ConicSolution sol;
  auto unpack_into = [&](const VectorXd& x) {
    sol.mat_values.clear();
    for (size_t v = 0; v < cp.mat_dims.size(); ++v)
      sol.mat_values.push_back(herm_unpack(x.data() + cp.mat_offsets[v], cp.mat_dims[v]));
    sol.scalar_values.clear();
    for (int off : cp.scalar_offsets) sol.scalar_values.push_back(x(off));
  };

  if (cp.trivially_infeasible) {
    sol.status = SolveStatus::Infeasible;
    unpack_into(VectorXd::Zero(cp.n_params));
    return sol;
  }

  Reduction red;
  Compiled reduced;
  const Compiled* work = &cp;
  if (!cp.eqs.empty()) {
    reduced = reduce_equalities(cp, red, opts);
    if (red.inconsistent) {
      sol.status = SolveStatus::Infeasible;
      unpack_into(VectorXd::Zero(cp.n_params));
      return sol;
    }
    if (reduced.trivially_infeasible) {
      sol.status = SolveStatus::Infeasible;
      unpack_into(red.x_part);
      sol.primal_residual = primal_residual(cp, red.x_part);
      return sol;
    }
    work = &reduced;
  }
  auto to_original = [&](const VectorXd& xw) -> VectorXd {
    if (!red.active) return xw;
    return red.x_part + red.k * xw;
  };

  int budget = std::max(4 * opts.max_iters, 200);
  Phase1Result p1 = run_phase1(*work, opts, budget);
  if (!p1.feasible) {
    const VectorXd xo = to_original(p1.x);
    unpack_into(xo);
    sol.primal_residual = primal_residual(cp, xo);
    sol.status = (p1.decided && p1.s_star > opts.feas_tol) ? SolveStatus::Infeasible
                                                           : SolveStatus::MaxIterations;
    return sol;
  }

  BarrierProblem bp;
  bp.n = work->n_params;
  bp.c = work->c;
  bp.logs = work->logs;
  for (const auto& row : work->ineqs)
    bp.ineqs.push_back({row.a / row.scale, row.b / row.scale, 1.0});
  bp.bounds = work->bounds;
  bp.blocks = &work->blocks;

  VectorXd x = p1.x;
  const double nu = bp.barrier_nu();
  int budget2 = std::max(4 * opts.max_iters, 200);
  double t = 1.0;
  bool diverged = false;
  double gap = nu > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int stage = 0; stage < 80 && budget2 > 0; ++stage) {
    NewtonResult nr = newton_center(bp, x, t, opts.max_iters, budget2);
    if (nr.diverged) {
      diverged = true;
      break;
    }
    gap = nu > 0 ? nu / t : 0.0;
    const double scale = std::max(1.0, std::abs(objective_value(*work, x)));
    if (gap <= opts.opt_tol * scale) break;
    t *= 20.0;
  }

  const VectorXd xo = to_original(x);
  unpack_into(xo);
  sol.objective = objective_value(cp, xo);
  sol.primal_residual = primal_residual(cp, xo);
  sol.gap = gap;
  {
    EvalState st;
    if (eval_point(bp, x, t, st)) {
      VectorXd g;
      MatrixXd h;
      eval_grad_hess(bp, x, t, st, g, h);
      sol.kkt_residual =
          g.lpNorm<Eigen::Infinity>() / (t * std::max(1.0, work->c.lpNorm<Eigen::Infinity>()));
    }
  }
  if (diverged) {
    sol.status = SolveStatus::Unbounded;
    return sol;
  }
  const double scale = std::max(1.0, std::abs(sol.objective));
  sol.status = (sol.primal_residual <= opts.feas_tol && sol.gap <= 1.0001 * opts.opt_tol * scale)
                   ? SolveStatus::Optimal
                   : SolveStatus::MaxIterations;
  return sol;
}

Eigen::MatrixXd hermitian_to_real_embedding(const MatrixXcd& m) {
  if (!is_hermitian(m)) throw MalformedProgram("hermitian_to_real_embedding: input not Hermitian");
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = m.real();
  out.topRightCorner(n, n) = -m.imag();
  out.bottomLeftCorner(n, n) = m.imag();
  out.bottomRightCorner(n, n) = m.real();
  return out;
}

}  // namespace see::conic
