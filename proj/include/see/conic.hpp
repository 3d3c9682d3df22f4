#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "see/types.hpp"

namespace see::conic {

struct MalformedProgram : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MatVar {
  int idx = -1;
};
struct ScalarVar {
  int idx = -1;
};

enum class Rel { Le, Ge, Eq };
enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

/// Affine functional of the program variables:
///   sum_v real(tr(A_v Q_v)) + sum_u c_u x_u + constant.
/// Matrix coefficients must be Hermitian.
struct LinExpr {
  std::map<int, MatrixXcd> mat_coeffs;
  std::map<int, double> scalar_coeffs;
  double constant = 0.0;

  LinExpr& add(MatVar v, const MatrixXcd& a);
  LinExpr& add(ScalarVar v, double c);
  LinExpr& operator+=(const LinExpr& other);
};

LinExpr quad_form_expr(MatVar v, const VectorXcd& h, double scale = 1.0);
LinExpr trace_expr(MatVar v, int dim, double scale = 1.0);
LinExpr trace_prod_expr(MatVar v, const MatrixXcd& a, double scale = 1.0);
LinExpr scalar_expr(ScalarVar v, double c = 1.0);

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  int max_iters = 200;  // Newton-step budget per phase
};

/// Declarative convex subproblem: maximize a linear functional plus weighted
/// natural logs of affine functionals, over Hermitian PSD matrix variables,
/// scalar variables, affine constraints and affine LMI blocks.
class ConicProgram {
 public:
  MatVar add_matrix_var(const std::string& name, int dim);
  ScalarVar add_scalar_var(const std::string& name, bool nonneg = true);

  void set_objective_linear(const LinExpr& linear);
  void add_objective_log_term(double weight, const LinExpr& arg);

  void add_constraint(const LinExpr& lhs, Rel rel, double rhs);

  int add_lmi_block(int dim);
  void lmi_add_constant(int block, const MatrixXcd& f0);
  // `map` must be a linear map taking the variable to its (Hermitian)
  // contribution to the block; it is sampled on a Hermitian basis.
  void lmi_add_matrix_map(int block, MatVar v,
                          const std::function<MatrixXcd(const MatrixXcd&)>& map);
  void lmi_add_scalar_coeff(int block, ScalarVar v, const MatrixXcd& f);

  struct MatrixVarDecl {
    std::string name;
    int dim;
  };
  struct ScalarVarDecl {
    std::string name;
    bool nonneg;
  };
  struct LogTerm {
    double weight;
    LinExpr arg;
  };
  struct Constraint {
    LinExpr lhs;
    Rel rel;
    double rhs;
  };
  struct LmiBlock {
    int dim;
    MatrixXcd f0;
    std::vector<std::pair<MatVar, std::function<MatrixXcd(const MatrixXcd&)>>> mat_terms;
    std::vector<std::pair<ScalarVar, MatrixXcd>> scalar_terms;
  };

  const std::vector<MatrixVarDecl>& matrix_vars() const { return mat_vars_; }
  const std::vector<ScalarVarDecl>& scalar_vars() const { return scalar_vars_; }
  const LinExpr& objective_linear() const { return obj_linear_; }
  const std::vector<LogTerm>& log_terms() const { return log_terms_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<LmiBlock>& lmi_blocks() const { return lmi_blocks_; }

 private:
  std::vector<MatrixVarDecl> mat_vars_;
  std::vector<ScalarVarDecl> scalar_vars_;
  LinExpr obj_linear_;
  std::vector<LogTerm> log_terms_;
  std::vector<Constraint> constraints_;
  std::vector<LmiBlock> lmi_blocks_;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::MaxIterations;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();       // barrier gap bound
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<MatrixXcd> mat_values;
  std::vector<double> scalar_values;

  const MatrixXcd& value(MatVar v) const { return mat_values.at(v.idx); }
  double value(ScalarVar v) const { return scalar_values.at(v.idx); }
};

/// Path-following barrier method; deterministic given inputs.
ConicSolution solve_conic(const ConicProgram& prog, const SolverOptions& opts = {});

/// [[Re M, -Im M], [Im M, Re M]]; the spectrum of the input appears doubled.
Eigen::MatrixXd hermitian_to_real_embedding(const MatrixXcd& m);

}  // namespace see::conic
