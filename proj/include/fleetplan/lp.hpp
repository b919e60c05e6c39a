#pragma once

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fleetplan::lp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

struct Term {
    int var;
    double coef;
};

/// One row `sum(coef * x[var]) rel rhs`. Missing variables have coefficient zero.
struct Constraint {
    std::vector<Term> terms;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct Bound {
    double lo = 0.0;
    double hi = inf;
};

/// Minimization problem over box-bounded variables.
struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<Bound> bounds;
    std::vector<Constraint> constraints;

    int add_var(double cost, double lo, double hi);
    void add_row(std::vector<Term> terms, Relation rel, double rhs);
    void add_dense_row(const std::vector<double>& row, Relation rel, double rhs);
};

enum class Status { optimal, infeasible, unbounded };

/// Final simplex basis in terms of the original problem; feeds warm starts.
struct Basis {
    enum : signed char { basic = 0, at_lo = 1, at_hi = 2 };
    std::vector<signed char> vars;
    std::vector<signed char> rows;  // row slack
    bool empty() const { return vars.empty(); }
};

struct LpSolution {
    Status status = Status::infeasible;
    std::vector<double> primal;
    double objective_value = 0.0;
    int iterations = 0;
    bool iteration_limit = false;  // best effort: primal is the last iterate
    bool warm_started = false;
    Basis basis;
};

struct SolveOptions {
    double bound_tol = 1e-9;
    double feas_tol = 1e-7;
    int refactor_every = 50;
    int bland_after = 100;    // consecutive degenerate pivots before Bland's rule
    int max_iterations = 0;   // 0 picks a limit from the problem size
    const Basis* warm_start = nullptr;  // ignored when it does not fit the problem
};

class MalformedProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bounded-variable revised simplex with a light presolve. Deterministic.
LpSolution solve(const LpProblem& lp, const SolveOptions& opts = {});

struct Residuals {
    double constraint = 0.0;
    double bound = 0.0;
};

/// Largest constraint and bound violations of `point`.
Residuals residuals(const LpProblem& lp, const std::vector<double>& point);

/// Fixed-point text form, one line per row; meant for diffing.
void dump(const LpProblem& lp, std::ostream& out);

const char* to_string(Status s);

}  // namespace fleetplan::lp
