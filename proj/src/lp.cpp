#include "fleetplan/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

namespace fleetplan::lp {

int LpProblem::add_var(double cost, double lo, double hi) {
    objective.push_back(cost);
    bounds.push_back({lo, hi});
    return num_vars++;
}

void LpProblem::add_row(std::vector<Term> terms, Relation rel, double rhs) {
    constraints.push_back({std::move(terms), rel, rhs});
}

void LpProblem::add_dense_row(const std::vector<double>& row, Relation rel, double rhs) {
    if (static_cast<int>(row.size()) != num_vars)
        throw MalformedProblem("dense row length " + std::to_string(row.size()) +
                               " != num_vars " + std::to_string(num_vars));
    std::vector<Term> terms;
    for (int j = 0; j < num_vars; ++j)
        if (row[j] != 0.0) terms.push_back({j, row[j]});
    add_row(std::move(terms), rel, rhs);
}

const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
    }
    return "?";
}

namespace {

void validate(const LpProblem& lp) {
    const auto n = static_cast<std::size_t>(lp.num_vars);
    if (lp.num_vars < 0) throw MalformedProblem("negative num_vars");
    if (lp.objective.size() != n) throw MalformedProblem("objective length != num_vars");
    if (lp.bounds.size() != n) throw MalformedProblem("bounds length != num_vars");
    for (std::size_t j = 0; j < n; ++j) {
        const auto [lo, hi] = lp.bounds[j];
        if (std::isnan(lo) || std::isnan(hi) || lo > hi || lo == inf || hi == -inf)
            throw MalformedProblem("bad bounds on variable " + std::to_string(j));
        if (!std::isfinite(lp.objective[j]))
            throw MalformedProblem("non-finite cost on variable " + std::to_string(j));
    }
    for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
        const auto& c = lp.constraints[r];
        if (!std::isfinite(c.rhs)) throw MalformedProblem("non-finite rhs in row " + std::to_string(r));
        for (const auto& t : c.terms) {
            if (t.var < 0 || t.var >= lp.num_vars)
                throw MalformedProblem("row " + std::to_string(r) + " references variable " +
                                       std::to_string(t.var));
            if (!std::isfinite(t.coef))
                throw MalformedProblem("non-finite coefficient in row " + std::to_string(r));
        }
    }
}

// Sorted, merged, zero-free copy of every row.
std::vector<std::vector<Term>> normalized_rows(const LpProblem& lp) {
    std::vector<std::vector<Term>> rows(lp.constraints.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto terms = lp.constraints[r].terms;
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
        auto& out = rows[r];
        for (const auto& t : terms) {
            if (!out.empty() && out.back().var == t.var)
                out.back().coef += t.coef;
            else
                out.push_back(t);
        }
        std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
    }
    return rows;
}

struct Presolve {
    bool infeasible = false;
    int ray_var = -1;  // a column that is unbounded on its own
    std::vector<double> lo, hi, value;
    std::vector<char> removed;  // column value decided by presolve
    std::vector<char> row_active;
};

Presolve presolve(const LpProblem& lp, const std::vector<std::vector<Term>>& rows, const SolveOptions& opts) {
    const int n = lp.num_vars;
    Presolve p;
    p.lo.resize(n);
    p.hi.resize(n);
    p.value.assign(n, 0.0);
    p.removed.assign(n, 0);
    p.row_active.assign(rows.size(), 1);
    for (int j = 0; j < n; ++j) {
        p.lo[j] = lp.bounds[j].lo;
        p.hi[j] = lp.bounds[j].hi;
        if (p.lo[j] == p.hi[j]) {
            p.removed[j] = 1;
            p.value[j] = p.lo[j];
        }
    }

    bool changed = true;
    while (changed && !p.infeasible) {
        changed = false;
        for (std::size_t r = 0; r < rows.size() && !p.infeasible; ++r) {
            if (!p.row_active[r]) continue;
            double rhs = lp.constraints[r].rhs;
            int live = 0;
            Term single{-1, 0.0};
            for (const auto& t : rows[r]) {
                if (p.removed[t.var])
                    rhs -= t.coef * p.value[t.var];
                else {
                    ++live;
                    single = t;
                }
            }
            const Relation rel = lp.constraints[r].rel;
            if (live == 0) {
                const double tol = opts.feas_tol;
                const bool ok = rel == Relation::le   ? rhs >= -tol
                                : rel == Relation::ge ? rhs <= tol
                                                      : std::abs(rhs) <= tol;
                if (!ok) p.infeasible = true;
                p.row_active[r] = 0;
                changed = true;
            } else if (live == 1) {
                const int j = single.var;
                const double v = rhs / single.coef;
                const bool upper = (rel == Relation::le) == (single.coef > 0.0);
                if (rel == Relation::eq) {
                    p.lo[j] = std::max(p.lo[j], v);
                    p.hi[j] = std::min(p.hi[j], v);
                } else if (upper) {
                    p.hi[j] = std::min(p.hi[j], v);
                } else {
                    p.lo[j] = std::max(p.lo[j], v);
                }
                if (p.lo[j] > p.hi[j]) {
                    const double scale = std::max(1.0, std::abs(p.lo[j]));
                    if (p.lo[j] - p.hi[j] > opts.bound_tol * scale) {
                        p.infeasible = true;
                        break;
                    }
                    p.lo[j] = p.hi[j] = rel == Relation::eq ? v : 0.5 * (p.lo[j] + p.hi[j]);
                }
                if (p.lo[j] == p.hi[j]) {
                    p.removed[j] = 1;
                    p.value[j] = p.lo[j];
                }
                p.row_active[r] = 0;
                changed = true;
            }
        }
    }
    if (p.infeasible) return p;

    // Columns touching no remaining row sit at their cheapest bound.
    std::vector<int> count(n, 0);
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (p.row_active[r])
            for (const auto& t : rows[r]) ++count[t.var];
    for (int j = 0; j < n; ++j) {
        if (p.removed[j] || count[j] > 0) continue;
        const double c = lp.objective[j];
        double v;
        if (c > 0.0)
            v = p.lo[j];
        else if (c < 0.0)
            v = p.hi[j];
        else
            v = std::isfinite(p.lo[j]) ? p.lo[j] : (std::isfinite(p.hi[j]) ? p.hi[j] : 0.0);
        if (!std::isfinite(v)) {
            if (p.ray_var < 0) p.ray_var = j;
            v = std::isfinite(p.lo[j]) ? p.lo[j] : (std::isfinite(p.hi[j]) ? p.hi[j] : 0.0);
        }
        p.removed[j] = 1;
        p.value[j] = v;
    }
    return p;
}

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// LU of the basis plus a product-form eta file between refactorizations.
class BasisFactor {
public:
    bool factor(const SpMat& basis) {
        etas_.clear();
        lu_.analyzePattern(basis);
        lu_.factorize(basis);
        return lu_.info() == Eigen::Success;
    }

    void ftran(Vec& v) {
        v = lu_.solve(v).eval();
        for (const auto& e : etas_) {
            const double xr = v[e.row] / e.pivot;
            for (const auto& [i, a] : e.entries) v[i] -= a * xr;
            v[e.row] = xr;
        }
    }

    void btran(Vec& v) {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[it->row];
            for (const auto& [i, a] : it->entries) s -= a * v[i];
            v[it->row] = s / it->pivot;
        }
        v = lu_.transpose().solve(v).eval();
    }

    void push(int row, const Vec& alpha) {
        Eta e{row, alpha[row], {}};
        for (int i = 0; i < alpha.size(); ++i)
            if (i != row && alpha[i] != 0.0) e.entries.emplace_back(i, alpha[i]);
        etas_.push_back(std::move(e));
    }

    std::size_t updates() const { return etas_.size(); }

private:
    struct Eta {
        int row;
        double pivot;
        std::vector<std::pair<int, double>> entries;
    };
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
};

class SingularBasis : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum : std::uint8_t { kBasic, kAtLo, kAtHi, kFree };

// Columns 0..n-1 are structural (CSC), n..n+m-1 are row slacks with a unit column.
class Simplex {
public:
    Simplex(int m, int n, std::vector<int> col_start, std::vector<int> row_idx, std::vector<double> val,
            std::vector<double> cost, std::vector<double> lo, std::vector<double> hi, std::vector<double> b,
            const SolveOptions& opts)
        : m_(m), n_(n), N_(n + m), cs_(std::move(col_start)), ri_(std::move(row_idx)), va_(std::move(val)),
          cost_(std::move(cost)), lo_(std::move(lo)), hi_(std::move(hi)), b_(std::move(b)), opts_(opts) {
        cost_.resize(N_, 0.0);
        max_iter_ = opts.max_iterations > 0 ? opts.max_iterations : 20 * (m_ + N_) + 1000;
    }

    Status run(const std::vector<std::uint8_t>* warm_state) {
        bool warm = warm_state && init_warm(*warm_state);
        if (warm) {
            try {
                refactor();
            } catch (const SingularBasis&) {
                warm = false;
            }
        }
        if (!warm) {
            init_basis();
            refactor();
        }
        warm_started = warm;
        try {
            return iterate();
        } catch (const SingularBasis&) {
            if (!warm) throw;
        }
        warm_started = false;
        init_basis();
        refactor();
        return iterate();
    }

    Status iterate() {
        int rechecks = 0;
        int degenerate = 0;
        bool bland = false;
        Vec y(m_), alpha(m_);
        for (;;) {
            if (iterations >= max_iter_) {
                iteration_limit = true;
                return infeasibility() > 0.0 ? Status::infeasible : Status::optimal;
            }
            const bool phase1 = infeasibility() > 0.0;
            for (int i = 0; i < m_; ++i) y[i] = basic_cost(i, phase1);
            factor_.btran(y);

            int q = -1;
            int dir = 0;
            double best = 0.0;
            double dq = 0.0;
            const double dtol = phase1 ? 1e-9 : dual_tol_;
            for (int j = 0; j < N_; ++j) {
                if (state_[j] == kBasic || lo_[j] == hi_[j]) continue;
                const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
                int dj = 0;
                if (state_[j] == kAtLo && d < -dtol)
                    dj = 1;
                else if (state_[j] == kAtHi && d > dtol)
                    dj = -1;
                else if (state_[j] == kFree && std::abs(d) > dtol)
                    dj = d < 0.0 ? 1 : -1;
                if (dj == 0) continue;
                if (bland) {
                    q = j, dir = dj, dq = d;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    q = j, dir = dj, dq = d;
                }
            }

            if (q < 0) {
                if (phase1) return Status::infeasible;
                // Confirm on a fresh factorization before declaring optimality.
                refactor();
                if (infeasibility() > 0.0 && ++rechecks < 4) continue;
                return Status::optimal;
            }

            load_column(q, alpha);
            factor_.ftran(alpha);

            Step step = phase1 ? ratio_phase1(q, dir, dir * dq, alpha) : ratio_phase2(q, dir, alpha, bland);
            if (step.unbounded) {
                if (phase1) {
                    refactor();
                    if (++rechecks < 4) continue;
                    return Status::infeasible;
                }
                return Status::unbounded;
            }
            apply(q, dir, step, alpha);
            ++iterations;

            if (step.theta <= 1e-12) {
                if (++degenerate >= opts_.bland_after) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    std::uint8_t state(int j) const { return state_[j]; }

    std::vector<double> x;
    int iterations = 0;
    bool iteration_limit = false;
    bool warm_started = false;

private:
    struct Step {
        double theta = 0.0;
        int leave = -1;  // basis position, -1 means the entering variable flips bounds
        bool to_hi = false;
        bool unbounded = false;
    };

    double tol_at(double bound) const { return opts_.bound_tol * std::max(1.0, std::abs(bound)); }
    bool below(int j) const { return x[j] < lo_[j] - tol_at(lo_[j]); }
    bool above(int j) const { return x[j] > hi_[j] + tol_at(hi_[j]); }

    double basic_cost(int i, bool phase1) const {
        const int j = basis_[i];
        if (!phase1) return cost_[j];
        if (below(j)) return -1.0;
        if (above(j)) return 1.0;
        return 0.0;
    }

    double infeasibility() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int j = basis_[i];
            if (below(j)) s += lo_[j] - x[j];
            if (above(j)) s += x[j] - hi_[j];
        }
        return s;
    }

    double dot_column(int j, const Vec& y) const {
        if (j >= n_) return y[j - n_];
        double s = 0.0;
        for (int k = cs_[j]; k < cs_[j + 1]; ++k) s += va_[k] * y[ri_[k]];
        return s;
    }

    void load_column(int j, Vec& v) const {
        v.setZero();
        if (j >= n_) {
            v[j - n_] = 1.0;
            return;
        }
        for (int k = cs_[j]; k < cs_[j + 1]; ++k) v[ri_[k]] = va_[k];
    }

    void init_basis() {
        x.assign(N_, 0.0);
        state_.assign(N_, kFree);
        basis_.resize(m_);
        double cmax = 1.0;
        for (int j = 0; j < n_; ++j) {
            cmax = std::max(cmax, std::abs(cost_[j]));
            if (std::isfinite(lo_[j]))
                x[j] = lo_[j], state_[j] = kAtLo;
            else if (std::isfinite(hi_[j]))
                x[j] = hi_[j], state_[j] = kAtHi;
        }
        dual_tol_ = 1e-9 * cmax;

        std::vector<double> resid = b_;
        for (int j = 0; j < n_; ++j)
            for (int k = cs_[j]; k < cs_[j + 1]; ++k) resid[ri_[k]] -= va_[k] * x[j];
        for (int r = 0; r < m_; ++r) {
            basis_[r] = n_ + r;
            state_[n_ + r] = kBasic;
            x[n_ + r] = resid[r];
        }

        // Crash: a column living in a single row can replace that row's infeasible slack.
        std::vector<char> used(m_, 0);
        for (int j = 0; j < n_; ++j) {
            if (cs_[j + 1] - cs_[j] != 1) continue;
            const int r = ri_[cs_[j]];
            const int s = n_ + r;
            if (used[r] || !(below(s) || above(s))) continue;
            const double target = std::clamp(x[s], lo_[s], hi_[s]);
            const double xj = x[j] + (x[s] - target) / va_[cs_[j]];
            if (xj < lo_[j] || xj > hi_[j]) continue;
            used[r] = 1;
            x[j] = xj;
            state_[j] = kBasic;
            basis_[r] = j;
            x[s] = target;
            state_[s] = target == lo_[s] ? kAtLo : kAtHi;
        }
    }

    bool init_warm(const std::vector<std::uint8_t>& given) {
        if (static_cast<int>(given.size()) != N_) return false;
        if (std::count(given.begin(), given.end(), kBasic) != m_) return false;
        double cmax = 1.0;
        for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(cost_[j]));
        dual_tol_ = 1e-9 * cmax;
        x.assign(N_, 0.0);
        state_.assign(N_, kFree);
        basis_.clear();
        for (int j = 0; j < N_; ++j) {
            if (given[j] == kBasic) {
                state_[j] = kBasic;
                basis_.push_back(j);
                continue;
            }
            const bool want_hi = given[j] == kAtHi;
            if (want_hi && std::isfinite(hi_[j]))
                x[j] = hi_[j], state_[j] = kAtHi;
            else if (std::isfinite(lo_[j]))
                x[j] = lo_[j], state_[j] = kAtLo;
            else if (std::isfinite(hi_[j]))
                x[j] = hi_[j], state_[j] = kAtHi;
        }
        return true;
    }

    void refactor() {
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < m_; ++i) {
            const int j = basis_[i];
            if (j >= n_)
                trip.emplace_back(j - n_, i, 1.0);
            else
                for (int k = cs_[j]; k < cs_[j + 1]; ++k) trip.emplace_back(ri_[k], i, va_[k]);
        }
        SpMat B(m_, m_);
        B.setFromTriplets(trip.begin(), trip.end());
        B.makeCompressed();
        if (!factor_.factor(B)) throw SingularBasis("basis factorization failed");

        Vec rhs = Eigen::Map<const Vec>(b_.data(), m_);
        for (int j = 0; j < N_; ++j) {
            if (state_[j] == kBasic || x[j] == 0.0) continue;
            if (j >= n_)
                rhs[j - n_] -= x[j];
            else
                for (int k = cs_[j]; k < cs_[j + 1]; ++k) rhs[ri_[k]] -= va_[k] * x[j];
        }
        factor_.ftran(rhs);
        for (int i = 0; i < m_; ++i) x[basis_[i]] = rhs[i];
    }

    // Standard bounded ratio test; ties go to the larger pivot, or the lower index under Bland.
    double pivot_tolerance(const Vec& alpha) const {
        return kPivTol * std::max(1.0, alpha.lpNorm<Eigen::Infinity>());
    }

    // Two passes: bound the step with relaxed bounds, then take the largest pivot under that bound.
    Step harris(int q, int dir, const Vec& alpha, double piv_tol) const {
        auto reach = [&](int i, double slack) {
            const double rate = -dir * alpha[i];
            const int j = basis_[i];
            if (rate < 0.0)
                return std::isfinite(lo_[j]) ? (std::max(0.0, x[j] - lo_[j]) + slack * tol_at(lo_[j])) / -rate
                                             : std::numeric_limits<double>::infinity();
            return std::isfinite(hi_[j]) ? (std::max(0.0, hi_[j] - x[j]) + slack * tol_at(hi_[j])) / rate
                                         : std::numeric_limits<double>::infinity();
        };
        double bound = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i)
            if (std::abs(alpha[i]) > piv_tol) bound = std::min(bound, reach(i, 1.0));
        Step st;
        const double flip = hi_[q] - lo_[q];
        double best_piv = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double a = std::abs(alpha[i]);
            if (a <= piv_tol || a <= best_piv) continue;
            const double t = reach(i, 0.0);
            if (t > bound) continue;
            st.theta = t;
            st.leave = i;
            st.to_hi = -dir * alpha[i] > 0.0;
            best_piv = a;
        }
        if (st.leave < 0 || flip <= st.theta) {
            st = Step{};
            st.theta = flip;
        }
        if (!std::isfinite(st.theta)) st.unbounded = true;
        return st;
    }

    Step ratio_phase2(int q, int dir, const Vec& alpha, bool bland) const {
        Step st;
        st.theta = hi_[q] - lo_[q];  // bound flip, may be inf
        const double piv_tol = pivot_tolerance(alpha);
        if (!bland) return harris(q, dir, alpha, piv_tol);
        double best_piv = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double a = alpha[i];
            if (std::abs(a) <= piv_tol) continue;
            const double rate = -dir * a;
            const int j = basis_[i];
            double t;
            bool to_hi;
            if (rate < 0.0) {
                if (!std::isfinite(lo_[j])) continue;
                t = std::max(0.0, x[j] - lo_[j]) / -rate;
                to_hi = false;
            } else {
                if (!std::isfinite(hi_[j])) continue;
                t = std::max(0.0, hi_[j] - x[j]) / rate;
                to_hi = true;
            }
            bool take = t < st.theta - 1e-12;
            if (!take && st.leave >= 0 && std::abs(t - st.theta) <= 1e-12)
                take = bland ? j < basis_[st.leave] : std::abs(a) > best_piv;
            if (take) {
                st.theta = t;
                st.leave = i;
                st.to_hi = to_hi;
                best_piv = std::abs(a);
            }
        }
        if (!std::isfinite(st.theta)) st.unbounded = true;
        return st;
    }

    // Phase 1 minimizes total infeasibility; infeasible basics create breakpoints
    // where the slope of that sum rises. Stop at the first one that makes it non-negative.
    Step ratio_phase1(int q, int dir, double slope, const Vec& alpha) const {
        Step hard;
        hard.theta = hi_[q] - lo_[q];
        struct Breakpoint {
            double t;
            int i;
            double w;
            bool to_hi;
        };
        std::vector<Breakpoint> bps;
        double best_piv = 0.0;
        auto offer_hard = [&](double t, int i, bool to_hi, double a) {
            if (t < hard.theta - 1e-12 || (hard.leave >= 0 && std::abs(t - hard.theta) <= 1e-12 && std::abs(a) > best_piv)) {
                hard.theta = t;
                hard.leave = i;
                hard.to_hi = to_hi;
                best_piv = std::abs(a);
            }
        };
        const double piv_tol = pivot_tolerance(alpha);
        for (int i = 0; i < m_; ++i) {
            const double a = alpha[i];
            if (std::abs(a) <= piv_tol) continue;
            const double rate = -dir * a;
            const int j = basis_[i];
            if (below(j)) {
                if (rate > 0.0) {
                    bps.push_back({(lo_[j] - x[j]) / rate, i, rate, false});
                    if (std::isfinite(hi_[j])) offer_hard((hi_[j] - x[j]) / rate, i, true, a);
                }
            } else if (above(j)) {
                if (rate < 0.0) {
                    bps.push_back({(x[j] - hi_[j]) / -rate, i, -rate, true});
                    if (std::isfinite(lo_[j])) offer_hard((x[j] - lo_[j]) / -rate, i, false, a);
                }
            } else if (rate < 0.0) {
                if (std::isfinite(lo_[j])) offer_hard(std::max(0.0, x[j] - lo_[j]) / -rate, i, false, a);
            } else if (std::isfinite(hi_[j])) {
                offer_hard(std::max(0.0, hi_[j] - x[j]) / rate, i, true, a);
            }
        }
        std::sort(bps.begin(), bps.end(), [](const Breakpoint& a, const Breakpoint& b) {
            if (a.t != b.t) return a.t < b.t;
            return a.i < b.i;
        });
        for (const auto& bp : bps) {
            if (bp.t > hard.theta) break;
            slope += bp.w;
            if (slope >= 0.0) return Step{bp.t, bp.i, bp.to_hi, false};
        }
        if (!std::isfinite(hard.theta)) {
            if (bps.empty()) hard.unbounded = true;
            else {
                const auto& bp = bps.back();
                return Step{bp.t, bp.i, bp.to_hi, false};
            }
        }
        return hard;
    }

    void apply(int q, int dir, const Step& st, const Vec& alpha) {
        const double delta = dir * st.theta;
        if (delta != 0.0) {
            x[q] += delta;
            for (int i = 0; i < m_; ++i)
                if (alpha[i] != 0.0) x[basis_[i]] -= delta * alpha[i];
        }
        if (st.leave < 0) {
            x[q] = dir > 0 ? hi_[q] : lo_[q];
            state_[q] = dir > 0 ? kAtHi : kAtLo;
            return;
        }
        const int out = basis_[st.leave];
        x[out] = st.to_hi ? hi_[out] : lo_[out];
        state_[out] = st.to_hi ? kAtHi : kAtLo;
        basis_[st.leave] = q;
        state_[q] = kBasic;
        factor_.push(st.leave, alpha);
        if (static_cast<int>(factor_.updates()) >= opts_.refactor_every) refactor();
    }

    static constexpr double kPivTol = 1e-9;

    int m_, n_, N_;
    std::vector<int> cs_, ri_;
    std::vector<double> va_, cost_, lo_, hi_, b_;
    SolveOptions opts_;
    int max_iter_ = 0;
    double dual_tol_ = 1e-9;
    std::vector<std::uint8_t> state_;
    std::vector<int> basis_;
    BasisFactor factor_;
};

}  // namespace

LpSolution solve(const LpProblem& lp, const SolveOptions& opts) {
    validate(lp);
    const auto rows = normalized_rows(lp);
    Presolve pre = presolve(lp, rows, opts);

    LpSolution sol;
    if (pre.infeasible) {
        sol.status = Status::infeasible;
        sol.primal = pre.value;
        return sol;
    }

    std::vector<int> col_map(lp.num_vars, -1);
    std::vector<int> cols;
    for (int j = 0; j < lp.num_vars; ++j)
        if (!pre.removed[j]) {
            col_map[j] = static_cast<int>(cols.size());
            cols.push_back(j);
        }
    std::vector<int> row_list;
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (pre.row_active[r]) row_list.push_back(static_cast<int>(r));

    const int n = static_cast<int>(cols.size());
    const int m = static_cast<int>(row_list.size());
    std::vector<double> primal = pre.value;

    if (m > 0) {
        std::vector<std::vector<std::pair<int, double>>> by_col(n);
        std::vector<double> b(m), lo(n + m), hi(n + m), cost(n);
        for (int i = 0; i < m; ++i) {
            const int r = row_list[i];
            double rhs = lp.constraints[r].rhs;
            for (const auto& t : rows[r]) {
                if (pre.removed[t.var])
                    rhs -= t.coef * pre.value[t.var];
                else
                    by_col[col_map[t.var]].emplace_back(i, t.coef);
            }
            b[i] = rhs;
            switch (lp.constraints[r].rel) {
                case Relation::le: lo[n + i] = 0.0, hi[n + i] = inf; break;
                case Relation::ge: lo[n + i] = -inf, hi[n + i] = 0.0; break;
                case Relation::eq: lo[n + i] = 0.0, hi[n + i] = 0.0; break;
            }
        }
        std::vector<int> cs(n + 1, 0), ri;
        std::vector<double> va;
        for (int k = 0; k < n; ++k) {
            const int j = cols[k];
            cost[k] = lp.objective[j];
            lo[k] = pre.lo[j];
            hi[k] = pre.hi[j];
            for (const auto& [i, a] : by_col[k]) {
                ri.push_back(i);
                va.push_back(a);
            }
            cs[k + 1] = static_cast<int>(ri.size());
        }
        std::vector<std::uint8_t> warm;
        const Basis* given = opts.warm_start;
        if (given && given->vars.size() == static_cast<std::size_t>(lp.num_vars) &&
            given->rows.size() == rows.size()) {
            warm.resize(n + m);
            for (int k = 0; k < n; ++k) warm[k] = static_cast<std::uint8_t>(given->vars[cols[k]]);
            for (int i = 0; i < m; ++i) warm[n + i] = static_cast<std::uint8_t>(given->rows[row_list[i]]);
        }
        Simplex simplex(m, n, std::move(cs), std::move(ri), std::move(va), std::move(cost), std::move(lo),
                        std::move(hi), std::move(b), opts);
        sol.status = simplex.run(warm.empty() ? nullptr : &warm);
        sol.iterations = simplex.iterations;
        sol.iteration_limit = simplex.iteration_limit;
        sol.warm_started = simplex.warm_started;
        for (int k = 0; k < n; ++k) primal[cols[k]] = simplex.x[k];
        auto status_of = [&](int j) -> signed char {
            const auto st = simplex.state(j);
            return st == kBasic ? Basis::basic : st == kAtHi ? Basis::at_hi : Basis::at_lo;
        };
        sol.basis.vars.assign(lp.num_vars, Basis::at_lo);
        sol.basis.rows.assign(rows.size(), Basis::basic);
        for (int k = 0; k < n; ++k) sol.basis.vars[cols[k]] = status_of(k);
        for (int i = 0; i < m; ++i) sol.basis.rows[row_list[i]] = status_of(n + i);
    } else {
        sol.status = Status::optimal;
    }

    if (sol.status == Status::optimal && pre.ray_var >= 0) sol.status = Status::unbounded;
    sol.primal = std::move(primal);
    sol.objective_value = 0.0;
    for (int j = 0; j < lp.num_vars; ++j) sol.objective_value += lp.objective[j] * sol.primal[j];
    return sol;
}

Residuals residuals(const LpProblem& lp, const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != lp.num_vars)
        throw MalformedProblem("point length " + std::to_string(point.size()) + " != num_vars " +
                               std::to_string(lp.num_vars));
    Residuals res;
    for (int j = 0; j < lp.num_vars; ++j) {
        res.bound = std::max(res.bound, lp.bounds[j].lo - point[j]);
        res.bound = std::max(res.bound, point[j] - lp.bounds[j].hi);
    }
    for (const auto& c : lp.constraints) {
        double lhs = 0.0;
        for (const auto& t : c.terms) {
            if (t.var < 0 || t.var >= lp.num_vars) throw MalformedProblem("row references a missing variable");
            lhs += t.coef * point[t.var];
        }
        const double v = lhs - c.rhs;
        const double viol = c.rel == Relation::le ? v : c.rel == Relation::ge ? -v : std::abs(v);
        res.constraint = std::max(res.constraint, viol);
    }
    return res;
}

void dump(const LpProblem& lp, std::ostream& out) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::fixed << std::setprecision(9);
    out << "vars " << lp.num_vars << " rows " << lp.constraints.size() << '\n';
    out << "min";
    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.objective[j] != 0.0) out << ' ' << lp.objective[j] << "*x" << j;
    out << '\n';
    for (int j = 0; j < lp.num_vars; ++j) out << "bound x" << j << ' ' << lp.bounds[j].lo << ' ' << lp.bounds[j].hi << '\n';
    for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
        const auto& c = lp.constraints[r];
        out << 'r' << r;
        for (const auto& t : c.terms) out << ' ' << t.coef << "*x" << t.var;
        out << (c.rel == Relation::le ? " <= " : c.rel == Relation::ge ? " >= " : " = ") << c.rhs << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace fleetplan::lp
