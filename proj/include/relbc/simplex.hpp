#pragma once

/// Dense two-phase simplex over an exact field (used with boost rationals).
/// Maximizes c.x subject to A x = b, x >= 0. Bland's rule throughout, so
/// termination is guaranteed; intended for small polytopes only.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace relbc::simplex {

template <class Field>
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<std::vector<Field>> rows;  // each of size num_vars
    std::vector<Field> rhs;                // one per row
    std::vector<Field> objective;          // size num_vars
};

template <class Field>
struct Solution {
    bool feasible = false;
    Field value{};
    std::vector<Field> x;
};

namespace detail {

template <class Field>
class Tableau {
  public:
    Tableau(const LinearProgram<Field>& lp)
        : n_(lp.num_vars), m_(lp.rows.size()), tab_(m_), basis_(m_) {
        // Columns: n structural vars, then m artificials, then rhs.
        for (std::size_t i = 0; i < m_; ++i) {
            tab_[i].assign(n_ + m_ + 1, Field(0));
            const bool flip = lp.rhs[i] < Field(0);
            for (std::size_t j = 0; j < n_; ++j) {
                tab_[i][j] = flip ? -lp.rows[i][j] : lp.rows[i][j];
            }
            tab_[i][n_ + i] = Field(1);
            tab_[i][n_ + m_] = flip ? -lp.rhs[i] : lp.rhs[i];
            basis_[i] = n_ + i;
        }
    }

    // Maximize sum of cost[basis] subject to the tableau; cost has size
    // n_ + m_. allow_artificial gates entering columns >= n_.
    void optimize(const std::vector<Field>& cost, bool allow_artificial) {
        for (;;) {
            const auto entering = pick_entering(cost, allow_artificial);
            if (!entering.second) return;
            pivot(pick_leaving(entering.first), entering.first);
        }
    }

    Field objective_value(const std::vector<Field>& cost) const {
        Field v(0);
        for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * rhs(i);
        return v;
    }

    /// After phase 1: pivot artificials out of the basis where possible and
    /// drop redundant rows.
    void purge_artificials() {
        for (std::size_t i = 0; i < m_;) {
            if (basis_[i] < n_) {
                ++i;
                continue;
            }
            std::size_t j = 0;
            while (j < n_ && tab_[i][j] == Field(0)) ++j;
            if (j < n_) {
                pivot(i, j);
                ++i;
            } else {
                tab_.erase(tab_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
                --m_;
            }
        }
    }

    std::vector<Field> extract(std::size_t count) const {
        std::vector<Field> x(count, Field(0));
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < count) x[basis_[i]] = rhs(i);
        }
        return x;
    }

  private:
    Field rhs(std::size_t i) const { return tab_[i][tab_[i].size() - 1]; }

    std::pair<std::size_t, bool> pick_entering(const std::vector<Field>& cost,
                                               bool allow_artificial) const {
        const std::size_t limit = allow_artificial ? cost.size() : n_;
        for (std::size_t j = 0; j < limit; ++j) {  // Bland: smallest index
            Field reduced = cost[j];
            for (std::size_t i = 0; i < m_; ++i) {
                reduced -= cost[basis_[i]] * tab_[i][j];
            }
            if (reduced > Field(0)) return {j, true};
        }
        return {0, false};
    }

    std::size_t pick_leaving(std::size_t col) const {
        bool found = false;
        std::size_t arg = 0;
        Field best{};
        for (std::size_t i = 0; i < m_; ++i) {
            if (!(tab_[i][col] > Field(0))) continue;
            const Field ratio = rhs(i) / tab_[i][col];
            if (!found || ratio < best ||
                (ratio == best && basis_[i] < basis_[arg])) {
                found = true;
                best = ratio;
                arg = i;
            }
        }
        if (!found) throw std::runtime_error("simplex: unbounded program");
        return arg;
    }

    void pivot(std::size_t row, std::size_t col) {
        const Field p = tab_[row][col];
        for (auto& v : tab_[row]) v /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row || tab_[i][col] == Field(0)) continue;
            const Field f = tab_[i][col];
            for (std::size_t j = 0; j < tab_[i].size(); ++j) {
                tab_[i][j] -= f * tab_[row][j];
            }
        }
        basis_[row] = col;
    }

    std::size_t n_;
    std::size_t m_;
    std::vector<std::vector<Field>> tab_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

template <class Field>
Solution<Field> solve(const LinearProgram<Field>& lp) {
    if (lp.rows.size() != lp.rhs.size() || lp.objective.size() != lp.num_vars) {
        throw std::invalid_argument("simplex: inconsistent program dimensions");
    }
    const std::size_t n = lp.num_vars;
    const std::size_t m = lp.rows.size();
    detail::Tableau<Field> tab(lp);

    // Phase 1: maximize minus the sum of artificials.
    std::vector<Field> phase1(n + m, Field(0));
    for (std::size_t j = n; j < n + m; ++j) phase1[j] = Field(-1);
    tab.optimize(phase1, true);
    Solution<Field> sol;
    if (tab.objective_value(phase1) != Field(0)) {
        return sol;  // infeasible
    }
    tab.purge_artificials();

    // Phase 2: the real objective; artificial columns may not re-enter.
    std::vector<Field> phase2(n + m, Field(0));
    for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.objective[j];
    tab.optimize(phase2, false);

    sol.feasible = true;
    sol.value = tab.objective_value(phase2);
    sol.x = tab.extract(n);
    return sol;
}

}  // namespace relbc::simplex
