#pragma once

#include <iosfwd>

#include "esm/energy.h"
#include "esm/product_space.h"
#include "esm/subproblem.h"

namespace esm {

struct DualConfig {
    int max_passes = 50;
    // Early stop when the relative bound improvement drops below this.
    double rel_improvement_eps = 1e-7;
    std::ostream* log = nullptr;  // optional sink for the per-pass diagnostic lines
};

// Sentinel magnitude used in total min-marginals for variables the dual
// preprocessing proved forced. Large but finite.
constexpr double kForcedSentinel = 1e30;

// Lagrange decomposition of the matching ILP with one subproblem per
// constraint row. Maintains the reparametrization lambda with
// sum_S lambda(S,i) = E_i over all free variables, and optimizes the dual
// bound by min-marginal averaging (one forward sweep per pass, ascending
// variable order, uniform averaging weights).
class DualState {
  public:
    // Uniform split: lambda(S,i) = E_i / deg(i).
    static DualState init(const ProductSpace& ps, const EnergyVector& energy);

    // Reduced decomposition under a partial assignment (-1 free, 0, 1 per
    // column). Fixed-to-1 columns drop their projection rows (siblings are
    // forced 0) and shift boundary right-hand sides; fixed-to-0 columns leave
    // all supports. Lambda is re-initialized by the uniform split on the
    // reduced structure. Throws infeasible_error naming the violated row if
    // the assignment contradicts a constraint.
    DualState fix_and_reduce(const std::vector<std::int8_t>& assignment) const;

    // One min-marginal averaging sweep. Returns the resulting lower bound;
    // throws esm::error if the bound decreases by more than 1e-9 (internal
    // consistency failure).
    double mma_pass();

    // Runs passes with early stopping, emitting one diagnostic line per pass:
    //   [dual] pass=<i> lb=<bound> forced=<count>
    // Returns the number of passes executed.
    int run(const DualConfig& cfg);

    double lower_bound() const { return lower_bound_; }

    // Total min-marginals per original column. Free variables sum m(S,i)
    // over their rows; variables outside every row report their full energy;
    // preprocessing-forced variables report -/+kForcedSentinel; externally
    // fixed variables report 0.
    std::vector<double> total_min_marginals() const;

    index_t num_forced() const { return num_forced_; }
    index_t num_free() const;

    // Max |sum_S lambda(S,i) - E_i| over free variables (test hook).
    double max_reparam_violation() const;

    const ProductSpace& product_space() const { return *ps_; }

  private:
    struct Row {
        SubproblemKind kind;
        index_t origin;  // triangle row index or boundary row index
        int rhs;
        int plus_count;              // slots [0, plus_count) carry +1
        std::vector<index_t> cols;   // original column ids per slot
        std::vector<double> lambda;  // aligned with cols
    };

    DualState() = default;
    void build(const std::vector<std::int8_t>& assignment);
    double compute_lower_bound() const;
    void heap_push(index_t row, index_t slot);
    double row_min_excluding(index_t row, index_t slot);

    const ProductSpace* ps_ = nullptr;
    const EnergyVector* energy_ = nullptr;

    std::vector<Row> rows_;
    // CSC view: per column, the (row, slot) incidences.
    std::vector<index_t> var_offset_;
    std::vector<std::pair<index_t, index_t>> var_refs_;
    std::vector<std::int8_t> state_;  // -1 free, 0/1 fixed (external or preprocessing)
    std::vector<bool> internally_forced_;
    index_t num_forced_ = 0;
    double fixed_cost_ = 0;  // energy of columns fixed to 1
    double lower_bound_ = -kInf;
    int pass_index_ = 0;

    // Lazy min-heaps per projection row: (lambda, slot), stale entries allowed.
    std::vector<std::vector<std::pair<double, index_t>>> heaps_;
};

// Sign-based reconstruction: gamma_i = 1 iff M_i < 0. Feasibility is the
// caller's concern (valid only when the relaxation is tight).
std::vector<std::uint8_t> extract_by_sign(const std::vector<double>& total_min_marginals);

}  // namespace esm
