#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdd {

// Two-region resource allocation with BHH tour-length resource consumption
// and logarithmic demand response. Natural log throughout.
struct StylizedInstance {
    double T = 0.0;  // total delivery resource
    double A = 0.0;  // region area
    double beta = 0.0;
    double M1 = 0.0; // log-demand scale, region 1
    double M2 = 0.0;

    void validate() const {
        if (T <= 0.0 || A <= 0.0 || beta <= 0.0 || M1 <= 0.0 || M2 <= 0.0)
            throw std::invalid_argument("StylizedInstance: all parameters must be positive");
    }

    double demand_rate(double M, double r) const { return std::log(M * r + 1.0); }

    // BHH resource use for serving class (M, r): beta * sqrt(r * lambda * A).
    double resource_use(double M, double r) const {
        return beta * std::sqrt(demand_rate(M, r) * r * A);
    }
};

struct Allocation {
    double r1 = 0.0;
    double r2 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double objective = 0.0;
    double resource_used = 0.0;

    static Allocation make(const StylizedInstance& inst, double r1, double r2) {
        Allocation a;
        a.r1 = r1;
        a.r2 = r2;
        a.lambda1 = inst.demand_rate(inst.M1, r1);
        a.lambda2 = inst.demand_rate(inst.M2, r2);
        a.objective = a.lambda1 * r1 + a.lambda2 * r2;
        a.resource_used = inst.resource_use(inst.M1, r1) + inst.resource_use(inst.M2, r2);
        return a;
    }

    bool feasible(const StylizedInstance& inst, double tol = 1e-9) const {
        return resource_used <= inst.T + tol;
    }
};

// Objective after eliminating region 1 through the binding resource
// constraint: f(r2) = [T^2 - 2Tb*sqrt(A*ln(M2 r2+1)*r2) + 2Ab^2*ln(M2 r2+1)*r2] / (Ab^2).
inline double reduced_objective(const StylizedInstance& inst, double r2) {
    inst.validate();
    if (r2 < 0.0 || r2 > 1.0)
        throw std::domain_error("reduced_objective: r2 must be in [0, 1]");
    const double u = inst.demand_rate(inst.M2, r2) * r2; // lambda2 * r2
    const double root = std::sqrt(inst.A * u);
    if (inst.beta * root > inst.T + 1e-12)
        throw std::domain_error("reduced_objective: r2 consumes more than T");
    const double ab2 = inst.A * inst.beta * inst.beta;
    return (inst.T * inst.T - 2.0 * inst.T * inst.beta * root + 2.0 * ab2 * u) / ab2;
}

// Closed-form f'(r2); undefined at r2 = 0.
inline double objective_derivative(const StylizedInstance& inst, double r2) {
    inst.validate();
    if (r2 <= 0.0 || r2 > 1.0)
        throw std::domain_error("objective_derivative: r2 must be in (0, 1]");
    const double mr = inst.M2 * r2;
    const double lg = std::log(mr + 1.0);
    const double root = std::sqrt(inst.A * lg * r2);
    const double numerator = (lg + mr + lg * mr) * (2.0 * inst.beta * root - inst.T);
    const double denominator = inst.beta * root * (mr + 1.0);
    return numerator / denominator;
}

// Root of beta*sqrt(A*ln(M*r+1)*r) = target on (0, 1]; the left side is
// strictly increasing, so bisection finds the unique root when it exists.
inline std::optional<double> solve_resource_root(const StylizedInstance& inst, double M,
                                                 double target) {
    auto g = [&](double r) { return inst.beta * std::sqrt(inst.demand_rate(M, r) * r * inst.A); };
    if (g(1.0) < target) return std::nullopt;
    double lo = 0.0;
    double hi = 1.0;
    const double tol = 1e-10 * inst.T;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = g(mid);
        if (std::abs(v - target) <= tol) return mid;
        (v < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Critical point of the reduced objective: region 2 consumes exactly T/2.
inline std::optional<double> solve_critical(const StylizedInstance& inst) {
    inst.validate();
    return solve_resource_root(inst, inst.M2, inst.T / 2.0);
}

struct Candidate {
    std::string label;
    Allocation allocation;
    double slack = 0.0; // leftover resources after clamping rates at 1
};

struct RegimeReport {
    bool trivial = false; // serving everything is feasible
    std::vector<Candidate> candidates;
    std::size_t winner = 0;
    std::optional<double> r_critical_region2; // root for the r2-reduction
    std::optional<double> r_critical_region1; // root with indices swapped

    const Candidate& best() const { return candidates[winner]; }
};

namespace detail {

// Spend `budget` resources in one region; rates above 1 are clamped and the
// leftover is reported as slack.
inline std::pair<double, double> spend_in_region(const StylizedInstance& inst, double M,
                                                 double budget) {
    const std::optional<double> r = solve_resource_root(inst, M, budget);
    if (r) return {*r, 0.0};
    return {1.0, budget - inst.resource_use(M, 1.0)};
}

} // namespace detail

// Theorem-style candidate evaluation: all-in-region-1, all-in-region-2, and
// the equal split at the critical points of both reductions.
inline RegimeReport analyze(const StylizedInstance& inst) {
    inst.validate();
    RegimeReport report;
    const double full_use = inst.resource_use(inst.M1, 1.0) + inst.resource_use(inst.M2, 1.0);
    if (full_use <= inst.T) {
        report.trivial = true;
        report.candidates.push_back({"serve_all", Allocation::make(inst, 1.0, 1.0), inst.T - full_use});
        report.winner = 0;
        return report;
    }

    // When a region clamps at rate 1, the leftover budget flows to the other
    // region; wasting slack can never be optimal (Proposition 1).
    {
        auto [r1, slack] = detail::spend_in_region(inst, inst.M1, inst.T);
        double r2 = 0.0;
        if (slack > 0.0) std::tie(r2, slack) = detail::spend_in_region(inst, inst.M2, slack);
        report.candidates.push_back({"all_in_region_1", Allocation::make(inst, r1, r2), slack});
    }
    {
        auto [r2, slack] = detail::spend_in_region(inst, inst.M2, inst.T);
        double r1 = 0.0;
        if (slack > 0.0) std::tie(r1, slack) = detail::spend_in_region(inst, inst.M1, slack);
        report.candidates.push_back({"all_in_region_2", Allocation::make(inst, r1, r2), slack});
    }
    report.r_critical_region2 = solve_resource_root(inst, inst.M2, inst.T / 2.0);
    report.r_critical_region1 = solve_resource_root(inst, inst.M1, inst.T / 2.0);
    {
        const auto [r1, s1] = detail::spend_in_region(inst, inst.M1, inst.T / 2.0);
        const auto [r2, s2] = detail::spend_in_region(inst, inst.M2, inst.T / 2.0);
        report.candidates.push_back({"equal_split", Allocation::make(inst, r1, r2), s1 + s2});
    }
    report.winner = 0;
    for (std::size_t i = 1; i < report.candidates.size(); ++i) {
        if (report.candidates[i].allocation.objective >
            report.candidates[report.winner].allocation.objective)
            report.winner = i;
    }
    return report;
}

struct BindingWitness {
    double delta = 0.0;
    double objective_before = 0.0;
    double objective_after = 0.0;
    double gain = 0.0;
};

// Executable form of the binding-constraint argument: from a strictly slack
// allocation with r1 < 1, construct delta > 0 keeping feasibility while
// raising the objective by at least lambda1 * delta.
inline BindingWitness verify_binding(const StylizedInstance& inst, double r1, double r2) {
    inst.validate();
    const Allocation base = Allocation::make(inst, r1, r2);
    if (r1 >= 1.0 || base.resource_used >= inst.T - 1e-12)
        throw std::invalid_argument("verify_binding: need strict slack and r1 < 1");
    // Largest admissible increase of r1, halved for strictness.
    double lo = 0.0;
    double hi = 1.0 - r1;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (Allocation::make(inst, r1 + mid, r2).resource_used < inst.T)
            lo = mid;
        else
            hi = mid;
    }
    const double delta = lo / 2.0;
    if (delta <= 0.0) throw std::logic_error("verify_binding: no admissible delta");
    const Allocation improved = Allocation::make(inst, r1 + delta, r2);
    BindingWitness w;
    w.delta = delta;
    w.objective_before = base.objective;
    w.objective_after = improved.objective;
    w.gain = improved.objective - base.objective;
    return w;
}

} // namespace sdd
