#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "ucp/geometry.hpp"

namespace ucp::stochastic {

struct PathConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    std::int64_t n_paths = 1;
    std::uint64_t seed = 1;
    Point start;
    // Estimators that only need tail events {T <= alpha} or exp(-beta T)
    // set this so paths stop once the occupation time makes the
    // contribution zero (or numerically negligible).
    double stop_when_occupation_exceeds = std::numeric_limits<double>::infinity();
};

struct PathOutcome {
    bool hit_S = false;
    double first_hit_time = std::numeric_limits<double>::infinity();
    double occupation_T = 0.0; // time spent in B, left-endpoint quadrature
    std::int64_t reflections = 0;
    bool early_stopped = false;
};

struct MCEstimate {
    double value = 0.0;
    double ci_halfwidth = 0.0; // 95%, normal approx, Wilson near 0/1
    std::int64_t n = 0;
    std::uint64_t seed = 0;
};

// Euler walk with sqrt(dt) normal increments, reflected at the boundary of
// G (coordinate folding for boxes and the truncation box of whole space,
// radial mirroring for balls). Hits of S are detected by node membership,
// occupation of B by left-endpoint quadrature. Paths are independent with
// per-path counter-derived streams.
std::vector<PathOutcome> simulate_paths(const ConvexDomain& G, const BallUnion& S,
                                        const BallUnion& B, const PathConfig& cfg);

// P{sigma <= horizon, T <= alpha} with CI; `paper_bound` in the result pair
// is 2^{d/2+2} exp(-rho^2/(16 alpha)).
struct HitAndRunResult {
    MCEstimate estimate;
    double paper_bound = 0.0;
};
HitAndRunResult estimate_hit_and_run(const ConvexDomain& G, const BallUnion& S,
                                     const BallUnion& B, double rho, double alpha,
                                     const PathConfig& cfg);

using FieldSampler = std::function<double(std::span<const double>)>;

// E[ f(X_horizon) exp(-beta T) ] or, when killed, the same with the factor
// 1{sigma > horizon}. S may be empty only when killed == false.
MCEstimate feynman_kac(const ConvexDomain& G, const BallUnion& S, const BallUnion& B, double beta,
                       const FieldSampler& f, const PathConfig& cfg, bool killed);

struct SemigroupGapResult {
    MCEstimate max_estimate; // worst start point
    std::size_t argmax = 0;
    std::vector<MCEstimate> per_start;
    double alpha_star = 0.0; // rho/(4 sqrt2 sqrt(beta))
    double proof_bound = 0.0; // exp(-2 beta alpha*) + hit-and-run bound at alpha*
};

// c(x, rho, beta) = E_x[ exp(-2 beta T) 1{sigma <= horizon} ] per start
// point, reported as the max over the start set.
SemigroupGapResult estimate_semigroup_gap(const ConvexDomain& G, const BallUnion& S,
                                          const BallUnion& B, double rho, double beta,
                                          const std::vector<Point>& starts, const PathConfig& cfg);

// 95% halfwidth for a proportion: normal approximation with a Wilson
// fallback near the 0/1 edges.
double proportion_ci_halfwidth(double phat, std::int64_t n);

} // namespace ucp::stochastic
