#include "ucp/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ucp/bounds.hpp"
#include "ucp/errors.hpp"
#include "ucp/parallel.hpp"
#include "ucp/rng.hpp"

namespace ucp::stochastic {

namespace {

constexpr std::int64_t kPathBlock = 8192;

// Geometry flattened into plain arrays so the step loop stays tight.
struct Kernel {
    int d = 3;
    int reflect = 0; // 0 = box fold, 1 = radial mirror
    double lo[kMaxDim] = {};
    double hi[kMaxDim] = {};
    double bc[kMaxDim] = {};
    double br = 0.0;
    std::vector<double> sc, bcenters; // flattened centers
    std::vector<double> sr2, br2;     // squared radii
    int ns = 0, nb = 0;

    static Kernel make(const ConvexDomain& G, const BallUnion& S, const BallUnion& B) {
        Kernel k;
        k.d = G.dim();
        if (k.d > kMaxDim) throw invalid_params("paths: dimension too large");
        if (!G.clips().empty())
            throw unsupported_reflection("paths: clipped domains are not supported");
        switch (G.kind()) {
        case DomainKind::box:
        case DomainKind::whole_space: {
            k.reflect = 0;
            Point lo, hi;
            G.sampling_box(lo, hi);
            for (int i = 0; i < k.d; ++i) {
                k.lo[i] = lo[static_cast<std::size_t>(i)];
                k.hi[i] = hi[static_cast<std::size_t>(i)];
            }
            break;
        }
        case DomainKind::ball: {
            k.reflect = 1;
            for (int i = 0; i < k.d; ++i) k.bc[i] = G.center()[static_cast<std::size_t>(i)];
            k.br = G.radius();
            break;
        }
        case DomainKind::halfspaces:
            throw unsupported_reflection("paths: halfspace-intersection domains are not supported");
        }
        auto flatten = [&](const BallUnion& u, std::vector<double>& c, std::vector<double>& r2, int& n) {
            n = static_cast<int>(u.size());
            c.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(k.d));
            r2.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                for (int a = 0; a < k.d; ++a)
                    c[static_cast<std::size_t>(i * k.d + a)] = u.centers[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
                r2[static_cast<std::size_t>(i)] = u.radii[static_cast<std::size_t>(i)] * u.radii[static_cast<std::size_t>(i)];
            }
        };
        flatten(S, k.sc, k.sr2, k.ns);
        flatten(B, k.bcenters, k.br2, k.nb);
        return k;
    }

    bool in_S(const double* x) const { return in_union(x, sc.data(), sr2.data(), ns); }
    bool in_B(const double* x) const { return in_union(x, bcenters.data(), br2.data(), nb); }

    bool in_union(const double* x, const double* c, const double* r2, int n) const {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const double* ci = c + i * d;
            for (int a = 0; a < d; ++a) {
                const double dd = x[a] - ci[a];
                s += dd * dd;
            }
            if (s <= r2[i]) return true;
        }
        return false;
    }

    void reflect_into(double* x, std::int64_t& refl) const {
        if (reflect == 0) {
            for (int a = 0; a < d; ++a) {
                while (x[a] < lo[a] || x[a] > hi[a]) {
                    if (x[a] < lo[a])
                        x[a] = 2.0 * lo[a] - x[a];
                    else
                        x[a] = 2.0 * hi[a] - x[a];
                    ++refl;
                }
            }
        } else {
            for (int guard = 0; guard < 8; ++guard) {
                double s = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double dd = x[a] - bc[a];
                    s += dd * dd;
                }
                if (s <= br * br) break;
                const double r = std::sqrt(s);
                const double f = (2.0 * br - r) / r; // mirror the overshoot
                for (int a = 0; a < d; ++a) x[a] = bc[a] + f * (x[a] - bc[a]);
                ++refl;
            }
        }
    }
};

struct PathEnd {
    PathOutcome o;
    double x[kMaxDim];
};

// Runs one path; fully deterministic given (cfg.seed, path_index).
PathEnd run_path(const Kernel& k, const PathConfig& cfg, std::int64_t path_index) {
    auto gen = rng::stream(cfg.seed, static_cast<std::uint64_t>(path_index));
    const std::int64_t nsteps = static_cast<std::int64_t>(std::llround(cfg.horizon / cfg.dt));
    const double sqrt_dt = std::sqrt(cfg.dt);

    PathEnd pe;
    double* x = pe.x;
    for (int a = 0; a < k.d; ++a) x[a] = cfg.start[static_cast<std::size_t>(a)];
    PathOutcome& o = pe.o;

    if (k.ns > 0 && k.in_S(x)) {
        o.hit_S = true;
        o.first_hit_time = 0.0;
    }
    for (std::int64_t s = 0; s < nsteps; ++s) {
        if (k.nb > 0 && k.in_B(x)) {
            o.occupation_T += cfg.dt;
            if (o.occupation_T > cfg.stop_when_occupation_exceeds) {
                o.early_stopped = true;
                break;
            }
        }
        for (int a = 0; a < k.d; ++a) x[a] += sqrt_dt * gen.next_normal();
        k.reflect_into(x, o.reflections);
        if (!o.hit_S && k.ns > 0 && k.in_S(x)) {
            o.hit_S = true;
            o.first_hit_time = static_cast<double>(s + 1) * cfg.dt;
        }
    }
    return pe;
}

void validate(const ConvexDomain& G, const PathConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw invalid_params("paths: dt must be positive");
    if (!(cfg.horizon > 0.0)) throw invalid_params("paths: horizon must be positive");
    if (cfg.n_paths < 1) throw invalid_params("paths: n_paths >= 1");
    if (static_cast<int>(cfg.start.size()) != G.dim())
        throw invalid_params("paths: start point dimension mismatch");
    if (!G.contains(cfg.start, 1e-12))
        throw invalid_params("paths: start point must lie in the closure of G");
}

// Deterministic blockwise accumulation: fn(path) -> per-path contribution;
// partial sums are combined in block order.
struct MeanAccum {
    double sum = 0.0, sumsq = 0.0;
    std::int64_t count = 0;
};

template <class PerPath>
MeanAccum accumulate_paths(const Kernel& k, const PathConfig& cfg, PerPath&& fn) {
    const std::int64_t nblocks = (cfg.n_paths + kPathBlock - 1) / kPathBlock;
    std::vector<MeanAccum> partial(static_cast<std::size_t>(nblocks));
    ThreadPool::instance().run_chunks(cfg.n_paths, kPathBlock,
                                      [&](std::int64_t block, std::int64_t b, std::int64_t e) {
                                          MeanAccum acc;
                                          for (std::int64_t p = b; p < e; ++p) {
                                              const double v = fn(run_path(k, cfg, p));
                                              acc.sum += v;
                                              acc.sumsq += v * v;
                                              ++acc.count;
                                          }
                                          partial[static_cast<std::size_t>(block)] = acc;
                                      });
    MeanAccum total;
    for (const auto& a : partial) {
        total.sum += a.sum;
        total.sumsq += a.sumsq;
        total.count += a.count;
    }
    return total;
}

MCEstimate mean_estimate(const MeanAccum& a, std::uint64_t seed) {
    MCEstimate e;
    e.n = a.count;
    e.seed = seed;
    e.value = a.sum / static_cast<double>(a.count);
    const double var =
        std::max(0.0, (a.sumsq - a.sum * a.sum / static_cast<double>(a.count)) /
                          std::max<double>(1.0, static_cast<double>(a.count - 1)));
    e.ci_halfwidth = 1.959963984540054 * std::sqrt(var / static_cast<double>(a.count));
    return e;
}

void check_fattening(const BallUnion& S, const BallUnion& B, double rho) {
    if (S.size() != B.size())
        throw invalid_params("hit-and-run: B must be the rho-fattening of S");
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (dist2(S.centers[i], B.centers[i]) > 1e-12 ||
            std::abs(B.radii[i] - S.radii[i] - rho) > 1e-12)
            throw invalid_params("hit-and-run: B must be the rho-fattening of S");
    }
}

} // namespace

double proportion_ci_halfwidth(double phat, std::int64_t n) {
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double edge = 10.0 / nn;
    if (phat < edge || phat > 1.0 - edge) {
        // Wilson interval halfwidth
        const double z2 = z * z;
        return z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
    }
    return z * std::sqrt(phat * (1.0 - phat) / nn);
}

std::vector<PathOutcome> simulate_paths(const ConvexDomain& G, const BallUnion& S,
                                        const BallUnion& B, const PathConfig& cfg) {
    validate(G, cfg);
    const Kernel k = Kernel::make(G, S, B);
    std::vector<PathOutcome> out(static_cast<std::size_t>(cfg.n_paths));
    ThreadPool::instance().run_chunks(cfg.n_paths, kPathBlock,
                                      [&](std::int64_t, std::int64_t b, std::int64_t e) {
                                          for (std::int64_t p = b; p < e; ++p)
                                              out[static_cast<std::size_t>(p)] = run_path(k, cfg, p).o;
                                      });
    return out;
}

HitAndRunResult estimate_hit_and_run(const ConvexDomain& G, const BallUnion& S,
                                     const BallUnion& B, double rho, double alpha,
                                     const PathConfig& cfg) {
    validate(G, cfg);
    if (!(alpha > 0.0) || alpha > cfg.horizon)
        throw invalid_params("hit-and-run: alpha in (0, horizon]");
    if (!(rho > 0.0)) throw invalid_params("hit-and-run: rho must be positive");
    if (cfg.dt > rho * rho / 100.0 + 1e-18)
        throw invalid_params("hit-and-run: resolution rule dt <= rho^2/100 violated");
    check_fattening(S, B, rho);

    PathConfig c = cfg;
    c.stop_when_occupation_exceeds = alpha * (1.0 + 1e-12);
    const Kernel k = Kernel::make(G, S, B);
    const double tol = 1e-9 * cfg.dt;
    const auto acc = accumulate_paths(k, c, [&](const PathEnd& pe) {
        return (pe.o.hit_S && pe.o.occupation_T <= alpha + tol) ? 1.0 : 0.0;
    });

    HitAndRunResult r;
    r.estimate.n = acc.count;
    r.estimate.seed = cfg.seed;
    r.estimate.value = acc.sum / static_cast<double>(acc.count);
    r.estimate.ci_halfwidth = proportion_ci_halfwidth(r.estimate.value, acc.count);
    r.paper_bound = bounds::hit_and_run_bound(rho, alpha, G.dim());
    return r;
}

MCEstimate feynman_kac(const ConvexDomain& G, const BallUnion& S, const BallUnion& B, double beta,
                       const FieldSampler& f, const PathConfig& cfg, bool killed) {
    validate(G, cfg);
    if (!(beta >= 0.0)) throw invalid_params("feynman-kac: beta must be >= 0");
    if (killed && S.empty()) throw invalid_params("feynman-kac: killing requires an obstacle set");

    // boundedness spot check of f
    {
        Point lo, hi;
        G.sampling_box(lo, hi);
        auto gen = rng::stream(cfg.seed, 0xfcULL);
        Point x(static_cast<std::size_t>(G.dim()));
        for (int s = 0; s < 256; ++s) {
            for (int a = 0; a < G.dim(); ++a)
                x[static_cast<std::size_t>(a)] =
                    lo[static_cast<std::size_t>(a)] +
                    gen.next_uniform() * (hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]);
            if (!G.contains(x)) continue;
            const double v = f(x);
            if (!std::isfinite(v) || std::abs(v) > 1e12)
                throw invalid_params("feynman-kac: f is unbounded on samples");
        }
    }

    PathConfig c = cfg;
    if (beta > 0.0) c.stop_when_occupation_exceeds = 46.0 / beta; // exp(-46) below double noise
    const Kernel k = Kernel::make(G, S, B);
    const int d = G.dim();
    const auto acc = accumulate_paths(k, c, [&](const PathEnd& pe) {
        if (killed && pe.o.hit_S) return 0.0;
        if (pe.o.early_stopped) return 0.0; // exp weight is numerically zero
        return f(std::span<const double>(pe.x, static_cast<std::size_t>(d))) *
               std::exp(-beta * pe.o.occupation_T);
    });
    return mean_estimate(acc, cfg.seed);
}

SemigroupGapResult estimate_semigroup_gap(const ConvexDomain& G, const BallUnion& S,
                                          const BallUnion& B, double rho, double beta,
                                          const std::vector<Point>& starts, const PathConfig& cfg) {
    if (starts.empty()) throw invalid_params("semigroup gap: need at least one start point");
    if (!(beta >= 0.0)) throw invalid_params("semigroup gap: beta must be >= 0");
    if (!(rho > 0.0)) throw invalid_params("semigroup gap: rho must be positive");
    if (cfg.dt > rho * rho / 100.0 + 1e-18)
        throw invalid_params("semigroup gap: resolution rule dt <= rho^2/100 violated");
    check_fattening(S, B, rho);

    SemigroupGapResult out;
    out.alpha_star = rho / (4.0 * std::sqrt(2.0) * std::sqrt(std::max(beta, 1e-300)));
    out.proof_bound = std::exp(-2.0 * beta * out.alpha_star) +
                      bounds::hit_and_run_bound(rho, std::min(out.alpha_star, 1.0), G.dim());

    const Kernel k = Kernel::make(G, S, B);
    for (std::size_t si = 0; si < starts.size(); ++si) {
        PathConfig c = cfg;
        c.start = starts[si];
        validate(G, c);
        c.seed = cfg.seed + (static_cast<std::uint64_t>(si) << 40);
        if (beta > 0.0) c.stop_when_occupation_exceeds = 23.0 / beta; // exp(-2 beta T) < 1e-20
        const auto acc = accumulate_paths(k, c, [&](const PathEnd& pe) {
            if (!pe.o.hit_S || pe.o.early_stopped) return 0.0;
            return std::exp(-2.0 * beta * pe.o.occupation_T);
        });
        out.per_start.push_back(mean_estimate(acc, c.seed));
        if (si == 0 || out.per_start.back().value > out.max_estimate.value) {
            out.argmax = si;
            out.max_estimate = out.per_start.back();
        }
    }
    return out;
}

} // namespace ucp::stochastic
