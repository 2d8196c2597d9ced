#include "ucp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ucp/errors.hpp"
#include "ucp/parallel.hpp"

namespace ucp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(std::size_t got, int want, const char* what) {
    if (static_cast<int>(got) != want)
        throw invalid_params(std::string(what) + ": dimension mismatch");
}

double normalize(Point& v) {
    double n = norm2(v);
    if (!(n > 0.0)) throw invalid_params("halfspace normal must be nonzero");
    for (auto& c : v) c /= n;
    return n;
}
} // namespace

ConvexDomain ConvexDomain::box(Point lo, Point hi) {
    if (lo.size() != hi.size() || lo.empty()) throw invalid_params("box: lo/hi size mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw invalid_params("box: lo must be strictly below hi on every axis");
    ConvexDomain d;
    d.kind_ = DomainKind::box;
    d.dim_ = static_cast<int>(lo.size());
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
}

ConvexDomain ConvexDomain::ball(Point center, double radius) {
    if (center.empty()) throw invalid_params("ball: empty center");
    if (!(radius > 0.0)) throw invalid_params("ball: radius must be positive");
    ConvexDomain d;
    d.kind_ = DomainKind::ball;
    d.dim_ = static_cast<int>(center.size());
    d.center_ = std::move(center);
    d.radius_ = radius;
    return d;
}

ConvexDomain ConvexDomain::halfspaces(std::vector<Halfspace> planes, Point interior_point) {
    if (planes.empty()) throw invalid_params("halfspaces: need at least one plane");
    ConvexDomain d;
    d.kind_ = DomainKind::halfspaces;
    d.dim_ = static_cast<int>(interior_point.size());
    for (auto& p : planes) {
        check_dim(p.normal.size(), d.dim_, "halfspace");
        normalize(p.normal);
    }
    d.planes_ = std::move(planes);
    d.interior_ = std::move(interior_point);
    for (const auto& p : d.planes_)
        if (!(dot(p.normal, d.interior_) < p.offset))
            throw invalid_params("halfspaces: stored interior point is not strictly interior");
    return d;
}

ConvexDomain ConvexDomain::whole_space(Point trunc_lo, Point trunc_hi) {
    ConvexDomain base = box(std::move(trunc_lo), std::move(trunc_hi));
    base.kind_ = DomainKind::whole_space;
    return base;
}

void ConvexDomain::add_clip(Halfspace h) {
    check_dim(h.normal.size(), dim_, "clip");
    normalize(h.normal);
    clips_.push_back(std::move(h));
}

bool ConvexDomain::contains(std::span<const double> x, double eps) const {
    for (const auto& c : clips_)
        if (dot(c.normal, x) > c.offset + eps) return false;
    switch (kind_) {
    case DomainKind::box:
        for (int i = 0; i < dim_; ++i)
            if (x[i] < lo_[i] - eps || x[i] > hi_[i] + eps) return false;
        return true;
    case DomainKind::ball:
        return dist2(x, center_) <= radius_ + eps;
    case DomainKind::halfspaces:
        for (const auto& p : planes_)
            if (dot(p.normal, x) > p.offset + eps) return false;
        return true;
    case DomainKind::whole_space:
        // membership in G itself; truncation handled by sampling_box
        return true;
    }
    return false;
}

double ConvexDomain::boundary_margin(std::span<const double> x) const {
    double m = kInf;
    switch (kind_) {
    case DomainKind::box:
        for (int i = 0; i < dim_; ++i)
            m = std::min(m, std::min(x[i] - lo_[i], hi_[i] - x[i]));
        break;
    case DomainKind::ball:
        m = radius_ - dist2(x, center_);
        break;
    case DomainKind::halfspaces:
        for (const auto& p : planes_) m = std::min(m, p.offset - dot(p.normal, x));
        break;
    case DomainKind::whole_space:
        m = kInf;
        break;
    }
    for (const auto& c : clips_) m = std::min(m, c.offset - dot(c.normal, x));
    return m;
}

void ConvexDomain::sampling_box(Point& lo, Point& hi) const {
    switch (kind_) {
    case DomainKind::box:
    case DomainKind::whole_space:
        lo = lo_;
        hi = hi_;
        return;
    case DomainKind::ball:
        lo.assign(dim_, 0.0);
        hi.assign(dim_, 0.0);
        for (int i = 0; i < dim_; ++i) {
            lo[i] = center_[i] - radius_;
            hi[i] = center_[i] + radius_;
        }
        return;
    case DomainKind::halfspaces: {
        // grow a box around the interior point until all of G's directions
        // are covered; unbounded intersections are rejected.
        // Each axis direction +-e_i is bounded iff max over the polytope of
        // +-x_i is finite; we find it by a coarse ray march capped at 1e6.
        lo.assign(dim_, 0.0);
        hi.assign(dim_, 0.0);
        for (int i = 0; i < dim_; ++i) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                double step = 1.0, pos = 0.0;
                Point probe = interior_;
                while (step > 1e-9) {
                    probe[i] = interior_[i] + sgn * (pos + step);
                    if (contains(probe)) {
                        pos += step;
                        if (pos > 1e6)
                            throw unbounded_domain("halfspace intersection is unbounded along an axis");
                    } else {
                        step *= 0.5;
                    }
                }
                if (sgn < 0)
                    lo[i] = interior_[i] - pos;
                else
                    hi[i] = interior_[i] + pos;
            }
        }
        return;
    }
    }
}

void BallUnion::add(Point c, double r) {
    if (centers.empty() && dim == 0) dim = static_cast<int>(c.size());
    if (static_cast<int>(c.size()) != dim) throw invalid_params("ball union: dimension mismatch");
    if (!(r > 0.0)) throw invalid_params("ball union: radius must be positive");
    centers.push_back(std::move(c));
    radii.push_back(r);
}

bool BallUnion::contains(std::span<const double> x, double eps) const {
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double r = radii[i] + eps;
        if (dist2_sq(x, centers[i]) <= r * r) return true;
    }
    return false;
}

double BallUnion::min_radius() const {
    double m = kInf;
    for (double r : radii) m = std::min(m, r);
    return m;
}

BallUnion BallUnion::fattened(double rho) const {
    if (!(rho >= 0.0)) throw invalid_params("fattened: rho must be >= 0");
    BallUnion out(*this);
    for (auto& r : out.radii) r += rho;
    return out;
}

DensenessCertificate check_relative_denseness(const BallUnion& B, const ConvexDomain& G,
                                              double R, double delta, double sample_spacing) {
    if (!(sample_spacing > 0.0)) throw invalid_params("denseness: sample_spacing must be positive");
    if (!(delta > 0.0) || delta > R) throw invalid_params("denseness: need 0 < delta <= R");
    if (sample_spacing > 0.5 * delta + 1e-15 * delta)
        throw invalid_params("denseness: sample_spacing must be <= delta/2");
    if (G.is_whole_space() && G.lo().empty())
        throw unbounded_domain("denseness: whole_space domain needs a truncation box");

    Point lo, hi;
    G.sampling_box(lo, hi);
    const int d = G.dim();

    std::vector<long> steps(d);
    long long total = 1;
    for (int i = 0; i < d; ++i) {
        steps[i] = static_cast<long>(std::floor((hi[i] - lo[i]) / sample_spacing + 1e-12)) + 1;
        total *= steps[i];
    }

    // precompute eligible witness centers (radius >= delta)
    std::vector<const Point*> witnesses;
    for (std::size_t i = 0; i < B.size(); ++i)
        if (B.radii[i] >= delta - 1e-15 * delta) witnesses.push_back(&B.centers[i]);

    struct Worst {
        double margin = -kInf;
        Point x;
    };
    const long long grain = std::max<long long>(1, total / (64 * ThreadPool::instance().threads()));
    std::vector<Worst> worst_by_chunk(static_cast<std::size_t>((total + grain - 1) / grain));

    ThreadPool::instance().run_chunks(total, grain, [&](std::int64_t chunk, std::int64_t b, std::int64_t e) {
        Worst w;
        Point x(static_cast<std::size_t>(d), 0.0);
        for (std::int64_t flat = b; flat < e; ++flat) {
            std::int64_t rem = flat;
            for (int i = d - 1; i >= 0; --i) {
                x[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] +
                                                 sample_spacing * static_cast<double>(rem % steps[i]);
                rem /= steps[i];
            }
            if (!G.contains(x)) continue;
            double best = kInf;
            for (const Point* y : witnesses) {
                const double v = dist2(x, *y);
                if (v < best) best = v;
            }
            const double margin = (witnesses.empty() ? kInf : best + delta) - R;
            if (margin > w.margin) {
                w.margin = margin;
                w.x = x;
            }
        }
        worst_by_chunk[static_cast<std::size_t>(chunk)] = std::move(w);
    });

    DensenessCertificate cert;
    cert.R = R;
    cert.delta = delta;
    cert.sample_spacing = sample_spacing;
    cert.margin = -kInf;
    for (const auto& w : worst_by_chunk) {
        if (w.margin > cert.margin) {
            cert.margin = w.margin;
            cert.worst_point = w.x;
        }
    }
    if (cert.margin == -kInf) { // no sample fell inside G
        cert.margin = 0.0;
        cert.worst_point.assign(static_cast<std::size_t>(d), 0.0);
    }
    cert.verified = cert.margin <= 0.0;
    return cert;
}

Skeleton build_skeleton(const std::vector<Point>& candidates, double R) {
    if (candidates.empty()) throw invalid_params("skeleton: candidates must be nonempty");
    if (!(R > 0.0)) throw invalid_params("skeleton: R must be positive");
    Skeleton s;
    s.separation = R;
    s.cover_radius = 3.0 * R;
    s.source_count = static_cast<int>(candidates.size());
    const double R2 = R * R;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const auto& c = candidates[ci];
        bool ok = true;
        for (const auto& p : s.points) {
            if (dist2_sq(c, p) < R2) {
                ok = false;
                break;
            }
        }
        if (ok)
            s.points.push_back(c);
        else
            s.rejected.push_back(ci);
    }
    return s;
}

std::size_t voronoi_assign(const Skeleton& skel, std::span<const double> x) {
    if (skel.points.empty()) throw invalid_params("voronoi_assign: empty skeleton");
    std::size_t best = 0;
    double bestd = dist2_sq(x, skel.points[0]);
    for (std::size_t i = 1; i < skel.points.size(); ++i) {
        const double d = dist2_sq(x, skel.points[i]);
        if (d < bestd) { // strict: ties keep the smaller index
            bestd = d;
            best = i;
        }
    }
    return best;
}

InradiusResult inradius_estimate(const ConvexDomain& G, double tol) {
    InradiusResult res;
    if (G.is_whole_space() && G.clips().empty()) {
        res.radius = kInf;
        res.center.assign(static_cast<std::size_t>(G.dim()), 0.0);
        return res;
    }
    const int d = G.dim();
    if (G.clips().empty()) {
        if (G.kind() == DomainKind::box) {
            res.center.resize(static_cast<std::size_t>(d));
            double m = kInf;
            for (int i = 0; i < d; ++i) {
                res.center[static_cast<std::size_t>(i)] = 0.5 * (G.lo()[i] + G.hi()[i]);
                m = std::min(m, 0.5 * (G.hi()[i] - G.lo()[i]));
            }
            res.radius = m;
            return res;
        }
        if (G.kind() == DomainKind::ball) {
            res.center = G.center();
            res.radius = G.radius();
            return res;
        }
    }
    // concave maximization of boundary_margin by multiscale grid refinement
    Point lo, hi;
    G.sampling_box(lo, hi);
    Point best_x(static_cast<std::size_t>(d), 0.0);
    double best = -kInf;
    Point cur_lo = lo, cur_hi = hi;
    const int per_axis = 7;
    for (int round = 0; round < 60; ++round) {
        long long total = 1;
        for (int i = 0; i < d; ++i) total *= per_axis;
        Point x(static_cast<std::size_t>(d), 0.0);
        double round_best = -kInf;
        Point round_x = best_x;
        for (long long flat = 0; flat < total; ++flat) {
            long long rem = flat;
            for (int i = 0; i < d; ++i) {
                const long long k = rem % per_axis;
                rem /= per_axis;
                x[static_cast<std::size_t>(i)] =
                    cur_lo[static_cast<std::size_t>(i)] +
                    (cur_hi[static_cast<std::size_t>(i)] - cur_lo[static_cast<std::size_t>(i)]) *
                        (static_cast<double>(k) / (per_axis - 1));
            }
            const double m = G.boundary_margin(x);
            if (m > round_best) {
                round_best = m;
                round_x = x;
            }
        }
        if (round_best > best) {
            best = round_best;
            best_x = round_x;
        }
        double width = 0.0;
        for (int i = 0; i < d; ++i)
            width = std::max(width, cur_hi[static_cast<std::size_t>(i)] - cur_lo[static_cast<std::size_t>(i)]);
        if (width < tol) break;
        // shrink around the best point; factor keeps the previous best inside
        for (int i = 0; i < d; ++i) {
            const double w = (cur_hi[static_cast<std::size_t>(i)] - cur_lo[static_cast<std::size_t>(i)]) /
                             (per_axis - 1) * 1.5;
            cur_lo[static_cast<std::size_t>(i)] = round_x[static_cast<std::size_t>(i)] - w;
            cur_hi[static_cast<std::size_t>(i)] = round_x[static_cast<std::size_t>(i)] + w;
        }
    }
    res.radius = std::max(best, 0.0);
    res.center = best_x;
    return res;
}

bool CellUnion::contains(std::span<const double> x, double eps) const {
    for (const auto& k : cells) {
        bool in = true;
        for (int i = 0; i < dim; ++i) {
            const double c0 = ell * static_cast<double>(k[static_cast<std::size_t>(i)]);
            if (x[static_cast<std::size_t>(i)] < c0 - eps || x[static_cast<std::size_t>(i)] > c0 + ell + eps) {
                in = false;
                break;
            }
        }
        if (in) return true;
    }
    return false;
}

void CellUnion::bounding_box(Point& lo, Point& hi) const {
    lo.assign(static_cast<std::size_t>(dim), kInf);
    hi.assign(static_cast<std::size_t>(dim), -kInf);
    for (const auto& k : cells) {
        for (int i = 0; i < dim; ++i) {
            const double c0 = ell * static_cast<double>(k[static_cast<std::size_t>(i)]);
            lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], c0);
            hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], c0 + ell);
        }
    }
}

bool CellUnion::is_full_box() const {
    if (cells.empty()) return false;
    std::vector<long> kmin(static_cast<std::size_t>(dim), std::numeric_limits<long>::max());
    std::vector<long> kmax(static_cast<std::size_t>(dim), std::numeric_limits<long>::min());
    for (const auto& k : cells) {
        for (int i = 0; i < dim; ++i) {
            kmin[static_cast<std::size_t>(i)] = std::min(kmin[static_cast<std::size_t>(i)], k[static_cast<std::size_t>(i)]);
            kmax[static_cast<std::size_t>(i)] = std::max(kmax[static_cast<std::size_t>(i)], k[static_cast<std::size_t>(i)]);
        }
    }
    long long expect = 1;
    for (int i = 0; i < dim; ++i)
        expect *= kmax[static_cast<std::size_t>(i)] - kmin[static_cast<std::size_t>(i)] + 1;
    return expect == static_cast<long long>(cells.size());
}

ConvexDomain CellUnion::to_domain() const {
    if (!is_full_box())
        throw invalid_params("cell union is not a full rectangular block of cells");
    Point lo, hi;
    bounding_box(lo, hi);
    return ConvexDomain::box(std::move(lo), std::move(hi));
}

BallPool make_ball_pool(const std::vector<std::vector<long>>& gamma, double ell, double rho,
                        const std::vector<Point>& offsets) {
    if (gamma.empty()) throw invalid_params("ball pool: no cells");
    if (!(ell > 0.0) || !(rho > 0.0) || !(rho < 0.5 * ell))
        throw invalid_params("ball pool: need 0 < rho < ell/2");
    if (offsets.size() != gamma.size())
        throw invalid_params("ball pool: one offset per cell required");
    const int d = static_cast<int>(gamma.front().size());

    BallPool pool;
    pool.region.cells = gamma;
    pool.region.ell = ell;
    pool.region.dim = d;
    pool.obstacles = BallUnion(d);
    pool.covering_radius = std::sqrt(static_cast<double>(d)) * ell;
    pool.thickness = rho;

    for (std::size_t c = 0; c < gamma.size(); ++c) {
        if (static_cast<int>(gamma[c].size()) != d || static_cast<int>(offsets[c].size()) != d)
            throw invalid_params("ball pool: dimension mismatch in cells/offsets");
        Point center(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            const double off = offsets[c][static_cast<std::size_t>(i)];
            if (!(off > rho) || !(off < ell - rho))
                throw invalid_params("ball pool: ball escapes its cell");
            center[static_cast<std::size_t>(i)] = ell * static_cast<double>(gamma[c][static_cast<std::size_t>(i)]) + off;
        }
        pool.obstacles.add(std::move(center), rho);
    }
    return pool;
}

std::vector<double> dyadic_shell_radii(double r0, long box_half_width) {
    std::vector<double> out;
    for (long s = 0; s <= box_half_width; ++s)
        out.push_back(r0 * std::pow(2.0, -static_cast<double>(s)));
    return out;
}

std::pair<ConvexDomain, BallUnion> make_appendix_example(const std::vector<double>& shell_radii,
                                                         long box_half_width, int dim) {
    if (box_half_width < 0) throw invalid_params("appendix example: negative half width");
    if (shell_radii.empty()) throw invalid_params("appendix example: no radii");
    if (shell_radii.size() != 1 &&
        shell_radii.size() != static_cast<std::size_t>(box_half_width) + 1)
        throw invalid_params("appendix example: radii must have one entry or one per shell");
    for (double r : shell_radii)
        if (!(r > 0.0) || !(r < 0.5)) throw invalid_params("appendix example: radii must lie in (0, 1/2)");

    const double w = static_cast<double>(box_half_width) + 0.5;
    Point lo(static_cast<std::size_t>(dim), -w), hi(static_cast<std::size_t>(dim), w);
    ConvexDomain G = ConvexDomain::whole_space(lo, hi);

    BallUnion S(dim);
    std::vector<long> k(static_cast<std::size_t>(dim), -box_half_width);
    for (;;) {
        long shell = 0;
        Point c(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            shell = std::max(shell, std::labs(k[static_cast<std::size_t>(i)]));
            c[static_cast<std::size_t>(i)] = static_cast<double>(k[static_cast<std::size_t>(i)]);
        }
        const double r = shell_radii.size() == 1 ? shell_radii[0]
                                                 : shell_radii[static_cast<std::size_t>(shell)];
        S.add(std::move(c), r);
        int axis = dim - 1;
        while (axis >= 0) {
            if (++k[static_cast<std::size_t>(axis)] <= box_half_width) break;
            k[static_cast<std::size_t>(axis)] = -box_half_width;
            --axis;
        }
        if (axis < 0) break;
    }
    return {std::move(G), std::move(S)};
}

} // namespace ucp
