#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ucp/vecmath.hpp"

namespace ucp {

// Halfspace { x : normal . x <= offset }, normal is unit length.
struct Halfspace {
    Point normal;
    double offset = 0.0;
};

enum class DomainKind { box, ball, halfspaces, whole_space };

// Host region G. Four kinds: axis box, ball, intersection of halfspaces
// (with a stored interior witness point), and whole space paired with a
// mandatory truncation box. Membership is closed-set: boundary points
// belong. Optional halfspace clips intersect any kind, which is how shapes
// like a half-ball are expressed.
class ConvexDomain {
  public:
    static ConvexDomain box(Point lo, Point hi);
    static ConvexDomain ball(Point center, double radius);
    static ConvexDomain halfspaces(std::vector<Halfspace> planes, Point interior_point);
    static ConvexDomain whole_space(Point trunc_lo, Point trunc_hi);

    DomainKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_whole_space() const { return kind_ == DomainKind::whole_space; }
    bool is_bounded() const { return kind_ != DomainKind::whole_space; }

    void add_clip(Halfspace h);
    const std::vector<Halfspace>& clips() const { return clips_; }

    // Closed membership with an optional slack: contains(x, eps) is the
    // membership test for the eps-enlarged set (eps >= 0, used by grid
    // classification for float robustness).
    bool contains(std::span<const double> x, double eps = 0.0) const;

    // min over boundary constraints of the signed distance to the
    // constraint (positive inside). whole_space returns +inf (the
    // truncation box is not a boundary of G).
    double boundary_margin(std::span<const double> x) const;

    // Axis box that contains G (the truncation box for whole_space).
    // Used for grids and sampling.
    void sampling_box(Point& lo, Point& hi) const;

    // Accessors for serialization.
    const Point& lo() const { return lo_; }
    const Point& hi() const { return hi_; }
    const Point& center() const { return center_; }
    double radius() const { return radius_; }
    const std::vector<Halfspace>& planes() const { return planes_; }
    const Point& interior_point() const { return interior_; }

  private:
    ConvexDomain() = default;
    DomainKind kind_ = DomainKind::box;
    int dim_ = 0;
    Point lo_, hi_;       // box / truncation box
    Point center_;        // ball
    double radius_ = 0.0; // ball
    std::vector<Halfspace> planes_;
    Point interior_;
    std::vector<Halfspace> clips_;
};

// Finite union of closed balls; the obstacle set S and its fattening B.
struct BallUnion {
    std::vector<Point> centers;
    std::vector<double> radii;
    int dim = 3;

    BallUnion() = default;
    explicit BallUnion(int d) : dim(d) {}

    std::size_t size() const { return centers.size(); }
    bool empty() const { return centers.empty(); }
    void add(Point c, double r);
    bool contains(std::span<const double> x, double eps = 0.0) const;
    double min_radius() const;
    // Same centers, radii enlarged by rho.
    BallUnion fattened(double rho) const;
};

struct DensenessCertificate {
    double R = 0.0;
    double delta = 0.0;
    bool verified = false;
    double sample_spacing = 0.0;
    Point worst_point;  // sampled x with the largest failure margin
    double margin = 0.0; // max_x min_y (|x-y| + delta) - R; verified iff <= 0
};

// Maximal R-separated subset of obstacle centers, built greedily.
struct Skeleton {
    std::vector<Point> points;
    double separation = 0.0;   // pairwise distance >= separation
    double cover_radius = 0.0; // every candidate within this of some point (= 3R)
    int source_count = 0;      // number of input candidates
    // Indices of candidates that were not accepted (for maximality checks).
    std::vector<std::size_t> rejected;
};

// Union of closed lattice cells ell*k + [0,ell]^d over a finite index set.
struct CellUnion {
    std::vector<std::vector<long>> cells;
    double ell = 0.0;
    int dim = 3;

    bool contains(std::span<const double> x, double eps = 0.0) const;
    void bounding_box(Point& lo, Point& hi) const;
    // True iff the index set fills its integer bounding box completely, in
    // which case the region is exactly an axis box.
    bool is_full_box() const;
    ConvexDomain to_domain() const; // requires is_full_box()
};

struct BallPool {
    CellUnion region;
    BallUnion obstacles;
    double covering_radius = 0.0; // sqrt(d) * ell
    double thickness = 0.0;       // rho
};

struct InradiusResult {
    double radius = 0.0;
    Point center;
};

// Certifies that B is (R,delta)-relatively dense in G on a finite sample
// grid: every sampled x in G must admit a ball B_delta(y) of B with
// |x - y| + delta <= R. spacing must be <= delta/2 so the sampled check is a
// sufficient condition at grid resolution.
DensenessCertificate check_relative_denseness(const BallUnion& B, const ConvexDomain& G,
                                              double R, double delta, double sample_spacing);

// Greedy maximal R-separated subset in input order.
Skeleton build_skeleton(const std::vector<Point>& candidates, double R);

// Nearest skeleton point, ties to the smallest index.
std::size_t voronoi_assign(const Skeleton& skel, std::span<const double> x);

// Exact for boxes and balls; multiscale concave maximization of the
// boundary margin otherwise. whole_space yields +inf.
InradiusResult inradius_estimate(const ConvexDomain& G, double tol = 1e-6);

// One ball of radius rho per cell, placed at cell origin + offset; offsets
// must keep each closed ball strictly inside its open cell.
BallPool make_ball_pool(const std::vector<std::vector<long>>& gamma, double ell, double rho,
                        const std::vector<Point>& offsets);

// Perforated whole space: balls on the integer lattice inside
// [-w, w]^d, with per-shell radii indexed by the sup-norm shell |k|_inf
// (a single entry means one constant radius). All radii must lie in (0, 1/2).
std::pair<ConvexDomain, BallUnion> make_appendix_example(const std::vector<double>& shell_radii,
                                                         long box_half_width, int dim = 3);

// Dyadic radius profile r_s = r0 * 2^-s for shells s = 0..w.
std::vector<double> dyadic_shell_radii(double r0, long box_half_width);

} // namespace ucp
