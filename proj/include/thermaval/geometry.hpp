#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace thermaval::geometry {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const;
};

/// Planar rectangle spanned by two orthogonal edge vectors.
/// Front face normal is edge_u x edge_v.
struct Rect3 {
    Vec3 origin;
    Vec3 edge_u;
    Vec3 edge_v;

    double area() const { return edge_u.cross(edge_v).norm(); }
    Vec3 normal() const { return edge_u.cross(edge_v).normalized(); }
    Vec3 corner(int i) const;  // 0..3, counterclockwise from origin

    /// Throws InvalidGeometryError if edges are degenerate or not orthogonal.
    void validate() const;
};

inline constexpr double kInfiniteExtent = std::numeric_limits<double>::infinity();

/// One egg-crate element: a rectangle perpendicular to the window plane.
/// `extent` runs along the window plane (lateral for flaps/low walls,
/// vertical for fins) and may be kInfiniteExtent; `offset` is the gap
/// between the window edge and the element's plane.
struct ShadeElement {
    double depth = 0;
    double extent = kInfiniteExtent;
    double offset = 0;
};

/// Window rectangle plus the optional elements boxing it in.
/// Window frame convention: edge_u = lateral (width), edge_v = up (height),
/// front normal faces the exterior, i.e. toward the shade.
struct ShadeAssembly {
    Rect3 window;
    std::optional<ShadeElement> top_flap;
    std::optional<ShadeElement> left_fin;
    std::optional<ShadeElement> right_fin;
    std::optional<ShadeElement> low_wall;

    void validate() const;
};

struct ViewFactor {
    double value = 0;
    double from_area = 0;
    double to_area = 0;
};

/// View factor between two perpendicular rectangles sharing an edge of
/// length l, from the rectangle of depth w to the rectangle of depth h.
/// Result lies in [0, 0.5).
double vf_perp_common_edge(double h, double w, double l);

/// View factor between perpendicular rectangles, each axis-aligned to the
/// intersection line of the two planes, with arbitrary offsets along and
/// away from that line. Built from common-edge factors by inclusion-exclusion.
ViewFactor vf_perp_offset(const Rect3& emitter, const Rect3& receiver);

struct McEstimate {
    double value = 0;
    double std_error = 0;
    std::uint64_t hits = 0;
    std::uint64_t n_rays = 0;
};

/// Monte Carlo view factor: cosine-weighted rays from the emitter front face,
/// counting crossings of the receiver rectangle (either face). Deterministic
/// for a fixed seed and independent of thread count.
McEstimate mc_view_factor(const Rect3& emitter, const Rect3& receiver,
                          std::uint64_t n_rays, std::uint64_t seed);

/// Serial reference of mc_view_factor; bit-identical to the parallel kernel.
McEstimate mc_view_factor_serial(const Rect3& emitter, const Rect3& receiver,
                                 std::uint64_t n_rays, std::uint64_t seed);

/// Concrete rectangles for the assembly's present elements, in window order
/// top flap, left fin, right fin, low wall. Infinite extents are replaced by
/// the converged finite span used by diffuse_blocked_fraction.
std::vector<Rect3> shade_element_rects(const ShadeAssembly& shade);

/// Fraction of incident diffuse radiation blocked by the assembly: the sum of
/// window->element view factors, evaluated per element and capped at 1.
/// Infinite extents are widened until a doubling changes the factor by < 1e-6.
double diffuse_blocked_fraction(const ShadeAssembly& shade);

/// Per-element view factors behind diffuse_blocked_fraction, same order as
/// shade_element_rects.
std::vector<double> per_element_view_factors(const ShadeAssembly& shade);

/// Fraction of window area reached by the direct beam for sun direction
/// `sun_dir` (unit vector window -> sun). Exact shadow-polygon union, no
/// sampling. Returns 0 when the sun is at or behind the window plane.
double sunlit_fraction(const ShadeAssembly& shade, const Vec3& sun_dir);

}  // namespace thermaval::geometry
