#include "thermaval/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "thermaval/errors.hpp"

namespace thermaval::geometry {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAlignTol = 1e-9;
// Aspect-ratio floor; keeps the log arguments representable for extreme
// slivers without affecting any realistic geometry.
constexpr double kRatioFloor = 1e-140;

}  // namespace

Vec3 Vec3::normalized() const {
    double n = norm();
    if (n <= 0.0) throw InvalidGeometryError("cannot normalize zero vector");
    return {x / n, y / n, z / n};
}

Vec3 Rect3::corner(int i) const {
    switch (i & 3) {
        case 0: return origin;
        case 1: return origin + edge_u;
        case 2: return origin + edge_u + edge_v;
        default: return origin + edge_v;
    }
}

void Rect3::validate() const {
    double lu = edge_u.norm(), lv = edge_v.norm();
    if (!(lu > 0.0) || !(lv > 0.0))
        throw InvalidGeometryError("rectangle has a zero-length edge");
    if (std::abs(edge_u.dot(edge_v)) > kAlignTol * lu * lv)
        throw InvalidGeometryError("rectangle edges are not orthogonal");
}

void ShadeAssembly::validate() const {
    window.validate();
    auto check = [](const std::optional<ShadeElement>& e, const char* name) {
        if (!e) return;
        if (e->depth < 0.0)
            throw InvalidGeometryError(std::string(name) + ": negative depth");
        if (e->offset < 0.0)
            throw InvalidGeometryError(std::string(name) + ": negative offset");
        if (std::isfinite(e->extent) && !(e->extent > 0.0))
            throw InvalidGeometryError(std::string(name) +
                                       ": finite extent must be positive");
    };
    check(top_flap, "top_flap");
    check(left_fin, "left_fin");
    check(right_fin, "right_fin");
    check(low_wall, "low_wall");
}

double vf_perp_common_edge(double h, double w, double l) {
    if (!(h > 0.0) || !(w > 0.0) || !(l > 0.0))
        throw InvalidGeometryError("vf_perp_common_edge: dimensions must be positive");

    const double H = std::max(h / l, kRatioFloor);
    const double W = std::max(w / l, kRatioFloor);
    const double H2 = H * H, W2 = W * W;
    const double S2 = H2 + W2;
    const double S = std::sqrt(S2);

    const double T = W * std::atan(1.0 / W) + H * std::atan(1.0 / H)
                   - S * std::atan(1.0 / S);
    // Log terms rearranged so each argument is an exact ratio; the naive
    // product form loses all precision once H/W differ by a few orders.
    const double lnA = std::log1p(W2 * H2 / (1.0 + S2));
    const double lnB = std::log(W2 * (1.0 + S2) / ((1.0 + W2) * S2));
    const double lnC = std::log(H2 * (1.0 + S2) / ((1.0 + H2) * S2));
    const double Q = 0.25 * (lnA + W2 * lnB + H2 * lnC);

    double f = (T + Q) / (kPi * W);
    return std::clamp(f, 0.0, 0.5);
}

namespace {

// A*F between perpendicular rectangles sharing lateral span [0,t] at the
// plane-intersection line, emitter depth a, receiver depth b.
double corner_af(double t, double a, double b) {
    if (t <= 0.0 || a <= 0.0 || b <= 0.0) return 0.0;
    return t * a * vf_perp_common_edge(b, a, t);
}

struct LineFrame {
    Vec3 p0;   // point on the intersection line
    Vec3 dir;  // unit direction of the line
};

struct RectCoords {
    double lat_lo, lat_hi;    // span along the line
    double depth_lo, depth_hi;  // distance from the line, >= 0
};

RectCoords project_to_line(const Rect3& r, const LineFrame& lf, const Vec3& depth_dir) {
    double lat_lo = 0, lat_hi = 0, dep_lo = 0, dep_hi = 0;
    for (int i = 0; i < 4; ++i) {
        Vec3 rel = r.corner(i) - lf.p0;
        double lat = rel.dot(lf.dir);
        double dep = rel.dot(depth_dir);
        if (i == 0) {
            lat_lo = lat_hi = lat;
            dep_lo = dep_hi = dep;
        } else {
            lat_lo = std::min(lat_lo, lat);
            lat_hi = std::max(lat_hi, lat);
            dep_lo = std::min(dep_lo, dep);
            dep_hi = std::max(dep_hi, dep);
        }
    }
    double span = std::max(std::abs(dep_lo), std::abs(dep_hi));
    double tol = kAlignTol * std::max(1.0, span);
    if (dep_lo < -tol && dep_hi > tol)
        throw InvalidGeometryError("rectangle crosses the plane intersection line");
    if (dep_hi < tol) {  // entirely on the negative side: flip
        std::swap(dep_lo, dep_hi);
        dep_lo = -dep_lo;
        dep_hi = -dep_hi;
    }
    dep_lo = std::max(dep_lo, 0.0);
    return {lat_lo, lat_hi, dep_lo, dep_hi};
}

void require_axis_aligned(const Rect3& r, const Vec3& line_dir) {
    auto aligned = [&](const Vec3& e) {
        double n = e.norm();
        double d = std::abs(e.dot(line_dir));
        return d > (1.0 - 1e-9) * n || d < kAlignTol * n;
    };
    if (!aligned(r.edge_u) || !aligned(r.edge_v))
        throw UnsupportedConfigurationError(
            "rectangle is not axis-aligned to the plane intersection line");
}

}  // namespace

ViewFactor vf_perp_offset(const Rect3& emitter, const Rect3& receiver) {
    emitter.validate();
    receiver.validate();

    Vec3 ne = emitter.normal();
    Vec3 nr = receiver.normal();
    if (std::abs(ne.dot(nr)) > kAlignTol)
        throw UnsupportedConfigurationError(
            "vf_perp_offset: rectangle planes are not perpendicular");

    LineFrame lf;
    lf.dir = ne.cross(nr).normalized();
    // p0 satisfies p0.ne = emitter plane offset and p0.nr = receiver plane offset.
    lf.p0 = ne * emitter.origin.dot(ne) + nr * receiver.origin.dot(nr);

    require_axis_aligned(emitter, lf.dir);
    require_axis_aligned(receiver, lf.dir);

    // In-plane depth directions: nr lies in the emitter plane and vice versa.
    RectCoords e = project_to_line(emitter, lf, nr);
    RectCoords r = project_to_line(receiver, lf, ne);

    const double c1 = e.lat_lo, c2 = e.lat_hi;
    const double d1 = r.lat_lo, d2 = r.lat_hi;

    // Lateral decomposition: the kernel is even in the along-line separation,
    // so the double integral over [c1,c2]x[d1,d2] reduces to four aligned
    // corner terms.
    auto lat_af = [&](double a, double b) {
        return 0.5 * (corner_af(std::abs(c2 - d1), a, b)
                    + corner_af(std::abs(c1 - d2), a, b)
                    - corner_af(std::abs(c1 - d1), a, b)
                    - corner_af(std::abs(c2 - d2), a, b));
    };
    // Depth decomposition by inclusion-exclusion over enclosing composites.
    double af = lat_af(e.depth_hi, r.depth_hi)
              - lat_af(e.depth_lo, r.depth_hi)
              - lat_af(e.depth_hi, r.depth_lo)
              + lat_af(e.depth_lo, r.depth_lo);

    double from_area = emitter.area();
    double value = std::clamp(af / from_area, 0.0, 1.0);
    return {value, from_area, receiver.area()};
}

namespace {

// splitmix64; per-ray counter-based stream so the estimate does not depend
// on thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline double to_unit_double(std::uint64_t v) {
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

struct RayHitTester {
    Vec3 origin, eu, ev, n;
    double inv_uu, inv_vv;

    explicit RayHitTester(const Rect3& r)
        : origin(r.origin), eu(r.edge_u), ev(r.edge_v), n(r.normal()),
          inv_uu(1.0 / r.edge_u.dot(r.edge_u)), inv_vv(1.0 / r.edge_v.dot(r.edge_v)) {}

    bool hit(const Vec3& p, const Vec3& d) const {
        double denom = d.dot(n);
        if (std::abs(denom) < 1e-15) return false;
        double t = (origin - p).dot(n) / denom;
        if (t <= 1e-12) return false;
        Vec3 q = p + d * t - origin;
        double a = q.dot(eu) * inv_uu;
        double b = q.dot(ev) * inv_vv;
        return a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0;
    }
};

template <bool Parallel>
McEstimate mc_view_factor_impl(const Rect3& emitter, const Rect3& receiver,
                               std::uint64_t n_rays, std::uint64_t seed) {
    emitter.validate();
    receiver.validate();
    if (n_rays < 10000)
        throw ParameterError("mc_view_factor: need at least 1e4 rays");

    const Vec3 eo = emitter.origin, eu = emitter.edge_u, ev = emitter.edge_v;
    const Vec3 n = emitter.normal();
    const Vec3 tu = emitter.edge_u.normalized();
    const Vec3 tv = n.cross(tu);
    const RayHitTester tester(receiver);
    const std::uint64_t base = splitmix64(seed);

    std::int64_t total = static_cast<std::int64_t>(n_rays);
    std::int64_t hits = 0;

#pragma omp parallel for reduction(+ : hits) schedule(static) if (Parallel)
    for (std::int64_t i = 0; i < total; ++i) {
        std::uint64_t s = base + static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull;
        double r1 = to_unit_double(splitmix64(s));
        double r2 = to_unit_double(splitmix64(s ^ 0xA5A5A5A5A5A5A5A5ull));
        double r3 = to_unit_double(splitmix64(s ^ 0x5A5A5A5A5A5A5A5Aull));
        double r4 = to_unit_double(splitmix64(s ^ 0x3C3C3C3C3C3C3C3Cull));

        Vec3 p = eo + eu * r1 + ev * r2;
        // cosine-weighted hemisphere about the front normal
        double ct = std::sqrt(r3);
        double st = std::sqrt(1.0 - r3);
        double phi = 2.0 * kPi * r4;
        Vec3 d = tu * (st * std::cos(phi)) + tv * (st * std::sin(phi)) + n * ct;

        if (tester.hit(p, d)) ++hits;
    }

    McEstimate est;
    est.hits = static_cast<std::uint64_t>(hits);
    est.n_rays = n_rays;
    est.value = static_cast<double>(hits) / static_cast<double>(n_rays);
    est.std_error = std::sqrt(std::max(est.value * (1.0 - est.value), 1e-300) /
                              static_cast<double>(n_rays));
    return est;
}

}  // namespace

McEstimate mc_view_factor(const Rect3& emitter, const Rect3& receiver,
                          std::uint64_t n_rays, std::uint64_t seed) {
    return mc_view_factor_impl<true>(emitter, receiver, n_rays, seed);
}

McEstimate mc_view_factor_serial(const Rect3& emitter, const Rect3& receiver,
                                 std::uint64_t n_rays, std::uint64_t seed) {
    return mc_view_factor_impl<false>(emitter, receiver, n_rays, seed);
}

namespace {

enum class ElementSide { Top, Left, Right, Bottom };

struct WindowFrame {
    Vec3 o, u, v, n;  // origin, unit lateral, unit up, unit outward normal
    double width, height;
};

WindowFrame window_frame(const Rect3& w) {
    WindowFrame f;
    f.o = w.origin;
    f.width = w.edge_u.norm();
    f.height = w.edge_v.norm();
    f.u = w.edge_u * (1.0 / f.width);
    f.v = w.edge_v * (1.0 / f.height);
    f.n = f.u.cross(f.v);
    return f;
}

// Element rectangle for a concrete (finite) extent. The element plane sits at
// the offset gap beyond the window edge; depth runs outward along the normal.
Rect3 element_rect(const WindowFrame& f, ElementSide side, const ShadeElement& e,
                   double extent) {
    double cx = f.width / 2.0, cy = f.height / 2.0;
    Rect3 r;
    switch (side) {
        case ElementSide::Top:
            r.origin = f.o + f.v * (f.height + e.offset) + f.u * (cx - extent / 2.0);
            r.edge_u = f.u * extent;
            r.edge_v = f.n * e.depth;
            break;
        case ElementSide::Bottom:
            r.origin = f.o - f.v * e.offset + f.u * (cx - extent / 2.0);
            r.edge_u = f.u * extent;
            r.edge_v = f.n * e.depth;
            break;
        case ElementSide::Left:
            r.origin = f.o - f.u * e.offset + f.v * (cy - extent / 2.0);
            r.edge_u = f.v * extent;
            r.edge_v = f.n * e.depth;
            break;
        case ElementSide::Right:
            r.origin = f.o + f.u * (f.width + e.offset) + f.v * (cy - extent / 2.0);
            r.edge_u = f.v * extent;
            r.edge_v = f.n * e.depth;
            break;
    }
    return r;
}

struct ElementFactor {
    double factor;
    double extent_used;
};

// Window->element view factor; infinite extents widened until a doubling
// changes the factor by < 1e-6.
ElementFactor element_view_factor(const WindowFrame& f, const Rect3& window,
                                  ElementSide side, const ShadeElement& e) {
    if (e.depth <= 0.0) return {0.0, std::isfinite(e.extent) ? e.extent : 0.0};
    if (std::isfinite(e.extent)) {
        Rect3 r = element_rect(f, side, e, e.extent);
        return {vf_perp_offset(window, r).value, e.extent};
    }
    double scale = std::max({f.width, f.height, e.depth, e.offset, 1.0});
    double ext = 64.0 * scale;
    double prev = vf_perp_offset(window, element_rect(f, side, e, ext)).value;
    for (int i = 0; i < 60; ++i) {
        ext *= 2.0;
        double cur = vf_perp_offset(window, element_rect(f, side, e, ext)).value;
        if (std::abs(cur - prev) < 1e-6) return {cur, ext};
        prev = cur;
    }
    return {prev, ext};
}

struct NamedElement {
    ElementSide side;
    const ShadeElement* element;
};

std::vector<NamedElement> present_elements(const ShadeAssembly& s) {
    std::vector<NamedElement> out;
    if (s.top_flap) out.push_back({ElementSide::Top, &*s.top_flap});
    if (s.left_fin) out.push_back({ElementSide::Left, &*s.left_fin});
    if (s.right_fin) out.push_back({ElementSide::Right, &*s.right_fin});
    if (s.low_wall) out.push_back({ElementSide::Bottom, &*s.low_wall});
    return out;
}

}  // namespace

std::vector<double> per_element_view_factors(const ShadeAssembly& shade) {
    shade.validate();
    WindowFrame f = window_frame(shade.window);
    std::vector<double> out;
    for (const auto& ne : present_elements(shade))
        out.push_back(element_view_factor(f, shade.window, ne.side, *ne.element).factor);
    return out;
}

double diffuse_blocked_fraction(const ShadeAssembly& shade) {
    double sum = 0.0;
    for (double v : per_element_view_factors(shade)) sum += v;
    // Pairwise factors ignore element-to-element occlusion, so very deep
    // crates can sum past 1; saturate there.
    return std::min(sum, 1.0);
}

std::vector<Rect3> shade_element_rects(const ShadeAssembly& shade) {
    shade.validate();
    WindowFrame f = window_frame(shade.window);
    std::vector<Rect3> out;
    for (const auto& ne : present_elements(shade)) {
        double ext = ne.element->extent;
        if (!std::isfinite(ext))
            ext = element_view_factor(f, shade.window, ne.side, *ne.element).extent_used;
        if (ne.element->depth <= 0.0 || ext <= 0.0) continue;
        out.push_back(element_rect(f, ne.side, *ne.element, ext));
    }
    return out;
}

namespace {

using Poly = std::vector<std::array<double, 2>>;

double poly_area(const Poly& p) {
    if (p.size() < 3) return 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& p1 = p[i];
        const auto& p2 = p[(i + 1) % p.size()];
        a += p1[0] * p2[1] - p2[0] * p1[1];
    }
    return std::abs(a) / 2.0;
}

// Sutherland-Hodgman clip of a convex polygon by the half-plane
// a*x + b*y <= c.
Poly clip_halfplane(const Poly& poly, double a, double b, double c) {
    Poly out;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cur = poly[i];
        const auto& nxt = poly[(i + 1) % n];
        double dc = a * cur[0] + b * cur[1] - c;
        double dn = a * nxt[0] + b * nxt[1] - c;
        if (dc <= 0.0) out.push_back(cur);
        if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
            double t = dc / (dc - dn);
            out.push_back({cur[0] + t * (nxt[0] - cur[0]),
                           cur[1] + t * (nxt[1] - cur[1])});
        }
    }
    return out;
}

Poly clip_convex(const Poly& subject, const Poly& clip) {
    // clip must be convex and counterclockwise
    Poly out = subject;
    std::size_t n = clip.size();
    for (std::size_t i = 0; i < n && !out.empty(); ++i) {
        const auto& p1 = clip[i];
        const auto& p2 = clip[(i + 1) % n];
        // inside = left of p1->p2
        double a = p2[1] - p1[1];
        double b = -(p2[0] - p1[0]);
        double c = a * p1[0] + b * p1[1];
        out = clip_halfplane(out, a, b, c);
    }
    return out;
}

Poly make_ccw(Poly p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& p1 = p[i];
        const auto& p2 = p[(i + 1) % p.size()];
        a += p1[0] * p2[1] - p2[0] * p1[1];
    }
    if (a < 0.0) std::reverse(p.begin(), p.end());
    return p;
}

}  // namespace

double sunlit_fraction(const ShadeAssembly& shade, const Vec3& sun_dir) {
    shade.validate();
    WindowFrame f = window_frame(shade.window);

    double sw = sun_dir.dot(f.n);
    if (sw <= 0.0) return 0.0;  // sun at or behind the window plane
    double su = sun_dir.dot(f.u);
    double sv = sun_dir.dot(f.v);
    // Shadow displacement per unit depth; clamped so grazing sun stays finite.
    double gu = std::clamp(su / sw, -1e9, 1e9);
    double gv = std::clamp(sv / sw, -1e9, 1e9);

    auto project = [&](const Vec3& p) -> std::array<double, 2> {
        Vec3 rel = p - f.o;
        double x = rel.dot(f.u), y = rel.dot(f.v), depth = rel.dot(f.n);
        return {x - depth * gu, y - depth * gv};
    };

    Poly window = {{0, 0}, {f.width, 0}, {f.width, f.height}, {0, f.height}};

    std::vector<Poly> shadows;
    for (const auto& ne : present_elements(shade)) {
        const ShadeElement& e = *ne.element;
        if (e.depth <= 0.0) continue;
        double ext = e.extent;
        if (!std::isfinite(ext)) {
            // Wide enough that the extra length can only shadow outside the
            // window: window span plus the largest possible shadow shift.
            double reach = (std::abs(gu) + std::abs(gv)) * e.depth;
            ext = 4.0 * (f.width + f.height + e.offset + reach + 1.0);
        }
        Rect3 r = element_rect(f, ne.side, e, ext);
        Poly shadow;
        for (int i = 0; i < 4; ++i) shadow.push_back(project(r.corner(i)));
        shadow = make_ccw(shadow);
        Poly clipped = clip_convex(shadow, window);
        if (poly_area(clipped) > 0.0) shadows.push_back(make_ccw(clipped));
    }

    // Exact union area of up to four convex shadow polygons by
    // inclusion-exclusion; every intersection of convex sets stays convex.
    double union_area = 0.0;
    std::size_t m = shadows.size();
    for (std::size_t mask = 1; mask < (1u << m); ++mask) {
        Poly inter;
        bool first = true;
        for (std::size_t j = 0; j < m; ++j) {
            if (!(mask & (1u << j))) continue;
            if (first) {
                inter = shadows[j];
                first = false;
            } else {
                inter = clip_convex(inter, shadows[j]);
            }
            if (inter.empty()) break;
        }
        double a = poly_area(inter);
        union_area += (std::popcount(mask) % 2 == 1) ? a : -a;
    }

    double total = f.width * f.height;
    return std::clamp(1.0 - union_area / total, 0.0, 1.0);
}

}  // namespace thermaval::geometry
