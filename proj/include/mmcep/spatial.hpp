/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmcep/error.hpp"

/// Spatial half of the event calculus. All geometry lives in the image plane:
/// x grows rightward, y grows downward, units are pixels.
namespace mmcep::spatial {

struct Point {
    double x = 0;
    double y = 0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct LineSegment {
    Point a;
    Point b;

    LineSegment() = default;
    LineSegment(Point from, Point to) : a(from), b(to) {
        if (a == b) fail(ErrorCode::DegenerateGeometry, "line segment endpoints coincide");
    }

    friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

/// Axis-aligned box, top-left corner plus extent.
struct Rect {
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;

    double left() const noexcept { return x; }
    double right() const noexcept { return x + w; }
    double top() const noexcept { return y; }
    double bottom() const noexcept { return y + h; }
    double area() const noexcept { return w * h; }
    bool valid() const noexcept {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
               w >= 0 && h >= 0;
    }
    bool has_area() const noexcept { return valid() && w > 0 && h > 0; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

using Geometry = std::variant<Point, LineSegment, Rect>;

// ---------------------------------------------------------------------------
// DE-9IM

/// Dimension of a point set; Empty is the "F" entry of a DE-9IM matrix.
enum class Dim : std::int8_t { Empty = -1, Zero = 0, One = 1, Two = 2 };

enum Part : std::size_t { Interior = 0, Boundary = 1, Exterior = 2 };

struct DE9IMMatrix {
    std::array<std::array<Dim, 3>, 3> cells{{{Dim::Empty, Dim::Empty, Dim::Empty},
                                             {Dim::Empty, Dim::Empty, Dim::Empty},
                                             {Dim::Empty, Dim::Empty, Dim::Empty}}};

    Dim at(Part a, Part b) const noexcept { return cells[a][b]; }
    bool meets(Part a, Part b) const noexcept { return cells[a][b] != Dim::Empty; }

    DE9IMMatrix transposed() const noexcept {
        DE9IMMatrix t;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) t.cells[j][i] = cells[i][j];
        return t;
    }

    /// Row-major nine-character form, e.g. "212101212".
    std::string to_string() const {
        std::string s;
        s.reserve(9);
        for (const auto& row : cells)
            for (Dim d : row) s.push_back(d == Dim::Empty ? 'F' : static_cast<char>('0' + static_cast<int>(d)));
        return s;
    }

    friend bool operator==(const DE9IMMatrix&, const DE9IMMatrix&) = default;
};

namespace detail {

inline void raise(Dim& cell, Dim d) noexcept {
    if (static_cast<int>(d) > static_cast<int>(cell)) cell = d;
}

enum class Side { Inside, OnEdge, Outside };

inline Side classify_1d(double v, double lo, double hi) noexcept {
    if (v > lo && v < hi) return Side::Inside;
    if (v == lo || v == hi) return Side::OnEdge;
    return Side::Outside;
}

/// Location of a point with respect to a closed axis-aligned box. A box of
/// zero width or height is a segment (its ends are the boundary), and one of
/// zero extent is a point (all interior).
inline Part locate(Point p, const Rect& r) noexcept {
    const Side sx = classify_1d(p.x, r.left(), r.right());
    const Side sy = classify_1d(p.y, r.top(), r.bottom());
    if (sx == Side::Outside || sy == Side::Outside) return Exterior;
    if (r.w > 0 && r.h > 0) return sx == Side::Inside && sy == Side::Inside ? Interior : Boundary;
    if (r.w == 0 && r.h == 0) return Interior;
    if (r.h == 0) return sx == Side::Inside ? Interior : Boundary;
    return sy == Side::Inside ? Interior : Boundary;
}

/// Elementary 1-D pieces induced by sorted breakpoints: rays, open gaps
/// (dimension 1) and the breakpoints themselves (dimension 0). Each piece is
/// represented by one sample coordinate.
struct Piece {
    double sample;
    int dim;
};

inline std::vector<Piece> pieces(std::vector<double> cuts) {
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Piece> out;
    out.reserve(cuts.size() * 2 + 1);
    out.push_back({cuts.front() - 1.0, 1});
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        out.push_back({cuts[i], 0});
        if (i + 1 < cuts.size()) out.push_back({cuts[i] + (cuts[i + 1] - cuts[i]) / 2.0, 1});
    }
    out.push_back({cuts.back() + 1.0, 1});
    return out;
}

/// Two axis-aligned boxes of any dimension. The plane is cut along every box
/// edge into cells (products of 1-D pieces); each cell lies wholly in one part
/// of each box, so the matrix is the max cell dimension per (part, part) pair.
inline DE9IMMatrix rect_rect(const Rect& a, const Rect& b) {
    DE9IMMatrix m;
    const auto xs = pieces({a.left(), a.right(), b.left(), b.right()});
    const auto ys = pieces({a.top(), a.bottom(), b.top(), b.bottom()});
    for (const Piece& px : xs) {
        for (const Piece& py : ys) {
            const Point p{px.sample, py.sample};
            raise(m.cells[locate(p, a)][locate(p, b)], static_cast<Dim>(px.dim + py.dim));
        }
    }
    return m;
}

inline DE9IMMatrix point_rect(Point p, const Rect& r) {
    DE9IMMatrix m;
    m.cells[Interior][locate(p, r)] = Dim::Zero;
    m.cells[Exterior][Interior] = Dim::Two;
    m.cells[Exterior][Boundary] = Dim::One;
    m.cells[Exterior][Exterior] = Dim::Two;
    return m;
}

/// The segment's parameter range [0,1] is cut where it crosses any rect edge
/// line; between cuts the location relative to the rect is constant.
inline DE9IMMatrix segment_rect(const LineSegment& s, const Rect& r) {
    DE9IMMatrix m;
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    std::vector<double> cuts{0.0, 1.0};
    auto add_cut = [&](double origin, double delta, double line) {
        if (delta == 0) return;
        const double t = (line - origin) / delta;
        if (t > 0 && t < 1) cuts.push_back(t);
    };
    add_cut(s.a.x, dx, r.left());
    add_cut(s.a.x, dx, r.right());
    add_cut(s.a.y, dy, r.top());
    add_cut(s.a.y, dy, r.bottom());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto at = [&](double t) -> Point {
        if (t == 0) return s.a;
        if (t == 1) return s.b;
        return {s.a.x + t * dx, s.a.y + t * dy};
    };
    auto snap = [&](Point p) {
        // Parametric evaluation can miss an edge line by one ulp.
        for (double line : {r.left(), r.right()})
            if (std::abs(p.x - line) <= 1e-9 * std::max(1.0, std::abs(line))) p.x = line;
        for (double line : {r.top(), r.bottom()})
            if (std::abs(p.y - line) <= 1e-9 * std::max(1.0, std::abs(line))) p.y = line;
        return p;
    };
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const Part own = (i == 0 || i + 1 == cuts.size()) ? Boundary : Interior;
        raise(m.cells[own][locate(snap(at(cuts[i])), r)], Dim::Zero);
        if (i + 1 < cuts.size()) {
            const double mid = cuts[i] + (cuts[i + 1] - cuts[i]) / 2.0;
            raise(m.cells[Interior][locate(at(mid), r)], Dim::One);
        }
    }
    m.cells[Exterior][Interior] = Dim::Two;
    m.cells[Exterior][Boundary] = Dim::One;  // a straight segment never covers the whole perimeter
    m.cells[Exterior][Exterior] = Dim::Two;
    return m;
}

/// Zero-extent rects are really points or segments; DE-9IM uses the
/// geometry's own (relative) interior, so they are rewritten first.
inline Geometry normalize(const Geometry& g) {
    if (const auto* r = std::get_if<Rect>(&g)) {
        if (!r->valid()) fail(ErrorCode::BadGeometry, "rect with negative or non-finite extent");
        if (r->w == 0 && r->h == 0) return Point{r->x, r->y};
        if (r->w == 0 || r->h == 0) return LineSegment{{r->x, r->y}, {r->right(), r->bottom()}};
    }
    if (const auto* p = std::get_if<Point>(&g)) {
        if (!std::isfinite(p->x) || !std::isfinite(p->y)) fail(ErrorCode::BadGeometry, "non-finite point");
    }
    return g;
}

/// Points, axis-parallel segments and rects as closed boxes.
inline std::optional<Rect> as_box(const Geometry& g) noexcept {
    if (const auto* r = std::get_if<Rect>(&g)) return *r;
    if (const auto* p = std::get_if<Point>(&g)) return Rect{p->x, p->y, 0, 0};
    const auto& s = std::get<LineSegment>(g);
    if (s.a.x != s.b.x && s.a.y != s.b.y) return std::nullopt;
    return Rect{std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y), std::abs(s.b.x - s.a.x), std::abs(s.b.y - s.a.y)};
}

inline int dimension(const Geometry& g) noexcept {
    return static_cast<int>(g.index());  // Point=0, LineSegment=1, Rect=2
}

}  // namespace detail

/// DE-9IM of (A, B). Any pair of points, axis-parallel segments and rects
/// (zero-extent rects included) is supported, as is a slanted segment
/// against a positive-area rect in either order.
inline DE9IMMatrix de9im(const Geometry& ga, const Geometry& gb) {
    const Geometry a = detail::normalize(ga);
    const Geometry b = detail::normalize(gb);
    const auto box_a = detail::as_box(a);
    const auto box_b = detail::as_box(b);
    if (box_a && box_b) return detail::rect_rect(*box_a, *box_b);
    const auto* ra = std::get_if<Rect>(&a);
    const auto* rb = std::get_if<Rect>(&b);
    if (ra && rb) return detail::rect_rect(*ra, *rb);
    if (rb) {
        if (const auto* p = std::get_if<Point>(&a)) return detail::point_rect(*p, *rb);
        return detail::segment_rect(std::get<LineSegment>(a), *rb);
    }
    if (ra) {
        if (const auto* p = std::get_if<Point>(&b)) return detail::point_rect(*p, *ra).transposed();
        return detail::segment_rect(std::get<LineSegment>(b), *ra).transposed();
    }
    fail(ErrorCode::UnsupportedGeometryPair, "DE-9IM of a slanted segment needs a positive-area rect as the other operand");
}

// ---------------------------------------------------------------------------
// Named topological predicates

enum class TopologicalRelation {
    Disjoint,
    Touch,
    Contains,
    Intersect,
    Within,
    CoveredBy,
    Crosses,
    Overlap,
    Inside,
};

inline constexpr std::array<TopologicalRelation, 9> kTopologicalRelations{
    TopologicalRelation::Disjoint, TopologicalRelation::Touch,     TopologicalRelation::Contains,
    TopologicalRelation::Intersect, TopologicalRelation::Within,   TopologicalRelation::CoveredBy,
    TopologicalRelation::Crosses,  TopologicalRelation::Overlap,   TopologicalRelation::Inside,
};

constexpr std::string_view to_string(TopologicalRelation r) noexcept {
    switch (r) {
        case TopologicalRelation::Disjoint: return "Disjoint";
        case TopologicalRelation::Touch: return "Touch";
        case TopologicalRelation::Contains: return "Contains";
        case TopologicalRelation::Intersect: return "Intersect";
        case TopologicalRelation::Within: return "Within";
        case TopologicalRelation::CoveredBy: return "CoveredBy";
        case TopologicalRelation::Crosses: return "Crosses";
        case TopologicalRelation::Overlap: return "Overlap";
        case TopologicalRelation::Inside: return "Inside";
    }
    return "?";
}

namespace detail {

inline bool disjoint(const DE9IMMatrix& m) noexcept {
    return !m.meets(Interior, Interior) && !m.meets(Interior, Boundary) &&
           !m.meets(Boundary, Interior) && !m.meets(Boundary, Boundary);
}

inline bool within(const DE9IMMatrix& m) noexcept {
    return m.meets(Interior, Interior) && !m.meets(Interior, Exterior) && !m.meets(Boundary, Exterior);
}

inline bool covered_by(const DE9IMMatrix& m) noexcept {
    return !disjoint(m) && !m.meets(Interior, Exterior) && !m.meets(Boundary, Exterior);
}

inline bool inside(const DE9IMMatrix& m) noexcept {
    return within(m) && !m.meets(Interior, Boundary) && !m.meets(Boundary, Boundary);
}

}  // namespace detail

/// Evaluates a named predicate from the DE-9IM matrix of (A, B).
///
/// Inside is the strict form of Within (A stays clear of B's boundary).
/// Within and CoveredBy coincide for positive-area rects and differ only when
/// A is a point or segment lying on B's boundary. Overlap needs operands of
/// equal dimension; Crosses needs a segment against a rect.
inline bool holds_topology(TopologicalRelation rel, const Geometry& ga, const Geometry& gb) {
    const Geometry a = detail::normalize(ga);
    const Geometry b = detail::normalize(gb);
    const DE9IMMatrix m = de9im(a, b);
    switch (rel) {
        case TopologicalRelation::Disjoint: return detail::disjoint(m);
        case TopologicalRelation::Intersect: return !detail::disjoint(m);
        case TopologicalRelation::Touch: return !m.meets(Interior, Interior) && !detail::disjoint(m);
        case TopologicalRelation::Within: return detail::within(m);
        case TopologicalRelation::CoveredBy: return detail::covered_by(m);
        case TopologicalRelation::Inside: return detail::inside(m);
        case TopologicalRelation::Contains: return detail::within(m.transposed());
        case TopologicalRelation::Overlap: {
            const int da = detail::dimension(a);
            if (da != detail::dimension(b))
                fail(ErrorCode::UndefinedPredicate, "Overlap needs geometries of equal dimension");
            return static_cast<int>(m.at(Interior, Interior)) == da && m.meets(Interior, Exterior) &&
                   m.meets(Exterior, Interior);
        }
        case TopologicalRelation::Crosses: {
            if (std::holds_alternative<LineSegment>(a) && std::holds_alternative<Rect>(b))
                return m.meets(Interior, Interior) && m.meets(Interior, Exterior);
            if (std::holds_alternative<Rect>(a) && std::holds_alternative<LineSegment>(b))
                return m.meets(Interior, Interior) && m.meets(Exterior, Interior);
            fail(ErrorCode::UndefinedPredicate, "Crosses is defined only for a segment against a rect");
        }
    }
    return false;
}

/// RCC-8 base relation between two positive-area rects; exactly one holds.
enum class RCC8 { DC, EC, PO, EQ, TPP, NTPP, TPPi, NTPPi };

inline RCC8 rcc8(const Rect& a, const Rect& b) {
    if (!a.has_area() || !b.has_area()) fail(ErrorCode::DegenerateGeometry, "RCC-8 needs positive-area rects");
    const DE9IMMatrix m = detail::rect_rect(a, b);
    if (detail::disjoint(m)) return RCC8::DC;
    if (!m.meets(Interior, Interior)) return RCC8::EC;
    const bool a_in_b = detail::covered_by(m);
    const bool b_in_a = detail::covered_by(m.transposed());
    if (a_in_b && b_in_a) return RCC8::EQ;
    if (a_in_b) return detail::inside(m) ? RCC8::NTPP : RCC8::TPP;
    if (b_in_a) return detail::inside(m.transposed()) ? RCC8::NTPPi : RCC8::TPPi;
    return RCC8::PO;
}

// ---------------------------------------------------------------------------
// Metric helpers

inline Point centroid(const Rect& r) {
    if (!r.has_area()) fail(ErrorCode::DegenerateGeometry, "centroid of a zero-area rect");
    return {r.x + r.w / 2.0, r.y + r.h / 2.0};
}

inline double intersection_area(const Rect& a, const Rect& b) noexcept {
    const double ox = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double oy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    return std::max(0.0, ox) * std::max(0.0, oy);
}

inline double iou(const Rect& a, const Rect& b) noexcept {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// ---------------------------------------------------------------------------
// Direction (FORS)

enum class Direction { Front, Back, Left, Right };

constexpr std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::Front: return "front";
        case Direction::Back: return "back";
        case Direction::Left: return "left";
        case Direction::Right: return "right";
    }
    return "?";
}

/// Unit vector naming "front". Left is the -90 degree side in image
/// coordinates (up, for the default +x axis).
class Axis {
public:
    constexpr Axis() = default;
    Axis(double fx, double fy) {
        const double n = std::hypot(fx, fy);
        if (!(n > 0) || !std::isfinite(n)) fail(ErrorCode::BadGeometry, "axis vector must be non-zero");
        fx_ = fx / n;
        fy_ = fy / n;
        raw_x_ = fx;
        raw_y_ = fy;
    }

    double fx() const noexcept { return fx_; }
    double fy() const noexcept { return fy_; }
    /// The vector as given, before normalisation.
    double raw_x() const noexcept { return raw_x_; }
    double raw_y() const noexcept { return raw_y_; }
    /// The front axis rotated by +90 degrees.
    double px() const noexcept { return -fy_; }
    double py() const noexcept { return fx_; }

    friend bool operator==(const Axis& a, const Axis& b) noexcept { return a.fx_ == b.fx_ && a.fy_ == b.fy_; }

private:
    double fx_ = 1.0;
    double fy_ = 0.0;
    double raw_x_ = 1.0;
    double raw_y_ = 0.0;
};

/// Direction of A relative to B by dominant-axis classification of the
/// centroid offset; nullopt when the centroids coincide.
inline std::optional<Direction> direction(const Rect& a, const Rect& b, const Axis& axis = {}) {
    const Point ca = centroid(a);
    const Point cb = centroid(b);
    const double dx = ca.x - cb.x;
    const double dy = ca.y - cb.y;
    if (dx == 0 && dy == 0) return std::nullopt;
    const double along = dx * axis.fx() + dy * axis.fy();
    const double across = dx * axis.px() + dy * axis.py();
    if (std::abs(along) >= std::abs(across)) return along > 0 ? Direction::Front : Direction::Back;
    return across < 0 ? Direction::Left : Direction::Right;
}

// ---------------------------------------------------------------------------
// Boolean and metric spatial functions

/// FORS sector test: direction(A, B) == dir.
struct DirectionTest {
    Direction dir = Direction::Front;
    Axis axis;
};

/// Pure projection onto the front axis, ignoring lateral offset:
/// back holds iff (cA - cB) . f < 0, front iff > 0. A zero projection is
/// neither.
struct AxisProjection {
    bool back = true;
    Axis axis;
};

using SpatialPredicate = std::variant<TopologicalRelation, DirectionTest, AxisProjection>;

inline bool holds(const SpatialPredicate& pred, const Geometry& a, const Geometry& b) {
    if (const auto* topo = std::get_if<TopologicalRelation>(&pred)) return holds_topology(*topo, a, b);
    const auto* ra = std::get_if<Rect>(&a);
    const auto* rb = std::get_if<Rect>(&b);
    if (!ra || !rb) fail(ErrorCode::UnsupportedGeometryPair, "directional relations need two rects");
    if (const auto* dt = std::get_if<DirectionTest>(&pred)) {
        const auto d = direction(*ra, *rb, dt->axis);
        return d && *d == dt->dir;
    }
    const auto& proj = std::get<AxisProjection>(pred);
    const Point ca = centroid(*ra);
    const Point cb = centroid(*rb);
    const double along = (ca.x - cb.x) * proj.axis.fx() + (ca.y - cb.y) * proj.axis.fy();
    return proj.back ? along < 0 : along > 0;
}

inline int bsf(const SpatialPredicate& pred, const Geometry& a, const Geometry& b) {
    return holds(pred, a, b) ? 1 : 0;
}

enum class MetricKind { Distance, OverlapArea, OverlapRatio };

constexpr std::string_view to_string(MetricKind k) noexcept {
    switch (k) {
        case MetricKind::Distance: return "DISTANCE";
        case MetricKind::OverlapArea: return "OVERLAP_AREA";
        case MetricKind::OverlapRatio: return "OVERLAP_RATIO";
    }
    return "?";
}

/// OVERLAP_RATIO normalizes by the area of `a`, the reference geometry.
inline double msf(MetricKind kind, const Rect& a, const Rect& b) {
    switch (kind) {
        case MetricKind::Distance: {
            const Point ca = centroid(a);
            const Point cb = centroid(b);
            return std::hypot(ca.x - cb.x, ca.y - cb.y);
        }
        case MetricKind::OverlapArea: return intersection_area(a, b);
        case MetricKind::OverlapRatio:
            if (!a.has_area()) fail(ErrorCode::DegenerateGeometry, "overlap ratio against a zero-area reference");
            return intersection_area(a, b) / a.area();
    }
    return 0.0;
}

}  // namespace mmcep::spatial
