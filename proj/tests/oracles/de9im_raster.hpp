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

// Brute-force DE-9IM for integer-aligned boxes, segments and points.
//
// Coordinates are doubled so that every open cell of the integer grid gets
// one sample: (even, even) is a vertex, one odd coordinate is an open edge,
// two odd coordinates are an open face. Every part of an integer-aligned
// shape is a union of such cells, so the intersection dimension of two parts
// is the largest cell dimension sampled in both.

#include <algorithm>
#include <array>
#include <optional>
#include <string>

namespace oracle {

struct IntBox {
    int x0, y0, x1, y1;  // closed, x0 <= x1, y0 <= y1

    int dim() const { return (x1 > x0) + (y1 > y0); }
};

enum Where { kInterior = 0, kBoundary = 1, kExterior = 2 };

// Location of the doubled-grid sample (X, Y) relative to b.
inline Where where(const IntBox& b, int X, int Y) {
    const int lx = 2 * b.x0, hx = 2 * b.x1, ly = 2 * b.y0, hy = 2 * b.y1;
    if (X < lx || X > hx || Y < ly || Y > hy) return kExterior;
    switch (b.dim()) {
        case 0:
            return kInterior;  // a point has no boundary
        case 1: {
            // Segment: the two ends are boundary, the rest interior.
            const bool end = (X == lx && Y == ly) || (X == hx && Y == hy);
            return end ? kBoundary : kInterior;
        }
        default:
            return (X > lx && X < hx && Y > ly && Y < hy) ? kInterior : kBoundary;
    }
}

struct Matrix {
    std::array<std::array<int, 3>, 3> d{{{-1, -1, -1}, {-1, -1, -1}, {-1, -1, -1}}};

    bool meets(int a, int b) const { return d[a][b] >= 0; }

    std::string str() const {
        std::string s;
        for (const auto& row : d)
            for (int v : row) s.push_back(v < 0 ? 'F' : static_cast<char>('0' + v));
        return s;
    }
};

inline Matrix raster(const IntBox& a, const IntBox& b) {
    Matrix m;
    const int lo_x = 2 * std::min(a.x0, b.x0) - 1, hi_x = 2 * std::max(a.x1, b.x1) + 1;
    const int lo_y = 2 * std::min(a.y0, b.y0) - 1, hi_y = 2 * std::max(a.y1, b.y1) + 1;
    for (int X = lo_x; X <= hi_x; ++X)
        for (int Y = lo_y; Y <= hi_y; ++Y) {
            const int cell = (X & 1) + (Y & 1);
            int& slot = m.d[where(a, X, Y)][where(b, X, Y)];
            slot = std::max(slot, cell);
        }
    return m;
}

// Named predicates written as set statements over the sampled cells.
// nullopt means the predicate is undefined for the pair.
struct Predicates {
    bool disjoint, intersect, touch, within, contains, covered_by, inside;
    std::optional<bool> overlap, crosses;
};

inline Predicates predicates(const IntBox& a, const IntBox& b) {
    const Matrix m = raster(a, b);
    const Matrix t = raster(b, a);
    auto closure_meets = [](const Matrix& x) {
        return x.meets(kInterior, kInterior) || x.meets(kInterior, kBoundary) || x.meets(kBoundary, kInterior) ||
               x.meets(kBoundary, kBoundary);
    };
    // closure(A) lies inside closure(B).
    auto closed_subset = [](const Matrix& x) { return !x.meets(kInterior, kExterior) && !x.meets(kBoundary, kExterior); };
    Predicates p{};
    p.intersect = closure_meets(m);
    p.disjoint = !p.intersect;
    p.touch = p.intersect && !m.meets(kInterior, kInterior);
    p.within = m.meets(kInterior, kInterior) && closed_subset(m);
    p.contains = t.meets(kInterior, kInterior) && closed_subset(t);
    p.covered_by = p.intersect && closed_subset(m);
    p.inside = closed_subset(m) && !m.meets(kInterior, kBoundary) && !m.meets(kBoundary, kBoundary) &&
               m.meets(kInterior, kInterior);
    if (a.dim() == b.dim())
        p.overlap = m.d[kInterior][kInterior] == a.dim() && m.meets(kInterior, kExterior) && m.meets(kExterior, kInterior);
    if (a.dim() == 1 && b.dim() == 2) p.crosses = m.meets(kInterior, kInterior) && m.meets(kInterior, kExterior);
    if (a.dim() == 2 && b.dim() == 1) p.crosses = m.meets(kInterior, kInterior) && m.meets(kExterior, kInterior);
    return p;
}

enum class Rcc { DC, EC, PO, EQ, TPP, NTPP, TPPi, NTPPi };

// Every RCC-8 base relation that holds for two positive-area boxes, decided
// from coordinates alone. A partition yields exactly one.
inline std::array<bool, 8> rcc8_holds(const IntBox& a, const IntBox& b) {
    auto in_closed = [](const IntBox& p, const IntBox& q) {
        return p.x0 >= q.x0 && p.x1 <= q.x1 && p.y0 >= q.y0 && p.y1 <= q.y1;
    };
    auto in_open = [](const IntBox& p, const IntBox& q) {
        return p.x0 > q.x0 && p.x1 < q.x1 && p.y0 > q.y0 && p.y1 < q.y1;
    };
    const bool closures_meet = a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
    const bool interiors_meet = a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
    const bool equal = a.x0 == b.x0 && a.x1 == b.x1 && a.y0 == b.y0 && a.y1 == b.y1;
    std::array<bool, 8> r{};
    r[static_cast<int>(Rcc::DC)] = !closures_meet;
    r[static_cast<int>(Rcc::EC)] = closures_meet && !interiors_meet;
    r[static_cast<int>(Rcc::EQ)] = equal;
    r[static_cast<int>(Rcc::NTPP)] = in_open(a, b);
    r[static_cast<int>(Rcc::TPP)] = !equal && in_closed(a, b) && !in_open(a, b);
    r[static_cast<int>(Rcc::NTPPi)] = in_open(b, a);
    r[static_cast<int>(Rcc::TPPi)] = !equal && in_closed(b, a) && !in_open(b, a);
    r[static_cast<int>(Rcc::PO)] = interiors_meet && !in_closed(a, b) && !in_closed(b, a);
    return r;
}

}  // namespace oracle
