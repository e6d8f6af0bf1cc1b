#include "robinshape/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <optional>

namespace robinshape {

namespace {

constexpr int kSearchWindow = 8;

struct SidePattern {
    bool lo;
    bool hi;
    bool operator==(const SidePattern&) const = default;
};

SidePattern pattern(const ShapeMask& mask, FaceId f) {
    const auto cells = mask.grid().face_cells(f);
    return {cells[0] && mask.contains(*cells[0]), cells[1] && mask.contains(*cells[1])};
}

/// Offset along the face axis of the nearest face in transverse row `row`
/// with the same in/out pattern, or nullopt when none lies within the window.
/// A tie between +k and -k counts as 0.
std::optional<int> row_offset(const ShapeMask& mask, int axis, int i, int row, SidePattern want) {
    const Grid& g = mask.grid();
    if (row < 0 || row >= g.n()) return std::nullopt;
    auto matches = [&](int k) {
        const int ii = i + k;
        if (ii < 0 || ii > g.n()) return false;
        return pattern(mask, g.face(axis, ii, row)) == want;
    };
    if (matches(0)) return 0;
    for (int k = 1; k <= kSearchWindow; ++k) {
        const bool plus = matches(k);
        const bool minus = matches(-k);
        if (plus && minus) return 0;
        if (plus) return k;
        if (minus) return -k;
    }
    return std::nullopt;
}

}  // namespace

BoundaryWeights default_weights(int d) { return d == 2 ? BoundaryWeights::Corrected : BoundaryWeights::Uncorrected; }

double corrected_face_weight(const ShapeMask& mask, FaceId f) {
    const Grid& g = mask.grid();
    if (g.d() == 1) return 1.0;
    const int axis = g.face_axis(f);
    const auto [i, j] = g.face_coords(f);
    const SidePattern want = pattern(mask, f);
    const auto up = row_offset(mask, axis, i, j + 1, want);
    const auto dn = row_offset(mask, axis, i, j - 1, want);
    double slope = 0.0;
    if (up && dn)
        slope = 0.5 * (*up - *dn);
    else if (up)
        slope = *up;
    else if (dn)
        slope = -*dn;
    return g.h() / std::sqrt(1.0 + slope * slope);
}

std::vector<BoundarySide> boundary_faces(const ShapeMask& mask, BoundaryWeights mode) {
    const Grid& g = mask.grid();
    const bool corrected = mode == BoundaryWeights::Corrected && g.d() == 2;
    std::vector<BoundarySide> out;
    for (FaceId f = 0; f < g.face_count(); ++f) {
        const auto cells = g.face_cells(f);
        const bool in0 = cells[0] && mask.contains(*cells[0]);
        const bool in1 = cells[1] && mask.contains(*cells[1]);
        if (in0 != in1) {
            const double w = corrected ? corrected_face_weight(mask, f) : g.face_measure();
            out.push_back({f, in0 ? *cells[0] : *cells[1], w});
        } else if (in0 && in1 && mask.is_cut(f)) {
            out.push_back({f, *cells[0], g.face_measure()});
            out.push_back({f, *cells[1], g.face_measure()});
        }
    }
    return out;
}

double perimeter(const ShapeMask& mask, BoundaryWeights mode) {
    double acc = 0.0;
    for (const auto& side : boundary_faces(mask, mode))
        if (!mask.is_cut(side.face)) acc += side.weight;
    return acc;
}

}  // namespace robinshape
