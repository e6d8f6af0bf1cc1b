#include "robinshape/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "robinshape/errors.hpp"

namespace robinshape {

Grid::Grid(int d, int n, double h) : d_(d), n_(n), h_(h) {
    if (d != 1 && d != 2) throw std::invalid_argument(fmt::format("Grid: d must be 1 or 2 (got {})", d));
    if (n < 4) throw std::invalid_argument(fmt::format("Grid: n must be >= 4 (got {})", n));
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Grid: h must be > 0");
}

double Grid::volume() const { return std::pow(n_ * h_, d_); }

Point Grid::center(CellId c) const {
    const auto [i, j] = coords(c);
    return d_ == 1 ? Point{(i + 0.5) * h_, 0.0} : Point{(i + 0.5) * h_, (j + 0.5) * h_};
}

FaceId Grid::face(int axis, int i, int j) const {
    if (axis == 0) return std::size_t(j) * (n_ + 1) + i;
    return std::size_t(n_ + 1) * n_ + std::size_t(i) * n_ + j;
}

FaceId Grid::face_of(CellId c, int axis, int side) const {
    const auto [i, j] = coords(c);
    return axis == 0 ? face(0, i + side, j) : face(1, j + side, i);
}

int Grid::face_axis(FaceId f) const {
    return f < std::size_t(n_ + 1) * (d_ == 1 ? 1 : n_) ? 0 : 1;
}

std::array<int, 2> Grid::face_coords(FaceId f) const {
    if (face_axis(f) == 0) return {static_cast<int>(f % (n_ + 1)), static_cast<int>(f / (n_ + 1))};
    const std::size_t g = f - std::size_t(n_ + 1) * n_;
    return {static_cast<int>(g / n_), static_cast<int>(g % n_)};
}

std::array<std::optional<CellId>, 2> Grid::face_cells(FaceId f) const {
    const int axis = face_axis(f);
    const auto [i, j] = face_coords(f);
    std::array<std::optional<CellId>, 2> out;
    // Along the axis the face sits between index i-1 and i.
    if (i > 0) out[0] = axis == 0 ? cell(i - 1, j) : cell(j, i - 1);
    if (i < n_) out[1] = axis == 0 ? cell(i, j) : cell(j, i);
    return out;
}

Point Grid::face_center(FaceId f) const {
    const int axis = face_axis(f);
    const auto [i, j] = face_coords(f);
    if (d_ == 1) return {i * h_, 0.0};
    return axis == 0 ? Point{i * h_, (j + 0.5) * h_} : Point{(j + 0.5) * h_, i * h_};
}

std::optional<CellId> Grid::neighbor(CellId c, int axis, int side) const {
    auto [i, j] = coords(c);
    int& k = axis == 0 ? i : j;
    k += side == 0 ? -1 : 1;
    if (k < 0 || k >= n_) return std::nullopt;
    return cell(i, j);
}

std::vector<Point> Grid::cell_centers() const {
    std::vector<Point> pts(cell_count());
    for (CellId c = 0; c < pts.size(); ++c) pts[c] = center(c);
    return pts;
}

// ---------------------------------------------------------------------------

SbvField::SbvField(Grid grid)
    : grid_(grid), values_(grid.cell_count(), 0.0), jumps_(grid.face_count(), 0) {}

void SbvField::clear_jumps() { std::fill(jumps_.begin(), jumps_.end(), 0); }

std::vector<FaceId> SbvField::jump_faces() const {
    std::vector<FaceId> out;
    for (FaceId f = 0; f < jumps_.size(); ++f)
        if (jumps_[f]) out.push_back(f);
    return out;
}

std::array<double, 2> SbvField::traces(FaceId f) const {
    const auto cells = grid_.face_cells(f);
    return {cells[0] ? values_[*cells[0]] : 0.0, cells[1] ? values_[*cells[1]] : 0.0};
}

void SbvField::flag_support_boundary() {
    for (FaceId f = 0; f < jumps_.size(); ++f) {
        const auto t = traces(f);
        if ((t[0] != 0.0) != (t[1] != 0.0)) jumps_[f] = 1;
    }
}

bool SbvField::support_boundary_flagged() const {
    for (FaceId f = 0; f < jumps_.size(); ++f) {
        const auto t = traces(f);
        if ((t[0] != 0.0) != (t[1] != 0.0) && !jumps_[f]) return false;
    }
    return true;
}

void SbvField::validate() const {
    for (double v : values_)
        if (!std::isfinite(v)) throw InvariantViolation("SbvField: non-finite value");
    for (FaceId f = 0; f < jumps_.size(); ++f) {
        const auto t = traces(f);
        if ((t[0] != 0.0) != (t[1] != 0.0) && !jumps_[f]) {
            const auto [i, j] = grid_.face_coords(f);
            throw InvariantViolation(fmt::format("SbvField: unflagged support-boundary face (axis {}, {}, {})",
                                                 grid_.face_axis(f), i, j));
        }
    }
}

std::size_t SbvField::support_size() const {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

// ---------------------------------------------------------------------------

ShapeMask::ShapeMask(Grid grid) : grid_(grid), cells_(grid.cell_count(), 0), cuts_(grid.face_count(), 0) {}

ShapeMask ShapeMask::full(const Grid& grid) {
    ShapeMask m(grid);
    std::fill(m.cells_.begin(), m.cells_.end(), 1);
    return m;
}

ShapeMask ShapeMask::box(const Grid& grid, Point lo, Point hi) {
    ShapeMask m(grid);
    for (CellId c = 0; c < grid.cell_count(); ++c) {
        const Point x = grid.center(c);
        const bool in = x.x >= lo.x && x.x <= hi.x && (grid.d() == 1 || (x.y >= lo.y && x.y <= hi.y));
        m.set(c, in);
    }
    return m;
}

ShapeMask ShapeMask::ball(const Grid& grid, Point center, double radius) {
    ShapeMask m(grid);
    for (CellId c = 0; c < grid.cell_count(); ++c) {
        const Point x = grid.center(c);
        const double dx = x.x - center.x;
        const double dy = grid.d() == 1 ? 0.0 : x.y - center.y;
        m.set(c, dx * dx + dy * dy < radius * radius);
    }
    return m;
}

ShapeMask ShapeMask::from_support(const SbvField& field) {
    ShapeMask m(field.grid());
    for (CellId c = 0; c < m.cells_.size(); ++c) m.set(c, field.value(c) != 0.0);
    for (FaceId f : field.jump_faces()) {
        const auto t = field.traces(f);
        if (t[0] != 0.0 && t[1] != 0.0) m.set_cut(f);
    }
    return m;
}

std::size_t ShapeMask::count() const { return std::accumulate(cells_.begin(), cells_.end(), std::size_t{0}); }

std::vector<CellId> ShapeMask::cells() const {
    std::vector<CellId> out;
    for (CellId c = 0; c < cells_.size(); ++c)
        if (cells_[c]) out.push_back(c);
    return out;
}

void ShapeMask::clear_cuts() { std::fill(cuts_.begin(), cuts_.end(), 0); }

bool ShapeMask::interior_face(FaceId f) const {
    const auto cells = grid_.face_cells(f);
    return cells[0] && cells[1] && contains(*cells[0]) && contains(*cells[1]) && !is_cut(f);
}

int ShapeMask::components() const {
    const auto label = component_labels();
    return label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
}

std::vector<int> ShapeMask::component_labels() const {
    std::vector<int> label(cells_.size(), -1);
    int count = 0;
    std::vector<CellId> stack;
    for (CellId start = 0; start < cells_.size(); ++start) {
        if (!cells_[start] || label[start] >= 0) continue;
        label[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const CellId c = stack.back();
            stack.pop_back();
            for (int axis = 0; axis < grid_.d(); ++axis)
                for (int side = 0; side < 2; ++side) {
                    const auto nb = grid_.neighbor(c, axis, side);
                    if (!nb || !cells_[*nb] || label[*nb] >= 0) continue;
                    if (is_cut(grid_.face_of(c, axis, side))) continue;
                    label[*nb] = count;
                    stack.push_back(*nb);
                }
        }
        ++count;
    }
    return label;
}

// ---------------------------------------------------------------------------

std::array<double, 2> discrete_gradient(const SbvField& field, CellId c) {
    const Grid& g = field.grid();
    std::array<double, 2> grad{0.0, 0.0};
    const double u = field.value(c);
    for (int axis = 0; axis < g.d(); ++axis) {
        const FaceId flo = g.face_of(c, axis, 0);
        const FaceId fhi = g.face_of(c, axis, 1);
        const bool jlo = field.is_jump(flo);
        const bool jhi = field.is_jump(fhi);
        const double ulo = field.traces(flo)[0];
        const double uhi = field.traces(fhi)[1];
        if (!jlo && !jhi)
            grad[axis] = (uhi - ulo) / (2.0 * g.h());
        else if (jlo && !jhi)
            grad[axis] = (uhi - u) / g.h();
        else if (!jlo && jhi)
            grad[axis] = (u - ulo) / g.h();
    }
    return grad;
}

double gradient_energy_density(const SbvField& field, CellId c, double p) {
    const Grid& g = field.grid();
    double acc = 0.0;
    for (int axis = 0; axis < g.d(); ++axis)
        for (int side = 0; side < 2; ++side) {
            const FaceId f = g.face_of(c, axis, side);
            if (field.is_jump(f)) continue;
            const auto t = field.traces(f);
            const double delta = std::abs(t[1] - t[0]) / g.h();
            acc += 0.5 * (p == 2.0 ? delta * delta : std::pow(delta, p));
        }
    return acc;
}

namespace {

/// Weight of a jump face: corrected for faces on the support boundary when
/// requested, h^{d-1} otherwise.
double jump_weight(const SbvField& field, const ShapeMask* support, FaceId f) {
    if (!support) return field.grid().face_measure();
    const auto cells = field.grid().face_cells(f);
    const bool in0 = cells[0] && support->contains(*cells[0]);
    const bool in1 = cells[1] && support->contains(*cells[1]);
    if (in0 == in1) return field.grid().face_measure();
    return corrected_face_weight(*support, f);
}

}  // namespace

double eval_free_discontinuity(const IntegrandModel& model, const SbvField& field, BoundaryWeights mode) {
    field.validate();
    const Grid& g = field.grid();
    const double kappa = model.gradient_coefficient();
    const std::array<double, 2> zero{0.0, 0.0};
    const std::span<const double> z0(zero.data(), static_cast<std::size_t>(g.d()));

    double bulk = 0.0;
    for (CellId c = 0; c < g.cell_count(); ++c) {
        const double u = field.value(c);
        if (u == 0.0) continue;
        const Point x = g.center(c);
        bulk += (eval_j(model, x, u, z0) + kappa * gradient_energy_density(field, c, model.p)) * g.cell_volume();
    }

    std::optional<ShapeMask> support;
    if (mode == BoundaryWeights::Corrected && g.d() == 2) support = ShapeMask::from_support(field);
    double surface = 0.0;
    for (FaceId f : field.jump_faces()) {
        const auto t = field.traces(f);
        const Point x = g.face_center(f);
        const double gsum = eval_g(model, x, t[0]) + eval_g(model, x, t[1]);
        if (gsum == 0.0) continue;
        surface += gsum * jump_weight(field, support ? &*support : nullptr, f);
    }
    return bulk + surface;
}

double discrete_bv_norm(const SbvField& field, BoundaryWeights mode) {
    const Grid& g = field.grid();
    double acc = 0.0;
    for (CellId c = 0; c < g.cell_count(); ++c) {
        if (field.value(c) == 0.0) continue;
        const auto gr = discrete_gradient(field, c);
        acc += std::hypot(gr[0], gr[1]) * g.cell_volume();
    }
    std::optional<ShapeMask> support;
    if (mode == BoundaryWeights::Corrected && g.d() == 2) support = ShapeMask::from_support(field);
    for (FaceId f : field.jump_faces()) {
        const auto t = field.traces(f);
        acc += std::abs(t[1] - t[0]) * jump_weight(field, support ? &*support : nullptr, f);
    }
    return acc;
}

}  // namespace robinshape
