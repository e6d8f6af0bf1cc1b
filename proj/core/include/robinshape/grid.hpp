#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "robinshape/model.hpp"

namespace robinshape {

using CellId = std::size_t;
using FaceId = std::size_t;

/// Uniform lattice of n^d square cells of side h covering D = [0, n h]^d.
/// Values outside D are identically zero (a ghost layer that is never stored),
/// so a face on the box boundary separates a cell from the exterior.
class Grid {
public:
    Grid(int d, int n, double h);

    /// Grid with n cells covering [0, side]^d.
    static Grid box(int d, int n, double side) { return Grid(d, n, side / n); }

    int d() const { return d_; }
    int n() const { return n_; }
    double h() const { return h_; }

    std::size_t cell_count() const { return d_ == 1 ? n_ : std::size_t(n_) * n_; }
    std::size_t face_count() const { return d_ == 1 ? std::size_t(n_) + 1 : 2 * std::size_t(n_ + 1) * n_; }

    double cell_volume() const { return d_ == 1 ? h_ : h_ * h_; }
    /// Uncorrected face measure h^{d-1}.
    double face_measure() const { return d_ == 1 ? 1.0 : h_; }
    double volume() const;

    CellId cell(int i, int j = 0) const { return std::size_t(j) * n_ + i; }
    std::array<int, 2> coords(CellId c) const {
        return {static_cast<int>(c % n_), static_cast<int>(c / n_)};
    }
    Point center(CellId c) const;

    /// Face on the low (side = 0) or high (side = 1) end of cell c along axis.
    FaceId face_of(CellId c, int axis, int side) const;
    /// Face with lattice coordinates: along `axis` it sits at index i in [0, n],
    /// j indexes the transverse direction.
    FaceId face(int axis, int i, int j = 0) const;
    int face_axis(FaceId f) const;
    /// (i, j) lattice coordinates of a face, as passed to face().
    std::array<int, 2> face_coords(FaceId f) const;
    /// Cells on the low and high side of a face; nullopt outside D.
    std::array<std::optional<CellId>, 2> face_cells(FaceId f) const;
    Point face_center(FaceId f) const;

    std::optional<CellId> neighbor(CellId c, int axis, int side) const;

    std::vector<Point> cell_centers() const;

    bool operator==(const Grid&) const = default;

private:
    int d_;
    int n_;
    double h_;
};

/// Discrete SBV function: cell-centred values plus an explicit jump set.
/// Gradients are never taken across a flagged face.
class SbvField {
public:
    explicit SbvField(Grid grid);

    const Grid& grid() const { return grid_; }

    double value(CellId c) const { return values_[c]; }
    void set_value(CellId c, double v) { values_[c] = v; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool is_jump(FaceId f) const { return jumps_[f] != 0; }
    void set_jump(FaceId f, bool on = true) { jumps_[f] = on ? 1 : 0; }
    void clear_jumps();
    std::vector<FaceId> jump_faces() const;

    /// Values on the two sides of a face (zero outside D).
    std::array<double, 2> traces(FaceId f) const;

    /// Flags every face that separates a nonzero cell from a zero cell.
    void flag_support_boundary();
    /// True when every support-boundary face is flagged.
    bool support_boundary_flagged() const;
    /// Throws InvariantViolation on an unflagged support-boundary face or a
    /// non-finite value.
    void validate() const;

    std::size_t support_size() const;

private:
    Grid grid_;
    std::vector<double> values_;
    std::vector<std::uint8_t> jumps_;
};

/// A shape Omega: a set of cells, plus optional interior cut faces (cracks)
/// between two cells of Omega that belong to the boundary of Omega.
class ShapeMask {
public:
    explicit ShapeMask(Grid grid);

    static ShapeMask full(const Grid& grid);
    /// Cells whose centre lies in the closed box [lo, hi].
    static ShapeMask box(const Grid& grid, Point lo, Point hi);
    /// Cells whose centre lies strictly inside the disc (d = 2) or interval (d = 1).
    static ShapeMask ball(const Grid& grid, Point center, double radius);
    /// Support {u != 0}; jump faces between two support cells become cuts.
    static ShapeMask from_support(const SbvField& field);

    const Grid& grid() const { return grid_; }

    bool contains(CellId c) const { return cells_[c] != 0; }
    void set(CellId c, bool on) { cells_[c] = on ? 1 : 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    double volume() const { return count() * grid_.cell_volume(); }
    std::vector<CellId> cells() const;

    bool is_cut(FaceId f) const { return cuts_[f] != 0; }
    void set_cut(FaceId f, bool on = true) { cuts_[f] = on ? 1 : 0; }
    void clear_cuts();
    /// True when both sides of f are in Omega and f is not a cut.
    bool interior_face(FaceId f) const;

    /// Number of 4-connected components (cuts separate cells).
    int components() const;
    /// Component index per cell (-1 outside), numbered in cell order.
    std::vector<int> component_labels() const;

    bool operator==(const ShapeMask&) const = default;

private:
    Grid grid_;
    std::vector<std::uint8_t> cells_;
    std::vector<std::uint8_t> cuts_;
};

enum class BoundaryWeights { Uncorrected, Corrected };

/// Default weighting: corrected in d = 2, uncorrected (exact) in d = 1.
BoundaryWeights default_weights(int d);

/// One side of a boundary face of Omega: the trace taken from `cell`.
struct BoundarySide {
    FaceId face;
    CellId cell;
    double weight;
};

/// Every boundary side of Omega. Faces between Omega and its complement give
/// one side; cut faces give two (one per adjacent cell).
std::vector<BoundarySide> boundary_faces(const ShapeMask& mask, BoundaryWeights mode);

/// Perimeter of Omega: weighted measure of faces separating Omega from its
/// complement (cuts are not part of the reduced boundary).
double perimeter(const ShapeMask& mask, BoundaryWeights mode);

/// Face weight of a boundary face of `mask` in corrected mode: h times the
/// normal component along the face axis, with the normal estimated from the
/// positions of the same-orientation faces in the two adjacent rows.
double corrected_face_weight(const ShapeMask& mask, FaceId f);

/// Per-axis central difference, one-sided next to one jump face, zero
/// between two jump faces.
std::array<double, 2> discrete_gradient(const SbvField& field, CellId c);

/// Face-based |grad u|^p density of a cell: per axis, the mean of the
/// |difference/h|^p over its two faces, with jump faces contributing 0.
/// Summed over cells each non-jump face is counted exactly once.
double gradient_energy_density(const SbvField& field, CellId c, double p);

/// F(u) = sum_{u != 0} j(x, u, grad u) h^d + sum_{J_u} [g(x,u+) + g(x,u-)] w_F.
/// The gradient part of j is evaluated face-wise (see gradient_energy_density);
/// it enters additively because j(x,s,z) - j(x,s,0) = L|z|^p.
double eval_free_discontinuity(const IntegrandModel& model, const SbvField& field,
                               BoundaryWeights mode = BoundaryWeights::Uncorrected);

/// sum |grad u| h^d + sum_{J_u} |u+ - u-| w_F.
double discrete_bv_norm(const SbvField& field, BoundaryWeights mode);

/// Plain-text field format: "d n h", then "i [j] value in_omega" per cell,
/// then "axis i [j]" per jump face. Lines starting with '#' are comments.
void write_field(std::ostream& os, const SbvField& field, const ShapeMask& mask);
struct FieldFile {
    SbvField field;
    ShapeMask mask;
};
FieldFile read_field(std::istream& is);

}  // namespace robinshape
