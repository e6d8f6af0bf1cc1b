#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "robinshape/errors.hpp"
#include "robinshape/grid.hpp"

namespace robinshape {

void write_field(std::ostream& os, const SbvField& field, const ShapeMask& mask) {
    const Grid& g = field.grid();
    if (!(mask.grid() == g)) throw std::invalid_argument("write_field: mask and field grids differ");
    os << "# robin-shape v1 field\n";
    os << fmt::format("{} {} {:.17g}\n", g.d(), g.n(), g.h());
    for (CellId c = 0; c < g.cell_count(); ++c) {
        const auto [i, j] = g.coords(c);
        const int in = mask.contains(c) ? 1 : 0;
        if (g.d() == 1)
            os << fmt::format("{} {:.17g} {}\n", i, field.value(c), in);
        else
            os << fmt::format("{} {} {:.17g} {}\n", i, j, field.value(c), in);
    }
    for (FaceId f : field.jump_faces()) {
        const auto [i, j] = g.face_coords(f);
        const int axis = g.face_axis(f);
        // A face is named by the cell (i, j) whose low side it is; i or j may equal n.
        if (g.d() == 1)
            os << fmt::format("{} {}\n", axis, i);
        else if (axis == 0)
            os << fmt::format("{} {} {}\n", axis, i, j);
        else
            os << fmt::format("{} {} {}\n", axis, j, i);
    }
}

FieldFile read_field(std::istream& is) {
    std::string line;
    auto next_line = [&](std::vector<std::string>& tokens) {
        while (std::getline(is, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            tokens.clear();
            std::istringstream ss(line);
            for (std::string t; ss >> t;) tokens.push_back(t);
            return true;
        }
        return false;
    };
    auto fail = [&](const std::string& msg) -> FieldFile {
        throw std::invalid_argument(fmt::format("read_field: {} (line: '{}')", msg, line));
    };

    std::vector<std::string> tok;
    if (!next_line(tok) || tok.size() != 3) fail("expected header 'd n h'");
    const Grid g(std::stoi(tok[0]), std::stoi(tok[1]), std::stod(tok[2]));
    FieldFile out{SbvField(g), ShapeMask(g)};
    const std::size_t cell_tokens = g.d() + 2;
    const std::size_t face_tokens = g.d() + 1;
    std::size_t cells_seen = 0;
    while (next_line(tok)) {
        if (tok.size() == cell_tokens) {
            const int i = std::stoi(tok[0]);
            const int j = g.d() == 2 ? std::stoi(tok[1]) : 0;
            if (i < 0 || i >= g.n() || j < 0 || j >= g.n()) fail("cell index out of range");
            const CellId c = g.cell(i, j);
            out.field.set_value(c, std::stod(tok[g.d()]));
            out.mask.set(c, tok[g.d() + 1] != "0");
            ++cells_seen;
        } else if (tok.size() == face_tokens) {
            const int axis = std::stoi(tok[0]);
            const int i = std::stoi(tok[1]);
            const int j = g.d() == 2 ? std::stoi(tok[2]) : 0;
            if (axis < 0 || axis >= g.d()) fail("face axis out of range");
            FaceId f;
            if (axis == 0) {
                if (i < 0 || i > g.n() || j < 0 || j >= g.n()) fail("face index out of range");
                f = g.face(0, i, j);
            } else {
                if (i < 0 || i >= g.n() || j < 0 || j > g.n()) fail("face index out of range");
                f = g.face(1, j, i);
            }
            out.field.set_jump(f);
        } else {
            fail("unexpected token count");
        }
    }
    if (cells_seen != g.cell_count()) throw std::invalid_argument("read_field: missing cell lines");
    for (FaceId f : out.field.jump_faces()) {
        const auto cells = g.face_cells(f);
        if (cells[0] && cells[1] && out.mask.contains(*cells[0]) && out.mask.contains(*cells[1])) out.mask.set_cut(f);
    }
    out.field.validate();
    return out;
}

}  // namespace robinshape
