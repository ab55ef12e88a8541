#include "reachplan/grid.hpp"

#include "reachplan/error.hpp"

#include <algorithm>
#include <cmath>

namespace reachplan {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void BaseGridSpec::validate() const {
    if (!(cell > 0.0) || width <= 0 || height <= 0) {
        throw ContractError("base grid needs a positive cell size and extents");
    }
}

Point2 BaseGridSpec::cell_center(int row, int col) const {
    return {x0 + (col + 0.5) * cell, y0 + (row + 0.5) * cell};
}

std::optional<std::pair<int, int>> BaseGridSpec::cell_of(const Point2& p) const {
    const double c = std::floor((p.x - x0) / cell);
    const double r = std::floor((p.y - y0) / cell);
    if (c < 0 || r < 0 || c >= width || r >= height) {
        return std::nullopt;
    }
    return std::make_pair(static_cast<int>(r), static_cast<int>(c));
}

Mask::Mask(int width, int height, bool value)
    : width_(width), height_(height),
      cells_(static_cast<std::size_t>(std::max(0, width)) * static_cast<std::size_t>(std::max(0, height)),
             value ? 1 : 0) {}

bool Mask::get(int row, int col) const {
    if (row < 0 || col < 0 || row >= height_ || col >= width_) {
        return false;
    }
    return at(row, col);
}

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool Mask::any() const { return std::find(cells_.begin(), cells_.end(), std::uint8_t{1}) != cells_.end(); }

Mask& Mask::operator&=(const Mask& other) {
    if (!same_shape(other)) {
        throw GridMismatchError("mask dimensions differ");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        cells_[i] = static_cast<std::uint8_t>(cells_[i] & other.cells_[i]);
    }
    return *this;
}

bool feasible_at(const Mask& mask, const BaseGridSpec& grid, const Point2& p) {
    const auto cell = grid.cell_of(p);
    return cell && mask.at(cell->first, cell->second);
}

} // namespace reachplan
