#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace reachplan {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(const Point2& a, const Point2& b);

/// Regular grid of candidate base positions with a fixed heading.
/// Row i spans y in [y0 + i*cell, y0 + (i+1)*cell), column j spans x likewise.
struct BaseGridSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double cell = 0.05;
    int width = 0;
    int height = 0;
    double heading = 0.0;

    void validate() const;
    Point2 cell_center(int row, int col) const;
    /// Cell containing p, or nullopt outside the grid.
    std::optional<std::pair<int, int>> cell_of(const Point2& p) const;

    friend bool operator==(const BaseGridSpec&, const BaseGridSpec&) = default;
};

/// Row-major boolean grid.
class Mask {
  public:
    Mask() = default;
    Mask(int width, int height, bool value = false);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int row, int col) const { return cells_[index(row, col)] != 0; }
    void set(int row, int col, bool v) { cells_[index(row, col)] = v ? 1 : 0; }
    /// Out-of-range cells read as false.
    bool get(int row, int col) const;
    std::size_t count() const;
    bool any() const;
    bool same_shape(const Mask& other) const { return width_ == other.width_ && height_ == other.height_; }

    Mask& operator&=(const Mask& other);
    friend Mask operator&(Mask a, const Mask& b) { return a &= b; }
    friend bool operator==(const Mask&, const Mask&) = default;

  private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// True iff p falls in a feasible cell of mask.
bool feasible_at(const Mask& mask, const BaseGridSpec& grid, const Point2& p);

} // namespace reachplan
