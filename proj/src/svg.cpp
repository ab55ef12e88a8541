#include "reachplan/svg.hpp"

#include "reachplan/error.hpp"
#include "reachplan/text.hpp"

#include <algorithm>
#include <cmath>

namespace reachplan {

namespace {

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string n(double v) { return format_number(v, 6); }

// Maps grid coordinates to pixels with y pointing up.
struct Canvas {
    BaseGridSpec grid;
    double px = 8.0;

    explicit Canvas(const BaseGridSpec& g) : grid(g) {
        px = std::max(2.0, 480.0 / static_cast<double>(std::max(g.width, g.height)));
    }
    double width() const { return px * grid.width; }
    double height() const { return px * grid.height; }
    double x(double wx) const { return (wx - grid.x0) / grid.cell * px; }
    double y(double wy) const { return height() - (wy - grid.y0) / grid.cell * px; }
    double len(double d) const { return d / grid.cell * px; }

    std::string header() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + n(width()) + "\" height=\"" + n(height()) +
               "\" viewBox=\"0 0 " + n(width()) + ' ' + n(height()) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    std::string cells(const Mask& mask, const std::string& color, double opacity) const {
        std::string out = "<g fill=\"" + color + "\" fill-opacity=\"" + n(opacity) + "\">\n";
        for (int r = 0; r < mask.height(); ++r) {
            // Runs of feasible cells become one rectangle.
            int c = 0;
            while (c < mask.width()) {
                if (!mask.at(r, c)) {
                    ++c;
                    continue;
                }
                int end = c;
                while (end < mask.width() && mask.at(r, end)) {
                    ++end;
                }
                out += "<rect x=\"" + n(c * px) + "\" y=\"" + n(height() - (r + 1) * px) + "\" width=\"" +
                       n((end - c) * px) + "\" height=\"" + n(px) + "\"/>\n";
                c = end;
            }
        }
        return out + "</g>\n";
    }

    std::string circle(const Point2& c, double r, const std::string& color) const {
        return "<circle cx=\"" + n(x(c.x)) + "\" cy=\"" + n(y(c.y)) + "\" r=\"" + n(len(r)) +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n<circle cx=\"" + n(x(c.x)) +
               "\" cy=\"" + n(y(c.y)) + "\" r=\"2\" fill=\"" + color + "\"/>\n";
    }
};

std::string color(std::size_t i) { return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))]; }

const BaseGridSpec& grid_of(std::span<const BaseRegion> regions) {
    if (regions.empty()) {
        throw ContractError("nothing to draw");
    }
    return regions.front().grid;
}

} // namespace

std::string svg_projection(const ProjectionGrid& projection, const VoxelSpec& spec) {
    const int w = std::max(projection.size[0], 1);
    const int h = std::max(projection.size[1], 1);
    BaseGridSpec g{projection.lo[0] * spec.cell[0], projection.lo[1] * spec.cell[1], spec.cell[0], w, h, 0.0};
    Canvas cv(g);
    std::vector<std::uint64_t> xy(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    std::uint64_t peak = 0;
    for (int ix = 0; ix < projection.size[0]; ++ix) {
        for (int iy = 0; iy < projection.size[1]; ++iy) {
            auto& v = xy[static_cast<std::size_t>(iy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(ix)];
            for (int iz = 0; iz < projection.size[2]; ++iz) {
                v += projection.at(projection.lo[0] + ix, projection.lo[1] + iy, projection.lo[2] + iz);
            }
            peak = std::max(peak, v);
        }
    }
    std::string out = cv.header();
    for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
            const auto v = xy[static_cast<std::size_t>(iy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(ix)];
            if (v == 0) {
                continue;
            }
            const double shade = 0.15 + 0.85 * static_cast<double>(v) / static_cast<double>(peak);
            out += "<rect x=\"" + n(ix * cv.px) + "\" y=\"" + n(cv.height() - (iy + 1) * cv.px) + "\" width=\"" +
                   n(cv.px) + "\" height=\"" + n(cv.px) + "\" fill=\"#1f77b4\" fill-opacity=\"" + n(shade) + "\"/>\n";
        }
    }
    return out + "</svg>\n";
}

std::string svg_region(const BaseRegion& region) {
    Canvas cv(region.grid);
    return cv.header() + cv.cells(region.mask, color(0), 0.6) + "</svg>\n";
}

std::string svg_intersections(std::span<const BaseRegion> regions, std::span<const IntersectionRecord> records) {
    Canvas cv(grid_of(regions));
    std::string out = cv.header();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        out += cv.cells(regions[i].mask, color(i), 0.2);
    }
    for (const auto& rec : records) {
        if (rec.order() < 2) {
            continue;
        }
        out += cv.cells(rec.mask, "#000000", 0.15);
        const auto& c = rec.robust ? *rec.robust : rec.best_component().circle;
        out += cv.circle(c.center, c.radius, "#000000");
    }
    return out + "</svg>\n";
}

std::string svg_plan(std::span<const BaseRegion> regions, const PlanResult& plan) {
    Canvas cv(grid_of(regions));
    std::string out = cv.header();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        out += cv.cells(regions[i].mask, color(i), 0.2);
    }
    for (const auto& s : plan.stops) {
        out += cv.circle(s.center, s.radius, "#000000");
    }
    out += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"";
    out += n(cv.x(plan.start.x)) + ',' + n(cv.y(plan.start.y));
    for (const auto& s : plan.stops) {
        out += ' ' + n(cv.x(s.center.x)) + ',' + n(cv.y(s.center.y));
    }
    out += ' ' + n(cv.x(plan.goal.x)) + ',' + n(cv.y(plan.goal.y)) + "\"/>\n";
    out += "<rect x=\"" + n(cv.x(plan.start.x) - 4) + "\" y=\"" + n(cv.y(plan.start.y) - 4) +
           "\" width=\"8\" height=\"8\" fill=\"#2ca02c\"/>\n";
    out += "<rect x=\"" + n(cv.x(plan.goal.x) - 4) + "\" y=\"" + n(cv.y(plan.goal.y) - 4) +
           "\" width=\"8\" height=\"8\" fill=\"#d62728\"/>\n";
    return out + "</svg>\n";
}

std::string svg_histogram(std::span<const std::size_t> counts, double sigma) {
    const double w = 480.0;
    const double h = 240.0;
    const std::size_t peak = counts.empty() ? 1 : std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + n(w) + "\" height=\"" + n(h + 20) +
                      "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double bw = counts.empty() ? w : w / static_cast<double>(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double bh = h * static_cast<double>(counts[i]) / static_cast<double>(peak);
        out += "<rect x=\"" + n(i * bw) + "\" y=\"" + n(h - bh) + "\" width=\"" + n(bw * 0.9) + "\" height=\"" +
               n(bh) + "\" fill=\"#1f77b4\"/>\n";
    }
    out += "<text x=\"0\" y=\"" + n(h + 15) + "\" font-size=\"12\">offset radius 0 .. " + n(sigma) + " m</text>\n";
    return out + "</svg>\n";
}

} // namespace reachplan
