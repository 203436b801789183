#include "inject_sim/region.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "inject_sim/errors.hpp"

namespace inject {

namespace {

constexpr double kIndexEps = 1e-9;

// 1-based node numbers k in [lo, hi] (node position k*dx) with their 1D
// trapezoid weights: 1/2 on an end point that coincides with a node.
std::vector<std::pair<int, double>> node_weights(const Grid2D& g, double lo, double hi) {
    const double s = (g.n + 1) / g.length;
    const double a = lo * s;
    const double b = hi * s;
    std::vector<std::pair<int, double>> out;
    const int first = std::max(1, static_cast<int>(std::ceil(a - kIndexEps)));
    const int last = std::min(g.n, static_cast<int>(std::floor(b + kIndexEps)));
    for (int k = first; k <= last; ++k) {
        const bool on_edge = std::abs(k - a) <= kIndexEps || std::abs(k - b) <= kIndexEps;
        out.emplace_back(k, on_edge ? 0.5 : 1.0);
    }
    return out;
}

double rect_area(const std::array<double, 4>& r) { return (r[2] - r[0]) * (r[3] - r[1]); }

double overlap_area(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    const double w = std::min(a[2], b[2]) - std::max(a[0], b[0]);
    const double h = std::min(a[3], b[3]) - std::max(a[1], b[1]);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

}  // namespace

double Region::weight(std::size_t cell) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), cell);
    if (it == cells.end() || *it != cell) return 0.0;
    return weights[static_cast<std::size_t>(it - cells.begin())];
}

WeightedCells rect_cells(const Grid2D& grid, const std::array<double, 4>& rect_km) {
    if (!(rect_km[2] > rect_km[0] && rect_km[3] > rect_km[1])) {
        throw ConfigError("regions: rect_km must have x1 > x0 and y1 > y0");
    }
    const auto xs = node_weights(grid, rect_km[0], rect_km[2]);
    const auto ys = node_weights(grid, rect_km[1], rect_km[3]);
    WeightedCells out;
    for (const auto& [ky, wy] : ys) {
        for (const auto& [kx, wx] : xs) {
            out.cells.push_back(grid.index(kx - 1, ky - 1));
            out.weights.push_back(wx * wy);
        }
    }
    return out;
}

std::vector<Region> build_regions(const std::vector<RegionSpec>& specs, const Grid2D& grid, double d_z) {
    auto find_spec = [&](const std::string& label) -> const RegionSpec& {
        auto it = std::find_if(specs.begin(), specs.end(), [&](const RegionSpec& s) { return s.label == label; });
        if (it == specs.end()) {
            throw ConfigError("regions: complement_of refers to unknown region '" + label + "'");
        }
        return *it;
    };

    std::vector<Region> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        Region r;
        r.label = spec.label;
        WeightedCells wc = rect_cells(grid, spec.rect_km);
        double area = rect_area(spec.rect_km);
        if (spec.complement_of) {
            const RegionSpec& other = find_spec(*spec.complement_of);
            if (other.complement_of || &other == &spec) {
                throw ConfigError("regions: '" + spec.label + "' must be the complement of a plain rectangle");
            }
            std::map<std::size_t, double> w;
            for (std::size_t i = 0; i < wc.cells.size(); ++i) w[wc.cells[i]] = wc.weights[i];
            const WeightedCells hole = rect_cells(grid, other.rect_km);
            for (std::size_t i = 0; i < hole.cells.size(); ++i) {
                auto it = w.find(hole.cells[i]);
                if (it != w.end()) it->second = std::max(0.0, it->second - hole.weights[i]);
            }
            wc = {};
            for (const auto& [c, x] : w) {
                if (x > 0.0) {
                    wc.cells.push_back(c);
                    wc.weights.push_back(x);
                }
            }
            area -= overlap_area(spec.rect_km, other.rect_km);
        }
        if (wc.cells.empty()) {
            throw ConfigError("regions: '" + spec.label + "' contains no grid node");
        }
        // rect_cells emits row-major order, already sorted by index
        r.cells = std::move(wc.cells);
        r.weights = std::move(wc.weights);
        r.volume_km3 = area * d_z;
        out.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            for (std::size_t k = 0; k < out[i].cells.size(); ++k) {
                if (out[i].weights[k] + out[j].weight(out[i].cells[k]) > 1.0 + 1e-12) {
                    throw ConfigError("regions: '" + out[i].label + "' and '" + out[j].label + "' overlap");
                }
            }
        }
    }
    return out;
}

}  // namespace inject
