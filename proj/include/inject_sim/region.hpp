#pragma once

#include <string>
#include <vector>

#include "inject_sim/spectral_field.hpp"
#include "inject_sim/units_params.hpp"

namespace inject {

/// A controlled region: weighted interior grid nodes plus its volume.
///
/// Rectangles use trapezoid weights: 1 strictly inside, 1/2 on an edge,
/// 1/4 on a corner. A rectangle whose edges fall on nodes therefore
/// integrates to its exact area, stays centred on its geometric centre,
/// and a complement plus its hole tile the domain without gaps.
/// The volume is the geometric area times the thickness.
struct Region {
    std::string label;
    std::vector<std::size_t> cells;  ///< sorted interior node indices
    std::vector<double> weights;     ///< quadrature weight per cell, in (0, 1]
    double volume_km3 = 0.0;

    /// Weight of a node, 0 when outside.
    double weight(std::size_t cell) const;
    bool contains(std::size_t cell) const { return weight(cell) > 0.0; }
};

/// Build all regions from config; complement_of refers to another region's label.
std::vector<Region> build_regions(const std::vector<RegionSpec>& specs, const Grid2D& grid, double d_z);

struct WeightedCells {
    std::vector<std::size_t> cells;
    std::vector<double> weights;
};

/// Nodes of a closed rectangle with trapezoid weights.
WeightedCells rect_cells(const Grid2D& grid, const std::array<double, 4>& rect_km);

}  // namespace inject
