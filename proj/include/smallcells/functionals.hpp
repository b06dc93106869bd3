#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallcells/model.hpp"

namespace smallcells {

enum class SizeFunctional {
  EdgeProductArea,   // X*Y, the area measure all 2D asymptotics use
  GeometricArea,     // X*Y*sin(angle(u1,u2)), true parallelogram area
  HalfPerimeter,     // X+Y
  Volume,            // X1*X2*X3
  SurfaceArea,       // 2*(X1X2 + X1X3 + X2X3)
  TotalEdgeLength,   // 4*(X1+X2+X3)
};

inline const char* functional_token(SizeFunctional f) {
  switch (f) {
    case SizeFunctional::EdgeProductArea: return "area";
    case SizeFunctional::GeometricArea: return "geom-area";
    case SizeFunctional::HalfPerimeter: return "half-perimeter";
    case SizeFunctional::Volume: return "volume";
    case SizeFunctional::SurfaceArea: return "surface-area";
    case SizeFunctional::TotalEdgeLength: return "edge-length";
  }
  return "?";
}

inline SizeFunctional functional_from_token(const std::string& token) {
  if (token == "area") return SizeFunctional::EdgeProductArea;
  if (token == "geom-area") return SizeFunctional::GeometricArea;
  if (token == "half-perimeter") return SizeFunctional::HalfPerimeter;
  if (token == "volume") return SizeFunctional::Volume;
  if (token == "surface-area") return SizeFunctional::SurfaceArea;
  if (token == "edge-length") return SizeFunctional::TotalEdgeLength;
  throw std::invalid_argument(
      "unknown functional '" + token +
      "' (expected area, geom-area, half-perimeter, volume, surface-area "
      "or edge-length)");
}

inline int functional_dimension(SizeFunctional f) {
  switch (f) {
    case SizeFunctional::EdgeProductArea:
    case SizeFunctional::GeometricArea:
    case SizeFunctional::HalfPerimeter:
      return 2;
    default:
      return 3;
  }
}

inline std::vector<SizeFunctional> applicable_functionals(int dimension) {
  if (dimension == 2)
    return {SizeFunctional::EdgeProductArea, SizeFunctional::GeometricArea,
            SizeFunctional::HalfPerimeter};
  if (dimension == 3)
    return {SizeFunctional::Volume, SizeFunctional::SurfaceArea,
            SizeFunctional::TotalEdgeLength};
  return {};
}

// Deviation functional sigma = d * min / sum, in [0,1], 1 iff all edges
// equal. Zero on cells with some (but not all) zero edges; an all-zero
// cell has no defined shape.
inline double sigma(std::span<const double> edges) {
  if (edges.empty()) throw std::invalid_argument("sigma: empty cell");
  double lo = edges[0], sum = 0.0;
  for (double e : edges) {
    lo = std::min(lo, e);
    sum += e;
  }
  if (sum == 0.0)
    throw std::invalid_argument("sigma: undefined for an all-zero cell");
  return static_cast<double>(edges.size()) * lo / sum;
}

// Deviation functional tau = max edge length.
inline double tau(std::span<const double> edges) {
  if (edges.empty()) throw std::invalid_argument("tau: empty cell");
  double hi = edges[0];
  for (double e : edges) hi = std::max(hi, e);
  return hi;
}

// sin of the angle between the two atom directions (2D).
inline double direction_sine(const TessellationModel& model) {
  const auto& u1 = model.atoms[0].direction;
  const auto& u2 = model.atoms[1].direction;
  return std::fabs(u1[0] * u2[1] - u1[1] * u2[0]);
}

// Hot-path form: `geometry` is direction_sine(model) for GeometricArea and
// ignored otherwise.
inline double cell_size(const double* e, int dimension, SizeFunctional f,
                        double geometry) {
  switch (f) {
    case SizeFunctional::EdgeProductArea:
      return e[0] * e[1];
    case SizeFunctional::GeometricArea:
      return e[0] * e[1] * geometry;
    case SizeFunctional::HalfPerimeter:
      return e[0] + e[1];
    case SizeFunctional::Volume: {
      double v = 1.0;
      for (int i = 0; i < dimension; ++i) v *= e[i];
      return v;
    }
    case SizeFunctional::SurfaceArea:
      return 2.0 * (e[0] * e[1] + e[0] * e[2] + e[1] * e[2]);
    case SizeFunctional::TotalEdgeLength:
      return 4.0 * (e[0] + e[1] + e[2]);
  }
  return 0.0;
}

inline double size_value(std::span<const double> edges, SizeFunctional f,
                         const TessellationModel& model) {
  if (edges.size() != static_cast<std::size_t>(model.dimension))
    throw std::invalid_argument("size: cell does not match model dimension");
  // Volume is the edge-length product in any dimension; the rest are tied
  // to the dimension they were defined in.
  if (f != SizeFunctional::Volume && functional_dimension(f) != model.dimension)
    throw std::invalid_argument(std::string("size: functional '") +
                                functional_token(f) +
                                "' does not apply to dimension " +
                                std::to_string(model.dimension));
  double geometry =
      f == SizeFunctional::GeometricArea ? direction_sine(model) : 0.0;
  return cell_size(edges.data(), static_cast<int>(edges.size()), f, geometry);
}

}  // namespace smallcells
