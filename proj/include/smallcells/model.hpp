#pragma once

#include <string>
#include <vector>

namespace smallcells {

struct DirectionAtom {
  std::vector<double> direction;  // unit vector u_i
  double weight = 0.0;            // in [0, 1]
};

// Stationary Poisson hyperplane tessellation with an atomic directional
// distribution: d linearly independent unit directions u_1..u_d with
// weights summing to 1, and a global intensity gamma. Atom j's weight is
// the mass of the hyperplane family H_j spanned by every direction except
// u_{d-j+1}; in 2D that makes atom i the family of lines along u_i.
struct TessellationModel {
  int dimension = 2;
  double gamma = 1.0;
  std::vector<DirectionAtom> atoms;

  // Throws std::invalid_argument with a self-contained message.
  void validate() const;
};

// Rates of the d independent exponential edge lengths of the typical cell,
// indexed like the directions: edge i runs along u_i.
struct EdgeRates {
  std::vector<double> rates;
};

// gamma=2, weights 1/2, orthogonal coordinate axes: unit edge rates.
TessellationModel standard_model_2d();
// gamma=3, weights 1/3, orthonormal coordinate axes: unit edge rates.
TessellationModel standard_model_3d();

// Plain-text key=value description:
//   dimension=2
//   gamma=2
//   atom.1.direction=1,0
//   atom.1.weight=0.5
//   ...
// Unknown keys, missing entries and malformed numbers are rejected.
TessellationModel model_from_string(const std::string& text);
TessellationModel model_from_file(const std::string& path);
std::string model_to_string(const TessellationModel& model);

// rate_i = gamma * sum_j weight_j * |<u_i, n_j>| where n_j is the unit
// normal of H_j.
EdgeRates edge_rates(const TessellationModel& model);

// Row-major 2x2 matrix, enough linear algebra for the 2D reduction.
struct Mat2 {
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }
  void apply(double x, double y, double& ox, double& oy) const {
    ox = a * x + b * y;
    oy = c * x + d * y;
  }
};

// Invertible map sending u_i to rate_i * e_i, so the image tessellation is
// the standard 2D model: the pushforward typical cell has edge rates (1,1).
// 2D only.
Mat2 reduction_transform(const TessellationModel& model);

// Image of a 2D model under an invertible linear map: directions map to
// normalized images, and each family's offset intensity picks up the
// Jacobian of the map restricted to its offset axis.
TessellationModel transform_model(const TessellationModel& model,
                                  const Mat2& map);

}  // namespace smallcells
