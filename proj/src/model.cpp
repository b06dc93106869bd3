#include "smallcells/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "smallcells/common.hpp"

namespace smallcells {

namespace {

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

// |det| of the matrix whose columns are the atom directions, by Gaussian
// elimination with partial pivoting.
double abs_direction_det(const TessellationModel& m) {
  int d = m.dimension;
  std::vector<double> a(static_cast<std::size_t>(d) * d);
  for (int col = 0; col < d; ++col)
    for (int row = 0; row < d; ++row)
      a[static_cast<std::size_t>(row) * d + col] = m.atoms[col].direction[row];
  double det = 1.0;
  for (int k = 0; k < d; ++k) {
    int pivot = k;
    for (int r = k + 1; r < d; ++r)
      if (std::fabs(a[static_cast<std::size_t>(r) * d + k]) >
          std::fabs(a[static_cast<std::size_t>(pivot) * d + k]))
        pivot = r;
    if (pivot != k)
      for (int c = 0; c < d; ++c)
        std::swap(a[static_cast<std::size_t>(k) * d + c],
                  a[static_cast<std::size_t>(pivot) * d + c]);
    double p = a[static_cast<std::size_t>(k) * d + k];
    if (p == 0.0) return 0.0;
    det *= p;
    for (int r = k + 1; r < d; ++r) {
      double f = a[static_cast<std::size_t>(r) * d + k] / p;
      for (int c = k; c < d; ++c)
        a[static_cast<std::size_t>(r) * d + c] -=
            f * a[static_cast<std::size_t>(k) * d + c];
    }
  }
  return std::fabs(det);
}

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("model: " + msg);
}

}  // namespace

void TessellationModel::validate() const {
  if (dimension < 2) fail("dimension must be >= 2");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    fail("intensity gamma must be positive and finite");
  if (atoms.size() != static_cast<std::size_t>(dimension))
    fail("expected exactly " + std::to_string(dimension) + " atoms, got " +
         std::to_string(atoms.size()));
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& atom = atoms[i];
    std::string tag = "atom " + std::to_string(i + 1);
    if (atom.direction.size() != static_cast<std::size_t>(dimension))
      fail(tag + ": direction has " + std::to_string(atom.direction.size()) +
           " components, expected " + std::to_string(dimension));
    for (double c : atom.direction)
      if (!std::isfinite(c)) fail(tag + ": direction has non-finite component");
    if (std::fabs(norm(atom.direction) - 1.0) > 1e-12)
      fail(tag + ": direction is not a unit vector");
    if (!(atom.weight >= 0.0) || atom.weight > 1.0)
      fail(tag + ": weight must lie in [0, 1]");
    weight_sum += atom.weight;
  }
  if (std::fabs(weight_sum - 1.0) > 1e-12)
    fail("weights must sum to 1, got " + fmt17(weight_sum));
  if (abs_direction_det(*this) <= 1e-9)
    fail("directions are (numerically) linearly dependent");
}

TessellationModel standard_model_2d() {
  TessellationModel m;
  m.dimension = 2;
  m.gamma = 2.0;
  m.atoms = {{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}};
  return m;
}

TessellationModel standard_model_3d() {
  TessellationModel m;
  m.dimension = 3;
  m.gamma = 3.0;
  m.atoms = {{{1.0, 0.0, 0.0}, 1.0 / 3.0},
             {{0.0, 1.0, 0.0}, 1.0 / 3.0},
             {{0.0, 0.0, 1.0}, 1.0 / 3.0}};
  return m;
}

EdgeRates edge_rates(const TessellationModel& model) {
  model.validate();
  int d = model.dimension;

  // Normal of H_j = span of all directions except u_{d-j+1}: orthonormalize
  // the spanning set (two Gram-Schmidt passes for stability), then take the
  // normalized residual of the excluded direction. Sign is irrelevant --
  // only |<u_i, n_j>| enters the rates.
  std::vector<std::vector<double>> normals(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    int excluded = d - 1 - j;
    std::vector<std::vector<double>> basis;
    basis.reserve(static_cast<std::size_t>(d) - 1);
    for (int k = 0; k < d; ++k) {
      if (k == excluded) continue;
      std::vector<double> v = model.atoms[k].direction;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& e : basis) {
          double c = dot(v, e);
          for (int t = 0; t < d; ++t) v[t] -= c * e[t];
        }
      double len = norm(v);
      if (len <= 1e-9)
        throw std::invalid_argument(
            "model: directions are (numerically) linearly dependent");
      for (double& c : v) c /= len;
      basis.push_back(std::move(v));
    }
    std::vector<double> r = model.atoms[excluded].direction;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) {
        double c = dot(r, e);
        for (int t = 0; t < d; ++t) r[t] -= c * e[t];
      }
    double len = norm(r);
    if (len <= 1e-9)
      throw std::invalid_argument(
          "model: directions are (numerically) linearly dependent");
    for (double& c : r) c /= len;
    normals[static_cast<std::size_t>(j)] = std::move(r);
  }

  EdgeRates out;
  out.rates.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    double rate = 0.0;
    for (int j = 0; j < d; ++j)
      rate += model.atoms[static_cast<std::size_t>(j)].weight *
              std::fabs(dot(model.atoms[static_cast<std::size_t>(i)].direction,
                            normals[static_cast<std::size_t>(j)]));
    out.rates[static_cast<std::size_t>(i)] = model.gamma * rate;
  }
  for (double r : out.rates)
    if (!(r > 0.0))
      throw std::invalid_argument(
          "model: zero edge rate (an atom carries zero weight, so one edge "
          "length would be infinite)");
  return out;
}

Mat2 reduction_transform(const TessellationModel& model) {
  if (model.dimension != 2)
    throw std::invalid_argument(
        "reduction_transform: only implemented for dimension 2");
  EdgeRates rates = edge_rates(model);
  const auto& u1 = model.atoms[0].direction;
  const auto& u2 = model.atoms[1].direction;
  double det = u1[0] * u2[1] - u2[0] * u1[1];
  // [r1 0; 0 r2] * [u1 u2]^{-1}: sends u_i to rate_i * e_i, so the image
  // cell's edge lengths are unit-rate exponentials along orthogonal axes.
  double r1 = rates.rates[0], r2 = rates.rates[1];
  Mat2 f;
  f.a = r1 * u2[1] / det;
  f.b = -r1 * u2[0] / det;
  f.c = -r2 * u1[1] / det;
  f.d = r2 * u1[0] / det;
  return f;
}

TessellationModel transform_model(const TessellationModel& model,
                                  const Mat2& map) {
  if (model.dimension != 2)
    throw std::invalid_argument(
        "transform_model: only implemented for dimension 2");
  model.validate();
  double scale = std::fabs(map.a) + std::fabs(map.b) + std::fabs(map.c) +
                 std::fabs(map.d);
  if (std::fabs(map.det()) <= 1e-12 * scale * scale)
    throw std::invalid_argument("transform_model: map is singular");

  // Family i consists of lines along u_i whose offsets along the normal
  // m_i = rot90(u_i) form a Poisson process of intensity gamma * weight_i.
  // The image lines run along M*u_i; their offsets along the new normal
  // get stretched by |<M m_i, m_i'>|, so the image offset intensity is
  // lambda_i / that factor. Renormalizing the lambdas gives the image
  // model's gamma and weights.
  TessellationModel out;
  out.dimension = 2;
  out.atoms.resize(2);
  double lambda[2];
  for (int i = 0; i < 2; ++i) {
    const auto& u = model.atoms[static_cast<std::size_t>(i)].direction;
    double vx, vy;
    map.apply(u[0], u[1], vx, vy);
    double vlen = std::hypot(vx, vy);
    double mx = -u[1], my = u[0];           // normal of the source family
    double mpx = -vy / vlen, mpy = vx / vlen;  // normal of the image family
    double tx, ty;
    map.apply(mx, my, tx, ty);
    double stretch = std::fabs(tx * mpx + ty * mpy);
    lambda[i] = model.gamma *
                model.atoms[static_cast<std::size_t>(i)].weight / stretch;
    out.atoms[static_cast<std::size_t>(i)].direction = {vx / vlen, vy / vlen};
  }
  out.gamma = lambda[0] + lambda[1];
  out.atoms[0].weight = lambda[0] / out.gamma;
  out.atoms[1].weight = lambda[1] / out.gamma;
  out.validate();
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, int line_no) {
  std::string t = trim(text);
  if (t.empty())
    throw std::invalid_argument("model file line " + std::to_string(line_no) +
                                ": empty number");
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw std::invalid_argument("model file line " + std::to_string(line_no) +
                                ": malformed number '" + t + "'");
  return v;
}

std::vector<double> parse_reals(const std::string& text, int line_no) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_real(item, line_no));
  return out;
}

}  // namespace

TessellationModel model_from_string(const std::string& text) {
  TessellationModel m;
  m.dimension = 0;
  m.gamma = 0.0;
  bool saw_dimension = false, saw_gamma = false;
  struct PendingAtom {
    std::vector<double> direction;
    double weight = -1.0;
    bool has_direction = false, has_weight = false;
  };
  std::vector<PendingAtom> pending;

  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("model file line " +
                                  std::to_string(line_no) +
                                  ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string value = t.substr(eq + 1);
    if (key == "dimension") {
      double v = parse_real(value, line_no);
      if (v != std::floor(v) || v < 2 || v > 64)
        throw std::invalid_argument("model file line " +
                                    std::to_string(line_no) +
                                    ": dimension must be an integer >= 2");
      m.dimension = static_cast<int>(v);
      saw_dimension = true;
    } else if (key == "gamma") {
      m.gamma = parse_real(value, line_no);
      saw_gamma = true;
    } else if (key.rfind("atom.", 0) == 0) {
      std::size_t dot2 = key.find('.', 5);
      if (dot2 == std::string::npos)
        throw std::invalid_argument("model file line " +
                                    std::to_string(line_no) +
                                    ": malformed atom key '" + key + "'");
      std::string idx_text = key.substr(5, dot2 - 5);
      char* end = nullptr;
      long idx = std::strtol(idx_text.c_str(), &end, 10);
      if (end != idx_text.c_str() + idx_text.size() || idx < 1 || idx > 64)
        throw std::invalid_argument("model file line " +
                                    std::to_string(line_no) +
                                    ": bad atom index '" + idx_text + "'");
      std::string field = key.substr(dot2 + 1);
      if (pending.size() < static_cast<std::size_t>(idx))
        pending.resize(static_cast<std::size_t>(idx));
      PendingAtom& atom = pending[static_cast<std::size_t>(idx - 1)];
      if (field == "direction") {
        atom.direction = parse_reals(value, line_no);
        atom.has_direction = true;
      } else if (field == "weight") {
        atom.weight = parse_real(value, line_no);
        atom.has_weight = true;
      } else {
        throw std::invalid_argument("model file line " +
                                    std::to_string(line_no) +
                                    ": unknown atom field '" + field + "'");
      }
    } else {
      throw std::invalid_argument("model file line " +
                                  std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  if (!saw_dimension)
    throw std::invalid_argument("model file: missing 'dimension'");
  if (!saw_gamma) throw std::invalid_argument("model file: missing 'gamma'");
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (!pending[i].has_direction)
      throw std::invalid_argument("model file: atom " + std::to_string(i + 1) +
                                  " is missing its direction");
    if (!pending[i].has_weight)
      throw std::invalid_argument("model file: atom " + std::to_string(i + 1) +
                                  " is missing its weight");
    m.atoms.push_back({pending[i].direction, pending[i].weight});
  }
  m.validate();
  return m;
}

TessellationModel model_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_string(buf.str());
}

std::string model_to_string(const TessellationModel& model) {
  std::string out;
  out += "dimension=" + std::to_string(model.dimension) + "\n";
  out += "gamma=" + fmt17(model.gamma) + "\n";
  for (std::size_t i = 0; i < model.atoms.size(); ++i) {
    out += "atom." + std::to_string(i + 1) + ".direction=";
    for (std::size_t c = 0; c < model.atoms[i].direction.size(); ++c) {
      if (c) out += ",";
      out += fmt17(model.atoms[i].direction[c]);
    }
    out += "\natom." + std::to_string(i + 1) +
           ".weight=" + fmt17(model.atoms[i].weight) + "\n";
  }
  return out;
}

}  // namespace smallcells
