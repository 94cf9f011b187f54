#include "emk/models.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <memory>

namespace emk {

namespace {

using nlohmann::json;

struct GridModel {
  int dim = 0;
  std::vector<double> q;
  std::vector<ComplexMatrix> H;
  std::vector<ComplexMatrix> dH;
  std::vector<double> critical_points;
};

ComplexMatrix parse_matrix(const json& flat, int dim, const std::string& ctx) {
  if (!flat.is_array() || static_cast<int>(flat.size()) != dim * dim)
    raise(errc::InvalidArgument, ctx + ": expected " + std::to_string(dim * dim) +
                                     " complex entries");
  ComplexMatrix M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const json& e = flat[i * dim + j];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        raise(errc::InvalidArgument, ctx + ": entries must be [re, im] pairs");
      M(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return M;
}

size_t snap_index(const std::vector<double>& grid, double v) {
  double best = 1e300;
  size_t bi = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    double d = std::abs(grid[i] - v);
    if (d < best) {
      best = d;
      bi = i;
    }
  }
  double scale = std::max(1.0, std::abs(grid[bi]));
  if (best > 1e-9 * scale)
    raise(errc::InvalidArgument,
          "q = " + std::to_string(v) + " is not a grid point of the custom model");
  return bi;
}

}  // namespace

ModelDescriptor load_custom_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::IoError, "cannot open model file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    raise(errc::InvalidArgument, "model file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) raise(errc::InvalidArgument, "model file must hold a JSON object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer())
    raise(errc::InvalidArgument, "model file needs an integer 'dim'");
  auto gm = std::make_shared<GridModel>();
  gm->dim = doc["dim"].get<int>();
  if (gm->dim < 1 || gm->dim > 64)
    raise(errc::InvalidArgument, "dim must be between 1 and 64");

  if (!doc.contains("q") || !doc["q"].is_array() || doc["q"].size() < 2)
    raise(errc::InvalidArgument, "model file needs a 'q' array with at least 2 points");
  for (const json& x : doc["q"]) {
    if (!x.is_number()) raise(errc::InvalidArgument, "'q' entries must be numbers");
    gm->q.push_back(x.get<double>());
  }
  for (size_t i = 1; i < gm->q.size(); ++i)
    if (!(gm->q[i] > gm->q[i - 1]))
      raise(errc::InvalidArgument, "'q' must be strictly ascending");

  if (!doc.contains("H") || !doc["H"].is_array() || doc["H"].size() != gm->q.size())
    raise(errc::InvalidArgument, "'H' must list one matrix per grid point");
  for (size_t i = 0; i < gm->q.size(); ++i)
    gm->H.push_back(parse_matrix(doc["H"][i], gm->dim, "H[" + std::to_string(i) + "]"));

  if (doc.contains("dH")) {
    if (!doc["dH"].is_array() || doc["dH"].size() != gm->q.size())
      raise(errc::InvalidArgument, "'dH' must list one matrix per grid point");
    for (size_t i = 0; i < gm->q.size(); ++i)
      gm->dH.push_back(parse_matrix(doc["dH"][i], gm->dim, "dH[" + std::to_string(i) + "]"));
  } else {
    // central differences on the grid, one-sided at the ends
    const size_t n = gm->q.size();
    gm->dH.resize(n);
    gm->dH[0] = (gm->H[1] - gm->H[0]) / (gm->q[1] - gm->q[0]);
    gm->dH[n - 1] = (gm->H[n - 1] - gm->H[n - 2]) / (gm->q[n - 1] - gm->q[n - 2]);
    for (size_t i = 1; i + 1 < n; ++i)
      gm->dH[i] = (gm->H[i + 1] - gm->H[i - 1]) / (gm->q[i + 1] - gm->q[i - 1]);
  }

  if (doc.contains("critical_points")) {
    if (!doc["critical_points"].is_array())
      raise(errc::InvalidArgument, "'critical_points' must be an array");
    for (const json& x : doc["critical_points"]) {
      if (!x.is_number()) raise(errc::InvalidArgument, "'critical_points' entries must be numbers");
      gm->critical_points.push_back(x.get<double>());
    }
  }

  ModelDescriptor md;
  md.name = doc.value("name", std::string("custom"));
  md.dim = gm->dim;
  md.sweep_params = {"q"};
  md.default_sweep = "q";
  md.grid = gm->q;
  md.point = [gm](const std::string& sweep_param, double v) -> ModelPoint {
    if (sweep_param != "q")
      raise(errc::InvalidArgument, "custom models sweep over 'q' only");
    snap_index(gm->q, v);  // validates v lies on the grid
    ModelPoint mp;
    mp.fam.dim = gm->dim;
    mp.fam.H = [gm](double q) { return gm->H[snap_index(gm->q, q)]; };
    mp.fam.dH = [gm](double q) { return gm->dH[snap_index(gm->q, q)]; };
    mp.fam.q_domain = {gm->q.front(), gm->q.back()};
    mp.fam.critical_points = gm->critical_points;
    mp.q = v;
    mp.closed_k = nullptr;
    return mp;
  };
  md.critical_points = [gm](const std::string&) { return gm->critical_points; };
  return md;
}

}  // namespace emk
