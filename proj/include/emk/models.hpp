#pragma once

#include <map>
#include <string>

#include "emk/kgen.hpp"

namespace emk {

// Two-level gain/loss model [[i g, 1], [1, -i g]]; exceptional points at g = +-1.
ComplexMatrix h_ep(double gamma);
ComplexMatrix dh_ep();

// Adiabatic-gauge generator; a1, a2 are the residual-gauge coefficients (I and H directions).
ComplexMatrix k_ep_adiabatic(double gamma, double t, Complex a1 = {}, Complex a2 = {});

// Gauge regular through gamma = +-1 (exact cubic polynomials in t there); K(0) = 0.
ComplexMatrix k_ep_regular(double gamma, double t);

// Momentum block [[0, xi*], [xi, 0]] with xi = g exp(-i theta) + 1.
ComplexMatrix h_ssh_block(double g, double theta);
ComplexMatrix dh_ssh_block_dg(double theta);

ComplexMatrix k_ssh_adiabatic(double g, double theta, double t, Complex a1 = {}, Complex a2 = {});

// Continuous at theta = pi (limit [[0, t e^{i theta}], [t e^{-i theta}], 0]] as |xi| -> 0).
ComplexMatrix k_ssh_regular(double g, double theta, double t);

// 2N x 2N block-diagonal chain, blocks at theta_k = 2 pi k / N.
ComplexMatrix assemble_ssh_chain(int N, double g);
ComplexMatrix assemble_ssh_chain_dg(int N, double g);

HamiltonianFamily ep_family();
HamiltonianFamily ssh_block_family(double theta);  // parameter is g
HamiltonianFamily ssh_chain_family(int N);         // parameter is g

// One scan point: a family in the differentiation parameter, the coordinate to
// evaluate it at, and the model's closed-form K there when one exists.
struct ModelPoint {
  HamiltonianFamily fam;
  double q = 0.0;
  std::function<ComplexMatrix(double)> closed_k;  // null if no closed form
};

struct ModelDescriptor {
  std::string name;
  int dim = 0;
  std::map<std::string, double> params;
  std::vector<std::string> sweep_params;
  std::string default_sweep;
  std::vector<double> grid;  // fixed q grid (custom models); empty otherwise
  std::function<ModelPoint(const std::string& sweep_param, double value)> point;
  std::function<std::vector<double>(const std::string& sweep_param)> critical_points;
};

// Built-in models: ep2x2 {gamma}, ssh-block {g, theta}, ssh-chain {N, g}.
ModelDescriptor make_model(const std::string& name, const std::map<std::string, double>& params);
std::vector<std::string> list_models();

// JSON file with H (and optionally dH) sampled on a q grid.
ModelDescriptor load_custom_model(const std::string& path);

}  // namespace emk
