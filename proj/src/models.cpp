#include "emk/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emk {

namespace {
constexpr Complex kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;
}  // namespace

ComplexMatrix h_ep(double gamma) {
  ComplexMatrix H(2, 2);
  H << kI * gamma, 1.0, 1.0, -kI * gamma;
  return H;
}

ComplexMatrix dh_ep() {
  ComplexMatrix D(2, 2);
  D << kI, 0.0, 0.0, -kI;
  return D;
}

ComplexMatrix k_ep_adiabatic(double gamma, double t, Complex a1, Complex a2) {
  double den = gamma * gamma - 1.0;
  if (std::abs(den) < 1e-12)
    raise(errc::EPParam, "adiabatic form is singular at the coalescence parameter");
  ComplexMatrix K(2, 2);
  K(0, 0) = kI * gamma * gamma * t / den + a1 + kI * gamma * a2;
  K(1, 1) = -kI * gamma * gamma * t / den + a1 - kI * gamma * a2;
  K(0, 1) = (2.0 * gamma * t + 1.0) / (2.0 * den) + a2;
  K(1, 0) = (2.0 * gamma * t - 1.0) / (2.0 * den) + a2;
  return K;
}

ComplexMatrix k_ep_regular(double gamma, double t) {
  ComplexMatrix K(2, 2);
  if (std::abs(gamma - 1.0) < 1e-12) {
    double t2 = t * t, t3 = t2 * t;
    K(0, 0) = kI * (3.0 * t - 2.0 * t3) / 3.0;
    K(0, 1) = (-2.0 * t3 - 3.0 * t2) / 3.0;
    K(1, 0) = (-2.0 * t3 + 3.0 * t2) / 3.0;
    K(1, 1) = kI * (2.0 * t3 - 3.0 * t) / 3.0;
    return K;
  }
  if (std::abs(gamma + 1.0) < 1e-12) {
    double t2 = t * t, t3 = t2 * t;
    K(0, 0) = kI * (3.0 * t - 2.0 * t3) / 3.0;
    K(0, 1) = (2.0 * t3 - 3.0 * t2) / 3.0;
    K(1, 0) = (2.0 * t3 + 3.0 * t2) / 3.0;
    K(1, 1) = kI * (2.0 * t3 - 3.0 * t) / 3.0;
    return K;
  }
  Complex zeta = std::sqrt(Complex(1.0 - gamma * gamma, 0.0));
  Complex z3 = zeta * zeta * zeta;
  Complex s = std::sin(2.0 * zeta * t);
  Complex co = std::cos(2.0 * zeta * t);
  double g2 = gamma * gamma;
  K(0, 0) = (kI * s - 2.0 * kI * zeta * g2 * t) / (2.0 * z3);
  K(0, 1) = (gamma * s + zeta * (co - 2.0 * gamma * t - 1.0)) / (2.0 * z3);
  K(1, 0) = (gamma * s - zeta * (co + 2.0 * gamma * t - 1.0)) / (2.0 * z3);
  K(1, 1) = -K(0, 0);
  return K;
}

ComplexMatrix h_ssh_block(double g, double theta) {
  Complex xi = g * std::exp(-kI * theta) + 1.0;
  ComplexMatrix H(2, 2);
  H << 0.0, std::conj(xi), xi, 0.0;
  return H;
}

ComplexMatrix dh_ssh_block_dg(double theta) {
  ComplexMatrix D(2, 2);
  D << 0.0, std::exp(kI * theta), std::exp(-kI * theta), 0.0;
  return D;
}

ComplexMatrix k_ssh_adiabatic(double g, double theta, double t, Complex a1, Complex a2) {
  Complex xi = g * std::exp(-kI * theta) + 1.0;
  double xi2 = std::norm(xi);
  if (xi2 < 1e-24)
    raise(errc::DPParam, "adiabatic form is singular where the gap closes");
  Complex eip = std::exp(kI * theta);
  double dxi2 = 2.0 * (g + std::cos(theta));
  ComplexMatrix K(2, 2);
  K(0, 0) = kI * (xi * eip - std::conj(xi * eip)) / (2.0 * xi2) + a1;
  K(1, 1) = a1;
  K(0, 1) = t * std::conj(xi) * dxi2 / (2.0 * xi2) + a2 * std::conj(xi);
  K(1, 0) = t * xi * dxi2 / (2.0 * xi2) + a2 * xi;
  return K;
}

ComplexMatrix k_ssh_regular(double g, double theta, double t) {
  Complex xi = g * std::exp(-kI * theta) + 1.0;
  double r = std::abs(xi);
  ComplexMatrix K(2, 2);
  if (r < 1e-8) {
    K << 0.0, t * std::exp(kI * theta), t * std::exp(-kI * theta), 0.0;
    return K;
  }
  double s = std::sin(theta);
  double a = std::cos(theta) + g;
  double sn = std::sin(2.0 * r * t);
  double cs = std::cos(2.0 * r * t);
  K(0, 0) = s * (cs - 1.0) / (2.0 * r * r);
  K(1, 1) = -K(0, 0);
  K(0, 1) = (kI * s * sn + 2.0 * a * r * t) / (2.0 * xi * r);
  K(1, 0) = (-kI * s * sn + 2.0 * a * r * t) / (2.0 * std::conj(xi) * r);
  return K;
}

ComplexMatrix assemble_ssh_chain(int N, double g) {
  if (N < 2) raise(errc::InvalidArgument, "chain needs at least two cells");
  ComplexMatrix H = ComplexMatrix::Zero(2 * N, 2 * N);
  for (int k = 0; k < N; ++k) {
    double theta = 2.0 * kPi * k / N;
    H.block(2 * k, 2 * k, 2, 2) = h_ssh_block(g, theta);
  }
  return H;
}

ComplexMatrix assemble_ssh_chain_dg(int N, double) {
  if (N < 2) raise(errc::InvalidArgument, "chain needs at least two cells");
  ComplexMatrix D = ComplexMatrix::Zero(2 * N, 2 * N);
  for (int k = 0; k < N; ++k) {
    double theta = 2.0 * kPi * k / N;
    D.block(2 * k, 2 * k, 2, 2) = dh_ssh_block_dg(theta);
  }
  return D;
}

HamiltonianFamily ep_family() {
  HamiltonianFamily fam;
  fam.dim = 2;
  fam.H = [](double q) { return h_ep(q); };
  fam.dH = [](double) { return dh_ep(); };
  fam.q_domain = {-3.0, 3.0};
  fam.critical_points = {-1.0, 1.0};
  return fam;
}

HamiltonianFamily ssh_block_family(double theta) {
  HamiltonianFamily fam;
  fam.dim = 2;
  fam.H = [theta](double g) { return h_ssh_block(g, theta); };
  fam.dH = [theta](double) { return dh_ssh_block_dg(theta); };
  fam.q_domain = {-4.0, 4.0};
  double d0 = std::remainder(theta, 2.0 * kPi);
  if (std::abs(d0) < 1e-9)
    fam.critical_points = {-1.0};
  else if (std::abs(std::abs(d0) - kPi) < 1e-9)
    fam.critical_points = {1.0};
  return fam;
}

HamiltonianFamily ssh_chain_family(int N) {
  if (N < 2) raise(errc::InvalidArgument, "chain needs at least two cells");
  HamiltonianFamily fam;
  fam.dim = 2 * N;
  fam.H = [N](double g) { return assemble_ssh_chain(N, g); };
  fam.dH = [N](double g) { return assemble_ssh_chain_dg(N, g); };
  fam.q_domain = {-4.0, 4.0};
  fam.critical_points = {-1.0};
  if (N % 2 == 0) fam.critical_points.push_back(1.0);
  return fam;
}

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : params) {
    (void)v;
    bool ok = false;
    for (const char* a : allowed)
      if (k == a) ok = true;
    if (!ok) raise(errc::InvalidArgument, "unknown parameter '" + k + "'");
  }
}

ModelDescriptor make_ep_descriptor(const std::map<std::string, double>& params) {
  reject_unknown(params, {"gamma"});
  ModelDescriptor md;
  md.name = "ep2x2";
  md.dim = 2;
  md.params = {{"gamma", get_param(params, "gamma", 0.0)}};
  md.sweep_params = {"gamma"};
  md.default_sweep = "gamma";
  md.point = [](const std::string& sweep_param, double v) -> ModelPoint {
    if (sweep_param != "gamma")
      raise(errc::InvalidArgument, "ep2x2 sweeps over 'gamma' only");
    ModelPoint mp;
    mp.fam = ep_family();
    mp.q = v;
    mp.closed_k = [v](double t) { return k_ep_regular(v, t); };
    return mp;
  };
  md.critical_points = [](const std::string&) { return std::vector<double>{-1.0, 1.0}; };
  return md;
}

ModelDescriptor make_ssh_block_descriptor(const std::map<std::string, double>& params) {
  reject_unknown(params, {"g", "theta"});
  double g0 = get_param(params, "g", 0.5);
  double th0 = get_param(params, "theta", kPi);
  ModelDescriptor md;
  md.name = "ssh-block";
  md.dim = 2;
  md.params = {{"g", g0}, {"theta", th0}};
  md.sweep_params = {"g", "theta"};
  md.default_sweep = "g";
  md.point = [g0, th0](const std::string& sweep_param, double v) -> ModelPoint {
    ModelPoint mp;
    if (sweep_param == "g") {
      mp.fam = ssh_block_family(th0);
      mp.q = v;
      mp.closed_k = [v, th0](double t) { return k_ssh_regular(v, th0, t); };
    } else if (sweep_param == "theta") {
      mp.fam.dim = 2;
      mp.fam.H = [g0](double th) { return h_ssh_block(g0, th); };
      // derivative along the swept parameter
      mp.fam.dH = [g0](double th) {
        Complex kIloc(0.0, 1.0);
        ComplexMatrix D(2, 2);
        Complex dxi = -kIloc * g0 * std::exp(-kIloc * th);
        D << 0.0, std::conj(dxi), dxi, 0.0;
        return D;
      };
      mp.fam.q_domain = {-8.0, 8.0};
      if (std::abs(g0 - 1.0) < 1e-9)
        mp.fam.critical_points = {kPi};
      else if (std::abs(g0 + 1.0) < 1e-9)
        mp.fam.critical_points = {0.0, 2.0 * kPi};
      mp.q = v;
      mp.closed_k = nullptr;
    } else {
      raise(errc::InvalidArgument, "ssh-block sweeps over 'g' or 'theta'");
    }
    return mp;
  };
  md.critical_points = [g0, th0](const std::string& sweep_param) -> std::vector<double> {
    if (sweep_param == "g") {
      double d0 = std::remainder(th0, 2.0 * kPi);
      if (std::abs(d0) < 1e-9) return {-1.0};
      if (std::abs(std::abs(d0) - kPi) < 1e-9) return {1.0};
      return {};
    }
    if (std::abs(g0 - 1.0) < 1e-9) return {kPi};
    if (std::abs(g0 + 1.0) < 1e-9) return {0.0, 2.0 * kPi};
    return {};
  };
  return md;
}

ModelDescriptor make_ssh_chain_descriptor(const std::map<std::string, double>& params) {
  reject_unknown(params, {"N", "g"});
  double Nd = get_param(params, "N", 4.0);
  int N = static_cast<int>(std::lround(Nd));
  if (std::abs(Nd - N) > 1e-9 || N < 2)
    raise(errc::InvalidArgument, "N must be an integer >= 2");
  double g0 = get_param(params, "g", 0.5);
  ModelDescriptor md;
  md.name = "ssh-chain";
  md.dim = 2 * N;
  md.params = {{"N", static_cast<double>(N)}, {"g", g0}};
  md.sweep_params = {"g"};
  md.default_sweep = "g";
  md.point = [N](const std::string& sweep_param, double v) -> ModelPoint {
    if (sweep_param != "g")
      raise(errc::InvalidArgument, "ssh-chain sweeps over 'g' only");
    ModelPoint mp;
    mp.fam = ssh_chain_family(N);
    mp.q = v;
    mp.closed_k = [N, v](double t) {
      ComplexMatrix K = ComplexMatrix::Zero(2 * N, 2 * N);
      for (int k = 0; k < N; ++k) {
        double theta = 2.0 * kPi * k / N;
        K.block(2 * k, 2 * k, 2, 2) = k_ssh_regular(v, theta, t);
      }
      return K;
    };
    return mp;
  };
  md.critical_points = [N](const std::string&) -> std::vector<double> {
    std::vector<double> cp = {-1.0};
    if (N % 2 == 0) cp.push_back(1.0);
    return cp;
  };
  return md;
}

}  // namespace

ModelDescriptor make_model(const std::string& name,
                           const std::map<std::string, double>& params) {
  if (name == "ep2x2") return make_ep_descriptor(params);
  if (name == "ssh-block") return make_ssh_block_descriptor(params);
  if (name == "ssh-chain") return make_ssh_chain_descriptor(params);
  if (name == "custom")
    raise(errc::InvalidArgument, "custom models load from a file, not by name");
  raise(errc::UnknownModel, "no model named '" + name + "'");
}

std::vector<std::string> list_models() { return {"ep2x2", "ssh-block", "ssh-chain", "custom"}; }

}  // namespace emk
