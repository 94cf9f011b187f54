#pragma once

#include "emk/models.hpp"

namespace emk {

enum class ScanGauge { Adiabatic, RegularDP, RegularEP, ClosedForm };

const char* to_string(ScanGauge g);
ScanGauge parse_gauge(const std::string& name);  // "adiabatic" | "regular-dp" | "regular-ep" | "closed-form"

struct ScanTolerances {
  double gap_tol_rel = kDefaultGapTolRel;
  double ep_tol = kDefaultEpTol;
  double residual_tol_adiabatic = 1e-9;
  double residual_tol_fd = 1e-6;  // 100 h^2 at h = 1e-4
  double fd_step = 1e-4;
  double ep_neighborhood = 0.5;  // regular-ep gauge max distance from a critical point
};

struct SweepSpec {
  std::string param;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
};

struct ScanConfig {
  std::string model;
  std::map<std::string, double> params;
  std::string model_file;  // custom model JSON
  SweepSpec sweep;         // empty param: model default (custom: its grid)
  ScanGauge gauge = ScanGauge::Adiabatic;
  double t_ref = 1.0;
  ScanTolerances tol;
  int workers = 1;
  std::string out_path;
  std::string format = "csv";
};

inline constexpr unsigned kFlagKnormUnavailable = 1u;
inline constexpr unsigned kFlagChiUnavailable = 2u;
inline constexpr unsigned kFlagResidualExceeded = 4u;
inline constexpr unsigned kFlagGaugeSkipped = 8u;

struct ScanRecord {
  double q = 0.0;
  PointClass classification = PointClass::Regular;
  double gap = 0.0;
  double knorm = 0.0;  // Frobenius norm of K(t_ref); NaN when unavailable
  Complex chi{};       // eigenstate-0 susceptibility; NaN at non-Regular points
  double residual = 0.0;
  unsigned flags = 0;
};

std::vector<ScanRecord> scan(const ScanConfig& cfg);

// CSV columns: q,class,gap,knorm,chi_re,chi_im,residual,flags. Shortest round-trip floats.
std::string render_csv(const std::vector<ScanRecord>& recs);
std::string render_json(const std::vector<ScanRecord>& recs);
std::vector<ScanRecord> parse_records_json(const std::string& text);
std::vector<ScanRecord> parse_records_csv(const std::string& text);

struct PowerLawFit {
  double exponent = 0.0;
  double r2 = 0.0;
  double coeff = 0.0;  // exp(intercept)
  int n_points = 0;
};

// Least-squares fit of log y vs log x.
PowerLawFit fit_powerlaw(const std::vector<double>& x, const std::vector<double>& y);

// Fit of log(quantity) vs log|q - q_star| over the window; quantity "knorm" or "chi".
PowerLawFit fit_divergence(const std::vector<ScanRecord>& recs, double q_star, Interval window,
                           const std::string& quantity = "knorm");

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
};

struct VerifyReport {
  bool pass = false;
  std::vector<VerifyCheck> checks;
  std::string to_json() const;
};

struct VerifyConfig {
  std::string model;
  std::map<std::string, double> params;
  std::string model_file;
  ScanGauge gauge = ScanGauge::Adiabatic;
  double q = 0.0;
  bool has_q = false;  // default: model-specific sample point
  double t_ref = 1.0;
  ScanTolerances tol;
  bool corrupt_k = false;  // verify the verifier: zero K must fail
};

VerifyReport verify(const VerifyConfig& cfg);

}  // namespace emk
