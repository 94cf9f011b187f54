#include "emk/scan.hpp"

#include "emk/epgauge.hpp"
#include "emk/transport.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <thread>

namespace emk {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return kNaN;
  double v = kNaN;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    if (s == "nan" || s == "-nan") return kNaN;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    raise(errc::InvalidArgument, "bad numeric field '" + std::string(s) + "'");
  }
  return v;
}

PointClass parse_class(std::string_view s) {
  if (s == "Regular") return PointClass::Regular;
  if (s == "DP") return PointClass::DP;
  if (s == "EP") return PointClass::EP;
  raise(errc::InvalidArgument, "bad classification '" + std::string(s) + "'");
}

nlohmann::json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double json_num(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) raise(errc::InvalidArgument, std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return kNaN;
  if (!v.is_number()) raise(errc::InvalidArgument, std::string("field '") + key + "' not numeric");
  return v.get<double>();
}

}  // namespace

const char* to_string(ScanGauge g) {
  switch (g) {
    case ScanGauge::Adiabatic: return "adiabatic";
    case ScanGauge::RegularDP: return "regular-dp";
    case ScanGauge::RegularEP: return "regular-ep";
    case ScanGauge::ClosedForm: return "closed-form";
  }
  return "?";
}

ScanGauge parse_gauge(const std::string& name) {
  if (name == "adiabatic") return ScanGauge::Adiabatic;
  if (name == "regular-dp") return ScanGauge::RegularDP;
  if (name == "regular-ep") return ScanGauge::RegularEP;
  if (name == "closed-form") return ScanGauge::ClosedForm;
  raise(errc::InvalidArgument, "unknown gauge '" + name + "'");
}

namespace {

ModelDescriptor resolve_descriptor(const std::string& model,
                                   const std::map<std::string, double>& params,
                                   const std::string& model_file) {
  if (model == "custom") {
    if (model_file.empty())
      raise(errc::InvalidArgument, "custom model needs a model file");
    if (!params.empty())
      raise(errc::InvalidArgument, "custom models take no inline parameters");
    return load_custom_model(model_file);
  }
  return make_model(model, params);
}

std::vector<double> sweep_grid(const ModelDescriptor& md, const SweepSpec& sweep,
                               std::string& param_out) {
  param_out = sweep.param.empty() ? md.default_sweep : sweep.param;
  bool known = false;
  for (const auto& p : md.sweep_params)
    if (p == param_out) known = true;
  if (!known)
    raise(errc::InvalidArgument, "model has no sweep parameter '" + param_out + "'");

  if (sweep.param.empty() && sweep.step == 0.0) {
    if (!md.grid.empty()) return md.grid;
    raise(errc::InvalidArgument, "sweep range required for this model");
  }
  if (!(sweep.step > 0.0)) raise(errc::InvalidArgument, "sweep step must be positive");
  if (sweep.stop < sweep.start) raise(errc::InvalidArgument, "sweep stop precedes start");
  std::vector<double> g;
  for (size_t k = 0;; ++k) {
    double q = sweep.start + static_cast<double>(k) * sweep.step;
    if (q > sweep.stop + sweep.step * 1e-9) break;
    g.push_back(q);
  }
  return g;
}

struct PointResult {
  double knorm = kNaN;
  double residual = kNaN;
  unsigned flags = 0;
};

PointResult compute_k(const ModelPoint& mp, PointClass cls, ScanGauge gauge, double t_ref,
                      const ScanTolerances& tol) {
  PointResult pr;
  const ComplexMatrix H = mp.fam.H(mp.q);
  const ComplexMatrix dH = mp.fam.dH(mp.q);
  std::vector<double> probe = {0.0, 0.5 * t_ref, t_ref};
  if (t_ref == 0.0) probe = {0.0};
  try {
    switch (gauge) {
      case ScanGauge::Adiabatic: {
        LinearK k = solve_adiabatic(mp.fam, mp.q);
        pr.knorm = k.eval(t_ref).norm();
        pr.residual = pde_residual(k, H, dH);
        if (pr.residual > tol.residual_tol_adiabatic) pr.flags |= kFlagResidualExceeded;
        break;
      }
      case ScanGauge::RegularDP: {
        TimeK k = regular_dp_k(mp.fam, mp.q);
        pr.knorm = k.eval(t_ref).norm();
        pr.residual = pde_residual(k, H, dH, probe, tol.fd_step);
        if (pr.residual > tol.residual_tol_fd) pr.flags |= kFlagResidualExceeded;
        break;
      }
      case ScanGauge::RegularEP: {
        double best = kNaN, bd = 1e300;
        for (double cp : mp.fam.critical_points) {
          double d = std::abs(mp.q - cp);
          if (d < bd) {
            bd = d;
            best = cp;
          }
        }
        if (std::isnan(best) || bd > tol.ep_neighborhood) {
          pr.flags |= kFlagGaugeSkipped | kFlagKnormUnavailable;
          break;
        }
        ComplexMatrix K0 = ComplexMatrix::Zero(mp.fam.dim, mp.fam.dim);
        TimeK k = continuous_k_near_ep(mp.fam, best, mp.q, probe, K0, 0.0,
                                       tol.ep_neighborhood);
        pr.knorm = k.eval(t_ref).norm();
        pr.residual = pde_residual(k, H, dH, probe, tol.fd_step);
        if (pr.residual > tol.residual_tol_fd) pr.flags |= kFlagResidualExceeded;
        break;
      }
      case ScanGauge::ClosedForm: {
        if (mp.closed_k) {
          ComplexMatrix Kt = mp.closed_k(t_ref);
          pr.knorm = Kt.norm();
          TimeK k;
          k.gauge = GaugeTag::ClosedForm;
          k.t_domain = {-1e300, 1e300};
          k.eval = mp.closed_k;
          pr.residual = pde_residual(k, H, dH, probe, tol.fd_step);
        } else {
          TimeK k = regular_dp_k(mp.fam, mp.q);
          pr.knorm = k.eval(t_ref).norm();
          pr.residual = pde_residual(k, H, dH, probe, tol.fd_step);
        }
        if (pr.residual > tol.residual_tol_fd) pr.flags |= kFlagResidualExceeded;
        break;
      }
    }
  } catch (const Error&) {
    pr.knorm = kNaN;
    pr.residual = kNaN;
    pr.flags |= kFlagKnormUnavailable;
  }
  (void)cls;
  return pr;
}

ScanRecord compute_record(const ModelDescriptor& md, const std::string& param, double q,
                          ScanGauge gauge, double t_ref, const ScanTolerances& tol) {
  ScanRecord rec;
  rec.q = q;
  ModelPoint mp = md.point(param, q);
  Spectrum spec = eigendecompose(mp.fam.H(q), tol.gap_tol_rel, tol.ep_tol);
  rec.classification = spec.classification;
  rec.gap = spec.min_gap;

  PointResult pr = compute_k(mp, spec.classification, gauge, t_ref, tol);
  rec.knorm = pr.knorm;
  rec.residual = pr.residual;
  rec.flags = pr.flags;

  if (spec.classification == PointClass::Regular) {
    try {
      rec.chi = susceptibility_oracle(mp.fam, 0, q);
    } catch (const Error&) {
      rec.chi = Complex(kNaN, kNaN);
      rec.flags |= kFlagChiUnavailable;
    }
  } else {
    rec.chi = Complex(kNaN, kNaN);
    rec.flags |= kFlagChiUnavailable;
  }
  return rec;
}

}  // namespace

std::vector<ScanRecord> scan(const ScanConfig& cfg) {
  ModelDescriptor md = resolve_descriptor(cfg.model, cfg.params, cfg.model_file);
  std::string param;
  std::vector<double> grid = sweep_grid(md, cfg.sweep, param);
  if (!md.grid.empty() && cfg.sweep.step != 0.0) {
    // arithmetic sweep over a grid-backed model must land on grid points
    for (double q : grid) md.point(param, q);
  }

  std::vector<ScanRecord> out(grid.size());
  int workers = std::clamp(cfg.workers, 1, 64);
  if (static_cast<size_t>(workers) > grid.size())
    workers = static_cast<int>(std::max<size_t>(grid.size(), 1));
  if (workers <= 1) {
    for (size_t i = 0; i < grid.size(); ++i)
      out[i] = compute_record(md, param, grid[i], cfg.gauge, cfg.t_ref, cfg.tol);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
          out[i] = compute_record(md, param, grid[i], cfg.gauge, cfg.t_ref, cfg.tol);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string render_csv(const std::vector<ScanRecord>& recs) {
  std::string s = "q,class,gap,knorm,chi_re,chi_im,residual,flags\n";
  for (const auto& r : recs) {
    s += fmt_double(r.q);
    s += ',';
    s += to_string(r.classification);
    s += ',';
    s += fmt_double(r.gap);
    s += ',';
    s += fmt_double(r.knorm);
    s += ',';
    s += fmt_double(r.chi.real());
    s += ',';
    s += fmt_double(r.chi.imag());
    s += ',';
    s += fmt_double(r.residual);
    s += ',';
    s += std::to_string(r.flags);
    s += '\n';
  }
  return s;
}

std::string render_json(const std::vector<ScanRecord>& recs) {
  nlohmann::json root;
  root["records"] = nlohmann::json::array();
  for (const auto& r : recs) {
    nlohmann::json j;
    j["q"] = r.q;
    j["class"] = to_string(r.classification);
    j["gap"] = num_or_null(r.gap);
    j["knorm"] = num_or_null(r.knorm);
    j["chi_re"] = num_or_null(r.chi.real());
    j["chi_im"] = num_or_null(r.chi.imag());
    j["residual"] = num_or_null(r.residual);
    j["flags"] = r.flags;
    root["records"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::vector<ScanRecord> parse_records_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(errc::InvalidArgument, std::string("bad JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("records") || !root["records"].is_array())
    raise(errc::InvalidArgument, "expected an object with a 'records' array");
  std::vector<ScanRecord> recs;
  for (const auto& j : root["records"]) {
    ScanRecord r;
    r.q = json_num(j, "q");
    if (!j.contains("class") || !j.at("class").is_string())
      raise(errc::InvalidArgument, "record missing 'class'");
    r.classification = parse_class(j.at("class").get<std::string>());
    r.gap = json_num(j, "gap");
    r.knorm = json_num(j, "knorm");
    r.chi = Complex(json_num(j, "chi_re"), json_num(j, "chi_im"));
    r.residual = json_num(j, "residual");
    if (!j.contains("flags") || !j.at("flags").is_number_unsigned())
      raise(errc::InvalidArgument, "record missing 'flags'");
    r.flags = j.at("flags").get<unsigned>();
    recs.push_back(r);
  }
  return recs;
}

std::vector<ScanRecord> parse_records_csv(const std::string& text) {
  std::vector<ScanRecord> recs;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("q,", 0) == 0) continue;  // header row
    }
    std::vector<std::string_view> f;
    std::string_view sv(line);
    size_t pos = 0;
    while (true) {
      size_t c = sv.find(',', pos);
      if (c == std::string_view::npos) {
        f.push_back(sv.substr(pos));
        break;
      }
      f.push_back(sv.substr(pos, c - pos));
      pos = c + 1;
    }
    if (f.size() != 8) raise(errc::InvalidArgument, "CSV row needs 8 fields");
    ScanRecord r;
    r.q = parse_double(f[0]);
    r.classification = parse_class(f[1]);
    r.gap = parse_double(f[2]);
    r.knorm = parse_double(f[3]);
    r.chi = Complex(parse_double(f[4]), parse_double(f[5]));
    r.residual = parse_double(f[6]);
    r.flags = static_cast<unsigned>(parse_double(f[7]));
    recs.push_back(r);
  }
  return recs;
}

PowerLawFit fit_powerlaw(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) raise(errc::DimensionMismatch, "x and y lengths differ");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || y[i] == 0.0 || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  const size_t n = lx.size();
  if (n < 2) raise(errc::InsufficientData, "need at least two usable points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) raise(errc::InsufficientData, "x values collapse to a single point");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  double intercept = my - fit.exponent * mx;
  fit.coeff = std::exp(intercept);
  fit.n_points = static_cast<int>(n);
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ssres = 0;
    for (size_t i = 0; i < n; ++i) {
      double e = ly[i] - (intercept + fit.exponent * lx[i]);
      ssres += e * e;
    }
    fit.r2 = 1.0 - ssres / syy;
  }
  return fit;
}

PowerLawFit fit_divergence(const std::vector<ScanRecord>& recs, double q_star, Interval window,
                           const std::string& quantity) {
  bool use_knorm;
  if (quantity == "knorm")
    use_knorm = true;
  else if (quantity == "chi")
    use_knorm = false;
  else
    raise(errc::InvalidArgument, "quantity must be 'knorm' or 'chi'");
  std::vector<double> x, y;
  for (const auto& r : recs) {
    if (r.flags != 0) continue;
    if (!window.contains(r.q)) continue;
    double d = std::abs(r.q - q_star);
    if (!(d > 0.0)) continue;
    double v = use_knorm ? r.knorm : std::abs(r.chi);
    if (!std::isfinite(v) || v == 0.0) continue;
    x.push_back(d);
    y.push_back(v);
  }
  if (x.size() < 5) raise(errc::InsufficientData, "need at least five usable records");
  return fit_powerlaw(x, y);
}

namespace {

double default_verify_q(const ModelDescriptor& md) {
  if (md.name == "ep2x2") return 0.5;
  if (!md.grid.empty()) return md.grid[md.grid.size() / 2];
  auto it = md.params.find("g");
  if (it != md.params.end()) return it->second;
  return 0.5;
}

void push_check(VerifyReport& rep, const std::string& name, double value, double bound) {
  VerifyCheck c;
  c.name = name;
  c.value = value;
  c.bound = bound;
  c.pass = std::isfinite(value) && value <= bound;
  rep.checks.push_back(c);
}

}  // namespace

VerifyReport verify(const VerifyConfig& cfg) {
  VerifyReport rep;
  ModelDescriptor md = resolve_descriptor(cfg.model, cfg.params, cfg.model_file);
  double q = cfg.has_q ? cfg.q : default_verify_q(md);
  ModelPoint mp = md.point(md.default_sweep, q);
  const ComplexMatrix H = mp.fam.H(q);
  const ComplexMatrix dH = mp.fam.dH(q);
  const double t_ref = cfg.t_ref;
  std::vector<double> probe = linspace(0.0, std::max(t_ref, 1.0), 7);

  auto corrupted = [&](TimeK k) -> TimeK {
    if (!cfg.corrupt_k) return k;
    TimeK z;
    z.gauge = k.gauge;
    z.t_domain = k.t_domain;
    const Eigen::Index n = H.rows();
    z.eval = [n](double) { return ComplexMatrix::Zero(n, n); };
    return z;
  };

  try {
    switch (cfg.gauge) {
      case ScanGauge::Adiabatic: {
        LinearK k = solve_adiabatic(mp.fam, q);
        if (cfg.corrupt_k) {
          k.K1 = ComplexMatrix::Zero(H.rows(), H.cols());
          k.K0 = ComplexMatrix::Zero(H.rows(), H.cols());
        }
        push_check(rep, "pde_residual", pde_residual(k, H, dH, {0.0, 0.5 * t_ref, t_ref}),
                   cfg.tol.residual_tol_adiabatic);
        // compare against direct integration from K(0) of this gauge
        TimeK bf = brute_force_k(mp.fam, q, probe, k.eval(0.0));
        double mismatch = 0.0;
        for (double t : probe) mismatch = std::max(mismatch, max_abs(k.eval(t) - bf.eval(t)));
        push_check(rep, "oracle_match", mismatch, 1e-6);
        Spectrum spec = eigendecompose(H, cfg.tol.gap_tol_rel, cfg.tol.ep_tol);
        if (spec.classification == PointClass::Regular) {
          double worst = 0.0;
          for (const auto& E : residual_gauge_basis(spec))
            worst = std::max(worst, max_abs(commutator(E, H)));
          push_check(rep, "gauge_basis_commute", worst, 1e-10);
        }
        break;
      }
      case ScanGauge::RegularDP: {
        TimeK k = corrupted(regular_dp_k(mp.fam, q));
        push_check(rep, "pde_residual",
                   pde_residual(k, H, dH, {0.0, 0.5 * t_ref, t_ref}, cfg.tol.fd_step),
                   cfg.tol.residual_tol_fd);
        push_check(rep, "k_at_zero", max_abs(k.eval(0.0)), 1e-12);
        TimeK bf = brute_force_k(mp.fam, q, probe, ComplexMatrix::Zero(H.rows(), H.cols()));
        double mismatch = 0.0;
        for (double t : probe) mismatch = std::max(mismatch, max_abs(k.eval(t) - bf.eval(t)));
        push_check(rep, "oracle_match", mismatch, 1e-5);
        break;
      }
      case ScanGauge::RegularEP: {
        double best = kNaN, bd = 1e300;
        for (double cp : mp.fam.critical_points) {
          double d = std::abs(q - cp);
          if (d < bd) {
            bd = d;
            best = cp;
          }
        }
        if (std::isnan(best) || bd > cfg.tol.ep_neighborhood)
          raise(errc::NeighborhoodTooWide, "no critical point within reach of q");
        ComplexMatrix K0 = ComplexMatrix::Zero(H.rows(), H.cols());
        TimeK k = corrupted(
            continuous_k_near_ep(mp.fam, best, q, probe, K0, 0.0, cfg.tol.ep_neighborhood));
        push_check(rep, "pde_residual",
                   pde_residual(k, H, dH, {0.1, 0.5 * t_ref, t_ref}, cfg.tol.fd_step),
                   cfg.tol.residual_tol_fd);
        if (md.name == "ep2x2" && std::abs(best - 1.0) < 1e-12) {
          double mismatch = 0.0;
          for (double t : probe)
            mismatch = std::max(mismatch, max_abs(k.eval(t) - k_ep_regular(q, t)));
          push_check(rep, "ep_match", mismatch, 1e-5);
        }
        break;
      }
      case ScanGauge::ClosedForm: {
        if (!mp.closed_k)
          raise(errc::InvalidArgument, "model has no closed form along this sweep");
        TimeK k;
        k.gauge = GaugeTag::ClosedForm;
        k.t_domain = {-1e300, 1e300};
        k.eval = mp.closed_k;
        k = corrupted(k);
        push_check(rep, "pde_residual",
                   pde_residual(k, H, dH, {0.0, 0.5 * t_ref, t_ref}, cfg.tol.fd_step),
                   cfg.tol.residual_tol_fd);
        Spectrum spec = eigendecompose(H, cfg.tol.gap_tol_rel, cfg.tol.ep_tol);
        if (spec.classification != PointClass::EP) {
          TimeK dp = regular_dp_k(mp.fam, q);
          double mismatch = 0.0;
          for (double t : probe) mismatch = std::max(mismatch, max_abs(k.eval(t) - dp.eval(t)));
          push_check(rep, "matches_dp_gauge", mismatch, 1e-8);
        }
        break;
      }
    }
  } catch (const Error& e) {
    VerifyCheck c;
    c.name = std::string("error:") + errc_name(e.code());
    c.pass = false;
    c.value = kNaN;
    c.bound = 0.0;
    rep.checks.push_back(c);
  }

  rep.pass = !rep.checks.empty();
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

std::string VerifyReport::to_json() const {
  nlohmann::json root;
  root["pass"] = pass;
  root["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["value"] = num_or_null(c.value);
    j["bound"] = c.bound;
    root["checks"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

}  // namespace emk
