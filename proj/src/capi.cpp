#include "emk/emk.h"

#include "emk/epgauge.hpp"
#include "emk/models.hpp"
#include "emk/scan.hpp"
#include "emk/transport.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <string>

using namespace emk;
using nlohmann::json;

struct emk_model {
  ModelDescriptor md;
};

struct emk_scan_result {
  std::vector<ScanRecord> recs;
};

namespace {

thread_local std::string g_last_error;

emk_status map_error(errc c) {
  switch (c) {
    case errc::InvalidArgument:
    case errc::DimensionMismatch:
      return EMK_ERR_INVALID_ARGUMENT;
    case errc::UnknownModel:
      return EMK_ERR_UNKNOWN_MODEL;
    case errc::SingularP:
      return EMK_ERR_SINGULAR;
    case errc::EPInput:
    case errc::EPParam:
    case errc::DPParam:
    case errc::DegenerateSpectrum:
    case errc::DegenerateLambdas:
    case errc::AdiabaticSingular:
    case errc::DegenerateDenominator:
    case errc::NotDefective:
    case errc::MultiBlock:
    case errc::NotSingleBlock:
    case errc::BranchMismatch:
    case errc::NeighborhoodTooWide:
      return EMK_ERR_CLASSIFICATION;
    case errc::NonConvergence:
    case errc::PositivityLost:
    case errc::StepSizeTooLarge:
    case errc::ZeroAnchor:
      return EMK_ERR_NUMERIC;
    case errc::IoError:
      return EMK_ERR_IO;
    case errc::InsufficientData:
      return EMK_ERR_INSUFFICIENT_DATA;
    default:
      return EMK_ERR_INTERNAL;
  }
}

template <class F>
emk_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const Error& e) {
    g_last_error = std::string(errc_name(e.code())) + ": " + e.what();
    return map_error(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EMK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return EMK_ERR_INTERNAL;
  }
}

emk_status fail_arg(const char* msg) {
  g_last_error = msg;
  return EMK_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::map<std::string, double> parse_params(const char* params_json) {
  std::map<std::string, double> params;
  if (!params_json || !*params_json) return params;
  json j;
  try {
    j = json::parse(params_json);
  } catch (const json::exception& e) {
    raise(errc::InvalidArgument, std::string("bad params JSON: ") + e.what());
  }
  if (!j.is_object()) raise(errc::InvalidArgument, "params must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      raise(errc::InvalidArgument, "parameter '" + it.key() + "' must be numeric");
    params[it.key()] = it.value().get<double>();
  }
  return params;
}

void write_matrix(const ComplexMatrix& M, double* out) {
  const Eigen::Index n = M.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      out[2 * (i * n + j)] = M(i, j).real();
      out[2 * (i * n + j) + 1] = M(i, j).imag();
    }
}

ScanTolerances parse_tolerances(const json& j) {
  ScanTolerances tol;
  if (j.is_null()) return tol;
  if (!j.is_object()) raise(errc::InvalidArgument, "tolerances must be a JSON object");
  auto num = [&](const char* key, double& slot) {
    if (j.contains(key)) {
      if (!j.at(key).is_number())
        raise(errc::InvalidArgument, std::string("tolerance '") + key + "' must be numeric");
      slot = j.at(key).get<double>();
    }
  };
  num("gap_tol_rel", tol.gap_tol_rel);
  num("ep_tol", tol.ep_tol);
  num("residual_tol_adiabatic", tol.residual_tol_adiabatic);
  num("residual_tol_fd", tol.residual_tol_fd);
  num("fd_step", tol.fd_step);
  num("ep_neighborhood", tol.ep_neighborhood);
  return tol;
}

ModelPoint model_point(const emk_model* m, double q) {
  return m->md.point(m->md.default_sweep, q);
}

}  // namespace

extern "C" {

const char* emk_version(void) { return "0.1.0"; }

const char* emk_status_name(emk_status s) {
  switch (s) {
    case EMK_OK: return "ok";
    case EMK_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case EMK_ERR_UNKNOWN_MODEL: return "unknown_model";
    case EMK_ERR_SINGULAR: return "singular";
    case EMK_ERR_CLASSIFICATION: return "classification";
    case EMK_ERR_NUMERIC: return "numeric";
    case EMK_ERR_IO: return "io";
    case EMK_ERR_INSUFFICIENT_DATA: return "insufficient_data";
    case EMK_ERR_INTERNAL: return "internal";
  }
  return "?";
}

const char* emk_last_error(void) { return g_last_error.c_str(); }

void emk_string_free(char* s) { std::free(s); }

emk_status emk_models_json(char** out_json) {
  if (!out_json) return fail_arg("out_json is null");
  return guarded([&]() -> emk_status {
    json arr = json::array();
    for (const std::string& name : list_models()) {
      json e;
      e["name"] = name;
      if (name == "custom") {
        e["params"] = json::object();
        e["sweep_params"] = json::array({"q"});
        e["default_sweep"] = "q";
      } else {
        ModelDescriptor md = make_model(name, {});
        e["dim"] = md.dim;
        e["params"] = json::object();
        for (const auto& [k, v] : md.params) e["params"][k] = v;
        e["sweep_params"] = md.sweep_params;
        e["default_sweep"] = md.default_sweep;
      }
      arr.push_back(std::move(e));
    }
    *out_json = dup_string(arr.dump(2) + "\n");
    return *out_json ? EMK_OK : EMK_ERR_INTERNAL;
  });
}

emk_status emk_model_open(const char* name, const char* params_json, emk_model** out) {
  if (!name || !out) return fail_arg("name/out is null");
  *out = nullptr;
  return guarded([&]() -> emk_status {
    auto params = parse_params(params_json);
    auto* m = new emk_model{make_model(name, params)};
    *out = m;
    return EMK_OK;
  });
}

emk_status emk_model_open_custom(const char* path, emk_model** out) {
  if (!path || !out) return fail_arg("path/out is null");
  *out = nullptr;
  return guarded([&]() -> emk_status {
    auto* m = new emk_model{load_custom_model(path)};
    *out = m;
    return EMK_OK;
  });
}

void emk_model_close(emk_model* m) { delete m; }

emk_status emk_model_dim(const emk_model* m, int* out_dim) {
  if (!m || !out_dim) return fail_arg("model/out_dim is null");
  *out_dim = m->md.dim;
  return EMK_OK;
}

emk_status emk_model_hamiltonian(const emk_model* m, double q, double* out) {
  if (!m || !out) return fail_arg("model/out is null");
  return guarded([&]() -> emk_status {
    ModelPoint mp = model_point(m, q);
    write_matrix(mp.fam.H(q), out);
    return EMK_OK;
  });
}

emk_status emk_model_dhamiltonian(const emk_model* m, double q, double* out) {
  if (!m || !out) return fail_arg("model/out is null");
  return guarded([&]() -> emk_status {
    ModelPoint mp = model_point(m, q);
    write_matrix(mp.fam.dH(q), out);
    return EMK_OK;
  });
}

emk_status emk_model_classify(const emk_model* m, double q, int* out_class, double* out_gap,
                              double* out_min_sv) {
  if (!m || !out_class) return fail_arg("model/out_class is null");
  return guarded([&]() -> emk_status {
    ModelPoint mp = model_point(m, q);
    Spectrum spec = eigendecompose(mp.fam.H(q));
    *out_class = static_cast<int>(spec.classification);
    if (out_gap) *out_gap = spec.min_gap;
    if (out_min_sv) *out_min_sv = spec.min_sv;
    return EMK_OK;
  });
}

emk_status emk_model_k(const emk_model* m, emk_gauge gauge, double q, double t, double* out) {
  if (!m || !out) return fail_arg("model/out is null");
  return guarded([&]() -> emk_status {
    ModelPoint mp = model_point(m, q);
    ComplexMatrix K;
    switch (gauge) {
      case EMK_GAUGE_ADIABATIC:
        K = solve_adiabatic(mp.fam, q).eval(t);
        break;
      case EMK_GAUGE_REGULAR_DP:
        K = regular_dp_k(mp.fam, q).eval(t);
        break;
      case EMK_GAUGE_REGULAR_EP: {
        double best = 0.0, bd = 1e300;
        for (double cp : mp.fam.critical_points) {
          double d = std::abs(q - cp);
          if (d < bd) {
            bd = d;
            best = cp;
          }
        }
        if (bd > 0.5)
          raise(errc::NeighborhoodTooWide, "no critical point within reach of q");
        ComplexMatrix K0 = ComplexMatrix::Zero(mp.fam.dim, mp.fam.dim);
        std::vector<double> grid = {std::min(0.0, t), std::max(0.0, t)};
        K = continuous_k_near_ep(mp.fam, best, q, grid, K0).eval(t);
        break;
      }
      case EMK_GAUGE_CLOSED_FORM:
        K = mp.closed_k ? mp.closed_k(t) : regular_dp_k(mp.fam, q).eval(t);
        break;
      default:
        raise(errc::InvalidArgument, "unknown gauge value");
    }
    write_matrix(K, out);
    return EMK_OK;
  });
}

emk_status emk_model_susceptibility(const emk_model* m, int n, double q, double* out_re,
                                    double* out_im) {
  if (!m || !out_re || !out_im) return fail_arg("model/out is null");
  return guarded([&]() -> emk_status {
    ModelPoint mp = model_point(m, q);
    Complex chi = susceptibility_oracle(mp.fam, n, q);
    *out_re = chi.real();
    *out_im = chi.imag();
    return EMK_OK;
  });
}

emk_status emk_model_fidelity(const emk_model* m, int n, double q, double eps, double* out_value,
                              double* out_imag) {
  if (!m || !out_value) return fail_arg("model/out_value is null");
  return guarded([&]() -> emk_status {
    ModelPoint mp = model_point(m, q);
    FidelityResult fr = eigenstate_fidelity(mp.fam, n, q, eps);
    *out_value = fr.value;
    if (out_imag) *out_imag = fr.imag;
    return EMK_OK;
  });
}

emk_status emk_scan_run(const char* config_json, emk_scan_result** out) {
  if (!config_json || !out) return fail_arg("config/out is null");
  *out = nullptr;
  return guarded([&]() -> emk_status {
    json j;
    try {
      j = json::parse(config_json);
    } catch (const json::exception& e) {
      raise(errc::InvalidArgument, std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("model") || !j.at("model").is_string())
      raise(errc::InvalidArgument, "config needs a 'model' string");
    ScanConfig cfg;
    cfg.model = j.at("model").get<std::string>();
    if (j.contains("params")) {
      if (!j.at("params").is_object())
        raise(errc::InvalidArgument, "'params' must be an object");
      for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
        if (!it.value().is_number())
          raise(errc::InvalidArgument, "parameter '" + it.key() + "' must be numeric");
        cfg.params[it.key()] = it.value().get<double>();
      }
    }
    if (j.contains("model_file")) cfg.model_file = j.at("model_file").get<std::string>();
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      if (!s.is_object()) raise(errc::InvalidArgument, "'sweep' must be an object");
      if (s.contains("param")) cfg.sweep.param = s.at("param").get<std::string>();
      if (s.contains("start")) cfg.sweep.start = s.at("start").get<double>();
      if (s.contains("stop")) cfg.sweep.stop = s.at("stop").get<double>();
      if (s.contains("step")) cfg.sweep.step = s.at("step").get<double>();
    }
    if (j.contains("gauge")) cfg.gauge = parse_gauge(j.at("gauge").get<std::string>());
    if (j.contains("t_ref")) cfg.t_ref = j.at("t_ref").get<double>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    if (j.contains("tolerances")) cfg.tol = parse_tolerances(j.at("tolerances"));
    auto* r = new emk_scan_result{scan(cfg)};
    *out = r;
    return EMK_OK;
  });
}

size_t emk_scan_size(const emk_scan_result* r) { return r ? r->recs.size() : 0; }

emk_status emk_scan_record_at(const emk_scan_result* r, size_t i, emk_scan_record* out) {
  if (!r || !out) return fail_arg("result/out is null");
  if (i >= r->recs.size()) return fail_arg("record index out of range");
  const ScanRecord& s = r->recs[i];
  out->q = s.q;
  out->classification = static_cast<int>(s.classification);
  out->gap = s.gap;
  out->knorm = s.knorm;
  out->chi_re = s.chi.real();
  out->chi_im = s.chi.imag();
  out->residual = s.residual;
  out->flags = s.flags;
  return EMK_OK;
}

emk_status emk_scan_render(const emk_scan_result* r, const char* format, char** out) {
  if (!r || !format || !out) return fail_arg("result/format/out is null");
  *out = nullptr;
  return guarded([&]() -> emk_status {
    std::string text;
    if (std::strcmp(format, "csv") == 0)
      text = render_csv(r->recs);
    else if (std::strcmp(format, "json") == 0)
      text = render_json(r->recs);
    else
      raise(errc::InvalidArgument, "format must be 'csv' or 'json'");
    *out = dup_string(text);
    return *out ? EMK_OK : EMK_ERR_INTERNAL;
  });
}

emk_status emk_scan_parse(const char* text, const char* format, emk_scan_result** out) {
  if (!text || !format || !out) return fail_arg("text/format/out is null");
  *out = nullptr;
  return guarded([&]() -> emk_status {
    std::vector<ScanRecord> recs;
    if (std::strcmp(format, "csv") == 0)
      recs = parse_records_csv(text);
    else if (std::strcmp(format, "json") == 0)
      recs = parse_records_json(text);
    else
      raise(errc::InvalidArgument, "format must be 'csv' or 'json'");
    *out = new emk_scan_result{std::move(recs)};
    return EMK_OK;
  });
}

void emk_scan_free(emk_scan_result* r) { delete r; }

emk_status emk_fit(const emk_scan_result* r, double q_star, double lo, double hi,
                   const char* quantity, char** out_json) {
  if (!r || !out_json) return fail_arg("result/out_json is null");
  *out_json = nullptr;
  return guarded([&]() -> emk_status {
    std::string qty = quantity ? quantity : "knorm";
    PowerLawFit fit = fit_divergence(r->recs, q_star, Interval{lo, hi}, qty);
    json j;
    j["exponent"] = fit.exponent;
    j["r2"] = fit.r2;
    j["coeff"] = fit.coeff;
    j["n_points"] = fit.n_points;
    *out_json = dup_string(j.dump(2) + "\n");
    return *out_json ? EMK_OK : EMK_ERR_INTERNAL;
  });
}

emk_status emk_verify_run(const char* config_json, char** out_report_json, int* out_pass) {
  if (!config_json || !out_report_json || !out_pass) return fail_arg("config/out is null");
  *out_report_json = nullptr;
  *out_pass = 0;
  return guarded([&]() -> emk_status {
    json j;
    try {
      j = json::parse(config_json);
    } catch (const json::exception& e) {
      raise(errc::InvalidArgument, std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("model") || !j.at("model").is_string())
      raise(errc::InvalidArgument, "config needs a 'model' string");
    VerifyConfig cfg;
    cfg.model = j.at("model").get<std::string>();
    if (j.contains("params")) {
      if (!j.at("params").is_object())
        raise(errc::InvalidArgument, "'params' must be an object");
      for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
        if (!it.value().is_number())
          raise(errc::InvalidArgument, "parameter '" + it.key() + "' must be numeric");
        cfg.params[it.key()] = it.value().get<double>();
      }
    }
    if (j.contains("model_file")) cfg.model_file = j.at("model_file").get<std::string>();
    if (j.contains("gauge")) cfg.gauge = parse_gauge(j.at("gauge").get<std::string>());
    if (j.contains("q")) {
      cfg.q = j.at("q").get<double>();
      cfg.has_q = true;
    }
    if (j.contains("t_ref")) cfg.t_ref = j.at("t_ref").get<double>();
    if (j.contains("tolerances")) cfg.tol = parse_tolerances(j.at("tolerances"));
    if (j.contains("corrupt_k")) cfg.corrupt_k = j.at("corrupt_k").get<bool>();
    VerifyReport rep = verify(cfg);
    *out_report_json = dup_string(rep.to_json());
    *out_pass = rep.pass ? 1 : 0;
    return *out_report_json ? EMK_OK : EMK_ERR_INTERNAL;
  });
}

}  // extern "C"
