#include <emk/emk.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

int fail_api(emk_status st) {
  std::cerr << "error (" << emk_status_name(st) << "): " << emk_last_error() << "\n";
  return 2;
}

json params_to_json(const std::vector<std::string>& params) {
  json obj = json::object();
  for (const std::string& kv : params) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string val = kv.substr(eq + 1);
    try {
      size_t used = 0;
      double v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      obj[key] = v;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--param", "value for '" + key + "' is not numeric");
    }
  }
  return obj;
}

json sweep_to_json(const std::string& sweep) {
  // name:start:stop:step
  std::vector<std::string> parts;
  size_t pos = 0;
  while (true) {
    size_t c = sweep.find(':', pos);
    if (c == std::string::npos) {
      parts.push_back(sweep.substr(pos));
      break;
    }
    parts.push_back(sweep.substr(pos, c - pos));
    pos = c + 1;
  }
  if (parts.size() != 4)
    throw CLI::ValidationError("--sweep", "expected name:start:stop:step");
  json s;
  s["param"] = parts[0];
  try {
    s["start"] = std::stod(parts[1]);
    s["stop"] = std::stod(parts[2]);
    s["step"] = std::stod(parts[3]);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--sweep", "start/stop/step must be numeric");
  }
  return s;
}

int write_text(const std::string& out_path, const char* text) {
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open '" << out_path << "' for writing\n";
    return 2;
  }
  f << text;
  return f.good() ? 0 : 2;
}

std::string guess_format(const std::string& path, const std::string& given) {
  if (!given.empty()) return given;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return "json";
  return "csv";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolution-generator toolkit for parameter-dependent Hamiltonians"};
  app.require_subcommand(1);

  // ---- models ----
  CLI::App* models = app.add_subcommand("models", "list built-in models");

  // ---- scan ----
  CLI::App* scan = app.add_subcommand("scan", "sweep a parameter and record K data per point");
  std::string s_model, s_model_file, s_sweep, s_gauge = "adiabatic", s_out, s_format = "csv";
  std::vector<std::string> s_params;
  double s_tref = 1.0;
  int s_workers = 1;
  scan->add_option("--model", s_model, "model name (ep2x2|ssh-block|ssh-chain|custom)")
      ->required();
  scan->add_option("--param", s_params, "model parameter override key=value");
  scan->add_option("--model-file", s_model_file, "JSON file for --model custom");
  scan->add_option("--sweep", s_sweep, "sweep range name:start:stop:step");
  scan->add_option("--gauge", s_gauge, "adiabatic|regular-dp|regular-ep|closed-form");
  scan->add_option("--t-ref", s_tref, "reference time for knorm");
  scan->add_option("--out", s_out, "output file (default stdout)");
  scan->add_option("--format", s_format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  scan->add_option("--workers", s_workers, "worker threads")->envname("EMK_WORKERS");

  // ---- verify ----
  CLI::App* verify = app.add_subcommand("verify", "check a gauge construction at one point");
  std::string v_model, v_model_file, v_gauge = "adiabatic", v_out;
  std::vector<std::string> v_params;
  double v_q = 0.0, v_tref = 1.0;
  bool v_has_q = false, v_corrupt = false;
  verify->add_option("--model", v_model, "model name")->required();
  verify->add_option("--param", v_params, "model parameter override key=value");
  verify->add_option("--model-file", v_model_file, "JSON file for --model custom");
  verify->add_option("--gauge", v_gauge, "adiabatic|regular-dp|regular-ep|closed-form");
  verify->add_option("--q", v_q, "evaluation point (default model-specific)")
      ->each([&](const std::string&) { v_has_q = true; });
  verify->add_option("--t-ref", v_tref, "reference time");
  verify->add_flag("--corrupt-k", v_corrupt, "replace K by zero; the checks must fail");
  verify->add_option("--out", v_out, "report file (default stdout)");

  // ---- fit ----
  CLI::App* fit = app.add_subcommand("fit", "power-law fit of scan output near a critical point");
  std::string f_in, f_format, f_quantity = "knorm";
  double f_qstar = 0.0;
  std::string f_window;
  fit->add_option("--in", f_in, "scan output file (csv or json)")->required();
  fit->add_option("--format", f_format, "csv|json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json", ""}));
  fit->add_option("--q-star", f_qstar, "critical point")->required();
  fit->add_option("--window", f_window, "fit window lo:hi")->required();
  fit->add_option("--quantity", f_quantity, "knorm|chi")
      ->check(CLI::IsMember({"knorm", "chi"}));

  // ---- fidelity ----
  CLI::App* fid = app.add_subcommand("fidelity", "eigenstate fidelity across a parameter step");
  std::string d_model, d_model_file;
  std::vector<std::string> d_params;
  int d_n = 0;
  double d_q = 0.0, d_eps = 1e-3;
  fid->add_option("--model", d_model, "model name")->required();
  fid->add_option("--param", d_params, "model parameter override key=value");
  fid->add_option("--model-file", d_model_file, "JSON file for --model custom");
  fid->add_option("--n", d_n, "eigenstate index (ascending eigenvalue order)");
  fid->add_option("--q", d_q, "evaluation point")->required();
  fid->add_option("--eps", d_eps, "parameter step");

  CLI11_PARSE(app, argc, argv);

  if (models->parsed()) {
    char* text = nullptr;
    emk_status st = emk_models_json(&text);
    if (st != EMK_OK) return fail_api(st);
    std::cout << text;
    emk_string_free(text);
    return 0;
  }

  if (scan->parsed()) {
    json cfg;
    cfg["model"] = s_model;
    cfg["params"] = params_to_json(s_params);
    if (!s_model_file.empty()) cfg["model_file"] = s_model_file;
    if (!s_sweep.empty()) cfg["sweep"] = sweep_to_json(s_sweep);
    cfg["gauge"] = s_gauge;
    cfg["t_ref"] = s_tref;
    cfg["workers"] = s_workers;
    emk_scan_result* res = nullptr;
    emk_status st = emk_scan_run(cfg.dump().c_str(), &res);
    if (st != EMK_OK) return fail_api(st);
    char* text = nullptr;
    st = emk_scan_render(res, s_format.c_str(), &text);
    emk_scan_free(res);
    if (st != EMK_OK) return fail_api(st);
    int rc = write_text(s_out, text);
    emk_string_free(text);
    return rc;
  }

  if (verify->parsed()) {
    json cfg;
    cfg["model"] = v_model;
    cfg["params"] = params_to_json(v_params);
    if (!v_model_file.empty()) cfg["model_file"] = v_model_file;
    cfg["gauge"] = v_gauge;
    if (v_has_q) cfg["q"] = v_q;
    cfg["t_ref"] = v_tref;
    cfg["corrupt_k"] = v_corrupt;
    char* report = nullptr;
    int pass = 0;
    emk_status st = emk_verify_run(cfg.dump().c_str(), &report, &pass);
    if (st != EMK_OK) return fail_api(st);
    int rc = write_text(v_out, report);
    emk_string_free(report);
    if (rc != 0) return rc;
    return pass ? 0 : 1;
  }

  if (fit->parsed()) {
    std::ifstream in(f_in, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open '" << f_in << "'\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    size_t colon = f_window.find(':');
    if (colon == std::string::npos) {
      std::cerr << "error: --window expects lo:hi\n";
      return 2;
    }
    double lo = 0, hi = 0;
    try {
      lo = std::stod(f_window.substr(0, colon));
      hi = std::stod(f_window.substr(colon + 1));
    } catch (const std::exception&) {
      std::cerr << "error: --window expects numeric lo:hi\n";
      return 2;
    }
    emk_scan_result* res = nullptr;
    emk_status st =
        emk_scan_parse(text.c_str(), guess_format(f_in, f_format).c_str(), &res);
    if (st != EMK_OK) return fail_api(st);
    char* out = nullptr;
    st = emk_fit(res, f_qstar, lo, hi, f_quantity.c_str(), &out);
    emk_scan_free(res);
    if (st != EMK_OK) return fail_api(st);
    std::cout << out;
    emk_string_free(out);
    return 0;
  }

  if (fid->parsed()) {
    emk_model* m = nullptr;
    emk_status st;
    if (d_model == "custom") {
      if (d_model_file.empty()) {
        std::cerr << "error: --model custom needs --model-file\n";
        return 2;
      }
      st = emk_model_open_custom(d_model_file.c_str(), &m);
    } else {
      st = emk_model_open(d_model.c_str(), params_to_json(d_params).dump().c_str(), &m);
    }
    if (st != EMK_OK) return fail_api(st);
    double fv = 0, fi = 0;
    st = emk_model_fidelity(m, d_n, d_q, d_eps, &fv, &fi);
    if (st != EMK_OK) {
      emk_model_close(m);
      return fail_api(st);
    }
    double chi_re = 0, chi_im = 0;
    st = emk_model_susceptibility(m, d_n, d_q, &chi_re, &chi_im);
    emk_model_close(m);
    if (st != EMK_OK) return fail_api(st);
    json out;
    out["q"] = d_q;
    out["eps"] = d_eps;
    out["n"] = d_n;
    out["fidelity"] = fv;
    out["fidelity_imag"] = fi;
    out["chi_re"] = chi_re;
    out["chi_im"] = chi_im;
    out["deficit_over_eps2"] = (1.0 - fv) / (d_eps * d_eps);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  return 2;
}
