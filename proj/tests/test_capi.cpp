#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <emk/emk.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

namespace {

// RAII over the C handles so failures don't leak across test cases.
struct Model {
  emk_model* m = nullptr;
  ~Model() { emk_model_close(m); }
};

struct Scan {
  emk_scan_result* r = nullptr;
  ~Scan() { emk_scan_free(r); }
};

struct Str {
  char* s = nullptr;
  ~Str() { emk_string_free(s); }
};

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& body) : path("./" + name) {
    std::ofstream out(path);
    out << body;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kGridModel = R"({
  "name": "grid2",
  "dim": 2,
  "q": [0.0, 0.5, 1.0],
  "H": [
    [[0.9, 0.0], [0.1, 0.0], [0.2, 0.0], [-0.8, 0.0]],
    [[1.05, 0.0], [0.1, 0.0], [0.2, 0.0], [-0.65, 0.0]],
    [[1.2, 0.0], [0.1, 0.0], [0.2, 0.0], [-0.5, 0.0]]
  ]
})";

}  // namespace

TEST_CASE("version and status names") {
  REQUIRE(emk_version() != nullptr);
  CHECK(std::strlen(emk_version()) > 0);
  CHECK(std::string(emk_status_name(EMK_OK)) == "ok");
  CHECK(std::string(emk_status_name(EMK_ERR_INVALID_ARGUMENT)) == "invalid_argument");
  CHECK(std::string(emk_status_name(EMK_ERR_UNKNOWN_MODEL)) == "unknown_model");
  CHECK(std::string(emk_status_name(EMK_ERR_CLASSIFICATION)) == "classification");
  CHECK(std::string(emk_status_name(EMK_ERR_INSUFFICIENT_DATA)) == "insufficient_data");
}

TEST_CASE("models listing") {
  Str out;
  REQUIRE(emk_models_json(&out.s) == EMK_OK);
  nlohmann::json arr = nlohmann::json::parse(out.s);
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 4);
  bool saw_ep = false;
  for (const auto& e : arr) {
    if (e.at("name") == "ep2x2") {
      saw_ep = true;
      CHECK(e.at("dim") == 2);
      CHECK(e.at("default_sweep") == "gamma");
    }
  }
  CHECK(saw_ep);
}

TEST_CASE("model handles: matrices cross the boundary row-major interleaved") {
  Model em;
  REQUIRE(emk_model_open("ep2x2", nullptr, &em.m) == EMK_OK);
  int dim = 0;
  REQUIRE(emk_model_dim(em.m, &dim) == EMK_OK);
  REQUIRE(dim == 2);

  double H[8];
  REQUIRE(emk_model_hamiltonian(em.m, 0.7, H) == EMK_OK);
  CHECK(H[0] == 0.0);   // re(0,0)
  CHECK(H[1] == 0.7);   // im(0,0)
  CHECK(H[2] == 1.0);   // re(0,1)
  CHECK(H[3] == 0.0);
  CHECK(H[4] == 1.0);   // re(1,0)
  CHECK(H[5] == 0.0);
  CHECK(H[6] == 0.0);
  CHECK(H[7] == -0.7);  // im(1,1)

  double dH[8];
  REQUIRE(emk_model_dhamiltonian(em.m, 0.7, dH) == EMK_OK);
  CHECK(dH[1] == 1.0);
  CHECK(dH[7] == -1.0);
  CHECK(dH[0] == 0.0);
  CHECK(dH[2] == 0.0);
  CHECK(dH[4] == 0.0);
}

TEST_CASE("classification through the C boundary") {
  Model em;
  REQUIRE(emk_model_open("ep2x2", nullptr, &em.m) == EMK_OK);
  int cls = -1;
  double gap = 0.0, min_sv = 0.0;
  REQUIRE(emk_model_classify(em.m, 0.5, &cls, &gap, &min_sv) == EMK_OK);
  CHECK(cls == EMK_CLASS_REGULAR);
  CHECK(gap == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(min_sv == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
  REQUIRE(emk_model_classify(em.m, 1.0, &cls, &gap, &min_sv) == EMK_OK);
  CHECK(cls == EMK_CLASS_EP);
  CHECK(gap < 1e-6);
  CHECK(min_sv < 1e-6);
}

TEST_CASE("evolution generator values through the C boundary") {
  Model em;
  REQUIRE(emk_model_open("ep2x2", nullptr, &em.m) == EMK_OK);
  double K[8];
  REQUIRE(emk_model_k(em.m, EMK_GAUGE_ADIABATIC, 0.5, 1.0, K) == EMK_OK);
  CHECK(std::abs(K[0]) < 1e-14);
  CHECK(K[1] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(K[2] == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(K[3]) < 1e-14);
  CHECK(std::abs(K[4]) < 1e-14);
  CHECK(std::abs(K[5]) < 1e-14);
  CHECK(std::abs(K[6]) < 1e-14);
  CHECK(K[7] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // adiabatic gauge is singular at the coalescence point
  CHECK(emk_model_k(em.m, EMK_GAUGE_ADIABATIC, 1.0, 1.0, K) == EMK_ERR_CLASSIFICATION);
  CHECK(std::strlen(emk_last_error()) > 0);
  // ... the closed form is not
  REQUIRE(emk_model_k(em.m, EMK_GAUGE_CLOSED_FORM, 1.0, 1.0, K) == EMK_OK);
  CHECK(std::string(emk_last_error()).empty());
  double fro = 0.0;
  for (double v : K) fro += v * v;
  CHECK(std::sqrt(fro) == doctest::Approx(1.763834207376394).epsilon(1e-12));
  // ... and neither is the continuation gauge, which must agree with it
  double Kc[8];
  REQUIRE(emk_model_k(em.m, EMK_GAUGE_REGULAR_EP, 1.0, 1.0, Kc) == EMK_OK);
  for (int i = 0; i < 8; ++i) CHECK(Kc[i] == doctest::Approx(K[i]).epsilon(1e-5));

  // far from any critical point the continuation gauge refuses
  CHECK(emk_model_k(em.m, EMK_GAUGE_REGULAR_EP, 0.1, 1.0, K) == EMK_ERR_CLASSIFICATION);
  CHECK(emk_model_k(em.m, static_cast<emk_gauge>(17), 0.5, 1.0, K) ==
        EMK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("susceptibility and fidelity through the C boundary") {
  Model em;
  REQUIRE(emk_model_open("ep2x2", nullptr, &em.m) == EMK_OK);
  double re = 0.0, im = 0.0;
  REQUIRE(emk_model_susceptibility(em.m, 0, 0.0, &re, &im) == EMK_OK);
  CHECK(re == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(std::abs(im) < 1e-12);
  CHECK(emk_model_susceptibility(em.m, 5, 0.0, &re, &im) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_model_susceptibility(em.m, 0, 1.0, &re, &im) == EMK_ERR_CLASSIFICATION);

  double value = 0.0, imag = 0.0;
  REQUIRE(emk_model_fidelity(em.m, 0, 0.5, 1e-3, &value, &imag) == EMK_OK);
  CHECK(std::abs(imag) < 1e-10);
  // 1 - F ~ chi * eps^2 with chi = -4/9 at this point
  CHECK((value - 1.0) / 1e-6 == doctest::Approx(4.0 / 9.0).epsilon(1e-2));
}

TEST_CASE("open failures set the thread error message") {
  Model em;
  CHECK(emk_model_open("nope", nullptr, &em.m) == EMK_ERR_UNKNOWN_MODEL);
  CHECK(em.m == nullptr);
  CHECK(std::strlen(emk_last_error()) > 0);
  CHECK(emk_model_open("ep2x2", "{bad json", &em.m) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_model_open("ep2x2", "{\"zeta\": 1.0}", &em.m) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_model_open("ep2x2", "[1,2]", &em.m) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_model_open(nullptr, nullptr, &em.m) == EMK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("custom model file through the C boundary") {
  TempFile f("capi_custom.json", kGridModel);
  Model em;
  REQUIRE(emk_model_open_custom(f.path.c_str(), &em.m) == EMK_OK);
  int dim = 0;
  REQUIRE(emk_model_dim(em.m, &dim) == EMK_OK);
  CHECK(dim == 2);
  double H[8];
  REQUIRE(emk_model_hamiltonian(em.m, 0.5, H) == EMK_OK);
  CHECK(H[0] == 1.05);
  CHECK(H[2] == 0.1);
  CHECK(H[4] == 0.2);
  CHECK(H[6] == -0.65);
  int cls = -1;
  REQUIRE(emk_model_classify(em.m, 0.5, &cls, nullptr, nullptr) == EMK_OK);
  CHECK(cls == EMK_CLASS_REGULAR);
  Model missing;
  CHECK(emk_model_open_custom("./no_such_file.json", &missing.m) == EMK_ERR_IO);
}

TEST_CASE("scan handles: run, inspect, render, parse") {
  Scan sc;
  REQUIRE(emk_scan_run(R"({"model": "ep2x2",
                           "sweep": {"param": "gamma", "start": -2, "stop": 2, "step": 0.01},
                           "gauge": "adiabatic"})",
                       &sc.r) == EMK_OK);
  REQUIRE(emk_scan_size(sc.r) == 401);
  emk_scan_record rec;
  REQUIRE(emk_scan_record_at(sc.r, 100, &rec) == EMK_OK);
  CHECK(rec.q == -1.0);
  CHECK(rec.classification == EMK_CLASS_EP);
  CHECK(std::isnan(rec.knorm));
  CHECK(rec.flags == 3u);
  REQUIRE(emk_scan_record_at(sc.r, 200, &rec) == EMK_OK);
  CHECK(rec.q == 0.0);
  CHECK(rec.chi_re == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(rec.flags == 0u);
  CHECK(emk_scan_record_at(sc.r, 401, &rec) == EMK_ERR_INVALID_ARGUMENT);

  Str csv, csv2, js;
  REQUIRE(emk_scan_render(sc.r, "csv", &csv.s) == EMK_OK);
  REQUIRE(emk_scan_render(sc.r, "json", &js.s) == EMK_OK);
  CHECK(emk_scan_render(sc.r, "yaml", &csv2.s) == EMK_ERR_INVALID_ARGUMENT);

  Scan back;
  REQUIRE(emk_scan_parse(csv.s, "csv", &back.r) == EMK_OK);
  REQUIRE(emk_scan_size(back.r) == 401);
  REQUIRE(emk_scan_render(back.r, "csv", &csv2.s) == EMK_OK);
  CHECK(std::strcmp(csv.s, csv2.s) == 0);
  Scan jback;
  REQUIRE(emk_scan_parse(js.s, "json", &jback.r) == EMK_OK);
  Str js2;
  REQUIRE(emk_scan_render(jback.r, "json", &js2.s) == EMK_OK);
  CHECK(std::strcmp(js.s, js2.s) == 0);
  Scan bad;
  CHECK(emk_scan_parse("{", "json", &bad.r) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_scan_run("{\"sweep\": {}}", &bad.r) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_scan_run("{\"model\": \"nope\"}", &bad.r) == EMK_ERR_UNKNOWN_MODEL);
}

TEST_CASE("power-law fit through the C boundary") {
  Scan sc;
  REQUIRE(emk_scan_run(R"({"model": "ep2x2",
                           "sweep": {"param": "gamma", "start": 0.9, "stop": 0.999, "step": 0.001},
                           "gauge": "adiabatic"})",
                       &sc.r) == EMK_OK);
  REQUIRE(emk_scan_size(sc.r) == 100);
  Str out;
  REQUIRE(emk_fit(sc.r, 1.0, 0.899, 1.0, "knorm", &out.s) == EMK_OK);
  nlohmann::json fit = nlohmann::json::parse(out.s);
  CHECK(fit.at("exponent").get<double>() == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(fit.at("r2").get<double>() > 0.999);
  CHECK(fit.at("n_points").get<int>() == 100);
  Str bad;
  CHECK(emk_fit(sc.r, 1.0, 0.899, 1.0, "gap", &bad.s) == EMK_ERR_INVALID_ARGUMENT);
  CHECK(emk_fit(sc.r, 1.0, 0.9989, 0.999, "knorm", &bad.s) == EMK_ERR_INSUFFICIENT_DATA);
}

TEST_CASE("verification through the C boundary") {
  Str rep;
  int pass = 0;
  REQUIRE(emk_verify_run(R"({"model": "ep2x2", "gauge": "adiabatic"})", &rep.s, &pass) == EMK_OK);
  CHECK(pass == 1);
  nlohmann::json j = nlohmann::json::parse(rep.s);
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("checks").size() == 3);

  Str rep2;
  REQUIRE(emk_verify_run(R"({"model": "ep2x2", "gauge": "adiabatic", "corrupt_k": true})",
                         &rep2.s, &pass) == EMK_OK);
  CHECK(pass == 0);

  Str rep3;
  CHECK(emk_verify_run(R"({"model": "nope"})", &rep3.s, &pass) == EMK_ERR_UNKNOWN_MODEL);
  CHECK(emk_verify_run("not json", &rep3.s, &pass) == EMK_ERR_INVALID_ARGUMENT);
}
