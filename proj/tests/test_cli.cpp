// Drives the amdsp binary through a shell, checking output and exit codes.
#include <nlohmann/json.hpp>

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + AMDSP_CLI + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string golden(const std::string& name) { return std::string(AMDSP_GOLDEN_DIR) + "/" + name; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return json::parse(s.str());
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("design --kind single, Example 1(i)") {
    const Run r = run("design --kind single --lower 1 --upper 9 --p1 0.01 --p2 0.06 --alpha 0.1 --beta 0.1");
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("kind") == "single");
    CHECK(doc.at("parameters").at("n") == 36);
    CHECK(std::abs(doc.at("parameters").at("k").get<double>() - 0.02645943143) <= 1e-6);
    CHECK(doc.at("provenance").at("requirement").at("p2") == 0.06);
  }

  TEST_CASE("exit codes") {
    CHECK(run("design --p1 0.05 --p2 0.05 --alpha 0.1 --beta 0.1 --lower 1 --upper 9").code == 3);
    CHECK(run("design --p1 0.01 --p2 0.06 --alpha 0.7 --beta 0.5 --lower 1 --upper 9").code == 3);
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("design --p1 0.01").code == 2);
    CHECK(run("design --kind triple --p1 0.01 --p2 0.06 --alpha 0.1 --beta 0.1 --lower 1 --upper 9").code == 2);
    CHECK(run("design --p1 0.01 --p2 0.06 --alpha 0.1 --beta 0.1 --lower 9 --upper 1").code == 2);
    CHECK(run("eval --plan " + golden("ex1_final.json") + " --mu 5 --sigma 0").code == 2);
    CHECK(run("eval --plan " + golden("ex1_final.json") + " --mu 5 --sigma -1").code == 2);
    CHECK(run("eval --plan /nonexistent.json --mu 5 --sigma 1").code == 2);
    CHECK(run("eval --plan " + golden("eval_cases.json") + " --mu 5 --sigma 1").code == 2);
    CHECK(run("band --plan " + golden("ex1_final.json") + " --p 1.5").code == 2);
    CHECK(run("band --plan " + golden("ex1_final.json") + " --p 0.03 --what median").code == 2);
    CHECK(run("simulate --plan " + golden("ex1_final.json") + " --mu 5 --sigma 2 --replicates 0").code == 2);
    CHECK(run("eval --plan " + golden("ex1_final.json") + " --mu 5 --sigma 2", "AMDSP_THREADS=zero").code == 2);
    // a tolerance the rule cannot reach
    CHECK(run("eval --plan " + golden("ex1_final.json") + " --mu 5 --sigma 2 --quad-nodes 8 --tol 1e-15").code == 4);
    CHECK(run("--help").code == 0);
  }

  TEST_CASE("eval matches the golden cases to 1e-6") {
    for (const json& c : read_json(golden("eval_cases.json"))) {
      const json& g = c.at("eval");
      std::ostringstream args;
      args.precision(17);
      args << "eval --plan " << golden(c.at("plan").get<std::string>()) << " --mu " << g.at("mu").get<double>()
           << " --sigma " << g.at("sigma").get<double>();
      const Run r = run(args.str(), "AMDSP_THREADS=1");
      REQUIRE(r.code == 0);
      const json e = json::parse(r.out);
      CHECK(std::abs(e.at("oc").get<double>() - g.at("oc").get<double>()) <= 1e-6);
      CHECK(std::abs(e.at("asn").get<double>() - g.at("asn").get<double>()) <= 1e-6);
      CHECK(e.at("oc_error").get<double>() <= 1e-6);
      CHECK(e.at("formula") == "exact");
    }
  }

  TEST_CASE("eval is symmetric under reflection") {
    const Run a = run("eval --plan " + golden("ex1_final.json") + " --mu 6.3 --sigma 1.2");
    const Run b = run("eval --plan " + golden("ex1_final.json") + " --mu 3.7 --sigma 1.2");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const json ja = json::parse(a.out), jb = json::parse(b.out);
    CHECK(std::abs(ja.at("oc").get<double>() - jb.at("oc").get<double>()) <= 1e-8);
    CHECK(std::abs(ja.at("asn").get<double>() - jb.at("asn").get<double>()) <= 1e-8);
    CHECK(ja.at("fraction_defective") == jb.at("fraction_defective"));
  }

  TEST_CASE("eval of a k1 = k2 plan equals the single plan") {
    const std::string dbl = "/tmp/amdsp_cli_flat_double.json", sgl = "/tmp/amdsp_cli_flat_single.json";
    std::ofstream(dbl) << R"({"schema_version":1,"kind":"double-two-sided","limits":{"lower":1,"upper":9},)"
                          R"("parameters":{"n1":20,"k1":0.03,"k2":0.03,"n2":10,"k3":0.02}})";
    std::ofstream(sgl) << R"({"schema_version":1,"kind":"single","limits":{"lower":1,"upper":9},)"
                          R"("parameters":{"n":20,"k":0.03}})";
    const json a = json::parse(run("eval --plan " + dbl + " --mu 6.1 --sigma 1.3").out);
    const json b = json::parse(run("eval --plan " + sgl + " --mu 6.1 --sigma 1.3").out);
    CHECK(std::abs(a.at("oc").get<double>() - b.at("oc").get<double>()) <= 1e-8);
    CHECK(a.at("asn") == 20.0);
    std::remove(dbl.c_str());
    std::remove(sgl.c_str());
  }

  TEST_CASE("simulate is deterministic and agrees with eval") {
    const std::string args = "--plan " + golden("ex1_final.json") + " --mu 6.6 --sigma 1.1";
    const Run s1 = run("simulate " + args + " --replicates 1000000 --seed 11");
    const Run s2 = run("simulate " + args + " --replicates 1000000 --seed 11", "AMDSP_THREADS=1");
    REQUIRE(s1.code == 0);
    CHECK(s1.out == s2.out);
    const json m = json::parse(s1.out);
    const json e = json::parse(run("eval " + args).out);
    CHECK(std::abs(m.at("acceptance_rate").get<double>() - e.at("oc").get<double>()) <=
          3 * m.at("se_acceptance").get<double>());
    CHECK(std::abs(m.at("asn_estimate").get<double>() - e.at("asn").get<double>()) <=
          3 * m.at("se_asn").get<double>());
  }

  TEST_CASE("band CSV") {
    const Run r = run("band --plan " + golden("ex1_final.json") + " --p 0.03 --points 10 --what asn");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "sigma,mu,oc,asn");
    int rows = 0;
    double prev = 0.0;
    while (std::getline(in, line)) {
      ++rows;
      double sigma = 0, mu = 0, asn = 0;
      char c1 = 0, c2 = 0, c3 = 0;
      std::istringstream cells(line);
      cells >> sigma >> c1 >> mu >> c2 >> c3 >> asn;
      CHECK(c3 == ',');  // empty oc column
      CHECK(sigma > prev);
      CHECK(asn >= 23.0);
      CHECK(asn <= 41.0);
      prev = sigma;
    }
    CHECK(rows == 10);
    const Run both = run("band --plan " + golden("ex1_final.json") + " --p 0.03 --points 4");
    CHECK(both.code == 0);
  }

  TEST_CASE("one-sided plan documents") {
    const std::string path = "/tmp/amdsp_cli_one_sided.json";
    std::ofstream(path) << R"({"schema_version":1,"kind":"double-one-sided","limits":{"lower":1,"upper":9},)"
                           R"("parameters":{"n1":23,"l1":-10.5,"l2":-8.4,"n2":18,"l3":-12.7}})";
    const Run r = run("eval --plan " + path + " --mu 7.0 --sigma 1.0");
    CHECK(r.code == 0);
    CHECK(json::parse(r.out).at("kind") == "double-one-sided");
    CHECK(run("band --plan " + path + " --p 0.03").code == 2);
    std::remove(path.c_str());
  }
}
