#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  json doc;  // parsed stdout when it is JSON, else null
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(ISEC_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.doc = json::parse(res.out, nullptr, /*allow_exceptions=*/false);
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

// One shared scratch directory with the generated 3x3 grid corpus.
struct Workspace {
  fs::path dir;

  Workspace() {
    std::string templ =
        (fs::temp_directory_path() / "isec_cli_XXXXXX").string();
    REQUIRE(mkdtemp(templ.data()) != nullptr);
    dir = templ;
    auto gen = run("generate --kind grid --cols 3 --rows 3 --out " +
                   (dir / "g1").string());
    REQUIRE(gen.code == 0);
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string g1(const std::string& name) const {
    return (dir / "g1" / name).string();
  }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("validate accepts the generated grid") {
  auto r = run("validate --instance " + ws().g1("instance.json") +
               " --section " + ws().g1("identity.json") + " --section " +
               ws().g1("zigzag.json"));
  CHECK(r.code == 0);
  REQUIRE(r.doc.is_object());
  CHECK(r.doc["verdict"] == "verified");
  CHECK(r.doc["result"]["points"] == 9);
  CHECK(r.doc["result"]["labels"] == 3);
  CHECK(r.doc["result"]["measure"] == true);
  CHECK(r.doc["result"]["sections_ok"] == 2);
}

TEST_CASE("check splits verified and falsified by exit code") {
  const std::string base = "check --instance " + ws().g1("instance.json") +
                           " --section " + ws().g1("zigzag.json");
  auto good = run(base + " --L 2 --M 0 --oracle");
  CHECK(good.code == 0);
  CHECK(good.doc["verdict"] == "verified");
  CHECK(good.doc["result"]["is_qi_section"] == true);
  CHECK(good.doc["result"]["witness"].is_null());

  auto bad = run(base + " --L 1 --M 0");
  CHECK(bad.code == 2);
  CHECK(bad.doc["verdict"] == "falsified");
  const json& w = bad.doc["result"]["witness"];
  CHECK(w["y1"] == 0);
  CHECK(w["y2"] == 1);
  CHECK(w["graph_dist"] == 2.0);
  CHECK(w["fiber_dist"] == 1.0);
}

TEST_CASE("malformed inputs exit 1 with an error report") {
  auto missing = run("check --instance /nonexistent.json --section " +
                     ws().g1("zigzag.json") + " --L 1 --M 0");
  CHECK(missing.code == 1);
  CHECK(missing.doc["verdict"] == "input-error");

  // Break the triangle inequality and expect the named witness.
  json doc = json::parse(slurp(ws().g1("instance.json")));
  doc["metric"]["dist"][0][2] = 9;
  doc["metric"]["dist"][2][0] = 9;
  spit(ws().path("broken.json"), doc.dump());
  auto broken = run("validate --instance " + ws().path("broken.json"));
  CHECK(broken.code == 1);
  const std::string err = broken.doc["result"]["error"];
  CHECK(err.find("triangle") != std::string::npos);

  auto flag = run("check --instance x --section y --nonsense");
  CHECK(flag.code != 0);
  auto nosub = run("");
  CHECK(nosub.code != 0);
}

TEST_CASE("frontier reports vertices, values, and minimal L") {
  auto r = run("frontier --instance " + ws().g1("instance.json") +
               " --section " + ws().g1("zigzag.json") +
               " --at 1.5 --minimal-l 0");
  CHECK(r.code == 0);
  const json& f = r.doc["result"]["frontier"];
  CHECK(f["L_flat"] == 2.0);
  CHECK(f["vertices"] == json::parse("[[1.0,1.0],[2.0,0.0]]"));
  CHECK(f["segments"][0]["a"] == 2.0);
  CHECK(f["segments"][0]["b"] == 1.0);
  CHECK(r.doc["result"]["value_at"]["M"] == 0.5);
  CHECK(r.doc["result"]["minimal_L"]["L"] == 2.0);
}

TEST_CASE("cone criterion agrees with the definition") {
  const std::string base = "cones --instance " + ws().g1("instance.json") +
                           " --section " + ws().g1("zigzag.json");
  auto hit = run(base + " --L 1 --M 0");
  CHECK(hit.code == 2);
  CHECK(hit.doc["result"]["avoids_cones"] == false);
  CHECK(hit.doc["result"]["agrees_with_definition"] == true);
  CHECK_FALSE(hit.doc["result"]["witness"].is_null());

  auto clear = run(base + " --L 2 --M 0");
  CHECK(clear.code == 0);
  CHECK(clear.doc["result"]["witness"].is_null());
}

TEST_CASE("relative comparison through a base label") {
  const std::string base = "relative --instance " + ws().g1("instance.json") +
                           " --phi " + ws().g1("zigzag.json") + " --psi " +
                           ws().g1("identity.json") + " --base 0";
  auto ok = run(base + " --L 1 --M 1");
  CHECK(ok.code == 0);
  CHECK(ok.doc["result"]["is_relative_qi"] == true);

  auto bad = run(base + " --L 1 --M 0");
  CHECK(bad.code == 2);
  CHECK(bad.doc["result"]["witness"]["y1"] == 1);

  auto strong = run(base + " --L 1 --M 1 --strong");
  CHECK(strong.code == 0);
  CHECK(strong.doc["result"]["strong"] == true);

  // Sections disagreeing at the base label are an input error.
  auto mis = run("relative --instance " + ws().g1("instance.json") +
                 " --phi " + ws().g1("zigzag.json") + " --psi " +
                 ws().g1("identity.json") + " --base 1 --L 1 --M 1");
  CHECK(mis.code == 1);
}

TEST_CASE("relation subcommand checks the three properties") {
  // Third section through (0,0): the diagonal.
  json diag{{"choice", {{"0", {0, 0}}, {"1", {1, 1}}, {"2", {2, 2}}}}};
  spit(ws().path("diag.json"), diag.dump());
  auto r = run("relation --instance " + ws().g1("instance.json") +
               " --sections " + ws().g1("identity.json") + " " +
               ws().g1("zigzag.json") + " " + ws().path("diag.json") +
               " --base 0");
  CHECK(r.code == 0);
  CHECK(r.doc["result"]["reflexive_ok"] == true);
  CHECK(r.doc["result"]["symmetric_ok"] == true);
  CHECK(r.doc["result"]["transitive_ok"] == true);
  CHECK(r.doc["result"]["pairs"].size() == 9);
  CHECK(r.doc["result"]["chains"].size() == 6);
}

TEST_CASE("algebra on a sampled linear instance") {
  json lin{{"linear",
            {{"A", {{1, 0}}},
             {"norm", "l2"},
             {"y_grid", {{0}, {1}, {2}}},
             {"scale", 1}}},
           {"samples",
            {{{0, 0}, {0, 1}, {0, 2}},
             {{1, 0}, {1, 1}, {1, 2}},
             {{2, 0}, {2, 1}, {2, 2}}}}};
  spit(ws().path("linear.json"), lin.dump());
  json zig{{"choice", {{"0", {0, 0}}, {"1", {1, 2}}, {"2", {2, 0}}}}};
  json flat{{"choice", {{"0", {0, 0}}, {"1", {1, 0}}, {"2", {2, 0}}}}};
  spit(ws().path("zig.json"), zig.dump());
  spit(ws().path("flat.json"), flat.dump());

  const std::string base = "algebra --linear " + ws().path("linear.json");
  auto conv = run(base + " --op convex --phi " + ws().path("zig.json") +
                  " --eta " + ws().path("flat.json") + " --psi " +
                  ws().path("flat.json") + " --base 0 --t 0.5");
  CHECK(conv.code == 0);
  CHECK(conv.doc["result"]["check"]["hypothesis_ok"] == true);
  CHECK(conv.doc["result"]["check"]["conclusion_ok"] == true);
  CHECK(conv.doc["result"]["check"]["predicted_constants"]["L"] == 1.5);

  auto sum = run(base + " --op sum --phi " + ws().path("zig.json") +
                 " --eta " + ws().path("flat.json"));
  CHECK(sum.code == 0);
  CHECK(sum.doc["result"]["scale"] == 2.0);

  auto sc = run(base + " --op scalar --phi " + ws().path("zig.json") +
                " --beta -2");
  CHECK(sc.code == 0);
  CHECK(sc.doc["result"]["scale"] == -2.0);

  auto incomplete = run(base + " --op convex --phi " + ws().path("zig.json"));
  CHECK(incomplete.code == 1);
}

TEST_CASE("regularity battery on the wide grid") {
  auto gen = run("generate --kind grid --cols 9 --rows 3 --out " +
                 ws().path("g9"));
  REQUIRE(gen.code == 0);
  auto r = run("regularity --instance " + ws().path("g9/instance.json") +
               " --section " + ws().path("g9/zigzag.json") + " --reference " +
               ws().path("g9/identity.json") +
               " --Q 1 --r0 1 --radii 2,3,4,5 --L 2 --M 0");
  CHECK(r.code == 0);
  CHECK(r.doc["verdict"] == "verified");
  const json& res = r.doc["result"];
  CHECK(res["homogeneity"]["feasible"] == true);
  CHECK(res["homogeneity"]["C"] == 1.0);
  CHECK(res["ad_estimate"]["c1"] == 1.0);
  CHECK(res["ad_estimate"]["c2"] == 1.8);
  CHECK(res["sandwich"]["c3"] == 0.5);
  CHECK(res["sandwich"]["c4"] == 3.6);
  CHECK(res["sandwich"]["all_ok"] == true);
  CHECK(res["inclusions"]["ok"] == true);
}

TEST_CASE("report battery computes constants when omitted") {
  auto r = run("report --instance " + ws().g1("instance.json") +
               " --section " + ws().g1("zigzag.json"));
  CHECK(r.code == 0);
  CHECK(r.doc["inputs"]["constants_source"] == "computed");
  CHECK(r.doc["result"]["constants"]["L"] == 2.0);
  CHECK(r.doc["result"]["constants"]["M"] == 0.0);
  CHECK(r.doc["result"]["is_qi_section"] == true);
  CHECK(r.doc["result"]["criteria_agree"] == true);

  auto pinned = run("report --instance " + ws().g1("instance.json") +
                    " --section " + ws().g1("zigzag.json") + " --L 1 --M 0");
  CHECK(pinned.code == 2);
  CHECK(pinned.doc["inputs"]["constants_source"] == "given");

  auto half = run("report --instance " + ws().g1("instance.json") +
                  " --section " + ws().g1("zigzag.json") + " --L 1");
  CHECK(half.code == 1);  // --L without --M
}

TEST_CASE("reports are byte-stable and land in --output files") {
  const std::string base = "report --instance " + ws().g1("instance.json") +
                           " --section " + ws().g1("zigzag.json");
  auto a = run(base);
  auto b = run(base);
  CHECK(a.out == b.out);

  auto f1 = run(base + " --output " + ws().path("r1.json"));
  auto f2 = run(base + " --output " + ws().path("r2.json"));
  CHECK(f1.code == 0);
  CHECK(f1.out.empty());
  CHECK(slurp(ws().path("r1.json")) == slurp(ws().path("r2.json")));
  CHECK(slurp(ws().path("r1.json")) == a.out);
}

TEST_CASE("generation is deterministic per seed") {
  auto r1 = run("generate --kind random --seed 7 --count 2 --out " +
                ws().path("rnd_a"));
  auto r2 = run("generate --kind random --seed 7 --count 2 --out " +
                ws().path("rnd_b"));
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(slurp(ws().path("rnd_a/instance.json")) ==
        slurp(ws().path("rnd_b/instance.json")));
  CHECK(slurp(ws().path("rnd_a/section_0.json")) ==
        slurp(ws().path("rnd_b/section_0.json")));
  CHECK(r1.doc["result"]["written"].size() == 3);

  auto r3 = run("generate --kind random --seed 8 --count 2 --out " +
                ws().path("rnd_c"));
  REQUIRE(r3.code == 0);
  CHECK(slurp(ws().path("rnd_a/instance.json")) !=
        slurp(ws().path("rnd_c/instance.json")));

  // Generated randoms are valid instances with usable sections.
  auto v = run("validate --instance " + ws().path("rnd_a/instance.json") +
               " --section " + ws().path("rnd_a/section_0.json") +
               " --section " + ws().path("rnd_a/section_1.json"));
  CHECK(v.code == 0);
}

TEST_CASE("generated cyclic and linear corpora load back") {
  auto c = run("generate --kind cyclic --m 4 --k 3 --out " +
               ws().path("cyc"));
  REQUIRE(c.code == 0);
  auto v = run("check --instance " + ws().path("cyc/instance.json") +
               " --section " + ws().path("cyc/zero.json") + " --L 1 --M 2");
  CHECK(v.code == 0);

  auto l = run("generate --kind linear --seed 3 --n 2 --dim 1 --grid-lo -2 "
               "--grid-hi 2 --samples 3 --count 2 --out " +
               ws().path("lin"));
  REQUIRE(l.code == 0);
  auto sc = run("algebra --linear " + ws().path("lin/linear.json") +
                " --op scalar --phi " + ws().path("lin/section_0.json") +
                " --beta 2");
  CHECK(sc.code == 0);
}

TEST_CASE("text format flattens the report") {
  auto r = run("frontier --instance " + ws().g1("instance.json") +
               " --section " + ws().g1("zigzag.json") + " --format text");
  CHECK(r.code == 0);
  CHECK_FALSE(r.doc.is_object());  // not JSON
  // Scalar values render as JSON literals, so strings keep their quotes.
  CHECK(r.out.find("verdict = \"verified\"") != std::string::npos);
  CHECK(r.out.find("result.frontier.L_flat = 2") != std::string::npos);
}
