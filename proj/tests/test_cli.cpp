#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(ETSYM_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

fs::path tmpdir() {
  fs::path d(ETSYM_TEST_TMPDIR);
  fs::create_directories(d);
  return d;
}

std::string write_file(const std::string& name, const std::string& content) {
  fs::path p = tmpdir() / name;
  std::ofstream(p) << content;
  return p.string();
}

const char* kBlocks3 = R"([
  {"id":"T","kind":"trivial","p":3},
  {"id":"F","kind":"free_procyclic","p":3,"theta":[4]},
  {"id":"D","kind":"demushkin","p":3,"theta":[1,4],
   "presentation":{"generators":["x","y"],"relations":[[["x",4],["y",1],["x",-1],["y",-1]]]}},
  {"id":"C","kind":"custom","p":3,"theta":[1],
   "presentation":{"generators":["a"],"relations":[]},
   "bounds":[[1,1],[2,"inf"]]}
])";

const char* kHomRank3 = R"({
  "blocks": [{"id":"F","kind":"free_procyclic","p":3,"theta":[4]}],
  "construction": "<<<F>>>",
  "target": {"kind":"custom","p":3,"generators":[[[1,1],[0,1]]]},
  "images": {
    ":z": [[1,1],[0,1]],
    "E:z": [[1,1],[0,1]],
    "EE:z": [[1,2],[0,1]],
    "EEE:x": [[1,0],[0,1]]
  }
})";

} // namespace

TEST_CASE("cli: analyze reports and parse errors exit 2") {
  std::string blocks = write_file("blocks3.json", kBlocks3);
  auto ok = run_cli("analyze \"<(F * D)>\" --blocks " + blocks);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("\"extension_rank\": 1") != std::string::npos);
  CHECK(ok.out.find("\"principal_tuples\"") != std::string::npos);

  auto leaf = run_cli("analyze F --blocks " + blocks);
  CHECK(leaf.exit_code == 0);
  CHECK(leaf.out.find("\"extension_rank\": 0") != std::string::npos);

  CHECK(run_cli("analyze \"<(F * \" --blocks " + blocks).exit_code == 2);
  CHECK(run_cli("analyze \"(T * F)\" --blocks " + blocks).exit_code == 2);
  CHECK(run_cli("analyze NOPE --blocks " + blocks).exit_code == 2);
}

TEST_CASE("cli: lvalue exact values and bound-only fallback") {
  auto um = run_cli("lvalue --group um:3,2");
  CHECK(um.exit_code == 0);
  CHECK(um.out.find("\"l\": 4") != std::string::npos);
  CHECK(um.out.find("\"goozeff_barry_matches\": true") != std::string::npos);

  auto ub = run_cli("lvalue --group ubar:2,2");
  CHECK(ub.exit_code == 0);
  CHECK(ub.out.find("\"l\": 2") != std::string::npos);
  CHECK(ub.out.find("\"lemma_bound_matches\": true") != std::string::npos);

  // oversized group: bound only, still exit 0
  auto big = run_cli("lvalue --group um:6,3 --cap 4096");
  CHECK(big.exit_code == 0);
  CHECK(big.out.find("\"bound_only\": true") != std::string::npos);
}

TEST_CASE("cli: factor then verify roundtrip; tampering exits 4") {
  std::string hom = write_file("hom_rank3.json", kHomRank3);
  std::string cert = (tmpdir() / "cert_rank3.json").string();
  auto f = run_cli("factor --hom " + hom + " -o " + cert);
  CHECK(f.exit_code == 0);
  CHECK(f.out.find("\"final_extension_rank\": 1") != std::string::npos);

  auto v = run_cli("verify --cert " + cert);
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("\"pass\": true") != std::string::npos);

  // tamper with one gamma word exponent
  nlohmann::ordered_json doc;
  std::ifstream(cert) >> doc;
  auto& gamma = doc["stages"][0]["gamma"];
  bool edited = false;
  for (auto it = gamma.begin(); it != gamma.end() && !edited; ++it) {
    if (!it.value().empty()) {
      it.value()[0][1] = it.value()[0][1].get<std::int64_t>() + 1;
      edited = true;
    }
  }
  REQUIRE(edited);
  std::string bad = write_file("cert_tampered.json", doc.dump(2));
  auto vb = run_cli("verify --cert " + bad);
  CHECK(vb.exit_code == 4);
  CHECK(vb.out.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("cli: invalid hom exits 3 with violations listed") {
  // target is all of U_2(F_3); the chosen images break the conjugation
  // relation x z x^-1 = z^theta(x) (the transvections do not commute and
  // theta acts trivially at exponent 3)
  const char* bad_hom = R"({
    "blocks": [{"id":"F","kind":"free_procyclic","p":3,"theta":[4]}],
    "construction": "<F>",
    "target": {"kind":"custom","p":3,
               "generators":[[[1,1,0],[0,1,0],[0,0,1]],[[1,0,0],[0,1,1],[0,0,1]]]},
    "images": {
      ":z": [[1,1,0],[0,1,0],[0,0,1]],
      "E:x": [[1,0,0],[0,1,1],[0,0,1]]
    }
  })";
  std::string hom = write_file("hom_bad.json", bad_hom);
  auto r = run_cli("factor --hom " + hom);
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("violations") != std::string::npos);
  CHECK(r.out.find("semidirect") != std::string::npos);
}

TEST_CASE("cli: bounds command") {
  std::string blocks = write_file("blocks3.json", kBlocks3);
  auto c = run_cli("bounds --construction \"<(<F> * <D>)>\" --blocks " + blocks + " --m 2");
  CHECK(c.exit_code == 0);
  CHECK(c.out.find("\"e\": 2") != std::string::npos);
  CHECK(c.out.find("\"f_value\": 3") != std::string::npos);

  auto g = run_cli("bounds --group um:2,3 --n 2 --p 3");
  CHECK(g.exit_code == 0);
  CHECK(g.out.find("\"l\": 2") != std::string::npos);
  CHECK(g.out.find("\"f_value\": 3") != std::string::npos);

  // infinite table entry at the requested degree: exit 5
  auto inf = run_cli("bounds --construction \"(C * F)\" --blocks " + blocks + " --m 2");
  CHECK(inf.exit_code == 5);
}

TEST_CASE("cli: massey numbers") {
  auto m3 = run_cli("massey --m 3 --p 3");
  CHECK(m3.exit_code == 0);
  CHECK(m3.out.find("\"lemma_bound\": 5") != std::string::npos);

  auto m2 = run_cli("massey --m 2 --p 2 --exact-l");
  CHECK(m2.exit_code == 0);
  CHECK(m2.out.find("\"exact_l_bound\": 3") != std::string::npos);
}

TEST_CASE("cli: oracle reports and the p = 2 rejection") {
  std::string blocks = write_file("blocks3.json", kBlocks3);
  auto d = run_cli("oracle --construction D --blocks " + blocks);
  CHECK(d.exit_code == 0);
  CHECK(d.out.find("\"max_syml\": 1") != std::string::npos);
  CHECK(d.out.find("\"f_bound\": 1") != std::string::npos);
  CHECK(d.out.find("\"bound_respected\": true") != std::string::npos);

  auto q = run_cli("oracle --construction \"<D>\" --blocks " + blocks + " --omega 0,1,0");
  CHECK(q.exit_code == 0);
  CHECK(q.out.find("\"syml\": 1") != std::string::npos);

  const char* blocks2 = R"([{"id":"F","kind":"free_procyclic","p":2,"theta":[3]}])";
  std::string b2 = write_file("blocks2.json", blocks2);
  auto rej = run_cli("oracle --construction F --blocks " + b2);
  CHECK(rej.exit_code == 5);
}

TEST_CASE("cli: reports are byte-stable across runs and thread counts") {
  std::string blocks = write_file("blocks3.json", kBlocks3);
  auto a1 = run_cli("analyze \"<(F * D)>\" --blocks " + blocks);
  auto a2 = run_cli("analyze \"<(F * D)>\" --blocks " + blocks);
  CHECK(a1.out == a2.out);

  auto l1 = run_cli("lvalue --group um:3,2 --threads 1");
  auto l2 = run_cli("lvalue --group um:3,2 --threads 4");
  CHECK(l1.out == l2.out);

  std::string hom = write_file("hom_rank3.json", kHomRank3);
  auto f1 = run_cli("factor --hom " + hom);
  auto f2 = run_cli("factor --hom " + hom + " --threads 3");
  CHECK(f1.out == f2.out);
}
