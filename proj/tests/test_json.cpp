#include "helpers.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mpwb;
using mpwb::testing::cnear;
using mpwb::testing::mnear;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("scalar encoding", "[json]") {
  Complex z(1.25, -0.5);
  CHECK(complex_from_json(to_json(z), "$") == z);
  CHECK(complex_from_json(Json(3.0), "$") == Complex(3.0, 0.0));

  CHECK_THROWS_AS(complex_from_json(Json("x"), "$"), input_error);
  CHECK_THROWS_AS(complex_from_json(Json::array({1.0, 2.0, 3.0}), "$"), input_error);
  CHECK_THROWS_WITH(complex_from_json(Json::array({1.0, "y"}), "$.z"),
                    ContainsSubstring("$.z"));
}

TEST_CASE("matrix encoding", "[json]") {
  Mat m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  CHECK(mnear(CMat(mat_from_json(to_json(m), "$").cast<Complex>()), CMat(m.cast<Complex>()),
              1e-15));

  CMat c(2, 1);
  c << Complex(0.0, 1.0), Complex(2.0, -3.0);
  CHECK(mnear(cmat_from_json(to_json(c), "$"), c, 1e-15));

  SECTION("shape violations carry the offending path") {
    Json ragged = Json::parse(R"([[1, 0], [1]])");
    CHECK_THROWS_WITH(cmat_from_json(ragged, "$.g"),
                      ContainsSubstring("$.g[1]") && ContainsSubstring("length 2"));
    CHECK_THROWS_AS(cmat_from_json(Json::array(), "$"), input_error);
    CHECK_THROWS_AS(cmat_from_json(Json::parse("[[]]"), "$"), input_error);
    CHECK_THROWS_AS(cmat_from_json(Json(7.0), "$"), input_error);
  }

  SECTION("real matrices reject complex entries") {
    Json mixed = Json::parse(R"([[1, [0, 2]], [0, 1]])");
    CHECK_THROWS_WITH(mat_from_json(mixed, "$.g"), ContainsSubstring("real"));
  }
}

TEST_CASE("document tagging", "[json]") {
  CHECK_NOTHROW(require_schema_tag(Json::parse(R"({"schema": "mpwb/1"})")));
  CHECK_NOTHROW(require_schema_tag(Json::parse(R"({"g": 1})")));  // tag is optional
  CHECK_THROWS_AS(require_schema_tag(Json::parse(R"({"schema": "mpwb/2"})")), input_error);
  CHECK_THROWS_AS(require_schema_tag(Json::parse("[1, 2]")), input_error);
  CHECK_THROWS_WITH(require_field(Json::parse(R"({"a": 1})"), "g", "$"),
                    ContainsSubstring("$.g"));
}

TEST_CASE("parsing symplectic data", "[json]") {
  Json shear = Json::parse("[[1, 1], [0, 1]]");
  Symplectomorphism g = symplectomorphism_from_json(shear, "$");
  CHECK(g.space.n == 1);

  CHECK_THROWS_AS(symplectomorphism_from_json(Json::parse("[[2, 0], [0, 2]]"), "$"),
                  domain_error);
  CHECK_THROWS_AS(
      symplectomorphism_from_json(Json::parse("[[1,0,0],[0,1,0],[0,0,1]]"), "$"), input_error);
  CHECK_THROWS_AS(symplectomorphism_from_json(Json::parse("[[1,0,0],[0,1,0]]"), "$"),
                  input_error);

  SECTION("polarization field forms") {
    SymplecticSpace s = standard_space(1);
    PositivePolarization std_pol = standard_polarization(s);

    Json none = Json::parse(R"({})");
    CHECK(same_polarization(polarization_from_json(none, "ref", s, "$"), std_pol, 1e-12));

    Json named = Json::parse(R"({"ref": "standard"})");
    CHECK(same_polarization(polarization_from_json(named, "ref", s, "$"), std_pol, 1e-12));

    Json siegel = Json::parse(R"({"ref": [[[0, 2]]]})");
    PositivePolarization p = polarization_from_json(siegel, "ref", s, "$");
    CHECK(cnear(p.siegel(0, 0), 2.0 * kI, 1e-14));

    CHECK_THROWS_AS(polarization_from_json(Json::parse(R"({"ref": "foo"})"), "ref", s, "$"),
                    input_error);
    CHECK_THROWS_AS(
        polarization_from_json(Json::parse(R"({"ref": [[[0, -1]]]})"), "ref", s, "$"),
        domain_error);
    Json big = Json::parse(R"({"ref": [[[0,1],[0,0]],[[0,0],[0,1]]]})");
    CHECK_THROWS_AS(polarization_from_json(big, "ref", s, "$"), input_error);
  }
}

TEST_CASE("parsing cover elements and morphisms", "[json]") {
  Json doc = Json::parse(R"({"g": [[-1, 0], [0, -1]], "z": [0, 1]})");
  MetaplecticElement e = mp_element_from_json(doc, "$");
  CHECK(cnear(e.z, kI, 1e-14));

  SECTION("round trip preserves the gauge") {
    Json enc = to_json(e);
    MetaplecticElement back = mp_element_from_json(enc, "$");
    CHECK(mnear(CMat(back.g.m.cast<Complex>()), CMat(e.g.m.cast<Complex>()), 1e-12));
    CHECK(cnear(back.z, e.z, 1e-12));
    CHECK(same_polarization(back.ref, e.ref, 1e-10));
  }

  CHECK_THROWS_WITH(mp_element_from_json(Json::parse(R"({"g": [[-1,0],[0,-1]]})"), "$"),
                    ContainsSubstring("$.z"));

  SECTION("morphism documents") {
    Json direct = Json::parse(
        R"({"g": [[1, 0], [0, 1]], "psi": 1, "source": "standard", "target": "standard"})");
    DMorphism m = dmorphism_from_json(direct, "$");
    CHECK(cnear(m.psi, 1.0, 1e-14));

    Json via_z = Json::parse(R"({"g": [[-1, 0], [0, -1]], "z": [0, 1]})");
    DMorphism mz = dmorphism_from_json(via_z, "$");
    CHECK(cnear(mz.psi, kI, 1e-14));

    CHECK_THROWS_WITH(dmorphism_from_json(Json::parse(R"({"g": [[1,0],[0,1]]})"), "$"),
                      ContainsSubstring("psi"));
  }
}

TEST_CASE("parsing trace queries", "[json]") {
  Json doc = Json::parse(R"({
    "k": 2,
    "data": [{"g": [[-1, 0], [0, -1]], "z": 1, "u": 1, "h": [[-1]], "mp": [0, 1]}]
  })");
  TraceQuery q = trace_query_from_json(doc, "$");
  CHECK(q.k == 2);
  REQUIRE(q.data.size() == 1);
  CHECK(q.data[0].h.has_value());
  CHECK(cnear((*q.data[0].h)(0, 0), -1.0, 1e-14));
  REQUIRE(q.data[0].mp.has_value());
  CHECK(cnear(*q.data[0].mp, kI, 1e-14));

  CHECK_THROWS_WITH(trace_query_from_json(Json::parse(R"({"data": []})"), "$"),
                    ContainsSubstring("$.k"));
  CHECK_THROWS_AS(trace_query_from_json(Json::parse(R"({"k": 0, "data": [1]})"), "$"),
                  input_error);
  CHECK_THROWS_AS(trace_query_from_json(Json::parse(R"({"k": 1.5, "data": [1]})"), "$"),
                  input_error);
  CHECK_THROWS_AS(trace_query_from_json(Json::parse(R"({"k": 1, "data": []})"), "$"),
                  input_error);
  CHECK_THROWS_WITH(
      trace_query_from_json(Json::parse(R"({"k": 1, "data": [{"g": [[-1,0],[0,-1]], "z": 1}]})"),
                            "$"),
      ContainsSubstring("$.data[0].u"));
}

// ---- end-to-end runs of the command line tool --------------------------------
//
// These shell out to the binary named by MPWB_CLI (set by the test harness).
// When the variable is missing the cases report a warning and pass vacuously,
// so the pure-library suite stays usable on its own.

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::string& args, const std::string& stdin_text = "",
               const std::string& env_prefix = "") {
  const char* exe = std::getenv("MPWB_CLI");
  REQUIRE(exe != nullptr);
  namespace fs = std::filesystem;
  static int counter = 0;
  std::string stamp = std::to_string(::getpid()) + "_" + std::to_string(counter++);
  fs::path err_file = fs::temp_directory_path() / ("mpwb_cli_err_" + stamp);
  fs::path in_file = fs::temp_directory_path() / ("mpwb_cli_in_" + stamp);

  std::string cmd = env_prefix + "\"" + exe + "\" " + args + " 2>" + err_file.string();
  if (!stdin_text.empty()) {
    std::ofstream f(in_file);
    f << stdin_text;
    f.close();
    cmd += " <" + in_file.string();
  }

  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

  std::ifstream ef(err_file);
  std::ostringstream es;
  es << ef.rdbuf();
  r.err = es.str();
  std::error_code ec;
  fs::remove(err_file, ec);
  fs::remove(in_file, ec);
  return r;
}

bool cli_available() {
  if (std::getenv("MPWB_CLI") != nullptr) return true;
  WARN("MPWB_CLI not set; CLI end-to-end tests skipped");
  return false;
}

constexpr const char* kHalfTurnDoc = R"({"g": [[-1, 0], [0, -1]], "z": [0, 1]})";

}  // namespace

TEST_CASE("cli index command", "[cli]") {
  if (!cli_available()) return;

  CliRun r = run_cli(std::string("index '") + kHalfTurnDoc + "'");
  REQUIRE(r.exit_code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["schema"] == "mpwb/1");
  CHECK(j["m"] == 1);
  CHECK(j["residual"].get<double>() < 1e-12);

  SECTION("same document over stdin") {
    CliRun piped = run_cli("index -", kHalfTurnDoc);
    REQUIRE(piped.exit_code == 0);
    CHECK(Json::parse(piped.out)["m"] == 1);
  }

  SECTION("output bytes are deterministic") {
    CliRun again = run_cli(std::string("index '") + kHalfTurnDoc + "'");
    CHECK(again.out == r.out);
  }
}

TEST_CASE("cli error taxonomy", "[cli]") {
  if (!cli_available()) return;

  SECTION("schema violations exit 3 and name the path") {
    CliRun r = run_cli(R"(index '{"g": [[-1, 0], [0]], "z": [0, 1]}')");
    CHECK(r.exit_code == 3);
    CHECK_THAT(r.err, ContainsSubstring("input error"));
    CHECK_THAT(r.err, ContainsSubstring("$.g[1]"));
    CHECK(r.out.empty());
  }

  SECTION("domain failures exit 2") {
    CliRun r = run_cli(R"(index '{"g": [[1, 0], [0, 1]], "z": 1}')");
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.err, ContainsSubstring("domain error"));
  }

  SECTION("broken JSON exits 3") {
    CliRun r = run_cli("index '{\"g\": '");
    CHECK(r.exit_code == 3);
  }

  SECTION("wrong schema tag exits 3") {
    CliRun r = run_cli(R"(index '{"schema": "mpwb/9", "g": [[-1,0],[0,-1]], "z": [0,1]}')");
    CHECK(r.exit_code == 3);
  }

  SECTION("bad tolerance variable exits 3") {
    CliRun r = run_cli(std::string("index '") + kHalfTurnDoc + "'", "",
                       "MPWB_TOLERANCE=abc ");
    CHECK(r.exit_code == 3);
    CHECK_THAT(r.err, ContainsSubstring("MPWB_TOLERANCE"));
  }
}

TEST_CASE("cli algebra commands", "[cli]") {
  if (!cli_available()) return;

  SECTION("lift") {
    CliRun r = run_cli(R"(lift '{"g": [[2, 0], [0, 0.5]]}')");
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["residual"].get<double>() < 1e-12);
    double z_re = j["plus"]["z"][0].get<double>();
    CHECK(std::abs(z_re - 2.0 / std::sqrt(5.0)) < 1e-12);
    CHECK(std::abs(j["plus"]["z"][1].get<double>()) < 1e-14);
  }

  SECTION("compose squares the half turn to the deck transformation") {
    std::string doc = std::string(R"({"a": )") + kHalfTurnDoc + R"(, "b": )" + kHalfTurnDoc + "}";
    CliRun r = run_cli("compose '" + doc + "'");
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    CHECK(std::abs(j["product"]["z"][0].get<double>() + 1.0) < 1e-10);
    CHECK(std::abs(j["product"]["z"][1].get<double>()) < 1e-10);
    CHECK(j["residual"].get<double>() < 1e-9);
  }

  SECTION("cocycle") {
    CliRun r = run_cli(R"(cocycle '{"n": 1, "a": "standard", "b": [[[0, 2]]], "c": [[[1, 1]]]}')");
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["residual"].get<double>() < 1e-10);
    Complex zeta_val(j["zeta"][0].get<double>(), j["zeta"][1].get<double>());
    CHECK(std::abs(zeta_val) > 0.0);
  }

  SECTION("kernel-trace reports the index prediction for cover input") {
    CliRun r = run_cli(std::string("kernel-trace '") + kHalfTurnDoc + "'");
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    CHECK(std::abs(j["value"][0].get<double>()) < 1e-12);
    CHECK(std::abs(j["value"][1].get<double>() - 0.5) < 1e-12);
    CHECK(j["index"] == 1);
    CHECK(j["residual"].get<double>() < 1e-9);
  }

  SECTION("bargmann-op truncation layout") {
    CliRun r = run_cli(R"(bargmann-op '{"g": [[1, 0], [0, 1]], "psi": 1}' -N 4)");
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["truncation"] == 4);
    CHECK(j["entries"].size() == 5);  // degrees 0..4 in one variable
    CHECK(j["degrees"].size() == 5);
    CHECK(j["unitarity_defect"].get<double>() < 1e-9);
    CHECK(j["gram_condition_source"].get<double>() >= 1.0);
  }
}

TEST_CASE("cli trace commands", "[cli]") {
  if (!cli_available()) return;

  SECTION("trace emits the half-form sum only when every datum has mp") {
    CliRun with_mp = run_cli(
        R"(trace '{"k": 1, "data": [{"g": [[-1, 0], [0, -1]], "z": 1, "u": 1, "mp": [0, 1]}]}')");
    REQUIRE(with_mp.exit_code == 0);
    Json j = Json::parse(with_mp.out);
    CHECK(std::abs(j["estimate"][0].get<double>() - 0.5) < 1e-12);
    REQUIRE(j.contains("halfform"));
    CHECK(std::abs(j["halfform"][1].get<double>() - 0.5) < 1e-12);
    CHECK(j["p"] == 1);

    CliRun bare = run_cli(
        R"(trace '{"k": 1, "data": [{"g": [[-1, 0], [0, -1]], "z": 1, "u": 1}]}')");
    REQUIRE(bare.exit_code == 0);
    CHECK_FALSE(Json::parse(bare.out).contains("halfform"));
  }

  SECTION("lefschetz") {
    CliRun r = run_cli(
        R"(lefschetz '{"k": 2, "data": [{"g": [[-1, 0], [0, -1]], "z": 1, "u": 1, "h": [[-1]]}]}')");
    REQUIRE(r.exit_code == 0);
    Json j = Json::parse(r.out);
    CHECK(std::abs(j["value"][0].get<double>() - 0.5) < 1e-12);
  }

  SECTION("sphere-model CSV table") {
    CliRun r = run_cli("sphere-model --k-max 5");
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "k,exact,formula_re,formula_im,diff");
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    }
    CHECK(rows == 5);

    CliRun again = run_cli("sphere-model --k-max 5");
    CHECK(again.out == r.out);  // byte-identical reruns

    CliRun as_json = run_cli("sphere-model --k-max 3 --format json");
    REQUIRE(as_json.exit_code == 0);
    Json j = Json::parse(as_json.out);
    CHECK(j["rows"].size() == 3);

    CliRun degenerate = run_cli("sphere-model --theta 0");
    CHECK(degenerate.exit_code == 2);
  }
}

TEST_CASE("cli selftest", "[cli]") {
  if (!cli_available()) return;
  CliRun r = run_cli("selftest");
  CHECK(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("passed"));
  CHECK_THAT(r.out, ContainsSubstring("0 failed"));
}
