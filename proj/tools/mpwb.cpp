// Batch front end for the mpwb library: reads a JSON problem document (file,
// inline, or stdin), runs one operation, prints JSON (or CSV for scalar
// tables) on stdout.  Exit: 0 ok, 2 domain error, 3 input/schema error,
// 4 internal invariant violation.

#include <CLI11.hpp>
#include <mpwb/mpwb.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace mpwb;

Json read_input(const std::string& where) {
  std::string text;
  if (where == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  } else if (!where.empty() && where.front() == '{') {
    text = where;  // inline document
  } else {
    std::ifstream f(where);
    check_input(f.good(), "cannot open input: " + where);
    std::ostringstream buf;
    buf << f.rdbuf();
    text = buf.str();
  }
  Json j = Json::parse(text, nullptr, false);
  check_input(!j.is_discarded(), "input is not valid JSON");
  require_schema_tag(j);
  return j;
}

void emit(Json doc) {
  doc["schema"] = kSchemaTag;
  std::cout << doc.dump(2) << "\n";
}

// One parsed invocation: the chosen command plus every option any command takes.
struct JobSpec {
  std::string command;
  std::string input = "-";
  double tolerance = kDefaultTol;
  int truncation = 12;         // bargmann-op
  int path_steps = 32;         // cocycle
  int p = 1;                   // trace: cover order for the half-form weights
  double theta = kPi / 2.0;    // sphere-model
  int k_max = 40;              // sphere-model
  std::string format = "csv";  // sphere-model is the only table producer
};

double env_tolerance() {
  const char* raw = std::getenv("MPWB_TOLERANCE");
  if (raw == nullptr || *raw == '\0') return kDefaultTol;
  char* end = nullptr;
  double v = std::strtod(raw, &end);
  check_input(end != raw && *end == '\0' && v > 0.0,
              "MPWB_TOLERANCE must be a positive number");
  return v;
}

void run_index(const std::string& in, double tol) {
  MetaplecticElement e = mp_element_from_json(read_input(in), "$", tol);
  IndexResult res = mp_index(e);
  emit(Json{{"m", res.m}, {"residual", res.residual}});
}

void run_lift(const std::string& in, double tol) {
  Json j = read_input(in);
  Symplectomorphism g =
      symplectomorphism_from_json(require_field(j, "g", "$"), "$.g", tol);
  PositivePolarization ref = polarization_from_json(j, "ref", g.space, "$");
  auto [plus, minus] = mp_lift(g, ref);
  auto residual = [](const MetaplecticElement& e) {
    return std::abs(e.z * e.z * det_pi_g_on_E(e.g, e.ref) - 1.0);
  };
  emit(Json{{"plus", to_json(plus)},
            {"minus", to_json(minus)},
            {"residual", std::max(residual(plus), residual(minus))}});
}

void run_compose(const std::string& in, double tol) {
  Json j = read_input(in);
  // result = a . b (b acts first)
  MetaplecticElement b = mp_element_from_json(require_field(j, "b", "$"), "$.b", tol);
  MetaplecticElement a = mp_element_from_json(require_field(j, "a", "$"), "$.a", tol);
  MetaplecticElement prod = mp_compose(a, b);
  double residual = std::abs(prod.z * prod.z * det_pi_g_on_E(prod.g, prod.ref) - 1.0);
  emit(Json{{"product", to_json(prod)}, {"residual", residual}});
}

void run_cocycle(const std::string& in, int path_steps) {
  Json j = read_input(in);
  const Json& nj = require_field(j, "n", "$");
  check_input(nj.is_number_integer() && nj.get<int>() >= 1, "schema error at $.n: expected n >= 1");
  SymplecticSpace s = standard_space(nj.get<int>());
  auto pol = [&](const char* key) {
    check_input(j.contains(key), std::string("schema error at $: missing \"") + key + "\"");
    return polarization_from_json(j, key, s, "$");
  };
  PositivePolarization pa = pol("a"), pb = pol("b"), pc = pol("c");
  Complex z = zeta(pa, pb, pc);
  Complex root = zeta_sqrt(pa, pb, pc, path_steps);
  emit(Json{{"zeta", to_json(z)},
            {"sqrt", to_json(root)},
            {"residual", std::abs(root * root - z)}});
}

void run_bargmann_op(const std::string& in, double tol, int truncation) {
  DMorphism m = dmorphism_from_json(read_input(in), "$", tol);
  OperatorMatrix t = operator_matrix(m, truncation);
  Json degrees = Json::array();
  for (const auto& d : t.basis_degrees) degrees.push_back(d);
  emit(Json{{"entries", to_json(t.entries)},
            {"degrees", degrees},
            {"truncation", t.truncation},
            {"gram_condition_source", gram_condition(basis(m.source, truncation).gram)},
            {"unitarity_defect", unitarity_defect(m, truncation, truncation / 2)}});
}

void run_kernel_trace(const std::string& in, double tol) {
  Json j = read_input(in);
  DMorphism m = dmorphism_from_json(j, "$", tol);
  Complex value = kernel_trace(m);
  Json out{{"value", to_json(value)}};
  if (j.contains("z") && !j.contains("psi")) {
    // metaplectic input: report the distance to the index prediction
    MetaplecticElement e = mp_element_from_json(j, "$", tol);
    IndexResult res = mp_index(e);
    Mat gap = Mat::Identity(2 * e.g.space.n, 2 * e.g.space.n) - e.g.m;
    Complex predicted = i_power(res.m) / std::sqrt(std::abs(gap.determinant()));
    out["index"] = res.m;
    out["residual"] = std::abs(value - predicted);
  }
  emit(out);
}

void run_trace(const std::string& in, int p) {
  Json j = read_input(in);
  TraceQuery q = trace_query_from_json(j, "$");
  Json out{{"k", q.k}};
  out["estimate"] = to_json(trace_estimate(q));
  bool has_mp = true;
  for (const FixedPointDatum& d : q.data) has_mp = has_mp && d.mp.has_value();
  if (has_mp) {
    Complex hf = trace_estimate_halfform(q, p);
    out["halfform"] = to_json(hf);
    out["p"] = p;
  }
  emit(out);
}

void run_lefschetz(const std::string& in) {
  TraceQuery q = trace_query_from_json(read_input(in), "$");
  emit(Json{{"k", q.k}, {"value", to_json(lefschetz_number(q))}});
}

void run_sphere_model(double theta, int k_max, const std::string& format) {
  check_input(k_max >= 1, "sphere-model: k-max must be >= 1");
  if (format == "csv") {
    std::cout << "k,exact,formula_re,formula_im,diff\n";
    std::ostringstream row;
    row.precision(17);
    for (int k = 1; k <= k_max; ++k) {
      SphereModelResult r = sphere_model(theta, k);
      row.str("");
      row << k << "," << r.exact << "," << r.formula.real() << "," << r.formula.imag() << ","
          << r.difference << "\n";
      std::cout << row.str();
    }
    return;
  }
  Json rows = Json::array();
  for (int k = 1; k <= k_max; ++k) {
    SphereModelResult r = sphere_model(theta, k);
    rows.push_back(Json{{"k", k},
                        {"exact", r.exact},
                        {"formula", to_json(r.formula)},
                        {"diff", r.difference}});
  }
  emit(Json{{"theta", theta}, {"rows", rows}});
}

int run(int argc, char** argv) {
  CLI::App app{"linear-model half-form calculator"};
  app.require_subcommand(1);

  JobSpec job;
  job.tolerance = env_tolerance();

  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("input", job.input, "problem document: path, inline JSON, or - for stdin");
  };
  auto add_tol = [&](CLI::App* cmd) {
    cmd->add_option("--tolerance", job.tolerance, "verification tolerance for parsed data");
  };

  CLI::App* c_index = app.add_subcommand("index", "index of a metaplectic element");
  add_input(c_index), add_tol(c_index);
  CLI::App* c_lift = app.add_subcommand("lift", "both lifts of a linear symplectic map");
  add_input(c_lift), add_tol(c_lift);
  CLI::App* c_compose = app.add_subcommand("compose", "product of two metaplectic elements");
  add_input(c_compose), add_tol(c_compose);
  CLI::App* c_cocycle = app.add_subcommand("cocycle", "pairwise transfer cocycle and its square root");
  add_input(c_cocycle);
  c_cocycle->add_option("--path-steps", job.path_steps, "initial branch-tracking subdivision");
  CLI::App* c_op = app.add_subcommand("bargmann-op", "truncated operator matrix of a morphism");
  add_input(c_op), add_tol(c_op);
  c_op->add_option("--truncation,-N", job.truncation, "maximal basis degree");
  CLI::App* c_ktrace = app.add_subcommand("kernel-trace", "trace of the integral kernel");
  add_input(c_ktrace), add_tol(c_ktrace);
  CLI::App* c_trace = app.add_subcommand("trace", "fixed-point trace estimate");
  add_input(c_trace);
  c_trace->add_option("-p", job.p, "cover order for the half-form weights");
  CLI::App* c_lef = app.add_subcommand("lefschetz", "holomorphic Lefschetz fixed point sum");
  add_input(c_lef);
  CLI::App* c_sphere = app.add_subcommand("sphere-model", "two-pole rotation model vs exact character");
  c_sphere->add_option("--theta", job.theta, "rotation angle (not a multiple of 2 pi)");
  c_sphere->add_option("--k-max", job.k_max, "sweep k = 1..k_max");
  c_sphere->add_option("--format", job.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_subcommand("selftest", "run the built-in invariant suite");

  CLI11_PARSE(app, argc, argv);
  job.command = app.get_subcommands().front()->get_name();

  if (job.command == "index") run_index(job.input, job.tolerance);
  if (job.command == "lift") run_lift(job.input, job.tolerance);
  if (job.command == "compose") run_compose(job.input, job.tolerance);
  if (job.command == "cocycle") run_cocycle(job.input, job.path_steps);
  if (job.command == "bargmann-op") run_bargmann_op(job.input, job.tolerance, job.truncation);
  if (job.command == "kernel-trace") run_kernel_trace(job.input, job.tolerance);
  if (job.command == "trace") run_trace(job.input, job.p);
  if (job.command == "lefschetz") run_lefschetz(job.input);
  if (job.command == "sphere-model") run_sphere_model(job.theta, job.k_max, job.format);
  if (job.command == "selftest") return mpwb::run_selftest(std::cout) == 0 ? 0 : 1;
  return 0;
}

}  // namespace

// every library failure mode maps to its documented exit code here, including
// a bad MPWB_TOLERANCE read during option setup
int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mpwb::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const mpwb::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const mpwb::internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
