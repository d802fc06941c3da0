#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "latscope/dioph.hpp"
#include "latscope/errors.hpp"
#include "latscope/json_io.hpp"
#include "latscope/region.hpp"
#include "latscope/spectral.hpp"
#include "latscope/wavelet.hpp"

using namespace latscope;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  CliResult r;
  std::string cmd = std::string(LATSCOPE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  int rc = pclose(p);
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

Mat diag2(double a, double b) {
  Mat M(2, 2);
  M << a, 0, 0, b;
  return M;
}

}  // namespace

TEST_CASE("matrices and lattices round-trip through text exactly") {
  Mat M(2, 3);
  M << 1.0 / 3.0, std::sqrt(2.0), -7.25, 1e-300, 0.1, 3;
  Json j = mat_to_json(M);
  Mat M2 = mat_from_json(Json::parse(j.dump()));
  CHECK(M2.rows() == 2);
  CHECK((M - M2).norm() == 0.0);  // bitwise through the text form

  // object form with a dimension cross-check
  Json obj = {{"n", 2}, {"entries", j}};
  CHECK((mat_from_json(obj) - M).norm() == 0.0);
  obj["n"] = 5;
  CHECK_THROWS_AS(mat_from_json(obj), Error);
  CHECK_THROWS_AS(mat_from_json(Json::parse("[[1,2],[3]]")), Error);

  Lattice L = make_lattice(diag2(1.0, std::sqrt(3.0) / 2));
  Lattice L2 = lattice_from_json(Json::parse(lattice_to_json(L).dump()));
  CHECK((L.basis - L2.basis).norm() == 0.0);
  CHECK(L.covolume == L2.covolume);
}

TEST_CASE("structured dilation keeps its block data through JSON") {
  Preset p = preset("shear-golden");
  REQUIRE(p.dilation.has_value());
  const Dilation& d = *p.dilation;
  REQUIRE(d.spectral.structured);

  Json j = dilation_to_json(d);
  CHECK(j.contains("blocks"));
  Dilation d2 = dilation_from_json(Json::parse(j.dump()));
  CHECK((d.A - d2.A).norm() == 0.0);
  CHECK(d2.spectral.structured);
  REQUIRE(d2.spectral.blocks.size() == d.spectral.blocks.size());
  for (std::size_t i = 0; i < d.spectral.blocks.size(); ++i) {
    CHECK(d.spectral.blocks[i].lambda == d2.spectral.blocks[i].lambda);
    CHECK(d.spectral.blocks[i].order == d2.spectral.blocks[i].order);
  }
  CHECK((d.spectral.similarity_basis - d2.spectral.similarity_basis).norm() ==
        0.0);

  // a plain matrix comes back as a plain dilation
  Dilation plain = dilation_from_json(Json::parse("[[2,0],[0,3]]"));
  CHECK(plain.det_abs == 6.0);
}

TEST_CASE("region trees round-trip exactly") {
  Dilation d = make_dilation(diag2(0.5, 6.0));
  SubspaceSplit split = ef_split(d);
  Region q = qset(split, 1.32, 7.92, 1.32);
  Region b = ball(Vec::Zero(2), 2.5);
  Vec lo(2), hi(2);
  lo << -1, -0.25;
  hi << 0.5, 1;
  Region tree = region_diff(region_union(q, b),
                            region_intersect(box_region(lo, hi),
                                             ellipsoid_region(diag2(2, 3), 1)));

  Json j = region_to_json(tree);
  Region tree2 = region_from_json(j);
  CHECK(region_to_json(tree2) == j);  // fixed point of serialize/parse

  Philox g(17, 0);
  for (int i = 0; i < 2000; ++i) {
    Vec x(2);
    x << 20 * g.uniform01() - 10, 20 * g.uniform01() - 10;
    CHECK(tree.contains(x) == tree2.contains(x));
  }
}

TEST_CASE("deep-power image regions survive serialization") {
  Dilation d = make_dilation(diag2(2, 3));
  Mat M = matrix_power(d.A, -30);  // smallest singular value ~ 3^-30
  Mat Minv = matrix_power(d.A, 30);
  Region R = linear_image(M, Minv, tiling_annulus(d));
  Json j = region_to_json(R);
  Region R2 = region_from_json(j);
  CHECK(region_to_json(R2) == j);
  Vec x = Vec::Zero(2);
  CHECK_FALSE(R2.contains(x));
  x << 3.0 * std::pow(2.0, -30), 0;  // annulus point pulled through M
  CHECK(R.contains(x) == R2.contains(x));
}

TEST_CASE("region readers reject malformed input") {
  CHECK_THROWS_AS(region_from_json(Json::parse("{\"op\":\"moebius\"}")), Error);
  CHECK_THROWS_AS(region_from_json(Json::parse("{\"radius\":1}")), Error);
  // unbounded extents cannot be written: the text form would not round-trip
  SubspaceSplit split = ef_split(make_dilation(diag2(0.5, 6.0)));
  Region unb = qset(split, std::numeric_limits<double>::infinity(), 2.0, 0.5);
  CHECK_THROWS_AS(region_to_json(unb), Error);
}

TEST_CASE("frequency functions round-trip with complex weights") {
  FreqFunction f = shannon_msf();
  f.terms[0].coeff = std::complex<double>(0.25, -1.5);
  Json j = freq_to_json(f);
  CHECK(j["disjoint"] == true);
  CHECK(j["terms"][0]["coeff_im"] == -1.5);
  FreqFunction f2 = freq_from_json(Json::parse(j.dump()));
  CHECK(freq_to_json(f2) == j);
  CHECK(f2.terms[0].coeff == f.terms[0].coeff);
  CHECK(f2.eval(Vec::Constant(1, -0.75)) == f.terms[0].coeff);
}

TEST_CASE("presets expose the named objects") {
  CHECK(preset("Zn", 3).lattice->covolume == 1.0);
  CHECK(preset("hex").lattice->covolume == doctest::Approx(std::sqrt(3.0) / 2));
  Lattice s = *preset("sqrt2-norm").lattice;
  CHECK(s.n() == 2);
  CHECK(nu(s, 10.0).value == doctest::Approx(1.0));  // admissible by design

  Preset sg = preset("shear-golden");
  CHECK(sg.dilation->n() == 3);
  CHECK(classify_dilation(*sg.dilation) ==
        DilationClass::NotExpandingOnSubspace);
  CHECK(preset("rotation-jordan").dilation->n() == 5);

  Preset sh = preset("shannon");
  CHECK(sh.psi->terms.size() == 2);
  CHECK(sh.dilation->det_abs == 2.0);
  Preset da = preset("dyadic-annulus", 2);
  CHECK(da.psi->dim() == 2);
  CHECK(da.dilation->det_abs == 4.0);

  CHECK_THROWS_AS(preset("no-such-thing"), Error);
  CHECK(preset_names().size() == 7);
}

TEST_CASE("stable hash and atomic writes") {
  CHECK(stable_hash("") == 0xcbf29ce484222325ULL);
  CHECK(stable_hash("abc") == 0xe71fa2190541574bULL);

  const std::string path = "/tmp/latscope_io_test.json";
  std::remove(path.c_str());
  write_report_atomic(path, Json{{"k", 1}});
  std::ifstream in(path);
  Json back;
  in >> back;
  CHECK(back["k"] == 1);
  std::ifstream tmp(path + ".tmp");
  CHECK_FALSE(tmp.good());  // no residue
  std::remove(path.c_str());

  CHECK_THROWS_AS(write_text_atomic("/nonexistent-dir/x.json", "y"), Error);
}

TEST_CASE("cli classifies and reports an envelope") {
  CliResult r = run_cli("classify --matrix '[[1,1],[0,1]]'");
  CHECK(r.exit_code == 0);
  Json env = Json::parse(r.out);
  CHECK(env["report"]["class"] == "NotExpandingOnSubspace");
  CHECK(env["tool"] == "latscope");
  CHECK(env["version"] == "0.1.0");
  CHECK(env.contains("config_hash"));
  CHECK(env["config"]["subcommand"] == "classify");
}

TEST_CASE("cli exit codes split validation from budget errors") {
  CHECK(run_cli("count-profile --no-such-flag").exit_code == 2);
  CHECK(run_cli("classify").exit_code == 2);
  CHECK(run_cli("classify --matrix 'oops'").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("lic-counterexample --matrix '[[2,0],[0,2]]' --radius 1 "
                "--side neg --search-limit 40")
            .exit_code == 3);
  CHECK(run_cli("--version").exit_code == 0);
}

TEST_CASE("cli seeded runs are byte-identical and env-seeded") {
  const std::string args =
      "calderon --preset dyadic-annulus -n 2 -J 40 --xi-count 10 --seed 42";
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  Json env = Json::parse(a.out);
  CHECK(env["seed"] == 42);
  for (const auto& row : env["report"]["rows"]) CHECK(row["sum"] == 1.0);

  // the child inherits the environment, so the fallback is testable in-process
  const std::string bare =
      "calderon --preset dyadic-annulus -n 2 -J 40 --xi-count 4";
  unsetenv("LATSCOPE_SEED");
  CHECK(Json::parse(run_cli(bare).out)["seed"] == 0);
  setenv("LATSCOPE_SEED", "7", 1);
  CHECK(Json::parse(run_cli(bare).out)["seed"] == 7);
  unsetenv("LATSCOPE_SEED");
}

TEST_CASE("cli worker count leaves the report unchanged") {
  const std::string base =
      "ubiquity --matrix '[[2,0],[0,3]]' --trials 4 --seed 9 --threads ";
  Json r1 = Json::parse(run_cli(base + "1").out);
  Json r8 = Json::parse(run_cli(base + "8").out);
  CHECK(r1["report"] == r8["report"]);
  CHECK(r1["report"]["pass_count"] == 4);
}

TEST_CASE("cli csv profile carries its config and verdict") {
  CliResult r = run_cli(
      "count-profile --preset shear-golden --j-min -12 --j-max 0 --radius 2");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("# latscope 0.1.0") == 0);
  CHECK(r.out.find("# config_hash 0x") != std::string::npos);
  CHECK(r.out.find("j,count,ratio,flags") != std::string::npos);
  CHECK(r.out.find("\n0,29,") != std::string::npos);
  CHECK(r.out.find("# verdict {") != std::string::npos);
}

TEST_CASE("cli writes output files atomically") {
  const std::string path = "/tmp/latscope_cli_out.json";
  std::remove(path.c_str());
  CliResult ok = run_cli("classify --matrix '[[2,0],[0,3]]' --output " + path);
  CHECK(ok.exit_code == 0);
  std::ifstream in(path);
  CHECK(in.good());
  std::ifstream tmp(path + ".tmp");
  CHECK_FALSE(tmp.good());
  std::remove(path.c_str());

  // a failing run must leave nothing behind
  CliResult bad =
      run_cli("classify --matrix 'zzz' --output /tmp/latscope_cli_bad.json");
  CHECK(bad.exit_code == 2);
  std::ifstream none("/tmp/latscope_cli_bad.json");
  CHECK_FALSE(none.good());
}

TEST_CASE("cli config file matches flag-for-flag invocation") {
  const std::string cfg_path = "/tmp/latscope_cli_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << "{\"lce-check\": {\"matrix\": \"[[2,0],[0,3]]\", \"radius\": 1, "
           "\"j-min\": -15, \"j-max\": 15, \"seed\": 4}}";
  }
  Json from_cfg =
      Json::parse(run_cli("lce-check --config " + cfg_path).out);
  Json from_flags = Json::parse(
      run_cli("lce-check --matrix '[[2,0],[0,3]]' --radius 1 --j-min -15 "
              "--j-max 15 --seed 4")
          .out);
  CHECK(from_cfg["report"] == from_flags["report"]);
  CHECK(from_cfg["report"]["trend"] == "Bounded");
  CHECK(from_cfg["report"]["prediction"] == "HoldsForAllLattices");
  std::remove(cfg_path.c_str());
}
