#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lortz/errors.hpp"
#include "lortz/io.hpp"
#include "test_fields.hpp"

using namespace lortz;
using namespace lortz::testing;

TEST_CASE("config round trip is lossless") {
  RunConfig c = parse_config(R"(
lattice: {kappa1: 0.7, kappa2: 1.3, d: 0.8, g: 9.81, sigma: 0.3, n1: 20, n2: 12, nz: 21}
h: {beta: 0.1, coeffs: [0, 0.1, 0.0003]}
t_list: [0.001, -0.002, 0.1]
tolerances: {picard: 3e-12, verify: 1e-13}
dispersion: {kmax: 7}
bernoulli: {levels: 4, samples: 51, full_surfaces: true}
output_dir: somewhere
seed: 42
)");
  CHECK(c.lattice.kappa1() == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(c.tol.picard == 3e-12);
  CHECK(c.seed == 42);
  const std::string once = dump_config(c);
  const RunConfig back = parse_config(once);
  CHECK(dump_config(back) == once);
  CHECK(back.lattice.lambda1 == c.lattice.lambda1);
  CHECK(back.lattice.lambda2 == c.lattice.lambda2);
  CHECK(back.h_coeffs == c.h_coeffs);
  CHECK(back.t_list == c.t_list);
  CHECK(back.tol.verify == c.tol.verify);
  CHECK(back.full_surfaces);
  CHECK(back.output_dir == "somewhere");
}

TEST_CASE("config schema violations") {
  CHECK_THROWS_AS(parse_config("nope: 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("lattice: {kappa1: 1, lambda1: 6}"), ConfigError);
  CHECK_THROWS_AS(parse_config("lattice: {n1: 9}"), ConfigError);
  CHECK_THROWS_AS(parse_config("lattice: {d: -1}"), ConfigError);
  CHECK_THROWS_AS(parse_config("t_list: [0.1, 0.1]"), ConfigError);
  CHECK_THROWS_AS(parse_config("t_list: []"), ConfigError);
  CHECK_THROWS_AS(parse_config("tolerances: {picard: 0}"), ConfigError);
  CHECK_THROWS_AS(parse_config("tolerances: {eta: -1e-3}"), ConfigError);
  CHECK_THROWS_AS(parse_config("lattice: {n1: abc}"), ConfigError);
  CHECK_THROWS_AS(parse_config("lattice: [1, 2"), ConfigError);
  CHECK_NOTHROW(parse_config(""));
}

TEST_CASE("json floats carry 17 significant digits") {
  Json j;
  j["a"] = 0.1;
  j["b"] = 1.0;
  j["c"] = std::vector<double>{1e-6, -2.5};
  j["n"] = 3;
  j["s"] = "x";
  j["bad"] = std::nan("");
  const std::string s = dump_json(j, 0);
  CHECK(s == R"({"a":0.10000000000000001,"b":1,"c":[9.9999999999999995e-07,-2.5],"n":3,"s":"x","bad":null})");
  CHECK(Json::parse(s)["a"].get<double>() == 0.1);
  CHECK(dump_json(j) == dump_json(j));
}

TEST_CASE("field csv round trip is exact") {
  auto g = grid(8, 9);
  auto e = eta1(g, 0.37);
  auto back = read_surface_csv(g, field_csv(e), Parity{1, 1});
  CHECK(back.v == e.v);
  auto u = random_vector(g, SymmetryClass::plus, 5);
  auto ub = read_vector_csv(g, field_csv(u), SymmetryClass::plus);
  for (int i = 0; i < 3; ++i) CHECK(ub[i].v == u[i].v);
  CHECK_THROWS_AS(read_surface_csv(grid(10, 9), field_csv(e)), ConfigError);
}

TEST_CASE("curve csv splits disjoint pieces into segments") {
  LevelSurface s;
  s.K = 1.5;
  s.x1 = {0.0};
  s.x2 = {0.0, 1.0, 2.0, 3.0, 4.0};
  s.psi = {-0.5, std::nan(""), -0.4, -0.3, std::nan("")};
  s.mask = {1, 0, 1, 1, 0};
  CHECK(curve_csv({s}) == "K,segment,x2,x3\n1.5,0,0,-0.5\n1.5,1,2,-0.40000000000000002\n1.5,1,3,-0.29999999999999999\n");
}

TEST_CASE("recheck matches the solver on an accepted point") {
  auto g = grid(16, 17);
  auto h = BernoulliFunctionH::affine(0.01, g->spec().lambda1 / c_star(g->spec()));
  auto br = continue_branch(g, h, {2e-3});
  const auto& b = br[0];
  const Recheck r = recheck_point(b.eta, b.u, b.c, h, SolverOptions{});
  CHECK(r.residuals.max() < 1e-9);
  CHECK(std::abs(r.residuals.euler - b.residuals.euler) < 1e-9);
  CHECK(r.diamond < 1e-8);
  CHECK(r.symmetry < 1e-12);
  // deterministic
  const Recheck r2 = recheck_point(b.eta, b.u, b.c, h, SolverOptions{});
  CHECK(dump_json(recheck_json(r)) == dump_json(recheck_json(r2)));
}

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "lortz_io_test";
  std::filesystem::remove_all(dir);
  write_text_atomic(dir / "a" / "b.txt", "hello\n");
  CHECK(read_text(dir / "a" / "b.txt") == "hello\n");
  CHECK_FALSE(std::filesystem::exists(dir / "a" / "b.txt.tmp"));
  std::filesystem::remove_all(dir);
}
