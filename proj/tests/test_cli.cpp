#include "thetalab/io.hpp"
#include <doctest.h>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using thetalab::io::json;

namespace
{

struct Run
{
   std::string out;
   int code;
};

Run run(std::string const& args)
{
   std::string cmd = std::string(THETALAB_BIN) + " " + args + " 2>&1";
   Run r;
   FILE* p = popen(cmd.c_str(), "r");
   REQUIRE(p != nullptr);
   std::array<char, 4096> buf;
   std::size_t n;
   while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
   int st = pclose(p);
   r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
   return r;
}

std::string tmp(std::string const& name)
{
   auto d = std::filesystem::temp_directory_path() / ("thetalab_cli_" + name);
   std::filesystem::remove_all(d);
   return d.string();
}

} // namespace

TEST_CASE("weights")
{
   auto r = run("weights --point theta-bn");
   REQUIRE(r.code == 0);
   auto j = json::parse(r.out);
   CHECK(j["p"].get<double>() == doctest::Approx(0.275899).epsilon(2e-6));
   CHECK(j["K"].get<double>() == doctest::Approx(0.446933).epsilon(2e-6));
   CHECK(j["tau"].get<double>() == doctest::Approx(2.630986).epsilon(2e-6));
   CHECK(j["rho"].size() == 9);
   auto d = json::parse(run("weights --point theta-ds").out);
   CHECK(d["p"] == 0.0);
   CHECK(d["K"] == 0.5);
   CHECK(d["tau"] == 2.0);
   auto g = json::parse(run("weights --gamma 0.7853981633974483 --branch plus").out);
   CHECK(g["p"].get<double>() == doctest::Approx(1.38704).epsilon(5e-6));
}

TEST_CASE("basis dimensions")
{
   auto r = run("basis --L 3");
   REQUIRE(r.code == 0);
   CHECK(r.out == "L,ell0,ell1,ell2,ell3\n3,4,6,3,1\n");
}

TEST_CASE("predictions")
{
   auto w = json::parse(run("predict --what watermelon --gamma 0.7853981633974483 --m 2").out);
   CHECK(w["x_m"].get<double>() == doctest::Approx(1.0 / 12));
   auto e = json::parse(run("predict --what exponents-bn").out);
   CHECK(e.dump().find("1.2") != std::string::npos);
}

TEST_CASE("errors are JSON with distinct exit codes")
{
   auto a = run("weights --point nowhere");
   CHECK(a.code == 3);
   auto ja = json::parse(a.out);
   CHECK(ja["error"]["type"] == "DomainError");
   auto b = run("basis");
   CHECK(b.code == 2);
   CHECK(json::parse(b.out)["error"]["type"] == "UsageError");
   auto c = run("fit --model central-charge --in /nonexistent.csv");
   CHECK(c.code != 0);
   CHECK(run("vertex-spectrum --point theta-ds --L 3 --m 0").code == 3);
}

TEST_CASE("config replay reproduces the outputs")
{
   auto d1 = tmp("r1"), d2 = tmp("r2");
   REQUIRE(run("spectrum --L 4 5 --ell 0 --twist loop --out " + d1).code == 0);
   REQUIRE(run("--config " + d1 + "/run.conf spectrum --out " + d2).code == 0);
   auto m1 = json::parse(thetalab::io::read_text(d1 + "/manifest.json"));
   auto m2 = json::parse(thetalab::io::read_text(d2 + "/manifest.json"));
   CHECK(m1["outputs"]["spectrum.csv"] == m2["outputs"]["spectrum.csv"]);
   CHECK(m1["outputs"]["result.json"] == m2["outputs"]["result.json"]);
   CHECK(m1["outputs"]["spectrum.csv"] == thetalab::io::sha256_file(d1 + "/spectrum.csv"));
   std::filesystem::remove_all(d1);
   std::filesystem::remove_all(d2);
}

TEST_CASE("fit from a CSV carries the input hash")
{
   auto d = tmp("fit");
   std::filesystem::create_directories(d);
   std::string csv = "L,f\n";
   for (int L = 4; L <= 10; ++L)
      csv += std::to_string(L) + "," + thetalab::io::fmt(0.1 - M_PI * 1.5 / (6.0 * L * L)) + "\n";
   thetalab::io::write_text(d + "/in.csv", csv);
   auto r = run("fit --model central-charge --in " + d + "/in.csv");
   REQUIRE(r.code == 0);
   auto j = json::parse(r.out);
   CHECK(j["parameters"]["c"]["value"].get<double>() == doctest::Approx(1.5).epsilon(1e-9));
   CHECK(j.dump().find(thetalab::io::sha256_hex(csv)) != std::string::npos);
   std::filesystem::remove_all(d);
}

TEST_CASE("small Monte Carlo run")
{
   auto d = tmp("mc");
   auto r = run("mc --point theta-ds --L 8 --sweeps 200 --warmup 20 --replicas 2 --seed 3 --out " + d);
   REQUIRE(r.code == 0);
   CHECK(std::filesystem::exists(d + "/histogram.csv"));
   auto m = json::parse(thetalab::io::read_text(d + "/manifest.json"));
   CHECK(m["seeds"].size() >= 1);
   auto z = run("mc --point theta-ds --L 8 --sweeps 0 --warmup 0 --replicas 2 --out " + d);
   CHECK(z.code == 0);
   std::filesystem::remove_all(d);
}
