#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "chdisguise/channel_io.hpp"
#include "chdisguise/channels.hpp"
#include "cli.hpp"
#include "oracles.hpp"

using namespace chdisguise;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("chdisguise_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return file(name);
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("fixture bitflip serializes the Kraus operators") {
  const Run r = run({"fixture", "bitflip", "--a", "0.2"});
  REQUIRE(r.code == 0);
  const KrausChannel ch = channel_from_json(json::parse(r.out));
  REQUIRE(ch.size() == 2);
  CHECK(max_abs(ch.kraus_ops()[0] - std::sqrt(0.8) * identity(2)) < 1e-16);

  const Run id = run({"fixture", "bitflip", "--a", "0"});
  REQUIRE(id.code == 0);
  CHECK(id.out == canonical_json(channel_to_json(identity_channel(2))) + "\n");
}

TEST_CASE("fixture appendix-b-e keeps the tabulated entries") {
  const Run r = run({"fixture", "appendix-b-e"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["kraus"][0]["re"][0][0].get<double>() == -0.504828);
}

TEST_CASE("fixture errors") {
  CHECK(run({"fixture", "amplitude"}).code == 2);
  CHECK(run({"fixture", "bitflip"}).code == 2);
  CHECK(run({"fixture", "bitflip", "--a", "1.5"}).code == 2);
  CHECK(run({"fixture", "bitflip", "--a", "0.2", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("fixture output round-trips byte for byte") {
  TempDir dir;
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"fixture", "appendix-b-f"}, {"fixture", "xzflip", "--c", "0.3"},
        {"gen-random", "--dim", "3", "--kraus", "2", "--seed", "9"}}) {
    const Run first = run(args);
    REQUIRE(first.code == 0);
    const std::string path = dir.write("ch.json", first.out);
    const KrausChannel back = load_channel(path);
    CHECK(canonical_json(channel_to_json(back)) + "\n" == first.out);
  }
  CHECK(run({"gen-random", "--seed", "4"}).out == run({"gen-random", "--seed", "4"}).out);
  CHECK(run({"gen-random", "--seed", "4"}).out != run({"gen-random", "--seed", "5"}).out);
}

TEST_CASE("profile of flip fixtures follows the closed-form curve") {
  TempDir dir;
  const std::string e = dir.write("e.json", run({"fixture", "bitflip", "--a", "0.2"}).out);
  const std::string f = dir.write("f.json", run({"fixture", "phaseflip", "--b", "0.2"}).out);
  const Run r = run({"profile", e, f, "--beta-grid", "log:0.01:100:60", "--jobs", "2"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 61);
  CHECK(rows[0] == std::vector<std::string>{"beta", "alpha_lo", "alpha_hi", "p_lo", "q_lo", "p_hi",
                                            "q_hi", "tight"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double beta = std::stod(rows[i][0]);
    CHECK(std::stod(rows[i][1]) == doctest::Approx(oracle::flip_alpha(0.2, 0.2, beta)).epsilon(1e-10));
    const double p = std::stod(rows[i][3]);
    const double q = std::stod(rows[i][4]);
    CHECK(std::abs(q - oracle::flip_q_of_p(0.2, 0.2, p)) <= 1e-8);
    CHECK(rows[i][7] == "1");
  }
}

TEST_CASE("profile output is deterministic across runs and worker counts") {
  TempDir dir;
  const std::string e = dir.write("e.json", run({"fixture", "appendix-b-e"}).out);
  const std::string f = dir.write("f.json", run({"fixture", "appendix-b-f"}).out);
  const Run one = run({"profile", e, f, "--beta-grid", "log:0.1:10:40", "--jobs", "1"});
  const Run four = run({"profile", e, f, "--beta-grid", "log:0.1:10:40", "--jobs", "4"});
  REQUIRE(one.code == 0);
  CHECK(one.out == four.out);

  REQUIRE(run({"profile", e, f, "--beta-grid", "log:0.1:10:40", "--out", dir.file("a")}).code == 0);
  REQUIRE(run({"profile", e, f, "--beta-grid", "log:0.1:10:40", "--out", dir.file("b")}).code == 0);
  CHECK(slurp(dir.file("a/profile.csv")) == slurp(dir.file("b/profile.csv")));
  CHECK(slurp(dir.file("a/hull.csv")) == slurp(dir.file("b/hull.csv")));
  CHECK(slurp(dir.file("a/profile.csv")) == one.out);

  // Lower bound never exceeds the upper bound.
  const auto rows = parse_csv(one.out);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) <= std::stod(rows[i][2]));
  const auto hull = parse_csv(slurp(dir.file("a/hull.csv")));
  CHECK(hull[0] == std::vector<std::string>{"p", "q"});
}

TEST_CASE("profile of identical channels is all zeros") {
  TempDir dir;
  const std::string e = dir.write("e.json", run({"gen-random", "--seed", "3"}).out);
  const Run r = run({"profile", e, e, "--beta-grid", "log:0.5:2:5"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // Only beta = 1 sits on the trade-off curve with p = q = 0; the other
    // samples are still tight.
    CHECK(rows[i][7] == "1");
  }
  const Run mid = run({"profile", e, e, "--beta-grid", "log:1:1:1"});
  REQUIRE(mid.code == 0);
  const auto one = parse_csv(mid.out);
  REQUIRE(one.size() == 2);
  CHECK(std::stod(one[1][3]) == 0.0);
  CHECK(std::stod(one[1][4]) == 0.0);
}

TEST_CASE("profile with exact column") {
  TempDir dir;
  const std::string e = dir.write("e.json", run({"fixture", "appendix-b-e"}).out);
  const std::string f = dir.write("f.json", run({"fixture", "appendix-b-f"}).out);
  const Run r = run({"profile", e, f, "--beta-grid", "log:0.5:2:3", "--exact"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows[0].back() == "alpha_exact");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double exact = std::stod(rows[i][8]);
    CHECK(exact >= std::stod(rows[i][1]) - 1e-6);
    CHECK(exact <= std::stod(rows[i][2]) + 1e-6);
  }
}

TEST_CASE("input and numerical failures map to exit codes") {
  TempDir dir;
  const std::string e = dir.write("e.json", run({"fixture", "appendix-b-e"}).out);
  const std::string f = dir.write("f.json", run({"fixture", "appendix-b-f"}).out);
  const std::string bad = dir.write("bad.json", "{\"dim\": 2, \"kraus\": [");
  const std::string not_tp = dir.write("ntp.json", R"({"dim":2,"kraus":[{"re":[[1,0],[0,0.5]]}]})");

  CHECK(run({"profile", e, bad}).code == 2);
  CHECK(run({"profile", e, not_tp}).code == 2);
  CHECK(run({"profile", e, dir.file("missing.json")}).code == 2);
  CHECK(run({"profile", e}).code == 2);
  CHECK(run({"profile", e, f, "--beta-grid", "lin:0:1:3"}).code == 2);
  CHECK(run({"exact", e, f, "--beta", "-1"}).code == 2);

  const Run num = run({"profile", e, f, "--beta-grid", "log:0.5:2:3", "--exact", "--sdp-max-iter", "2"});
  CHECK(num.code == 3);
  CHECK(num.err.find("beta sample") != std::string::npos);
  CHECK(run({"exact", e, f, "--sdp-max-iter", "2"}).code == 3);
}

TEST_CASE("exact verb reports alpha and harmonizers") {
  TempDir dir;
  const std::string e = dir.write("e.json", run({"fixture", "bitflip", "--a", "0.2"}).out);
  const std::string f = dir.write("f.json", run({"fixture", "phaseflip", "--b", "0.2"}).out);
  const Run r = run({"exact", e, f, "--beta", "1"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["alpha_hat"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(doc["p"].get<double>() == doctest::Approx(1.0 / 6).epsilon(1e-12));
  const KrausChannel fd = channel_from_json(doc["f_delta"]);
  const KrausChannel ed = channel_from_json(doc["e_delta"]);
  const ComplexMatrix lhs = (5.0 / 6) * oracle::choi(bit_flip(0.2)) + (1.0 / 6) * oracle::choi(ed);
  const ComplexMatrix rhs = (5.0 / 6) * oracle::choi(phase_flip(0.2)) + (1.0 / 6) * oracle::choi(fd);
  CHECK(max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("relation verbs") {
  TempDir dir;
  const std::string bf = dir.write("bf.json", run({"fixture", "bitflip", "--a", "0.2"}).out);
  const std::string id = dir.write("id.json", run({"fixture", "bitflip", "--a", "0"}).out);
  const std::string pf = dir.write("pf.json", run({"fixture", "phaseflip", "--b", "0.2"}).out);
  const std::string xz = dir.write("xz.json", run({"fixture", "xzflip", "--c", "0.2"}).out);

  const Run c = run({"containment", bf, id});
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["q_min"].get<double>() == doctest::Approx(0.2).epsilon(1e-9));

  const Run qkd = run({"qkd", "--p", "0.1", "--dim", "2"});
  REQUIRE(qkd.code == 0);
  CHECK(json::parse(qkd.out)["rate_bound_bits"].get<double>() == doctest::Approx(0.1));

  const Run comp = run({"compose", "--p1", "0", "--q1", "0", "--p2", "0.3", "--q2", "0.1", "--mode", "product"});
  REQUIRE(comp.code == 0);
  CHECK(json::parse(comp.out)["p2"].get<double>() == doctest::Approx(0.3));
  CHECK(json::parse(comp.out)["q2"].get<double>() == doctest::Approx(0.1));
  CHECK(run({"compose", "--p1", "0", "--q1", "0", "--p2", "0.3", "--q2", "0.1", "--mode", "max"}).code == 2);

  const Run dia = run({"diamond", "--p", "0.5", "--dim", "2"});
  REQUIRE(dia.code == 0);
  CHECK(json::parse(dia.out)["diamond_lo"].get<double>() == doctest::Approx(0.25));
  CHECK(json::parse(dia.out)["diamond_hi"].get<double>() == doctest::Approx(2.0));
  const Run dia_files = run({"diamond", bf, pf});
  REQUIRE(dia_files.code == 0);
  CHECK(json::parse(dia_files.out)["diamond_hi"].get<double>() == doctest::Approx(4.0 / 6).epsilon(1e-9));

  const Run tri = run({"triangle", "--p1", "0.2", "--q1", "0.2", "--p2", "0.2", "--q2", "0.2"});
  REQUIRE(tri.code == 0);
  CHECK(json::parse(tri.out)["p2"].get<double>() == doctest::Approx(0.32 / 0.96));

  const Run region = run({"triangle", bf, pf, xz, "--beta-grid", "log:0.01:100:60", "--out", dir.file("t")});
  REQUIRE(region.code == 0);
  const auto boundary = parse_csv(slurp(dir.file("t/triangle_boundary.csv")));
  REQUIRE(boundary.size() > 2);
  for (std::size_t i = 1; i < boundary.size(); ++i) {
    const double p = std::stod(boundary[i][0]);
    CHECK(std::stod(boundary[i][1]) - oracle::flip_q_of_p(0.2, 0.2, p) >= -1e-8);
  }
  CHECK(fs::exists(dir.file("t/triangle_points.csv")));
  CHECK(run({"triangle", bf, pf}).code == 2);
}
