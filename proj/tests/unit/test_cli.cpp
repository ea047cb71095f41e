#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "obsdet/cli.hpp"
#include "obsdet/geo_io.hpp"
#include "support.hpp"

using namespace obsdet;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {
struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Three eastbound tracks of 20 samples, 10 s apart.
std::string tiny_csv() {
  const Projection proj({1.0, 103.0});
  std::ostringstream s;
  s << "track_id,timestamp,lat,lon\n";
  s.precision(10);
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 20; ++i) {
      const auto [lat, lon] = proj.unproject({100.0 * i + 3.0 * (i % 3), 50.0 * t});
      s << "trk" << t << "," << 1000 + 10 * i << "," << lat << "," << lon << "\n";
    }
  }
  return s.str();
}

bool has_line(const std::string& text, const std::string& line) {
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) {
    if (l == line) return true;
  }
  return false;
}
}  // namespace

TEST_CASE("index command") {
  TempDir dir;
  spit(dir.file("tiny.csv"), tiny_csv());
  const Outcome r =
      run_cli({"index", "--input", dir.file("tiny.csv"), "--output", dir.file("tiny.idx")});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(has_line(r.out, "window=6 step=1 k=8"));
  CHECK(has_line(r.out, "trajectories=3"));
  CHECK(has_line(r.out, "windows=45"));
  CHECK(r.err.find("build_time_s=") != std::string::npos);
  CHECK(r.out.find("time") == std::string::npos);

  SUBCASE("identical invocations write identical index files") {
    REQUIRE(run_cli({"index", "--input", dir.file("tiny.csv"), "--output", dir.file("b.idx")})
                .code == 0);
    CHECK(slurp(dir.file("tiny.idx")) == slurp(dir.file("b.idx")));
  }
  SUBCASE("a missing input is a usage error") {
    CHECK(run_cli({"index", "--input", dir.file("none.csv"), "--output", dir.file("x.idx")})
              .code == cli::kExitUsage);
  }
  SUBCASE("invalid partition parameters are usage errors") {
    CHECK(run_cli({"index", "--input", dir.file("tiny.csv"), "--output", dir.file("x.idx"),
                   "--window", "4", "--step", "4"})
              .code == cli::kExitUsage);
  }
  SUBCASE("a malformed CSV is a usage error") {
    spit(dir.file("bad.csv"), "track_id,timestamp,lat,lon\nA,zero,1,2\n");
    const Outcome bad =
        run_cli({"index", "--input", dir.file("bad.csv"), "--output", dir.file("x.idx")});
    CHECK(bad.code == cli::kExitUsage);
    CHECK(bad.err.find(":2") != std::string::npos);
  }
  SUBCASE("identical corpora give no obstacles") {
    const Outcome d = run_cli({"detect", "--index", dir.file("tiny.idx"), "--query",
                               dir.file("tiny.csv"), "--output", dir.file("det.geojson")});
    REQUIRE(d.code == 0);
    CHECK(has_line(d.out, "obstacles=0"));
    CHECK(has_line(d.out, "query_windows=45"));
    const auto doc = read_json_file(dir.file("det.geojson"));
    CHECK(doc["features"].empty());
  }
  SUBCASE("detection parameters are range checked") {
    const std::string idx = dir.file("tiny.idx");
    const std::string q = dir.file("tiny.csv");
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--tau", "1.960"}).code == 0);
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--tau", "0"}).code == 2);
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--delta", "-1"}).code == 2);
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--sigma", "0"}).code == 2);
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--k", "0"}).code == 2);
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--z-mode", "other"}).code == 2);
    CHECK(run_cli({"detect", "--index", idx, "--query", q, "--z-mode", "paper",
                   "--density-mode", "paper_literal", "--no-optimizations", "--exact-knn"})
              .code == 0);
  }
  SUBCASE("a corrupt index is a usage error") {
    spit(dir.file("junk.idx"), "not an index");
    CHECK(run_cli({"detect", "--index", dir.file("junk.idx"), "--query", dir.file("tiny.csv")})
              .code == cli::kExitUsage);
  }
}

TEST_CASE("usage errors") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"bogus"}).code == cli::kExitUsage);
  CHECK(run_cli({"index"}).code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("synth, detect, eval and sweep on a planted scenario") {
  TempDir dir;
  const std::string a = (dir.path() / "a").string();
  const std::string b = (dir.path() / "b").string();
  const Outcome s1 = run_cli({"synth", "--output-dir", a, "--seed", "42"});
  REQUIRE(s1.code == 0);
  CHECK(has_line(s1.out, "reference_tracks=50"));
  CHECK(has_line(s1.out, "query_tracks=50"));
  CHECK(has_line(s1.out, "truth_vertices=32"));
  REQUIRE(run_cli({"synth", "--output-dir", b, "--seed", "42"}).code == 0);
  for (const char* f : {"reference.csv", "query.csv", "truth.geojson", "scenario.json"}) {
    CHECK(slurp(a + "/" + f) == slurp(b + "/" + f));
  }

  const std::string idx = dir.file("ref.idx");
  REQUIRE(run_cli({"index", "--input", a + "/reference.csv", "--output", idx}).code == 0);
  const Outcome d = run_cli({"detect", "--index", idx, "--query", a + "/query.csv", "--output",
                             dir.file("det.geojson")});
  REQUIRE(d.code == 0);
  CHECK_FALSE(has_line(d.out, "obstacles=0"));
  CHECK(d.err.find("query_time_s=") != std::string::npos);

  const Outcome again = run_cli({"detect", "--index", idx, "--query", a + "/query.csv",
                                 "--output", dir.file("det2.geojson")});
  CHECK(again.out == d.out);
  CHECK(slurp(dir.file("det.geojson")) == slurp(dir.file("det2.geojson")));

  const Outcome e = run_cli({"eval", "--detections", dir.file("det.geojson"), "--truth",
                             a + "/truth.geojson"});
  REQUIRE(e.code == 0);
  CHECK(has_line(e.out, "precision=100.0"));
  CHECK(has_line(e.out, "recall=100.0"));
  CHECK(has_line(e.out, "f1=100.0"));

  SUBCASE("an empty truth file is a usage error") {
    spit(dir.file("empty.geojson"), "{\"type\":\"FeatureCollection\",\"features\":[]}\n");
    CHECK(run_cli({"eval", "--detections", dir.file("det.geojson"), "--truth",
                   dir.file("empty.geojson")})
              .code == cli::kExitUsage);
  }
  SUBCASE("sweep emits one row per grid point") {
    const Outcome w = run_cli({"sweep", "--index", idx, "--query", a + "/query.csv", "--truth",
                               a + "/truth.geojson"});
    REQUIRE(w.code == 0);
    std::istringstream in(w.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "delta,tau,precision,recall,f1,obstacles,candidates,query_time_s");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].rfind("0.5,1.645,", 0) == 0);
    CHECK(rows[7].rfind("4,1.645,", 0) == 0);

    const Outcome grid = run_cli({"sweep", "--index", idx, "--query", a + "/query.csv", "--truth",
                                  a + "/truth.geojson", "--deltas", "1.0,2.0", "--taus",
                                  "1.282,1.960"});
    REQUIRE(grid.code == 0);
    std::istringstream g(grid.out);
    std::size_t count = 0;
    while (std::getline(g, line)) ++count;
    CHECK(count == 5);
  }
  SUBCASE("an unwritable output directory is a usage error") {
    spit(dir.file("plain"), "x");
    CHECK(run_cli({"synth", "--output-dir", dir.file("plain")}).code == cli::kExitUsage);
  }
}

TEST_CASE("config file supplies defaults that flags override") {
  TempDir dir;
  spit(dir.file("tiny.csv"), tiny_csv());
  spit(dir.file("cfg.toml"), "[index]\nwindow = 5\nstep = 2\n");
  const Outcome r = run_cli({"--config", dir.file("cfg.toml"), "index", "--input",
                             dir.file("tiny.csv"), "--output", dir.file("t.idx"), "--step", "1"});
  REQUIRE(r.code == 0);
  CHECK(has_line(r.out, "window=5 step=1 k=8"));
  CHECK(has_line(r.out, "windows=48"));
}
