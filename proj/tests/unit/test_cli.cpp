#include "cli.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rmats");
  std::ostringstream out, err;
  const int code = rmats::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Canonical price file as the fetcher writes it: 3 tickers, 30 weekdays.
std::string fetched_file() {
  auto dates = rmats::weekday_calendar(*rmats::parse_date("2024-01-02"), 30);
  std::string text = "date,SPY,TLT,GLD\n";
  for (std::size_t i = 0; i < dates.size(); ++i) {
    text += rmats::format_date(dates[i]) + "," + rmats::format_number(470.5 + 0.25 * static_cast<double>(i)) + "," +
            (i == 7 ? std::string() : rmats::format_number(95.0 - 0.1 * static_cast<double>(i))) + "," +
            rmats::format_number(190.0 + 0.5 * static_cast<double>(i % 4)) + "\n";
  }
  return text;
}

const fs::path& reference_file() {
  static const fs::path path = [] {
    auto dir = rmats::testing::temp_dir("cli_ref");
    auto p = dir / "prices.csv";
    auto r = cli({"synth", "--spec", rmats::testing::reference_spec_path().string(), "--out", p.string()});
    REQUIRE(r.code == 0);
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("help exits zero") {
  auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("backtest") != std::string::npos);
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"backtest", "--prices", "x.csv"}).code == 1);
}

TEST_CASE("validate accepts a fetched canonical file") {
  auto dir = rmats::testing::temp_dir("cli_validate");
  write(dir / "fetched.csv", fetched_file());
  auto r = cli({"validate", "--prices", (dir / "fetched.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("30 rows, 3 tickers") != std::string::npos);

  const std::string cmd = std::string(RMATS_CLI_PATH) + " validate --prices " + (dir / "fetched.csv").string() +
                          " > " + (dir / "log.txt").string() + " 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);

  write(dir / "bad.csv", "date,SPY\n2024-01-03,1\n2024-01-02,1\n");
  auto b = cli({"validate", "--prices", (dir / "bad.csv").string()});
  CHECK(b.code == 1);
  CHECK(b.err.find("line 3") != std::string::npos);

  write(dir / "events.csv", "name,start,end\nshock,2024-01-03,2024-01-10\n");
  CHECK(cli({"validate", "--events", (dir / "events.csv").string()}).code == 0);
  CHECK(cli({"validate"}).code == 1);
}

TEST_CASE("bad configuration exits one and names the key") {
  auto dir = rmats::testing::temp_dir("cli_config");
  write(dir / "bad.cfg", "eps=0.01\nfoo=3\n");
  auto r = cli({"validate", "--config", (dir / "bad.cfg").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("'foo'") != std::string::npos);

  auto b = cli({"backtest", "--prices", reference_file().string(), "--config", (dir / "bad.cfg").string(), "--out",
                (dir / "run").string()});
  CHECK(b.code == 1);
  CHECK(b.err.find("'foo'") != std::string::npos);

  write(dir / "range.cfg", "cvar.alpha=2\n");
  CHECK(cli({"validate", "--config", (dir / "range.cfg").string()}).code == 1);
  CHECK(cli({"validate", "--prices", (dir / "missing.csv").string()}).code == 1);
}

TEST_CASE("runtime failures exit two") {
  auto dir = rmats::testing::temp_dir("cli_runtime");
  write(dir / "short.csv", fetched_file());
  write(dir / "c.cfg", "start=2024-01-03\nend=2024-02-09\n");
  auto r = cli({"backtest", "--prices", (dir / "short.csv").string(), "--config", (dir / "c.cfg").string(),
                "--strategy", "equal_weight", "--out", (dir / "run").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("warm-up") != std::string::npos);
}

TEST_CASE("backtest writes the run directory") {
  auto dir = rmats::testing::temp_dir("cli_backtest");
  auto r = cli({"backtest", "--prices", reference_file().string(), "--strategy", "rmats,equal_weight", "--out",
                (dir / "run").string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"equity.csv", "weights.csv", "rounds.csv", "report.json"}) CHECK(fs::exists(dir / "run" / f));
  auto report = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
  CHECK(report["primary"] == "rmats");
  CHECK(report["rebalances"].get<int>() >= 27);
  CHECK(report["strategies"].contains("equal_weight"));
  CHECK(report["strategies"]["rmats"]["events"]["windows"].size() == 5);
  CHECK(report["convergence"]["all"]["max_rounds"].get<int>() <= 8);
  CHECK(report["stress_test"].size() == 5);
  CHECK(slurp(dir / "run" / "equity.csv").rfind("date,rmats,equal_weight\n", 0) == 0);

  auto c = cli({"convergence", "--rounds", (dir / "run" / "rounds.csv").string()});
  REQUIRE(c.code == 0);
  auto stats = nlohmann::json::parse(c.out);
  CHECK(stats["all"] == report["convergence"]["all"]);
}

TEST_CASE("identical invocations give byte-identical reports") {
  auto dir = rmats::testing::temp_dir("cli_determinism");
  const std::string base = std::string(RMATS_CLI_PATH) + " backtest --prices " + reference_file().string() + " --out ";
  REQUIRE(std::system((base + (dir / "a").string()).c_str()) == 0);
  REQUIRE(std::system((base + (dir / "b").string()).c_str()) == 0);
  const auto a = slurp(dir / "a" / "report.json");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "rounds.csv") == slurp(dir / "b" / "rounds.csv"));
}

TEST_CASE("ablate and synth seeds") {
  auto dir = rmats::testing::temp_dir("cli_ablate");
  write(dir / "c.cfg", "end=2023-08-31\n");
  write(dir / "e.csv", "name,start,end\nSVB,2023-03-01,2023-03-31\n");
  auto r = cli({"ablate", "--prices", reference_file().string(), "--config", (dir / "c.cfg").string(), "--events",
                (dir / "e.csv").string(), "--variants", "full,no_recursion", "--out", (dir / "ab").string()});
  REQUIRE(r.code == 0);
  auto csv = slurp(dir / "ab" / "ablation.csv");
  CHECK(csv.find("no_recursion,") != std::string::npos);
  CHECK(cli({"ablate", "--prices", reference_file().string(), "--variants", "bogus", "--out", (dir / "x").string()})
            .code == 1);

  auto s = cli({"synth", "--spec", rmats::testing::reference_spec_path().string(), "--seed", "7", "--out",
                (dir / "s7.csv").string()});
  REQUIRE(s.code == 0);
  CHECK(slurp(dir / "s7.csv") != slurp(reference_file()));
}
