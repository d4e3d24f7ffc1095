#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "dsmc/experiments.hpp"
#include "dsmc/report.hpp"

using namespace dsmc;

TEST_CASE("csv quoting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream os;
  write_csv_row(os, {"x", "1,2", ""});
  CHECK(os.str() == "x,\"1,2\",\r\n");
  CHECK(fmt(NAN) == "NA");
  CHECK(fmt(0.5, 2) == "0.50");
}

TEST_CASE("run rows follow the header") {
  RunConfig c;
  c.network.n = 4;
  c.network.k = 4;
  c.cycles = 2000;
  c.warmup = 100;
  c.traffic.read_fraction = 1.0;
  const SimStats s = run_config(c);
  const auto row = run_csv_row(c, s);
  REQUIRE(row.size() == run_csv_header().size());
  CHECK(run_csv_header()[0] == "config_hash");
  CHECK(row[1] == "flat");
  CHECK(row[8] == "2000");
  CHECK(row[13] == "NA");  // no writes
  CHECK(row[12] != "NA");
}

TEST_CASE("sweep expansion and parallel runs keep order") {
  RunConfig c;
  c.network.n = 4;
  c.network.k = 4;
  c.cycles = 1500;
  c.warmup = 100;
  c.rates = {0.2, 0.6, 1.0};
  const auto runs = expand_sweep(c);
  REQUIRE(runs.size() == 3);
  CHECK(runs[1].traffic.injection_rate == 0.6);
  const auto serial = run_all(runs, 1);
  const auto parallel = run_all(runs, 3);
  CHECK(serial == parallel);
  CHECK(throughput(serial[0]) < throughput(serial[2]));
}

TEST_CASE("svg output") {
  Plot p{"t <1>", "x", "y", {{"a", {{0, 1}, {1, 2}}}, {"b", {{0, 0.5}, {1, NAN}}}}};
  const std::string svg = render_svg(p);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg.find("t &lt;1&gt;") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}
