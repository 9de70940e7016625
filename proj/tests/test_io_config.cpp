#include <gtest/gtest.h>

#include <sstream>

#include "rbk/config.hpp"
#include "rbk/io.hpp"

namespace rbk {
namespace {

TEST(Csv, RoundTripIsBitExact) {
  const Trajectory tr = integrate_t_chart(random_positive(4, 31), 10.0, {});
  std::stringstream ss(to_csv(tr, {"y", "tau"}));
  const CsvTable t = read_csv(ss);
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "c_1", "c_2", "c_3", "c_4", "y", "tau"}));
  ASSERT_EQ(t.rows.size(), tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(t.rows[i][0], tr[i].x);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(t.rows[i][j + 1], tr[i].state[j]);
    EXPECT_EQ(t.rows[i][5], tr[i].aux[0]);
    EXPECT_EQ(t.rows[i][6], tr[i].aux[2]);
  }
}

TEST(Csv, PhiHeader) {
  const BlowupRun run = integrate_phi_to_blowup(Vector{1, 1}, 1e3);
  EXPECT_EQ(csv_header(run.trajectory, {"tau"}), (std::vector<std::string>{"y", "phi_1", "phi_2", "tau"}));
  EXPECT_THROW(to_csv(run.trajectory, {"y"}), InvalidInput);
}

TEST(Csv, ReadErrors) {
  std::stringstream empty;
  EXPECT_THROW(read_csv(empty), InvalidInput);
  std::stringstream ragged("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(ragged), InvalidInput);
  std::stringstream junk("a\nx\n");
  EXPECT_THROW(read_csv(junk), InvalidInput);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0}) EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
}

TEST(Config, Defaults) {
  const RunConfig rc = parse_config(Json{{"N", 3}});
  EXPECT_EQ(rc.system.c0, (Vector{1, 1, 1}));
  EXPECT_EQ(rc.chart, Chart::t);
  EXPECT_EQ(rc.t_end, 100.0);
  EXPECT_EQ(rc.cap, 1e10);
  EXPECT_EQ(rc.settings.rtol, 1e-9);
  EXPECT_EQ(rc.settings.atol, 1e-12);
  EXPECT_EQ(rc.points_per_decade, 64);
  EXPECT_EQ(rc.blowup_start(), (Vector{1, 1}));
}

TEST(Config, SeedFromInitializerOrText) {
  EXPECT_EQ(parse_config(Json{{"N", 3}, {"seed", 4}}).seed, 4u);
  EXPECT_EQ(parse_config(Json::parse(R"({"N":3,"seed":4})")).seed, 4u);
}

TEST(Config, Families) {
  EXPECT_EQ(parse_config(Json::parse(R"({"N":3,"c0":{"uniform":{"value":2}}})")).system.c0, (Vector{2, 2, 2}));
  EXPECT_EQ(parse_config(Json::parse(R"({"N":3,"c0":{"monodisperse":{}}})")).system.c0, (Vector{0, 0, 1}));
  EXPECT_EQ(parse_config(Json::parse(R"({"N":3,"c0":{"monodisperse":{"index":1,"value":4}}})")).system.c0,
            (Vector{4, 0, 0}));
  EXPECT_EQ(parse_config(Json::parse(R"({"N":6,"c0":{"lattice":{"m":2}}})")).system.c0, (Vector{0, 1, 0, 1, 0, 1}));
  EXPECT_EQ(parse_config(Json::parse(R"({"N":4,"c0":{"self_similar":{"alpha":0.5,"kappa":1}}})")).system.c0,
            self_similar(0.5, 1.0, 0.0, 4));
  EXPECT_EQ(parse_config(Json::parse(R"({"N":4,"seed":9,"c0":{"random":{}}})")).system.c0, random_positive(4, 9));
}

TEST(Config, Rejections) {
  auto bad = [](const char* text) { EXPECT_THROW(parse_config(Json::parse(text)), ConfigError) << text; };
  bad(R"({"N":3,"c0":[1,-1,1]})");
  bad(R"({"N":3,"c0":[1,1]})");
  bad(R"({"N":1})");
  bad(R"({"N":0})");
  bad(R"({"N":"3"})");
  bad(R"({"c0":[1]})");
  bad(R"({"N":3,"bogus":1})");
  bad(R"({"N":3,"chart":"z"})");
  bad(R"({"N":3,"chart":"log-t","t_end":1})");
  bad(R"({"N":3,"rtol":-1})");
  bad(R"({"N":3,"c0":{"mystery":{}}})");
  bad(R"({"N":6,"c0":{"lattice":{"m":4}}})");
  bad(R"({"N":3,"phi0":[1]})");
  bad(R"({"N":3,"t_end":0})");
  bad(R"({"N":3,"sampling":{"points_per_decade":0}})");
  bad(R"({"N":3,"seed":-1})");
  bad(R"({"N":3,"seed":1.5})");
}

TEST(Config, SingleComponentMessageCitesClosedForm) {
  try {
    parse_config(Json{{"N", 1}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("1/(c_1(0)^-1 + t)"), std::string::npos);
  }
}

TEST(Config, BlowupStartNeedsPositiveData) {
  const RunConfig rc = parse_config(Json::parse(R"({"N":3,"c0":[1,0,1]})"));
  EXPECT_THROW(rc.blowup_start(), ConfigError);
  const RunConfig rc2 = parse_config(Json::parse(R"({"N":3,"c0":[1,0,1],"phi0":[2,3]})"));
  EXPECT_EQ(rc2.blowup_start(), (Vector{2, 3}));
}

TEST(Config, Charts) {
  EXPECT_EQ(parse_chart("t"), Chart::t);
  EXPECT_EQ(parse_chart("log-t"), Chart::log_t);
  EXPECT_EQ(parse_chart("phi"), Chart::phi_y);
  EXPECT_THROW(parse_chart("psi"), ConfigError);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/run.json"), ConfigError); }

}  // namespace
}  // namespace rbk
