#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cdual/cli.hpp"
#include "cdual/curves.hpp"
#include "cdual/instance_io.hpp"
#include "cdual/report.hpp"
#include "fixtures.hpp"

using namespace cdual;
using cdual::io::json;
namespace fs = std::filesystem;

namespace {

const std::string kData = CDUAL_DATA_DIR;

std::string data(const char* name) { return kData + "/" + name; }

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cdual");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cdual_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_instance(const std::string& name, const json& doc) {
  const fs::path p = scratch_dir("instances_" + name) / (name + ".json");
  std::ofstream(p) << doc.dump();
  return p.string();
}

json example_doc() {
  std::ifstream in(data("example_n1.json"));
  return json::parse(in);
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::string>> raw;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Csv read_csv(const fs::path& p) {
  Csv csv;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      csv.comments.push_back(line);
    } else if (csv.header.empty()) {
      csv.header = split(line);
    } else {
      csv.raw.push_back(split(line));
      std::vector<double> v;
      for (const auto& c : csv.raw.back()) v.push_back(std::strtod(c.c_str(), nullptr));
      csv.rows.push_back(v);
    }
  }
  return csv;
}

}  // namespace

TEST(Instance, ParsesArraysAndScalars) {
  const auto s = io::load_instance(data("example_n1.json"));
  EXPECT_EQ(s.n(), 1);
  EXPECT_EQ(s.b0()(0), 3.0);
  json doc = example_doc();
  doc["b0"] = 3;
  doc["h"] = 2;
  const auto t = io::parse_instance(doc);
  EXPECT_EQ(io::instance_hash(s), io::instance_hash(t));
  const auto n2 = io::load_instance(data("example_n2.json"));
  EXPECT_EQ(n2.n(), 2);
  EXPECT_EQ(n2.h()(1), std::sqrt(2.0));
}

TEST(Instance, DiagnosticsNameTheField) {
  auto field_of = [](const json& doc) {
    try {
      io::parse_instance(doc);
    } catch (const io::InputError& e) {
      return e.field();
    }
    return std::string("<accepted>");
  };
  json doc = example_doc();
  doc.erase("a2");
  EXPECT_EQ(field_of(doc), "a2");
  doc = example_doc();
  doc["c1"] = "minus one";
  EXPECT_EQ(field_of(doc), "c1");
  doc = example_doc();
  doc["h"] = {1, 2};
  EXPECT_EQ(field_of(doc), "h");
  doc = example_doc();
  doc["n"] = 2;
  doc["b0"] = {3, 0};
  doc["h"] = 2;
  EXPECT_EQ(field_of(doc), "h");
  doc = example_doc();
  doc["n"] = 1.5;
  EXPECT_EQ(field_of(doc), "n");
  doc = example_doc();
  doc["a1"] = -1;
  EXPECT_EQ(field_of(doc), "a1");
  doc = example_doc();
  doc["a3"] = 1;
  EXPECT_EQ(field_of(doc), "a3");
  EXPECT_EQ(field_of(json::array()), "");
}

TEST(Instance, SyntaxErrorMentionsLine) {
  try {
    io::parse_instance_text("{\n  \"n\": 1,\n  \"a0\": ,\n}");
    FAIL();
  } catch (const io::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::load_instance(data("no_such_file.json")), io::InputError);
}

TEST(Report, RoundTripIsBitExact) {
  for (const char* name : {"example_n1.json", "example_n2.json", "example_n1_h0.json"}) {
    const auto rep = solve(io::load_instance(data(name)));
    const json doc = io::report_json(rep);
    const json back = json::parse(doc.dump(2));
    EXPECT_EQ(back, doc);
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
      EXPECT_EQ(back["points"][i]["sigma"].get<double>(), rep.points[i].sigma);
      EXPECT_EQ(back["points"][i]["primal_value"].get<double>(), rep.points[i].primal_value);
      for (int j = 0; j < rep.spec.n(); ++j) EXPECT_EQ(back["points"][i]["x"][j].get<double>(), rep.points[i].x(j));
    }
    EXPECT_EQ(back["constants"]["H4"].get<double>(), rep.constants.H4);
    const auto again = io::parse_instance(back["instance"]);
    EXPECT_EQ(io::instance_hash(again), io::instance_hash(rep.spec));
    EXPECT_EQ(again.h(), rep.spec.h());
    for (const char* key : {"constants", "regions", "peaks", "roots", "points", "manifolds", "count", "global_min",
                            "verification"})
      EXPECT_TRUE(back.contains(key)) << key;
  }
}

TEST(Cli, SolveExample) {
  const auto dir = scratch_dir("solve");
  const auto r = run({"solve", "--instance", data("example_n1.json"), "--out", (dir / "report.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("GLOBAL_MIN"), std::string::npos);
  std::ifstream in(dir / "report.json");
  const json doc = json::parse(in);
  ASSERT_EQ(doc["points"].size(), 7u);
  EXPECT_NEAR(doc["global_min"]["sigma"].get<double>(), 2.1299, 1e-4);
  EXPECT_EQ(doc["count"]["distinct"], 7);
}

TEST(Cli, SolveHZeroListsManifolds) {
  const auto r = run({"solve", "--instance", data("example_n1_h0.json"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["manifolds"].size(), 4u);
  EXPECT_EQ(doc["global_min"]["value"].get<double>(), -5.5);
  EXPECT_TRUE(doc["points"].empty());
}

TEST(Cli, MissingFieldExitsTwo) {
  const auto r = run({"solve", "--instance", data("missing_a2.json")});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("a2"), std::string::npos);
}

TEST(Cli, VerifyExamples) {
  const auto r1 = run({"verify", "--instance", data("example_n1.json")});
  EXPECT_EQ(r1.code, 0) << r1.out << r1.err;
  EXPECT_NE(r1.out.find("7 = 7 roots"), std::string::npos);
  EXPECT_NE(r1.out.find("PASS"), std::string::npos);
  const auto r2 = run({"verify", "--instance", data("example_n2.json"), "--json"});
  ASSERT_EQ(r2.code, 0) << r2.out << r2.err;
  const json doc = json::parse(r2.out);
  bool saw_match = false;
  for (const auto& c : doc["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
    if (c["name"] == "multistart best matches global min") {
      saw_match = true;
      EXPECT_LE(c["measured"].get<double>(), 1e-6);
    }
  }
  EXPECT_TRUE(saw_match);
  EXPECT_EQ(run({"verify", "--instance", data("negative_a1.json")}).code, cli::kInputError);
}

TEST(Cli, VerifyFailureNamesInvariant) {
  // A single start near (-2, -2) settles in the local minimum instead.
  const auto r = run({"verify", "--instance", data("example_n2.json"), "--starts", "1", "--box-lo", "-2",
                      "--box-hi", "-1.99"});
  EXPECT_EQ(r.code, cli::kVerificationFailure) << r.out << r.err;
  EXPECT_NE(r.err.find("verification failed: multistart best matches global min"), std::string::npos) << r.err;
}

TEST(Cli, CountExamples) {
  auto r = run({"count", "--instance", data("example_n1.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("7\ncase: H1 below all peak magnitudes", 0), 0u) << r.out;
  r = run({"count", "--instance", data("example_n1_h0.json"), "--json"});
  EXPECT_EQ(json::parse(r.out)["case"], "H2 < Re(-sqrt(H3)) < 0");
  json doc = example_doc();
  doc["h"] = {20};
  r = run({"count", "--instance", write_instance("h20", doc)});
  EXPECT_EQ(r.out.rfind("1\n", 0), 0u) << r.out;
  EXPECT_EQ(run({"count", "--instance", data("no_such_file.json")}).code, cli::kInputError);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kInputError);
  EXPECT_EQ(run({"solve"}).code, cli::kInputError);
  EXPECT_EQ(run({"frobnicate", "--instance", data("example_n1.json")}).code, cli::kInputError);
  EXPECT_EQ(run({"solve", "--help"}).code, 0);
}

TEST(Cli, CurvesExample) {
  const auto dir = scratch_dir("curves");
  const auto r = run({"curves", "--instance", data("example_n1.json"), "--sigma-min", "-5", "--sigma-max", "3",
                      "--samples", "1600", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;

  const Csv dual = read_csv(dir / "dual_curve.csv");
  EXPECT_EQ(dual.header, (std::vector<std::string>{"sigma", "dual_value", "phi_squared", "q_value"}));
  ASSERT_GE(dual.rows.size(), 1600u);
  bool has_hash = false;
  for (const auto& c : dual.comments) has_hash = has_hash || c.find("instance_hash") != std::string::npos;
  EXPECT_TRUE(has_hash);
  for (std::size_t i = 0; i < dual.rows.size(); ++i) {
    ASSERT_EQ(dual.rows[i].size(), 4u);
    if (i) { EXPECT_GT(dual.rows[i][0], dual.rows[i - 1][0]); }
  }
  for (double z : {-4.0, -2.0, 0.0, 2.0}) {
    double best = INFINITY;
    for (const auto& row : dual.rows)
      if (std::abs(row[0] - z) < 1e-3) best = std::min(best, std::abs(row[2]));
    EXPECT_LE(best, 1e-6) << "near " << z;
  }
  // P^d has a stationary sample near +-sqrt(4/3): its neighbours lie on the same side.
  for (double z : {-std::sqrt(4.0 / 3.0), std::sqrt(4.0 / 3.0)}) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < dual.rows.size(); ++i)
      if (std::abs(dual.rows[i][0] - z) < std::abs(dual.rows[k][0] - z)) k = i;
    ASSERT_LT(std::abs(dual.rows[k][0] - z), 1e-9);
    const double left = dual.rows[k][1] - dual.rows[k - 1][1];
    const double right = dual.rows[k + 1][1] - dual.rows[k][1];
    EXPECT_LE(left * right, 0.0) << "near " << z;
  }

  const Csv primal = read_csv(dir / "primal_curve.csv");
  EXPECT_EQ(primal.header, (std::vector<std::string>{"x", "primal_value"}));
  EXPECT_EQ(primal.rows.size(), 1600u);

  const Csv ann = read_csv(dir / "annotations.csv");
  ASSERT_EQ(ann.rows.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i)
    EXPECT_NEAR(ann.rows[i][0], cdual::testing::kOracleSigma[i], 1e-9);
}

TEST(Cli, CurvesDefaultRangeAndPoleLogging) {
  const auto rep = solve(cdual::testing::example_n1());
  const auto [lo, hi] = io::default_sigma_range(rep.constants);
  EXPECT_EQ(lo, -5.0);
  EXPECT_EQ(hi, 14.0);
  // A grid that lands exactly on the poles 0 and +-2.
  const auto s = io::sample_dual_curve(rep, -4.0, 4.0, 9);
  EXPECT_EQ(s.omitted, (std::vector<double>{-2.0, 0.0, 2.0}));
  for (const auto& row : s.rows) EXPECT_TRUE(std::isfinite(row.dual_value));
  std::ostringstream os;
  io::write_dual_curve(os, rep, s);
  EXPECT_NE(os.str().find("# omitted_poles: -2 0 2"), std::string::npos);
}

TEST(Cli, CurvesBadRangeExitsTwo) {
  const auto dir = scratch_dir("curves_bad");
  EXPECT_EQ(run({"curves", "--instance", data("example_n1.json"), "--sigma-min", "3", "--sigma-max", "-5", "--out",
                 dir.string()})
                .code,
            cli::kInputError);
  EXPECT_EQ(run({"curves", "--instance", data("example_n1.json"), "--samples", "1", "--out", dir.string()}).code,
            cli::kInputError);
}

TEST(Cli, CurvesHZeroAndTwoDimensional) {
  auto dir = scratch_dir("curves_h0");
  ASSERT_EQ(run({"curves", "--instance", data("example_n1_h0.json"), "--out", dir.string()}).code, 0);
  const Csv ann = read_csv(dir / "annotations.csv");
  EXPECT_EQ(ann.rows.size(), 7u);
  dir = scratch_dir("curves_n2");
  ASSERT_EQ(run({"curves", "--instance", data("example_n2.json"), "--out", dir.string()}).code, 0);
  EXPECT_FALSE(fs::exists(dir / "primal_curve.csv"));
  const Csv ann2 = read_csv(dir / "annotations.csv");
  EXPECT_EQ(ann2.header.size(), 6u);  // sigma, x1, x2, primal, dual, label
  EXPECT_EQ(ann2.rows.size(), 7u);
}
