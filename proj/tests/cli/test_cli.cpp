#include <gtest/gtest.h>

#include <signal.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "process.hpp"

// After Eigen: resolv.h defines a macro that collides with Eigen parameter names.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;
using process::Child;
using process::read_line;
using process::wait_exit;

namespace {

Child spawn(const std::vector<std::string>& args) { return process::spawn(NETCONTRAST_CLI, args); }

process::Result run(const std::vector<std::string>& args) { return process::run(NETCONTRAST_CLI, args); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t edge_lines(const std::string& text) {
  std::size_t count = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') ++count;
  return count;
}

/// Numeric columns from `first_col` on, skipping comment and header lines.
Eigen::MatrixXd csv_numbers(const fs::path& path, std::size_t first_col, const std::string& only_prefix = {}) {
  std::ifstream in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    if (!only_prefix.empty() && line.rfind(only_prefix, 0) != 0) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    for (std::size_t c = 0; std::getline(cells, cell, ','); ++c)
      if (c >= first_col) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nc_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    karate_ = fs::path(fixtures::data_dir()) / "karate.edgelist";
    random1_ = dir_ / "random1.edgelist";
    ASSERT_EQ(run({"generate", "gilbert", "--n", "100", "--p", "0.09515151515151515", "--seed", "7", "--out",
                   random1_.string()})
                  .code,
              0);
  }

  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  fs::path karate_;
  fs::path random1_;
};

}  // namespace

TEST_F(CliTest, GeneratePriceEdgeAccounting) {
  const process::Result r = run({"generate", "price", "--n", "6301", "--c", "3", "--seed", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(edge_lines(r.out), 18897u);
  EXPECT_NE(r.out.find("# directed: true"), std::string::npos);
}

TEST_F(CliTest, GenerateGilbertEmpty) {
  const process::Result r = run({"generate", "gilbert", "--n", "5", "--p", "0"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(edge_lines(r.out), 0u);
  EXPECT_NE(r.out.find("# nodes: 0 1 2 3 4"), std::string::npos);
}

TEST_F(CliTest, GenerateReproducible) {
  const auto a = run({"generate", "price", "--n", "300", "--c", "2", "--seed", "9"});
  const auto b = run({"generate", "price", "--n", "300", "--c", "2", "--seed", "9"});
  const auto c = run({"generate", "price", "--n", "300", "--c", "2", "--seed", "10"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(edge_lines(slurp(random1_)), 471u);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({"run", (dir_ / "missing.edgelist").string(), karate_.string()}).code, 2);
  EXPECT_EQ(run({"run", karate_.string(), karate_.string(), "--target-attributes", "nope.csv"}).code, 2);
  EXPECT_EQ(run({"run", karate_.string()}).code, 2);
  EXPECT_EQ(run({"run", karate_.string(), karate_.string(), "--alpha", "1", "--auto-alpha"}).code, 2);
  EXPECT_EQ(run({"run", karate_.string(), karate_.string(), "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"generate", "lattice", "--n", "5"}).code, 2);
  EXPECT_EQ(run({"serve", "--port", "http"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"run", karate_.string(), karate_.string(), "--bases", "telepathy", "--out-dir", (dir_ / "x").string()}).code, 1);
}

TEST_F(CliTest, RunWritesExports) {
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run({"run", karate_.string(), random1_.string(), "--target-attributes",
                 (fs::path(fixtures::data_dir()) / "karate_attributes.csv").string(), "--out-dir", out.string()})
                .code,
            0);
  for (const char* name : {"embedding.csv", "loadings.csv", "features_T.csv", "features_B.csv", "model.json", "plot.json"})
    EXPECT_TRUE(fs::exists(out / name)) << name;
  const std::string embedding = slurp(out / "embedding.csv");
  EXPECT_EQ(embedding.rfind("# netcontrast-export v1 embedding\n", 0), 0u);
  EXPECT_EQ(edge_lines(embedding), 1u + 34u + 100u);
  EXPECT_EQ(csv_numbers(out / "embedding.csv", 3, "target,").rows(), 34);
  const json plot = json::parse(slurp(out / "plot.json"));
  EXPECT_FALSE(plot.empty());
}

TEST_F(CliTest, AlphaZeroMatchesPcaOracle) {
  const fs::path out = dir_ / "pca";
  ASSERT_EQ(run({"run", karate_.string(), random1_.string(), "--alpha", "0", "--no-layouts", "--out-dir", out.string()}).code, 0);
  const Eigen::MatrixXd xt = csv_numbers(out / "features_T.csv", 2);
  const Eigen::MatrixXd y = csv_numbers(out / "embedding.csv", 3, "target,");
  ASSERT_EQ(xt.rows(), 34);
  EXPECT_LT(oracle::max_deviation_up_to_sign(oracle::pca_projection(xt, 2), y), 1e-8);

  const json model = json::parse(slurp(out / "model.json")).at("model");
  Eigen::MatrixXd loadings(xt.cols(), 2);
  for (Eigen::Index r = 0; r < loadings.rows(); ++r)
    for (Eigen::Index c = 0; c < 2; ++c) loadings(r, c) = model.at("scaled_loadings")[r][c].get<double>();
  Eigen::MatrixXd axes = oracle::pca_axes(xt, 2);
  for (Eigen::Index c = 0; c < 2; ++c) axes.col(c) /= axes.col(c).cwiseAbs().maxCoeff();
  EXPECT_LT(oracle::max_deviation_up_to_sign(axes, loadings), 1e-8);
  EXPECT_NE(slurp(out / "embedding.csv").find("PC1,PC2"), std::string::npos);
}

TEST_F(CliTest, RunIsByteStable) {
  for (const char* format : {"csv", "json"}) {
    const fs::path a = dir_ / (std::string("a_") + format);
    const fs::path b = dir_ / (std::string("b_") + format);
    const std::vector<std::string> flags = {"--hops", "2", "--prune-threshold", "0.8", "--seed", "5", "--format", format};
    std::vector<std::string> args_a = {"run", karate_.string(), random1_.string(), "--out-dir", a.string()};
    std::vector<std::string> args_b = {"run", karate_.string(), random1_.string(), "--out-dir", b.string()};
    args_a.insert(args_a.end(), flags.begin(), flags.end());
    args_b.insert(args_b.end(), flags.begin(), flags.end());
    ASSERT_EQ(run(args_a).code, 0);
    ASSERT_EQ(run(args_b).code, 0);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
    }
    EXPECT_GE(files, 6u);
  }
}

TEST_F(CliTest, ServeAnswersHealth) {
  fs::copy_file(fs::path(fixtures::data_dir()) / "manifest.json", dir_ / "manifest.json");
  fs::copy_file(karate_, dir_ / "karate.edgelist");
  fs::copy_file(fs::path(fixtures::data_dir()) / "karate_attributes.csv", dir_ / "karate_attributes.csv");
  Child server = spawn({"serve", "--port", "0", "--stream-port", "0", "--data-dir", dir_.string(), "--log-level", "off"});
  ASSERT_GT(server.pid, 0);
  const json ports = json::parse(read_line(server.out));
  const int port = ports.at("http_port");
  ASSERT_GT(port, 0);

  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  const auto ping = client.Post("/rpc", R"({"id": 1, "type": "ping"})", "application/json");
  ASSERT_TRUE(ping);
  EXPECT_EQ(json::parse(ping->body).at("result").at("pong"), true);
  const auto missing = client.Post("/rpc", R"({"id": 2, "type": "create_session", "payload": {"target": "nope", "background": "karate"}})",
                                   "application/json");
  EXPECT_EQ(json::parse(missing->body).at("error").at("code"), "dataset_not_found");

  Child clash = spawn({"serve", "--port", std::to_string(port), "--stream-port", "0", "--data-dir", dir_.string(),
                       "--log-level", "off"});
  EXPECT_EQ(wait_exit(clash.pid), 1);
  ::close(clash.out);

  ::kill(server.pid, SIGTERM);
  EXPECT_EQ(wait_exit(server.pid), 0);
  ::close(server.out);
}
