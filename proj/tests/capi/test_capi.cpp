#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "netcontrast/netcontrast.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string take(char* text) {
  std::string out(text ? text : "");
  nc_string_free(text);
  return out;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nc_capi_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(nc_version(), "1.0.0");
  EXPECT_STREQ(nc_status_name(NC_OK), "ok");
  EXPECT_STREQ(nc_status_name(NC_ERR_NOT_FOUND), "not_found");
  EXPECT_STREQ(nc_status_name(NC_ERR_CANCELLED), "cancelled");
}

TEST(CApi, ErrorsSetLastError) {
  nc_graph* g = nullptr;
  EXPECT_EQ(nc_graph_load_edge_list("/definitely/not/here.txt", 0, 0, &g), NC_ERR_IO);
  EXPECT_EQ(g, nullptr);
  EXPECT_NE(std::string(nc_last_error()), "");
  EXPECT_EQ(nc_graph_parse_edge_list(nullptr, 0, 0, &g), NC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(nc_graph_parse_edge_list("a b c\n", 0, 0, &g), NC_ERR_PARSE);
  EXPECT_EQ(nc_graph_generate("{\"kind\":\"price\",\"n\":2,\"c\":3}", &g), NC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(nc_graph_generate("not json", &g), NC_ERR_PARSE);
  ASSERT_EQ(nc_graph_parse_edge_list("a b\n", 0, 0, &g), NC_OK);
  EXPECT_STREQ(nc_last_error(), "");
  nc_graph_free(g);
}

TEST(CApi, GraphRoundTrip) {
  nc_graph* g = nullptr;
  ASSERT_EQ(nc_graph_generate(R"({"kind":"price","n":100,"c":3,"a":1.0,"seed":1})", &g), NC_OK);
  std::size_t n = 0, l = 0;
  int directed = 0;
  nc_graph_node_count(g, &n);
  nc_graph_edge_count(g, &l);
  nc_graph_is_directed(g, &directed);
  EXPECT_EQ(n, 100u);
  EXPECT_EQ(l, 294u);
  EXPECT_EQ(directed, 1);

  char* text = nullptr;
  ASSERT_EQ(nc_graph_write_edge_list(g, &text), NC_OK);
  const std::string edges = take(text);
  nc_graph* back = nullptr;
  ASSERT_EQ(nc_graph_parse_edge_list(edges.c_str(), 1, 0, &back), NC_OK);
  ASSERT_EQ(nc_graph_write_edge_list(back, &text), NC_OK);
  EXPECT_EQ(take(text), edges);

  ASSERT_EQ(nc_graph_to_json(g, &text), NC_OK);
  const json j = json::parse(take(text));
  EXPECT_EQ(j.at("nodes").size(), 100u);
  EXPECT_EQ(j.at("directed"), true);
  nc_graph_free(back);
  nc_graph_free(g);
}

TEST(CApi, SessionLifecycle) {
  const fs::path dir = temp_dir("session");
  nc_graph* t = nullptr;
  nc_graph* b = nullptr;
  ASSERT_EQ(nc_graph_load_edge_list(NETCONTRAST_TEST_DATA_DIR "/karate.edgelist", 0, 0, &t), NC_OK);
  ASSERT_EQ(nc_graph_load_attributes(t, NETCONTRAST_TEST_DATA_DIR "/karate_attributes.csv"), NC_OK);
  ASSERT_EQ(nc_graph_generate(R"({"kind":"gilbert","n":60,"p":0.1,"seed":3})", &b), NC_OK);
  ASSERT_EQ(nc_graph_set_id(b, "random60"), NC_OK);
  EXPECT_EQ(nc_graph_set_id(b, ""), NC_ERR_INVALID_ARGUMENT);

  nc_session* s = nullptr;
  EXPECT_EQ(nc_session_run(t, b, "{\"alpha\": -1}", &s), NC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(nc_session_run(t, b, "{", &s), NC_ERR_PARSE);
  ASSERT_EQ(nc_session_run(t, b, R"({"alpha": 2.0, "layouts": false})", &s), NC_OK) << nc_last_error();
  nc_graph_free(t);
  nc_graph_free(b);

  double alpha = 0;
  nc_session_alpha(s, &alpha);
  EXPECT_EQ(alpha, 2.0);
  double theta = 0;
  ASSERT_EQ(nc_session_rotate(s, 0, 0, 0, 1, &theta), NC_OK);
  EXPECT_NEAR(theta, std::acos(0.0), 1e-15);
  int reset = 0;
  ASSERT_EQ(nc_session_update_alpha(s, 5.0, &reset), NC_OK);
  EXPECT_EQ(reset, 1);
  EXPECT_EQ(nc_session_update_alpha(s, -1.0, &reset), NC_ERR_INVALID_ARGUMENT);

  char* text = nullptr;
  ASSERT_EQ(nc_session_snapshot(s, 0, &text), NC_OK);
  const json snap = json::parse(take(text));
  EXPECT_EQ(snap.at("target").at("dataset"), "karate");
  EXPECT_EQ(snap.at("background").at("dataset"), "random60");
  EXPECT_EQ(snap.at("embedding").at("target").size(), 34u);
  EXPECT_EQ(snap.at("model").at("alpha"), 5.0);

  ASSERT_EQ(nc_session_export(s, dir.c_str(), "json"), NC_OK);
  EXPECT_TRUE(fs::exists(dir / "embedding.json"));
  EXPECT_TRUE(fs::exists(dir / "model.json"));
  EXPECT_EQ(nc_session_export(s, dir.c_str(), "xml"), NC_ERR_INVALID_ARGUMENT);
  nc_session_free(s);
  fs::remove_all(dir);
}

TEST(CApi, ServiceHandleAndServe) {
  const fs::path dir = temp_dir("service");
  fs::copy_file(NETCONTRAST_TEST_DATA_DIR "/manifest.json", dir / "manifest.json");
  fs::copy_file(NETCONTRAST_TEST_DATA_DIR "/karate.edgelist", dir / "karate.edgelist");
  fs::copy_file(NETCONTRAST_TEST_DATA_DIR "/karate_attributes.csv", dir / "karate_attributes.csv");
  const json config = {{"data_dir", dir.string()}, {"port", 0}, {"stream_port", 0}, {"log_level", "off"}};

  nc_service* service = nullptr;
  EXPECT_EQ(nc_service_create(R"({"port": 70000})", &service), NC_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(nc_service_create(config.dump().c_str(), &service), NC_OK) << nc_last_error();

  char* reply = nullptr;
  ASSERT_EQ(nc_service_handle(service, R"({"id": 1, "type": "ping"})", &reply), NC_OK);
  EXPECT_EQ(json::parse(take(reply)).at("result").at("pong"), true);
  ASSERT_EQ(nc_service_handle(service, R"({"id": 2, "type": "create_session", "payload": {"target": "karate", "background": "random1"}})", &reply), NC_OK);
  const json created = json::parse(take(reply));
  const std::string sid = created.at("result").at("session");
  const json run = {{"id", 3}, {"type", "run_pipeline"}, {"session", sid}, {"payload", {{"config", {{"layouts", false}}}}}};
  ASSERT_EQ(nc_service_handle(service, run.dump().c_str(), &reply), NC_OK);
  const json ran = json::parse(take(reply));
  EXPECT_EQ(ran.at("type"), "result");
  EXPECT_FALSE(ran.at("events").empty());
  EXPECT_EQ(ran.at("result").at("embedding").at("background").size(), 100u);

  int http = -1, stream = -1;
  EXPECT_EQ(nc_service_ports(service, &http, &stream), NC_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(nc_service_start(service), NC_OK) << nc_last_error();
  EXPECT_EQ(nc_service_start(service), NC_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(nc_service_ports(service, &http, &stream), NC_OK);
  EXPECT_GT(http, 0);
  EXPECT_GT(stream, 0);
  EXPECT_NE(http, stream);
  EXPECT_EQ(nc_service_stop(service), NC_OK);
  nc_service_free(service);
  fs::remove_all(dir);
}
