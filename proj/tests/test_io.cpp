#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <functional>

#include "expect.hpp"
#include "kkf/config.hpp"
#include "kkf/io.hpp"

using namespace kkf;
using kkf::test::code_of;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kkf_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const std::string p = (path / name).string();
    if (!content.empty()) write_text_file(p, content);
    return p;
  }
};

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Json minimal_config() {
  return Json::parse(R"({
    "horizon": 5,
    "scenario": {"type": "synthetic", "kronecker": {"power": 2}, "signal": {"bandwidth": 2}},
    "sampling": {"sample_count": 4},
    "methods": [{"name": "ie", "kind": "ie", "kernel_nu": {"family": "diffusion", "sigma2": 1.0}}]
  })");
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(M_PI)) == M_PI);
}

TEST_CASE("signal files") {
  TempDir dir;
  test::Rng rng(71);
  const Matrix m = test::gaussian_matrix(4, 3, rng);
  const std::string p = dir.file("signals.csv");
  write_signals_csv(p, m);
  CHECK(load_signals_csv(p) == m);

  CHECK(load_signals_csv(dir.file("plus.csv", "+1,2e0\n3,-4\n")) == (Matrix(2, 2) << 1, 2, 3, -4).finished());
  const std::string ragged = dir.file("ragged.csv", "1,2\n3,4\n5\n");
  CHECK(code_of([&] { load_signals_csv(ragged); }) == ErrorCode::RaggedRows);
  CHECK(message_of([&] { load_signals_csv(ragged); }).find("ragged.csv:3") != std::string::npos);
  const std::string text = dir.file("text.csv", "1,2\n3,x\n");
  CHECK(code_of([&] { load_signals_csv(text); }) == ErrorCode::NonNumeric);
  CHECK(message_of([&] { load_signals_csv(text); }).find("text.csv:2") != std::string::npos);
  CHECK(code_of([&] { load_signals_csv(dir.file("empty.csv", "\n")); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { load_signals_csv(dir.file("missing.csv")); }) == ErrorCode::IoError);
}

TEST_CASE("graph files") {
  TempDir dir;
  const Graph two = load_graph_csv(dir.file("two.csv", "src,dst,weight\n0,1,1.0\n"));
  CHECK(two.adjacency() == (Matrix(2, 2) << 0, 1, 1, 0).finished());
  CHECK(load_graph_csv(dir.file("pad.csv", "src,dst,weight\n1,0,2\n"), 4).num_nodes() == 4);

  test::Rng rng(72);
  const Graph g = build_graph(test::random_adjacency(7, rng));
  const std::string p = dir.file("g.csv");
  write_graph_csv(p, g);
  CHECK(load_graph_csv(p, 7) == g);

  CHECK(code_of([&] { load_graph_csv(dir.file("dup.csv", "src,dst,weight\n0,1,1\n1,0,1\n")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { load_graph_csv(dir.file("loop.csv", "src,dst,weight\n1,1,1\n")); }) ==
        ErrorCode::NonzeroDiagonal);
  CHECK(code_of([&] { load_graph_csv(dir.file("big.csv", "src,dst,weight\n0,5,1\n"), 3); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { load_graph_csv(dir.file("neg.csv", "src,dst,weight\n0,1,-1\n")); }) ==
        ErrorCode::NegativeWeight);
  CHECK(code_of([&] { load_graph_csv(dir.file("hdr.csv", "a,b,c\n0,1,1\n")); }) == ErrorCode::ParseError);
}

TEST_CASE("routing and tables") {
  TempDir dir;
  const RoutingMatrix r = load_routing_csv(dir.file("r.csv", "path,link\n0,0\n0,1\n1,1\n"));
  CHECK(r.entries.rows() == 2);
  CHECK(r.entries.cols() == 2);
  CHECK(r.entries(1, 0) == 0);
  CHECK(r.entries(1, 1) == 1);

  const std::string t = dir.file("t.csv");
  write_slot_table_csv(t, {"a", "b"}, {{0.5, 1.0}, {2.0, 0.25}});
  CHECK(read_text_file(t) == "slot,a,b\n1,0.5,2\n2,1,0.25\n");
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_experiment_config(minimal_config());
  CHECK(c.horizon == 5);
  CHECK(c.trials == 1);
  CHECK(c.sample_count == 4);
  CHECK(c.scenario.synthetic);
  CHECK(c.scenario.kronecker.power == 2);
  REQUIRE(c.methods.size() == 1);
  CHECK(c.methods[0].kind == MethodKind::IE);

  Json frac = minimal_config();
  frac["sampling"] = Json{{"sample_fraction", 0.7}};
  CHECK(parse_experiment_config(frac).sample_count == 7);

  Json sig = minimal_config();
  sig["methods"][0]["kernel_nu"] = Json{{"family", "diffusion"}, {"sigma", 0.5}};
  CHECK(parse_experiment_config(sig).methods[0].kernel_nu.sigma2 == 0.25);

  const KernelSpec k = parse_kernel_spec(to_json(KernelSpec::band_rejection(3.0, 2, 4)), "k");
  CHECK(k.family == KernelFamily::BandRejection);
  CHECK(k.l == 4);

  const auto expect_path = [](Json j, const std::string& field) {
    const std::string msg = message_of([&] { parse_experiment_config(j); });
    CHECK_MESSAGE(msg.find(field) != std::string::npos, msg);
    CHECK(code_of([&] { parse_experiment_config(j); }) == ErrorCode::ConfigInvalid);
  };
  Json j = minimal_config();
  j["methods"][0]["lambda2"] = -1.0;
  expect_path(j, "methods[0]");
  j = minimal_config();
  j["methods"][0]["kernel_nu"]["sigma2"] = "big";
  expect_path(j, "methods[0].kernel_nu.sigma2");
  j = minimal_config();
  j["methods"][0]["colour"] = 1;
  expect_path(j, "methods[0].colour");
  j = minimal_config();
  j["scenario"]["kronecker"]["seed_matrix"] = Json::array({Json::array({1, 2})});
  expect_path(j, "scenario.kronecker.seed_matrix");
  j = minimal_config();
  j["sampling"]["sample_count"] = 10;
  expect_path(j, "sampling.sample_count");
  j = minimal_config();
  j.erase("horizon");
  expect_path(j, "horizon");
  j = minimal_config();
  j["methods"].push_back(j["methods"][0]);
  expect_path(j, "methods[1].name");
  j = minimal_config();
  j["methods"][0]["kind"] = "lms";
  expect_path(j, "methods[0].kind");
  j = minimal_config();
  j["methods"][0]["kind"] = "mkrikf";
  expect_path(j, "methods[0]");
  j = minimal_config();
  j["methods"][0]["transition"] = Json{{"form", "scaled_identity"}};
  expect_path(j, "methods[0].transition.alpha");
}

TEST_CASE("dataset configs resolve relative paths") {
  TempDir dir;
  write_signals_csv(dir.file("s.csv"), Matrix::Ones(3, 4));
  write_graph_csv(dir.file("g.csv"), build_graph((Matrix(4, 4) << 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0).finished()));
  dir.file("manifest.json", R"({"num_nodes": 4, "horizon": 3, "signals": "s.csv", "epochs": [{"first_slot": 1, "path": "g.csv"}]})");
  Json j = minimal_config();
  j["scenario"] = Json{{"type", "dataset"}, {"manifest", "manifest.json"}};
  j["sampling"] = Json{{"sample_fraction", 0.5}};
  const ExperimentConfig c = parse_experiment_config(j, dir.path.string());
  CHECK(!c.scenario.synthetic);
  CHECK(c.sample_count == 2);
  CHECK(c.scenario.dataset.signals_path == (dir.path / "s.csv").string());
  REQUIRE(c.scenario.dataset.graph_paths.size() == 1);
  CHECK(c.scenario.dataset.graph_paths[0].second == (dir.path / "g.csv").string());

  const std::string cfg_path = dir.file("exp.json", j.dump());
  CHECK(load_experiment_config(cfg_path).sample_count == 2);
  CHECK(code_of([&] { load_experiment_config(dir.file("bad.json", "{")); }) == ErrorCode::ConfigInvalid);
}
