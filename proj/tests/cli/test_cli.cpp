#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks against the installed command-line binary. The binary
// path and the fixture directory arrive via PROPGEN_CLI and PROPGEN_FIXTURES.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string cli_path() {
  const char* p = std::getenv("PROPGEN_CLI");
  REQUIRE_MESSAGE(p != nullptr, "PROPGEN_CLI must point at the binary");
  return p;
}

std::string fixture(const std::string& name) {
  const char* p = std::getenv("PROPGEN_FIXTURES");
  REQUIRE_MESSAGE(p != nullptr, "PROPGEN_FIXTURES must point at the fixture directory");
  return (fs::path(p) / name).string();
}

struct RunOutput {
  int exit_code = -1;
  std::string text;        // stdout + stderr interleaved
  std::string run_dir;     // parsed from the "run: " line, empty if absent
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

RunOutput run_cli(const std::vector<std::string>& args) {
  std::ostringstream cmd;
  cmd << shell_quote(cli_path());
  for (const std::string& a : args) cmd << " " << shell_quote(a);
  cmd << " 2>&1";

  RunOutput out;
  FILE* pipe = popen(cmd.str().c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) out.text.append(buf, n);
  const int status = pclose(pipe);
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

  const size_t pos = out.text.rfind("run: ");
  if (pos != std::string::npos) {
    const size_t end = out.text.find('\n', pos);
    out.run_dir = out.text.substr(pos + 5, end - pos - 5);
  }
  return out;
}

// Fresh run root per test case so content-addressed run dirs never collide.
std::string scratch_root() {
  static int counter = 0;
  const fs::path root = fs::temp_directory_path() /
                        ("propgen_cli_" + std::to_string(getpid()) + "_" +
                         std::to_string(counter++));
  fs::create_directories(root);
  return root.string();
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing ", path);
  return Json::parse(in);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing ", path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("version and help") {
  CHECK(run_cli({"--version"}).exit_code == 0);
  const RunOutput help = run_cli({"--help"});
  CHECK(help.exit_code == 0);
  CHECK(help.text.find("eval-ar") != std::string::npos);
}

TEST_CASE("missing subcommand is a usage error") {
  CHECK(run_cli({}).exit_code == 2);
  CHECK(run_cli({"no-such-command"}).exit_code == 2);
}

TEST_CASE("eval-ar on the tiny fixtures") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"eval-ar", "--dataset", fixture("tiny_dataset.json"),
                                 "--proposals", fixture("tiny_proposals.json"),
                                 "--run-root", root});
  REQUIRE(out.exit_code == 0);
  REQUIRE_FALSE(out.run_dir.empty());
  const Json ar = load_json(out.run_dir + "/ar.json");
  CHECK(ar["total_gt"] == 20);
  // 9.1 of 20 boxes covered on the threshold mean; identical at every k
  // because no image carries more than 5 proposals.
  for (const auto& [k, v] : ar["ar"].items())
    CHECK(v.get<double>() == doctest::Approx(0.455).epsilon(1e-9));
  CHECK(fs::exists(out.run_dir + "/ar.csv"));
  CHECK(fs::exists(out.run_dir + "/manifest.json"));
}

TEST_CASE("eval-ap mean diagonal on the tiny fixtures") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"eval-ap", "--dataset", fixture("tiny_dataset.json"),
                                 "--detections", fixture("tiny_detections.json"),
                                 "--run-root", root});
  REQUIRE(out.exit_code == 0);
  CHECK(out.text.find("mean diagonal AP") != std::string::npos);
  const Json ap = load_json(out.run_dir + "/ap.json");
  const auto& classes = ap["classes"];
  REQUIRE(classes.size() == 4);
  double sum = 0.0;
  for (size_t i = 0; i < 4; ++i) sum += ap["ap"][i][i].get<double>();
  CHECK(sum / 4.0 == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("similarity finds the confusion pairs") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"similarity", "--dataset", fixture("tiny_dataset.json"),
                                 "--detections", fixture("tiny_detections.json"),
                                 "--run-root", root});
  REQUIRE(out.exit_code == 0);
  const Json sim = load_json(out.run_dir + "/similarity.json");
  const std::vector<std::string> classes = sim["classes"];
  REQUIRE(classes == std::vector<std::string>{"ant", "bee", "cat", "dog"});
  auto at = [&](int i, int j) { return sim["similarity"][i][j].get<double>(); };
  CHECK(at(0, 1) == doctest::Approx(0.7778).epsilon(1e-3));
  CHECK(at(2, 3) == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(at(0, 2) == doctest::Approx(0.0));
  CHECK(at(1, 3) == doctest::Approx(0.0));
  // Symmetry straight from the file.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(at(i, j) == at(j, i));
}

TEST_CASE("select methods on the tiny fixtures") {
  const std::string root = scratch_root();
  const RunOutput sim_run = run_cli({"similarity", "--dataset", fixture("tiny_dataset.json"),
                                     "--detections", fixture("tiny_detections.json"),
                                     "--run-root", root});
  REQUIRE(sim_run.exit_code == 0);
  const std::string sim_file = sim_run.run_dir + "/similarity.json";

  SUBCASE("semantic-frequency reproduces the worked example") {
    const RunOutput out = run_cli({"select", "--method", "semantic-frequency",
                                   "--hierarchy", fixture("tiny_hierarchy.json"),
                                   "--dataset", fixture("tiny_dataset.json"),
                                   "--p", "2", "--run-root", root});
    REQUIRE(out.exit_code == 0);
    const Json sel = load_json(out.run_dir + "/selection.json");
    CHECK(sel["classes"] == Json::array({"ant", "bee"}));
  }
  SUBCASE("most-frequent") {
    const RunOutput out = run_cli({"select", "--method", "most-frequent",
                                   "--dataset", fixture("tiny_dataset.json"),
                                   "--p", "2", "--run-root", root});
    REQUIRE(out.exit_code == 0);
    CHECK(load_json(out.run_dir + "/selection.json")["classes"] ==
          Json::array({"ant", "bee"}));
  }
  SUBCASE("oracle-visual pairs the confused classes") {
    const RunOutput out = run_cli({"select", "--method", "oracle-visual",
                                   "--similarity", sim_file,
                                   "--dataset", fixture("tiny_dataset.json"),
                                   "--p", "2", "--run-root", root});
    REQUIRE(out.exit_code == 0);
    const Json sel = load_json(out.run_dir + "/selection.json");
    CHECK(sel["classes"] == Json::array({"ant", "cat"}));
    REQUIRE(sel["clusters"].size() == 2);
    CHECK(sel["clusters"][0] == Json::array({"ant", "bee"}));
    CHECK(sel["clusters"][1] == Json::array({"cat", "dog"}));
  }
  SUBCASE("random is seed stable") {
    const RunOutput a = run_cli({"select", "--method", "random",
                                 "--dataset", fixture("tiny_dataset.json"),
                                 "--p", "2", "--seed", "11", "--run-root", root});
    REQUIRE(a.exit_code == 0);
    const Json sel = load_json(a.run_dir + "/selection.json");
    CHECK(sel["seed"] == 11);
    CHECK(sel["classes"].size() == 2);
  }
}

TEST_CASE("relabel class counts per level on the deep hierarchy") {
  const std::string root = scratch_root();
  const std::vector<std::pair<int, int>> expected = {
      {0, 1}, {1, 86}, {2, 270}, {3, 398}, {4, 432}};
  for (const auto& [level, classes] : expected) {
    const RunOutput out = run_cli({"relabel", "--dataset", fixture("oiv4_like_dataset.json"),
                                   "--hierarchy", fixture("oiv4_like_hierarchy.json"),
                                   "--level", std::to_string(level), "--run-root", root});
    REQUIRE(out.exit_code == 0);
    const Json r = load_json(out.run_dir + "/relabel.json");
    CHECK(r["level"] == level);
    CHECK(r["class_count"] == classes);
    CHECK(r["box_count"] == 432);
  }
}

TEST_CASE("fuse then evaluate the fused proposals") {
  const std::string root = scratch_root();
  const RunOutput fuse = run_cli({"fuse", "--dataset", fixture("tiny_dataset.json"),
                                  "--detections", fixture("tiny_detections.json"),
                                  "--run-root", root});
  REQUIRE(fuse.exit_code == 0);
  const Json props = load_json(fuse.run_dir + "/proposals.json");
  CHECK(props.size() == 52);

  const RunOutput ar = run_cli({"eval-ar", "--dataset", fixture("tiny_dataset.json"),
                                "--proposals", fuse.run_dir + "/proposals.json",
                                "--run-root", root});
  CHECK(ar.exit_code == 0);
}

TEST_CASE("pseudo-gt reproduces the designed roles") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"pseudo-gt", "--proposals", fixture("tiny_proposals.json"),
                                 "--labels", fixture("tiny_labels.json"),
                                 "--run-root", root});
  REQUIRE(out.exit_code == 0);
  const Json result = load_json(out.run_dir + "/pseudo_gt.json");
  REQUIRE(result["entries"].size() == 3);

  const Json& first = result["entries"][0];
  CHECK(first["image_id"] == 1);
  CHECK(first["anchor_index"] == 0);
  CHECK(first["roles"] ==
        Json::array({"anchor", "positive", "negative", "ignored", "negative"}));
  const Json& last = result["entries"][2];
  CHECK(last["image_id"] == 6);
  CHECK(last["roles"] == Json::array({"anchor", "positive", "negative"}));
  REQUIRE(result["warnings"].size() == 1);
  const std::string warning = result["warnings"][0];
  CHECK(warning.find("image 4") != std::string::npos);
}

TEST_CASE("build-dataset hits its budgets") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"build-dataset", "--dataset", fixture("tiny_dataset.json"),
                                 "--classes", "ant,bee", "--image-budget", "3",
                                 "--box-budget", "6", "--seed", "5", "--run-root", root});
  REQUIRE(out.exit_code == 0);
  const Json report = load_json(out.run_dir + "/budget.json");
  CHECK(report["kept_images"] == 3);
  CHECK(report["kept_boxes"] == 6);
  CHECK(report["under_budget_images"] == false);
  const Json data = load_json(out.run_dir + "/dataset.json");
  CHECK(data["images"].size() == 3);
  CHECK(data["annotations"].size() == 6);
}

TEST_CASE("split separates target images from the source pool") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"split", "--dataset", fixture("tiny_dataset.json"),
                                 "--hierarchy", fixture("tiny_hierarchy.json"),
                                 "--targets", "dog", "--run-root", root});
  REQUIRE(out.exit_code == 0);
  const Json split = load_json(out.run_dir + "/split.json");
  CHECK(split["target_classes"] == Json::array({"dog"}));
  CHECK(split["target_images"] == Json::array({6}));
  CHECK(split["source_images"].size() == 5);
}

TEST_CASE("validate reports violations as data and exits 3") {
  const std::string root = scratch_root();
  const RunOutput ok = run_cli({"validate", "--dataset", fixture("tiny_dataset.json"),
                                "--hierarchy", fixture("tiny_hierarchy.json"),
                                "--run-root", root});
  CHECK(ok.exit_code == 0);

  const fs::path bad = fs::path(root) / "bad_dataset.json";
  {
    std::ofstream f(bad);
    f << R"({"images": [{"id": 1, "width": 10, "height": 10}],
             "categories": [{"id": 1, "name": "x"}],
             "annotations": [{"id": 1, "image_id": 1, "category_id": 1,
                              "bbox": [0, 0, 0, 5]}]})";
  }
  const RunOutput broken = run_cli({"validate", "--dataset", bad.string(), "--run-root", root});
  CHECK(broken.exit_code == 3);
  CHECK(broken.text.find("degenerate box") != std::string::npos);
}

TEST_CASE("exit codes distinguish config from data errors") {
  const std::string root = scratch_root();
  // Missing required input: config error.
  CHECK(run_cli({"eval-ar", "--run-root", root}).exit_code == 2);
  // Unreadable input file: data error.
  CHECK(run_cli({"eval-ar", "--dataset", "/no/such/file.json",
                 "--proposals", fixture("tiny_proposals.json"), "--run-root", root})
            .exit_code == 3);
  // Out-of-range threshold: config error.
  CHECK(run_cli({"fuse", "--dataset", fixture("tiny_dataset.json"),
                 "--detections", fixture("tiny_detections.json"),
                 "--nms-threshold", "1.5", "--run-root", root})
            .exit_code == 2);
}

TEST_CASE("config file with flag override") {
  const std::string root = scratch_root();
  const fs::path cfg = fs::path(root) / "eval.json";
  {
    std::ofstream f(cfg);
    f << Json{{"dataset", fixture("tiny_dataset.json")},
              {"proposals", fixture("tiny_proposals.json")},
              {"metrics", {{"k_values", {1}}}}}
             .dump();
  }
  const RunOutput from_file = run_cli({"eval-ar", "-c", cfg.string(), "--run-root", root});
  REQUIRE(from_file.exit_code == 0);
  const Json ar1 = load_json(from_file.run_dir + "/ar.json");
  REQUIRE(ar1["k_values"].size() == 1);
  CHECK(ar1["k_values"][0] == 1);

  // The flag overrides the config key and lands in a different run dir.
  const RunOutput overridden =
      run_cli({"eval-ar", "-c", cfg.string(), "--k", "5,10", "--run-root", root});
  REQUIRE(overridden.exit_code == 0);
  CHECK(overridden.run_dir != from_file.run_dir);
  const Json ar2 = load_json(overridden.run_dir + "/ar.json");
  CHECK(ar2["k_values"] == Json::array({5, 10}));
}

TEST_CASE("reruns are byte identical apart from the manifest timestamp") {
  const std::string root_a = scratch_root();
  const std::string root_b = scratch_root();
  const std::vector<std::string> args = {"simulate", "-c", fixture("sim_world.json")};
  auto with_root = [&](const std::string& root) {
    std::vector<std::string> a = args;
    a.push_back("--run-root");
    a.push_back(root);
    return run_cli(a);
  };
  const RunOutput a = with_root(root_a);
  const RunOutput b = with_root(root_b);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);

  for (const auto& entry : fs::directory_iterator(a.run_dir)) {
    const std::string name = entry.path().filename().string();
    const std::string other = b.run_dir + "/" + name;
    REQUIRE(fs::exists(other));
    if (name == "manifest.json") continue;
    CHECK_MESSAGE(slurp(entry.path().string()) == slurp(other), "differs: ", name);
  }
  // Manifests agree once the timestamp line is dropped.
  auto strip_ts = [](std::string text) {
    Json j = Json::parse(text);
    j.erase("timestamp");
    return j.dump();
  };
  CHECK(strip_ts(slurp(a.run_dir + "/manifest.json")) ==
        strip_ts(slurp(b.run_dir + "/manifest.json")));
}

TEST_CASE("report renders a stored run without touching it") {
  const std::string root = scratch_root();
  const RunOutput ar = run_cli({"eval-ar", "--dataset", fixture("tiny_dataset.json"),
                                "--proposals", fixture("tiny_proposals.json"),
                                "--run-root", root});
  REQUIRE(ar.exit_code == 0);

  std::vector<std::string> before;
  for (const auto& e : fs::directory_iterator(ar.run_dir))
    before.push_back(e.path().filename().string());

  const RunOutput report = run_cli({"report", ar.run_dir});
  CHECK(report.exit_code == 0);
  CHECK(report.text.find("eval-ar") != std::string::npos);
  CHECK(report.text.find("AR@") != std::string::npos);

  std::vector<std::string> after;
  for (const auto& e : fs::directory_iterator(ar.run_dir))
    after.push_back(e.path().filename().string());
  CHECK(before == after);

  // A directory without a manifest is a data error.
  CHECK(run_cli({"report", root}).exit_code == 3);
}

TEST_CASE("simulate emits a coherent world") {
  const std::string root = scratch_root();
  const RunOutput out = run_cli({"simulate", "-c", fixture("sim_world.json"),
                                 "--run-root", root});
  REQUIRE(out.exit_code == 0);
  const Json world = load_json(out.run_dir + "/world.json");
  CHECK(world["classes"].size() == 24);
  CHECK(world["blocks"].size() == 24);
  const Json dataset = load_json(out.run_dir + "/dataset.json");
  CHECK(dataset["images"].size() == 120);
  CHECK(fs::exists(out.run_dir + "/detections.json"));
  CHECK(fs::exists(out.run_dir + "/hierarchy.json"));
}
