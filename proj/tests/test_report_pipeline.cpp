#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "twinseg/error.hpp"
#include "twinseg/io.hpp"
#include "twinseg/pipeline.hpp"
#include "twinseg/report.hpp"
#include "twinseg/synth.hpp"

using namespace twinseg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "twinseg_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes a small separated scene with ground truth and returns its path.
fs::path write_scene(const fs::path& dir, std::uint64_t seed) {
  RandomSceneParams rp;
  rp.objects = 5;
  rp.density = 2500;
  const Scene scene = generate_scene(random_separated_scene(seed, rp));
  const fs::path path = dir / "scene.xyz";
  io::write_labeled(path, scene.cloud, &scene.labels, io::Format::Xyz, io::Columns{false, true, false, false});
  return path;
}

PipelineConfig identity_config(const fs::path& input, const fs::path& run_dir, unsigned threads) {
  Json doc = {{"input", input.string()},
              {"run_dir", run_dir.string()},
              {"threads", threads},
              {"seed", 7},
              {"segment", {{"preset", "gt"}}},
              {"evaluate", {{"iou", 0.5}, {"sweep", "0.25:1:0.25"}}}};
  return config_from_json(doc);
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("eval report round-trips and dumps stably") {
    RandomSceneParams rp;
    rp.objects = 4;
    const Scene scene = generate_scene(random_separated_scene(3, rp));
    EvalParams params;
    params.threshold_sweep = {0.25, 0.5, 0.75};
    const EvalReport report = evaluate(scene.labels, scene.labels, params);
    const Json doc = to_json(report);
    CHECK(doc.at("schema_version") == kEvalSchema);
    CHECK(dump_stable(doc) == dump_stable(to_json(report)));
    const EvalReport back = eval_report_from_json(doc);
    CHECK(dump_stable(to_json(back)) == dump_stable(doc));
    CHECK(back.instances.matches.size() == report.instances.matches.size());
    CHECK(back.curve.size() == 3);
    CHECK_THROWS_AS((void)eval_report_from_json(Json{{"schema_version", "nope"}}), Error);
  }

  TEST_CASE("empty sweep report is a valid document") {
    const Json doc = to_json(std::vector<MuSweepPoint>{}, 0.5);
    CHECK(doc.at("schema_version") == kSweepSchema);
    CHECK(doc.at("points").is_array());
    CHECK(doc.at("points").empty());
  }

  TEST_CASE("scene spec and stats round-trip") {
    RandomSceneParams rp;
    rp.objects = 8;
    rp.clutter_points = 10;
    const SceneSpec spec = random_separated_scene(12, rp);
    const Json doc = to_json(spec);
    CHECK(dump_stable(to_json(scene_spec_from_json(doc))) == dump_stable(doc));
    Json bad = doc;
    bad["colour"] = "red";
    CHECK_THROWS_AS((void)scene_spec_from_json(bad), Error);

    FacilityStats f;
    f.name = "plant";
    f.total[0] = 10;
    f.recall[0] = 0.5;
    f.total_hours = 3.0;
    CHECK(dump_stable(to_json(facility_stats_from_json(to_json(f)))) == dump_stable(to_json(f)));
  }

  TEST_CASE("json file errors") {
    const fs::path dir = scratch("json");
    CHECK_THROWS_AS((void)read_json(dir / "absent.json"), Error);
    std::ofstream(dir / "broken.json") << "{ nope";
    try {
      (void)read_json(dir / "broken.json");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
    CHECK_THROWS_AS(write_json(dir / "no" / "such" / "dir" / "x.json", Json::object()), Error);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("config validation") {
    CHECK_THROWS_AS((void)config_from_json(Json{{"input", "a.xyz"}, {"colour", 1}}), Error);
    CHECK_THROWS_AS((void)config_from_json(Json{{"input", "a.xyz"}, {"segment", {{"epsilon", -1}}}}), Error);
    CHECK_THROWS_AS((void)config_from_json(Json{{"input", "a.xyz"}, {"partition", {{"block_stride", 2.0}}}}), Error);
    CHECK_THROWS_AS((void)config_from_json(Json{{"input", "a.xyz"}, {"classify", {{"mode", "magic"}}}}), Error);
    CHECK_THROWS_AS((void)config_from_json(Json{{"run_dir", "r"}}), Error);
    const PipelineConfig cfg = identity_config("in.xyz", "out", 2);
    CHECK(dump_stable(to_json(config_from_json(to_json(cfg)))) == dump_stable(to_json(cfg)));
  }

  TEST_CASE("identity pipeline recovers every instance") {
    const fs::path dir = scratch("identity");
    const fs::path input = write_scene(dir, 21);
    const PipelineResult r = run_pipeline(identity_config(input, dir / "run", 2));
    REQUIRE(r.evaluation.has_value());
    CHECK(r.evaluation->instances.mean_precision == 1.0);
    CHECK(r.evaluation->instances.mean_recall == 1.0);
    for (const CurvePoint& p : r.evaluation->curve) {
      CHECK(p.mean_precision == 1.0);
      CHECK(p.mean_recall == 1.0);
    }
    for (const char* name : {"classified.xyz", "segmented.xyz", "eval.json", "manifest.json"}) {
      CHECK(fs::exists(dir / "run" / name));
    }
    const Json manifest = read_json(dir / "run" / "manifest.json");
    CHECK(manifest.at("schema_version") == kManifestSchema);
    CHECK(manifest.at("outputs").at("segmented.xyz") == fnv1a_hex(slurp(dir / "run" / "segmented.xyz")));
  }

  TEST_CASE("outputs are identical across runs and thread counts") {
    const fs::path dir = scratch("determinism");
    const fs::path input = write_scene(dir, 22);
    (void)run_pipeline(identity_config(input, dir / "a", 1));
    (void)run_pipeline(identity_config(input, dir / "b", 4));
    (void)run_pipeline(identity_config(input, dir / "c", 4));
    for (const char* name : {"classified.xyz", "segmented.xyz", "eval.json"}) {
      CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
      CHECK(slurp(dir / "b" / name) == slurp(dir / "c" / name));
    }
  }

  TEST_CASE("missing input names the path and the stage") {
    const fs::path dir = scratch("missing");
    try {
      (void)run_pipeline(identity_config(dir / "ghost.xyz", dir / "run", 1));
      FAIL("expected an error");
    } catch (const Error& e) {
      const std::string what = e.what();
      CHECK(what.find("ghost.xyz") != std::string::npos);
      CHECK(what.find("load") != std::string::npos);
    }
  }

  TEST_CASE("fnv1a") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }
}

TEST_SUITE("cli") {
  int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + TWINSEG_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return status == 0 ? 0 : 1;
  }

  TEST_CASE("missing input exits nonzero and names the path") {
    const fs::path dir = scratch("cli_missing");
    CHECK(run("segment --in " + (dir / "nowhere.xyz").string() + " --out " + (dir / "o.xyz").string(),
              dir / "log") != 0);
    CHECK(slurp(dir / "log").find("nowhere.xyz") != std::string::npos);
  }

  TEST_CASE("synth, segment and evaluate round trip") {
    const fs::path dir = scratch("cli_flow");
    const std::string d = dir.string();
    REQUIRE(run("synth --random 5 --objects 4 --density 2500 --out " + d + "/scene.xyz --spec-out " + d + "/spec.json",
                dir / "log1") == 0);
    REQUIRE(run("segment --in " + d + "/scene.xyz --preset gt --out " + d + "/seg.xyz", dir / "log2") == 0);
    REQUIRE(run("evaluate --gt " + d + "/scene.xyz --pred " + d + "/seg.xyz --iou 0.5 --out " + d + "/eval.json",
                dir / "log3") == 0);
    const Json eval = read_json(dir / "eval.json");
    CHECK(eval.at("instances").at("mean_precision").get<double>() == 1.0);
    CHECK(eval.at("instances").at("mean_recall").get<double>() == 1.0);
    REQUIRE(run("synth --spec " + d + "/spec.json --out " + d + "/again.xyz", dir / "log4") == 0);
    CHECK(slurp(dir / "scene.xyz") == slurp(dir / "again.xyz"));
  }

  TEST_CASE("cost report from the bundled stats") {
    const fs::path dir = scratch("cli_cost");
    REQUIRE(run(std::string("cost-report --stats ") + TWINSEG_DATA_DIR + "/cost/facilities.json --out " +
                    (dir / "cost.json").string(),
                dir / "log") == 0);
    const Json doc = read_json(dir / "cost.json");
    CHECK(doc.at("schema_version") == kCostSchema);
    CHECK(run("cost-report --stats " + (dir / "none.json").string(), dir / "log2") != 0);
  }
}
