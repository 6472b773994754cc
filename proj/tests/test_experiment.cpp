#include <orpca/experiment.hpp>

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace orpca;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST(StudySetup, DeskAndPaperScales) {
  const StudySetup d1 = study_setup(1, Scale::desk, 3);
  EXPECT_EQ(d1.sim.m, 100);
  EXPECT_EQ(d1.sim.T, 1000);
  EXPECT_EQ(d1.cp.tracker.n_win, 100);
  EXPECT_TRUE(d1.with_batch);
  EXPECT_EQ(d1.sim.seed, 3u);

  const StudySetup d3 = study_setup(3, Scale::desk, 0);
  const auto& v = std::get<ChangePointVariant>(d3.sim.variant);
  EXPECT_EQ(v.ranks, (std::vector<Index>{5, 25, 12}));
  EXPECT_EQ(v.change_points, (std::vector<Index>{500, 1000}));
  EXPECT_EQ(d3.sim.T, 1500);

  const StudySetup p1 = study_setup(1, Scale::paper, 0);
  EXPECT_EQ(p1.sim.m, 400);
  EXPECT_EQ(p1.sim.T, 5000);
  EXPECT_DOUBLE_EQ(p1.cp.tracker.lambda1, 0.05);
  EXPECT_DOUBLE_EQ(p1.cp.tracker.lambda2, 5.0);
  EXPECT_EQ(p1.cp.n_check, 20u);
  EXPECT_DOUBLE_EQ(p1.cp.alpha, 0.01);
  EXPECT_EQ(study_setup(3, Scale::paper, 0).sim.T, 3000);

  EXPECT_THROW(study_setup(4, Scale::desk, 0), Error);
  EXPECT_EQ(parse_scale("paper"), Scale::paper);
  EXPECT_THROW(parse_scale("huge"), Error);
}

TEST(Experiment, OutputsAreDeterministic) {
  const StudySetup s = study_setup(2, Scale::desk, 5);
  const ExperimentResult a = run_experiment(s);
  const ExperimentResult b = run_experiment(s);
  EXPECT_EQ(experiment_reports_jsonl(a), experiment_reports_jsonl(b));
  EXPECT_EQ(experiment_diagnostics_jsonl(a), experiment_diagnostics_jsonl(b));

  const auto base = std::filesystem::temp_directory_path() / "orpca_experiment_test";
  std::filesystem::remove_all(base);
  write_experiment(a, (base / "a").string());
  write_experiment(b, (base / "b").string());
  for (const char* name : {"reports.jsonl", "diagnostics.jsonl"})
    EXPECT_EQ(slurp(base / "a" / name), slurp(base / "b" / name)) << name;
  EXPECT_TRUE(std::filesystem::exists(base / "a" / "timing.jsonl"));
  std::filesystem::remove_all(base);
}

TEST(Experiment, ReportRecords) {
  const ExperimentResult r = run_experiment(study_setup(2, Scale::desk, 6));
  const auto lines = parse_lines(experiment_reports_jsonl(r));
  ASSERT_EQ(lines.size(), 4u);  // spec + stoc, omw, omw-cp
  EXPECT_EQ(lines[0]["record"], "spec");
  EXPECT_EQ(lines[0]["study"], 2);
  std::vector<std::string> methods;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i]["record"], "report");
    methods.push_back(lines[i]["method"]);
    const double err = lines[i]["err_L"];
    EXPECT_GT(err, 0.0);
    EXPECT_LT(err, 1.0);
  }
  EXPECT_EQ(methods, (std::vector<std::string>{"stoc", "omw", "omw-cp"}));
  EXPECT_EQ(r.run("omw-cp").diagnostics.size(), static_cast<std::size_t>(r.truth.M.cols()));
  EXPECT_THROW(r.run("grasta"), Error);
}

TEST(Evaluate, ScoresAgainstTruth) {
  SimSpec spec;
  spec.m = 20;
  spec.T = 50;
  spec.n_burnin = 10;
  spec.seed = 1;
  spec.rho = 0.05;
  spec.variant = ChangePointVariant{{2, 3}, {25}, 1, 10};
  const GroundTruth gt = generate(spec);
  DecompositionResult perfect;
  perfect.low_rank = gt.L;
  perfect.sparse = gt.S;
  perfect.change_points = {27};
  const EvalReport rep = evaluate(perfect, gt, 0.0, 10, 1.5);
  EXPECT_EQ(rep.err_l, 0.0);
  EXPECT_EQ(rep.err_s, 0.0);
  EXPECT_EQ(rep.f_s, 0.0);
  EXPECT_EQ(rep.cp_deviations, (std::vector<Index>{2}));
  EXPECT_EQ(rep.runtime_seconds, 1.5);
}
