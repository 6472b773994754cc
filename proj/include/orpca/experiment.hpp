#pragma once

#include <orpca/changepoint.hpp>
#include <orpca/metrics.hpp>
#include <orpca/simgen.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace orpca {

enum class Scale { desk, paper };
Scale parse_scale(const std::string& name);
const char* to_string(Scale scale);

/// Data and tracker settings for one of the three simulation studies.
///
/// Study 1: stable subspace. Study 2: leading columns of the basis drift
/// linearly. Study 3: drift plus abrupt subspace changes. Desk scale uses
/// m = 100 and T <= 1500; paper scale uses m = 400 and T = 5000 / 3000.
struct StudySetup {
  int study = 1;
  Scale scale = Scale::desk;
  SimSpec sim;
  CpConfig cp;
  bool with_batch = false;  // also run batch PCP on the whole stream
};

StudySetup study_setup(int study, Scale scale, std::uint64_t seed);

struct MethodRun {
  std::string method;  // "pcp", "stoc", "omw", "omw-cp"
  DecompositionResult result;
  EvalReport report;
  std::vector<CpDiagnostic> diagnostics;  // omw-cp only
};

struct ExperimentResult {
  StudySetup setup;
  GroundTruth truth;
  std::vector<MethodRun> runs;
  std::vector<std::string> warnings;

  const MethodRun& run(const std::string& method) const;
};

/// Generates the study data and runs every method on identical input.
ExperimentResult run_experiment(const StudySetup& setup);

/// Scores a decomposition of the stream part of `truth`.
EvalReport evaluate(const DecompositionResult& result, const GroundTruth& truth, double zero_eps, Index cp_window,
                    double runtime_seconds);

/// Writes reports.jsonl and diagnostics.jsonl (deterministic for a given
/// setup) and timing.jsonl (wall-clock) into out_dir, creating it if needed.
void write_experiment(const ExperimentResult& result, const std::string& out_dir);

/// The deterministic report records, one JSON object per line.
std::string experiment_reports_jsonl(const ExperimentResult& result);
std::string experiment_diagnostics_jsonl(const ExperimentResult& result);

}  // namespace orpca
