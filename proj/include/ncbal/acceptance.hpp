#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncbal/config.hpp"

namespace ncbal {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// One line: `PASS <name> <detail> (<seconds> s)`.
std::string format_result(const CriterionResult& result);

struct VerifyOptions {
    /// Replaces the flux of every shallow-water scenario.
    std::optional<std::string> flux_override;
    int threads = 1;
};

/// Outcome of one acceptance scenario, gathered by observers during the run.
struct ScenarioRun {
    Problem problem;
    RunResult result;
    double seconds = 0.0;
    double max_drift = 0.0;  ///< max over steps and cells of |u_K^n − u_K⁰|
    /// Per conserved component: max_n |Σ|K|u^n − Σ|K|u⁰| / max_n Σ|K||u_K^n|_∞.
    std::vector<double> conservation_drift;
    double worst_cone_margin = -HUGE_VAL;  ///< max over steps and radii of inner − outer − tol
    long cone_checks = 0;
    double lf = 0.0;
};

/// Named scenarios, each run at most once per Verifier.
class Verifier {
public:
    explicit Verifier(VerifyOptions options = {});

    static const std::vector<std::string>& suites();
    /// Throws ConfigError for an unknown suite.
    std::vector<CriterionResult> run_suite(const std::string& suite);

    CriterionResult well_balancing();
    CriterionResult cell_entropy_inequality();
    CriterionResult relative_entropy_inequality();
    CriterionResult asymptotic_stability();
    CriterionResult exact_conservation();
    CriterionResult lemma_sandwich();
    CriterionResult flux_contracts();
    CriterionResult stability_cone();
    CriterionResult lagrangian_equilibrium();

    /// Scenario config text, after the flux override.
    std::string scenario_config(const std::string& name) const;
    const ScenarioRun& scenario(const std::string& name);
    static const std::vector<std::string>& scenario_names();

private:
    VerifyOptions options_;
    std::map<std::string, std::unique_ptr<ScenarioRun>> cache_;
};

}  // namespace ncbal
