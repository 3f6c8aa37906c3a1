#pragma once

#include "iaps/precoding.hpp"
#include "iaps/scenario.hpp"
#include "iaps/types.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace iaps {

enum class Scheme { iaps_s0, iaps_no_s0, active, passive, min_ptotal };
enum class Regime { unlimited, limited };

std::string scheme_name(Scheme s);
std::string regime_name(Regime r);
Scheme scheme_from_name(const std::string& name);
Regime regime_from_name(const std::string& name);

enum class SweepVar { sigma_rcs_db, p_max_dbm, rap_count, ue_count, gamma_db };

std::string sweep_var_name(SweepVar v);
SweepVar sweep_var_from_name(const std::string& name);

struct ExperimentSpec {
    std::string figure;
    SweepVar var = SweepVar::sigma_rcs_db;
    std::vector<double> values; // strictly monotone
    std::vector<Scheme> schemes;
    std::vector<Regime> regimes;
    // when nonempty, each scheme is expanded into one curve per listed
    // sigma_rcs value (labelled scheme@<v>dB); used by the limited-regime
    // RAP sweep
    std::vector<double> curve_sigma_rcs_db;
    ScenarioConfig base;
    int trials = 200;
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware parallelism

    void validate() const;
};

ExperimentSpec spec_from_json(const std::string& json_text);
std::string spec_to_json(const ExperimentSpec& spec);

struct CurvePoint {
    std::string figure;
    std::string scheme;
    std::string regime;
    double x = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    int trials_used = 0;
    int infeasible = 0;
};

// Known figure ids: fig2 (pd vs p0), fig3 (heuristic vs upper bound),
// fig4 (step-size trade-off), fig6..fig9 (unlimited sweeps), fig10
// (unlimited vs limited), fig11 (limited RAP sweep), tradeoff
// (sensing/communication power split). fig5 is the scenario scatter and is
// produced by gen-scenario.
ExperimentSpec spec_for_figure(const std::string& figure, const ScenarioConfig& base);

// Dispatches on spec.figure to the specialised runners below; unknown
// figures run the generic sweep.
std::vector<CurvePoint> run_figure(const ExperimentSpec& spec);

std::vector<CurvePoint> run_experiment(const ExperimentSpec& spec);
std::vector<CurvePoint> run_pd_vs_p0(const ExperimentSpec& spec);
std::vector<CurvePoint> run_gap(const ExperimentSpec& spec);
std::vector<CurvePoint> run_stepsize(const ExperimentSpec& spec);
std::vector<CurvePoint> run_tradeoff(const ExperimentSpec& spec);

void emit_csv(const std::vector<CurvePoint>& points, std::ostream& out);
std::vector<CurvePoint> parse_csv(std::istream& in);

// Line plot (SVG, deterministic bytes) of a curve CSV; layout CSVs from
// gen-scenario render as a scatter.
void emit_plot(const std::string& csv_path, const std::string& out_path);

// --- building blocks shared with tests and the acceptance suite ---

// Keep the first K UE columns and the first R RAPs of a draw (draws are
// nested so sweeps over K or R reuse one realization per trial).
ChannelSet slice_channels(const ChannelSet& ch, int K, int R);

// Unit precoder matrix [w0_zfr | rzf columns] for a channel realization.
MatC unit_precoders(const ChannelSet& ch, const ScenarioConfig& cfg);

struct TrialMetrics {
    std::optional<double> pd; // empty when the allocation is infeasible
};

// Analytic per-trial metric: detection probability of the fused detector
// (unlimited) or of the voted decision (limited).
TrialMetrics evaluate_trial_metric(const ScenarioConfig& cfg, const ChannelSet& ch, Scheme scheme,
                                   Regime regime);

// Average per-node detection probability for a given power vector (the
// limited-regime objective swept by fig2/fig3).
double average_local_pd(const ScenarioConfig& cfg, const ChannelSet& ch, const MatC& w_tilde,
                        const VecD& p);

// Sum of the per-node noncentralities (fig4's total).
double total_local_noncentrality(const ScenarioConfig& cfg, const ChannelSet& ch,
                                 const MatC& w_tilde, const VecD& p);

struct VotedTrialReport {
    std::vector<double> statistics; // per node, BS first
    std::vector<bool> bits;
    int kappa = 0;
    bool decision = false;
};

// Empirical bit-level decision fusion: simulates every node's observation
// (target-free interference included), runs the local GLRTs and fuses the
// one-bit decisions by voting. Cross-checks the analytic voted-probability
// path used by the limited-regime curves.
VotedTrialReport empirical_voted_trial(const ScenarioConfig& cfg, const ChannelSet& ch,
                                       const PrecoderSet& ps, const VecC* alpha, RngStream& rng);

// Run fn(trial_index) over a worker pool; exceptions propagate.
void parallel_trials(int n, int threads, const std::function<void(int)>& fn);

} // namespace iaps
