#include "iaps/experiments.hpp"

#include "iaps/chi2.hpp"
#include "iaps/detect_fusion.hpp"
#include "iaps/detect_local.hpp"
#include "iaps/power_alloc.hpp"
#include "iaps/precoding.hpp"
#include "iaps/voting.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace iaps {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::iaps_s0: return "iaps_s0";
        case Scheme::iaps_no_s0: return "iaps_no_s0";
        case Scheme::active: return "active";
        case Scheme::passive: return "passive";
        case Scheme::min_ptotal: return "min_ptotal";
    }
    return "?";
}

std::string regime_name(Regime r) { return r == Regime::unlimited ? "unlimited" : "limited"; }

Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::iaps_s0, Scheme::iaps_no_s0, Scheme::active, Scheme::passive,
                     Scheme::min_ptotal})
        if (scheme_name(s) == name) return s;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

Regime regime_from_name(const std::string& name) {
    if (name == "unlimited") return Regime::unlimited;
    if (name == "limited") return Regime::limited;
    throw std::invalid_argument("unknown regime '" + name + "'");
}

std::string sweep_var_name(SweepVar v) {
    switch (v) {
        case SweepVar::sigma_rcs_db: return "sigma_rcs_db";
        case SweepVar::p_max_dbm: return "p_max_dbm";
        case SweepVar::rap_count: return "rap_count";
        case SweepVar::ue_count: return "ue_count";
        case SweepVar::gamma_db: return "gamma_db";
    }
    return "?";
}

SweepVar sweep_var_from_name(const std::string& name) {
    for (SweepVar v : {SweepVar::sigma_rcs_db, SweepVar::p_max_dbm, SweepVar::rap_count,
                       SweepVar::ue_count, SweepVar::gamma_db})
        if (sweep_var_name(v) == name) return v;
    throw std::invalid_argument("unknown sweep variable '" + name + "'");
}

void ExperimentSpec::validate() const {
    base.validate();
    if (values.empty()) throw std::invalid_argument("spec: empty sweep");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]) && !(values[i] < values[i - 1] && values[1] < values[0]))
            throw std::invalid_argument("spec: sweep values must be strictly monotone");
    if (schemes.empty()) throw std::invalid_argument("spec: no schemes");
    if (regimes.empty()) throw std::invalid_argument("spec: no regimes");
    if (trials < 1) throw std::invalid_argument("spec: trials >= 1");
}

ExperimentSpec spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentSpec s;
    s.figure = j.value("figure", std::string("custom"));
    s.var = sweep_var_from_name(j.at("var").get<std::string>());
    s.values = j.at("values").get<std::vector<double>>();
    for (const auto& name : j.at("schemes")) s.schemes.push_back(scheme_from_name(name));
    if (j.contains("regimes"))
        for (const auto& name : j.at("regimes")) s.regimes.push_back(regime_from_name(name));
    else
        s.regimes = {Regime::unlimited};
    if (j.contains("curve_sigma_rcs_db"))
        s.curve_sigma_rcs_db = j.at("curve_sigma_rcs_db").get<std::vector<double>>();
    if (j.contains("base")) s.base = config_from_json(j.at("base").dump());
    s.trials = j.value("trials", s.base.trials);
    s.seed = j.value("seed", s.base.seed);
    s.threads = j.value("threads", 0);
    s.validate();
    return s;
}

std::string spec_to_json(const ExperimentSpec& s) {
    nlohmann::json j;
    j["figure"] = s.figure;
    j["var"] = sweep_var_name(s.var);
    j["values"] = s.values;
    std::vector<std::string> sch, reg;
    for (Scheme x : s.schemes) sch.push_back(scheme_name(x));
    for (Regime x : s.regimes) reg.push_back(regime_name(x));
    j["schemes"] = sch;
    j["regimes"] = reg;
    if (!s.curve_sigma_rcs_db.empty()) j["curve_sigma_rcs_db"] = s.curve_sigma_rcs_db;
    j["base"] = nlohmann::json::parse(config_to_json(s.base));
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    j["threads"] = s.threads;
    return j.dump(2);
}

void parallel_trials(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

ChannelSet slice_channels(const ChannelSet& ch, int K, int R) {
    if (K > ch.H.cols() || R > static_cast<int>(ch.G.size()))
        throw std::invalid_argument("slice_channels: slice larger than draw");
    ChannelSet out;
    out.H = ch.H.leftCols(K);
    out.G.assign(ch.G.begin(), ch.G.begin() + R);
    out.a_theta = ch.a_theta;
    out.b0_theta = ch.b0_theta;
    out.b1_phi.assign(ch.b1_phi.begin(), ch.b1_phi.begin() + R);
    return out;
}

MatC unit_precoders(const ChannelSet& ch, const ScenarioConfig& cfg) {
    const int K = static_cast<int>(ch.H.cols());
    MatC w(cfg.M, K + 1);
    w.col(0) = zfr(ch.H, ch.a_theta, ZfrMode::projection);
    double lambda = rzf_lambda_default(K, cfg.sigma_nc2_mw(), cfg.p_max_mw());
    w.rightCols(K) = rzf(ch.H, lambda);
    return w;
}

namespace {

VecD unit_beam_gains(const MatC& w_tilde, const VecC& a) {
    VecD c(w_tilde.cols());
    for (Eigen::Index j = 0; j < w_tilde.cols(); ++j) c(j) = std::norm(a.dot(w_tilde.col(j)));
    return c;
}

std::vector<MatC> fusion_b_subset(const ChannelSet& ch, Scheme scheme) {
    std::vector<MatC> bs;
    const bool with_bs = scheme != Scheme::passive;
    const bool with_raps = scheme != Scheme::active;
    if (with_bs) bs.push_back(ch.b0_theta * ch.a_theta.adjoint());
    if (with_raps)
        for (const auto& b1 : ch.b1_phi) bs.push_back(b1 * ch.a_theta.adjoint());
    return bs;
}

struct LocalNode {
    double rho = 0.0;
    double pd = 0.0;
};

std::vector<LocalNode> local_nodes(const ScenarioConfig& cfg, const ChannelSet& ch,
                                   const PrecoderSet& ps, Scheme scheme) {
    const double xi = threshold_from_pfa(cfg.pfa);
    std::vector<LocalNode> nodes;
    auto add_node = [&](int idx, const MatC* G, const MatC& B, int n_rx) {
        LocalDetector det(idx, interference_cov(G, ps.W_hat, cfg.sigma_ns2(), n_rx), cfg.pfa);
        LocalNode node;
        node.rho = noncentrality_local(ps, B, det, cfg.L, cfg.sigma_rcs2());
        node.pd = noncentral_chi2_sf_2dof(xi, node.rho);
        nodes.push_back(node);
    };
    if (scheme != Scheme::passive)
        add_node(0, nullptr, ch.b0_theta * ch.a_theta.adjoint(), cfg.N0);
    if (scheme != Scheme::active)
        for (std::size_t r = 0; r < ch.b1_phi.size(); ++r)
            add_node(static_cast<int>(r + 1), &ch.G[r], ch.b1_phi[r] * ch.a_theta.adjoint(), cfg.N1);
    return nodes;
}

double voted_detection(const std::vector<LocalNode>& nodes, double pfa) {
    const int n = static_cast<int>(nodes.size());
    double pd_hat = 0.0;
    for (const auto& node : nodes) pd_hat += node.pd;
    pd_hat /= n;
    if (n == 1) return pd_hat;
    int kappa = pd_hat > pfa ? optimal_kappa(pd_hat, pfa, n - 1) : (n + 1) / 2;
    return voted_tail(kappa, pd_hat, n - 1);
}

} // namespace

double average_local_pd(const ScenarioConfig& cfg, const ChannelSet& ch, const MatC& w_tilde,
                        const VecD& p) {
    PrecoderSet ps = make_precoder_set(w_tilde, p);
    auto nodes = local_nodes(cfg, ch, ps, Scheme::iaps_s0);
    double acc = 0.0;
    for (const auto& node : nodes) acc += node.pd;
    return acc / static_cast<double>(nodes.size());
}

double total_local_noncentrality(const ScenarioConfig& cfg, const ChannelSet& ch,
                                 const MatC& w_tilde, const VecD& p) {
    PrecoderSet ps = make_precoder_set(w_tilde, p);
    auto nodes = local_nodes(cfg, ch, ps, Scheme::iaps_s0);
    double acc = 0.0;
    for (const auto& node : nodes) acc += node.rho;
    return acc;
}

VotedTrialReport empirical_voted_trial(const ScenarioConfig& cfg, const ChannelSet& ch,
                                       const PrecoderSet& ps, const VecC* alpha, RngStream& rng) {
    StackedModel model = build_stacked_model(ch);
    MatC S = make_symbols(cfg.K + 1, cfg.L, rng);
    MatC X = ps.W * S;
    auto signal = response_signals(model, X);
    std::optional<VecC> a;
    if (alpha != nullptr) a = *alpha;
    Observations obs = simulate_observation(signal, a, &ch.G, X, cfg.sigma_ns2(), rng);

    VotedTrialReport rep;
    const double zeta = threshold_from_pfa(cfg.pfa);
    auto nodes = local_nodes(cfg, ch, ps, Scheme::iaps_s0);
    double pd_hat = 0.0;
    for (const auto& node : nodes) pd_hat += node.pd;
    pd_hat /= static_cast<double>(nodes.size());
    rep.kappa = pd_hat > cfg.pfa ? optimal_kappa(pd_hat, cfg.pfa, cfg.R) : (cfg.R + 2) / 2;

    for (int r = 0; r <= cfg.R; ++r) {
        const MatC* g_ptr = r == 0 ? nullptr : &ch.G[r - 1];
        int n_rx = r == 0 ? cfg.N0 : cfg.N1;
        LocalDetector det(r, interference_cov(g_ptr, ps.W_hat, cfg.sigma_ns2(), n_rx), cfg.pfa);
        MatC zt = matched_filter(obs.z[r], S);
        double stat = local_glrt(zt, ps, model.B[r], det);
        rep.statistics.push_back(stat);
        rep.bits.push_back(local_decision(stat, zeta));
    }
    rep.decision = fuse(rep.bits, rep.kappa);
    return rep;
}

TrialMetrics evaluate_trial_metric(const ScenarioConfig& cfg, const ChannelSet& ch, Scheme scheme,
                                   Regime regime) {
    MatC w_tilde = unit_precoders(ch, cfg);
    auto rows = build_qos_rows(ch.H, w_tilde, cfg.gamma_db, cfg.sigma_nc2_mw());

    AllocationResult alloc;
    if (scheme == Scheme::min_ptotal) {
        alloc = solve_pa(rows, 0.0);
        if (alloc.status == AllocStatus::optimal && alloc.p.sum() > cfg.p_max_mw() * (1.0 + 1e-9))
            alloc.status = AllocStatus::infeasible;
    } else if (regime == Regime::unlimited) {
        VecD c = unit_beam_gains(w_tilde, ch.a_theta);
        alloc = solve_p2(rows, c, cfg.p_max_mw(), scheme != Scheme::iaps_no_s0);
    } else {
        if (scheme == Scheme::iaps_no_s0) {
            alloc = solve_pa(rows, 0.0);
            if (alloc.status == AllocStatus::optimal && alloc.p.sum() > cfg.p_max_mw() * (1.0 + 1e-9))
                alloc.status = AllocStatus::infeasible;
        } else {
            alloc = algorithm1(rows, cfg.p_max_mw(), cfg.delta_p_frac);
        }
    }

    TrialMetrics out;
    if (alloc.status != AllocStatus::optimal) return out;

    PrecoderSet ps = make_precoder_set(w_tilde, alloc.p);
    if (regime == Regime::unlimited) {
        auto bs = fusion_b_subset(ch, scheme);
        double rho = noncentrality_fusion(ps, bs, cfg.L, cfg.sigma_rcs2(), cfg.sigma_ns2());
        out.pd = analytic_pd_fusion(rho, cfg.pfa);
    } else {
        auto nodes = local_nodes(cfg, ch, ps, scheme);
        out.pd = voted_detection(nodes, cfg.pfa);
    }
    return out;
}

namespace {

struct Curve {
    Scheme scheme;
    Regime regime;
    double sigma_override = std::numeric_limits<double>::quiet_NaN();
    std::string label;
};

std::vector<Curve> expand_curves(const ExperimentSpec& spec) {
    std::vector<Curve> curves;
    for (Scheme s : spec.schemes)
        for (Regime r : spec.regimes) {
            if (spec.curve_sigma_rcs_db.empty()) {
                curves.push_back({s, r, std::numeric_limits<double>::quiet_NaN(), scheme_name(s)});
            } else {
                for (double sig : spec.curve_sigma_rcs_db) {
                    std::ostringstream label;
                    label << scheme_name(s) << "@" << sig << "dB";
                    curves.push_back({s, r, sig, label.str()});
                }
            }
        }
    return curves;
}

ScenarioConfig config_at(const ExperimentSpec& spec, double x) {
    ScenarioConfig cfg = spec.base;
    cfg.trials = spec.trials;
    cfg.seed = spec.seed;
    switch (spec.var) {
        case SweepVar::sigma_rcs_db: cfg.sigma_rcs_db = x; break;
        case SweepVar::p_max_dbm: cfg.p_max_dbm = x; break;
        case SweepVar::rap_count: cfg.R = static_cast<int>(std::lround(x)); break;
        case SweepVar::ue_count: cfg.K = static_cast<int>(std::lround(x)); break;
        case SweepVar::gamma_db: cfg.gamma_db = x; break;
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig max_dims_config(const ExperimentSpec& spec) {
    ScenarioConfig cfg = spec.base;
    if (spec.var == SweepVar::rap_count || spec.var == SweepVar::ue_count) {
        double mx = *std::max_element(spec.values.begin(), spec.values.end());
        if (spec.var == SweepVar::rap_count) cfg.R = static_cast<int>(std::lround(mx));
        if (spec.var == SweepVar::ue_count) cfg.K = static_cast<int>(std::lround(mx));
    }
    cfg.validate();
    return cfg;
}

struct Accum {
    double value = 0.0;
    bool feasible = false;
};

std::vector<CurvePoint> reduce_points(const ExperimentSpec& spec, const std::vector<Curve>& curves,
                                      const std::vector<std::vector<std::vector<Accum>>>& cell) {
    std::vector<CurvePoint> points;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (std::size_t v = 0; v < spec.values.size(); ++v) {
            CurvePoint pt;
            pt.figure = spec.figure;
            pt.scheme = curves[c].label;
            pt.regime = regime_name(curves[c].regime);
            pt.x = spec.values[v];
            double sum = 0.0, sumsq = 0.0;
            int used = 0, infeasible = 0;
            for (int t = 0; t < spec.trials; ++t) {
                const Accum& a = cell[c][v][t];
                if (!a.feasible) {
                    ++infeasible;
                    continue;
                }
                sum += a.value;
                sumsq += a.value * a.value;
                ++used;
            }
            pt.trials_used = used;
            pt.infeasible = infeasible;
            if (used > 0) {
                pt.mean = sum / used;
                if (used > 1) {
                    double var = std::max(0.0, (sumsq - used * pt.mean * pt.mean) / (used - 1));
                    pt.stderr_ = std::sqrt(var / used);
                }
            }
            points.push_back(pt);
        }
    }
    return points;
}

// Per-trial substream: depends on the seed and the trial index only, so a
// sweep sees the same realization at every x (common random numbers).
RngStream trial_stream(std::uint64_t seed, int trial) {
    return RngStream(seed).substream(0x7261696c).substream(static_cast<std::uint64_t>(trial));
}

struct TrialDraw {
    Layout lay;
    ChannelSet ch;
};

TrialDraw draw_trial(const ScenarioConfig& cfg_max, std::uint64_t seed, int trial) {
    TrialDraw d;
    RngStream rng = trial_stream(seed, trial);
    d.lay = generate_layout(cfg_max, rng);
    d.ch = draw_channels(d.lay, cfg_max, rng);
    return d;
}

} // namespace

std::vector<CurvePoint> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    auto curves = expand_curves(spec);
    ScenarioConfig cfg_max = max_dims_config(spec);

    std::vector<std::vector<std::vector<Accum>>> cell(
        curves.size(), std::vector<std::vector<Accum>>(spec.values.size(),
                                                       std::vector<Accum>(spec.trials)));

    parallel_trials(spec.trials, spec.threads, [&](int t) {
        TrialDraw draw = draw_trial(cfg_max, spec.seed, t);
        for (std::size_t v = 0; v < spec.values.size(); ++v) {
            ScenarioConfig cfg = config_at(spec, spec.values[v]);
            ChannelSet view = slice_channels(draw.ch, cfg.K, cfg.R);
            for (std::size_t c = 0; c < curves.size(); ++c) {
                ScenarioConfig cfg_curve = cfg;
                if (!std::isnan(curves[c].sigma_override))
                    cfg_curve.sigma_rcs_db = curves[c].sigma_override;
                TrialMetrics m =
                    evaluate_trial_metric(cfg_curve, view, curves[c].scheme, curves[c].regime);
                if (m.pd) {
                    cell[c][v][t].value = *m.pd;
                    cell[c][v][t].feasible = true;
                }
            }
        }
    });

    return reduce_points(spec, curves, cell);
}

std::vector<CurvePoint> run_pd_vs_p0(const ExperimentSpec& spec) {
    spec.validate();
    const ScenarioConfig& base = spec.base;
    const double p_max = base.p_max_mw();
    const double step = base.delta_p_frac * p_max;
    std::vector<double> p0_grid;
    for (double p0 = 0.0; p0 <= p_max * (1.0 + 1e-12); p0 += step) p0_grid.push_back(p0);

    std::vector<std::vector<Accum>> cell(p0_grid.size(), std::vector<Accum>(spec.trials));
    parallel_trials(spec.trials, spec.threads, [&](int t) {
        TrialDraw draw = draw_trial(base, spec.seed, t);
        MatC w_tilde = unit_precoders(draw.ch, base);
        auto rows = build_qos_rows(draw.ch.H, w_tilde, base.gamma_db, base.sigma_nc2_mw());
        for (std::size_t g = 0; g < p0_grid.size(); ++g) {
            AllocationResult r = solve_pa(rows, p0_grid[g]);
            if (r.status != AllocStatus::optimal || r.p.sum() > p_max * (1.0 + 1e-9)) continue;
            cell[g][t].value = average_local_pd(base, draw.ch, w_tilde, r.p);
            cell[g][t].feasible = true;
        }
    });

    std::vector<CurvePoint> points;
    for (std::size_t g = 0; g < p0_grid.size(); ++g) {
        CurvePoint pt;
        pt.figure = spec.figure;
        pt.scheme = "pd_hat";
        pt.regime = "limited";
        pt.x = p0_grid[g];
        double sum = 0.0, sumsq = 0.0;
        int used = 0;
        for (int t = 0; t < spec.trials; ++t) {
            if (!cell[g][t].feasible) {
                ++pt.infeasible;
                continue;
            }
            sum += cell[g][t].value;
            sumsq += cell[g][t].value * cell[g][t].value;
            ++used;
        }
        pt.trials_used = used;
        if (used > 0) {
            pt.mean = sum / used;
            if (used > 1)
                pt.stderr_ = std::sqrt(std::max(0.0, (sumsq - used * pt.mean * pt.mean) / (used - 1)) / used);
        }
        points.push_back(pt);
    }
    return points;
}

std::vector<CurvePoint> run_gap(const ExperimentSpec& spec) {
    spec.validate();
    const ScenarioConfig& base = spec.base;
    const double p_max = base.p_max_mw();
    // aligned with the heuristic's p0 grid so the bound is a true superset
    const int grid_points = static_cast<int>(std::lround(1.0 / base.delta_p_frac)) + 1;

    // cache the power vectors per trial (they do not depend on sigma_rcs)
    struct TrialAllocs {
        bool feasible = false;
        MatC w_tilde;
        VecD p_alg;
        std::vector<VecD> grid_ps;
        ChannelSet ch;
    };
    std::vector<TrialAllocs> allocs(spec.trials);
    parallel_trials(spec.trials, spec.threads, [&](int t) {
        TrialDraw draw = draw_trial(base, spec.seed, t);
        TrialAllocs& ta = allocs[t];
        ta.ch = draw.ch;
        ta.w_tilde = unit_precoders(draw.ch, base);
        auto rows = build_qos_rows(draw.ch.H, ta.w_tilde, base.gamma_db, base.sigma_nc2_mw());
        AllocationResult alg = algorithm1(rows, p_max, base.delta_p_frac);
        if (alg.status != AllocStatus::optimal) return;
        ta.p_alg = alg.p;
        for (int g = 0; g < grid_points; ++g) {
            double p0 = p_max * g / (grid_points - 1);
            AllocationResult r = solve_pa(rows, p0);
            if (r.status == AllocStatus::optimal && r.p.sum() <= p_max * (1.0 + 1e-9))
                ta.grid_ps.push_back(r.p);
        }
        ta.feasible = !ta.grid_ps.empty();
    });

    std::vector<CurvePoint> points;
    for (double x : spec.values) {
        ScenarioConfig cfg = base;
        cfg.sigma_rcs_db = x;
        CurvePoint alg_pt, ub_pt;
        alg_pt.figure = ub_pt.figure = spec.figure;
        alg_pt.scheme = "algorithm1";
        ub_pt.scheme = "upper_bound";
        alg_pt.regime = ub_pt.regime = "limited";
        alg_pt.x = ub_pt.x = x;
        double sum_a = 0.0, sumsq_a = 0.0, sum_u = 0.0, sumsq_u = 0.0;
        int used = 0, infeasible = 0;
        for (int t = 0; t < spec.trials; ++t) {
            const TrialAllocs& ta = allocs[t];
            if (!ta.feasible) {
                ++infeasible;
                continue;
            }
            double pd_alg = average_local_pd(cfg, ta.ch, ta.w_tilde, ta.p_alg);
            double pd_ub = 0.0;
            for (const VecD& p : ta.grid_ps)
                pd_ub = std::max(pd_ub, average_local_pd(cfg, ta.ch, ta.w_tilde, p));
            sum_a += pd_alg;
            sumsq_a += pd_alg * pd_alg;
            sum_u += pd_ub;
            sumsq_u += pd_ub * pd_ub;
            ++used;
        }
        alg_pt.trials_used = ub_pt.trials_used = used;
        alg_pt.infeasible = ub_pt.infeasible = infeasible;
        if (used > 0) {
            alg_pt.mean = sum_a / used;
            ub_pt.mean = sum_u / used;
            if (used > 1) {
                alg_pt.stderr_ = std::sqrt(
                    std::max(0.0, (sumsq_a - used * alg_pt.mean * alg_pt.mean) / (used - 1)) / used);
                ub_pt.stderr_ = std::sqrt(
                    std::max(0.0, (sumsq_u - used * ub_pt.mean * ub_pt.mean) / (used - 1)) / used);
            }
        }
        points.push_back(alg_pt);
        points.push_back(ub_pt);
    }
    return points;
}

std::vector<CurvePoint> run_stepsize(const ExperimentSpec& spec) {
    spec.validate();
    const ScenarioConfig& base = spec.base;
    const std::vector<double>& steps = spec.values;
    struct Acc {
        double rho_db = 0.0, ms = 0.0, iters = 0.0;
        bool ok = false;
    };
    std::vector<std::vector<Acc>> cell(steps.size(), std::vector<Acc>(spec.trials));
    parallel_trials(spec.trials, spec.threads, [&](int t) {
        TrialDraw draw = draw_trial(base, spec.seed, t);
        MatC w_tilde = unit_precoders(draw.ch, base);
        auto rows = build_qos_rows(draw.ch.H, w_tilde, base.gamma_db, base.sigma_nc2_mw());
        auto rho_total = [&](const VecD& p) {
            return total_local_noncentrality(base, draw.ch, w_tilde, p);
        };
        auto stats = stepsize_tradeoff(rows, base.p_max_mw(), steps, rho_total);
        for (std::size_t s = 0; s < steps.size(); ++s) {
            if (stats[s].status != AllocStatus::optimal) continue;
            cell[s][t] = {stats[s].rho_total_db, stats[s].wall_ms,
                          static_cast<double>(stats[s].iterations), true};
        }
    });

    std::vector<CurvePoint> points;
    auto emit_curve = [&](const std::string& label, auto field) {
        for (std::size_t s = 0; s < steps.size(); ++s) {
            CurvePoint pt;
            pt.figure = spec.figure;
            pt.scheme = label;
            pt.regime = "limited";
            pt.x = steps[s];
            double sum = 0.0, sumsq = 0.0;
            int used = 0;
            for (int t = 0; t < spec.trials; ++t) {
                if (!cell[s][t].ok) {
                    ++pt.infeasible;
                    continue;
                }
                double v = field(cell[s][t]);
                sum += v;
                sumsq += v * v;
                ++used;
            }
            pt.trials_used = used;
            if (used > 0) {
                pt.mean = sum / used;
                if (used > 1)
                    pt.stderr_ =
                        std::sqrt(std::max(0.0, (sumsq - used * pt.mean * pt.mean) / (used - 1)) / used);
            }
            points.push_back(pt);
        }
    };
    emit_curve("rho_total_db", [](const Acc& a) { return a.rho_db; });
    emit_curve("runtime_ms", [](const Acc& a) { return a.ms; });
    emit_curve("iterations", [](const Acc& a) { return a.iters; });
    return points;
}

std::vector<CurvePoint> run_tradeoff(const ExperimentSpec& spec) {
    spec.validate();
    const ScenarioConfig& base = spec.base;
    const double p_max = base.p_max_mw();
    const std::vector<double>& shares = spec.values; // sensing share of the budget

    struct Acc {
        double gamma_max = 0.0, rho = 0.0;
        bool ok = false;
    };
    std::vector<std::vector<Acc>> cell(shares.size(), std::vector<Acc>(spec.trials));
    parallel_trials(spec.trials, spec.threads, [&](int t) {
        TrialDraw draw = draw_trial(base, spec.seed, t);
        MatC w_tilde = unit_precoders(draw.ch, base);
        auto rows = build_qos_rows(draw.ch.H, w_tilde, base.gamma_db, base.sigma_nc2_mw());
        auto bs = fusion_b_subset(draw.ch, Scheme::iaps_s0);
        const int K = base.K;
        for (std::size_t s = 0; s < shares.size(); ++s) {
            double p0 = shares[s] * p_max;
            double comm_budget = p_max - p0;

            // max feasible Gamma for this split by bisection (log domain)
            auto feasible_at = [&](double gamma_lin) {
                auto rows_g = rows;
                for (auto& row : rows_g) row.gamma_lin = gamma_lin;
                AllocationResult r = solve_pa(rows_g, p0);
                return r.status == AllocStatus::optimal &&
                       r.p.sum() - p0 <= comm_budget * (1.0 + 1e-9) + 1e-12;
            };
            double gamma_max = 0.0;
            if (comm_budget > 0.0 && feasible_at(1e-9)) {
                double lo = 1e-9, hi = 1e-9;
                while (feasible_at(hi) && hi < 1e12) hi *= 4.0;
                for (int it = 0; it < 100; ++it) {
                    double mid = std::sqrt(lo * hi);
                    if (feasible_at(mid))
                        lo = mid;
                    else
                        hi = mid;
                }
                gamma_max = lo;
            }

            // fusion noncentrality with the remaining budget spread uniformly
            // over the communication streams
            VecD p = VecD::Zero(K + 1);
            p(0) = p0;
            for (int k = 1; k <= K; ++k) p(k) = comm_budget / K;
            PrecoderSet ps = make_precoder_set(w_tilde, p);
            double rho = noncentrality_fusion(ps, bs, base.L, base.sigma_rcs2(), base.sigma_ns2());

            cell[s][t] = {gamma_max, rho, true};
        }
    });

    std::vector<CurvePoint> points;
    auto emit_curve = [&](const std::string& label, auto field) {
        for (std::size_t s = 0; s < shares.size(); ++s) {
            CurvePoint pt;
            pt.figure = spec.figure;
            pt.scheme = label;
            pt.regime = "unlimited";
            pt.x = shares[s];
            double sum = 0.0, sumsq = 0.0;
            int used = 0;
            for (int t = 0; t < spec.trials; ++t) {
                if (!cell[s][t].ok) {
                    ++pt.infeasible;
                    continue;
                }
                double v = field(cell[s][t]);
                sum += v;
                sumsq += v * v;
                ++used;
            }
            pt.trials_used = used;
            if (used > 0) {
                pt.mean = sum / used;
                if (used > 1)
                    pt.stderr_ =
                        std::sqrt(std::max(0.0, (sumsq - used * pt.mean * pt.mean) / (used - 1)) / used);
            }
            points.push_back(pt);
        }
    };
    emit_curve("gamma_max_linear", [](const Acc& a) { return a.gamma_max; });
    emit_curve("rho_fusion", [](const Acc& a) { return a.rho; });
    return points;
}

ExperimentSpec spec_for_figure(const std::string& figure, const ScenarioConfig& base) {
    ExperimentSpec s;
    s.figure = figure;
    s.base = base;
    s.trials = base.trials;
    s.seed = base.seed;
    auto linspace_int = [](int lo, int hi, int step) {
        std::vector<double> v;
        for (int x = lo; x <= hi; x += step) v.push_back(x);
        return v;
    };
    if (figure == "fig2") {
        s.var = SweepVar::sigma_rcs_db; // unused by the runner; p0 is the x axis
        s.values = {base.sigma_rcs_db};
        s.schemes = {Scheme::iaps_s0};
        s.regimes = {Regime::limited};
        s.trials = std::min(base.trials, 100);
    } else if (figure == "fig3") {
        s.var = SweepVar::sigma_rcs_db;
        s.values = {-22, -21, -20, -19, -18, -17, -16};
        s.schemes = {Scheme::iaps_s0};
        s.regimes = {Regime::limited};
        s.trials = std::min(base.trials, 100);
    } else if (figure == "fig4") {
        s.var = SweepVar::sigma_rcs_db; // x axis carries the step sizes
        s.values = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
        s.schemes = {Scheme::iaps_s0};
        s.regimes = {Regime::limited};
        s.trials = std::min(base.trials, 20);
    } else if (figure == "tradeoff") {
        s.var = SweepVar::sigma_rcs_db; // x axis carries the sensing share
        s.values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        s.schemes = {Scheme::iaps_s0};
        s.regimes = {Regime::unlimited};
        s.trials = std::min(base.trials, 50);
    } else if (figure == "fig6") {
        s.var = SweepVar::sigma_rcs_db;
        s.values = {-22, -21, -20, -19, -18, -17, -16};
        s.schemes = {Scheme::iaps_s0, Scheme::iaps_no_s0, Scheme::active, Scheme::passive,
                     Scheme::min_ptotal};
        s.regimes = {Regime::unlimited};
    } else if (figure == "fig7") {
        s.var = SweepVar::p_max_dbm;
        s.values = {24, 26, 28, 30, 32, 34, 36};
        s.schemes = {Scheme::iaps_s0, Scheme::iaps_no_s0, Scheme::active, Scheme::passive};
        s.regimes = {Regime::unlimited};
    } else if (figure == "fig8") {
        s.var = SweepVar::rap_count;
        s.values = linspace_int(2, 14, 2);
        s.schemes = {Scheme::iaps_s0, Scheme::iaps_no_s0, Scheme::active, Scheme::passive};
        s.regimes = {Regime::unlimited};
    } else if (figure == "fig9") {
        s.var = SweepVar::ue_count;
        s.values = linspace_int(2, 12, 2);
        s.schemes = {Scheme::iaps_s0, Scheme::iaps_no_s0, Scheme::active, Scheme::passive};
        s.regimes = {Regime::unlimited};
        s.base.p_max_dbm = 33.0;
    } else if (figure == "fig10") {
        s.var = SweepVar::sigma_rcs_db;
        s.values = {-22, -21, -20, -19, -18, -17, -16};
        s.schemes = {Scheme::iaps_s0, Scheme::active, Scheme::passive};
        s.regimes = {Regime::unlimited, Regime::limited};
    } else if (figure == "fig11") {
        s.var = SweepVar::rap_count;
        s.values = linspace_int(2, 14, 2);
        s.schemes = {Scheme::iaps_s0};
        s.regimes = {Regime::limited};
        s.curve_sigma_rcs_db = {-20, -19, -18};
    } else {
        throw std::invalid_argument("unknown figure '" + figure + "'");
    }
    return s;
}

std::vector<CurvePoint> run_figure(const ExperimentSpec& spec) {
    if (spec.figure == "fig2") return run_pd_vs_p0(spec);
    if (spec.figure == "fig3") return run_gap(spec);
    if (spec.figure == "fig4") return run_stepsize(spec);
    if (spec.figure == "tradeoff") return run_tradeoff(spec);
    return run_experiment(spec);
}

void emit_csv(const std::vector<CurvePoint>& points, std::ostream& out) {
    out << "figure,scheme,regime,x,mean,stderr,trials,infeasible_count\n";
    char buf[256];
    for (const auto& pt : points) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%.10g,%.10g,%.10g,%d,%d\n", pt.figure.c_str(),
                      pt.scheme.c_str(), pt.regime.c_str(), pt.x, pt.mean, pt.stderr_,
                      pt.trials_used, pt.infeasible);
        out << buf;
    }
}

namespace {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

std::string axis_label_x(const std::string& figure) {
    if (figure == "fig2") return "p0 [mW]";
    if (figure == "fig4") return "step size (fraction of P_max)";
    if (figure == "tradeoff") return "sensing share of the power budget";
    if (figure == "fig7") return "P_max [dBm]";
    if (figure == "fig8" || figure == "fig11") return "number of RAPs";
    if (figure == "fig9") return "number of UEs";
    return "sigma_rcs^2 [dB]";
}

std::string axis_label_y(const std::string& figure) {
    if (figure == "fig2") return "average P_D (per node)";
    if (figure == "fig4") return "value";
    if (figure == "tradeoff") return "value";
    return "average detection probability";
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_svg_curves(const std::string& figure, const std::vector<PlotSeries>& series,
                      std::ostream& out) {
    const double W = 800, H = 560, ml = 70, mr = 180, mt = 30, mb = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) {
        xmax += 0.5;
        xmin -= 0.5;
    }
    if (ymax == ymin) {
        ymax += 0.5;
        ymin -= 0.5;
    }
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (W - ml - mr) << "\" height=\""
        << (H - mt - mb) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        double xv = xmin + (xmax - xmin) * i / 5.0;
        double yv = ymin + (ymax - ymin) * i / 5.0;
        out << "<line x1=\"" << fmt(sx(xv)) << "\" y1=\"" << (H - mb) << "\" x2=\"" << fmt(sx(xv))
            << "\" y2=\"" << (H - mb + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << (H - mb + 20)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        out << "<line x1=\"" << (ml - 5) << "\" y1=\"" << fmt(sy(yv)) << "\" x2=\"" << ml
            << "\" y2=\"" << fmt(sy(yv)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << (ml - 8) << "\" y=\"" << fmt(sy(yv) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
    }
    out << "<text x=\"" << (ml + (W - ml - mr) / 2) << "\" y=\"" << (H - 15)
        << "\" font-size=\"14\" text-anchor=\"middle\">" << axis_label_x(figure) << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + (H - mt - mb) / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (mt + (H - mt - mb) / 2) << ")\">" << axis_label_y(figure) << "</text>\n";
    out << "<text x=\"" << (ml + (W - ml - mr) / 2) << "\" y=\"20\" font-size=\"15\" "
        << "text-anchor=\"middle\">" << figure << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
        if (series[s].x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < series[s].x.size(); ++i)
                out << fmt(sx(series[s].x[i])) << "," << fmt(sy(series[s].y[i])) << " ";
            out << "\"/>\n";
        }
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            out << "<circle cx=\"" << fmt(sx(series[s].x[i])) << "\" cy=\"" << fmt(sy(series[s].y[i]))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        double ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << (W - mr + 10) << "\" y1=\"" << ly << "\" x2=\"" << (W - mr + 34)
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << (W - mr + 40) << "\" y=\"" << (ly + 4) << "\" font-size=\"12\">"
            << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_svg_scatter(const std::vector<std::array<std::string, 2>>& kinds,
                       const std::vector<std::array<double, 2>>& pos, std::ostream& out) {
    const double W = 640, H = 640, m = 60;
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pos) {
        lo = std::min({lo, p[0], p[1]});
        hi = std::max({hi, p[0], p[1]});
    }
    if (lo > hi) {
        lo = 0;
        hi = 1;
    }
    auto sc = [&](double v) { return m + (v - lo) / (hi - lo) * (W - 2 * m); };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << (W - 2 * m) << "\" height=\""
        << (H - 2 * m) << "\" fill=\"none\" stroke=\"black\"/>\n";
    std::map<std::string, const char*> color{{"bs", "#d62728"}, {"target", "#000000"},
                                             {"rap", "#1f77b4"}, {"ue", "#2ca02c"}};
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const std::string& kind = kinds[i][0];
        double cx = sc(pos[i][0]);
        double cy = H - sc(pos[i][1]);
        if (kind == "target")
            out << "<rect x=\"" << fmt(cx - 5) << "\" y=\"" << fmt(cy - 5)
                << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n";
        else
            out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"5\" fill=\""
                << color[kind] << "\"/>\n";
    }
    double ly = m + 10;
    for (const auto& [kind, col] : color) {
        out << "<circle cx=\"" << (W - m - 110) << "\" cy=\"" << ly << "\" r=\"5\" fill=\"" << col
            << "\"/>\n";
        out << "<text x=\"" << (W - m - 98) << "\" y=\"" << (ly + 4) << "\" font-size=\"13\">" << kind
            << "</text>\n";
        ly += 20;
    }
    out << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 20)
        << "\" font-size=\"14\" text-anchor=\"middle\">x [m]</text>\n";
    out << "</svg>\n";
}

} // namespace

void emit_plot(const std::string& csv_path, const std::string& out_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("emit_plot: cannot open " + csv_path);
    std::string header;
    std::getline(in, header);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot: cannot write " + out_path);

    if (header == "kind,index,x_m,y_m,azimuth_to_target_rad") {
        std::vector<std::array<std::string, 2>> kinds;
        std::vector<std::array<double, 2>> pos;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string kind, idx, xs, ys;
            std::getline(ss, kind, ',');
            std::getline(ss, idx, ',');
            std::getline(ss, xs, ',');
            std::getline(ss, ys, ',');
            kinds.push_back({kind, idx});
            pos.push_back({std::stod(xs), std::stod(ys)});
        }
        write_svg_scatter(kinds, pos, out);
        return;
    }

    in.clear();
    in.seekg(0);
    auto points = parse_csv(in);
    if (points.empty()) throw std::runtime_error("emit_plot: no data rows");
    std::vector<PlotSeries> series;
    for (const auto& pt : points) {
        std::string label = pt.scheme + (pt.regime.empty() ? "" : " (" + pt.regime + ")");
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const PlotSeries& s) { return s.label == label; });
        if (it == series.end()) {
            series.push_back({label, {}, {}});
            it = series.end() - 1;
        }
        if (pt.trials_used > 0) {
            it->x.push_back(pt.x);
            it->y.push_back(pt.mean);
        }
    }
    write_svg_curves(points.front().figure, series, out);
}

std::vector<CurvePoint> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty file");
    if (line != "figure,scheme,regime,x,mean,stderr,trials,infeasible_count")
        throw std::runtime_error("parse_csv: unexpected header");
    std::vector<CurvePoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        CurvePoint pt;
        std::getline(ss, pt.figure, ',');
        std::getline(ss, pt.scheme, ',');
        std::getline(ss, pt.regime, ',');
        auto next_double = [&](double& dst) {
            std::getline(ss, field, ',');
            dst = std::stod(field);
        };
        next_double(pt.x);
        next_double(pt.mean);
        next_double(pt.stderr_);
        std::getline(ss, field, ',');
        pt.trials_used = std::stoi(field);
        std::getline(ss, field, ',');
        pt.infeasible = std::stoi(field);
        points.push_back(pt);
    }
    return points;
}

} // namespace iaps
