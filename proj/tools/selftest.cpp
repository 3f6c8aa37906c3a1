#include "iaps/chi2.hpp"
#include "iaps/cli.hpp"
#include "iaps/detect_fusion.hpp"
#include "iaps/detect_local.hpp"
#include "iaps/experiments.hpp"
#include "iaps/oracles.hpp"
#include "iaps/power_alloc.hpp"
#include "iaps/precoding.hpp"
#include "iaps/scenario.hpp"
#include "iaps/voting.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace iaps {

namespace {

struct SelftestContext {
    std::ostream& out;
    int failures = 0;
    void check(const std::string& name, bool ok) {
        out << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        failures += !ok;
    }
};

ScenarioConfig small_config() {
    ScenarioConfig cfg;
    cfg.M = 8;
    cfg.N0 = 10;
    cfg.N1 = 10;
    cfg.K = 3;
    cfg.R = 3;
    cfg.L = 12;
    cfg.trials = 20;
    return cfg;
}

void chi2_checks(SelftestContext& t) {
    t.check("chi2: threshold_from_pfa(1e-5) closed form",
            std::abs(threshold_from_pfa(1e-5) - 23.025850929940457) < 1e-10);
    t.check("chi2: rho=0 reduces to the central tail",
            std::abs(noncentral_chi2_sf_2dof(9.0, 0.0) - std::exp(-4.5)) < 1e-14);
    t.check("chi2: xi=0 has unit mass", noncentral_chi2_sf_2dof(0.0, 17.0) == 1.0);
    bool inverse_ok = true;
    for (double q : {1e-12, 1e-8, 1e-5, 1e-2, 0.3, 0.9})
        inverse_ok &= std::abs(central_chi2_cdf_2dof(threshold_from_pfa(q)) - (1.0 - q)) < 1e-14;
    t.check("chi2: threshold/CDF inverse identity", inverse_ok);

    double worst = 0.0;
    for (double xi : {0.5, 5.0, 15.0, 30.0, 50.0})
        for (double rho : {0.0, 1.0, 10.0, 25.0, 50.0})
            worst = std::max(worst, std::abs(noncentral_chi2_sf_2dof(xi, rho) -
                                             oracle::noncentral_chi2_sf_quadrature(xi, rho)));
    t.check("chi2: series matches quadrature oracle (coarse grid, 1e-9)", worst < 1e-9);

    double xi = threshold_from_pfa(1e-2);
    double swerling = std::exp(-xi / (2.0 + 20.0));
    t.check("chi2: Swerling-I mixture closed form vs quadrature",
            std::abs(oracle::swerling1_pd_quadrature(xi, 20.0) - swerling) < 1e-8);
}

void scenario_checks(SelftestContext& t) {
    VecC v = steering(M_PI / 6.0, 4, 0.5);
    t.check("scenario: steering norm^2 = n", std::abs(v.squaredNorm() - 4.0) < 1e-12);
    t.check("scenario: steering entry phase",
            std::abs(v(1) - std::polar(1.0, M_PI * std::sin(M_PI / 6.0))) < 1e-12);
    t.check("scenario: path loss anchor at 1 km", std::abs(path_loss_db(1.0) - 128.1) < 1e-12);
    ScenarioConfig cfg = small_config();
    RngStream r1(7), r2(7);
    Layout a = generate_layout(cfg, r1), b = generate_layout(cfg, r2);
    t.check("scenario: layout deterministic in the seed",
            (a.bs_pos - b.bs_pos).norm() == 0.0 && a.theta == b.theta);
    t.check("scenario: target at region center",
            a.target_pos.x() == 250.0 && a.target_pos.y() == 250.0);
}

void precoding_checks(SelftestContext& t) {
    RngStream rng(11);
    MatC H = rng.cgaussian_matrix(8, 3);
    MatC w = rzf(H, 1.0);
    MatC gram = H * H.adjoint() + MatC::Identity(8, 8);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        VecC oracle_col = Eigen::FullPivLU<MatC>(gram).solve(MatC(H.col(k)));
        oracle_col /= oracle_col.norm();
        // phase-invariant comparison (the library applies a phase convention)
        worst = std::max(worst, 1.0 - std::abs(w.col(k).dot(oracle_col)));
    }
    t.check("precoding: rzf matches dense-solve oracle", worst < 1e-10);

    VecC a = steering(0.3, 8, 0.5);
    VecC w0 = zfr(H, a);
    double leak = (H.adjoint() * w0).cwiseAbs().maxCoeff();
    t.check("precoding: zfr projection nulls every UE", leak < 1e-10);

    VecD p = VecD::Constant(4, 2.0);
    PrecoderSet ps = make_precoder_set((MatC(8, 4) << w0, w).finished(), p);
    t.check("precoding: trace(W_hat) = sum p",
            std::abs(ps.W_hat.trace().real() - p.sum()) < 1e-9 * p.sum());
    double s = sinr(H, ps, 1, 0.1);
    VecC h = H.col(0);
    double direct = ps.p(1) * std::norm(h.dot(ps.w_tilde.col(1))) /
                    (ps.p(0) * std::norm(h.dot(ps.w_tilde.col(0))) +
                     ps.p(2) * std::norm(h.dot(ps.w_tilde.col(2))) +
                     ps.p(3) * std::norm(h.dot(ps.w_tilde.col(3))) + 0.1);
    t.check("precoding: sinr equals the direct formula", std::abs(s - direct) < 1e-12 * direct);
}

void voting_checks(SelftestContext& t) {
    t.check("voting: worked error value 0.028",
            std::abs(error_prob(2, 0.9, 0.1, 2) - 0.028) < 1e-15);
    double worst = 0.0;
    for (int kappa = 1; kappa <= 5; ++kappa)
        for (double pd : {0.3, 0.6, 0.9})
            worst = std::max(worst, std::abs(error_prob(kappa, pd, 0.05, 4) -
                                             oracle::vote_error_enumeration(kappa, pd, 0.05, 4)));
    t.check("voting: formula matches exhaustive enumeration (R+1=5)", worst < 1e-12);

    bool argmin_ok = true;
    for (double pd : {0.2, 0.5, 0.8, 0.95}) {
        int best = 1;
        for (int kappa = 2; kappa <= 11; ++kappa)
            if (error_prob(kappa, pd, 1e-5, 10) < error_prob(best, pd, 1e-5, 10)) best = kappa;
        argmin_ok &= optimal_kappa(pd, 1e-5, 10) == best;
    }
    t.check("voting: optimal kappa equals argmin by enumeration", argmin_ok);

    bool lemma1 = true;
    double prev = 1e300;
    for (int i = 1; i <= 60; ++i) {
        double pd = 0.05 + 0.9 * i / 60.0;
        double b = beta(pd, 0.01);
        lemma1 &= b < prev;
        prev = b;
    }
    t.check("voting: beta strictly decreasing (Lemma 1 grid)", lemma1);
}

void lp_checks(SelftestContext& t) {
    ScenarioConfig cfg = small_config();
    RngStream root(23);
    bool ok_gap = true, ok_replay = true, ok_oracle = true, ok_alg = true;
    for (int d = 0; d < 25; ++d) {
        RngStream rng = root.substream(d);
        Layout lay = generate_layout(cfg, rng);
        ChannelSet ch = draw_channels(lay, cfg, rng);
        MatC w = unit_precoders(ch, cfg);
        auto rows = build_qos_rows(ch.H, w, cfg.gamma_db, cfg.sigma_nc2_mw());
        VecD c(cfg.K + 1);
        for (int j = 0; j <= cfg.K; ++j) c(j) = std::norm(ch.a_theta.dot(w.col(j)));
        AllocationResult r = solve_p2(rows, c, cfg.p_max_mw());
        if (r.status != AllocStatus::optimal) continue;
        ok_gap &= r.gap <= 1e-6;
        PrecoderSet ps = make_precoder_set(w, r.p);
        for (int k = 1; k <= cfg.K; ++k)
            ok_replay &= sinr(ch.H, ps, k, cfg.sigma_nc2_mw()) >= cfg.gamma_linear() * (1.0 - 1e-6);

        if (d < 5) {
            MatD A(rows.size(), cfg.K + 1);
            VecD b(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (int j = 0; j <= cfg.K; ++j)
                    A(i, j) = (j == rows[i].k) ? -rows[i].rho_sq(j) / rows[i].gamma_lin
                                               : rows[i].rho_sq(j);
                b(i) = -rows[i].sigma_nc2;
            }
            auto vx = oracle::lp_vertex_maximize(c, A, b, cfg.p_max_mw());
            ok_oracle &= vx.feasible &&
                         std::abs(vx.objective - r.objective) <= 1e-6 * std::max(1.0, vx.objective);
        }

        AllocationResult alg = algorithm1(rows, cfg.p_max_mw(), cfg.delta_p_frac);
        if (alg.status == AllocStatus::optimal) {
            ok_alg &= alg.p.sum() <= cfg.p_max_mw() * (1.0 + 1e-9);
            PrecoderSet ps2 = make_precoder_set(w, alg.p);
            for (int k = 1; k <= cfg.K; ++k)
                ok_alg &= sinr(ch.H, ps2, k, cfg.sigma_nc2_mw()) >= cfg.gamma_linear() * (1.0 - 1e-6);
        }
    }
    t.check("optimize: duality gap <= 1e-6 on random instances", ok_gap);
    t.check("optimize: allocations replay-feasible under the SINR formula", ok_replay);
    t.check("optimize: P2 matches the vertex-enumeration oracle", ok_oracle);
    t.check("optimize: algorithm-1 output within budget and QoS-feasible", ok_alg);
}

void detection_checks(SelftestContext& t) {
    ScenarioConfig cfg = small_config();
    RngStream rng(31);
    Layout lay = generate_layout(cfg, rng);
    ChannelSet ch = draw_channels(lay, cfg, rng);
    StackedModel model = build_stacked_model(ch);
    MatC w = unit_precoders(ch, cfg);
    VecD p = VecD::Constant(cfg.K + 1, cfg.p_max_mw() / (cfg.K + 1));
    PrecoderSet ps = make_precoder_set(w, p);

    MatC S = make_symbols(cfg.K + 1, cfg.L, rng);
    MatC X = ps.W * S;
    auto signal = response_signals(model, X);
    VecC alpha = rng.cgaussian_vector(cfg.R + 1, cfg.sigma_rcs2());

    Observations noise_free;
    for (std::size_t r = 0; r < signal.size(); ++r)
        noise_free.z.push_back(alpha(static_cast<Eigen::Index>(r)) * signal[r]);
    VecC alpha_hat = estimate_alpha(noise_free, signal);
    t.check("fusion: noise-free least squares recovers alpha", (alpha_hat - alpha).norm() < 1e-10);

    double sigma2 = cfg.sigma_ns2();
    double expected = 0.0;
    for (std::size_t r = 0; r < signal.size(); ++r)
        expected += std::norm(alpha(static_cast<Eigen::Index>(r))) * signal[r].squaredNorm();
    expected *= 2.0 / sigma2;
    double stat = glrt_statistic(noise_free, signal, sigma2);
    t.check("fusion: noise-free statistic equals the plug-in identity",
            std::abs(stat - expected) < 1e-10 * expected);

    int n_trials = 4000;
    double mean = 0.0;
    for (int i = 0; i < n_trials; ++i) {
        RngStream tr = RngStream(77).substream(i);
        Observations obs = simulate_observation(signal, std::nullopt, nullptr, X, sigma2, tr);
        mean += glrt_statistic(obs, signal, sigma2);
    }
    mean /= n_trials;
    double dof = 2.0 * (cfg.R + 1);
    double se = std::sqrt(2.0 * dof / n_trials);
    t.check("fusion: H0 statistic mean = 2(R+1) within 4 sigma", std::abs(mean - dof) < 4.0 * se);

    MatC z_tilde = matched_filter(noise_free.z[1], S);
    LocalDetector det(1, interference_cov(&ch.G[0], ps.W_hat, sigma2, cfg.N1), cfg.pfa);
    Complex a1 = mle_alpha_local(z_tilde, model.B[1], ps, det, cfg.L);
    t.check("local: noise-free matched filter recovers alpha",
            std::abs(a1 - alpha(1)) < 1e-8 * std::abs(alpha(1)));
    MatC u = det.whitener();
    t.check("local: whitener satisfies U^H Q U = I",
            (u.adjoint() * det.q_tilde() * u - MatC::Identity(cfg.N1, cfg.N1)).norm() < 1e-10);
}

void experiments_checks(SelftestContext& t) {
    ScenarioConfig cfg = small_config();
    cfg.trials = 6;
    ExperimentSpec spec = spec_for_figure("fig6", cfg);
    spec.values = {-20, -18, -16};
    spec.trials = 6;
    std::ostringstream a, b;
    emit_csv(run_figure(spec), a);
    emit_csv(run_figure(spec), b);
    t.check("experiments: identical spec + seed give identical CSV bytes", a.str() == b.str());
    std::istringstream in(a.str());
    auto parsed = parse_csv(in);
    std::ostringstream c;
    emit_csv(parsed, c);
    t.check("experiments: CSV round-trips", c.str() == a.str());
}

} // namespace

int run_selftest(std::ostream& out) {
    SelftestContext t{out};
    chi2_checks(t);
    scenario_checks(t);
    precoding_checks(t);
    voting_checks(t);
    lp_checks(t);
    detection_checks(t);
    experiments_checks(t);
    out << (t.failures == 0 ? "selftest: all checks passed\n"
                            : "selftest: " + std::to_string(t.failures) + " checks FAILED\n");
    return t.failures;
}

} // namespace iaps
