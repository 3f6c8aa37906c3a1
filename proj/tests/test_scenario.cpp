#include "iaps/scenario.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace iaps;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("steering vector") {
    SUBCASE("angle 0 is all ones") {
        VecC v = steering(0.0, 6, 0.5);
        for (int i = 0; i < 6; ++i) CHECK(std::abs(v(i) - Complex(1.0, 0.0)) < 1e-15);
    }
    SUBCASE("single antenna is the scalar 1") {
        VecC v = steering(1.234, 1, 0.5);
        CHECK(v.size() == 1);
        CHECK(std::abs(v(0) - Complex(1.0, 0.0)) < 1e-15);
    }
    SUBCASE("angle pi/6, delta 0.5: second entry is j") {
        // exponent 2*pi*1*0.5*sin(pi/6) = pi/2
        VecC v = steering(M_PI / 6.0, 2, 0.5);
        CHECK(std::abs(v(1) - Complex(0.0, 1.0)) < 1e-14);
    }
    SUBCASE("unit modulus entries, first entry 1, norm^2 = n") {
        for (double ang : {-2.1, -0.4, 0.9, 3.0}) {
            VecC v = steering(ang, 9, 0.5);
            CHECK(std::abs(v(0) - Complex(1.0, 0.0)) < 1e-15);
            for (int i = 0; i < 9; ++i) CHECK(std::abs(std::abs(v(i)) - 1.0) < 1e-14);
            CHECK(v.squaredNorm() == doctest::Approx(9.0).epsilon(1e-13));
        }
    }
    SUBCASE("n < 1 rejected") { CHECK_THROWS(steering(0.0, 0, 0.5)); }
}

TEST_CASE("path loss") {
    CHECK(path_loss_db(1.0) == doctest::Approx(128.1).epsilon(1e-13));
    CHECK(path_loss_db(0.1) == doctest::Approx(90.5).epsilon(1e-13));
    CHECK(path_loss_db(0.01) == doctest::Approx(52.9).epsilon(1e-13));
    CHECK_THROWS_AS(path_loss_db(0.0), std::domain_error);
    CHECK_THROWS_AS(path_loss_db(-1.0), std::domain_error);
}

TEST_CASE("config validation") {
    ScenarioConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("K > M rejected") {
        cfg.K = cfg.M + 1;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("M >= N0 rejected") {
        cfg.M = cfg.N0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("pfa bounds") {
        cfg.pfa = 0.0;
        CHECK_THROWS(cfg.validate());
        cfg.pfa = 1.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("delta_p_frac bounds") {
        cfg.delta_p_frac = 0.0;
        CHECK_THROWS(cfg.validate());
    }
    SUBCASE("trials >= 1") {
        cfg.trials = 0;
        CHECK_THROWS(cfg.validate());
    }
}

TEST_CASE("config JSON round trip and unknown-key rejection") {
    ScenarioConfig cfg;
    cfg.K = 4;
    cfg.sigma_rcs_db = -17.5;
    cfg.seed = 99;
    ScenarioConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.K == 4);
    CHECK(back.sigma_rcs_db == -17.5);
    CHECK(back.seed == 99);

    CHECK_THROWS_AS(config_from_json("{\"unknown_field\": 1}"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json("[1,2]"), std::invalid_argument);
    // invariant violations surface as config errors too
    CHECK_THROWS_AS(config_from_json("{\"K\": 40}"), std::invalid_argument);
}

TEST_CASE("config overrides") {
    ScenarioConfig cfg;
    apply_override(cfg, "gamma_db", "12");
    CHECK(cfg.gamma_db == 12.0);
    apply_override(cfg, "trials", "55");
    CHECK(cfg.trials == 55);
    CHECK_THROWS_AS(apply_override(cfg, "nope", "1"), std::invalid_argument);
}

TEST_CASE("layout geometry") {
    ScenarioConfig cfg;
    RngStream rng(42);
    Layout lay = generate_layout(cfg, rng);

    SUBCASE("target at the region center for any seed") {
        for (std::uint64_t seed : {1ull, 7ull, 123456789ull}) {
            RngStream r(seed);
            Layout l = generate_layout(cfg, r);
            CHECK(l.target_pos.x() == 250.0);
            CHECK(l.target_pos.y() == 250.0);
        }
    }
    SUBCASE("positions inside the region, angles in (-pi, pi]") {
        auto inside = [&](const Vec2& p) {
            return p.x() >= 0 && p.x() <= cfg.region_m && p.y() >= 0 && p.y() <= cfg.region_m;
        };
        CHECK(inside(lay.bs_pos));
        for (const auto& p : lay.rap_pos) CHECK(inside(p));
        for (const auto& p : lay.ue_pos) CHECK(inside(p));
        CHECK(lay.theta > -M_PI);
        CHECK(lay.theta <= M_PI);
        for (double a : lay.phi) {
            CHECK(a > -M_PI);
            CHECK(a <= M_PI);
        }
    }
    SUBCASE("tan(theta) = dy/dx of BS->target") {
        double dx = lay.target_pos.x() - lay.bs_pos.x();
        double dy = lay.target_pos.y() - lay.bs_pos.y();
        CHECK(std::tan(lay.theta) == doctest::Approx(dy / dx).epsilon(1e-10));
    }
    SUBCASE("equal-coordinate geometry gives pi/4") {
        // BS at (0,0), target at center (250,250)
        Layout l;
        l.bs_pos = Vec2(0.0, 0.0);
        l.target_pos = Vec2(250.0, 250.0);
        CHECK(std::atan2(250.0, 250.0) == doctest::Approx(M_PI / 4.0).epsilon(1e-14));
    }
    SUBCASE("same seed reproduces the layout") {
        RngStream r1(7), r2(7);
        Layout a = generate_layout(cfg, r1), b = generate_layout(cfg, r2);
        CHECK(a.bs_pos == b.bs_pos);
        CHECK(a.theta == b.theta);
        for (int r = 0; r < cfg.R; ++r) CHECK(a.rap_pos[r] == b.rap_pos[r]);
    }
}

TEST_CASE("channel draws") {
    ScenarioConfig cfg;
    cfg.K = 4;
    cfg.R = 3;
    RngStream rng(3);
    Layout lay = generate_layout(cfg, rng);

    SUBCASE("same seed gives bit-identical channels") {
        RngStream a(5), b(5);
        ChannelSet ca = draw_channels(lay, cfg, a);
        ChannelSet cb = draw_channels(lay, cfg, b);
        CHECK(ca.H == cb.H);
        for (int r = 0; r < cfg.R; ++r) CHECK(ca.G[r] == cb.G[r]);
    }
    SUBCASE("per-entry fading variance is 1 and the gain matches the path loss") {
        // accumulate over many draws of h_k / sqrt(m_k)
        const int draws = 10000;
        double sum_sq = 0.0;
        double gain = db_to_linear(-path_loss_db(lay.d_bs_ue[0]));
        RngStream r(17);
        for (int d = 0; d < draws; ++d) {
            ChannelSet ch = draw_channels(lay, cfg, r);
            sum_sq += ch.H.col(0).squaredNorm() / gain;
        }
        double per_entry = sum_sq / (draws * cfg.M);
        CHECK(per_entry == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("steering vectors came from the layout angles") {
        ChannelSet ch = draw_channels(lay, cfg, rng);
        CHECK(ch.a_theta == steering(lay.theta, cfg.M, cfg.delta));
        CHECK(ch.b0_theta == steering(lay.theta, cfg.N0, cfg.delta));
        CHECK(ch.b1_phi[2] == steering(lay.phi[2], cfg.N1, cfg.delta));
    }
    SUBCASE("dimension mismatch rejected") {
        ScenarioConfig other = cfg;
        other.K = cfg.K + 1;
        CHECK_THROWS(draw_channels(lay, other, rng));
    }
}

TEST_CASE("rcs draws") {
    ScenarioConfig cfg;
    SUBCASE("sample variance at -19 dB") {
        cfg.sigma_rcs_db = -19.0;
        RngStream rng(29);
        double acc = 0.0;
        const int draws = 100000 / (cfg.R + 1);
        for (int d = 0; d < draws; ++d) acc += draw_rcs(cfg, rng).squaredNorm();
        double var = acc / (draws * (cfg.R + 1));
        CHECK(var == doctest::Approx(0.012589254117941675).epsilon(0.02));
    }
    SUBCASE("degenerate variance gives the zero vector") {
        cfg.sigma_rcs_db = -std::numeric_limits<double>::infinity();
        RngStream rng(1);
        // -inf dB is linear 0
        CHECK(db_to_linear(cfg.sigma_rcs_db) == 0.0);
        VecC alpha = RngStream(1).cgaussian_vector(cfg.R + 1, 0.0);
        CHECK(alpha.norm() == 0.0);
    }
    SUBCASE("entries mutually uncorrelated") {
        cfg.sigma_rcs_db = 0.0;
        RngStream rng(31);
        const int draws = 20000;
        Complex cross = 0.0;
        for (int d = 0; d < draws; ++d) {
            VecC a = draw_rcs(cfg, rng);
            cross += a(0) * std::conj(a(1));
        }
        cross /= static_cast<double>(draws);
        // 3 sigma of the sample cross-correlation of unit-variance entries
        CHECK(std::abs(cross) < 3.0 / std::sqrt(static_cast<double>(draws)));
    }
}

TEST_CASE("csv exports") {
    ScenarioConfig cfg;
    cfg.K = 2;
    cfg.R = 1;
    RngStream rng(10);
    Layout lay = generate_layout(cfg, rng);
    ChannelSet ch = draw_channels(lay, cfg, rng);
    std::ostringstream lcsv, ccsv;
    layout_to_csv(lay, lcsv);
    channels_to_csv(ch, ccsv);
    CHECK(lcsv.str().substr(0, 41) == "kind,index,x_m,y_m,azimuth_to_target_rad\n");
    // 1 header + bs + target + R raps + K ues
    int lines = 0;
    for (char c : lcsv.str()) lines += c == '\n';
    CHECK(lines == 1 + 2 + cfg.R + cfg.K);
    CHECK(ccsv.str().substr(0, 25) == "name,outer,row,col,re,im\n");
}

TEST_SUITE_END();
