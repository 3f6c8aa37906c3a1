#include "iaps/scenario.hpp"

#include "json.hpp" // vendored nlohmann/json

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace iaps {

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (M < 1 || N0 < 1 || N1 < 1 || K < 1 || R < 0 || L < 1) fail("antenna/node counts must be positive");
    if (K > M) fail("K <= M is required");
    if (M >= N0) fail("M < N0 is required");
    if (!(region_m > 0.0)) fail("region_m must be positive");
    if (!(delta > 0.0)) fail("delta must be positive");
    if (!(pfa > 0.0 && pfa < 1.0)) fail("pfa must lie in (0,1)");
    if (!(delta_p_frac > 0.0 && delta_p_frac < 1.0)) fail("delta_p_frac must lie in (0,1)");
    if (trials < 1) fail("trials must be >= 1");
    for (double v : {p_max_dbm, gamma_db, sigma_rcs_db, sigma_nc_dbm, sigma_ns_db})
        if (!std::isfinite(v)) fail("power/variance fields must be finite");
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& dst) {
    if (j.contains(name)) dst = j.at(name).get<T>();
}

const char* known_keys[] = {"M", "N0", "N1", "K", "R", "L", "region_m", "delta",
                            "p_max_dbm", "gamma_db", "pfa", "sigma_rcs_db", "sigma_nc_dbm",
                            "sigma_ns_db", "delta_p_frac", "trials", "seed"};

} // namespace

ScenarioConfig config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top-level JSON object expected");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : known_keys) known |= (key == k);
        if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    ScenarioConfig cfg;
    read_field(j, "M", cfg.M);
    read_field(j, "N0", cfg.N0);
    read_field(j, "N1", cfg.N1);
    read_field(j, "K", cfg.K);
    read_field(j, "R", cfg.R);
    read_field(j, "L", cfg.L);
    read_field(j, "region_m", cfg.region_m);
    read_field(j, "delta", cfg.delta);
    read_field(j, "p_max_dbm", cfg.p_max_dbm);
    read_field(j, "gamma_db", cfg.gamma_db);
    read_field(j, "pfa", cfg.pfa);
    read_field(j, "sigma_rcs_db", cfg.sigma_rcs_db);
    read_field(j, "sigma_nc_dbm", cfg.sigma_nc_dbm);
    read_field(j, "sigma_ns_db", cfg.sigma_ns_db);
    read_field(j, "delta_p_frac", cfg.delta_p_frac);
    read_field(j, "trials", cfg.trials);
    read_field(j, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

std::string config_to_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["M"] = c.M;
    j["N0"] = c.N0;
    j["N1"] = c.N1;
    j["K"] = c.K;
    j["R"] = c.R;
    j["L"] = c.L;
    j["region_m"] = c.region_m;
    j["delta"] = c.delta;
    j["p_max_dbm"] = c.p_max_dbm;
    j["gamma_db"] = c.gamma_db;
    j["pfa"] = c.pfa;
    j["sigma_rcs_db"] = c.sigma_rcs_db;
    j["sigma_nc_dbm"] = c.sigma_nc_dbm;
    j["sigma_ns_db"] = c.sigma_ns_db;
    j["delta_p_frac"] = c.delta_p_frac;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    return j.dump(2);
}

void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    nlohmann::json j = nlohmann::json::object();
    // route through the JSON reader so key validation and typing stay in one place
    try {
        j[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        throw std::invalid_argument("config: cannot parse value for '" + key + "'");
    }
    nlohmann::json full = nlohmann::json::parse(config_to_json(cfg));
    if (!full.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    full[key] = j[key];
    cfg = config_from_json(full.dump());
}

VecC steering(double angle, int n, double delta) {
    if (n < 1) throw std::invalid_argument("steering: n must be >= 1");
    VecC v(n);
    const double phase_step = 2.0 * M_PI * delta * std::sin(angle);
    for (int m = 0; m < n; ++m) v(m) = std::polar(1.0, phase_step * m);
    return v;
}

double path_loss_db(double d_km) {
    if (!(d_km > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
    return 128.1 + 37.6 * std::log10(d_km);
}

namespace {

double azimuth(const Vec2& from, const Vec2& to) {
    return std::atan2(to.y() - from.y(), to.x() - from.x());
}

double distance_km(const Vec2& a, const Vec2& b) { return (a - b).norm() / 1000.0; }

} // namespace

Layout generate_layout(const ScenarioConfig& cfg, RngStream& rng) {
    cfg.validate();
    Layout lay;
    auto draw_pos = [&]() { return Vec2(rng.uniform(0.0, cfg.region_m), rng.uniform(0.0, cfg.region_m)); };
    lay.bs_pos = draw_pos();
    lay.target_pos = Vec2(cfg.region_m / 2.0, cfg.region_m / 2.0);
    lay.rap_pos.resize(cfg.R);
    lay.ue_pos.resize(cfg.K);
    for (auto& p : lay.rap_pos) p = draw_pos();
    for (auto& p : lay.ue_pos) p = draw_pos();

    lay.theta = azimuth(lay.bs_pos, lay.target_pos);
    lay.phi.resize(cfg.R);
    lay.d_bs_rap.resize(cfg.R);
    for (int r = 0; r < cfg.R; ++r) {
        lay.phi[r] = azimuth(lay.rap_pos[r], lay.target_pos);
        lay.d_bs_rap[r] = distance_km(lay.bs_pos, lay.rap_pos[r]);
    }
    lay.d_bs_ue.resize(cfg.K);
    for (int k = 0; k < cfg.K; ++k) lay.d_bs_ue[k] = distance_km(lay.bs_pos, lay.ue_pos[k]);
    return lay;
}

ChannelSet draw_channels(const Layout& lay, const ScenarioConfig& cfg, RngStream& rng) {
    if (static_cast<int>(lay.ue_pos.size()) != cfg.K || static_cast<int>(lay.rap_pos.size()) != cfg.R)
        throw std::invalid_argument("draw_channels: layout inconsistent with config dimensions");
    ChannelSet ch;
    ch.H.resize(cfg.M, cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
        double gain = db_to_linear(-path_loss_db(lay.d_bs_ue[k]));
        ch.H.col(k) = std::sqrt(gain) * rng.cgaussian_vector(cfg.M);
    }
    ch.G.resize(cfg.R);
    for (int r = 0; r < cfg.R; ++r) {
        double gain = db_to_linear(-path_loss_db(lay.d_bs_rap[r]));
        ch.G[r] = std::sqrt(gain) * rng.cgaussian_matrix(cfg.N1, cfg.M);
    }
    ch.a_theta = steering(lay.theta, cfg.M, cfg.delta);
    ch.b0_theta = steering(lay.theta, cfg.N0, cfg.delta);
    ch.b1_phi.resize(cfg.R);
    for (int r = 0; r < cfg.R; ++r) ch.b1_phi[r] = steering(lay.phi[r], cfg.N1, cfg.delta);
    return ch;
}

VecC draw_rcs(const ScenarioConfig& cfg, RngStream& rng) {
    return rng.cgaussian_vector(cfg.R + 1, cfg.sigma_rcs2());
}

void layout_to_csv(const Layout& lay, std::ostream& out) {
    out << "kind,index,x_m,y_m,azimuth_to_target_rad\n";
    char buf[160];
    auto row = [&](const char* kind, int idx, const Vec2& p, double az, bool has_az) {
        if (has_az)
            std::snprintf(buf, sizeof buf, "%s,%d,%.10g,%.10g,%.10g\n", kind, idx, p.x(), p.y(), az);
        else
            std::snprintf(buf, sizeof buf, "%s,%d,%.10g,%.10g,\n", kind, idx, p.x(), p.y());
        out << buf;
    };
    row("bs", 0, lay.bs_pos, lay.theta, true);
    row("target", 0, lay.target_pos, 0.0, false);
    for (std::size_t r = 0; r < lay.rap_pos.size(); ++r) row("rap", static_cast<int>(r), lay.rap_pos[r], lay.phi[r], true);
    for (std::size_t k = 0; k < lay.ue_pos.size(); ++k) row("ue", static_cast<int>(k), lay.ue_pos[k], 0.0, false);
}

namespace {

void matrix_rows(const char* name, int outer, const MatC& m, std::ostream& out) {
    char buf[200];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%s,%d,%ld,%ld,%.17g,%.17g\n", name, outer,
                          static_cast<long>(i), static_cast<long>(j), m(i, j).real(), m(i, j).imag());
            out << buf;
        }
}

} // namespace

void channels_to_csv(const ChannelSet& ch, std::ostream& out) {
    out << "name,outer,row,col,re,im\n";
    matrix_rows("H", 0, ch.H, out);
    for (std::size_t r = 0; r < ch.G.size(); ++r) matrix_rows("G", static_cast<int>(r), ch.G[r], out);
    matrix_rows("a_theta", 0, ch.a_theta, out);
    matrix_rows("b0_theta", 0, ch.b0_theta, out);
    for (std::size_t r = 0; r < ch.b1_phi.size(); ++r)
        matrix_rows("b1_phi", static_cast<int>(r), ch.b1_phi[r], out);
}

} // namespace iaps
