#pragma once

#include "iaps/rng.hpp"
#include "iaps/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace iaps {

// All physical and system constants. Powers/variances are stored at the dB
// boundary and converted to linear milliwatts on access; sigma_ns_db is a
// separate normalization for the sensing statistics (see README).
struct ScenarioConfig {
    int M = 16;  // transmit antennas
    int N0 = 20; // BS receive antennas
    int N1 = 20; // RAP receive antennas
    int K = 8;   // UEs
    int R = 10;  // RAPs
    int L = 30;  // symbol slots per coherent interval

    double region_m = 500.0;
    double delta = 0.5; // antenna spacing / wavelength

    double p_max_dbm = 30.0;
    double gamma_db = 15.0;
    double pfa = 1e-5;
    double sigma_rcs_db = -19.0;
    double sigma_nc_dbm = -104.0; // communication noise power (calibrated)
    double sigma_ns_db = 42.0;    // sensing noise normalization (calibrated)
    double delta_p_frac = 0.01;   // Algorithm step as a fraction of P_max

    int trials = 200;
    std::uint64_t seed = 1;

    double p_max_mw() const { return dbm_to_mw(p_max_dbm); }
    double gamma_linear() const { return db_to_linear(gamma_db); }
    double sigma_rcs2() const { return db_to_linear(sigma_rcs_db); }
    double sigma_nc2_mw() const { return dbm_to_mw(sigma_nc_dbm); }
    double sigma_ns2() const { return db_to_linear(sigma_ns_db); }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

// Parse from a UTF-8 JSON document mirroring the field names above.
// Unknown keys are rejected. Missing keys keep their defaults.
ScenarioConfig config_from_json(const std::string& json_text);
std::string config_to_json(const ScenarioConfig& cfg);

// Apply a "key=value" override to a config (CLI --set). Throws on unknown key.
void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value);

struct Layout {
    Vec2 bs_pos;
    Vec2 target_pos;
    std::vector<Vec2> rap_pos;
    std::vector<Vec2> ue_pos;
    double theta = 0.0;           // target azimuth at the BS
    std::vector<double> phi;      // target azimuth at each RAP
    std::vector<double> d_bs_ue;  // km
    std::vector<double> d_bs_rap; // km
};

struct ChannelSet {
    MatC H;                  // M x K, UE channels h_k
    std::vector<MatC> G;     // N1 x M target-free channel per RAP
    VecC a_theta;            // M transmit steering vector
    VecC b0_theta;           // N0 BS receive steering vector
    std::vector<VecC> b1_phi; // N1 RAP steering vectors
};

// Entry m is exp(j 2*pi m delta sin(angle)), m = 0..n-1.
VecC steering(double angle, int n, double delta);

// 128.1 + 37.6 log10(d) with d in kilometers; throws on d <= 0.
double path_loss_db(double d_km);

Layout generate_layout(const ScenarioConfig& cfg, RngStream& rng);

ChannelSet draw_channels(const Layout& layout, const ScenarioConfig& cfg, RngStream& rng);

// R+1 i.i.d. CN(0, sigma_rcs2) combined sensing gains (Swerling-I: held
// constant within one coherent trial).
VecC draw_rcs(const ScenarioConfig& cfg, RngStream& rng);

void layout_to_csv(const Layout& layout, std::ostream& out);
void channels_to_csv(const ChannelSet& ch, std::ostream& out);

} // namespace iaps
