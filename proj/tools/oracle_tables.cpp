#include "iaps/cli.hpp"
#include "iaps/oracles.hpp"
#include "iaps/types.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace iaps {

namespace {

namespace fs = std::filesystem;

void write_with_checksum(const fs::path& dir, const std::string& name, const std::string& body,
                         std::ostream& log) {
    std::ofstream f(dir / name, std::ios::binary);
    f << body;
    f.close();
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(oracle::fnv1a64(body)));
    std::ofstream c(dir / (name + ".fnv64"), std::ios::binary);
    c << hex << "\n";
    log << "wrote " << (dir / name).string() << " (fnv64 " << hex << ")\n";
}

} // namespace

int write_oracle_tables(const std::string& out_dir, std::ostream& log) {
    fs::path dir(out_dir);
    fs::create_directories(dir);
    char buf[160];

    { // noncentral chi-square survival reference grid
        std::ostringstream body;
        body << "xi,rho,sf_quadrature\n";
        for (int i = 0; i <= 10; ++i)
            for (int j = 0; j <= 10; ++j) {
                double xi = 50.0 * i / 10.0;
                double rho = 50.0 * j / 10.0;
                std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12e\n", xi, rho,
                              oracle::noncentral_chi2_sf_quadrature(xi, rho));
                body << buf;
            }
        write_with_checksum(dir, "chi2_sf_reference.csv", body.str(), log);
    }

    { // voting error probabilities by exhaustive enumeration
        std::ostringstream body;
        body << "R_plus_1,kappa,pd,pfa,error_enumeration\n";
        for (int n : {3, 5, 11})
            for (int kappa = 1; kappa <= n; ++kappa)
                for (double pd : {0.2, 0.5, 0.8, 0.95})
                    for (double pfa : {1e-5, 1e-2}) {
                        std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.15e\n", n, kappa, pd,
                                      pfa, oracle::vote_error_enumeration(kappa, pd, pfa, n - 1));
                        body << buf;
                    }
        write_with_checksum(dir, "vote_error_reference.csv", body.str(), log);
    }

    { // LP references on a fixed toy instance (2 variables)
        VecD c(2);
        c << 1.0, 0.35;
        MatD A(1, 2);
        A << -0.8, 0.3; // one QoS-style row
        VecD b(1);
        b << -0.2;
        auto vx = oracle::lp_vertex_maximize(c, A, b, 1.0);
        auto gd = oracle::lp_grid_maximize(c, A, b, 1.0, 1e-3);
        std::ostringstream body;
        body << "method,objective,x0,x1\n";
        std::snprintf(buf, sizeof buf, "vertex,%.15e,%.15e,%.15e\n", vx.objective, vx.x(0), vx.x(1));
        body << buf;
        std::snprintf(buf, sizeof buf, "grid_1e-3,%.15e,%.15e,%.15e\n", gd.objective, gd.x(0),
                      gd.x(1));
        body << buf;
        write_with_checksum(dir, "lp_toy_reference.csv", body.str(), log);
    }

    return 0;
}

} // namespace iaps
