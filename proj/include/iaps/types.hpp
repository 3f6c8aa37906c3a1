#pragma once

#include <Eigen/Dense>
#include <complex>

namespace iaps {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// dBm -> milliwatts (all powers are handled in linear mW internally)
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

} // namespace iaps
