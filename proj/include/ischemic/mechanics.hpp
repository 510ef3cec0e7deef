#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "constitutive.hpp"
#include "params.hpp"

namespace ischemic {

class DegenerateDomain : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form matrix velocity on the current grid. The momentum BVP is
/// never solved directly; v comes from the pressure-integral representation
/// and Rdot from the resulting boundary identity.
struct VelocityProfile {
    std::vector<double> v_center;   // N values
    std::vector<double> vr_center;  // N values
    std::vector<double> v_face;     // N+1 values; v_face.front() ~ Rdot, back() = 0
    double Q = 0.0;                 // pressure integral
    double Rdot = 0.0;              // boundary speed, = -2 R Q / (L^2 + R^2)
};

inline void check_domain(double R, double L)
{
    if (L - R < 1e-12 * L)
        throw DegenerateDomain("annulus width L - R is at machine scale");
}

/// Pressure integral Q = int_R^L y P(rho(y)) dy by composite midpoint on
/// the uniform xi grid. Nonnegative because P is.
inline double compute_Q(std::span<const double> rho, double R, double L, double beta)
{
    check_domain(R, L);
    const int n = static_cast<int>(rho.size());
    const double dxi = 1.0 / n;
    const double width = L - R;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = R + (i + 0.5) * dxi * width;
        sum += r * pressure(rho[i], beta);
    }
    return sum * dxi * width;
}

/// v, v_r and Rdot from one cumulative-quadrature pass over r*P.
inline VelocityProfile compute_velocity(std::span<const double> rho, double R,
                                        double L, double beta)
{
    check_domain(R, L);
    const int n = static_cast<int>(rho.size());
    const double dxi = 1.0 / n;
    const double width = L - R;

    std::vector<double> P(n);
    for (int i = 0; i < n; ++i) P[i] = pressure(rho[i], beta);

    // cum_face[j] = int_R^{r_face_j} y P dy; cum_center uses a half cell
    std::vector<double> cum_face(n + 1, 0.0);
    std::vector<double> cum_center(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double r = R + (i + 0.5) * dxi * width;
        cum_center[i] = cum_face[i] + 0.5 * dxi * width * r * P[i];
        cum_face[i + 1] = cum_face[i] + dxi * width * r * P[i];
    }
    const double Q = cum_face[n];
    const double denom = L * L + R * R;

    VelocityProfile vp;
    vp.Q = Q;
    vp.Rdot = -2.0 * R * Q / denom;
    vp.v_center.resize(n);
    vp.vr_center.resize(n);
    vp.v_face.resize(n + 1);

    auto v_at = [&](double r, double inner) {
        const double outer = Q - inner;
        return ((L * L - r * r) * inner - (r * r + R * R) * outer) / (r * denom);
    };
    for (int i = 0; i < n; ++i) {
        const double r = R + (i + 0.5) * dxi * width;
        vp.v_center[i] = v_at(r, cum_center[i]);
        vp.vr_center[i] = P[i] - 2.0 * Q / denom - vp.v_center[i] / r;
    }
    for (int j = 0; j <= n; ++j) {
        const double r = R + j * dxi * width;
        vp.v_face[j] = v_at(r, cum_face[j]);
    }
    vp.v_face[n] = 0.0;   // exact by construction: inner = Q, L^2 - r^2 = 0
    return vp;
}

/// Admissible band for R(t) from the accumulated pressure integral:
/// R0 exp(-2 I/L^2) <= R(t) <= R0 exp(-I/L^2) with I = int_0^t Q.
inline std::pair<double, double> sandwich_bounds(std::span<const double> times,
                                                 std::span<const double> Q_values,
                                                 double R0, double L)
{
    double integral = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k)
        integral += 0.5 * (Q_values[k] + Q_values[k - 1]) * (times[k] - times[k - 1]);
    return {R0 * std::exp(-2.0 * integral / (L * L)),
            R0 * std::exp(-integral / (L * L))};
}

} // namespace ischemic
