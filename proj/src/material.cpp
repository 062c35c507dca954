#include "elastinv/material.hpp"

#include <cmath>
#include <stdexcept>

namespace elastinv {

void Phase::validate() const {
    if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
    if (!(nu > -1.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in (-1, 0.5)");
    if (!(rho > 0.0)) throw std::invalid_argument("density must be positive");
}

Lame lame_from_E_nu(double E, double nu) {
    if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
    if (!(nu > -1.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in (-1, 0.5)");
    return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

MaterialModel::MaterialModel(Phase phase1, Phase phase2, double eps)
    : phase1_(phase1), phase2_(phase2), eps_(eps) {
    phase1_.validate();
    phase2_.validate();
    if (!(eps_ > 0.0)) throw std::invalid_argument("interpolation width eps must be positive");
    lame1_ = lame_from_E_nu(phase1_.E, phase1_.nu);
    lame2_ = lame_from_E_nu(phase2_.E, phase2_.nu);
}

double sigmoid(double theta, double eps) { return 0.5 * (std::tanh(theta / eps) + 1.0); }

double sigmoid_prime(double theta, double eps) {
    const double sech = 1.0 / std::cosh(theta / eps);
    return sech * sech / (2.0 * eps);
}

namespace {

template <typename Fn>
ScalarField map_nodes(const LevelSet& ls, Fn&& fn) {
    ScalarField out(ls.theta.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(ls.theta[i]);
    return out;
}

double blend(double v1, double v2, double phi) { return v1 * phi + v2 * (1.0 - phi); }

}  // namespace

ScalarField density_field(const LevelSet& ls, const MaterialModel& m) {
    return map_nodes(ls, [&](double t) { return blend(m.phase1().rho, m.phase2().rho, sigmoid(t, m.eps())); });
}

StiffnessFields stiffness_fields(const LevelSet& ls, const MaterialModel& m) {
    return {map_nodes(ls, [&](double t) { return blend(m.lame1().lambda, m.lame2().lambda, sigmoid(t, m.eps())); }),
            map_nodes(ls, [&](double t) { return blend(m.lame1().mu, m.lame2().mu, sigmoid(t, m.eps())); })};
}

ScalarField density_derivative_field(const LevelSet& ls, const MaterialModel& m) {
    const double jump = m.phase1().rho - m.phase2().rho;
    return map_nodes(ls, [&](double t) { return jump * sigmoid_prime(t, m.eps()); });
}

StiffnessFields stiffness_derivative_fields(const LevelSet& ls, const MaterialModel& m) {
    const double dl = m.lame1().lambda - m.lame2().lambda;
    const double dm = m.lame1().mu - m.lame2().mu;
    return {map_nodes(ls, [&](double t) { return dl * sigmoid_prime(t, m.eps()); }),
            map_nodes(ls, [&](double t) { return dm * sigmoid_prime(t, m.eps()); })};
}

}  // namespace elastinv
