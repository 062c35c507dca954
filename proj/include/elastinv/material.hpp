#pragma once

#include "elastinv/levelset.hpp"
#include "elastinv/mesh.hpp"

namespace elastinv {

/// Isotropic phase given by Young's modulus (Pa), Poisson ratio and density (kg/m^3).
struct Phase {
    double E = 0.0;
    double nu = 0.0;
    double rho = 0.0;

    void validate() const;
};

struct Lame {
    double lambda = 0.0;
    double mu = 0.0;
};

/// Plane-strain conversion. Rejects nu outside (-1, 0.5).
Lame lame_from_E_nu(double E, double nu);

/// Two-phase sigmoid interpolation. phi(theta) -> 1 selects phase1, phi -> 0
/// selects phase2, so phase1 values sit on the theta > 0 side.
class MaterialModel {
public:
    MaterialModel(Phase phase1, Phase phase2, double eps);

    const Phase& phase1() const { return phase1_; }
    const Phase& phase2() const { return phase2_; }
    double eps() const { return eps_; }
    const Lame& lame1() const { return lame1_; }
    const Lame& lame2() const { return lame2_; }

private:
    Phase phase1_;
    Phase phase2_;
    double eps_;
    Lame lame1_;
    Lame lame2_;
};

double sigmoid(double theta, double eps);
double sigmoid_prime(double theta, double eps);

ScalarField density_field(const LevelSet& ls, const MaterialModel& model);

struct StiffnessFields {
    ScalarField lambda;
    ScalarField mu;
};
StiffnessFields stiffness_fields(const LevelSet& ls, const MaterialModel& model);

/// d rho / d theta = (rho1 - rho2) phi'(theta).
ScalarField density_derivative_field(const LevelSet& ls, const MaterialModel& model);
/// d lambda / d theta and d mu / d theta, same sign convention as the density.
StiffnessFields stiffness_derivative_fields(const LevelSet& ls, const MaterialModel& model);

}  // namespace elastinv
