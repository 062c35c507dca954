#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dense.hpp"
#include "elastinv/fem.hpp"
#include "elastinv/material.hpp"

using namespace elastinv;

namespace {

dense::Matrix to_dense(const SparseOperator& a) {
    dense::Matrix d(a.size(), std::vector<double>(a.size(), 0.0));
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) d[r][a.cols()[k]] += a.values()[k];
    return d;
}

double quad_form(const SparseOperator& a, const std::vector<double>& u) {
    const auto au = a * u;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * au[i];
    return s;
}

std::vector<double> vector_sample(const Mesh& mesh, double (*fx)(double, double), double (*fy)(double, double)) {
    std::vector<double> u(2 * mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        u[2 * i] = fx(mesh.nodes()[i].x, mesh.nodes()[i].y);
        u[2 * i + 1] = fy(mesh.nodes()[i].x, mesh.nodes()[i].y);
    }
    return u;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct Fixture {
    Mesh mesh = generate_mesh(6);
    MaterialModel model{{180e9, 0.26, 4e3}, {70e9, 0.25, 8e3}, 0.05};
    LevelSet ls{sample_field(mesh, [](double x, double y) { return std::hypot(x - 0.4, y - 0.55) - 0.2; })};
};

}  // namespace

TEST_CASE("mass matrix integrates constants") {
    const Mesh mesh = generate_mesh(5);
    const auto m1 = assemble_mass(mesh, ScalarField(mesh.node_count(), 1.0));
    CHECK(m1.sum() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m1.size() == 2 * mesh.node_count());
    const auto m4 = assemble_mass(mesh, ScalarField(mesh.node_count(), 4e3));
    CHECK(m4.sum() == doctest::Approx(8e3).epsilon(1e-12));
    CHECK(m4.symmetry_defect() == 0.0);

    // Row sums are the lumped nodal areas times rho.
    const auto ones = std::vector<double>(m1.size(), 1.0);
    const auto rows = m1 * ones;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        CHECK(rows[2 * i] == doctest::Approx(mesh.nodal_areas()[i]).epsilon(1e-12));
        CHECK(rows[2 * i + 1] == doctest::Approx(mesh.nodal_areas()[i]).epsilon(1e-12));
    }

    ScalarField bad(mesh.node_count(), 1.0);
    bad[3] = 0.0;
    CHECK_THROWS(assemble_mass(mesh, bad));
}

TEST_CASE("mass matrix is the exact L2 product of P1 fields") {
    const Mesh mesh = generate_mesh(7);
    const ScalarField one(mesh.node_count(), 1.0);
    // u = (x, y): integral of x^2 + y^2 over the unit square is 2/3.
    const auto u = vector_sample(mesh, [](double x, double) { return x; }, [](double, double y) { return y; });
    for (auto rule : {QuadratureRule::centroid, QuadratureRule::edge_midpoint})
        CHECK(quad_form(assemble_mass(mesh, one, rule), u) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // rho = 1 + x against u = (1, 0) integrates to 3/2 under both rules; the
    // rules differ for the cubic integrand rho x^2 but agree to O(h^2).
    const auto rho = sample_field(mesh, [](double x, double) { return 1.0 + x; });
    const auto e1 = vector_sample(mesh, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const auto ux = vector_sample(mesh, [](double x, double) { return x; }, [](double, double) { return 0.0; });
    const auto mid = assemble_mass(mesh, rho, QuadratureRule::edge_midpoint);
    const auto cen = assemble_mass(mesh, rho, QuadratureRule::centroid);
    CHECK(quad_form(mid, e1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(quad_form(cen, e1) == doctest::Approx(1.5).epsilon(1e-12));
    const double exact = 1.0 / 3.0 + 1.0 / 4.0;
    CHECK(std::abs(quad_form(mid, ux) - exact) < 1e-2);
    CHECK(std::abs(quad_form(cen, ux) - exact) < 1e-2);
}

TEST_CASE("stiffness null space is the rigid-body modes") {
    Fixture f;
    const auto st = stiffness_fields(f.ls, f.model);
    const auto k = assemble_stiffness(f.mesh, st.lambda, st.mu);
    CHECK(k.symmetry_defect() < 1e-14);
    const double scale = k.max_abs();

    const auto tx = vector_sample(f.mesh, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const auto ty = vector_sample(f.mesh, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
    const auto rot = vector_sample(f.mesh, [](double, double y) { return -y; }, [](double x, double) { return x; });
    CHECK(inf_norm(k * tx) <= 1e-9 * scale);
    CHECK(inf_norm(k * ty) <= 1e-9 * scale);
    CHECK(inf_norm(k * rot) <= 1e-9 * scale);

    const auto stretch = vector_sample(f.mesh, [](double x, double) { return x; }, [](double, double) { return 0.0; });
    CHECK(quad_form(k, stretch) > 0.0);

    // Exactly three zero eigenvalues; the rest bounded away from zero.
    auto ev = dense::symmetric_eigenvalues(to_dense(k));
    std::sort(ev.begin(), ev.end());
    const double top = ev.back();
    CHECK(std::abs(ev[0]) < 1e-10 * top);
    CHECK(std::abs(ev[1]) < 1e-10 * top);
    CHECK(std::abs(ev[2]) < 1e-10 * top);
    CHECK(ev[3] > 1e-6 * top);

    ScalarField bad = st.mu;
    bad[0] = -1.0;
    CHECK_THROWS(assemble_stiffness(f.mesh, st.lambda, bad));
}

TEST_CASE("stiffness of a uniform stretch matches the strain energy") {
    // u = (x, 0): div = 1, eps_xx = 1, energy = lambda + 2 mu over unit area.
    const Mesh mesh = generate_mesh(5);
    const double lambda = 3.0, mu = 2.0;
    const auto k = assemble_stiffness(mesh, ScalarField(mesh.node_count(), lambda), ScalarField(mesh.node_count(), mu));
    const auto u = vector_sample(mesh, [](double x, double) { return x; }, [](double, double) { return 0.0; });
    CHECK(quad_form(k, u) == doctest::Approx(lambda + 2.0 * mu).epsilon(1e-12));
    // Pure shear u = (y, 0): eps_xy = 1/2, energy = mu.
    const auto s = vector_sample(mesh, [](double, double y) { return y; }, [](double, double) { return 0.0; });
    CHECK(quad_form(k, s) == doctest::Approx(mu).epsilon(1e-12));
}

TEST_CASE("assembly is deterministic") {
    Fixture f;
    const auto rho = density_field(f.ls, f.model);
    const auto st = stiffness_fields(f.ls, f.model);
    const auto a = assemble_mass(f.mesh, rho), b = assemble_mass(f.mesh, rho);
    CHECK(a.values() == b.values());
    CHECK(a.cols() == b.cols());
    const auto ka = assemble_stiffness(f.mesh, st.lambda, st.mu), kb = assemble_stiffness(f.mesh, st.lambda, st.mu);
    CHECK(ka.values() == kb.values());
}

TEST_CASE("sparse operator plumbing") {
    const auto a = SparseOperator::from_triplets(3, {{0, 0, 1.0}, {0, 1, 2.0}, {0, 0, 0.5}, {2, 1, -1.0}, {1, 1, 4.0}});
    CHECK(a.at(0, 0) == 1.5);
    CHECK(a.at(0, 1) == 2.0);
    CHECK(a.at(1, 0) == 0.0);
    CHECK(a.nonzeros() == 4);
    CHECK(a.symmetry_defect() == doctest::Approx(2.0 / 4.0));
    const auto b = a.add_scaled(a, -1.0);
    CHECK(b.max_abs() == 0.0);
    const auto c = a.with_identity_rows({1});
    CHECK(c.at(1, 1) == 1.0);
    CHECK(c.at(0, 1) == 0.0);
    CHECK(c.at(2, 1) == 0.0);
    CHECK(c.at(0, 0) == 1.5);
    CHECK_THROWS(SparseOperator::from_triplets(2, {{2, 0, 1.0}}));
}

TEST_CASE("conjugate gradients against a dense oracle") {
    std::mt19937 rng(42);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10;
        dense::Matrix b(n, std::vector<double>(n));
        for (auto& row : b)
            for (auto& v : row) v = normal(rng);
        dense::Matrix a(n, std::vector<double>(n, 0.0));
        std::vector<Triplet> trips;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) a[i][j] += b[k][i] * b[k][j];
                if (i == j) a[i][j] += 0.5;
                trips.push_back({i, j, a[i][j]});
            }
        std::vector<double> rhs(n);
        for (auto& v : rhs) v = normal(rng);
        const auto oracle = dense::solve(a, rhs);
        const auto res = solve_spd(SparseOperator::from_triplets(n, trips), rhs, 1e-14, 1000);
        CHECK(res.report.converged);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(res.x[i] - oracle[i]) <= 1e-8 * std::max(1.0, inf_norm(oracle)));
    }
}

TEST_CASE("solve_spd on a mass matrix") {
    const Mesh mesh = generate_mesh(8);
    const auto m = assemble_mass(mesh, ScalarField(mesh.node_count(), 2.5));
    std::vector<double> rhs(m.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::sin(0.37 * static_cast<double>(i));
    const auto res = solve_spd(m, rhs, 1e-10);
    CHECK(res.report.converged);
    CHECK(res.report.residual <= 1e-10);
    const auto back = m * res.x;
    double err = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        err += (back[i] - rhs[i]) * (back[i] - rhs[i]);
        nb += rhs[i] * rhs[i];
    }
    CHECK(std::sqrt(err / nb) <= 1e-10);

    const auto zero = solve_spd(m, std::vector<double>(m.size(), 0.0));
    CHECK(zero.report.iterations == 0);
    CHECK(zero.report.converged);
    CHECK(inf_norm(zero.x) == 0.0);

    const auto capped = solve_spd(m, rhs, 1e-14, 1);
    CHECK_FALSE(capped.report.converged);
}
