#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "msmag/micro.hpp"
#include "support/probe.hpp"

using namespace msmag;

TEST_CASE("micro config derived counts and validation") {
    MicroConfig cfg;
    cfg.epsilon = 1e-3;
    cfg.P = 10;
    cfg.mu = 2.8e-3;
    cfg.mu_prime = 4.8e-3;
    cfg.eta = 0.45e-6;
    cfg.dt_safety = 0.1;
    cfg.alpha_micro = 1.2;
    cfg.validate();
    REQUIRE(cfg.cell_count() == 96);
    REQUIRE(cfg.step_count() == 450);
    REQUIRE(cfg.dtau() <= cfg.dt_safety * cfg.dxi() * cfg.dxi() + 1e-30);

    MicroConfig bad = cfg;
    bad.mu_prime = 0.5 * bad.mu;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.P = 1;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.alpha_micro = 2.5;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("constant macro field gives constant micro data") {
    auto probe = testsupport::make_probe(0.5, [](Vec2) { return Vec3{0.1, -0.4, 0.9}; });
    MicroConfig cfg = testsupport::small_micro_cfg();
    MicroState s = init_micro(probe.mesh, probe.field, 0, cfg);
    for (int j = 0; j <= s.n; ++j)
        for (int i = 0; i <= s.n; ++i)
            REQUIRE((s.node(i, j) - Vec3{0.1, -0.4, 0.9}).norm() < 1e-13);
}

TEST_CASE("affine macro field: micro init reproduces the Jacobian exactly") {
    Mat32 g{{0.7, -0.2, 0.5}, {-0.3, 1.1, 0.4}};
    auto probe = testsupport::make_probe(
        0.5, [&](Vec2 x) { return Vec3{1, 2, 3} + g.apply(x); });
    MicroConfig cfg = testsupport::small_micro_cfg();
    MicroState s = init_micro(probe.mesh, probe.field, 0, cfg);
    for (int j = 1; j < s.n; ++j)
        for (int i = 1; i < s.n; ++i) {
            Mat32 got = s.gradient(i, j);
            REQUIRE((got.c0 - g.c0).norm() < 1e-9);
            REQUIRE((got.c1 - g.c1).norm() < 1e-9);
        }
}

TEST_CASE("interpolated unit vectors have interior norms below one") {
    auto probe = testsupport::make_probe(1.0, testsupport::curved_unit_field);
    MicroConfig cfg = testsupport::small_micro_cfg();
    MicroState s = init_micro(probe.mesh, probe.field, 0, cfg);
    int below = 0, total = 0;
    for (int j = 1; j < s.n; ++j)
        for (int i = 1; i < s.n; ++i) {
            double nrm = s.node(i, j).norm();
            REQUIRE(nrm <= 1.0 + 1e-12);
            ++total;
            if (nrm < 1.0 - 1e-12) ++below;
        }
    REQUIRE(below > total / 2);
}

TEST_CASE("exchange stencil annihilates constants and affine data") {
    auto coeff = make_coefficient("sine-product", 1e-2);
    auto probe = testsupport::make_probe(0.5, [](Vec2) { return Vec3{0.2, 0.5, -1.0}; });
    MicroConfig cfg = testsupport::small_micro_cfg();
    MicroState s = init_micro(probe.mesh, probe.field, 0, cfg);
    for (int j = 1; j < s.n; j += 3)
        for (int i = 1; i < s.n; i += 3)
            REQUIRE(exchange_field(s, coeff, i, j).norm() < 1e-7);

    // Affine data needs a constant coefficient for exact annihilation.
    auto cconst = make_coefficient("constant", 0.5, {{"value", 2.0}});
    Mat32 g{{1.0, 0.5, -0.7}, {0.2, -0.8, 0.9}};
    auto probe2 = testsupport::make_probe(0.5, [&](Vec2 x) { return g.apply(x); });
    MicroState s2 = init_micro(probe2.mesh, probe2.field, 0, cfg);
    for (int j = 1; j < s2.n; j += 3)
        for (int i = 1; i < s2.n; i += 3)
            REQUIRE(exchange_field(s2, cconst, i, j).norm() < 1e-6);
}

TEST_CASE("exchange stencil matches the discrete Fourier symbol") {
    auto cconst = make_coefficient("constant", 0.5, {{"value", 1.0}});
    MicroConfig cfg = testsupport::small_micro_cfg();
    auto probe = testsupport::make_probe(0.5, [](Vec2) { return Vec3{0, 0, 1}; });
    MicroState s = init_micro(probe.mesh, probe.field, 0, cfg);
    double L = s.n * s.dxi; // one full period across the patch
    double kwave = 2.0 * pi / L;
    double xlo = s.coord(0, 0).x;
    for (int j = 0; j <= s.n; ++j)
        for (int i = 0; i <= s.n; ++i) {
            Vec2 p = s.coord(i, j);
            s.set_node(i, j, {0, 0, std::sin(kwave * (p.x - xlo))});
        }
    double symbol = 2.0 * (std::cos(kwave * s.dxi) - 1.0) / (s.dxi * s.dxi);
    for (int j = 1; j < s.n; j += 4)
        for (int i = 1; i < s.n; i += 4) {
            Vec3 H = exchange_field(s, cconst, i, j);
            Vec3 want = symbol * s.node(i, j);
            REQUIRE((H - want).norm() < 1e-8 * std::max(1.0, std::abs(symbol)));
        }
    // Second-order agreement with the continuum symbol -k^2.
    REQUIRE(std::abs(symbol + kwave * kwave) <
            0.15 * kwave * kwave * (kwave * s.dxi) * (kwave * s.dxi));
}

TEST_CASE("node update: zero field fixes the node, norms always preserved") {
    Vec3 m{0.3, -0.2, 0.8};
    REQUIRE((mpe_node_update(m, {0, 0, 0}, 0.1) - m).norm() < 1e-15);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        Vec3 mm{u(rng), u(rng), u(rng)};
        Vec3 w{100 * u(rng), 100 * u(rng), 100 * u(rng)};
        Vec3 out = mpe_node_update(mm, w, 0.05);
        REQUIRE(out.norm() == Catch::Approx(mm.norm()).margin(1e-14));
    }
}

TEST_CASE("node update rotates by 2 atan(w dt / 2) about a constant axis") {
    double omega = 3.7, dtau = 0.21;
    Vec3 m{1, 0, 0};
    double theta = 2.0 * std::atan(0.5 * omega * dtau);
    Vec3 got = mpe_node_update(m, {0, 0, omega}, dtau);
    // m+ = m - dtau (m_mid x w): rotation about +z moves m toward -y... the
    // sign follows from m x w = (1,0,0) x (0,0,w) = (0,-w,0).
    REQUIRE(got.x == Catch::Approx(std::cos(theta)).margin(1e-14));
    REQUIRE(std::abs(got.y) == Catch::Approx(std::sin(theta)).margin(1e-14));
    REQUIRE(std::abs(got.z) < 1e-15);
}

TEST_CASE("stationary solutions: constant and affine data under constant coefficient") {
    auto cconst = make_coefficient("constant", 0.5, {{"value", 2.0}});
    MicroConfig cfg = testsupport::small_micro_cfg();

    auto probe = testsupport::make_probe(0.5, [](Vec2) { return Vec3{0.6, 0.0, 0.8}; });
    MicroState s = solve_micro(probe.mesh, probe.field, 0, cconst, cfg);
    for (int j = 0; j <= s.n; j += 2)
        for (int i = 0; i <= s.n; i += 2)
            REQUIRE((s.node(i, j) - Vec3{0.6, 0.0, 0.8}).norm() < 1e-12);

    Mat32 g{{0.4, -0.1, 0.3}, {0.2, 0.6, -0.5}};
    auto probe2 = testsupport::make_probe(0.5, [&](Vec2 x) { return Vec3{1, 0, 0} + g.apply(x); });
    MicroState s0 = init_micro(probe2.mesh, probe2.field, 0, cfg);
    MicroState s2 = solve_micro(probe2.mesh, probe2.field, 0, cconst, cfg);
    for (int j = 1; j < s2.n; j += 2)
        for (int i = 1; i < s2.n; i += 2)
            REQUIRE((s2.node(i, j) - s0.node(i, j)).norm() < 1e-12);
}

TEST_CASE("micro solve: boundary frozen, norms preserved") {
    auto coeff = make_coefficient("sine-product", 5e-3);
    auto probe = testsupport::make_probe(0.6, testsupport::curved_unit_field);
    MicroConfig cfg;
    cfg.epsilon = 5e-3;
    cfg.P = 8;
    cfg.mu = 2.0 * cfg.epsilon;
    cfg.mu_prime = 3.0 * cfg.epsilon;
    cfg.eta = 0.4 * cfg.epsilon * cfg.epsilon;
    MicroState s0 = init_micro(probe.mesh, probe.field, 0, cfg);
    double worst = 0.0;
    MicroState s = solve_micro(probe.mesh, probe.field, 0, coeff, cfg,
                               [&](int, double, const MicroState& st) {
                                   for (int j = 0; j <= st.n; ++j) {
                                       worst = std::max(worst, (st.node(0, j) - s0.node(0, j)).norm());
                                       worst = std::max(worst, (st.node(st.n, j) - s0.node(st.n, j)).norm());
                                       worst = std::max(worst, (st.node(j, 0) - s0.node(j, 0)).norm());
                                       worst = std::max(worst, (st.node(j, st.n) - s0.node(j, st.n)).norm());
                                   }
                               });
    REQUIRE(worst == 0.0); // boundary bitwise untouched
    double drift = 0.0;
    for (int j = 1; j < s.n; ++j)
        for (int i = 1; i < s.n; ++i)
            drift = std::max(drift,
                             std::abs(s.node(i, j).norm() - s.init_norm[s.index(i, j)]));
    REQUIRE(drift <= 1e-10);
}

TEST_CASE("halving dtau changes the final state at second order") {
    auto coeff = make_coefficient("sine-product", 5e-3);
    auto probe = testsupport::make_probe(0.6, testsupport::curved_unit_field);
    MicroConfig cfg;
    cfg.epsilon = 5e-3;
    cfg.P = 6;
    cfg.mu = 1.5 * cfg.epsilon;
    cfg.mu_prime = 2.5 * cfg.epsilon;
    cfg.eta = 0.3 * cfg.epsilon * cfg.epsilon;
    cfg.dt_safety = 0.032;

    auto run = [&](double safety) {
        MicroConfig c = cfg;
        c.dt_safety = safety;
        return solve_micro(probe.mesh, probe.field, 0, coeff, c);
    };
    MicroState a = run(cfg.dt_safety);
    MicroState b = run(cfg.dt_safety / 2.0);
    MicroState c = run(cfg.dt_safety / 4.0);
    double d_ab = 0.0, d_bc = 0.0;
    for (int j = 1; j < a.n; ++j)
        for (int i = 1; i < a.n; ++i) {
            d_ab = std::max(d_ab, (a.node(i, j) - b.node(i, j)).norm());
            d_bc = std::max(d_bc, (b.node(i, j) - c.node(i, j)).norm());
        }
    double order = std::log2(d_ab / d_bc);
    REQUIRE(order > 1.6);
    REQUIRE(order < 2.6);
}

TEST_CASE("stability envelope: safe runs stay bounded, reckless ones throw") {
    auto coeff = make_coefficient("sine-product", 1e-3);
    auto probe = testsupport::make_probe(0.5, testsupport::curved_unit_field);
    MicroConfig cfg;
    cfg.epsilon = 1e-3;
    cfg.P = 10;
    cfg.mu = 2.8e-3;
    cfg.mu_prime = 4.8e-3;
    cfg.eta = 0.5e-6;
    cfg.alpha_micro = 1.2;
    cfg.dt_safety = 0.04;
    REQUIRE_NOTHROW(solve_micro(probe.mesh, probe.field, 0, coeff, cfg));

    cfg.dt_safety = 10.0;
    REQUIRE_THROWS_AS(solve_micro(probe.mesh, probe.field, 0, coeff, cfg),
                      NumericalError);
}

TEST_CASE("cost model: counts independent of eps at fixed P, mu'/eps, eta/eps^2") {
    auto count_work = [](double eps) {
        MicroConfig cfg;
        cfg.epsilon = eps;
        cfg.P = 10;
        cfg.mu = 2.0 * eps;
        cfg.mu_prime = 4.0 * eps;
        cfg.eta = 0.45 * eps * eps;
        cfg.validate();
        return std::pair<long, long>{cfg.cell_count(), cfg.step_count()};
    };
    auto w1 = count_work(1e-3);
    auto w2 = count_work(1e-4);
    REQUIRE(w1 == w2);

    // Observer call count equals step count + 1 regardless of eps.
    auto coeff = make_coefficient("constant", 0.5, {{"value", 1.0}});
    auto probe = testsupport::make_probe(0.5, testsupport::curved_unit_field);
    for (double eps : {1e-3, 1e-4}) {
        MicroConfig cfg;
        cfg.epsilon = eps;
        cfg.P = 4;
        cfg.mu = 2.0 * eps;
        cfg.mu_prime = 3.0 * eps;
        cfg.eta = 0.2 * eps * eps;
        int calls = 0;
        solve_micro(probe.mesh, probe.field, 0, coeff, cfg,
                    [&](int, double, const MicroState&) { ++calls; });
        REQUIRE(calls == cfg.step_count() + 1);
    }
}

TEST_CASE("patch larger than the triangle flags the affine extension") {
    auto probe = testsupport::make_probe(1e-3, testsupport::curved_unit_field);
    MicroConfig cfg = testsupport::small_micro_cfg(); // patch half-width 0.15
    MicroState s = init_micro(probe.mesh, probe.field, 0, cfg);
    REQUIRE_FALSE(s.patch_fits);
    // Data is still the affine extension of the P1 function.
    Mat32 g = p1_gradient(probe.mesh, probe.field, 0);
    Mat32 got = s.gradient(1, 1);
    REQUIRE((got.c0 - g.c0).norm() < 1e-8);
    REQUIRE((got.c1 - g.c1).norm() < 1e-8);

    auto fits = testsupport::make_probe(1.0, testsupport::curved_unit_field);
    REQUIRE(init_micro(fits.mesh, fits.field, 0, cfg).patch_fits);
}
