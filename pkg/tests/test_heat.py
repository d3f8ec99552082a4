import math
from dataclasses import replace

import numpy as np
import pytest

from ruminheat.grid import (
    GridSection,
    boundary_mass,
    gaussian_bump,
    l2_norm,
    mollifier,
    total_integral,
)
from ruminheat.heat import (
    BoundaryMassError,
    HeatConfig,
    HeatEngine,
    evolve,
    inverse_accumulate,
    inverse_quadrature_nodes,
    kernel_extract,
    pde_residual,
    scaling_check,
    semigroup_check,
    symmetry_check,
)


def small_cfg(degree=0, points=21, dt=0.01, t_final=0.1, **kw):
    # the 3-cell shell covers most of a 21^3 box, so unit tests run with a
    # looser boundary threshold than the production default
    kw.setdefault("boundary_threshold", 1e-3)
    return HeatConfig(n=1, degree=degree, points=points, half_width=4.2,
                      t_half_width=4.2, dt=dt, t_final=t_final,
                      solver="direct-t", **kw)


@pytest.fixture(scope="module")
def engine0():
    return HeatEngine(small_cfg())


def test_config_validation():
    with pytest.raises(ValueError):
        HeatConfig(dt=-1.0)
    with pytest.raises(ValueError):
        HeatConfig(solver_tol=1e-6)
    with pytest.raises(ValueError):
        HeatConfig(stepper="leapfrog")
    assert HeatConfig(stepper="implicit-euler").theta == 1.0
    assert HeatConfig().theta == 0.5


def test_zero_initial_data(engine0):
    cfg = engine0.cfg
    u0 = GridSection.zeros(engine0.spec, 0, 1)
    traj = evolve(u0, cfg, engine=engine0)
    assert all(d["l2"] == 0.0 for d in traj.diagnostics)


def test_dissipativity_and_mass(engine0):
    cfg = replace(engine0.cfg, t_final=0.08, dt=0.005, boundary_threshold=1e-4)
    u0 = gaussian_bump(engine0.spec, (0.4, 0.4, 0.4))
    traj = evolve(u0, cfg, engine=engine0)
    l2s = [d["l2"] for d in traj.diagnostics]
    assert all(l2s[k + 1] <= l2s[k] * (1 + 1e-8) for k in range(len(l2s) - 1))
    masses = [d["mass"][0] for d in traj.diagnostics]
    assert abs(masses[-1] - masses[0]) / abs(masses[0]) < 1e-6
    assert max(d["boundary_mass"] for d in traj.diagnostics) < 1e-4


def test_dissipativity_all_degrees():
    for h in (1, 2, 3):
        cfg = small_cfg(degree=h, points=15, dt=0.004, t_final=0.02,
                        check_boundary=False)
        engine = HeatEngine(cfg)
        rng = np.random.RandomState(h)
        bump = gaussian_bump(engine.spec, (0.5, 0.5, 0.5)).data[0]
        data = np.stack([bump * rng.uniform(0.5, 1.5) for _ in range(engine.ncomp)])
        traj = evolve(GridSection(engine.spec, h, data), cfg, engine=engine)
        l2s = [d["l2"] for d in traj.diagnostics]
        assert all(l2s[k + 1] <= l2s[k] * (1 + 1e-8) for k in range(len(l2s) - 1))


def test_implicit_euler_also_dissipative(engine0):
    cfg = replace(engine0.cfg, stepper="implicit-euler", t_final=0.05)
    u0 = gaussian_bump(engine0.spec, (0.45, 0.45, 0.45))
    traj = evolve(u0, cfg, engine=engine0)
    l2s = [d["l2"] for d in traj.diagnostics]
    assert all(l2s[k + 1] <= l2s[k] * (1 + 1e-10) for k in range(len(l2s) - 1))


def test_boundary_abort():
    cfg = small_cfg(points=15, t_final=0.05, boundary_threshold=1e-9)
    engine = HeatEngine(cfg)
    wide = gaussian_bump(engine.spec, (2.0, 2.0, 2.0))
    with pytest.raises(BoundaryMassError) as err:
        evolve(wide, cfg, engine=engine)
    assert err.value.diagnostics


def test_cg_and_direct_t_agree():
    cfg_d = small_cfg(points=13, dt=0.01, t_final=0.03, check_boundary=False)
    cfg_c = replace(cfg_d, solver="cg")
    engine_d = HeatEngine(cfg_d)
    engine_c = HeatEngine(cfg_c)
    u0 = gaussian_bump(engine_d.spec, (0.5, 0.5, 0.5))
    a = evolve(u0, cfg_d, engine=engine_d).snapshots[-1]
    b = evolve(u0, cfg_c, engine=engine_c).snapshots[-1]
    assert l2_norm(a - b) / l2_norm(a) < 1e-8
    iters = [d["iterations"] for d in evolve(u0, cfg_c, engine=engine_c).diagnostics[1:]]
    assert all(i > 0 for i in iters)


def test_semigroup_trivial_and_order(engine0):
    u0 = gaussian_bump(engine0.spec, (0.5, 0.5, 0.5))
    # sigma = 0: identical computation
    same = semigroup_check(u0, 0.04, 0.0, replace(engine0.cfg, dt=0.004),
                           engine=engine0, direct_dt_factor=1.0)
    assert same["rel_error"] <= 1e-13
    errs = []
    for dt in (0.006, 0.003):
        r = semigroup_check(u0, 0.09, 0.045, replace(engine0.cfg, dt=dt), engine=engine0)
        errs.append(r["rel_error"])
        assert r["commuted_rel_gap"] < 1e-12
    assert math.log2(errs[0] / errs[1]) > 1.7


def test_kernel_extract_mass_and_shape(engine0):
    cfg = replace(engine0.cfg, dt=0.004, boundary_threshold=1e-2)
    k = kernel_extract(cfg, 0.04, eps_cells=2.2, engine=engine0)
    assert k.fields.shape == (1, 1) + engine0.spec.shape
    # degree-0 kernel: positive, unit mass while interior
    col = GridSection(engine0.spec, 0, k.fields[:, 0])
    assert total_integral(col)[0] == pytest.approx(1.0, rel=1e-3)
    assert k.fields.min() > -1e-8
    with pytest.raises(ValueError):
        kernel_extract(cfg, 0.04, eps_cells=1.0, engine=engine0)


def test_kernel_schwartz_tail():
    # gauge-ball decay: magnitude at radius 2R well below magnitude at R
    cfg = small_cfg(points=33, dt=0.004, boundary_threshold=1e-2)
    engine = HeatEngine(cfg)
    k = kernel_extract(cfg, 0.06, eps_cells=2.2, engine=engine)
    field = np.abs(k.fields[0, 0])
    xs = engine.spec.meshgrid()
    gauge = ((xs[0] ** 2 + xs[1] ** 2) ** 2 + 16.0 * xs[2] ** 2) ** 0.25
    r = 1.8
    at_r = field[(gauge > 0.9 * r) & (gauge < 1.1 * r)].max()
    at_2r = field[(gauge > 1.8 * r) & (gauge < 2.2 * r)].max()
    assert at_2r <= 1e-3 * at_r


def test_scaling_check_r1_is_exact(engine0):
    cfg = replace(engine0.cfg, dt=0.005, boundary_threshold=1e-2)
    res = scaling_check(cfg, s=0.03, r=1.0, engine=engine0)
    assert res["rel_error"] < 1e-12


def test_scaling_check_small():
    # cell-tied mollifier widths at one resolution: loose shell budget
    cfg = small_cfg(points=33, dt=0.005, boundary_threshold=1e-1)
    engine = HeatEngine(cfg)
    res = scaling_check(cfg, s=0.03, r=2.0, engine=engine)
    assert res["a"] == 2 and res["Q"] == 4
    assert res["rel_error"] < 0.08


def test_symmetry_scalar_case(engine0):
    cfg = replace(engine0.cfg, dt=0.005, boundary_threshold=3e-2)
    res = symmetry_check(cfg, 0.04, eps_cells=2.2, engine=engine0)
    # degree 0: kernel is even under group inversion
    assert res["max_discrepancy"] < 0.05


def test_pde_residual_stationary(engine0):
    cfg = replace(engine0.cfg, dt=0.005, t_final=0.06)
    traj = evolve(GridSection.zeros(engine0.spec, 0, 1), cfg,
                  snapshot_times=[0.02, 0.03, 0.04], engine=engine0)
    res = pde_residual(traj, engine=engine0)
    assert res and all(r["residual"] == 0.0 for r in res)


def test_pde_residual_orders(engine0):
    u0 = gaussian_bump(engine0.spec, (0.5, 0.5, 0.5))
    errs = []
    for dt in (0.01, 0.005):
        cfg = replace(engine0.cfg, dt=dt, t_final=0.08)
        traj = evolve(u0, cfg, snapshot_times=[0.04 - 2 * dt, 0.04, 0.04 + 2 * dt],
                      engine=engine0)
        res = pde_residual(traj, engine=engine0)
        errs.append(res[0]["residual"])
    assert errs[1] < errs[0] / 3.0


def test_pde_residual_sign_fault(engine0):
    # flipping the Laplacian sign must blow the residual up (regression)
    u0 = gaussian_bump(engine0.spec, (0.5, 0.5, 0.5))
    cfg = replace(engine0.cfg, dt=0.005, t_final=0.08)
    traj = evolve(u0, cfg, snapshot_times=[0.03, 0.035, 0.04], engine=engine0)
    good = pde_residual(traj, engine=engine0)[0]["residual"]

    class Flipped:
        def apply_laplacian(self, u):
            return engine0.apply_laplacian(u).scale(-1.0)

        cfg = engine0.cfg

    bad = pde_residual(traj, engine=Flipped())[0]["residual"]
    assert bad > 50 * good


def test_inverse_quadrature_nodes():
    nodes = inverse_quadrature_nodes(0.01, 1.0)
    assert nodes[0] == 0.0
    assert nodes[1] == pytest.approx(0.01)
    assert nodes[-1] == pytest.approx(1.0)
    gaps = np.diff(nodes)
    assert all(g > 0 for g in gaps)
    assert gaps[-1] > gaps[4]  # geometric growth after the uniform head


def test_inverse_accumulate(engine0):
    cfg = replace(engine0.cfg, dt=0.01)
    psi = gaussian_bump(engine0.spec, (0.5, 0.5, 0.5))
    phi = engine0.apply_laplacian(psi)
    res = inverse_accumulate(cfg, phi, m_final=10.0, engine=engine0)
    errs = [c["rel_error"] for c in res["curve"]]
    assert res["final_rel_error"] < 0.05
    assert res["direct_solve_rel_gap"] < 0.05
    assert errs[-1] < errs[0]
    # zero right side stays zero
    zero = GridSection.zeros(engine0.spec, 0, 1)
    res0 = inverse_accumulate(cfg, zero, m_final=0.2, engine=engine0)
    assert res0["final_rel_error"] == 0.0 or math.isnan(res0["final_rel_error"])
