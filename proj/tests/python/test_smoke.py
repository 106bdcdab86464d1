"""Python binding smoke tests (run with PYTHONPATH pointing at the built
extension and the python/ package directory)."""

import math

import pytest

import phasered as pr

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def hopf():
    field = pr.model_field(pr.ModelId.HopfNF)
    cfg = pr.model_default_integrator(pr.ModelId.HopfNF, {})
    orbit = pr.find_periodic_orbit(field, [0.5, 0.0], cfg)
    return field, cfg, orbit


def test_hopf_orbit(hopf):
    _, _, orbit = hopf
    assert abs(orbit.period - TWO_PI) < 1e-8
    assert abs(math.hypot(*orbit.anchor) - 1.0) < 1e-9
    assert orbit.closure_residual < 1e-9


def test_hopf_reduction_pipeline(hopf):
    field, cfg, orbit = hopf
    Z = pr.compute_prc(field, orbit, cfg)
    k = pr.floquet_divergence(field, orbit)
    assert abs(k + 2.0) < 1e-6
    fl = pr.monodromy_poincare(field, orbit, Z.values[0], cfg)
    assert not fl.monodromy_underflow
    assert abs(fl.lam - math.exp(-2.0 * orbit.period)) / fl.lam < 1e-2
    I = pr.compute_irc(field, orbit, k, fl.v, cfg)
    # Z . F = omega and I . F = 0 at a few grid points
    for j in (0, 137, 512):
        g = orbit.at_theta(Z.thetas[j])
        f = field.rhs(g)
        zf = sum(a * b for a, b in zip(Z.values[j], f))
        assert abs(zf - orbit.omega) < 1e-6 * orbit.omega
        if_ = sum(a * b for a, b in zip(I.values[j], f))
        assert abs(if_) < 1e-6 * max(1.0, abs(if_))


def test_analytic_catalog_helpers():
    k, weak = pr.homoclinic_analytic_k(-3.0, 1.0)
    assert k == -2.0 and not weak
    k, weak = pr.homoclinic_analytic_k(-1.0001, 1.0)
    assert abs(k + 0.0001) < 1e-12 and weak
    assert abs(pr.box_transit_time(0.02, 0.02 / math.e, 1.0) - 1.0) < 1e-14


def test_catalog_crossvalidation():
    rep = pr.catalog_crossvalidation(pr.ModelId.HopfNF, {"d": 1.0})
    assert rep.prc_sup_rel_err < 1e-3
    assert rep.irc_sup_rel_err < 1e-3
    assert rep.k_rel_err < 1e-6


def test_oracles(hopf):
    field, cfg, orbit = hopf
    k = pr.floquet_divergence(field, orbit)
    # the anchor phase is wherever the shooting converged, so only the
    # first-order magnitude is pinned here
    shift = pr.phase_shift_oracle(field, orbit, 0.0, [0.0, 1e-4], k, cfg)
    assert abs(shift) < 2e-4


def test_run_cli_exit_codes(tmp_path):
    rc, err = pr.run_cli("model = hopf\nfoo = 1\n")
    assert rc == 2
    assert "foo" in err
    rc, err = pr.run_cli(
        f"model = hopf\ncommand = orbit\nout = {tmp_path}/run\n"
    )
    assert rc == 0
    assert (tmp_path / "run" / "orbit.csv").exists()
