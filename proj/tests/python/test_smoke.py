import cmath
import json
import math

import numpy as np
import pytest

import hybridlab as hl


def test_scalar_delay_boundary():
    lo, hi = 1.0, 2.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if hl.scalar_dde_rightmost(mid).real < 0:
            lo = mid
        else:
            hi = mid
    assert lo == pytest.approx(math.pi / 2, rel=1e-6)


def test_delayed_model_sums_to_assembly_mass():
    m = hl.delayed_model(1e-4, 0.5)
    total = np.asarray(m["M0"]) + np.asarray(m["Mt"])
    assert np.allclose(np.diag(total), [5.37, 5.37, 5.37, 10.74])


def test_chart_labels_split_at_half():
    re, labels = hl.stability_chart([5e-5], [0.3, 0.7], nodes=24)
    assert labels[0] == ["unstable", "stabilisable"]
    assert re[0][0] > 0 > re[0][1]


def test_assembly_frf_is_symmetric_in_the_interface_split():
    a = hl.assembly_frf([12.0, 13.0], p=0.33)
    b = hl.assembly_frf([12.0, 13.0], p=0.67)
    assert np.allclose(np.abs(a), np.abs(b))


def test_fourier_fit():
    h, w = 1e-4, 2 * math.pi * 13.0
    t = np.arange(10000) * h
    x = 0.5 * np.cos(w * t) - 0.25 * np.sin(w * t)
    a0, a, b = hl.fourier_fit(x.tolist(), h, w, 1, 13)
    assert a[0] == pytest.approx(0.5, abs=1e-12)
    assert b[0] == pytest.approx(-0.25, abs=1e-12)


def test_single_point_solve_matches_assembly():
    r = hl.solve_point(12.5, p=0.5, h=1e-5)
    assert len(r["f_hz"]) == 1
    exact = abs(hl.assembly_frf([12.5], p=0.5)[0])
    assert r["amplitude"][0] == pytest.approx(exact, rel=0.01)


def test_implicit_euler_transfer_shape():
    z = np.asarray(hl.implicit_euler_transfer(0.5, 13.0))
    assert z.shape == (4,)
    assert all(isinstance(v, complex) for v in z.tolist())


def test_config_rejects_unknown_keys():
    cfg = json.loads(hl.default_config())
    assert cfg["frf"]["mass_ratios"] == [0.33, 0.5, 0.67]
    with pytest.raises(ValueError):
        hl.normalize_config('{"bogus": 1}')


def test_validation_subset(tmp_path):
    rows = hl.run_validation(checks=[3, 11], out=str(tmp_path))
    assert [r["id"] for r in rows] == [3, 11]
    assert all(r["passed"] for r in rows)
