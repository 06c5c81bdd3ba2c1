import numpy as np
import pytest

from memcaprc.characterize import warmup_cycles, cv_sweep, ppf_map, qv_sweep, steady_cv, sweep_rows, write_long_csv
from memcaprc.device import STANDARD_COMPOSITIONS
from memcaprc.dynamics import steady_state
from memcaprc.errors import DomainError


def test_sweep_grid_and_shapes(ledger):
    r = cv_sweep(ledger.memcapacitor("0-0"), step=0.01)
    assert r.grid.shape == r.up.shape == r.down.shape == (41,)
    assert np.all(np.diff(r.grid) > 0)
    assert np.all(r.up > 0) and np.all(r.down > 0)


def test_symmetric_device(ledger):
    dev = ledger.memcapacitor("0-0")
    assert qv_sweep(dev).pinch_voltage == pytest.approx(0.0, abs=1e-12)
    c = cv_sweep(dev)
    assert c.minimum_voltage == pytest.approx(0.0, abs=1e-12)
    assert abs(c.lobe_area) < 1e-3 * c.hysteresis


def test_pinch_at_negative_offset(ledger):
    dev = ledger.memcapacitor("0-100")
    assert qv_sweep(dev).pinch_voltage == pytest.approx(-0.138, abs=1e-3)


def test_minimum_of_asymmetric_device(ledger):
    c = cv_sweep(ledger.memcapacitor("100-0"))
    assert c.minimum_voltage == pytest.approx(0.138, abs=5e-3)


def test_lobe_rotation(ledger):
    wide = (-0.25, 0.25)
    assert cv_sweep(ledger.memcapacitor("0-80"), wide).lobe_area > 0
    assert cv_sweep(ledger.memcapacitor("100-0"), wide).lobe_area < 0


@pytest.mark.parametrize("label", ["0-80", "100-0"])
def test_lobe_shrinks_off_resonance(ledger, label):
    dev = ledger.memcapacitor(label)
    mid = cv_sweep(dev, (-0.25, 0.25), freq=0.05).lobe_area
    assert abs(cv_sweep(dev, (-0.25, 0.25), freq=10.0, step=2e-3).lobe_area) < abs(mid)
    assert abs(cv_sweep(dev, (-0.25, 0.25), freq=1e-3, step=5e-3).lobe_area) < abs(mid)


def test_default_warmup_reaches_periodic_cycle(ledger):
    dev = ledger.memcapacitor("100-0")
    a = cv_sweep(dev, freq=10.0, step=5e-3)
    b = cv_sweep(dev, freq=10.0, step=5e-3, warmup=3 * warmup_cycles(dev, 10.0))
    np.testing.assert_allclose(a.up, b.up, rtol=1e-4)


@pytest.mark.parametrize("pair", [("0-80", "80-0"), ("0-20", "20-0"), ("0-100", "100-0")])
def test_mirror_sweeps(ledger, pair):
    a = cv_sweep(ledger.memcapacitor(pair[0]), step=0.01)
    b = cv_sweep(ledger.memcapacitor(pair[1]), step=0.01)
    # reversing the voltage axis maps the rising branch of one onto the falling branch of the other
    np.testing.assert_allclose(a.up, b.down[::-1], rtol=1e-12)
    np.testing.assert_allclose(a.down, b.up[::-1], rtol=1e-12)


def test_pinch_all_compositions(ledger):
    for comp in STANDARD_COMPOSITIONS:
        dev = ledger.memcapacitor(comp)
        assert abs(qv_sweep(dev).pinch_voltage + dev.v_phi) <= 1e-3 + 1e-12


def test_ppf_map(ledger):
    dev = ledger.memcapacitor("0-0")
    pd = [0.005, 0.02, 0.1, 0.5, 2.0]
    m = ppf_map(dev, pd, [0.25])
    assert m.shape == (5, 1)
    assert np.all(m >= 0)
    peak = int(np.argmax(np.abs(m[:, 0])))
    assert 0 < peak < len(pd) - 1
    far = ppf_map(dev, [30.0], [40.0])
    assert abs(far[0, 0]) < 0.05
    with pytest.raises(DomainError):
        ppf_map(dev, [], [0.1])


def test_steady_cv(ledger):
    dev = ledger.memcapacitor("100-0")
    v = np.array([-0.1, 0.138, 0.3])
    c = steady_cv(dev, v)
    assert c[1] == pytest.approx(dev.params.resting_capacitance, rel=1e-9)
    assert c[1] < c[0] and c[1] < c[2]
    assert c[2] == steady_state(dev.params, 0.3 + dev.v_phi).C_inf


def test_long_csv(tmp_path, ledger):
    r = qv_sweep(ledger.memcapacitor("0-0"), step=0.05)
    rows = list(sweep_rows("0-0", r))
    assert len(rows) == 2 * r.grid.size
    write_long_csv(tmp_path / "x.csv", rows, ("device", "quantity", "freq", "branch", "v", "value"))
    text = (tmp_path / "x.csv").read_text().splitlines()
    assert text[0] == "device,quantity,freq,branch,v,value" and len(text) == len(rows) + 1


def test_sweep_validation(ledger):
    dev = ledger.memcapacitor("0-0")
    with pytest.raises(DomainError):
        cv_sweep(dev, freq=0.0)
    with pytest.raises(DomainError):
        cv_sweep(dev, v_range=(0.2, -0.2))
