import math

import numpy as np
import pytest

from pdwsim.core import Seed
from pdwsim.emitters import TxPulse
from pdwsim.propagation import (
    BLOCKED,
    NoiseModel,
    RxGeometry,
    ScanPattern,
    path_loss_db,
    received_pdw,
    rx_gain_db,
    true_aoa,
)

NO_NOISE = NoiseModel()


def test_path_loss_reference_points():
    assert path_loss_db(1000.0, 1000.0) == pytest.approx(92.44, abs=1e-12)
    assert path_loss_db(1.0, 1.0) == pytest.approx(32.44 - 60.0, abs=1e-12)


def test_path_loss_doubling_distance():
    for d in (10.0, 1234.5, 9e5):
        delta = path_loss_db(2 * d, 777.0) - path_loss_db(d, 777.0)
        assert delta == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_path_loss_rejects_zero_distance():
    with pytest.raises(ValueError):
        path_loss_db(0.0, 1000.0)


def test_true_aoa_axes_and_quadrant():
    assert true_aoa((0, 0), (1, 0)) == pytest.approx(0.0)
    assert true_aoa((0, 0), (0, 1)) == pytest.approx(90.0)
    # two-argument arctangent oracle
    assert true_aoa((0, 0), (-1, -1)) == pytest.approx(
        math.degrees(math.atan2(-1, -1))) == pytest.approx(-135.0)


def test_true_aoa_rejects_coincident():
    with pytest.raises(ValueError):
        true_aoa((3.0, 4.0), (3.0, 4.0))


def test_rx_gain_examples():
    assert rx_gain_db(0.0, 0.0, 120.0, 10.0) == 10.0
    assert rx_gain_db(0.0, 90.0, 120.0, 10.0) is BLOCKED
    for aoa in (-180.0, -90.0, 0.0, 137.0, 180.0):
        assert rx_gain_db(45.0, aoa, 360.0, 10.0) == 10.0


def test_rx_gain_wraparound_offset():
    # offset computed on the circle, not the number line
    assert rx_gain_db(170.0, -170.0, 60.0, 5.0) == 5.0


def tx_at(freq=1000.0, power=0.0, t=0.0):
    return TxPulse(tx_time_us=t, tx_freq_mhz=freq, pw_us=1.0,
                   tx_power_dbm=power, emitter_id=0)


def rx_no_gain():
    return RxGeometry(position_m=(0.0, 0.0), fov_deg=360.0, mainlobe_gain_db=0.0)


def rng():
    return Seed(0).child("noise", 0).generator()


def test_delay_is_distance_over_c():
    pdw = received_pdw(tx_at(), (299_792.458, 0.0), rx_no_gain(), NO_NOISE, rng())
    assert pdw.toa_us == pytest.approx(1000.0, abs=1e-9)


def test_amplitude_drops_6db_when_distance_doubles():
    a1 = received_pdw(tx_at(), (5000.0, 0.0), rx_no_gain(), NO_NOISE, rng()).amp_db
    a2 = received_pdw(tx_at(), (10_000.0, 0.0), rx_no_gain(), NO_NOISE, rng()).amp_db
    assert a1 - a2 == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_amplitude_composes_path_loss_example():
    pdw = received_pdw(tx_at(freq=1000.0, power=0.0), (1000.0, 0.0),
                       rx_no_gain(), NO_NOISE, rng())
    assert pdw.amp_db == pytest.approx(-92.44, abs=1e-12)


def test_zero_noise_reproduces_truth_geometry():
    pos = (3000.0, -4000.0)
    a = received_pdw(tx_at(t=17.0), pos, rx_no_gain(), NO_NOISE, rng())
    b = received_pdw(tx_at(t=17.0), pos, rx_no_gain(), NO_NOISE, rng())
    assert a == b
    assert a.aoa_deg == true_aoa((0.0, 0.0), pos)
    assert a.toa_us == 17.0 + 5000.0 / 299.792458


def test_blocked_outside_fov():
    geom = RxGeometry(orientation_deg=0.0, fov_deg=90.0, mainlobe_gain_db=10.0)
    assert received_pdw(tx_at(), (0.0, 1000.0), geom, NO_NOISE, rng()) is BLOCKED
    assert received_pdw(tx_at(), (1000.0, 0.0), geom, NO_NOISE, rng()) is not BLOCKED


def test_amplitude_monotone_in_distance():
    amps = [received_pdw(tx_at(), (d, 0.0), rx_no_gain(), NO_NOISE, rng()).amp_db
            for d in np.linspace(100.0, 2e5, 50)]
    assert all(x >= y for x, y in zip(amps, amps[1:]))


def test_noisy_aoa_renormalized():
    noise = NoiseModel(sigma_aoa_deg=60.0)
    g = rng()
    for _ in range(200):
        pdw = received_pdw(tx_at(), (-1000.0, -1.0), rx_no_gain(), noise, g)
        assert -180.0 <= pdw.aoa_deg <= 180.0


def test_emitter_scan_modulates_amplitude():
    scan = ScanPattern(rotation_period_s=1.0, beamwidth_deg=10.0)
    amps = [received_pdw(tx_at(t=t), (1000.0, 0.0), rx_no_gain(), NO_NOISE, rng(),
                         scan=scan).amp_db
            for t in np.linspace(0.0, 1e6, 400, endpoint=False)]
    spread = max(amps) - min(amps)
    assert spread == pytest.approx(30.0, abs=1.0)  # mainlobe peak over sidelobe floor
