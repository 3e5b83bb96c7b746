import numpy as np
import pytest

from boselab.errors import IntegrationError, TimeRangeError, ValidationError
from boselab.experiments.profiles import make_profile
from boselab.nls import (
    energy,
    h2_norm,
    kinetic_energy,
    linf_ratio,
    mass,
    nls_evolve,
    omega_at,
    potential_energy,
    vector_field,
)
from boselab.space import Field, Grid, plane_wave


def smooth_field(m=16, length=1.0, seed=0):
    return make_profile(Grid(m, length), "random", {"kmax": 1}, mass=1.0, seed=seed)


def bump(m=16):
    return make_profile(Grid(m, 1.0), "gauss", {"velocity": 1.0})


def test_energy_of_zero_and_constant():
    grid = Grid(8, 1.0)
    assert energy(Field.zeros(grid)) == 0.0
    c = 0.7 + 0.4j
    const = Field(grid, np.full(8, c))
    for kind in ("finite_difference", "spectral"):
        assert energy(const, kind) == pytest.approx(0.5 * abs(c) ** 4, rel=1e-13)


def test_energy_matches_extended_precision_quadrature():
    # mpmath reference at 40 digits, finite-difference Laplacian
    m = 16
    j = np.arange(m)
    phi = Field(Grid(m, 1.0), np.cos(2 * np.pi * j / m) + j / (10.0 * m)
                + 0.3j * np.sin(4 * np.pi * j / m))
    assert energy(phi) == pytest.approx(26.351303497597502615, rel=1e-13)
    assert potential_energy(phi) == pytest.approx(0.20978955498884952616, rel=1e-13)
    assert energy(phi) == pytest.approx(kinetic_energy(phi) + potential_energy(phi), rel=1e-15)


def test_zero_data_stays_zero():
    traj = nls_evolve(Field.zeros(Grid(6)), 0.1, 1e-2)
    assert np.all(traj.fields == 0)
    assert np.all(traj.omega == 0)


def test_plane_wave_exact_solution():
    grid = Grid(8, 1.0)
    amp, k = 0.8, 2
    traj = nls_evolve(plane_wave(grid, k, amp), 1.0, 1e-3, "spectral", sample_dt=0.5)
    freq = (2 * np.pi * k / grid.length) ** 2 + amp ** 2
    exact = plane_wave(grid, k, amp).values * np.exp(-1j * freq * 1.0)
    np.testing.assert_allclose(traj.field(-1).values, exact, atol=1e-8)


def relative_drift(values):
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


@pytest.mark.parametrize("kind", ["finite_difference", "spectral"])
def test_mass_and_energy_conservation(kind):
    phi0 = bump()
    traj = nls_evolve(phi0, 1.0, 1e-4, kind, sample_dt=0.05)
    assert relative_drift(traj.masses) <= 1e-10
    assert relative_drift(traj.energies) <= 1e-6
    assert traj.masses[0] == pytest.approx(mass(phi0))


def test_energy_error_is_second_order_in_dt():
    # Strang splitting conserves a modified energy; the true energy oscillates
    # with amplitude O(dt^2), which at dt = 1e-3 is about 2e-5 for this data
    phi0 = bump()
    drifts = [relative_drift(nls_evolve(phi0, 2.0, dt, sample_dt=0.01).energies)
              for dt in (2e-3, 1e-3, 5e-4)]
    assert drifts[1] <= 1e-4
    for a, b in zip(drifts, drifts[1:]):
        assert 3.5 <= a / b <= 4.5


def test_omega_is_nondecreasing_from_zero():
    traj = nls_evolve(smooth_field(), 0.5, 1e-3, sample_dt=0.01)
    assert traj.omega[0] == 0.0
    assert np.all(np.diff(traj.omega) >= 0)
    assert omega_at(traj, 0.0) == 0.0


def test_omega_for_constant_data():
    c = 1.3
    traj = nls_evolve(Field(Grid(5), np.full(5, c)), 1.0, 1e-3, sample_dt=0.25)
    for t in (0.25, 0.6, 1.0):
        assert omega_at(traj, t) == pytest.approx(0.5 * c ** 4 * t, rel=1e-12)


def test_omega_step_doubling_is_second_order():
    phi0 = bump()
    w = [omega_at(nls_evolve(phi0, 1.0, dt, sample_dt=0.5), 1.0) for dt in (4e-3, 2e-3, 1e-3)]
    d1, d2 = abs(w[0] - w[1]), abs(w[1] - w[2])
    assert d2 < 2e-5
    assert 3.0 <= d1 / d2 <= 5.0


def test_time_reversal():
    phi0 = smooth_field(seed=3)
    fwd = nls_evolve(phi0, 0.5, 1e-3, sample_dt=0.5).field(-1)
    back = nls_evolve(fwd.conj(), 0.5, 1e-3, sample_dt=0.5).field(-1)
    np.testing.assert_allclose(back.values, np.conj(phi0.values), atol=1e-6)


def test_interpolation_hits_samples_and_is_fourth_order():
    phi0 = bump()
    fine = nls_evolve(phi0, 0.2, 1e-4)
    errs = []
    for sd in (0.004, 0.002, 0.001):
        coarse = nls_evolve(phi0, 0.2, 1e-4, sample_dt=sd)
        np.testing.assert_array_equal(coarse.field_at(0.1).values, fine.field(1000).values)
        t = 0.1 + sd / 2
        errs.append(np.max(np.abs(coarse.field_at(t).values - fine.field(int(round(t / 1e-4))).values)))
    assert errs[-1] < 2e-6
    assert errs[0] / errs[1] > 10 and errs[1] / errs[2] > 10


def test_vector_field_matches_finite_difference_in_time():
    phi0 = bump()
    dt = 1e-5
    traj = nls_evolve(phi0, 2 * dt, dt)
    deriv = (traj.fields[2] - traj.fields[0]) / (2 * dt)
    np.testing.assert_allclose(deriv, vector_field(traj.field(1)), atol=1e-6 * np.max(np.abs(deriv)))


def test_sup_norm_diagnostic_on_localized_data():
    grid = Grid(64, 1.0)
    for width in (0.03, 0.05, 0.08):
        phi = make_profile(grid, "gauss", {"width": width})
        assert linf_ratio(phi) <= 1.1
    assert np.isfinite(h2_norm(phi))


def test_validation_and_range_errors():
    phi0 = smooth_field()
    with pytest.raises(ValidationError):
        nls_evolve(phi0, 1.0, 0.0)
    with pytest.raises(ValidationError):
        nls_evolve(phi0, -1.0, 1e-3)
    with pytest.raises(ValidationError):
        nls_evolve(phi0, 1.0, 1e-3, sample_dt=0.0015)
    traj = nls_evolve(phi0, 0.1, 1e-2)
    with pytest.raises(TimeRangeError):
        omega_at(traj, 0.2)
    with pytest.raises(TimeRangeError):
        traj.field_at(-0.1)


def test_blow_up_is_reported():
    huge = Field(Grid(4), np.full(4, 1e160))
    with pytest.raises(IntegrationError) as info:
        nls_evolve(huge, 0.01, 1e-3)
    assert info.value.step == 1
