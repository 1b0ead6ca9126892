import math

import numpy as np
import pytest

from openchain import oracle
from openchain.model import (
    BulkKind,
    ChainModel,
    FermionicDrive,
    FermionicReservoir,
    LindbladDrive,
    LindbladReservoir,
    ModelError,
    QuadratureSpec,
)
from openchain.transport import (
    CouplingMatrices,
    CurrentResult,
    bounding_current,
    conductance_finite_temperature,
    conductance_high_temperature,
    current_dissipative_chain,
    current_free_fermionic,
    current_free_lindblad,
    current_lindblad_generic,
    current_meir_wingreen,
    fermi,
    map_fermionic_to_lindblad,
    occupation_fermionic,
    occupation_lindblad,
    transmission,
)

TIGHT = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)


def lind(al, bl, ar, br):
    return LindbladDrive(LindbladReservoir(al, bl), LindbladReservoir(ar, br))


def antisym(delta, dmu):
    return lind((delta + dmu) / 2, (delta - dmu) / 2,
                (delta - dmu) / 2, (delta + dmu) / 2)


def ferm(delta, mu_l, mu_r, t):
    return FermionicDrive(FermionicReservoir(delta, mu_l, t),
                          FermionicReservoir(delta, mu_r, t))


# ----------------------------------------------------------------- fermi

def test_fermi_values():
    r = FermionicReservoir(delta=1.0, mu=0.3, temperature=0.5)
    assert fermi(0.3, r) == pytest.approx(0.5)
    assert fermi(0.3 + 2 * 0.5, r) == pytest.approx(1 / (1 + math.e ** 2))
    r0 = FermionicReservoir(delta=1.0, mu=0.3, temperature=0.0)
    assert fermi(0.0, r0) == 1.0
    assert fermi(1.0, r0) == 0.0
    assert fermi(0.3, r0) == 0.5


def test_fermi_overflow_guarded():
    r = FermionicReservoir(delta=1.0, mu=0.0, temperature=1e-3)
    assert fermi(1e16, r) == 0.0
    assert fermi(-1e16, r) == 1.0


# --------------------------------------------------------------- mapping

def test_mapping_symmetric_point():
    m = map_fermionic_to_lindblad(FermionicReservoir(1.0, 0.0, 1.0))
    assert m.alpha == pytest.approx(0.5)
    assert m.beta == pytest.approx(0.5)


def test_mapping_saturated_limit():
    m = map_fermionic_to_lindblad(FermionicReservoir(2.0, 1000.0, 1.0))
    assert m.alpha == pytest.approx(2.0)
    assert m.beta == pytest.approx(0.0, abs=1e-12)
    m0 = map_fermionic_to_lindblad(FermionicReservoir(2.0, 0.4, 0.0))
    assert (m0.alpha, m0.beta) == (2.0, 0.0)
    m0 = map_fermionic_to_lindblad(FermionicReservoir(2.0, 0.0, 0.0))
    assert m0.alpha == m0.beta == 1.0


def test_mapping_width_exact_and_invertible():
    rng = np.random.RandomState(3)
    for _ in range(50):
        delta = rng.uniform(0.1, 3.0)
        mu = rng.uniform(-2, 2)
        t = rng.uniform(0.05, 3.0)
        m = map_fermionic_to_lindblad(FermionicReservoir(delta, mu, t))
        # beta is defined as delta - alpha: the width survives to the last bit
        assert m.alpha + m.beta == pytest.approx(delta, rel=4e-16, abs=0.0)
        recovered = 2.0 * math.atanh((m.alpha - m.beta) / (m.alpha + m.beta))
        assert recovered == pytest.approx(mu / t, rel=1e-9)


# ----------------------------------------------------------- occupations

def test_occupation_lindblad_values():
    assert occupation_lindblad(LindbladReservoir(0.3, 0.7)) == pytest.approx(0.3)
    assert occupation_lindblad(LindbladReservoir(1.3, 1.3)) == pytest.approx(0.5)


def test_occupation_lindblad_matches_oracle_single_site():
    model = ChainModel(n_sites=1)
    drive = lind(0.3, 0.7, 0.3, 0.7)
    state = oracle.solve(model, drive)
    assert state.occupations[0] == pytest.approx(
        occupation_lindblad(LindbladReservoir(0.3, 0.7)), abs=1e-10)


def test_occupation_fermionic_particle_hole_symmetric():
    res = FermionicReservoir(delta=0.01, mu=0.0, temperature=0.7)
    assert occupation_fermionic(res, eps0=0.0) == pytest.approx(0.5, abs=1e-10)


def test_occupation_fermionic_weak_coupling_fermi_dirac():
    res = FermionicReservoir(delta=1e-6, mu=0.0, temperature=1.0)
    assert occupation_fermionic(res, eps0=1.0) == pytest.approx(
        1 / (1 + math.e), abs=1e-4)


def test_occupation_fermionic_markovian_limit():
    res = FermionicReservoir(delta=1.0, mu=1e3, temperature=1e3)
    mapped = map_fermionic_to_lindblad(res)
    assert occupation_fermionic(res, eps0=0.3) == pytest.approx(
        occupation_lindblad(mapped), abs=1e-3)


def test_occupation_fermionic_t0_arctan_primitive():
    # sharp Fermi step: n = 1/2 + arctan((mu - eps0)/Delta)/pi
    res = FermionicReservoir(delta=0.01, mu=0.5, temperature=0.0)
    expected = 0.5 + math.atan((0.5 - 0.0) / 0.01) / math.pi
    assert occupation_fermionic(res, eps0=0.0) == pytest.approx(expected, rel=1e-10)


# ------------------------------------------------- generic Lindblad current

def test_generic_single_site_rate_formula():
    res = current_lindblad_generic(ChainModel(n_sites=1), lind(1, 0, 0, 1))
    assert res.j_through == pytest.approx(1.0, abs=1e-10)
    assert res.j_dissipative == pytest.approx(0.0, abs=1e-10)


def test_generic_unbiased_drive_carries_nothing():
    res = current_lindblad_generic(ChainModel(n_sites=3), lind(0.4, 0.6, 0.4, 0.6))
    assert res.j_through == pytest.approx(0.0, abs=1e-11)
    assert res.j_dissipative == pytest.approx(0.0, abs=1e-11)


def test_generic_matches_oracle_n3():
    model = ChainModel(n_sites=3)
    drive = antisym(2.0, 0.5)
    exact = oracle.solve(model, drive)
    res = current_lindblad_generic(model, drive)
    assert res.j_through == pytest.approx(exact.currents.j_through, abs=1e-8)


def test_generic_rejects_fermionic_drive():
    with pytest.raises(ModelError):
        current_lindblad_generic(ChainModel(n_sites=2), ferm(1.0, 0.5, -0.5, 1.0))


def test_generic_level_position_erased():
    # Lindblad drive makes J independent of a global onsite shift
    drive = lind(0.9, 0.2, 0.3, 0.7)
    base = current_lindblad_generic(ChainModel(n_sites=3), drive).j_through
    for shift in (-5.0, 2.5, 5.0):
        model = ChainModel(n_sites=3, onsite=(shift,) * 3)
        shifted = current_lindblad_generic(model, drive).j_through
        assert shifted == pytest.approx(base, abs=1e-10)


def test_generic_conservation_for_random_drives():
    rng = np.random.RandomState(11)
    for _ in range(5):
        al, bl, ar, br = rng.uniform(0.05, 1.5, 4)
        res = current_lindblad_generic(ChainModel(n_sites=2), lind(al, bl, ar, br))
        assert abs(res.j_dissipative) < 1e-9


# ------------------------------------------------------- free-chain currents

def test_free_lindblad_size_independent():
    drive = lind(0.75, 0.25, 0.25, 0.75)  # widths 1, bias 0.5
    expected = 0.5 / (1.0 * (1.0 + 1.0))
    values = [current_free_lindblad(ChainModel(n_sites=n), drive)
              for n in (2, 5, 9, 17, 30)]
    for v in values:
        assert v == pytest.approx(expected, rel=1e-9)
    assert max(values) - min(values) < 1e-9


def test_free_lindblad_quarter_value():
    # alpha_L beta_R - beta_L alpha_R = 0.5625 - 0.0625 = 0.5; J = 0.5/2 = 0.25
    j = current_free_lindblad(ChainModel(n_sites=4), lind(0.75, 0.25, 0.25, 0.75))
    assert j == pytest.approx(0.25, rel=1e-9)


def test_free_lindblad_equals_generic():
    model = ChainModel(n_sites=5)
    drive = lind(0.9, 0.4, 0.2, 0.6)
    assert current_free_lindblad(model, drive, TIGHT) == pytest.approx(
        current_lindblad_generic(model, drive, TIGHT).j_through, abs=1e-10)


def test_free_lindblad_linear_in_bias():
    # J at fixed widths is exactly proportional to alpha_L beta_R - beta_L alpha_R
    model = ChainModel(n_sites=4)
    # balanced rates: zero bias carries zero current at finite widths
    assert current_free_lindblad(model, lind(0.5, 0.5, 0.3, 0.3), TIGHT) == \
        pytest.approx(0.0, abs=1e-12)
    slopes = []
    for x in (0.1, 0.25, 0.4):  # antisymmetric tilt at fixed widths (1, 1)
        drive = lind(0.5 + x, 0.5 - x, 0.5 - x, 0.5 + x)
        bias = (0.5 + x) ** 2 - (0.5 - x) ** 2
        slopes.append(current_free_lindblad(model, drive, TIGHT) / bias)
    assert slopes[0] == pytest.approx(slopes[1], rel=1e-10)
    assert slopes[1] == pytest.approx(slopes[2], rel=1e-10)


def test_free_fermionic_zero_bias():
    assert current_free_fermionic(ChainModel(n_sites=3),
                                  ferm(0.8, 0.2, 0.2, 0.5)) == pytest.approx(0.0, abs=1e-12)


def test_free_fermionic_single_site_breit_wigner():
    # against direct quadrature of the explicit single-site integrand
    from openchain.quadrature import integrate_unbounded
    drive = ferm(0.6, 0.4, -0.1, 0.3)
    j = current_free_fermionic(ChainModel(n_sites=1), drive, TIGHT)

    def explicit(e):
        fl = 1 / (1 + math.exp(min(60, max(-60, (e - 0.4) / 0.3))))
        fr = 1 / (1 + math.exp(min(60, max(-60, (e + 0.1) / 0.3))))
        return 4 * 0.6 * 0.6 * (fl - fr) / (e * e + (1.2) ** 2)

    ref, _ = integrate_unbounded(explicit, TIGHT, scale=2.0)
    assert j == pytest.approx(ref / (2 * math.pi), rel=1e-9)


def test_free_rejects_bulk_dissipation():
    lossy = ChainModel(n_sites=3, bulk_rate=0.2, bulk_kind=BulkKind.LOSS)
    with pytest.raises(ModelError):
        current_free_lindblad(lossy, lind(1, 0, 0, 1))
    with pytest.raises(ModelError):
        current_free_fermionic(lossy, ferm(1.0, 0.5, -0.5, 0.5))
    with pytest.raises(ModelError):
        current_meir_wingreen(lossy, ferm(1.0, 0.5, -0.5, 0.5))


def test_mapping_commutes_with_transport():
    # scaled fermionic drives converge to the mapped Lindblad current
    model = ChainModel(n_sites=3)
    mapped = LindbladDrive(
        map_fermionic_to_lindblad(FermionicReservoir(1.0, 0.3, 1.0)),
        map_fermionic_to_lindblad(FermionicReservoir(1.0, -0.3, 1.0)))
    target = current_free_lindblad(model, mapped, TIGHT)
    errs = []
    for lam in (1e2, 1e3):
        drive = ferm(1.0, 0.3 * lam, -0.3 * lam, lam)
        errs.append(abs(current_free_fermionic(model, drive, TIGHT) - target))
    assert errs[1] < errs[0]
    assert errs[1] < 1e-3 * abs(target)


# ---------------------------------------------------------- Meir-Wingreen

def test_mw_equal_reservoirs_zero():
    assert current_meir_wingreen(ChainModel(n_sites=2),
                                 ferm(0.7, 0.2, 0.2, 0.4)) == pytest.approx(0.0, abs=1e-12)


def test_mw_single_site_lorentzian_primitive():
    # T = 0 with the window capped at +-M: J = (2 Delta / pi) arctan(M / 2Delta)
    delta, m_cap = 0.5, 50.0
    drive = ferm(delta, m_cap, -m_cap, 0.0)
    j = current_meir_wingreen(ChainModel(n_sites=1), drive, TIGHT)
    expected = (2 * delta / math.pi) * math.atan(m_cap / (2 * delta)) / 2 * 2
    assert j == pytest.approx(expected, rel=1e-9)
    assert j == pytest.approx(delta, rel=2e-2)  # approaches 2 D_L D_R/(D_L+D_R)


def test_mw_equals_landauer_asymmetric():
    model = ChainModel(n_sites=4)
    drive = FermionicDrive(FermionicReservoir(0.5, 0.2, 0.05),
                           FermionicReservoir(0.5, -0.2, 0.05))
    a = current_meir_wingreen(model, drive, TIGHT)
    b = current_free_fermionic(model, drive, TIGHT)
    assert a == pytest.approx(b, abs=1e-10)


# ------------------------------------------------------- dissipative chain

def test_dissipative_reduces_to_free_at_zero_rate():
    model = ChainModel(n_sites=4)
    drive = antisym(1.0, 0.4)
    res = current_dissipative_chain(model, drive, TIGHT)
    assert res.j_dissipative == 0.0
    assert res.j_through == pytest.approx(
        current_free_lindblad(model, drive, TIGHT), abs=1e-11)


def test_dissipative_equals_generic_with_loss():
    model = ChainModel(n_sites=5, bulk_rate=0.7, bulk_kind=BulkKind.LOSS)
    drive = antisym(1.0, 0.4)
    a = current_dissipative_chain(model, drive, TIGHT)
    b = current_lindblad_generic(model, drive, TIGHT)
    assert a.j_through == pytest.approx(b.j_through, abs=1e-10)
    assert a.j_dissipative == pytest.approx(b.j_dissipative, abs=1e-10)


def test_dissipative_large_rate_limits():
    model = ChainModel(n_sites=5, bulk_rate=1e3, bulk_kind=BulkKind.LOSS)
    res = current_dissipative_chain(model, antisym(1.0, 0.4))
    assert abs(res.j_through - 0.4) / 0.4 < 0.01
    assert abs(res.j_dissipative - 2.0) / 2.0 < 0.01


def test_dissipative_loss_gain_structure():
    drive = antisym(1.0, 0.4)
    loss = ChainModel(n_sites=4, bulk_rate=0.5, bulk_kind=BulkKind.LOSS)
    gain = ChainModel(n_sites=4, bulk_rate=0.5, bulk_kind=BulkKind.GAIN)
    rl = current_dissipative_chain(loss, drive, TIGHT)
    rg = current_dissipative_chain(gain, drive, TIGHT)
    assert rl.j_through == pytest.approx(rg.j_through, abs=1e-12)
    assert rl.j_dissipative == pytest.approx(-rg.j_dissipative, abs=1e-12)
    assert rl.j_dissipative > 0  # losses drain particles


def test_dissipative_falls_back_on_asymmetric_drive():
    model = ChainModel(n_sites=3, bulk_rate=0.4, bulk_kind=BulkKind.LOSS)
    drive = lind(0.9, 0.1, 0.3, 0.4)  # widths differ
    with pytest.warns(UserWarning, match="generic"):
        res = current_dissipative_chain(model, drive)
    ref = current_lindblad_generic(model, drive)
    assert res.j_through == pytest.approx(ref.j_through, abs=1e-12)


def test_dissipative_matches_oracle_loss_and_gain():
    drive = antisym(1.0, 0.5)
    for kind in (BulkKind.LOSS, BulkKind.GAIN):
        model = ChainModel(n_sites=3, bulk_rate=0.6, bulk_kind=kind)
        exact = oracle.solve(model, drive)
        res = current_dissipative_chain(model, drive)
        assert res.j_through == pytest.approx(exact.currents.j_through, abs=1e-8)
        assert res.j_dissipative == pytest.approx(exact.currents.j_dissipative, abs=1e-8)


def test_dissipative_current_scales_with_edge_width():
    # the closed form J_D = 4 Delta nu int sum_j |G_1j|^2 carries the edge
    # width Delta; the exact solver at Delta != 1 confirms that prefactor
    # (a width-free variant would be off by exactly Delta)
    delta = 0.5
    model = ChainModel(n_sites=3, bulk_rate=0.6, bulk_kind=BulkKind.LOSS)
    drive = antisym(delta, 0.2)
    exact = oracle.solve(model, drive)
    res = current_dissipative_chain(model, drive, TIGHT)
    assert res.j_dissipative == pytest.approx(exact.currents.j_dissipative, abs=1e-8)
    width_free_variant = res.j_dissipative / delta
    assert abs(width_free_variant - exact.currents.j_dissipative) > 0.1 * abs(
        exact.currents.j_dissipative)


# ----------------------------------------------------------- conductances

def test_high_temperature_tg_is_temperature_free():
    model = ChainModel(n_sites=3)
    g1 = conductance_high_temperature(model, 0.5, 1.0)
    g2 = conductance_high_temperature(model, 0.5, 7.3)
    assert 1.0 * g1 == pytest.approx(7.3 * g2, rel=1e-12)


def test_high_temperature_single_site_analytic():
    # T*g = (1/4) * int deps/2pi 4 D^2/(e^2+(2D)^2) = D/4
    for delta in (0.3, 1.0):
        g = conductance_high_temperature(ChainModel(n_sites=1), delta, 2.0)
        assert 2.0 * g == pytest.approx(delta / 4.0, rel=1e-10)


def test_lindblad_current_proportional_to_high_t_conductance():
    # J_free = c * T * g with c = 4 (aL bR - bL aR)/(D_L D_R); the printed
    # prefactor (aL bR - bL aR)/(4 D_L D_R) is 16x smaller than the one the
    # free-current and conductance formulas actually imply.
    delta = 0.8
    drive = lind(0.5, 0.3, 0.2, 0.6)
    bias = 0.5 * 0.6 - 0.3 * 0.2
    for n in (2, 5):
        model = ChainModel(n_sites=n)
        j = current_free_lindblad(model, drive, TIGHT)
        tg = 3.7 * conductance_high_temperature(model, delta, 3.7, TIGHT)
        c_derived = 4.0 * bias / (delta * delta)
        assert j == pytest.approx(c_derived * tg, rel=1e-10)
        c_printed = bias / (4.0 * delta * delta)
        assert c_derived / c_printed == pytest.approx(16.0, rel=1e-14)


def test_finite_temperature_even_odd_transmission():
    for n in range(2, 10):
        res = FermionicReservoir(delta=0.1, mu=0.0, temperature=0.0)
        g = conductance_finite_temperature(ChainModel(n_sites=n),
                                           FermionicDrive(res, res))
        if n % 2:
            assert g > 0.9
        else:
            assert g < 0.5


def test_finite_temperature_approaches_high_t():
    model = ChainModel(n_sites=3)
    t = 200.0
    res = FermionicReservoir(delta=0.5, mu=0.0, temperature=t)
    g_f = conductance_finite_temperature(model, FermionicDrive(res, res), TIGHT)
    g_h = conductance_high_temperature(model, 0.5, t, TIGHT)
    assert t * g_f == pytest.approx(t * g_h, rel=1e-3)


def test_transmission_at_resonance_odd_chain():
    assert transmission(ChainModel(n_sites=3), (0.1, 0.1), 0.0) == pytest.approx(1.0)


# ------------------------------------------------------- bounding integrals

def test_bounding_current_full_band_value():
    # T = 0 with both Fermi levels outside the band: J_1 = 2/pi, J_3 = 4/(3 pi)
    drive = ferm(1.0, 3.0, -3.0, 0.0)
    assert bounding_current(drive, 1) == pytest.approx(2 / math.pi, rel=1e-10)
    assert bounding_current(drive, 3) == pytest.approx(4 / (3 * math.pi), rel=1e-10)


def test_bounds_bracket_long_chain_current():
    drive = ferm(1.0, 0.3, -0.3, 0.5)
    j = current_free_fermionic(ChainModel(n_sites=24), drive, TIGHT)
    j1 = bounding_current(drive, 1)
    j3 = bounding_current(drive, 3)
    assert j3 < j < j1


# ------------------------------------------------------------ result types

def test_current_result_linear_relations():
    r = CurrentResult(j_left=0.7, j_right=0.3)
    assert r.j_through == pytest.approx(0.5)
    assert r.j_dissipative == pytest.approx(0.4)
    r2 = CurrentResult.from_through_dissipative(0.5, 0.4)
    assert r2.j_left == pytest.approx(0.7)
    assert r2.j_right == pytest.approx(0.3)


def test_coupling_matrices_trace():
    cm = CouplingMatrices.build(4, (0.3, 0.8))
    assert np.trace(cm.big_gamma_l) == pytest.approx(2 * 0.3)
    assert np.trace(cm.big_gamma_r) == pytest.approx(2 * 0.8)
    assert np.trace(cm.gamma_l) == np.trace(cm.gamma_r) == 2.0
