import numpy as np
import pytest

from sharpkit import channel as ch
from sharpkit import linalg, monotones as mo
from sharpkit import povm as pv
from conftest import I2, SX, SY, bloch

ETAS = [0.1, 0.3, 0.5, 0.7, 0.9]


def x_basis():
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    return pv.validate([linalg.projector(plus), linalg.projector(minus)])


# correlations --------------------------------------------------------------------

def test_correlation_examples():
    z = pv.computational_basis(2)
    assert mo.degree_of_correlation(z, z, np.diag([1, 0])) == pytest.approx(1)
    assert mo.degree_of_correlation(z, x_basis(), I2 / 2) == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(5))
def test_uniform_state_always_joint(seed):
    rng = np.random.default_rng(seed)
    p, z = pv.random_povm(3, 3, rng), pv.random_povm(3, 3, rng)
    value = mo.degree_of_correlation(p, z, np.eye(3) / 3)
    assert value is not None
    assert value == pytest.approx(mo.uniform_correlation(p, z), abs=1e-12)


def test_not_jointly_distributed():
    # Tr[|0><0| |+i><+i| |+><+|] = (1 + i) / 4 is not a probability
    y_basis = pv.validate(bloch(1.0, axis=SY))
    assert mo.degree_of_correlation(pv.computational_basis(2), y_basis, (I2 + SX) / 2) is None


def test_uniform_correlation_examples(rng):
    z = pv.computational_basis(2)
    assert mo.uniform_correlation(z, z) == pytest.approx(1)
    assert mo.uniform_correlation(pv.validate([I2 / 2, I2 / 2]), pv.random_povm(2, 2, rng)) == pytest.approx(0.5)
    assert mo.uniform_correlation(pv.noisy_basis(0.5), pv.noisy_basis(0.5)) == pytest.approx(0.625)


def test_uniform_correlation_shape_errors():
    with pytest.raises(ValueError):
        mo.uniform_correlation(pv.computational_basis(2), pv.computational_basis(3))


# guessing ------------------------------------------------------------------------------

def test_guessing_basis():
    assert mo.optimal_guessing(pv.computational_basis(3)).value == pytest.approx(1, abs=1e-8)


def test_guessing_trivial():
    assert mo.optimal_guessing(pv.validate([I2 / 2, I2 / 2])).value == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("eta", ETAS)
def test_guessing_helstrom(eta):
    rep = mo.optimal_guessing(pv.noisy_basis(eta))
    assert rep.value == pytest.approx((1 + eta) / 2, abs=1e-6)
    assert rep.gap <= 1e-8
    for zx in pv.noisy_basis(eta):
        assert linalg.is_psd(rep.certificate - zx, 1e-7)
    assert np.trace(rep.certificate).real / 2 == pytest.approx(rep.dual_value, abs=1e-9)


# tuning degree --------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("dr", [2, 3])
def test_sharp_reaches_guessing(seed, dr):
    rng = np.random.default_rng(seed)
    p = pv.random_sharp_povm(2, 2, rng)
    z = pv.random_povm(dr, 2, rng)
    assert mo.tuning_degree(p, z).value == pytest.approx(mo.optimal_guessing(z).value, abs=1e-7)


@pytest.mark.parametrize("seed", range(4))
def test_trivial_tuning_formula(seed):
    rng = np.random.default_rng(seed)
    t = pv.random_trivial_povm(2, 3, rng)
    z = pv.random_povm(3, 3, rng)
    expected = max(np.trace(zx).real for zx in z) / 3
    assert mo.tuning_degree(t, z).value == pytest.approx(expected, abs=1e-7)
    assert mo.trivial_tuning_degree(z) == pytest.approx(expected)


@pytest.mark.parametrize("eta", ETAS)
def test_noisy_basis_tuning(eta):
    rep = mo.tuning_degree(pv.noisy_basis(eta), pv.computational_basis(2))
    assert rep.value == pytest.approx((1 + eta) / 2, abs=1e-6)
    # the optimizer reproduces the value
    out = rep.optimizer(pv.noisy_basis(eta))
    assert mo.uniform_correlation(out, pv.computational_basis(2)) == pytest.approx(rep.value, abs=1e-7)


def test_tuning_optimizer_degenerate_mu():
    rep = mo.tuning_degree(pv.validate([I2 / 2, I2 / 2]), pv.noisy_basis(0.4))
    assert 0 <= rep.optimizer.mu <= 1
    assert rep.optimizer.channel.is_unital()


def test_report_bounds_enforced():
    with pytest.raises(linalg.SolverFailure):
        mo.TuningReport(0.2, ch.identity_fuzzifying(2, 2), pv.computational_basis(2), 0.0, lower=0.5, upper=1.0)


# autotuning ---------------------------------------------------------------------------

def test_autotuning_examples():
    assert mo.autotuning(pv.computational_basis(2)) == pytest.approx(1, abs=1e-8)
    assert mo.autotuning(pv.validate([I2 / 2, I2 / 2])) == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("seed", range(6))
def test_pgm_sandwich(seed):
    p = pv.random_povm(2 + seed % 2, 2 + seed % 3, seed)
    auto, corr = mo.autotuning(p), mo.uniform_correlation(p, p)
    assert auto >= corr - 1e-7
    assert corr >= 2 * auto - 1 - 1e-7


# robustness -----------------------------------------------------------------------------

def test_measurement_robustness_examples(rng):
    assert mo.measurement_robustness(pv.random_trivial_povm(3, 3, rng)) == pytest.approx(0, abs=1e-7)
    assert mo.measurement_robustness(pv.computational_basis(3)) == pytest.approx(2, abs=1e-7)
    assert mo.measurement_robustness(pv.noisy_basis(0.5)) == pytest.approx(0.5, abs=1e-7)


@pytest.mark.parametrize("seed", range(4))
def test_robustness_upper_bound_convex(seed):
    rng = np.random.default_rng(seed)
    p1, p2 = pv.random_povm(3, 3, rng), pv.random_povm(3, 3, rng)
    a = rng.uniform()
    upper = [mo.tunability_robustness(p, refs=0, seesaw=0).upper for p in (p1, p2, pv.mix(p1, p2, a))]
    assert upper[2] <= a * upper[0] + (1 - a) * upper[1] + 1e-7


def test_tunability_trivial():
    rep = mo.tunability_robustness(pv.random_trivial_povm(2, 3, 1), refs=1)
    assert rep.lower == pytest.approx(0, abs=1e-6) and rep.upper == pytest.approx(0, abs=1e-6)
    assert rep.exact


@pytest.mark.parametrize("d", [2, 3])
def test_tunability_sharp_basis(d):
    rep = mo.tunability_robustness(pv.computational_basis(d), refs=1)
    assert rep.lower == pytest.approx(d - 1, abs=1e-6) and rep.upper == pytest.approx(d - 1, abs=1e-6)


def test_tunability_noisy_basis():
    rep = mo.tunability_robustness(pv.noisy_basis(0.5), refs=1)
    assert rep.lower == pytest.approx(0.5, abs=1e-6) and rep.upper == pytest.approx(0.5, abs=1e-6)
    # canonical reference: 2 * 0.75 / 1 - 1
    ratio, _ = mo.tuning_ratio(pv.noisy_basis(0.5), pv.computational_basis(2))
    assert ratio - 1 == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_tunability_interval_ordered(seed):
    p = pv.random_povm(2 + seed % 2, 3, seed)
    rep = mo.tunability_robustness(p, refs=2, seed=seed)
    assert 0 <= rep.lower <= rep.upper <= p.outcomes - 1 + 1e-7
    assert set(rep.methods) == {"lower", "upper"}


@pytest.mark.parametrize("seed", range(3))
def test_monotones_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    p, z = pv.random_povm(2, 3, rng), pv.random_povm(3, 3, rng)
    for v in (mo.tuning_degree(p, z).value, mo.optimal_guessing(z).value, mo.autotuning(p)):
        assert -1e-9 <= v <= 1 + 1e-9
