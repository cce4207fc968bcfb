import numpy as np
import pytest

from sharpkit import channel as ch
from sharpkit import linalg, monotones as mo, sdp
from sharpkit import povm as pv
from sharpkit import preorder as po
from conftest import I2, ZERO2


def up_down():
    return pv.validate([I2, ZERO2]), pv.validate([ZERO2, I2])


def assert_witness_ok(p, q, w):
    assert w.margin >= 1e-8
    assert w.rhs - w.lhs == pytest.approx(w.margin)
    z = w.reference
    for zx in z:
        assert linalg.min_eigenvalue(zx) >= 1e-6 * np.trace(zx).real / z.dim * (1 - 1e-6)
    # independent recomputation of both sides
    assert po.verify_witness(p, q, z) >= 1e-8


# preprocessing ---------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_sharp_is_preprocessing_cleaner(seed):
    rng = np.random.default_rng(seed)
    p = pv.random_sharp_povm(3, 2, rng)
    q = pv.random_povm(2, 2, rng)
    v = po.is_preprocessing_cleaner(p, q)
    assert v.status == po.FEASIBLE
    assert np.max(np.abs(v.transformation(p.elements) - q.elements)) < 1e-7
    assert v.transformation.is_unital()


def test_relabeling_not_preprocessing():
    a, b = up_down()
    assert po.is_preprocessing_cleaner(a, b).status == po.INFEASIBLE


def test_zero_element_blocks_preprocessing(rng):
    p = pv.validate([ZERO2, I2 / 2, I2 / 2])
    q = pv.random_povm(2, 3, rng)
    assert po.is_preprocessing_cleaner(p, q).status == po.INFEASIBLE


# postprocessing --------------------------------------------------------------------

def test_merge_doubled_basis():
    e = pv.computational_basis(2).elements
    doubled = pv.validate([e[0] / 2, e[0] / 2, e[1] / 2, e[1] / 2])
    v = po.is_postprocessing_cleaner(doubled, pv.computational_basis(2))
    assert v.status == po.FEASIBLE
    assert np.allclose(v.transformation, [[1, 1, 0, 0], [0, 0, 1, 1]], atol=1e-6)


def test_trivial_cannot_postprocess_to_basis():
    v = po.is_postprocessing_cleaner(pv.validate([I2 / 2, I2 / 2]), pv.computational_basis(2))
    assert v.status == po.INFEASIBLE


def test_postprocessing_reflexive(rng):
    p = pv.random_povm(2, 3, rng)
    v = po.is_postprocessing_cleaner(p, p)
    assert v.status == po.FEASIBLE
    assert np.allclose(v.transformation, np.eye(3), atol=1e-6)


# sharpness preorder ------------------------------------------------------------------

@pytest.mark.parametrize("eta", [0.2, 0.5, 0.9])
def test_basis_to_noisy(eta):
    p, q = pv.computational_basis(2), pv.noisy_basis(eta)
    direct = ch.FuzzifyingOperation(ch.identity_channel(2), eta, [0.5, 0.5])
    assert np.allclose(direct(p).elements, q.elements)
    v = po.is_sharper(p, q)
    assert v.status == po.CONVERTIBLE
    assert v.residual <= 1e-7
    assert np.linalg.norm(v.transformation(p).elements - q.elements) <= 1e-7


def test_relabeling_by_full_noise():
    a, b = up_down()
    v = po.is_sharper(a, b)
    assert v.status == po.CONVERTIBLE
    assert v.transformation.mu == pytest.approx(0, abs=1e-6)
    assert np.allclose(v.transformation.dist, [0, 1], atol=1e-6)


def test_noisy_not_sharper_than_basis():
    p, q = pv.noisy_basis(0.5), pv.computational_basis(2)
    v = po.is_sharper(p, q)
    assert v.status == po.NOT_CONVERTIBLE
    assert v.transformation is None
    assert_witness_ok(p, q, v.witness)


def test_witness_trivial_vs_basis():
    p, q = pv.validate([I2 / 2, I2 / 2]), pv.computational_basis(2)
    # the computational basis already separates: 1/2 < 1
    z = pv.computational_basis(2)
    assert mo.tuning_degree(p, z).value == pytest.approx(0.5, abs=1e-8)
    assert mo.uniform_correlation(q, z) == pytest.approx(1)
    v = po.is_sharper(p, q)
    assert v.status == po.NOT_CONVERTIBLE
    assert_witness_ok(p, q, v.witness)


def test_witness_between_noisy_bases():
    p, q = pv.noisy_basis(0.5), pv.noisy_basis(0.9)
    v = po.is_sharper(p, q)
    assert v.status == po.NOT_CONVERTIBLE
    assert_witness_ok(p, q, v.witness)


def test_extract_witness_precondition():
    p, q = pv.computational_basis(2), pv.noisy_basis(0.5)
    res = sdp.feasibility(po.sharper_problem(p, q), ["match0", "match1"])
    with pytest.raises(ValueError):
        po.extract_witness(p, q, res)


def test_witness_beta_closed_form(rng):
    g = np.array([linalg.random_density(3, rng) for _ in range(3)]) - np.eye(3) / 3
    g = g - g.mean(axis=0)
    beta = po.witness_beta(g)
    z = np.eye(3) / 3 + g / beta
    slack = [linalg.min_eigenvalue(zx) - 1e-6 * np.trace(zx).real / 3 for zx in z]
    assert min(slack) >= 0 and min(slack) < 1e-9
    # any smaller beta breaks the floor
    z = np.eye(3) / 3 + g / (0.99 * beta)
    assert min(linalg.min_eigenvalue(zx) - 1e-6 * np.trace(zx).real / 3 for zx in z) < 0


def test_outcome_mismatch():
    with pytest.raises(ValueError):
        po.is_sharper(pv.computational_basis(2), pv.computational_basis(3))


# tunability comparison -------------------------------------------------------------------

def test_convertible_never_violated(rng):
    p = pv.random_povm(2, 2, rng)
    q = ch.random_fuzzifying(2, 2, 2, rng)(p)
    ev = po.always_more_tunable(p, q, trials=5, seed=1)
    assert not ev.violation_found and ev.trials == 5


def test_trivial_violated_by_basis_reference():
    p, q = pv.validate([I2 / 2, I2 / 2]), pv.computational_basis(2)
    ev = po.always_more_tunable(p, q, references=[pv.computational_basis(2)])
    assert ev.violation_found
    assert ev.worst_gap == pytest.approx(0.5, abs=1e-7)


def test_tunability_reflexive(rng):
    p = pv.random_povm(3, 2, rng)
    assert not po.always_more_tunable(p, p, trials=4).violation_found


# properties ------------------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_transitivity(seed):
    rng = np.random.default_rng(seed)
    p = pv.random_povm(2, 2, rng)
    q = ch.random_fuzzifying(2, 3, 2, rng)(p)
    r = ch.random_fuzzifying(3, 2, 2, rng)(q)
    pq, qr, pr = po.is_sharper(p, q), po.is_sharper(q, r), po.is_sharper(p, r)
    assert pq.convertible and qr.convertible and pr.convertible
    both = ch.compose_fuzzifying(qr.transformation, pq.transformation)
    assert np.max(np.abs(both(p).elements - r.elements)) < 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_sharp_povms_equivalent(seed):
    rng = np.random.default_rng(seed)
    a = pv.random_sharp_povm(2, 2, rng)
    b = pv.random_sharp_povm(3, 2, rng)
    assert po.is_sharper(a, b).convertible and po.is_sharper(b, a).convertible


@pytest.mark.parametrize("seed", range(3))
def test_trivial_povms_equivalent(seed):
    rng = np.random.default_rng(seed)
    a = pv.random_trivial_povm(2, 3, rng)
    b = pv.random_trivial_povm(3, 3, rng)
    assert po.is_sharper(a, b).convertible and po.is_sharper(b, a).convertible


@pytest.mark.parametrize("seed", range(3))
def test_preprocessing_implies_sharper(seed):
    rng = np.random.default_rng(seed)
    p = pv.random_sharp_povm(2, 2, rng)
    q = pv.random_povm(2, 2, rng)
    assert po.is_preprocessing_cleaner(p, q).feasible
    assert po.is_sharper(p, q).convertible


@pytest.mark.parametrize("seed", range(4))
def test_blackwell_consistency(seed):
    rng = np.random.default_rng(seed)
    p = pv.random_povm(2, 3, rng)
    q = pv.random_povm(2, 3, rng)
    v = po.is_sharper(p, q)
    assert v.status in (po.CONVERTIBLE, po.NOT_CONVERTIBLE)
    if v.convertible:
        assert not po.always_more_tunable(p, q, trials=3, seed=seed).violation_found
    else:
        ev = po.always_more_tunable(p, q, references=[v.witness.reference])
        assert ev.violation_found and ev.worst_gap >= 1e-8
