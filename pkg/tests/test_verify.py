import numpy as np
import pytest

from sharpkit import monotones as mo
from sharpkit import preorder as po
from sharpkit import verify


def test_endpoints_suite():
    rep = verify.run_suite("endpoints", 6, seed=3)
    assert rep.passed and rep.trials == 6 and rep.runtime > 0


@pytest.mark.parametrize("name", ["monotone", "corollary_bounds", "pgm_sandwich", "lpsr_roundtrip",
                                  "theorem1_construction", "robustness", "blackwell"])
def test_suites_pass_small(name):
    rep = verify.run_suite(name, 4, seed=11)
    assert rep.passed, rep.failures


def test_blackwell_planted_convertible():
    for seed in range(3):
        p, q, truth = verify.plant_instance("convertible", (2, 2, 2), seed)
        assert truth == "convertible"
        assert po.is_sharper(p, q).convertible


def test_planted_not_convertible_witness():
    p, q, truth = verify.plant_instance("not_convertible", (2, 2, 2), 5)
    assert truth == "not_convertible"
    # the fuzzification shrinks the measurement robustness
    assert mo.measurement_robustness_closed_form(p) < mo.measurement_robustness_closed_form(q)
    v = po.is_sharper(p, q)
    assert v.status == po.NOT_CONVERTIBLE and v.witness.margin >= 1e-8


def test_plant_deterministic():
    a = verify.plant_instance("not_convertible", (3, 2, 3), 8)
    b = verify.plant_instance("not_convertible", (3, 2, 3), 8)
    assert np.array_equal(a[0].elements, b[0].elements) and np.array_equal(a[1].elements, b[1].elements)
    assert (a[0].dim, a[1].dim, a[0].outcomes) == (3, 2, 3)


def test_plant_unknown_kind():
    with pytest.raises(ValueError):
        verify.plant_instance("maybe", (2, 2, 2), 0)


def test_suite_deterministic():
    a = verify.run_suite("monotone", 3, seed=4).as_dict()
    b = verify.run_suite("monotone", 3, seed=4).as_dict()
    a.pop("runtime"), b.pop("runtime")
    assert a == b


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        verify.run_suite("nope", 1)


def test_report_serializes_failures():
    rep = verify.SuiteReport("x", 2, failures=[((0, 1), "dims", 0.5)])
    doc = rep.as_dict()
    assert not doc["passed"] and doc["failures"][0]["seed"] == [0, 1]
