import pytest

from eholzer_comb import degree_bounds, to_rational
from suites import (
    APPENDIX_RUNS, acceptance_check, appendix_suite, fedosov_suite, hopf_suite, jet_suite, run_suite, udf_suite,
)
from udf_engine import TwistError, UDFEngine


def test_hopf_suite_passes():
    report = hopf_suite(2)
    assert report.passed, [e.name for e in report.failures]
    assert report.summary()["pass"] >= 8


def test_jet_suite_passes():
    report = jet_suite(1)
    assert report.passed, [e.name for e in report.failures]


def test_appendix_suite_small_grid():
    grid = {"A": [0, 1, 2, 3], "B": [1, 2, 3, 4], "X": [-1, 0, 1, 2]}
    report = appendix_suite(["s_sums"], n_max=2, grid=grid, symbolic_n=1)
    assert report.passed, [e.name for e in report.failures]
    assert "s_sums_established" in report.metadata


def test_udf_suite_first_order(engine):
    report = udf_suite(1, samples=2, engine=engine)
    assert report.passed, [e.name for e in report.failures]


@pytest.mark.slow
def test_fedosov_suite_records_displayed_forms():
    report = fedosov_suite(2, 4, product_degree=2)
    assert report.passed, [e.name for e in report.failures]
    names = [e.name for e in report.entries]
    assert "D² = 0" in names
    assert "U_α∘U_α⁻¹ = 1 to degree 2" in names
    assert "α(U⁻¹_(α⁻¹)) = U_α to degree 2" in names
    assert "D(v_α,β) = 0 to degree 1" in names
    assert any("displayed closed form" in name for name in names)


def test_unknown_suite():
    with pytest.raises(ValueError, match="Unknown suite"):
        run_suite("nope")


def test_grid_with_unknown_identity():
    with pytest.raises(ValueError, match="unknown identity"):
        run_suite("appendix", grid={"identity": "nope", "grid": {}})


@pytest.mark.parametrize("run", APPENDIX_RUNS, ids=lambda run: run.label)
def test_appendix_runs_exceed_degree_bounds(run):
    bounds = degree_bounds(run.identity, run.n_max)
    for name, values in run.grid.items():
        assert len({to_rational(v) for v in values}) > bounds[name], name
    assert not set(run.fixed) & set(run.grid)


def test_appendix_run_ranges():
    reach = {run.label: run.n_max for run in APPENDIX_RUNS}
    assert reach["assoc"] == 8
    assert reach["half_weight"] == 16
    assert reach["s_lemma"] == 30 and reach["s_recurrence"] == 30


def test_appendix_suite_lowers_runs_to_n_max():
    report = appendix_suite(["s_sums"], n_max=1, symbolic_n=0)
    assert report.passed, [e.name for e in report.failures]
    assert {"s_lemma_established", "s_recurrence_established", "s_resummation_established"} <= set(report.metadata)
    assert not any("n=2" in e.name for e in report.entries)


def test_engine_error_becomes_failed_entry(monkeypatch):
    def broken(self, r_tensor, order=None):
        raise TwistError("coproduct not coassociative")

    monkeypatch.setattr(UDFEngine, "check_twist", broken)
    report = run_suite("twist", order=0)
    assert not report.passed
    assert "TwistError" in report.failures[0].detail


def test_unknown_identity_is_rejected():
    with pytest.raises(ValueError, match="Unknown identity"):
        run_suite("appendix", identities=["nope"])


@pytest.mark.slow
def test_fedosov_suite_to_total_degree_eight():
    report = fedosov_suite(8, 8, product_degree=4)
    assert report.passed, [e.name for e in report.failures]
    assert report.metadata["cutoff"] == 8


@pytest.mark.slow
def test_acceptance_check_passes():
    report = acceptance_check(3, jobs=4)
    assert report.passed, [e.name for e in report.failures]
