import numpy as np
import pytest

from maxmin_svm import verify
from maxmin_svm.verify import (
    CHECK_NAMES,
    CheckResult,
    VerificationReport,
    blob_dataset,
    run_verification,
)

# In registry order: run_verification executes any subset in the fixed
# order of the CHECKS table, not the order requested.
FAST_CHECKS = ["smoothing_bound", "convexity", "variance_identity"]


# ---------------------------------------------------------------------------
# Instance generator


def test_blob_dataset_shape_and_balance():
    data = blob_dataset(np.random.default_rng(0), n_per=12, c=4, d=3)
    assert data.n_samples == 48
    assert data.n_classes == 4
    assert data.n_features == 3
    np.testing.assert_array_equal(data.class_counts(), np.full(4, 12))
    # Rows are shuffled, not grouped by class.
    assert not np.all(np.diff(data.labels) >= 0)


def test_blob_dataset_deterministic():
    a = blob_dataset(np.random.default_rng(5), n_per=10)
    b = blob_dataset(np.random.default_rng(5), n_per=10)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)


# ---------------------------------------------------------------------------
# Runner behavior


def test_run_subset_report():
    report = run_verification(seed=1, include=FAST_CHECKS)
    assert isinstance(report, VerificationReport)
    assert report.seed == 1
    assert [r.name for r in report.results] == FAST_CHECKS
    assert report.passed
    assert report.n_passed == 3
    assert report.failed_names == ()
    d = report.as_dict()
    assert d["n_passed"] == 3 and d["n_failed"] == 0
    assert [c["name"] for c in d["checks"]] == FAST_CHECKS


def test_run_unknown_check_raises():
    with pytest.raises(ValueError, match="unknown checks"):
        run_verification(include=["smoothing_bound", "nope"])


def test_corrupt_fails_only_gradient_oracle():
    report = run_verification(
        seed=0,
        include=["smoothing_bound", "gradient_oracle"],
        corrupt_gradient=1e-2,
    )
    assert not report.passed
    assert report.failed_names == ("gradient_oracle",)
    assert report.n_passed == 1


def test_crashed_check_becomes_failure(monkeypatch):
    def boom(seed=0):
        raise RuntimeError("synthetic crash")

    monkeypatch.setattr(verify, "CHECKS", (("boom", boom),))
    monkeypatch.setattr(verify, "CHECK_NAMES", ("boom",))
    report = run_verification(seed=0)
    assert not report.passed
    (result,) = report.results
    assert result.name == "boom"
    assert "RuntimeError" in result.detail["error"]


def test_check_names_unique_and_ordered():
    assert len(CHECK_NAMES) == len(set(CHECK_NAMES)) == 27
    # Each check reports under its registered name.
    report = run_verification(seed=2, include=FAST_CHECKS)
    for name, result in zip(FAST_CHECKS, report.results):
        assert isinstance(result, CheckResult)
        assert result.name == name
