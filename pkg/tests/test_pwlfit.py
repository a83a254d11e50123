import math

import numpy as np
import pytest

from fonrev.pwlfit import (
    MaxAffineUpperFit,
    UpperBoundViolation,
    PwlFit,
    default_fit,
    eval_upper,
    fit,
    from_csv,
    max_rel_error,
    to_csv,
    xci_log,
)


def test_log_term_values():
    assert float(xci_log(10.0)) == pytest.approx(math.log(11 / 9), rel=1e-12)
    assert float(xci_log(10.0)) == pytest.approx(0.2007, abs=1e-4)


@pytest.mark.parametrize("x1,x2,q", [(1.0, 2.0, 3), (0.5, 2.0, 3), (2.0, 2.0, 3), (2.0, 3.0, 0)])
def test_fit_rejects_bad_domain(x1, x2, q):
    with pytest.raises(ValueError):
        fit(x1, x2, q, grid_points=100)


def test_single_segment_is_upper_bound():
    one = fit(2.0, 3.0, 1, grid_points=2000)
    assert one.q_segments == 1
    x = np.linspace(2.0, 3.0, 10_001)
    assert np.all(one.evaluate(x) - xci_log(x) >= -1e-12)
    # the lifted line of a convex function on an interval touches it at an endpoint
    assert min(one(2.0) - float(xci_log(2.0)), one(3.0) - float(xci_log(3.0))) == pytest.approx(0.0, abs=1e-9)


def test_default_fit_quality(envelope):
    assert envelope.q_segments == 20
    err = max_rel_error(envelope, spacing="log")
    assert 0.0 <= err < 0.05
    assert max_rel_error(envelope, spacing="uniform") < 0.05


def test_envelope_at_points(envelope):
    v = eval_upper(envelope, 10.0)
    assert v.in_domain
    h = math.log(11 / 9)
    assert h <= float(v) <= 1.05 * h
    lo = eval_upper(envelope, envelope.x1)
    assert math.isfinite(lo.value) and lo.value >= float(xci_log(envelope.x1))
    assert not eval_upper(envelope, 500.0).in_domain
    assert not eval_upper(envelope, 1.0005).in_domain


def test_envelope_is_convex(envelope):
    x = np.linspace(envelope.x1, envelope.x2, 20_001)
    y = envelope.evaluate(x)
    assert np.all(np.diff(y, 2) >= -1e-9)


def test_active_segment_midpoint(envelope):
    # segments are sorted by slope, so consecutive lines cross at the cell boundaries
    a, b = envelope.slopes, envelope.intercepts
    cross = (b[1:] - b[:-1]) / (a[:-1] - a[1:])
    cells = np.r_[envelope.x1, np.clip(cross, envelope.x1, envelope.x2), envelope.x2]
    for k in range(envelope.q_segments):
        lo, hi = cells[k], cells[k + 1]
        if hi - lo < 1e-9:
            continue
        mid = 0.5 * (lo + hi)
        assert envelope(mid) == pytest.approx(a[k] * mid + b[k], abs=1e-12)


def test_max_rel_error_flags_lowered_envelope(envelope):
    low = PwlFit(tuple((a, b - 0.01) for a, b in envelope.coeffs), envelope.x1, envelope.x2)
    with pytest.raises(UpperBoundViolation):
        max_rel_error(low, grid_points=1000)
    with pytest.raises(ValueError):
        max_rel_error(envelope, grid_points=1)


def test_more_segments_do_not_hurt(envelope):
    finer = fit(1.001, 200.0, 40)
    assert max_rel_error(finer) <= max_rel_error(envelope)


def test_fit_is_deterministic():
    a = fit(1.01, 50.0, 6, grid_points=5000)
    b = fit(1.01, 50.0, 6, grid_points=5000)
    assert a == b
    assert default_fit() is default_fit()


def test_csv_round_trip(envelope):
    text = to_csv(envelope)
    assert text.splitlines()[0] == "k,o1,o0"
    assert from_csv(text, envelope.x1, envelope.x2) == envelope


def test_estimator_interface():
    x = np.linspace(0.0, 4.0, 400)
    y = (x - 2.0) ** 2
    est = MaxAffineUpperFit(n_segments=4, relative=False).fit(x[:, None], y)
    assert 1 <= est.coef_.shape[0] <= 4
    assert np.all(est.predict(x[:, None]) >= y - 1e-12)
    assert est.score(x[:, None], y) > 0.9


def test_estimator_rejects_zero_targets_under_relative_weighting():
    x = np.linspace(-1.0, 1.0, 11)
    with pytest.raises(ValueError):
        MaxAffineUpperFit(n_segments=2).fit(x[:, None], x**2)
