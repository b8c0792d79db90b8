from types import SimpleNamespace

import numpy as np
import pytest

from sdquant import analysis


def test_linear_fit_exact_line():
    fit = analysis.linear_fit([1, 2, 3], [3, 5, 7])
    assert fit.slope == pytest.approx(2)
    assert fit.intercept == pytest.approx(1)
    assert fit.r2 == pytest.approx(1)


def test_fits_recover_planted_rates():
    lams = np.array([16, 32, 64, 128])
    assert analysis.loglog_slope(lams, 3 * lams**-1.5).slope == pytest.approx(-1.5)
    assert analysis.root_exponential_fit(lams, np.exp(-0.7 * np.sqrt(lams))).slope == pytest.approx(-0.7)


def test_linear_fit_needs_two_points():
    with pytest.raises(ValueError):
        analysis.linear_fit([1], [1])


def test_grouping():
    recs = [SimpleNamespace(lam=l, err=e, ok=o) for l, e, o in
            [(2, 1.0, True), (1, 5.0, False), (2, 3.0, True), (1, 7.0, True)]]
    assert analysis.group_quantile(recs, lambda r: r.lam, lambda r: r.err) == {1: 6.0, 2: 2.0}
    assert analysis.group_rate(recs, lambda r: r.lam, lambda r: r.ok) == {1: 0.5, 2: 1.0}
    summary = analysis.error_summary(recs, lambda r: r.lam, lambda r: r.err)
    assert summary[1]["median"] == 6.0 and summary[1]["p90"] == pytest.approx(6.8)
