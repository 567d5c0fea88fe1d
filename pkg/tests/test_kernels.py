import numpy as np
import pytest

from organic_effects import _backend

BACKENDS = _backend.available()


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return _backend.load(request.param)


def test_compiled_backend_built():
    # the editable install builds the extension; the fallback exists for environments without a compiler
    assert "compiled" in BACKENDS
    assert _backend.BACKEND in BACKENDS


@pytest.mark.parametrize("shape", [(7, 1), (50, 4), (300, 9), (6, 6)])
def test_qr_project_factorizes(kernels, shape):
    rng = np.random.default_rng(sum(shape))
    x = rng.normal(size=shape)
    y = rng.normal(size=shape[0])
    r, qty = kernels.qr_project(x, y)
    assert np.allclose(np.tril(r, -1), 0.0)
    assert np.allclose(r.T @ r, x.T @ x, atol=1e-10)
    # R^T (Q^T y) = X^T y
    assert np.allclose(r.T @ qty, x.T @ y, atol=1e-10)


def test_qr_project_zero_column(kernels):
    x = np.column_stack([np.ones(5), np.zeros(5), np.arange(5.0)])
    r, qty = kernels.qr_project(x, np.arange(5.0) * 2)
    assert np.allclose(r.T @ r, x.T @ x)
    assert np.isfinite(qty).all()


def test_tabulate_cells_matches_counting(kernels):
    rng = np.random.default_rng(3)
    n = 200
    ic, il, im = rng.integers(0, 2, n), rng.integers(0, 3, n), rng.integers(0, 2, n)
    a, y, w = rng.integers(0, 2, n), rng.normal(size=n), rng.integers(0, 4, n).astype(float)
    n_c, n_lc1, n_mlc0, n_mlc1, ysum = kernels.tabulate_cells(ic, il, im, a, y, w, 2, 3, 2)
    for ci in range(2):
        assert n_c[ci] == w[ic == ci].sum()
        for li in range(3):
            sel = (ic == ci) & (il == li)
            assert n_lc1[ci, li] == w[sel & (a == 1)].sum()
            for mi in range(2):
                cell = sel & (im == mi)
                assert n_mlc0[ci, li, mi] == w[cell & (a == 0)].sum()
                assert n_mlc1[ci, li, mi] == w[cell & (a == 1)].sum()
                assert np.isclose(ysum[ci, li, mi], (w * y)[cell & (a == 1)].sum())


def test_weighted_cell_sum_skips_zero_weight_nan_cells(kernels):
    f_c = np.array([0.25, 0.75])
    f_lc = np.array([[1.0, 0.0], [0.5, 0.5]])
    f_mlc = np.array([[[0.5, 0.5], [0.0, 0.0]], [[1.0, 0.0], [0.2, 0.8]]])
    y = np.array([[[1.0, 3.0], [np.nan, np.nan]], [[2.0, np.nan], [4.0, 5.0]]])
    expected = 0.25 * (0.5 * 1 + 0.5 * 3) + 0.75 * (0.5 * 2.0 + 0.5 * (0.2 * 4 + 0.8 * 5))
    assert kernels.weighted_cell_sum(f_c, f_lc, f_mlc, y) == pytest.approx(expected, abs=1e-15)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree_bitwise_on_tables_and_sums():
    py, cc = _backend.load("python"), _backend.load("compiled")
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 400))
        nc, nl, nm = (int(v) for v in rng.integers(1, 5, 3))
        args = (rng.integers(0, nc, n), rng.integers(0, nl, n), rng.integers(0, nm, n),
                rng.integers(0, 2, n), rng.normal(size=n), rng.integers(0, 3, n).astype(float))
        for u, v in zip(py.tabulate_cells(*args, nc, nl, nm), cc.tabulate_cells(*args, nc, nl, nm)):
            assert np.array_equal(u, v)
        tables = (rng.random(nc), rng.random((nc, nl)), rng.random((nc, nl, nm)),
                  rng.normal(size=(nc, nl, nm)))
        assert py.weighted_cell_sum(*tables) == cc.weighted_cell_sum(*tables)
