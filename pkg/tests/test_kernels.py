"""Both kernel backends must agree with each other on random rank matrices."""
import random

import pytest

from ultracoarse import kernels
from ultracoarse.space import random_ultrametric

# imported directly so parity is checked even when the fallback is forced
compiled = pytest.importorskip("ultracoarse._ckernels")


def _cases(count, seed=11):
    rng = random.Random(seed)
    for _ in range(count):
        X = random_ultrametric(rng, rng.randint(1, 12))
        yield rng, X.ranks, len(X.values) - 1


def test_ball_labels_and_cov_table_agree():
    for _, R, top in _cases(80):
        for t in range(top + 1):
            assert list(compiled.ball_labels(R, t)) == kernels.python.ball_labels(R, t)
        assert ([[list(r) for r in m] for m in compiled.cov_table(R, top)]
                == kernels.python.cov_table(R, top))


def test_min_cover_agrees():
    for _, R, top in _cases(40):
        for x in range(len(R)):
            for e in range(top + 1):
                for d in range(top + 1):
                    assert (compiled.min_cover(R, x, e, d)
                            == kernels.python.min_cover(R, x, e, d))


def test_subset_oscillation_agrees():
    for rng, Rs, top in _cases(40):
        Rt = random_ultrametric(rng, rng.randint(1, 8)).ranks
        masks = [rng.getrandbits(len(Rt)) for _ in Rs]
        for e in range(top + 1):
            assert (compiled.subset_oscillation(Rs, e, masks, Rt)
                    == kernels.python.subset_oscillation(Rs, e, masks, Rt))


def test_backend_name_matches_selection():
    expected = "python" if kernels.compiled is None else "cython"
    assert kernels.BACKEND_NAME == expected
