from __future__ import annotations

import numpy as np
import pytest

from rearrbmo.properties import (acceptance_corpus, jump_bound_suite, oscillation_suite, random_step,
                                 rearrangement_suite, sdr_transfer_suite)


def test_random_step_shapes():
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = random_step(rng, 64)
        assert 1 <= s.m <= 64
    s = random_step(rng, 8, levels=3, nonneg=True)
    assert set(np.unique(s.values)) <= {0.0, 1.0, 2.0}


@pytest.mark.parametrize("seed", [11, 12])
def test_rearrangement_suite_small(seed):
    for r in rearrangement_suite(n=30, seed=seed):
        assert r.passed, r.line()


def test_oscillation_suite_small():
    for r in oscillation_suite(n=20, seed=13):
        assert r.passed, r.line()


def test_jump_and_sdr_suites_small():
    for r in jump_bound_suite(n=8, seed=14) + sdr_transfer_suite(n=4, seed=15):
        assert r.passed, r.line()


def test_corpus_on_common_domain():
    corpus = acceptance_corpus()
    assert all(r.fstar.breakpoints[-1] == pytest.approx(2.0) for r in corpus.values())
