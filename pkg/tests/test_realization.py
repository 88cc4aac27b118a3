import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpvmax.errors import CoverageError, RankDeficiencyError
from lpvmax.markov import NOISE, PROCESS, SubMarkovTable, sub_markov_from_ss
from lpvmax.model import random_stable_model
from lpvmax.realization import (
    BENCHMARK_COL_TRIPLES,
    BENCHMARK_ROW_TRIPLES,
    HankelSpec,
    build_hankel,
    default_hankel_spec,
    realize,
    similarity_check,
)


def tables_of(model, order=4):
    return sub_markov_from_ss(model, PROCESS, order), sub_markov_from_ss(model, NOISE, order)


def table_deviation(a, b, depth=4):
    worst = 0.0
    for which in (PROCESS, NOISE):
        for x, y in zip(sub_markov_from_ss(a, which, depth - 1).blocks, sub_markov_from_ss(b, which, depth - 1).blocks):
            worst = max(worst, np.abs(x - y).max())
    return worst


def test_hankel_single_entries(bench_model):
    m = bench_model
    spec = HankelSpec.full([(1,)], [(0,)], 2, 2)
    H = build_hankel(tables_of(m), spec)
    assert np.allclose(H, np.hstack([m.C[1] @ m.B[0], m.C[1] @ m.K[0]]))
    H2 = build_hankel(tables_of(m), spec, shift=2)
    assert np.allclose(H2, m.C[1] @ m.A[2] @ m.B_tilde[0])


def test_full_hankel_rank_is_state_dimension(bench_model):
    H = build_hankel(tables_of(bench_model), default_hankel_spec(2, 2, 2, (4, 4)))
    assert H.shape == (24, 48)
    assert np.linalg.matrix_rank(H, tol=1e-10 * np.linalg.norm(H, 2)) == 2


@pytest.mark.parametrize("seed", range(3))
def test_round_trip(seed):
    m = random_stable_model((2, 2, 2, 2), seed)
    rz = realize(tables_of(m), default_hankel_spec(2, 2, 2, (4, 4)))
    assert rz.n_x == 2 and rz.rank_gap > 1e6 and not rz.deficient
    assert table_deviation(m, rz.model.replace(Sigma_e=m.Sigma_e)) < 1e-8


def test_process_only_basis_still_recovers_noise_gain(bench_model):
    spec = default_hankel_spec(2, 2, 2, (4, 2))
    assert all(part == PROCESS for _, part, _ in spec.cols)
    rz = realize(tables_of(bench_model), spec)
    assert table_deviation(bench_model, rz.model.replace(Sigma_e=bench_model.Sigma_e)) < 1e-8


def test_reduced_basis_matches_full(bench_model):
    reduced = HankelSpec.from_triples(BENCHMARK_ROW_TRIPLES, BENCHMARK_COL_TRIPLES)
    assert reduced.shape == (8, 10)
    a = realize(tables_of(bench_model), reduced)
    b = realize(tables_of(bench_model), default_hankel_spec(2, 2, 2, (4, 4)))
    assert a.n_x == 2
    ok, dev = similarity_check(a.model, b.model, 4, tol=1e-8)
    assert ok, dev


def test_zero_tables_flagged_deficient():
    tables = (SubMarkovTable.zeros(2, 2, 2, 4), SubMarkovTable.zeros(2, 2, 2, 4, monic=True))
    spec = default_hankel_spec(2, 2, 2, (4, 4), n_x_target=2)
    with pytest.raises(RankDeficiencyError):
        realize(tables, spec)
    rz = realize(tables, spec, strict=False)
    assert rz.deficient and rz.model.n_x == 2 and not rz.singular_values.any()
    assert not rz.model.A.any() and not rz.model.B.any()


def test_coverage_error_without_zero_fill(bench_model):
    spec = default_hankel_spec(2, 2, 2, (4, 4))
    short = tables_of(bench_model, order=2)
    with pytest.raises(CoverageError):
        realize(short, spec, zero_fill=False)


@given(st.floats(0.1, 10.0))
def test_scaling_equivariance(alpha):
    m = random_stable_model((2, 2, 2, 2), 11)
    proc, noise = tables_of(m)
    scaled = (SubMarkovTable(2, 2, 2, 4, False, tuple(alpha * b for b in proc.blocks)),
              SubMarkovTable(2, 2, 2, 4, True, tuple(alpha * b for b in noise.blocks)))
    rz = realize(scaled, default_hankel_spec(2, 2, 2, (4, 4)))
    back = sub_markov_from_ss(rz.model, PROCESS, 3)
    for x, y in zip(back.blocks[1:], proc.blocks[1:4]):
        assert np.allclose(x, alpha * y, atol=1e-8 * alpha)


def test_similarity_check_examples(rng, bench_model):
    T = rng.standard_normal((2, 2)) + 3 * np.eye(2)
    ok, dev = similarity_check(bench_model, bench_model.transformed(T), 4)
    assert ok and dev < 1e-10
    assert similarity_check(bench_model, bench_model, 4) == (True, 0.0)
    B = bench_model.B.copy()
    B[0, 0, 0] += 0.1
    ok, dev = similarity_check(bench_model, bench_model.replace(B=B), 4)
    lag_one = max(np.abs(0.1 * bench_model.C[i][:, 0]).max() for i in range(3))
    assert not ok and dev >= lag_one - 1e-12
    with pytest.raises(ValueError):
        similarity_check(bench_model, random_stable_model((3, 2, 2, 2), 0), 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        HankelSpec((((), 0),), (((0,), PROCESS, 0),))
    with pytest.raises(ValueError):
        HankelSpec((((0,), 0), ((0,), 0)), (((0,), PROCESS, 0),))
    with pytest.raises(ValueError):
        HankelSpec((((0,), 0),), (((0,), "other", 0),))
    with pytest.raises(ValueError):
        default_hankel_spec(2, 2, 2, (3, 2))
