from fractions import Fraction

import numpy as np
import pytest

from fcic.channel import DetParams, Scheme, run_feedback_session
from fcic.gf import SingularSystem, mat_rank
from fcic.rates import det_converse
from fcic.schemes import (
    AlignmentSolution,
    NoSolution,
    RegimeMismatch,
    build_scheme,
    moderate_margin,
    moderate_scheme,
    qsym_decode_matrix,
    qsym_scheme,
    qsym_solve,
    select_prime,
    strong_decode_matrix,
    strong_scheme,
    verify_scheme,
    weak_decode_matrix,
    weak_scheme,
)

from conftest import all_sign_matrices_k3, cofactor_det_mod

# sign matrix whose Lambda + I has identical first and third rows
SINGULAR_LAMBDA = ((0, -1, 1), (1, 0, -1), (1, -1, 0))


def all_ones_lambda(k=3):
    lam = np.ones((k, k), dtype=np.int64)
    np.fill_diagonal(lam, 0)
    return tuple(tuple(int(v) for v in row) for row in lam)


# ---------------------------------------------------------------------------
# symmetric regimes
# ---------------------------------------------------------------------------

def test_weak_scheme_worked_example():
    scheme = weak_scheme(DetParams(K=3, n=3, m=1, p=5))
    assert scheme.declared_rate == Fraction(5, 2)
    report = verify_scheme(scheme.params, scheme, 100, seed=7)
    assert report.successes == 100
    assert report.matches_converse


def test_weak_scheme_k2():
    scheme = weak_scheme(DetParams(K=2, n=2, m=1, p=3))
    assert scheme.declared_rate == Fraction(3, 2)
    assert scheme.declared_rate == det_converse(2, 1, 2)


def test_weak_scheme_regime_mismatch():
    with pytest.raises(RegimeMismatch):
        weak_scheme(DetParams(K=3, n=1, m=2, p=5))
    with pytest.raises(RegimeMismatch):
        weak_scheme(DetParams(K=3, n=2, m=2, p=5))


def test_strong_scheme_binary_field_singular():
    with pytest.raises(SingularSystem):
        strong_scheme(DetParams(K=3, n=1, m=3, p=2))


def test_strong_scheme_worked_example():
    scheme = strong_scheme(DetParams(K=3, n=1, m=3, p=5))
    assert scheme.declared_rate == Fraction(3, 2)
    report = verify_scheme(scheme.params, scheme, 100, seed=8)
    assert report.successes == 100
    assert report.matches_converse


def test_strong_scheme_k4_p3_singular():
    """K=4, p=3: the decode determinant is (+-(K-1))^m = 0 mod 3, checked
    against an independent cofactor-expansion determinant."""
    mat = strong_decode_matrix(4, 1, 3, 3)
    assert cofactor_det_mod(mat.data, 3) == 0
    with pytest.raises(SingularSystem):
        strong_scheme(DetParams(K=4, n=1, m=3, p=3))


def test_strong_singularity_matches_field_congruence():
    """Empirical singularity set over the sweep equals {K = 1 mod p}; the
    max(m, n)-modulus reading of the same condition mispredicts some
    instances (e.g. K=3, m=3, n=1, p=2), so the field size is the modulus
    that matters."""
    q_reading_wrong = 0
    for k_users in (2, 3, 4, 5):
        for n in range(0, 3):
            for m in range(n + 1, 7):
                for p in (2, 3, 5, 7, 11):
                    singular = mat_rank(strong_decode_matrix(k_users, n, m, p)) < 2 * m
                    assert singular == (k_users % p == 1 % p)
                    q = max(m, n)
                    if singular != (k_users % q == 1 % q):
                        q_reading_wrong += 1
    assert q_reading_wrong > 0


def test_strong_regime_mismatch():
    with pytest.raises(RegimeMismatch):
        strong_scheme(DetParams(K=3, n=3, m=1, p=5))


def test_moderate_scheme_rates():
    assert moderate_scheme(DetParams(K=3, n=2, m=2, p=2)).declared_rate == Fraction(2, 3)
    assert moderate_scheme(DetParams(K=5, n=1, m=1, p=3)).declared_rate == Fraction(1, 5)


def test_moderate_scheme_decodes():
    scheme = moderate_scheme(DetParams(K=4, n=3, m=3, p=5))
    report = verify_scheme(scheme.params, scheme, 50, seed=9)
    assert report.successes == 50


def test_moderate_regime_mismatch():
    with pytest.raises(RegimeMismatch):
        moderate_scheme(DetParams(K=3, n=2, m=1, p=5))


def test_weak_decode_matrix_always_full_rank():
    for k_users in (2, 3, 4, 5):
        for n in range(1, 7):
            for m in range(0, n):
                for p in (2, 3, 5, 7, 11):
                    assert mat_rank(weak_decode_matrix(k_users, n, m, p)) == 2 * n


def test_edge_levels_m_zero_and_n_zero():
    scheme = weak_scheme(DetParams(K=3, n=2, m=0, p=2))
    assert scheme.declared_rate == Fraction(2)
    assert verify_scheme(scheme.params, scheme, 30, seed=1).successes == 30
    scheme = strong_scheme(DetParams(K=3, n=0, m=2, p=3))
    assert scheme.declared_rate == Fraction(1)
    assert verify_scheme(scheme.params, scheme, 30, seed=2).successes == 30


# ---------------------------------------------------------------------------
# alignment solver
# ---------------------------------------------------------------------------

def test_qsym_solve_all_ones_weak():
    sol = qsym_solve(all_ones_lambda(), "weak", 5)
    assert all(b != 0 for b in sol.b)


def test_alignment_identity_manual_point():
    sol = AlignmentSolution(
        a=(0, 0, 0), b=(1, 1, 1), u=(2, 2, 2), v=(1, 1, 1),
        p=5, signs=all_ones_lambda(),
    )
    assert sol.b == (1, 1, 1)
    with pytest.raises(ValueError):
        AlignmentSolution(
            a=(0, 0, 0), b=(1, 1, 1), u=(3, 2, 2), v=(1, 1, 1),
            p=5, signs=all_ones_lambda(),
        )


def test_qsym_solve_mixed_sign_matrix():
    sol = qsym_solve(SINGULAR_LAMBDA, "weak", 5)
    assert all(b != 0 for b in sol.b)
    sol = qsym_solve(SINGULAR_LAMBDA, "strong", 5)
    assert all(u != 0 for u in sol.u)


def test_qsym_solve_strong_sample_of_sign_matrices():
    for lam in list(all_sign_matrices_k3())[::7]:
        sol = qsym_solve(lam, "strong", 5)
        assert all(u != 0 for u in sol.u)


def test_qsym_moderate_infeasible_when_lambda_plus_i_singular():
    # all-ones: the margin is identically zero on the solution space
    with pytest.raises(NoSolution):
        qsym_solve(all_ones_lambda(), "moderate", 5)
    with pytest.raises(NoSolution):
        qsym_solve(SINGULAR_LAMBDA, "moderate", 5)


def test_qsym_moderate_feasible_iff_margin_found():
    """Across all 64 sign matrices, every matrix with a moderate-regime
    solution has Lambda + I invertible (the converse direction of the
    feasibility claim fails for most full-rank matrices and is surfaced
    as NoSolution rather than masked)."""
    feasible_fr = []
    for lam in all_sign_matrices_k3():
        full_rank = round(np.linalg.det(np.array(lam) + np.eye(3))) != 0
        try:
            qsym_solve(lam, "moderate", 5)
            assert full_rank
            feasible_fr.append(lam)
        except NoSolution:
            pass
    assert len(feasible_fr) > 0


def test_moderate_margin_is_two_block_determinant():
    # det [[1, 1], [a+u, b+v]] = (b + v) - (a + u); the +u variant would
    # accept sign matrices whose m = n channel has duplicated outputs
    for p in (3, 5):
        for a, b, u, v in ((1, 2, 0, 1), (0, 1, 2, 1), (2, 2, 2, 2)):
            expect = (b + v - a - u) % p
            assert moderate_margin(a, b, u, v, p) == expect


# ---------------------------------------------------------------------------
# quasi-symmetric schemes
# ---------------------------------------------------------------------------

def test_qsym_all_ones_matches_weak_scheme_transcripts():
    """With A=0, B=1 the signed scheme on the all-ones matrix sends exactly
    what the symmetric weak scheme sends."""
    p = 5
    sym = weak_scheme(DetParams(K=3, n=3, m=1, p=p))
    sol = AlignmentSolution(
        a=(0, 0, 0), b=(1, 1, 1), u=(2, 2, 2), v=(1, 1, 1),
        p=p, signs=all_ones_lambda(),
    )
    signed_params = DetParams(K=3, n=3, m=1, p=p, signs=all_ones_lambda())
    signed = qsym_scheme(signed_params, sol)
    assert signed.declared_rate == Fraction(5, 2)
    rng = np.random.default_rng(12)
    for _ in range(5):
        msgs = rng.integers(0, p, size=(3, 5))
        tr_sym = run_feedback_session(sym.params, sym, msgs)
        tr_signed = run_feedback_session(signed_params, signed, msgs)
        for (x1, y1), (x2, y2) in zip(tr_sym.blocks, tr_signed.blocks):
            assert (x1 == x2).all() and (y1 == y2).all()
        assert (tr_signed.messages_out == msgs).all()


def test_qsym_mixed_sign_strong_rate_two():
    scheme = build_scheme(3, 2, 4, p=5, signs=SINGULAR_LAMBDA)
    assert scheme.declared_rate == Fraction(2)
    report = verify_scheme(scheme.params, scheme, 100, seed=13)
    assert report.successes == 100
    assert report.matches_converse


def test_qsym_singular_lambda_plus_i_falls_back_to_time_sharing():
    scheme = build_scheme(3, 2, 2, p=5, signs=SINGULAR_LAMBDA)
    assert scheme.name == "moderate"
    assert scheme.declared_rate == Fraction(2, 3)
    report = verify_scheme(scheme.params, scheme, 50, seed=14)
    assert report.successes == 50
    assert report.matches_converse


def test_qsym_moderate_full_rank_case_runs():
    """A sign matrix with Lambda + I invertible and a feasible margin decodes
    at rate n/2."""
    found = None
    for lam in all_sign_matrices_k3():
        if round(np.linalg.det(np.array(lam) + np.eye(3))) == 0:
            continue
        try:
            qsym_solve(lam, "moderate", 5)
            found = lam
            break
        except NoSolution:
            continue
    assert found is not None
    scheme = build_scheme(3, 2, 2, p=5, signs=found)
    assert scheme.declared_rate == Fraction(1)
    assert verify_scheme(scheme.params, scheme, 50, seed=15).successes == 50


def test_qsym_decode_determinants():
    """The per-user decode determinant is B_k^n in the weak regime and
    (-1)^m U_k^m in the strong regime, verified by independent cofactor
    expansion on instances where n (or m) differs from K."""
    p = 5
    for lam in (SINGULAR_LAMBDA, all_ones_lambda()):
        sol = qsym_solve(lam, "weak", p)
        for n, m in ((2, 1), (4, 2)):
            params = DetParams(K=3, n=n, m=m, p=p, signs=lam)
            for k in range(3):
                det = cofactor_det_mod(qsym_decode_matrix(params, sol, k).data, p)
                assert det == pow(sol.b[k], n, p)
        sol = qsym_solve(lam, "strong", p)
        for n, m in ((1, 2), (2, 4)):
            params = DetParams(K=3, n=n, m=m, p=p, signs=lam)
            for k in range(3):
                det = cofactor_det_mod(qsym_decode_matrix(params, sol, k).data, p)
                assert det == (pow(-1, m, p) * pow(sol.u[k], m, p)) % p


def test_qsym_sweep_weak_and_strong_decode():
    """Sampled sign matrices decode perfectly in both coded regimes."""
    for lam in list(all_sign_matrices_k3())[::9]:
        for n, m in ((2, 1), (1, 2)):
            scheme = build_scheme(3, n, m, p=5, signs=lam)
            report = verify_scheme(scheme.params, scheme, 40, seed=16)
            assert report.successes == 40
            assert report.matches_converse


# ---------------------------------------------------------------------------
# construction dispatch, prime selection, verification
# ---------------------------------------------------------------------------

def test_select_prime_skips_singular_fields():
    assert select_prime(3, 1, 3) == 3  # p=2 makes K-1 vanish
    assert select_prime(2, 1, 3) == 2
    assert select_prime(4, 1, 2) == 2
    assert select_prime(5, 0, 3) == 3


def test_build_scheme_dispatch():
    assert build_scheme(3, 3, 1, p=5).name == "weak"
    assert build_scheme(3, 1, 3, p=5).name == "strong"
    assert build_scheme(3, 2, 2, p=5).name == "moderate"
    assert build_scheme(3, 2, 1, p=5, signs=SINGULAR_LAMBDA).name == "qsym"


def test_verify_scheme_reports_fault_injection():
    """A corrupted decoder must be caught and the failing transcript kept."""
    base = build_scheme(3, 3, 1, p=5)

    def bad_decode(k, outs):
        out = base.decode(k, outs).copy()
        if k == 1:
            out[0] = (out[0] + 1) % 5
        return out

    broken = Scheme(
        params=base.params,
        blocks=base.blocks,
        msg_symbols=base.msg_symbols,
        declared_rate=base.declared_rate,
        encode=base.encode,
        decode=bad_decode,
    )
    report = verify_scheme(base.params, broken, 20, seed=17)
    assert report.successes < 20
    assert report.first_failure is not None
    tr = report.first_failure
    assert (tr.messages_out != tr.messages_in).any()


def test_verify_report_json_keys():
    scheme = build_scheme(3, 1, 3, p=5)
    report = verify_scheme(scheme.params, scheme, 10, seed=18)
    doc = report.to_json_dict()
    assert list(doc) == [
        "params", "declared_rate", "trials", "successes",
        "converse_rate", "matches_converse",
    ]
    assert doc["declared_rate"] == {"num": 3, "den": 2}
    assert doc["converse_rate"] == {"num": 3, "den": 2}
    assert doc["matches_converse"] is True


def test_verify_scheme_is_seeded_and_reproducible():
    scheme = build_scheme(4, 2, 3, p=5)
    r1 = verify_scheme(scheme.params, scheme, 25, seed=123)
    r2 = verify_scheme(scheme.params, scheme, 25, seed=123)
    assert r1.successes == r2.successes == 25


def test_every_constructible_scheme_decodes_across_primes():
    """Wherever construction succeeds with a regime-appropriate prime, random
    replay is perfect; singular fields only ever fail at construction."""
    cases = [(2, 3, 1), (3, 4, 2), (5, 2, 1), (3, 1, 4), (4, 2, 5), (5, 3, 3), (2, 2, 2)]
    for k_users, n, m in cases:
        for p in (2, 3, 5, 7, 11):
            try:
                scheme = build_scheme(k_users, n, m, p=p)
            except SingularSystem:
                assert m > n and k_users % p == 1 % p
                continue
            report = verify_scheme(scheme.params, scheme, 30, seed=k_users * 100 + p)
            assert report.successes == 30, (k_users, n, m, p)
            assert report.matches_converse
