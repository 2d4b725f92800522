"""Two-block feedback coding schemes for the deterministic channel.

Covers the three symmetric regimes (weak m < n, strong m > n, moderate
m = n) and the quasi-symmetric signed channel, where block-2 transmissions
are combined through per-user diagonal coefficients (A, B) chosen so that
every receiver sees its block-1 interference again, only rescaled
(the simultaneous-alignment identity  Lambda A + Lambda B Lambda = U + V Lambda).

Every constructed scheme precomputes its decode matrix and checks full rank
at build time, so an undecodable configuration fails fast as SingularSystem
instead of silently corrupting messages.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import DetParams, Scheme, Transcript, _validate_signs, run_feedback_session
from .gf import GfMatrix, SingularSystem, nullspace, shift_matrix
from .rates import det_converse, qsym_converse

__all__ = [
    "RegimeMismatch",
    "NoSolution",
    "AlignmentSolution",
    "VerifyReport",
    "weak_scheme",
    "strong_scheme",
    "moderate_scheme",
    "weak_decode_matrix",
    "strong_decode_matrix",
    "qsym_constraint_matrix",
    "qsym_solve",
    "qsym_scheme",
    "qsym_decode_matrix",
    "moderate_margin",
    "select_prime",
    "build_scheme",
    "verify_scheme",
]

PRIME_SCAN = (2, 3, 5, 7, 11, 13)
ENUM_CAP = 10**6


class RegimeMismatch(Exception):
    """Channel parameters are outside the regime a construction is for."""


class NoSolution(Exception):
    """Alignment coefficient search exhausted without a valid point."""


# ---------------------------------------------------------------------------
# symmetric schemes
# ---------------------------------------------------------------------------

def weak_decode_matrix(K: int, n: int, m: int, p: int) -> GfMatrix:
    """2n x 2n per-user system for the weak regime (m < n).

    Unknown order: own symbols S_k(1 : 2n-m), then interference sums
    S_~k(1 : m).  Rows are block-1 outputs then block-2 outputs.  The block-2
    cross term uses  sum_{i != k} S_~i(j) = (K-1) S_k(j) + (K-2) S_~k(j).
    """
    mat = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for r in range(n):
        mat[r, r] += 1
        if r >= n - m:
            mat[r, 2 * n - m + (r - (n - m))] += 1
    for r in range(n):
        row = n + r
        if r < m:
            mat[row, 2 * n - m + r] += 1
        else:
            mat[row, n + (r - m)] += 1
        if r >= n - m:
            j = r - (n - m)
            mat[row, j] += K - 1
            mat[row, 2 * n - m + j] += K - 2
    return GfMatrix(mat, p)


def weak_scheme(params: DetParams) -> Scheme:
    """Two-block weak-interference scheme at the converse rate n - m/2.

    Block 1 sends n fresh symbols; feedback hands each transmitter the m
    interference sums its receiver heard, which it relays on its top m
    levels in block 2 above the remaining n - m fresh symbols.  Each
    receiver then solves a 2n x 2n system in its own 2n - m symbols plus
    the m interference sums.
    """
    if params.signs is not None:
        raise RegimeMismatch("weak_scheme is for the fully symmetric channel")
    K, n, m, p = params.K, params.n, params.m, params.p
    if m >= n:
        raise RegimeMismatch(f"weak scheme needs m < n, got n={n}, m={m}")
    dec = weak_decode_matrix(K, n, m, p)
    if dec.rank() < 2 * n:
        raise SingularSystem(
            f"weak decode matrix rank-deficient for K={K}, n={n}, m={m}, p={p}:\n"
            f"{dec.data}"
        )
    inv = dec.inverse()
    msg_symbols = 2 * n - m

    def encode(k, msg, outs):
        if len(outs) == 0:
            return msg[:n]
        y1 = outs[0]
        relayed = (y1[n - m:] - msg[n - m:n]) % p  # S_~k(1:m) off the feedback
        return np.concatenate([relayed, msg[n:msg_symbols]])

    def decode(k, outs):
        z = inv @ np.concatenate([outs[0], outs[1]])
        return z[:msg_symbols]

    return Scheme(
        params=params,
        blocks=2,
        msg_symbols=msg_symbols,
        declared_rate=Fraction(msg_symbols, 2),
        encode=encode,
        decode=decode,
        name="weak",
    )


def strong_decode_matrix(K: int, n: int, m: int, p: int) -> GfMatrix:
    """2m x 2m per-user system  [[D^(m-n), I], [(K-1)I, D^(m-n) + (K-2)I]].

    Unknowns: own symbols S_k(1:m), then interference sums S_~k(1:m).
    Singular exactly when p divides K - 1 (the lower-left block vanishes and
    the Schur complement's diagonal is -(K-1)), so the field must be chosen
    with K != 1 (mod p).
    """
    d = shift_matrix(m, m - n, p).data
    eye = np.eye(m, dtype=np.int64)
    top = np.concatenate([d, eye], axis=1)
    bot = np.concatenate([(K - 1) * eye, d + (K - 2) * eye], axis=1)
    return GfMatrix(np.concatenate([top, bot], axis=0), p)


def strong_scheme(params: DetParams) -> Scheme:
    """Two-block strong-interference scheme at the converse rate m/2.

    Block 1 broadcasts all m fresh symbols; each transmitter subtracts its
    own contribution from the feedback and re-sends the residual
    interference sums in block 2.
    """
    if params.signs is not None:
        raise RegimeMismatch("strong_scheme is for the fully symmetric channel")
    K, n, m, p = params.K, params.n, params.m, params.p
    if m <= n:
        raise RegimeMismatch(f"strong scheme needs m > n, got n={n}, m={m}")
    dec = strong_decode_matrix(K, n, m, p)
    if dec.rank() < 2 * m:
        raise SingularSystem(
            f"strong decode matrix rank-deficient for K={K}, n={n}, m={m}, p={p}"
            f" (K = 1 mod p):\n{dec.data}"
        )
    inv = dec.inverse()
    shift = shift_matrix(m, m - n, p)

    def encode(k, msg, outs):
        if len(outs) == 0:
            return msg
        return (outs[0] - (shift @ msg)) % p  # S_~k(1:m)

    def decode(k, outs):
        z = inv @ np.concatenate([outs[0], outs[1]])
        return z[:m]

    return Scheme(
        params=params,
        blocks=2,
        msg_symbols=m,
        declared_rate=Fraction(m, 2),
        encode=encode,
        decode=decode,
        name="strong",
    )


def moderate_scheme(params: DetParams) -> Scheme:
    """K-block time sharing for m = n: user k alone transmits in block k.

    With equal link strengths every receiver hears the same signal, so the
    decoding budget is shared and each user gets rate n/K.  No feedback is
    used; the scheme also works unchanged on signed channels.
    """
    K, n, m, p = params.K, params.n, params.m, params.p
    if m != n:
        raise RegimeMismatch(f"time sharing applies at m = n, got n={n}, m={m}")
    q = params.q

    def encode(k, msg, outs):
        if len(outs) == k:
            return msg
        return np.zeros(q, dtype=np.int64)

    def decode(k, outs):
        return outs[k]

    return Scheme(
        params=params,
        blocks=K,
        msg_symbols=n,
        declared_rate=Fraction(n, K),
        encode=encode,
        decode=decode,
        name="moderate",
    )


# ---------------------------------------------------------------------------
# quasi-symmetric alignment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlignmentSolution:
    """Diagonal coefficients (A, B, U, V) over GF(p) satisfying the
    simultaneous-alignment identity  Lambda A + Lambda B Lambda = U + V Lambda.

    The identity is re-checked entrywise by direct matrix arithmetic at
    construction, with U pinned to its diagonal consequence
    U_k = sum_j lambda_kj B_j lambda_jk.
    """

    a: tuple[int, ...]
    b: tuple[int, ...]
    u: tuple[int, ...]
    v: tuple[int, ...]
    p: int
    signs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        lam = np.asarray(self.signs, dtype=np.int64)
        k = lam.shape[0]
        for name, vec in (("a", self.a), ("b", self.b), ("u", self.u), ("v", self.v)):
            if len(vec) != k:
                raise ValueError(f"{name} must have {k} entries")
        p = self.p
        lhs = (lam @ np.diag(self.a) + lam @ np.diag(self.b) @ lam) % p
        rhs = (np.diag(self.u) + np.diag(self.v) @ lam) % p
        if not (lhs == rhs).all():
            raise ValueError("alignment identity Lambda A + Lambda B Lambda = U + V Lambda fails")

    def to_json_dict(self) -> dict:
        return {"a": list(self.a), "b": list(self.b),
                "u": list(self.u), "v": list(self.v), "p": self.p}


def qsym_constraint_matrix(signs, p: int) -> GfMatrix:
    """Off-diagonal alignment constraints as K(K-1) rows over the 3K
    unknowns (A_1..A_K, B_1..B_K, V_1..V_K).

    Row (k, i):  lambda_ki A_i + sum_{j not in {k,i}} lambda_kj lambda_ji B_j
    - lambda_ki V_k = 0.  The diagonal entries of the identity do not
    constrain (A, B, V); they define U_k = sum_j lambda_kj B_j lambda_jk.
    """
    lam = np.asarray(signs, dtype=np.int64)
    k_users = lam.shape[0]
    rows = []
    for k in range(k_users):
        for i in range(k_users):
            if i == k:
                continue
            row = np.zeros(3 * k_users, dtype=np.int64)
            row[i] += lam[k, i]
            for j in range(k_users):
                if j != k and j != i:
                    row[k_users + j] += lam[k, j] * lam[j, i]
            row[2 * k_users + k] -= lam[k, i]
            rows.append(row)
    return GfMatrix(np.array(rows), p)


def _derived_u(lam: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return np.array([
        int(sum(lam[k, j] * b[j] * lam[j, k] for j in range(lam.shape[0]))) % p
        for k in range(lam.shape[0])
    ], dtype=np.int64)


def moderate_margin(a: int, b: int, u: int, v: int, p: int) -> int:
    """Per-user decodability margin for the m = n quasi-symmetric scheme.

    The 2x2 block determinant det [[1, 1], [a+u, b+v]] = (b+v) - (a+u) mod p
    of the two-block system; decoding needs it nonzero.  The minus sign on u
    is load-bearing: a +u condition would declare sign matrices with
    duplicated receiver outputs decodable at n/2, above their n/3 capacity.
    """
    mat = GfMatrix([[1, 1], [(a + u) % p, (b + v) % p]], p)
    return mat.det()


def qsym_solve(signs, regime: str, p: int) -> AlignmentSolution:
    """Find diagonal (A, B, U, V) over GF(p) satisfying the alignment
    identity together with the regime's non-degeneracy condition.

    The off-diagonal constraints are linear in (A, B, V); candidates are
    enumerated over the nullspace by assigning free coefficients the field
    values 1, 2, ..., p-1, 0 in lexicographic order (biasing the search
    toward non-degenerate points first), with U derived from B.  The first
    candidate meeting the condition wins; the search is capped at 10^6
    candidates and reports per-user failure counts on exhaustion.
    """
    if regime not in ("weak", "strong", "moderate"):
        raise ValueError(f"unknown regime {regime!r}")
    lam = np.asarray(signs, dtype=np.int64)
    k_users = lam.shape[0]
    _validate_signs(lam, k_users)
    basis = nullspace(qsym_constraint_matrix(lam, p))
    dim = len(basis)

    def condition_fails(a, b, u, v) -> int | None:
        """Index of the first user violating the regime condition, else None."""
        for k in range(k_users):
            if regime == "weak" and b[k] == 0:
                return k
            if regime == "strong" and u[k] == 0:
                return k
            if regime == "moderate" and moderate_margin(a[k], b[k], u[k], v[k], p) == 0:
                return k
        return None

    fail_counts = np.zeros(k_users, dtype=np.int64)
    order = list(range(1, p)) + [0]
    tried = 0
    for combo in itertools.product(order, repeat=dim):
        tried += 1
        if tried > ENUM_CAP:
            break
        x = np.zeros(3 * k_users, dtype=np.int64)
        for coeff, vec in zip(combo, basis):
            x = (x + coeff * vec) % p
        a, b, v = x[:k_users], x[k_users:2 * k_users], x[2 * k_users:]
        u = _derived_u(lam, b, p)
        bad = condition_fails(a, b, u, v)
        if bad is None:
            return AlignmentSolution(
                a=tuple(int(t) for t in a),
                b=tuple(int(t) for t in b),
                u=tuple(int(t) for t in u),
                v=tuple(int(t) for t in v),
                p=p,
                signs=tuple(tuple(int(s) for s in row) for row in lam),
            )
        fail_counts[bad] += 1
    worst = int(np.argmax(fail_counts))
    raise NoSolution(
        f"no {regime}-regime alignment point over GF({p}) after {tried} candidates; "
        f"the {regime} condition failed most often at user {worst} "
        f"({int(fail_counts[worst])} times)"
    )


def qsym_decode_matrix(params: DetParams, sol: AlignmentSolution, k: int) -> GfMatrix:
    """Per-user two-block system for the quasi-symmetric scheme."""
    n, m, p = params.n, params.m, params.p
    a, b, u, v = sol.a[k], sol.b[k], sol.u[k], sol.v[k]
    if n > m:
        d = shift_matrix(n, n - m, p).data
        eye = np.eye(n, dtype=np.int64)
        top = np.concatenate([eye, d], axis=1)
        bot = np.concatenate([a * eye + u * d, b * eye + v * d], axis=1)
    elif m > n:
        d = shift_matrix(m, m - n, p).data
        eye = np.eye(m, dtype=np.int64)
        top = np.concatenate([d, eye], axis=1)
        bot = np.concatenate([u * eye + a * d, v * eye + b * d], axis=1)
    else:
        eye = np.eye(n, dtype=np.int64)
        top = np.concatenate([eye, eye], axis=1)
        bot = np.concatenate([(a + u) * eye, (b + v) * eye], axis=1)
    return GfMatrix(np.concatenate([top, bot], axis=0), p)


def qsym_scheme(params: DetParams, sol: AlignmentSolution) -> Scheme:
    """Cooperative alignment scheme on the signed channel.

    Block 1 sends fresh symbols (n of them for m <= n, m for m > n).  Each
    transmitter recovers its receiver's interference symbols I_k from the
    feedback by subtracting its own contribution, then sends
    A_k (own symbols) + B_k I_k on the aligned levels in block 2, so every
    receiver sees its block-1 interference again scaled by (U_k, V_k) and
    solves a per-user square system.
    """
    if params.signs is None:
        raise RegimeMismatch("qsym_scheme needs an explicit sign matrix")
    if sol.p != params.p or sol.signs != params.signs:
        raise ValueError("alignment solution does not match channel parameters")
    K, n, m, p = params.K, params.n, params.m, params.p
    if min(n, m) < 1:
        raise RegimeMismatch("quasi-symmetric scheme needs n >= 1 and m >= 1")
    a, b = np.array(sol.a), np.array(sol.b)

    invs = []
    for k in range(K):
        dec = qsym_decode_matrix(params, sol, k)
        if dec.rank() < dec.rows:
            raise SingularSystem(
                f"quasi-symmetric decode matrix singular for user {k}:\n{dec.data}"
            )
        invs.append(dec.inverse())

    if n > m:  # weak: message 2n - m, interference on the bottom m levels
        msg_symbols = 2 * n - m

        def encode(k, msg, outs):
            if len(outs) == 0:
                return msg[:n]
            resid = (outs[0] - msg[:n]) % p
            i_k = resid[n - m:]
            x = np.empty(n, dtype=np.int64)
            x[:m] = a[k] * msg[:m] + b[k] * i_k
            x[m:] = a[k] * msg[m:n] + b[k] * msg[n:msg_symbols]
            return x % p

        def decode(k, outs):
            z = invs[k] @ np.concatenate([outs[0], outs[1]])
            return np.concatenate([z[:n], z[n + m: 2 * n]])

        rate = Fraction(msg_symbols, 2)
    elif m > n:  # strong: message m, full interference vector relayed scaled
        msg_symbols = m
        shift = shift_matrix(m, m - n, p)

        def encode(k, msg, outs):
            if len(outs) == 0:
                return msg
            i_k = (outs[0] - (shift @ msg)) % p
            return (a[k] * msg + b[k] * i_k) % p

        def decode(k, outs):
            z = invs[k] @ np.concatenate([outs[0], outs[1]])
            return z[:m]

        rate = Fraction(m, 2)
    else:  # moderate: message n, needs the margin condition (checked above)
        msg_symbols = n

        def encode(k, msg, outs):
            if len(outs) == 0:
                return msg
            i_k = (outs[0] - msg) % p
            return (a[k] * msg + b[k] * i_k) % p

        def decode(k, outs):
            z = invs[k] @ np.concatenate([outs[0], outs[1]])
            return z[:n]

        rate = Fraction(n, 2)

    return Scheme(
        params=params,
        blocks=2,
        msg_symbols=msg_symbols,
        declared_rate=rate,
        encode=encode,
        decode=decode,
        name="qsym",
    )


# ---------------------------------------------------------------------------
# construction dispatch and verification
# ---------------------------------------------------------------------------

def _try_build(params: DetParams) -> Scheme:
    n, m = params.n, params.m
    if params.signs is None:
        if m < n:
            return weak_scheme(params)
        if m > n:
            return strong_scheme(params)
        return moderate_scheme(params)
    if n == m:
        lam = params.sign_matrix()
        if round(np.linalg.det(lam + np.eye(params.K))) == 0:
            # Lambda + I singular: alignment cannot reach n/2; n/K time
            # sharing meets the converse for this channel.
            return moderate_scheme(params)
        sol = qsym_solve(params.signs, "moderate", params.p)
        return qsym_scheme(params, sol)
    regime = "weak" if m < n else "strong"
    sol = qsym_solve(params.signs, regime, params.p)
    return qsym_scheme(params, sol)


def select_prime(K: int, n: int, m: int, signs=None) -> int:
    """Smallest prime in the scan set for which construction succeeds."""
    last: Exception | None = None
    for p in PRIME_SCAN:
        try:
            _try_build(DetParams(K=K, n=n, m=m, p=p, signs=signs))
            return p
        except (SingularSystem, NoSolution) as exc:
            last = exc
    raise SingularSystem(
        f"no prime in {PRIME_SCAN} yields a decodable scheme for "
        f"K={K}, n={n}, m={m}: {last}"
    )


def build_scheme(K: int, n: int, m: int, p: int | None = None, signs=None) -> Scheme:
    """Construct the regime-appropriate scheme, auto-selecting p if absent."""
    if p is None:
        p = select_prime(K, n, m, signs=signs)
    return _try_build(DetParams(K=K, n=n, m=m, p=p, signs=signs))


@dataclass
class VerifyReport:
    """Outcome of replaying a scheme against random messages."""

    params: DetParams
    declared_rate: Fraction
    trials: int
    successes: int
    converse_rate: Fraction
    matches_converse: bool
    first_failure: Transcript | None = None

    @property
    def all_passed(self) -> bool:
        return self.successes == self.trials

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "declared_rate": {
                "num": self.declared_rate.numerator,
                "den": self.declared_rate.denominator,
            },
            "trials": self.trials,
            "successes": self.successes,
            "converse_rate": {
                "num": self.converse_rate.numerator,
                "den": self.converse_rate.denominator,
            },
            "matches_converse": self.matches_converse,
        }


def verify_scheme(
    params: DetParams, scheme: Scheme, trials: int, seed: int
) -> VerifyReport:
    """Replay `trials` sessions with seeded uniform messages; bit-exactness
    of every user's decode counts as success, failures are data (the first
    failing transcript is attached for inspection)."""
    rng = np.random.default_rng(seed)
    msgs = rng.integers(0, params.p, size=(trials, params.K, scheme.msg_symbols))
    successes = 0
    first_failure = None
    for t in range(trials):
        tr = run_feedback_session(params, scheme, msgs[t])
        if (tr.messages_out == tr.messages_in).all():
            successes += 1
        elif first_failure is None:
            first_failure = tr
    if params.signs is not None and params.K == 3:
        converse = qsym_converse(params.n, params.m, params.signs)
    else:
        converse = det_converse(params.n, params.m, params.K)
    return VerifyReport(
        params=params,
        declared_rate=scheme.declared_rate,
        trials=trials,
        successes=successes,
        converse_rate=converse,
        matches_converse=scheme.declared_rate == converse,
        first_failure=first_failure,
    )
