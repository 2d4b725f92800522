"""Shift linear deterministic channel for the K-user fully connected network.

Each user k transmits a vector of q = max(n, m) symbols from GF(p) per
channel use; receiver k sees its own signal shifted down by q - n levels plus
every cross signal shifted down by q - m levels, all mod p.  Signal levels
are indexed top-down (index 0 is the most significant level).

The quasi-symmetric variant attaches a sign lambda_ki in {-1, +1} to each
cross link; the fully symmetric channel is the all-ones special case and is
handled by the same code path.

`run_feedback_session` is the only place state lives: encoders are pure
functions of (own message, own past outputs) and decoders of (own outputs),
so the one-step feedback causality contract is enforced by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .gf import is_prime

__all__ = [
    "CausalityViolation",
    "DetParams",
    "Scheme",
    "Transcript",
    "apply_channel",
    "run_feedback_session",
]


class CausalityViolation(Exception):
    """An encoder used information it cannot causally have.

    The driver interface makes this unrepresentable for built-in schemes
    (encoders only ever receive their own past outputs); custom encoder
    implementations may raise it as a defensive check.
    """


def _validate_signs(signs, k: int) -> tuple[tuple[int, ...], ...]:
    arr = np.asarray(signs, dtype=np.int64)
    if arr.shape != (k, k):
        raise ValueError(f"sign matrix must be {k}x{k}, got {arr.shape}")
    for i in range(k):
        if arr[i, i] != 0:
            raise ValueError("sign matrix diagonal must be 0")
        for j in range(k):
            if i != j and arr[i, j] not in (-1, 1):
                raise ValueError("off-diagonal signs must be -1 or +1")
    return tuple(tuple(int(v) for v in row) for row in arr)


@dataclass(frozen=True)
class DetParams:
    """Deterministic channel configuration.

    K users, n direct-link levels, m cross-link levels, prime alphabet size p,
    and an optional per-link sign matrix (absent means fully symmetric).
    """

    K: int
    n: int
    m: int
    p: int
    signs: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"need K >= 2 users, got {self.K}")
        if self.n < 0 or self.m < 0:
            raise ValueError("level counts must be non-negative")
        if max(self.n, self.m) < 1:
            raise ValueError("need at least one signal level (max(n, m) >= 1)")
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.signs is not None:
            object.__setattr__(self, "signs", _validate_signs(self.signs, self.K))

    @property
    def q(self) -> int:
        return max(self.n, self.m)

    def sign_matrix(self) -> np.ndarray:
        """K x K signed cross-link matrix; all-ones off-diagonal when symmetric."""
        if self.signs is None:
            lam = np.ones((self.K, self.K), dtype=np.int64)
            np.fill_diagonal(lam, 0)
            return lam
        return np.asarray(self.signs, dtype=np.int64)

    def to_json_dict(self) -> dict:
        return {
            "K": self.K,
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "signs": None if self.signs is None else [list(r) for r in self.signs],
        }


def _shift_rows(x: np.ndarray, s: int) -> np.ndarray:
    """Down-shift every row of x by s levels, zero-filling the top."""
    q = x.shape[1]
    out = np.zeros_like(x)
    if s < q:
        out[:, s:] = x[:, : q - s]
    return out


def apply_channel(params: DetParams, x: np.ndarray) -> np.ndarray:
    """One channel use: (K, q) inputs -> (K, q) outputs over GF(p)."""
    q, p = params.q, params.p
    x = np.asarray(x, dtype=np.int64) % p
    if x.shape != (params.K, q):
        raise ValueError(f"block signal must have shape {(params.K, q)}, got {x.shape}")
    direct = _shift_rows(x, q - params.n)
    cross = _shift_rows(x, q - params.m)
    lam = params.sign_matrix()
    return (direct + lam @ cross) % p


# Encoder: (user, own message, own outputs from blocks < t) -> q-vector.
# Decoder: (user, own outputs from all blocks) -> recovered message.
Encoder = Callable[[int, np.ndarray, tuple[np.ndarray, ...]], np.ndarray]
Decoder = Callable[[int, tuple[np.ndarray, ...]], np.ndarray]


@dataclass
class Scheme:
    """A feedback coding scheme: block count, per-user rate, encoder, decoder."""

    params: DetParams
    blocks: int
    msg_symbols: int
    declared_rate: Fraction
    encode: Encoder
    decode: Decoder
    name: str = ""

    def __post_init__(self):
        if self.declared_rate * self.blocks != self.msg_symbols:
            raise ValueError(
                f"rate {self.declared_rate} x {self.blocks} blocks "
                f"!= {self.msg_symbols} message symbols"
            )


@dataclass
class Transcript:
    """Full record of one feedback session."""

    params: DetParams
    blocks: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    messages_in: np.ndarray | None = None
    messages_out: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "blocks": [
                {"inputs": xs.tolist(), "outputs": ys.tolist()}
                for xs, ys in self.blocks
            ],
            "messages_in": self.messages_in.tolist(),
            "messages_out": self.messages_out.tolist(),
        }


def run_feedback_session(
    params: DetParams,
    scheme: Scheme,
    messages,
    blocks: int | None = None,
) -> Transcript:
    """Drive a full session under the one-step output feedback contract.

    At block t each encoder is handed exactly (its message, its own outputs
    from blocks < t); after the last block each decoder is handed its own
    outputs from every block.  Messages must match the scheme's declared
    size exactly; short messages are rejected rather than padded so rate
    accounting stays honest.
    """
    if scheme.params != params:
        raise ValueError("scheme was built for different channel parameters")
    if blocks is None:
        blocks = scheme.blocks
    if blocks != scheme.blocks:
        raise ValueError(f"scheme runs over {scheme.blocks} blocks, asked for {blocks}")
    msgs = np.asarray(messages, dtype=np.int64) % params.p
    if msgs.shape != (params.K, scheme.msg_symbols):
        raise ValueError(
            f"messages must have shape {(params.K, scheme.msg_symbols)}, got {msgs.shape}"
        )

    q = params.q
    history: list[tuple[np.ndarray, ...]] = [() for _ in range(params.K)]
    transcript = Transcript(params=params, messages_in=msgs.copy())
    for _t in range(blocks):
        x = np.zeros((params.K, q), dtype=np.int64)
        for k in range(params.K):
            xk = np.asarray(scheme.encode(k, msgs[k], history[k]), dtype=np.int64)
            if xk.shape != (q,):
                raise ValueError(f"encoder for user {k} returned shape {xk.shape}")
            x[k] = xk % params.p
        y = apply_channel(params, x)
        transcript.blocks.append((x, y))
        for k in range(params.K):
            history[k] = history[k] + (y[k].copy(),)

    out = np.zeros_like(msgs)
    for k in range(params.K):
        out[k] = np.asarray(scheme.decode(k, history[k]), dtype=np.int64) % params.p
    transcript.messages_out = out
    return transcript
