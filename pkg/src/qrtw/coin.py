"""Unitary 2x2 coins for a two-channel walk on the integer lattice.

A coin mixes the left-moving and right-moving amplitude at one site.
Entries are named row-major::

    U = | a  b |
        | c  d |

so ``a`` keeps a left mover in the left channel, ``b`` folds a right
mover into the left channel, ``c`` folds a left mover into the right
channel, and ``d`` keeps a right mover in the right channel.

Arbitrary matrices go through :func:`make_coin`, which rejects anything
that is not unitary within a small residual.  The named builders
(:func:`free_coin`, :func:`half_wave_plate`, :func:`hadamard`) are exact
by construction.  :func:`beta_decompose` splits a coin into two channel
phases and a real mixing pair, which is how the transmitted magnitude
is expressed independently of the full solve.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ModelError, NotUnitary

UNITARITY_TOL = 1e-10
_ENTRY_EPS = 1e-14


@dataclass(frozen=True, slots=True)
class Coin:
    """One 2x2 unitary coin, stored entrywise.

    Attributes
    ----------
    a, b, c, d : complex
        Matrix entries in row-major order, ``[[a, b], [c, d]]``.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def as_matrix(self) -> np.ndarray:
        """Return the coin as a fresh 2x2 complex ndarray."""
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


def unitarity_residual(a: complex, b: complex, c: complex, d: complex) -> float:
    """Largest absolute entry of ``conj(U).T @ U - I`` for ``U = [[a,b],[c,d]]``.

    Zero for an exactly unitary matrix.  The three distinct entries are
    the two column norms and the column overlap (the 2,1 entry is the
    conjugate of the 1,2 entry and carries no extra information).
    """
    col1 = abs(a) ** 2 + abs(c) ** 2 - 1.0
    col2 = abs(b) ** 2 + abs(d) ** 2 - 1.0
    cross = a.conjugate() * b + c.conjugate() * d
    return max(abs(col1), abs(col2), abs(cross))


def make_coin(
    a: complex, b: complex, c: complex, d: complex, *, tol: float = UNITARITY_TOL
) -> Coin:
    """Validate entries and build a :class:`Coin`.

    Parameters
    ----------
    a, b, c, d :
        Matrix entries, row-major.  Anything ``complex()`` accepts.
    tol :
        Largest unitarity residual to accept.  The default admits
        entries that went through text round-trips with rounded
        decimals; exactly constructed coins sit far below it.

    Returns
    -------
    Coin
        With the entries stored exactly as given (complex-coerced,
        never renormalized).

    Raises
    ------
    NotUnitary
        If any entry of ``conj(U).T @ U`` deviates from the identity
        by more than ``tol``.  The message reports the worst entry.
    """
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    col1 = abs(abs(a) ** 2 + abs(c) ** 2 - 1.0)
    col2 = abs(abs(b) ** 2 + abs(d) ** 2 - 1.0)
    cross = abs(a.conjugate() * b + c.conjugate() * d)
    worst, where = max(
        (col1, "column 1 norm"), (col2, "column 2 norm"), (cross, "column overlap")
    )
    if worst > tol:
        raise NotUnitary(
            f"matrix is not unitary: {where} deviates by {worst:.3e} (tol {tol:.1e})"
        )
    return Coin(a, b, c, d)


def free_coin(p: float, q: float) -> Coin:
    """Diagonal coin ``diag(e^{ip}, e^{iq})``.

    Leaves the two channels uncoupled, so walkers translate
    ballistically while picking up the phase ``p`` (left movers) or
    ``q`` (right movers) per step.
    """
    return Coin(cmath.exp(1j * p), 0j, 0j, cmath.exp(1j * q))


def half_wave_plate(theta: float) -> Coin:
    """Real reflection coin at plate angle ``theta``.

    The matrix is ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`` with
    determinant exactly -1 for every angle.  ``theta = pi/8`` gives the
    Hadamard coin and ``theta = pi/4`` the pure swap.
    """
    co = math.cos(2.0 * theta)
    si = math.sin(2.0 * theta)
    return Coin(complex(co), complex(si), complex(si), complex(-co))


def identity_coin() -> Coin:
    """The do-nothing coin ``diag(1, 1)``."""
    return Coin(1.0 + 0j, 0j, 0j, 1.0 + 0j)


def hadamard() -> Coin:
    """The balanced reflection coin, equal to ``half_wave_plate(pi/8)``."""
    s = complex(math.sqrt(0.5))
    return Coin(s, s, s, -s)


def determinant(u: Coin) -> complex:
    """Determinant ``a*d - b*c``; modulus 1 for any unitary coin."""
    return u.a * u.d - u.b * u.c


@dataclass(frozen=True, slots=True)
class BetaDecomposition:
    """Phase-split form of a coin.

    A unitary coin factors entrywise as ``a = u*alpha``,
    ``b = u*conj(beta)``, ``c = v*beta``, ``d = -v*alpha`` with
    ``alpha`` real and nonnegative and ``|u| = |v| = 1``.  Only
    ``beta_sq`` feeds the downstream magnitude formulas; the individual
    phases are a documented convention (see :func:`beta_decompose`).

    ``theta`` is a slot for the round-trip phase angle of a barrier
    pair; it depends on data beyond the coin itself, so the caller that
    knows the full arrangement stores it here.  It defaults to ``None``.
    """

    alpha: float
    beta: complex
    u: complex
    v: complex
    theta: float | None = None

    @property
    def beta_sq(self) -> float:
        """The mixing weight ``|beta|**2``, a real number in [0, 1]."""
        return abs(self.beta) ** 2

    def reassemble(self) -> Coin:
        """Rebuild the source coin from the factors."""
        return Coin(
            self.u * self.alpha,
            self.u * self.beta.conjugate(),
            self.v * self.beta,
            -self.v * self.alpha,
        )


def beta_decompose(u: Coin) -> BetaDecomposition:
    """Split a coin into channel phases and a real mixing pair.

    Returns
    -------
    BetaDecomposition
        With ``alpha >= 0``, ``alpha**2 + |beta|**2 == 1`` up to
        roundoff, and the reassembly identity holding entrywise.

    Notes
    -----
    Phase conventions for degenerate entries: with ``d != 0`` the split
    uses ``alpha = |d|``, ``u = a/|d|``, ``v = -d/|d|`` and
    ``beta = conj(b)*u`` (so ``b = 0`` gives ``beta = 0`` with
    ``u = a/|a|``).  When the diagonal vanishes (``|d|`` below 1e-14,
    a pure swap) it uses ``alpha = 0`` and ``beta = |b|`` real positive,
    pushing the phases of ``b`` and ``c`` into ``u`` and ``v``.  Every
    identity downstream depends only on ``beta_sq``, never on the
    individual phases.
    """
    mod_d = abs(u.d)
    if mod_d < _ENTRY_EPS:
        mod_b = abs(u.b)
        return BetaDecomposition(
            alpha=0.0, beta=complex(mod_b), u=u.b / mod_b, v=u.c / mod_b
        )
    phase_u = u.a / mod_d
    return BetaDecomposition(
        alpha=mod_d,
        beta=u.b.conjugate() * phase_u,
        u=phase_u,
        v=-u.d / mod_d,
    )


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def coin_to_json(u: Coin) -> dict[str, list[float]]:
    """Entrywise JSON form: each entry as a ``[re, im]`` pair."""
    return {"a": _pair(u.a), "b": _pair(u.b), "c": _pair(u.c), "d": _pair(u.d)}


def coin_from_json(data: Any) -> Coin:
    """Rebuild a coin from :func:`coin_to_json` output or a named preset.

    Accepted forms: the entrywise dict of ``[re, im]`` pairs, the
    strings ``"identity"`` and ``"hadamard"``, ``{"hwp": theta}`` for a
    plate angle, and ``{"free": [p, q]}`` for a diagonal coin.

    Raises
    ------
    ModelError
        For unrecognized shapes or preset names.
    NotUnitary
        When explicit entries fail validation.
    """
    if isinstance(data, str):
        name = data.strip().lower()
        if name == "identity":
            return identity_coin()
        if name == "hadamard":
            return hadamard()
        raise ModelError(f"unknown coin preset {data!r}")
    if isinstance(data, dict):
        if set(data) == {"hwp"}:
            return half_wave_plate(float(data["hwp"]))
        if set(data) == {"free"}:
            p, q = data["free"]
            return free_coin(float(p), float(q))
        try:
            entries = [complex(data[k][0], data[k][1]) for k in ("a", "b", "c", "d")]
        except (KeyError, TypeError, IndexError) as exc:
            raise ModelError(
                f"coin JSON needs entries a, b, c, d as [re, im] pairs ({exc})"
            ) from exc
        return make_coin(*entries)
    raise ModelError(f"cannot read a coin from a {type(data).__name__}")
