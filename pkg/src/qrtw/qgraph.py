"""Delta-potential chain as a walk: coins from (alpha, k, s), the
transmission spectrum T(k), perfect-transmission wave numbers, and the
continuum wavefunction on edges rebuilt from a lattice profile.

A free particle at wave number ``k`` on edges of length ``s``, with
delta potentials of strength ``alpha`` at vertices 0 and ``m``, scatters
exactly like the lattice walk with ``p = q = ks`` and the barrier coin
of :func:`vertex_coin`.  Everything here either evaluates the continuum
formulas directly or routes through that correspondence.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coin import Coin, make_coin
from .errors import EdgeOutOfWindow, InvalidWaveNumber, ModelError
from .scattering import AmplitudeProfile, TunnelingConfig

K_FLOOR = 1e-6
"""Smallest admissible wave number; alpha/k blows up below this."""

_PHASE_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class GraphParams:
    """Chain parameters: potential strength, spacing, span, wave number."""

    alpha: float
    s: float
    m: int
    k: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "k", float(self.k))
        if self.alpha < 0:
            raise ModelError(f"alpha must be nonnegative, got {self.alpha}")
        if self.s <= 0:
            raise ModelError(f"edge length s must be positive, got {self.s}")
        if self.m < 1:
            raise ModelError(f"m must be a positive integer, got {self.m}")
        if self.k <= 0 or not math.isfinite(self.k):
            raise InvalidWaveNumber(f"wave number must be positive, got {self.k}")


def vertex_coin(alpha_j: float, k: float, s: float) -> Coin:
    """Coin of a single vertex with delta strength ``alpha_j``.

    ``a = d = 2 e^{iks} / (2 + i alpha_j/k)`` and
    ``b = c = e^{iks} (2/(2 + i alpha_j/k) - 1)``.  With ``alpha_j = 0``
    this is the free diagonal coin at ``p = q = ks``.
    """
    if k <= 0 or not math.isfinite(k):
        raise InvalidWaveNumber(f"wave number must be positive, got {k}")
    if s <= 0:
        raise ModelError(f"edge length s must be positive, got {s}")
    if alpha_j < 0:
        raise ModelError(f"alpha must be nonnegative, got {alpha_j}")
    z = 2.0 / (2.0 + 1j * (alpha_j / k))
    phase = cmath.exp(1j * k * s)
    return make_coin(phase * z, phase * (z - 1.0), phase * (z - 1.0), phase * z)


def to_tunneling_config(gp: GraphParams) -> TunnelingConfig:
    """Walk configuration equivalent to the chain at ``gp.k``."""
    return TunnelingConfig(
        p=gp.k * gp.s,
        q=gp.k * gp.s,
        barrier=vertex_coin(gp.alpha, gp.k, gp.s),
        m=gp.m,
        delta=0.0,
    )


def transmission_at_k(gp: GraphParams) -> float:
    """Transmission probability T(k), evaluated in closed form.

    With ``y = alpha/k`` and ``f = y^2/(4+y^2)``::

        T = ((1 - f) / |1 + e^{2iksm} (2-iy)/(2+iy) f|)^2

    Agrees with the walk route (``solve_closed_form`` on
    :func:`to_tunneling_config`) to roundoff.
    """
    y = gp.alpha / gp.k
    f = y * y / (4.0 + y * y)
    num = 1.0 - f
    den = abs(
        1.0
        + cmath.exp(2j * gp.k * gp.s * gp.m) * ((2.0 - 1j * y) / (2.0 + 1j * y)) * f
    )
    return (num / den) ** 2


@dataclass(frozen=True, slots=True)
class SpectrumSample:
    """One scan point: wave number and transmission probability."""

    k: float
    T: float


def _transmission_grid(
    alpha: float, s: float, m: int, ks: np.ndarray
) -> np.ndarray:
    y = alpha / ks
    f = y * y / (4.0 + y * y)
    den = np.abs(1.0 + np.exp(2j * ks * s * m) * ((2.0 - 1j * y) / (2.0 + 1j * y)) * f)
    return ((1.0 - f) / den) ** 2


def spectrum_scan(
    alpha: float,
    s: float,
    m: int,
    k_min: float,
    k_max: float,
    n_points: int,
    threads: int = 1,
) -> list[SpectrumSample]:
    """Evaluate T(k) on a uniform grid, ascending in k.

    Grid points are independent, so ``threads > 1`` splits the grid
    into contiguous chunks evaluated concurrently; the assembled output
    is identical to the serial one.
    """
    if n_points < 2:
        raise ModelError(f"need at least 2 grid points, got {n_points}")
    if not (k_min < k_max):
        raise InvalidWaveNumber(f"empty wave-number range [{k_min}, {k_max}]")
    if k_min < K_FLOOR:
        raise InvalidWaveNumber(f"k_min must be at least {K_FLOOR}, got {k_min}")
    GraphParams(alpha, s, m, k_min)
    ks = np.linspace(k_min, k_max, n_points)
    if threads > 1:
        chunks = np.array_split(ks, min(threads, n_points))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _transmission_grid(alpha, s, m, c), chunks))
        ts = np.concatenate(parts)
    else:
        ts = _transmission_grid(alpha, s, m, ks)
    return [SpectrumSample(float(k), float(t)) for k, t in zip(ks, ts)]


@dataclass(frozen=True, slots=True)
class ResonanceSet:
    """Perfect-transmission wave numbers in a bracket, ascending.

    ``all_resonant`` marks the degenerate ``alpha = 0`` case where
    T(k) = 1 identically and listing roots is meaningless.
    """

    roots: tuple[float, ...]
    all_resonant: bool = False

    def __iter__(self):
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def _loop_phase(alpha: float, s: float, m: int, k: float) -> float:
    """Accumulated round-trip phase; T = 1 exactly where this hits an
    odd multiple of pi.  Strictly increasing in k."""
    return 2.0 * k * s * m - 2.0 * math.atan(alpha / (2.0 * k))


def find_resonances(
    alpha: float, s: float, m: int, k_min: float, k_max: float
) -> ResonanceSet:
    """All perfect-transmission wave numbers in ``[k_min, k_max]``.

    The loop phase is strictly increasing, so every crossing of an odd
    multiple of pi is enumerated directly and refined by bisection to a
    phase error below 1e-12.  No roots in the bracket yields an empty
    set; ``alpha = 0`` yields an empty set flagged ``all_resonant``.
    """
    if not (k_min < k_max):
        raise InvalidWaveNumber(f"empty wave-number range [{k_min}, {k_max}]")
    if k_min < K_FLOOR:
        raise InvalidWaveNumber(f"k_min must be at least {K_FLOOR}, got {k_min}")
    GraphParams(alpha, s, m, k_min)
    if alpha == 0.0:
        return ResonanceSet(roots=(), all_resonant=True)

    lo_phase = _loop_phase(alpha, s, m, k_min)
    hi_phase = _loop_phase(alpha, s, m, k_max)
    j_lo = math.ceil((lo_phase - math.pi) / (2.0 * math.pi))
    j_hi = math.floor((hi_phase - math.pi) / (2.0 * math.pi))
    roots = []
    for j in range(j_lo, j_hi + 1):
        target = (2 * j + 1) * math.pi
        lo, hi = k_min, k_max
        root = None
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            g = _loop_phase(alpha, s, m, mid) - target
            if abs(g) < _PHASE_TOL:
                root = mid
                break
            if g < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 2.0 * math.ulp(hi):
                break
        roots.append(root if root is not None else 0.5 * (lo + hi))
    return ResonanceSet(roots=tuple(roots))


@dataclass(frozen=True, slots=True)
class EdgeWave:
    """Wavefunction on one directed edge, parametrized by the distance
    ``x`` in ``[0, s]`` from the edge's terminal vertex.

    ``value(x) = gamma_a e^{-ikx} + gamma_abar e^{-ik(s-x)}``; the
    reversed edge swaps the two coefficients, so
    ``value(x) == reversed().value(s - x)`` holds by construction.
    """

    gamma_a: complex
    gamma_abar: complex
    k: float
    s: float

    def value(self, x: float) -> complex:
        if x < 0.0 or x > self.s:
            raise ModelError(f"x must lie in [0, {self.s}], got {x}")
        return self.gamma_a * cmath.exp(-1j * self.k * x) + self.gamma_abar * cmath.exp(
            -1j * self.k * (self.s - x)
        )

    def derivative(self, x: float) -> complex:
        if x < 0.0 or x > self.s:
            raise ModelError(f"x must lie in [0, {self.s}], got {x}")
        return -1j * self.k * self.gamma_a * cmath.exp(-1j * self.k * x) + (
            1j * self.k
        ) * self.gamma_abar * cmath.exp(-1j * self.k * (self.s - x))

    def reversed(self) -> "EdgeWave":
        return EdgeWave(self.gamma_abar, self.gamma_a, self.k, self.s)


def edge_wave(
    profile: AmplitudeProfile, gp: GraphParams, terminus: int, direction: str
) -> EdgeWave:
    """Directed-edge wave read off a stationary walk profile.

    The edge is named by the vertex it ends at and its travel
    direction: ``"rightward"`` comes from ``terminus - 1``,
    ``"leftward"`` from ``terminus + 1``.  The two coefficients are the
    walk amplitudes at the edge's two ends (the co-moving component at
    the terminus, the counter-moving one at the far end).
    """
    if direction == "rightward":
        far = terminus - 1
    elif direction == "leftward":
        far = terminus + 1
    else:
        raise ModelError(f"direction must be 'rightward' or 'leftward', got {direction!r}")
    lo, hi = profile.window
    for site in (terminus, far):
        if site < lo or site > hi:
            raise EdgeOutOfWindow(
                f"edge ({far} -> {terminus}) needs site {site}, "
                f"window is [{lo}, {hi}]"
            )
    if direction == "rightward":
        gamma_a = profile.at(terminus)[1]
        gamma_abar = profile.at(far)[0]
    else:
        gamma_a = profile.at(terminus)[0]
        gamma_abar = profile.at(far)[1]
    return EdgeWave(gamma_a, gamma_abar, gp.k, gp.s)


def edge_wavefunction(
    profile: AmplitudeProfile,
    gp: GraphParams,
    terminus: int,
    direction: str,
    x: float,
) -> complex:
    """Continuum wavefunction at distance ``x`` from ``terminus`` along
    the named incoming edge."""
    return edge_wave(profile, gp, terminus, direction).value(x)


_SPECTRUM_HEADER = "k,T"


def spectrum_to_csv(samples) -> str:
    """Serialize scan samples as ``k,T`` lines (header included)."""
    lines = [_SPECTRUM_HEADER]
    for sample in samples:
        lines.append(f"{sample.k!r},{sample.T!r}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str) -> list[SpectrumSample]:
    """Parse the output of :func:`spectrum_to_csv`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _SPECTRUM_HEADER:
        raise ModelError("spectrum CSV must start with the header 'k,T'")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ModelError(f"malformed spectrum row: {ln!r}")
        out.append(SpectrumSample(float(parts[0]), float(parts[1])))
    return out
