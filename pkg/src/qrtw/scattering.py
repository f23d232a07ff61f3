"""Stationary scattering of a two-channel lattice walk off a barrier pair.

The walk lives on the integers with a two-component amplitude per site,
a left-moving and a right-moving channel.  Away from defects every site
applies the diagonal coin ``diag(e^{ip}, e^{iq})``; a barrier coin sits
at site 0 and again at site ``m``.  Driving the system with a unit
right-moving plane wave from the left produces a bounded steady state
with a reflected amplitude ``r`` on the left, a transmitted amplitude
``t`` on the right, and interior amplitudes ``r_tilde``, ``t_tilde`` at
the two barrier sites.

Two independent solvers are provided: :func:`solve_closed_form`
evaluates the explicit formulas for the double-barrier arrangement, and
:func:`solve_general` assembles and solves the finite linear system for
an arbitrary finite set of defect coins, from either side.  They must
agree on the common domain, which the test suite checks extensively.

The optional ``delta`` drives the injected wave so that the steady
state advances by ``exp(i*delta)`` per step under the evolution
module's convention.  In the stationary picture this shifts the
right-moving wave number from ``q`` to ``q + delta`` while left movers
keep ``p``; all formulas below carry that shift.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .coin import Coin, beta_decompose, coin_from_json, coin_to_json, determinant
from .errors import (
    DegenerateResonance,
    FullReflector,
    ModelError,
    SingularSystem,
    TrivialBarrier,
    WindowTooSmall,
    MarginViolation,
)

_DEGENERACY_EPS = 1e-12
_TRIVIAL_EPS = 1e-14
_COND_LIMIT = 1e12


class Method(enum.Enum):
    """How a stationary solution was obtained."""

    CLOSED_FORM = "closed_form"
    LINEAR_SYSTEM = "linear_system"
    SERIES_LIMIT = "series_limit"


class Injection(enum.Enum):
    """Which side the driving plane wave comes from."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, slots=True)
class TunnelingConfig:
    """Double-barrier arrangement: free phases, barrier coin, separation.

    ``p`` and ``q`` are the left- and right-channel phases of the free
    coin, ``barrier`` is the defect coin placed at sites 0 and ``m``
    (``m >= 1``), and ``delta`` is the per-step drive phase (default 0).
    """

    p: float
    q: float
    barrier: Coin
    m: int
    delta: float = 0.0

    def __post_init__(self):
        if not isinstance(self.barrier, Coin):
            raise ModelError("barrier must be a Coin")
        m = self.m
        if int(m) != m:
            raise ModelError(f"barrier separation m must be an integer, got {m!r}")
        if int(m) < 1:
            raise ModelError(f"barrier separation m must be >= 1, got {m}")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def bc(self) -> complex:
        """Product of the barrier's off-diagonal entries."""
        return self.barrier.b * self.barrier.c

    @property
    def q_shifted(self) -> float:
        """Right-channel wave number including the drive, ``q + delta``."""
        return self.q + self.delta

    @property
    def loop_det(self) -> complex:
        """Phase accumulated across the gap, ``exp(i(p+q+delta)(m-1))``.

        Equals the free-coin determinant raised to ``m - 1`` when
        ``delta`` is zero.
        """
        return cmath.exp(1j * (self.p + self.q + self.delta) * (self.m - 1))

    @property
    def round_trip_ratio(self) -> complex:
        """Amplitude factor per bounce between the barriers, ``bc * loop_det``."""
        return self.bc * self.loop_det


@dataclass(frozen=True, slots=True)
class StationarySolution:
    """Scattering data of one steady state.

    ``r`` and ``t`` are the reflected and transmitted amplitudes,
    ``r_tilde`` and ``t_tilde`` the interior amplitudes at the entry
    and exit barrier sites, ``T = |t|**2`` and ``R = |r|**2`` the
    probabilities.  ``tilde_defined`` is False when the closed form
    cannot produce the interior amplitudes (a vanishing barrier
    diagonal makes their defining quotients singular); they are NaN in
    that case and :func:`build_profile` falls back to the linear
    system, which stays well posed.
    """

    r: complex
    t: complex
    r_tilde: complex
    t_tilde: complex
    T: float
    R: float
    method: Method
    injection: Injection
    delta: float
    tilde_defined: bool = True


@dataclass(frozen=True, eq=False)
class AmplitudeProfile:
    """Two-channel amplitudes over a window of consecutive sites.

    ``psi_l[i]`` and ``psi_r[i]`` hold the left- and right-channel
    amplitude at position ``x_min + i``.  The arrays are copied on
    construction and frozen read-only.
    """

    x_min: int
    x_max: int
    psi_l: np.ndarray
    psi_r: np.ndarray

    def __post_init__(self):
        if self.x_max < self.x_min:
            raise ModelError("window is empty")
        n = self.x_max - self.x_min + 1
        for name in ("psi_l", "psi_r"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (n,):
                raise ModelError(
                    f"{name} has {arr.shape[0] if arr.ndim == 1 else arr.shape} "
                    f"entries for a window of {n} sites"
                )
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def window(self) -> tuple[int, int]:
        return (self.x_min, self.x_max)

    def positions(self) -> range:
        return range(self.x_min, self.x_max + 1)

    def at(self, x: int) -> tuple[complex, complex]:
        """Amplitude pair ``(psi_l, psi_r)`` at position ``x``."""
        if not self.x_min <= x <= self.x_max:
            raise IndexError(f"position {x} outside window [{self.x_min}, {self.x_max}]")
        i = x - self.x_min
        return (complex(self.psi_l[i]), complex(self.psi_r[i]))


def solve_closed_form(cfg: TunnelingConfig) -> StationarySolution:
    """Evaluate the explicit double-barrier scattering amplitudes.

    With ``D`` the gap phase (``cfg.loop_det``) and ``U`` the barrier
    coin, the denominator is ``1 - bc*D`` and::

        t = d**2 * exp(-2i(q+delta)) / (1 - bc*D)
        r = b * exp(ip) * (1 + det(U)*D) / (1 - bc*D)

    The interior amplitudes follow from the driven recursions,
    ``r_tilde = (r*exp(-ip) - b)/a`` and
    ``t_tilde = t*exp(i(q+delta)(m+1))/d``.

    Raises
    ------
    DegenerateResonance
        When the denominator modulus falls below 1e-12 (a full
        reflector sitting exactly on the bounce resonance; the
        amplitudes are a genuine 0/0 there).
    """
    den = 1.0 - cfg.round_trip_ratio
    if abs(den) < _DEGENERACY_EPS:
        raise DegenerateResonance(
            f"resonance denominator modulus {abs(den):.3e} below {_DEGENERACY_EPS:.1e}; "
            "a unit-strength bounce loop makes the amplitudes undefined"
        )
    u = cfg.barrier
    qe = cfg.q_shifted
    t = u.d * u.d * cmath.exp(-2j * qe) / den
    r = u.b * cmath.exp(1j * cfg.p) * (1.0 + determinant(u) * cfg.loop_det) / den
    tilde_defined = min(abs(u.a), abs(u.d)) >= _TRIVIAL_EPS
    if tilde_defined:
        r_tilde = (r * cmath.exp(-1j * cfg.p) - u.b) / u.a
        t_tilde = t * cmath.exp(1j * qe * (cfg.m + 1)) / u.d
    else:
        r_tilde = t_tilde = complex("nan+nanj")
    return StationarySolution(
        r=r,
        t=t,
        r_tilde=r_tilde,
        t_tilde=t_tilde,
        T=abs(t) ** 2,
        R=abs(r) ** 2,
        method=Method.CLOSED_FORM,
        injection=Injection.LEFT,
        delta=cfg.delta,
        tilde_defined=tilde_defined,
    )


def build_profile(
    sol: StationarySolution, cfg: TunnelingConfig, window: tuple[int, int]
) -> AmplitudeProfile:
    """Lay the piecewise steady state onto a window of sites.

    For left injection the five branches are, with ``qe = q + delta``::

        x <= -1:    [r*exp(-ip(x+2)),        exp(i*qe*x)]
        x == 0:     [r_tilde,                1]
        0 < x < m:  [r_tilde*exp(-ipx),      t_tilde*exp(i*qe*(x-m))]
        x == m:     [0,                      t_tilde]
        x >= m+1:   [0,                      t*exp(i*qe*x)]

    The left-channel exponents decrease with ``x`` because a stationary
    left mover in the free region must reproduce itself under the coin
    phase ``exp(ip)`` applied while moving leftward.

    When ``sol`` has no interior amplitudes (``tilde_defined`` False)
    or came from right injection, the profile is produced by
    :func:`solve_general` instead, which needs no quotients.

    Raises
    ------
    WindowTooSmall
        If the window does not contain ``[-1, m+1]``.
    """
    lo, hi = int(window[0]), int(window[1])
    if lo > -1 or hi < cfg.m + 1:
        raise WindowTooSmall(
            f"window [{lo}, {hi}] must contain [-1, {cfg.m + 1}]"
        )
    if not sol.tilde_defined or sol.injection is Injection.RIGHT:
        _, profile = solve_general(
            {0: cfg.barrier, cfg.m: cfg.barrier},
            cfg.delta,
            sol.injection,
            cfg.p,
            cfg.q,
            window=(lo, hi),
        )
        return profile
    qe = cfg.q_shifted
    m = cfg.m
    n = hi - lo + 1
    psi_l = np.zeros(n, dtype=complex)
    psi_r = np.zeros(n, dtype=complex)
    for i in range(n):
        x = lo + i
        if x <= -1:
            psi_l[i] = sol.r * cmath.exp(-1j * cfg.p * (x + 2))
            psi_r[i] = cmath.exp(1j * qe * x)
        elif x == 0:
            psi_l[i] = sol.r_tilde
            psi_r[i] = 1.0
        elif x < m:
            psi_l[i] = sol.r_tilde * cmath.exp(-1j * cfg.p * x)
            psi_r[i] = sol.t_tilde * cmath.exp(1j * qe * (x - m))
        elif x == m:
            psi_r[i] = sol.t_tilde
        else:
            psi_r[i] = sol.t * cmath.exp(1j * qe * x)
    return AmplitudeProfile(x_min=lo, x_max=hi, psi_l=psi_l, psi_r=psi_r)


def solve_general(
    coins: Mapping[int, Coin],
    delta: float,
    injection: Injection,
    p: float,
    q: float,
    window: tuple[int, int] | None = None,
) -> tuple[StationarySolution, AmplitudeProfile]:
    """Solve the steady state for an arbitrary finite defect set.

    ``coins`` maps lattice positions to defect coins; every other site
    applies the free coin.  The unknowns are the two-channel amplitudes
    across the defect hull plus the reflected and transmitted
    amplitudes, tied together by the stationarity recursions and the
    scattering boundary data (unit incoming plane wave on the injection
    side, nothing incoming on the other).  ``delta`` has the same
    driven-state meaning as in :class:`TunnelingConfig`.

    Returns the solution together with a profile on ``window``
    (default: the defect hull padded by 5 sites).

    Raises
    ------
    SingularSystem
        When the assembled system is singular or its condition estimate
        exceeds 1e12, which is how a degenerate resonance shows up here.
    """
    if not coins:
        raise ModelError("need at least one defect coin")
    for pos, u in coins.items():
        if int(pos) != pos:
            raise ModelError(f"defect position {pos!r} is not an integer")
        if not isinstance(u, Coin):
            raise ModelError(f"defect at {pos} is not a Coin")
    x_lo = int(min(coins))
    x_hi = int(max(coins))
    n = x_hi - x_lo + 1
    qe = q + delta
    ea = cmath.exp(1j * p)
    ed = cmath.exp(1j * qe)

    def site(x: int) -> tuple[complex, complex, complex, complex]:
        u = coins.get(x)
        if u is None:
            return (ea, 0j, 0j, ed)
        return (u.a, u.b, u.c, u.d)

    size = 2 * n + 2
    col_r = 2 * n
    col_t = 2 * n + 1
    mat = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    row = 0

    a0, b0, _, _ = site(x_lo)
    mat[row, 0] = a0
    mat[row, n] = b0
    if injection is Injection.LEFT:
        # left-channel outflow at x_lo - 1 is the reflected wave
        mat[row, col_r] = -cmath.exp(-1j * p * (x_lo + 1))
    else:
        # for right injection the leftward outflow is the transmitted wave
        mat[row, col_t] = -1.0
    row += 1

    for x in range(x_lo, x_hi):
        i = x - x_lo
        an, bn, _, _ = site(x + 1)
        mat[row, i] = 1.0
        mat[row, i + 1] = -an
        mat[row, n + i + 1] = -bn
        row += 1

    mat[row, n - 1] = 1.0
    rhs[row] = 0.0 if injection is Injection.LEFT else 1.0
    row += 1

    for x in range(x_lo + 1, x_hi + 1):
        i = x - x_lo
        _, _, cp, dp = site(x - 1)
        mat[row, n + i] = 1.0
        mat[row, i - 1] = -cp
        mat[row, n + i - 1] = -dp
        row += 1

    _, _, ch, dh = site(x_hi)
    mat[row, n - 1] = ch
    mat[row, 2 * n - 1] = dh
    if injection is Injection.LEFT:
        mat[row, col_t] = -cmath.exp(1j * qe * (x_hi + 1))
    else:
        mat[row, col_r] = -1.0
    row += 1

    mat[row, n] = 1.0
    rhs[row] = cmath.exp(1j * qe * x_lo) if injection is Injection.LEFT else 0.0

    cond = np.linalg.cond(mat)
    if not math.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularSystem(
            f"stationary system is singular or near-singular "
            f"(condition estimate {cond:.3e}); degenerate resonance"
        )
    try:
        sol_vec = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"stationary system is singular ({exc})") from exc

    phi_l = sol_vec[:n]
    phi_r = sol_vec[n : 2 * n]
    r = complex(sol_vec[col_r])
    t = complex(sol_vec[col_t])
    if injection is Injection.LEFT:
        r_tilde = complex(phi_l[0])
        t_tilde = complex(phi_r[-1])
    else:
        r_tilde = complex(phi_r[-1])
        t_tilde = complex(phi_l[0])

    if window is None:
        window = (x_lo - 5, x_hi + 5)
    lo, hi = int(window[0]), int(window[1])
    if lo > x_lo - 1 or hi < x_hi + 1:
        raise WindowTooSmall(
            f"window [{lo}, {hi}] must contain [{x_lo - 1}, {x_hi + 1}]"
        )
    w = hi - lo + 1
    psi_l = np.zeros(w, dtype=complex)
    psi_r = np.zeros(w, dtype=complex)
    for idx in range(w):
        x = lo + idx
        if x_lo <= x <= x_hi:
            psi_l[idx] = phi_l[x - x_lo]
            psi_r[idx] = phi_r[x - x_lo]
        elif x < x_lo:
            if injection is Injection.LEFT:
                psi_l[idx] = r * cmath.exp(-1j * p * (x + 2))
                psi_r[idx] = cmath.exp(1j * qe * x)
            else:
                psi_l[idx] = t * cmath.exp(-1j * p * (x - x_lo + 1))
        else:
            if injection is Injection.LEFT:
                psi_r[idx] = t * cmath.exp(1j * qe * x)
            else:
                psi_l[idx] = cmath.exp(-1j * p * (x - x_hi))
                psi_r[idx] = r * cmath.exp(1j * qe * (x - x_hi - 1))

    solution = StationarySolution(
        r=r,
        t=t,
        r_tilde=r_tilde,
        t_tilde=t_tilde,
        T=abs(t) ** 2,
        R=abs(r) ** 2,
        method=Method.LINEAR_SYSTEM,
        injection=injection,
        delta=float(delta),
        tilde_defined=True,
    )
    profile = AmplitudeProfile(x_min=lo, x_max=hi, psi_l=psi_l, psi_r=psi_r)
    return solution, profile


def resonance_residual(cfg: TunnelingConfig) -> float:
    """Distance from the perfect-transmission condition.

    Returns ``|loop_det * det(barrier) + 1|``, which vanishes exactly
    when every reflected path interferes away and ``T = 1``.

    Raises
    ------
    TrivialBarrier
        When ``|bc| < 1e-14``: a reflectionless barrier makes the
        condition vacuous (``T = 1`` always).
    FullReflector
        When ``|bc| >= 1 - 1e-14``: nothing is transmitted through
        either barrier, so resonance is out of reach.
    """
    mod_bc = abs(cfg.bc)
    if mod_bc < _TRIVIAL_EPS:
        raise TrivialBarrier(
            f"|bc| = {mod_bc:.3e}: barrier does not couple the channels"
        )
    if mod_bc >= 1.0 - _TRIVIAL_EPS:
        raise FullReflector(f"|bc| = {mod_bc:.17g}: barrier transmits nothing")
    return abs(determinant(cfg.barrier) * cfg.loop_det + 1.0)


def stationary_measure(profile: AmplitudeProfile) -> dict[int, float]:
    """Per-site probability weight ``|psi_l|**2 + |psi_r|**2``."""
    mu = np.abs(profile.psi_l) ** 2 + np.abs(profile.psi_r) ** 2
    return {profile.x_min + i: float(mu[i]) for i in range(len(mu))}


def flux_balance(
    profile: AmplitudeProfile, interval: tuple[int, int]
) -> tuple[float, float]:
    """Probability flow into and out of ``interval`` in one step.

    ``inflow`` counts the right mover just left of the interval and the
    left mover just right of it; ``outflow`` counts the two movers
    leaving.  For a steady profile whose margin sites carry the free
    coin the two agree; mid-transient they generally do not, and both
    numbers are returned without judgment.

    Raises
    ------
    MarginViolation
        If the one-site margins fall outside the profile window.
    """
    x_lo, x_hi = int(interval[0]), int(interval[1])
    if x_hi < x_lo:
        raise ModelError(f"interval [{x_lo}, {x_hi}] is empty")
    if x_lo - 1 < profile.x_min or x_hi + 1 > profile.x_max:
        raise MarginViolation(
            f"interval [{x_lo}, {x_hi}] needs margin sites {x_lo - 1} and "
            f"{x_hi + 1} inside window [{profile.x_min}, {profile.x_max}]"
        )
    l_left, r_left = profile.at(x_lo - 1)
    l_right, r_right = profile.at(x_hi + 1)
    inflow = abs(r_left) ** 2 + abs(l_right) ** 2
    outflow = abs(l_left) ** 2 + abs(r_right) ** 2
    return (inflow, outflow)


def t_magnitude_via_beta(cfg: TunnelingConfig) -> float:
    """Transmitted magnitude from the barrier's mixing weight alone.

    Uses ``|t| = (1 - |beta|**2) / |1 - e^{i*theta}*|beta|**2|`` where
    ``|beta|**2`` comes from :func:`qrtw.coin.beta_decompose` and
    ``e^{i*theta} = -det(barrier) * loop_det`` is the phase of one
    bounce loop (including the drive shift when ``delta`` is nonzero).
    Agrees with ``abs(solve_closed_form(cfg).t)`` wherever both are
    defined.

    Raises
    ------
    FullReflector
        When the denominator vanishes, which requires ``|beta| = 1``.
    """
    beta_sq = beta_decompose(cfg.barrier).beta_sq
    ei_theta = -determinant(cfg.barrier) * cfg.loop_det
    den = abs(1.0 - ei_theta * beta_sq)
    if den < _DEGENERACY_EPS:
        raise FullReflector(
            f"|beta|**2 = {beta_sq:.17g} with a vanishing denominator: "
            "full reflector on resonance"
        )
    return (1.0 - beta_sq) / den


def profile_max_difference(
    first: AmplitudeProfile,
    second: AmplitudeProfile,
    x_lo: int | None = None,
    x_hi: int | None = None,
) -> float:
    """Sup-norm difference of two profiles over overlapping positions.

    ``x_lo``/``x_hi`` further restrict the comparison range.  Raises
    ModelError if the effective range is empty.
    """
    lo = max(first.x_min, second.x_min)
    hi = min(first.x_max, second.x_max)
    if x_lo is not None:
        lo = max(lo, int(x_lo))
    if x_hi is not None:
        hi = min(hi, int(x_hi))
    if hi < lo:
        raise ModelError("profiles do not overlap on the requested range")
    s1 = slice(lo - first.x_min, hi - first.x_min + 1)
    s2 = slice(lo - second.x_min, hi - second.x_min + 1)
    dl = np.max(np.abs(first.psi_l[s1] - second.psi_l[s2]))
    dr = np.max(np.abs(first.psi_r[s1] - second.psi_r[s2]))
    return float(max(dl, dr))


# -- serialization -----------------------------------------------------------

_CSV_HEADER = "x,psiL_re,psiL_im,psiR_re,psiR_im,mu"


def profile_to_csv(profile: AmplitudeProfile) -> str:
    """Render a profile as CSV text (header ``x,psiL_re,psiL_im,psiR_re,psiR_im,mu``).

    Floats use shortest round-trip formatting, so parsing the text back
    reproduces the amplitudes bit for bit.
    """
    lines = [_CSV_HEADER]
    for i, x in enumerate(profile.positions()):
        l = complex(profile.psi_l[i])
        r = complex(profile.psi_r[i])
        mu = abs(l) ** 2 + abs(r) ** 2
        lines.append(
            f"{x},{l.real!r},{l.imag!r},{r.real!r},{r.imag!r},{mu!r}"
        )
    return "\n".join(lines) + "\n"


def profile_from_csv(text: str) -> AmplitudeProfile:
    """Parse :func:`profile_to_csv` output back into a profile.

    The ``mu`` column is redundant and ignored.  Positions must be
    consecutive integers in ascending order.
    """
    rows = [line for line in text.strip().splitlines() if line]
    if not rows or rows[0].strip() != _CSV_HEADER:
        raise ModelError(f"profile CSV must start with header {_CSV_HEADER!r}")
    xs: list[int] = []
    psi_l: list[complex] = []
    psi_r: list[complex] = []
    for line in rows[1:]:
        parts = line.split(",")
        if len(parts) != 6:
            raise ModelError(f"profile CSV row has {len(parts)} fields: {line!r}")
        xs.append(int(parts[0]))
        psi_l.append(complex(float(parts[1]), float(parts[2])))
        psi_r.append(complex(float(parts[3]), float(parts[4])))
    if not xs:
        raise ModelError("profile CSV has no data rows")
    for prev, cur in zip(xs, xs[1:]):
        if cur != prev + 1:
            raise ModelError("profile CSV positions must be consecutive ascending")
    return AmplitudeProfile(x_min=xs[0], x_max=xs[-1], psi_l=psi_l, psi_r=psi_r)


def config_to_json(cfg: TunnelingConfig) -> dict:
    """JSON-ready dict form of a config."""
    return {
        "p": cfg.p,
        "q": cfg.q,
        "barrier": coin_to_json(cfg.barrier),
        "m": cfg.m,
        "delta": cfg.delta,
    }


def config_from_json(data: dict) -> TunnelingConfig:
    """Rebuild a config from its dict form.

    ``barrier`` accepts anything :func:`qrtw.coin.coin_from_json`
    accepts, presets included.  ``delta`` defaults to 0 when absent.
    """
    if not isinstance(data, dict):
        raise ModelError(f"config must be a JSON object, got {type(data).__name__}")
    try:
        p = float(data["p"])
        q = float(data["q"])
        barrier = coin_from_json(data["barrier"])
        m = data["m"]
    except KeyError as exc:
        raise ModelError(f"config is missing field {exc.args[0]!r}") from exc
    delta = float(data.get("delta", 0.0))
    return TunnelingConfig(p=p, q=q, barrier=barrier, m=m, delta=delta)
