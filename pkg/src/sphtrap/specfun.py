"""Spherical Bessel functions, their radial zeros, and spherical harmonics.

This module is the special-function substrate for the moving-wall sphere
problem.  Everything downstream (mode overlaps, spectral dynamics, the
propagator) consumes three things from here:

Evaluation
    ``sph_bessel_j`` and ``sph_bessel_j_prime`` wrap the regular spherical
    Bessel function of the first kind j_l and its derivative, with domain
    checking for orders up to ``ORDER_MAX`` and x >= 0.

Zeros
    ``build_zero_table`` produces the dense table of positive zeros x_ln
    (j_l(x_ln) = 0, n = 1, 2, ...).  The l = 0 row is exact, x_0n = n*pi.
    Higher rows are obtained from the interlacing property

        x_{l-1,n} < x_{l,n} < x_{l-1,n+1}

    which brackets every zero of order l between consecutive zeros of
    order l - 1; a safeguarded Newton iteration refines each bracket to
    |dx| < 1e-13.  A bracket without a sign change aborts loudly, since
    it can only mean the evaluation itself is broken.

Harmonics
    ``sph_harmonic`` evaluates the complex spherical harmonic Y_lm with
    the Condon-Shortley phase, normalized so that Y_00 = 1/sqrt(4*pi).

Zero tables are immutable once built.  ``shared_zero_table`` keeps one
grow-only process-wide table behind a lock so concurrent callers always
see identical values.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import sph_harm_y, spherical_jn

from .errors import BracketError, CacheError, DomainError

#: Largest supported order for j_l and Y_lm.
ORDER_MAX = 256

#: Zeros are refined until Newton steps fall below this size.
ZERO_STEP_TOL = 1e-13

#: Residual bound |j_l(x_ln)| every table entry must satisfy.
ZERO_RESIDUAL_TOL = 1e-12

_NEWTON_MAX_ITER = 80


@dataclass(frozen=True)
class ModeIndex:
    """Quantum numbers (l, n, m) of one mode of the sphere.

    l is the orbital index, n >= 1 counts the radial zeros, and m is the
    azimuthal index with |m| <= l.
    """

    l: int
    n: int
    m: int = 0

    def __post_init__(self) -> None:
        if not (isinstance(self.l, int) and isinstance(self.n, int) and isinstance(self.m, int)):
            raise DomainError("mode indices must be integers")
        if self.l < 0 or self.l > ORDER_MAX:
            raise DomainError(f"order l={self.l} outside [0, {ORDER_MAX}]")
        if self.n < 1:
            raise DomainError(f"radial index n={self.n} must be >= 1")
        if abs(self.m) > self.l:
            raise DomainError(f"|m|={abs(self.m)} exceeds l={self.l}")


def _check_order(l: int) -> None:
    if not isinstance(l, (int, np.integer)):
        raise DomainError(f"order must be an integer, got {l!r}")
    if l < 0 or l > ORDER_MAX:
        raise DomainError(f"order l={l} outside [0, {ORDER_MAX}]")


def _check_argument(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("argument x must be finite and >= 0")
    return arr


def sph_bessel_j(l: int, x):
    """Regular spherical Bessel function j_l(x).

    Accepts a scalar or array argument; x must be >= 0 and l an integer
    in [0, ORDER_MAX].  j_0(0) = 1 and j_l(0) = 0 for l >= 1.  Values
    below the double-precision underflow threshold (deep in the l >> x
    turning region) round to 0.
    """
    _check_order(l)
    arr = _check_argument(x)
    out = spherical_jn(l, arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def sph_bessel_j_prime(l: int, x):
    """Derivative j_l'(x), including the correct limits at x = 0.

    j_0'(0) = 0, j_1'(0) = 1/3, and j_l'(0) = 0 for l >= 2; elsewhere
    the standard recurrence j_l' = j_{l-1} - (l+1)/x * j_l is used.
    """
    _check_order(l)
    arr = _check_argument(x)
    out = spherical_jn(l, arr, derivative=True)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def sph_harmonic(l: int, m: int, theta, phi):
    """Complex spherical harmonic Y_lm(theta, phi).

    theta is the polar angle, phi the azimuth.  The Condon-Shortley
    phase is included and Y_00 = 1/sqrt(4*pi).
    """
    _check_order(l)
    if not isinstance(m, (int, np.integer)) or abs(m) > l:
        raise DomainError(f"azimuthal index m={m} invalid for l={l}")
    out = sph_harm_y(l, m, theta, phi)
    if np.isscalar(theta) and np.isscalar(phi):
        return complex(out)
    return out


# =========================================================================
# Zero table
# =========================================================================


@dataclass(frozen=True)
class BesselZeroTable:
    """Dense table of spherical Bessel zeros x_ln with cached j_{l+1}(x_ln).

    ``zeros[l, n-1]`` holds the n-th positive zero of j_l; ``j_next``
    holds j_{l+1} at that zero (signed), which fixes the mode
    normalization through |j_{l+1}(x_ln)|.
    """

    l_max: int
    n_max: int
    zeros: np.ndarray
    j_next: np.ndarray

    def _check_index(self, l: int, n: int) -> None:
        if not (0 <= l <= self.l_max):
            raise DomainError(f"order l={l} outside table range [0, {self.l_max}]")
        if not (1 <= n <= self.n_max):
            raise DomainError(f"radial index n={n} outside table range [1, {self.n_max}]")

    def zero(self, l: int, n: int) -> float:
        """The n-th positive zero x_ln (n is 1-based)."""
        self._check_index(l, n)
        return float(self.zeros[l, n - 1])

    def zeros_row(self, l: int, n_max: int | None = None) -> np.ndarray:
        """Zeros x_l1 .. x_l,n_max as a read-only view."""
        n_max = self.n_max if n_max is None else n_max
        self._check_index(l, n_max)
        row = self.zeros[l, :n_max]
        row.flags.writeable = False if row.flags.owndata else row.flags.writeable
        return row

    def j_next_at_zero(self, l: int, n: int) -> float:
        """j_{l+1}(x_ln), signed."""
        self._check_index(l, n)
        return float(self.j_next[l, n - 1])

    def j_next_row(self, l: int, n_max: int | None = None) -> np.ndarray:
        n_max = self.n_max if n_max is None else n_max
        self._check_index(l, n_max)
        return self.j_next[l, :n_max]

    def covers(self, l_max: int, n_max: int) -> bool:
        return self.l_max >= l_max and self.n_max >= n_max


def _refine_zeros(l: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Newton-refine one zero of j_l inside each bracket (lo, hi).

    Brackets come from interlacing, so a missing sign change means the
    evaluation is inaccurate; that aborts rather than degrades.
    """
    f_lo = spherical_jn(l, lo)
    f_hi = spherical_jn(l, hi)
    if np.any(f_lo == 0.0) or np.any(f_hi == 0.0):
        # A bracket endpoint exactly on a zero of j_l cannot happen for
        # interlaced orders; treat it as a lost bracket.
        raise BracketError(f"bracket endpoint is a zero of j_{l}")
    if np.any(np.sign(f_lo) == np.sign(f_hi)):
        bad = int(np.argmax(np.sign(f_lo) == np.sign(f_hi)))
        raise BracketError(
            f"no sign change of j_{l} in bracket ({lo[bad]:.6f}, {hi[bad]:.6f})"
        )

    lo = lo.copy()
    hi = hi.copy()
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_MAX_ITER):
        f = spherical_jn(l, x)
        # Keep the bracket tight around the sign change.
        on_lo_side = np.sign(f) == np.sign(f_lo)
        lo = np.where(on_lo_side & (f != 0.0), x, lo)
        hi = np.where(on_lo_side | (f == 0.0), hi, x)
        fp = spherical_jn(l, x, derivative=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = x - f / fp
        outside = ~np.isfinite(x_new) | (x_new <= lo) | (x_new >= hi)
        x_new = np.where(outside, 0.5 * (lo + hi), x_new)
        if np.all(np.abs(x_new - x) < ZERO_STEP_TOL):
            # One unclipped polish step picks up the quadratic tail.
            f = spherical_jn(l, x_new)
            fp = spherical_jn(l, x_new, derivative=True)
            return x_new - f / fp
        x = x_new
    raise BracketError(f"Newton refinement did not converge for order {l}")


def build_zero_table(l_max: int, n_max: int) -> BesselZeroTable:
    """Build the zero table for all orders l <= l_max and indices n <= n_max.

    Row l is grown from row l - 1 by interlacing, so internally each row
    is built with l_max - l extra zeros.  Every entry satisfies
    |j_l(x_ln)| < ZERO_RESIDUAL_TOL.
    """
    _check_order(l_max)
    if n_max < 1:
        raise DomainError(f"n_max={n_max} must be >= 1")

    width = n_max + l_max
    rows = [math.pi * np.arange(1, width + 1)]
    for l in range(1, l_max + 1):
        prev = rows[l - 1]
        rows.append(_refine_zeros(l, prev[:-1], prev[1:]))

    zeros = np.empty((l_max + 1, n_max))
    j_next = np.empty((l_max + 1, n_max))
    for l in range(l_max + 1):
        zeros[l] = rows[l][:n_max]
        j_next[l] = spherical_jn(l + 1, zeros[l])

    residual = np.abs(spherical_jn(np.arange(l_max + 1)[:, None], zeros))
    if np.any(residual >= ZERO_RESIDUAL_TOL):
        worst = np.unravel_index(np.argmax(residual), residual.shape)
        raise BracketError(
            f"zero table residual {residual[worst]:.3e} at l={worst[0]}, "
            f"n={worst[1] + 1} exceeds {ZERO_RESIDUAL_TOL:.1e}"
        )
    return BesselZeroTable(l_max=l_max, n_max=n_max, zeros=zeros, j_next=j_next)


_shared_lock = threading.Lock()
_shared_table: BesselZeroTable | None = None


def shared_zero_table(l_max: int, n_max: int) -> BesselZeroTable:
    """Process-wide zero table covering at least (l_max, n_max).

    The table only ever grows; values for a given (l, n) never change, so
    concurrent readers are safe.
    """
    global _shared_table
    with _shared_lock:
        if _shared_table is None or not _shared_table.covers(l_max, n_max):
            grown_l = l_max if _shared_table is None else max(l_max, _shared_table.l_max)
            grown_n = n_max if _shared_table is None else max(n_max, _shared_table.n_max)
            _shared_table = build_zero_table(grown_l, grown_n)
        return _shared_table


# =========================================================================
# On-disk cache
# =========================================================================

_CACHE_HEADER = "l,n,zero"


def save_zero_table(table: BesselZeroTable, path) -> None:
    """Write the table as CSV rows ``l,n,zero`` with 17 significant digits."""
    lines = [f"# l_max={table.l_max}", f"# n_max={table.n_max}", _CACHE_HEADER]
    for l in range(table.l_max + 1):
        for n in range(1, table.n_max + 1):
            lines.append(f"{l},{n},{table.zeros[l, n - 1]:.17g}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_zero_table(path) -> BesselZeroTable:
    """Load a cached table and revalidate every entry.

    Any parse problem, missing entry, or residual |j_l(x_ln)| at or above
    ZERO_RESIDUAL_TOL raises CacheError: a stale or corrupted cache must
    never be silently accepted.
    """
    try:
        with open(path, "r", encoding="ascii") as fh:
            raw = fh.read().splitlines()
    except OSError as exc:
        raise CacheError(f"cannot read zero table cache {path}: {exc}") from exc

    body = [ln for ln in raw if ln and not ln.startswith("#")]
    if not body or body[0] != _CACHE_HEADER:
        raise CacheError(f"zero table cache {path} missing '{_CACHE_HEADER}' header")
    entries = {}
    for ln in body[1:]:
        parts = ln.split(",")
        try:
            l, n, x = int(parts[0]), int(parts[1]), float(parts[2])
        except (IndexError, ValueError) as exc:
            raise CacheError(f"malformed zero table row {ln!r}") from exc
        entries[(l, n)] = x
    if not entries:
        raise CacheError(f"zero table cache {path} has no data rows")

    l_max = max(l for l, _ in entries)
    n_max = max(n for _, n in entries)
    zeros = np.full((l_max + 1, n_max), np.nan)
    for (l, n), x in entries.items():
        zeros[l, n - 1] = x
    if np.any(~np.isfinite(zeros)):
        raise CacheError(f"zero table cache {path} is missing entries")

    residual = np.abs(spherical_jn(np.arange(l_max + 1)[:, None], zeros))
    if np.any(residual >= ZERO_RESIDUAL_TOL):
        worst = np.unravel_index(np.argmax(residual), residual.shape)
        raise CacheError(
            f"cached zero at l={worst[0]}, n={worst[1] + 1} fails revalidation: "
            f"|j_l(x)| = {residual[worst]:.3e}"
        )
    if np.any(np.diff(zeros, axis=1) <= 0.0):
        raise CacheError(f"cached zeros in {path} are not strictly increasing")

    j_next = spherical_jn(np.arange(1, l_max + 2)[:, None], zeros)
    return BesselZeroTable(l_max=l_max, n_max=n_max, zeros=zeros, j_next=j_next)
