"""
Dempster-Shafer structures and probability boxes.

A structure is a list of closed focal intervals with masses. Its cumulative
plausibility and belief functions form a p-box. P-boxes from several
sources are aggregated by intersection (all sources trusted) or by
enveloping (at least one source trusted), and translated back into a
structure by canonical discretization. Kolmogorov-Smirnov bands give a
p-box for raw data; those are confidence statements, not sure bounds, and
are tagged as such.

Masses may be ``fractions.Fraction``; combination then stays exact.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy import stats

from .errors import DomainError, InconsistentEvidenceError, MixedEvidenceError, TotalConflictError

__all__ = [
    "DempsterShaferStructure",
    "PBox",
    "plausibility_belief",
    "plausibility",
    "belief",
    "dempster_combine",
    "pbox_intersect",
    "pbox_envelope",
    "ds_from_pbox",
    "ks_bounds",
    "ks_critical_value",
    "format_ds",
    "parse_ds",
    "format_pbox",
    "parse_pbox",
]

SURE = "sure"
STATISTICAL = "statistical"
_MASS_TOL = 1e-12

# Critical values D(alpha, n) for n = 1..40. These are the classical table
# values, i.e. the exact one-sided statistic at level alpha/2, rounded to
# five decimals.
_KS_TABLE = {
    0.2: (0.9, 0.68377, 0.56481, 0.49265, 0.44698, 0.41037, 0.38148, 0.35831, 0.3391, 0.3226,
          0.30829, 0.29577, 0.2847, 0.27481, 0.26589, 0.25778, 0.25039, 0.2436, 0.23735, 0.23156,
          0.22617, 0.22115, 0.21646, 0.21205, 0.2079, 0.20399, 0.2003, 0.1968, 0.19348, 0.19032,
          0.18732, 0.18445, 0.18171, 0.17909, 0.17659, 0.17418, 0.17188, 0.16966, 0.16753, 0.16547),
    0.1: (0.95, 0.77639, 0.63604, 0.56522, 0.50945, 0.46799, 0.43607, 0.40962, 0.38746, 0.36866,
          0.35242, 0.33815, 0.32549, 0.31417, 0.30397, 0.29472, 0.28627, 0.27851, 0.27136, 0.26473,
          0.25858, 0.25283, 0.24746, 0.24242, 0.23768, 0.2332, 0.22898, 0.22497, 0.22117, 0.21756,
          0.21412, 0.21085, 0.20771, 0.20472, 0.20185, 0.1991, 0.19646, 0.19392, 0.19148, 0.18913),
    0.05: (0.975, 0.84189, 0.7076, 0.62394, 0.56328, 0.51926, 0.48342, 0.45427, 0.43001, 0.40925,
           0.39122, 0.37543, 0.36143, 0.3489, 0.3376, 0.32733, 0.31796, 0.30936, 0.30143, 0.29408,
           0.28724, 0.28087, 0.2749, 0.26931, 0.26404, 0.25908, 0.25438, 0.24993, 0.24571, 0.2417,
           0.23788, 0.23424, 0.23076, 0.22743, 0.22425, 0.22119, 0.21826, 0.21544, 0.21273, 0.21012),
    0.01: (0.995, 0.92929, 0.829, 0.73424, 0.66853, 0.61661, 0.57581, 0.54179, 0.51332, 0.48893,
           0.4677, 0.44905, 0.43247, 0.41762, 0.4042, 0.39201, 0.38086, 0.37062, 0.36117, 0.35241,
           0.34426, 0.33666, 0.32954, 0.32286, 0.31657, 0.31063, 0.30502, 0.29971, 0.29466, 0.28986,
           0.28529, 0.28094, 0.27677, 0.27279, 0.26897, 0.26532, 0.2618, 0.25843, 0.25518, 0.25205),
}
KS_TABLE_MAX_N = 40


def _total(values):
    values = list(values)
    if all(isinstance(v, Rational) for v in values):
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


def _check_kind(kind):
    if kind not in (SURE, STATISTICAL):
        raise DomainError(f"kind must be {SURE!r} or {STATISTICAL!r}, got {kind!r}")


@dataclass(frozen=True)
class DempsterShaferStructure:
    """
    Focal intervals ``[lows[i], highs[i]]`` with masses summing to one.

    ``kind`` is ``'sure'`` for expert bounds and ``'statistical'`` for
    confidence bounds derived from data.
    """

    lows: tuple
    highs: tuple
    masses: tuple
    kind: str = SURE

    def __post_init__(self):
        lows = tuple(float(x) for x in self.lows)
        highs = tuple(float(y) for y in self.highs)
        masses = tuple(m if isinstance(m, Rational) else float(m) for m in self.masses)
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)
        object.__setattr__(self, "masses", masses)
        _check_kind(self.kind)
        if not (len(lows) == len(highs) == len(masses)) or not lows:
            raise DomainError("need at least one focal element, with matching lengths")
        for x, y in zip(lows, highs):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise DomainError("focal elements must be finite; declare support bounds instead of infinities")
            if x > y:
                raise DomainError(f"focal element [{x}, {y}] has low > high")
        if any(not m > 0 for m in masses):
            raise DomainError("masses must be > 0")
        if abs(float(_total(masses)) - 1.0) > _MASS_TOL:
            raise DomainError(f"masses sum to {float(_total(masses))!r}, not 1")

    @classmethod
    def from_elements(cls, elements, kind: str = SURE) -> "DempsterShaferStructure":
        """Build from ``[((x, y), p), ...]``."""
        lows, highs, masses = zip(*[(x, y, p) for (x, y), p in elements])
        return cls(lows, highs, masses, kind)

    def elements(self):
        """Focal elements sorted by ``(low, high)`` as ``((x, y), p)`` pairs."""
        return sorted(zip(zip(self.lows, self.highs), self.masses))

    def canonical(self) -> "DempsterShaferStructure":
        """Sorted copy with identical focal elements merged."""
        acc = defaultdict(list)
        for iv, p in zip(zip(self.lows, self.highs), self.masses):
            acc[iv].append(p)
        return DempsterShaferStructure.from_elements(
            [(iv, _total(ps)) for iv, ps in sorted(acc.items())], self.kind
        )

    def __len__(self):
        return len(self.masses)


@dataclass(frozen=True)
class PBox:
    """
    Lower and upper distribution bounds as right-continuous step functions.

    ``lower[i]`` and ``upper[i]`` hold on ``[grid[i], grid[i+1])``; both are
    zero left of ``grid[0]``. The grid may start at ``-inf`` or end at
    ``+inf``.
    """

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    kind: str = SURE

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float).ravel()
        lo = np.asarray(self.lower, dtype=float).ravel()
        up = np.asarray(self.upper, dtype=float).ravel()
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        _check_kind(self.kind)
        if not (g.size == lo.size == up.size) or g.size == 0:
            raise DomainError("grid, lower and upper must be non-empty and of equal length")
        if np.any(np.diff(g) <= 0):
            raise DomainError("grid must be strictly ascending")
        for name, f in (("lower", lo), ("upper", up)):
            if np.any(f < 0) or np.any(f > 1) or np.any(np.diff(f) < 0):
                raise DomainError(f"{name} bound must be nondecreasing in [0, 1]")
        bad = np.nonzero(lo > up + _MASS_TOL)[0]
        if bad.size:
            raise InconsistentEvidenceError(
                f"lower bound exceeds upper bound at x = {g[bad[0]]}", x=float(g[bad[0]])
            )

    @classmethod
    def from_interval(cls, a: float, b: float, kind: str = SURE) -> "PBox":
        """The p-box of a quantity known only to lie in ``[a, b]``."""
        if a > b:
            raise DomainError("need a <= b")
        if a == b:
            return cls([a], [1.0], [1.0], kind)
        return cls([a, b], [0.0, 1.0], [1.0, 1.0], kind)

    def _at(self, values, x):
        idx = np.searchsorted(self.grid, np.asarray(x, dtype=float), side="right") - 1
        out = np.where(idx >= 0, values[np.clip(idx, 0, None)], 0.0)
        return out if out.ndim else float(out)

    def lower_at(self, x):
        return self._at(self.lower, x)

    def upper_at(self, x):
        return self._at(self.upper, x)

    def __eq__(self, other):
        if not isinstance(other, PBox):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.grid, other.grid)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    __hash__ = None


def plausibility_belief(ds: DempsterShaferStructure) -> PBox:
    """
    Cumulative plausibility (upper) and belief (lower) of a structure.

    ``F_U(z)`` sums masses with ``low <= z`` and ``F_L(z)`` those with
    ``high <= z``.
    """
    grid = np.unique(np.concatenate([ds.lows, ds.highs]))
    m = [float(p) for p in ds.masses]
    upper = np.array([math.fsum(p for x, p in zip(ds.lows, m) if x <= z) for z in grid])
    lower = np.array([math.fsum(p for y, p in zip(ds.highs, m) if y <= z) for z in grid])
    return PBox(grid, np.minimum(lower, 1.0), np.minimum(upper, 1.0), ds.kind)


def plausibility(ds: DempsterShaferStructure, query: tuple[float, float] | None) -> float:
    """Mass of focal elements meeting the closed interval ``query``; 0 for an empty query."""
    if query is None:
        return 0.0
    a, b = query
    if a > b:
        return 0.0
    return float(_total([p for x, y, p in zip(ds.lows, ds.highs, ds.masses) if x <= b and y >= a] or [0]))


def belief(ds: DempsterShaferStructure, query: tuple[float, float] | None) -> float:
    """Mass of focal elements contained in the closed interval ``query``."""
    if query is None:
        return 0.0
    a, b = query
    if a > b:
        return 0.0
    return float(_total([p for x, y, p in zip(ds.lows, ds.highs, ds.masses) if x >= a and y <= b] or [0]))


def dempster_combine(a: DempsterShaferStructure, b: DempsterShaferStructure, allow_mixed: bool = False):
    """
    Dempster's rule for two independent structures.

    Parameters
    ----------
    a, b : DempsterShaferStructure
    allow_mixed : bool
        Must be set explicitly to combine a statistical (confidence-band)
        structure with a sure one; how to interpret that result is not
        settled.

    Returns
    -------
    combined : DempsterShaferStructure
        Nonempty pairwise intersections, identical ones merged, sorted.
    conflict : float or Fraction
        Total product mass on empty intersections.

    Raises
    ------
    TotalConflictError
        Every pair of focal elements is disjoint.
    MixedEvidenceError
        Kinds differ and ``allow_mixed`` is False.
    """
    if a.kind != b.kind and not allow_mixed:
        raise MixedEvidenceError(
            f"refusing to combine {a.kind} and {b.kind} evidence; pass allow_mixed=True to acknowledge"
        )
    joint = defaultdict(list)
    empty = []
    for x1, y1, p1 in zip(a.lows, a.highs, a.masses):
        for x2, y2, p2 in zip(b.lows, b.highs, b.masses):
            lo, hi = max(x1, x2), min(y1, y2)
            if lo <= hi:
                joint[(lo, hi)].append(p1 * p2)
            else:
                empty.append(p1 * p2)
    if not joint:
        raise TotalConflictError("the structures are in total conflict (K = 1)")
    conflict = _total(empty) if empty else type(_total(joint[next(iter(joint))]))(0)
    norm = 1 - conflict
    kind = a.kind if a.kind == b.kind else STATISTICAL
    elements = [(iv, _total(ps) / norm) for iv, ps in sorted(joint.items())]
    return DempsterShaferStructure.from_elements(elements, kind), conflict


def _common_grid(boxes):
    return np.unique(np.concatenate([b.grid for b in boxes]))


def _combined_kind(boxes):
    return STATISTICAL if any(b.kind == STATISTICAL for b in boxes) else SURE


def pbox_intersect(boxes) -> PBox:
    """
    Tightest box consistent with every source: ``min`` of uppers, ``max`` of lowers.

    Evaluated on the union of jump points, which is exact for step bounds.

    Raises
    ------
    InconsistentEvidenceError
        The sources disagree somewhere; ``err.x`` is the first such point.
    """
    boxes = list(boxes)
    if not boxes:
        raise DomainError("need at least one p-box")
    grid = _common_grid(boxes)
    upper = np.min([b.upper_at(grid) for b in boxes], axis=0)
    lower = np.max([b.lower_at(grid) for b in boxes], axis=0)
    return PBox(grid, lower, upper, _combined_kind(boxes))


def pbox_envelope(boxes) -> PBox:
    """Box containing every source: ``max`` of uppers, ``min`` of lowers."""
    boxes = list(boxes)
    if not boxes:
        raise DomainError("need at least one p-box")
    grid = _common_grid(boxes)
    upper = np.max([b.upper_at(grid) for b in boxes], axis=0)
    lower = np.min([b.lower_at(grid) for b in boxes], axis=0)
    return PBox(grid, lower, upper, _combined_kind(boxes))


def ds_from_pbox(p: PBox, n_slices: int) -> DempsterShaferStructure:
    """
    Canonical discretization into ``n_slices`` focal elements of mass ``1/n``.

    Element ``i`` spans from the first point where the upper bound exceeds
    ``(i-1)/n`` to the first point where the lower bound reaches ``i/n``.
    Both bounds must reach 1 on a finite grid point.
    """
    n = int(n_slices)
    if n < 1:
        raise DomainError("n_slices must be >= 1")
    tol = 1e-12
    lows, highs = [], []
    for i in range(1, n + 1):
        ju = np.nonzero(p.upper > (i - 1) / n + tol)[0]
        jl = np.nonzero(p.lower >= i / n - tol)[0]
        if ju.size == 0 or jl.size == 0:
            raise DomainError("p-box bounds do not reach 1 on the grid; declare support bounds")
        lo, hi = p.grid[ju[0]], p.grid[jl[0]]
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("p-box has infinite tails; declare support bounds before discretizing")
        lows.append(lo)
        highs.append(hi)
    return DempsterShaferStructure(lows, highs, [Fraction(1, n)] * n, p.kind).canonical()


def ks_critical_value(alpha: float, n: int) -> float:
    """
    Kolmogorov-Smirnov critical value ``D(alpha, n)``.

    For ``n <= 40`` the classical table is used at alpha in
    ``{0.2, 0.1, 0.05, 0.01}``; other alpha at small ``n`` use the exact
    one-sided law at ``alpha/2`` that the table is built from. For
    ``n > 40`` the asymptotic ``sqrt(-ln(alpha/2) / (2n)) - 1/(6n)``
    applies; the ``1/(6n)`` term keeps the value decreasing across the
    switch at ``n = 40``.

    >>> ks_critical_value(0.05, 10)
    0.40925
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if n <= KS_TABLE_MAX_N:
        for level, row in _KS_TABLE.items():
            if math.isclose(alpha, level, rel_tol=0, abs_tol=1e-12):
                return row[n - 1]
        return float(stats.ksone.ppf(1.0 - alpha / 2.0, n))
    return math.sqrt(-math.log(alpha / 2.0) / (2.0 * n)) - 1.0 / (6.0 * n)


def ks_bounds(samples, alpha: float, support: tuple[float, float] | None = None) -> PBox:
    """
    Distribution-free confidence band ``F_n -/+ D(alpha, n)`` clipped to ``[0, 1]``.

    Parameters
    ----------
    samples : array_like
        Independent draws, at least one.
    alpha : float
        One minus the confidence level.
    support : (lo, hi), optional
        Known range of the quantity. The upper bound is zero below ``lo``
        and the lower bound is one from ``hi`` on. Without it the tails run
        to ``-inf`` and ``+inf``.

    Returns
    -------
    PBox
        Tagged ``'statistical'``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise DomainError("need at least one sample")
    d = ks_critical_value(alpha, x.size)
    lo, hi = (-np.inf, np.inf) if support is None else (float(support[0]), float(support[1]))
    if not lo < hi:
        raise DomainError("support must satisfy lo < hi")
    if x[0] < lo or x[-1] > hi:
        raise DomainError(f"samples fall outside the declared support [{lo}, {hi}]")
    grid = np.unique(np.concatenate([[lo], x, [hi]]))
    ecdf = np.searchsorted(x, grid, side="right") / x.size
    upper = np.minimum(ecdf + d, 1.0)
    lower = np.maximum(ecdf - d, 0.0)
    lower[grid >= hi] = 1.0
    return PBox(grid, lower, upper, STATISTICAL)


# ---------------------------------------------------------------------------
# Plain-text formats
# ---------------------------------------------------------------------------

def _fmt_mass(p):
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}"
    return repr(float(p))


def format_ds(ds: DempsterShaferStructure) -> str:
    """One line ``x y p`` per focal element; a ``# kind:`` header for statistical evidence."""
    lines = [] if ds.kind == SURE else [f"# kind: {ds.kind}"]
    lines += [f"{x!r} {y!r} {_fmt_mass(p)}" for (x, y), p in ds.elements()]
    return "\n".join(lines) + "\n"


def parse_ds(text: str) -> DempsterShaferStructure:
    """Inverse of :func:`format_ds`; masses written ``a/b`` are read as exact fractions."""
    kind = SURE
    elements = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            if line[1:].strip().startswith("kind:"):
                kind = line.split(":", 1)[1].strip()
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise DomainError(f"line {lineno}: expected 'x y p', got {raw!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
            p = Fraction(parts[2]) if "/" in parts[2] else float(parts[2])
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        elements.append(((x, y), p))
    if not elements:
        raise DomainError("no focal elements found")
    return DempsterShaferStructure.from_elements(elements, kind)


def format_pbox(p: PBox) -> str:
    """Columns ``x F_L F_U`` with a header line."""
    lines = [f"# kind: {p.kind}", "x F_L F_U"]
    lines += [f"{x!r} {lo!r} {up!r}" for x, lo, up in zip(p.grid.tolist(), p.lower.tolist(), p.upper.tolist())]
    return "\n".join(lines) + "\n"


def parse_pbox(text: str) -> PBox:
    kind = SURE
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            if line[1:].strip().startswith("kind:"):
                kind = line.split(":", 1)[1].strip()
            continue
        if not line or line.split()[0] == "x":
            continue
        parts = line.split()
        if len(parts) != 3:
            raise DomainError(f"line {lineno}: expected 'x F_L F_U', got {raw!r}")
        rows.append([float(v) for v in parts])
    if not rows:
        raise DomainError("no p-box rows found")
    a = np.array(rows)
    return PBox(a[:, 0], a[:, 1], a[:, 2], kind)
