"""Root-type classification of the Weyl quartics and their structure-group action.

A quartic is stored by its five curvature scalars ``psi = (Psi0, ..., Psi4)``
and read as the binary form

    W(xi1, xi0) = Psi4 xi1^4 + 4 Psi3 xi1^3 xi0 + 6 Psi2 xi1^2 xi0^2 + 4 Psi1 xi1 xi0^3 + Psi0 xi0^4

with affine parameter ``lam = xi1 / xi0``.  A vanishing ``Psi4`` is a root at
``lam = inf``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

TYPE_NAMES = ("Gr", "Gc", "Gcc", "IIr", "IIc", "III", "Dr", "Dc", "N", "O")
SYMBOLS = {
    "Gr": "Gʳ", "Gc": "Gᶜ", "Gcc": "Gᶜᶜ", "IIr": "IIʳ", "IIc": "IIᶜ",
    "III": "III", "Dr": "Dʳ", "Dc": "Dᶜ", "N": "N", "O": "O",
}
BINOMIAL = (1, 4, 6, 4, 1)
# partitions whose cluster diameters exceed BAND times the merge radius are never
# considered; those below radius / BAND are unambiguous
BAND = 3.0
EPS = np.finfo(float).eps


class SingularTransformError(ValueError):
    pass


@dataclass(frozen=True)
class WeylQuartic:
    psi: tuple
    side: str = "asd"

    def __post_init__(self):
        if len(self.psi) != 5:
            raise ValueError("a Weyl quartic has exactly five coefficients")
        if self.side not in ("asd", "sd"):
            raise ValueError(f"side must be 'asd' or 'sd', got {self.side!r}")
        object.__setattr__(self, "psi", tuple(self.psi))

    @classmethod
    def from_decomposition(cls, decomp, side: str = "asd") -> "WeylQuartic":
        vals = decomp.psi if side == "asd" else decomp.psi_prime
        return cls(tuple(float(v) for v in vals), side)

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients of W(lam), highest power first."""
        return np.array([float(BINOMIAL[k] * self.psi[k]) for k in range(4, -1, -1)])

    def __call__(self, lam):
        c = self.coefficients
        return np.polyval(c, lam)

    def max_abs(self) -> float:
        return float(max(abs(float(p)) for p in self.psi))

    def is_exact(self) -> bool:
        return all(isinstance(p, (int, Fraction)) and not isinstance(p, bool) for p in self.psi)


@dataclass(frozen=True)
class Root:
    value: complex  # complex('inf') for the point at infinity
    multiplicity: int
    real: bool

    @property
    def at_infinity(self) -> bool:
        return np.isinf(self.value.real) or np.isinf(self.value.imag)


@dataclass(frozen=True)
class PetrovType:
    name: str
    roots: tuple = ()
    uncertain: bool = False
    candidates: tuple = ()

    def __post_init__(self):
        if self.name not in TYPE_NAMES:
            raise ValueError(f"unknown root type {self.name!r}")

    @property
    def symbol(self) -> str:
        return SYMBOLS[self.name]

    @property
    def group(self) -> str:
        """Coarse Petrov letter: G, II, III, D, N or O."""
        return self.name.rstrip("rc") or self.name

    def matches(self, expected: str) -> bool:
        """True if ``expected`` names this type exactly or its coarse letter."""
        return not self.uncertain and expected in (self.name, self.group)

    def __str__(self) -> str:
        if self.uncertain:
            return "uncertain(" + "|".join(self.candidates) + ")"
        return self.name


def _type_from_clusters(sizes_real: list[tuple[int, bool]]) -> str:
    sizes = sorted(m for m, _ in sizes_real)
    real_simple = sum(1 for m, r in sizes_real if m == 1 and r)
    if sizes == [1, 1, 1, 1]:
        return {4: "Gr", 2: "Gc", 0: "Gcc"}[real_simple]
    if sizes == [1, 1, 2]:
        return "IIr" if real_simple == 2 else "IIc"
    if sizes == [1, 3]:
        return "III"
    if sizes == [2, 2]:
        return "Dr" if all(r for _, r in sizes_real) else "Dc"
    if sizes == [4]:
        return "N"
    raise ValueError(f"impossible cluster pattern {sizes_real}")


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


_PARTITIONS = {n: [tuple(tuple(c) for c in p) for p in _set_partitions(list(range(n)))] for n in range(5)}


def chordal(z1: complex, z2: complex) -> float:
    """Chordal distance on the projective line (inf allowed)."""
    inf1, inf2 = np.isinf(abs(z1)), np.isinf(abs(z2))
    if inf1 and inf2:
        return 0.0
    if inf1:
        return 1.0 / np.sqrt(1.0 + abs(z2) ** 2)
    if inf2:
        return 1.0 / np.sqrt(1.0 + abs(z1) ** 2)
    return abs(z1 - z2) / np.sqrt((1.0 + abs(z1) ** 2) * (1.0 + abs(z2) ** 2))


def _rotated_roots(coef_desc: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Roots of the binary quartic in a rotated chart where the leading coefficient is largest.

    Returns (mu_roots, c, s) with lam = (c mu - s) / (s mu + c).
    """
    a = coef_desc
    best = (-1.0, 1.0, 0.0)
    for t in np.linspace(0.0, np.pi, 48, endpoint=False):
        c, s = np.cos(t), np.sin(t)
        lead = abs(sum(a[k] * c ** (4 - k) * s ** k for k in range(5)))
        if lead > best[0]:
            best = (lead, c, s)
    _, c, s = best
    # expand f(c u - s v, s u + c v) with v = 1
    g = np.zeros(5)
    for k in range(5):
        term = np.array([1.0])
        for _ in range(4 - k):
            term = np.convolve(term, [c, -s])
        for _ in range(k):
            term = np.convolve(term, [s, c])
        g = g + float(a[k]) * term
    return np.roots(g), c, s


def _conjugate_map(roots: np.ndarray) -> list[int]:
    n = len(roots)
    partner = [-1] * n
    free = set(range(n))
    for i in sorted(range(n), key=lambda k: abs(roots[k].imag)):
        if i not in free:
            continue
        free.discard(i)
        if roots[i].imag == 0.0 or not free:
            partner[i] = i
            continue
        j = min(free, key=lambda k: abs(roots[k] - np.conj(roots[i])))
        if abs(roots[j] - np.conj(roots[i])) <= max(abs(roots[i].imag), 1e-300):
            partner[i], partner[j] = j, i
            free.discard(j)
        else:
            partner[i] = i
    return partner


def _radius(mult: int, tol: float, noise: float) -> float:
    return max(tol, 4.0 * noise ** (1.0 / mult))


def classify(q: WeylQuartic, tol: float = 1e-3, scale: float | None = None, noise: float = 1e-15) -> PetrovType:
    """Root type of ``q`` on the projective line.

    ``tol`` is the chordal clustering radius.  ``scale`` is the ambient curvature
    magnitude: the quartic is type O when every coefficient is below ``tol * scale``.
    ``noise`` is the relative coefficient error expected from the caller; a root of
    multiplicity m is smeared by about ``noise**(1/m)`` and the merge radius for
    such clusters is widened accordingly.
    """
    if not (0.0 < tol <= 1e-2):
        raise ValueError("tol must lie in (0, 1e-2]")
    amp = q.max_abs()
    ref = amp if scale is None else max(float(scale), 0.0)
    if amp == 0.0 or (scale is not None and amp < tol * ref):
        return PetrovType("O")
    a = q.coefficients / np.abs(q.coefficients).max()
    rel_noise = max(noise * max(ref, amp) / amp, 64 * EPS)
    mu, c, s = _rotated_roots(a)
    partner = _conjugate_map(mu)

    scored = []
    for part in _PARTITIONS[4]:
        index = {i: k for k, cl in enumerate(part) for i in cl}
        ok = True
        for cl in part:
            image = {partner[i] for i in cl}
            if image != set(cl) and image != set(part[index[partner[cl[0]]]]):
                ok = False
                break
        if not ok:
            continue
        ratio = 0.0
        for cl in part:
            if len(cl) > 1:
                diam = max(chordal(mu[i], mu[j]) for i, j in itertools.combinations(cl, 2))
                ratio = max(ratio, diam / _radius(len(cl), tol, rel_noise))
        scored.append((part, ratio))

    def pick(limit):
        ok = [(len(p), r, p) for p, r in scored if r <= limit]
        if not ok:
            return None
        return min(ok, key=lambda t: (t[0], t[1]))[2]

    def describe(part):
        clusters = []
        for cl in part:
            real = {partner[i] for i in cl} == set(cl)
            centre = complex(np.mean(mu[list(cl)]))
            if real:
                centre = complex(centre.real, 0.0)
            den = s * centre + c
            lam = complex("inf") if abs(den) < 1e-300 else (c * centre - s) / den
            clusters.append(Root(lam, len(cl), real))
        name = _type_from_clusters([(r.multiplicity, r.real) for r in clusters])
        return name, tuple(sorted(clusters, key=lambda r: (-r.multiplicity, r.value.real, r.value.imag)))

    chosen = pick(1.0)
    name, roots = describe(chosen)
    names = []
    for limit in (1.0 / BAND, 1.0, BAND):
        part = pick(limit)
        if part is not None:
            n = describe(part)[0]
            if n not in names:
                names.append(n)
    if len(names) > 1:
        return PetrovType(name, roots, uncertain=True, candidates=tuple(names))
    return PetrovType(name, roots)


def _tensorial(psi, M) -> list:
    """W_{EFGH} M^E_A M^F_B M^G_C M^H_D for the index strings (1^k 0^(4-k))."""
    out = []
    for k in range(5):
        idx = (1,) * k + (0,) * (4 - k)
        total = 0
        for E in itertools.product((0, 1), repeat=4):
            term = psi[sum(E)]
            for e_, i_ in zip(E, idx):
                term = term * M[e_][i_]
            total = total + term
        out.append(total)
    return out


def transform(q: WeylQuartic, A) -> WeylQuartic:
    """Curvature scalars in the coframe diag(A, A^-T) . theta.

    Anti-self-dual scalars transform tensorially with A^-1 and carry an extra
    weight det(A)^2; self-dual scalars Psi'_k scale by det(A)^(2-k).
    """
    A = [[A[0][0], A[0][1]], [A[1][0], A[1][1]]]
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if det == 0 or (not isinstance(det, (int, Fraction)) and abs(float(det)) < 1e-300):
        raise SingularTransformError("transformation matrix is singular")
    if q.side == "sd":
        return WeylQuartic(tuple(q.psi[k] * det ** (2 - k) for k in range(5)), "sd")
    inv = [[A[1][1] / det, -A[0][1] / det], [-A[1][0] / det, A[0][0] / det]]
    new = _tensorial(q.psi, inv)
    return WeylQuartic(tuple(v * det ** 2 for v in new), "asd")


def root_translation(lam0) -> np.ndarray:
    """Structure-group element moving the root lam0 of W to lam = 0."""
    return np.array([[1.0, 0.0], [-lam0, 1.0]])


# ---------------------------------------------------------------------------
# independent oracle


def oracle_classify(q: WeylQuartic) -> PetrovType:
    """Root type by exact square-free factorisation and Sturm counts.

    Rational coefficients are handled exactly; anything else is refined with
    high-precision polynomial roots and a tight clustering radius.
    """
    import sympy

    if all(p == 0 for p in q.psi):
        return PetrovType("O")
    lam = sympy.Symbol("lam")
    if q.is_exact():
        coeffs = [sympy.Rational(BINOMIAL[k]) * sympy.Rational(q.psi[k]) for k in range(4, -1, -1)]
        poly = sympy.Poly(coeffs, lam, domain="QQ")
        clusters: list[tuple[int, bool]] = []
        at_inf = 4 - poly.degree()
        if at_inf:
            clusters.append((at_inf, True))
        _, factors = poly.sqf_list()
        for f, mult in factors:
            nreal = f.count_roots()
            clusters += [(mult, True)] * nreal
            clusters += [(mult, False)] * (f.degree() - nreal)
        return PetrovType(_type_from_clusters(clusters))
    return _oracle_highprec(q)


def _oracle_highprec(q: WeylQuartic, dps: int = 60) -> PetrovType:
    import mpmath

    with mpmath.workdps(dps):
        c = [mpmath.mpf(BINOMIAL[k]) * mpmath.mpf(float(q.psi[k])) for k in range(4, -1, -1)]
        lead = 0
        while lead < 5 and c[lead] == 0:
            lead += 1
        roots = list(mpmath.polyroots(c[lead:], maxsteps=400, extraprec=4 * dps)) if lead < 4 else []
        roots = [complex(r) for r in roots]
    pts = [complex("inf")] * lead + roots
    tight = 1e-12
    groups: list[list[complex]] = []
    for z in pts:
        for g in groups:
            if chordal(z, g[0]) < tight:
                g.append(z)
                break
        else:
            groups.append([z])
    clusters = [(len(g), abs(np.mean(g).imag) < tight if not np.isinf(abs(g[0])) else True) for g in groups]
    return PetrovType(_type_from_clusters(clusters))


# ---------------------------------------------------------------------------
# planted quartics


@dataclass
class PlantedQuartic:
    quartic: WeylQuartic
    expected: str
    roots: list = field(default_factory=list)


_PATTERNS = {
    "Gr": ("r1", "r1", "r1", "r1"),
    "Gc": ("r1", "r1", "c1"),
    "Gcc": ("c1", "c1"),
    "IIr": ("r2", "r1", "r1"),
    "IIc": ("r2", "c1"),
    "III": ("r3", "r1"),
    "Dr": ("r2", "r2"),
    "Dc": ("c2",),
    "N": ("r4",),
}


def _rational(rng, lo, hi, den=16) -> Fraction:
    return Fraction(int(rng.integers(int(lo * den), int(hi * den) + 1)), den)


def planted_quartic(kind: str, rng: np.random.Generator, min_sep: float = 1e-2, allow_infinity: bool = True) -> PlantedQuartic:
    """Exact rational quartic with prescribed root pattern and chordal separation >= min_sep."""
    if kind == "O":
        return PlantedQuartic(WeylQuartic((Fraction(0),) * 5), "O")
    pattern = _PATTERNS[kind]
    for _ in range(1000):
        pts: list[tuple] = []  # (complex value, multiplicity)
        for item in pattern:
            real, mult = item[0] == "r", int(item[1])
            if real:
                if allow_infinity and all(z is not None for z, _ in pts) and rng.random() < 0.15:
                    pts.append((None, mult))
                else:
                    pts.append((_rational(rng, -3, 3), mult))
            else:
                p = _rational(rng, -2, 2)
                qv = _rational(rng, 0.25, 2.5)
                pts.append(((p, qv), mult))
        values = []
        for z, m in pts:
            if z is None:
                values.append(complex("inf"))
            elif isinstance(z, tuple):
                values += [complex(float(z[0]), float(z[1])), complex(float(z[0]), -float(z[1]))]
            else:
                values.append(complex(float(z)))
        if all(chordal(u, v) >= min_sep for u, v in itertools.combinations(values, 2)):
            break
    else:  # pragma: no cover - the sampling box is far wider than any sane min_sep
        raise RuntimeError("could not plant well-separated roots")
    poly = [Fraction(int(rng.choice([-3, -2, -1, 1, 2, 3])), int(rng.integers(1, 4)))]
    for z, m in pts:
        if z is None:
            factor = [Fraction(1)]  # root at infinity lowers the degree
        elif isinstance(z, tuple):
            p, qv = z
            factor = [Fraction(1), -2 * p, p * p + qv * qv]
        else:
            factor = [Fraction(1), -z]
        for _ in range(m):
            poly = _polymul(poly, factor)
    poly = [Fraction(0)] * (5 - len(poly)) + poly
    psi = tuple(poly[4 - k] / BINOMIAL[k] for k in range(5))
    return PlantedQuartic(WeylQuartic(psi), kind, pts)


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def float_quartic(q: WeylQuartic) -> WeylQuartic:
    return WeylQuartic(tuple(float(p) for p in q.psi), q.side)
