"""Pointwise exterior algebra with jet-valued coefficients.

Conventions: a k-form is ``sum_{I increasing} w_I theta^{i1} ^ ... ^ theta^{ik}`` and
the wedge carries no factorial normalisation, so ``(a ^ b)(X, Y) = a(X)b(Y) - a(Y)b(X)``
and ``w(E_{i1}, ..., E_{ik}) = w_I``.  The full antisymmetric array of a form is
therefore its evaluation on frame vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .jetcalc import Jet, OrderBudgetError, condition_number, inverse_matrix, jeinsum, space

COORDINATE = "coordinate"
COFRAME = "coframe"
CONDITION_BOUND = 1e8


class IllConditionedCoframeError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def combos(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(n), k))


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int):
    """Rows (k, i, j, sign) with (e_I ^ e_J) = sign e_K."""
    cp, cq, cr = combos(n, p), combos(n, q), combos(n, p + q)
    ridx = {c: t for t, c in enumerate(cr)}
    ks, is_, js, signs = [], [], [], []
    for i, I in enumerate(cp):
        for j, J in enumerate(cq):
            if set(I) & set(J):
                continue
            K = tuple(sorted(I + J))
            ks.append(ridx[K])
            is_.append(i)
            js.append(j)
            signs.append(_perm_sign(I + J))
    mat = np.zeros((len(ks), len(cr)))
    mat[np.arange(len(ks)), ks] = signs
    return np.array(is_, dtype=np.intp), np.array(js, dtype=np.intp), mat


@lru_cache(maxsize=None)
def _d_table(n: int, k: int):
    """(target, source, variable, sign) rows of (dw)_K = sum_j (-1)^j d_{K_j} w_{K without K_j}."""
    src = {c: t for t, c in enumerate(combos(n, k))}
    rows = []
    for t, K in enumerate(combos(n, k + 1)):
        for j, var in enumerate(K):
            rows.append((t, src[K[:j] + K[j + 1:]], var, (-1) ** j))
    return rows


@dataclass
class FormValue:
    """A k-form (or an array of k-forms) at one point.

    ``comps`` has shape ``lead + (C(n, k),)`` with one slot per increasing index tuple.
    """

    degree: int
    n: int
    comps: Jet
    basis: str = COORDINATE

    def __post_init__(self):
        if self.comps.shape[-1:] != (comb(self.n, self.degree),):
            raise ValueError(f"{self.degree}-form in dimension {self.n} needs {comb(self.n, self.degree)} components")

    @classmethod
    def zero(cls, degree: int, n: int, sp, basis: str = COORDINATE, lead=()) -> "FormValue":
        return cls(degree, n, Jet.zeros(sp, tuple(lead) + (comb(n, degree),)), basis)

    @classmethod
    def from_full(cls, full: Jet, degree: int, basis: str = COORDINATE) -> "FormValue":
        n = full.shape[-1] if degree else None
        if degree == 0:
            raise ValueError("use a scalar jet for 0-forms")
        lead = len(full.shape) - degree
        idx = np.array(combos(n, degree)).T
        sel = tuple(slice(None) for _ in range(lead)) + tuple(idx)
        return cls(degree, n, Jet(full.space, full.data[sel]), basis)

    @classmethod
    def one_form(cls, comps: Jet, basis: str = COORDINATE) -> "FormValue":
        return cls(1, comps.shape[-1], comps, basis)

    @property
    def lead(self) -> tuple[int, ...]:
        return self.comps.shape[:-1]

    def component(self, *idx: int) -> Jet:
        """Component on an arbitrary index tuple (zero on repeats, signed otherwise)."""
        if len(set(idx)) < len(idx):
            return Jet.zeros(self.comps.space, self.lead)
        t = combos(self.n, self.degree).index(tuple(sorted(idx)))
        return self.comps[..., t] * _perm_sign(idx)

    def full(self) -> Jet:
        """Antisymmetric array ``lead + (n,)*degree``."""
        k, n = self.degree, self.n
        data = np.zeros(self.lead + (n,) * k + (self.comps.space.size,))
        for t, I in enumerate(combos(n, k)):
            for perm in itertools.permutations(range(k)):
                J = tuple(I[p] for p in perm)
                data[(Ellipsis,) + J + (slice(None),)] = _perm_sign(perm) * self.comps.data[..., t, :]
        return Jet(self.comps.space, data)

    def __add__(self, other: "FormValue") -> "FormValue":
        self._compatible(other)
        return FormValue(self.degree, self.n, self.comps + other.comps, self.basis)

    def __sub__(self, other: "FormValue") -> "FormValue":
        self._compatible(other)
        return FormValue(self.degree, self.n, self.comps - other.comps, self.basis)

    def __neg__(self) -> "FormValue":
        return FormValue(self.degree, self.n, -self.comps, self.basis)

    def scale(self, f) -> "FormValue":
        """Multiply by a scalar (float or jet, broadcast over the lead axes)."""
        if isinstance(f, Jet):
            f = Jet(f.space, f.data[..., None, :])
        else:
            f = np.asarray(f, dtype=float)[..., None]
        return FormValue(self.degree, self.n, self.comps * f, self.basis)

    def _compatible(self, other: "FormValue"):
        if (other.degree, other.n, other.basis) != (self.degree, self.n, self.basis):
            raise ValueError("forms differ in degree, dimension or basis")

    def norm(self) -> float:
        return float(np.abs(self.comps.data[..., 0]).max(initial=0.0))

    def __call__(self, *vectors) -> np.ndarray:
        """Evaluate the value part on ``degree`` vectors given in this form's basis."""
        full = self.full().data[..., 0]
        out = full
        for v in reversed(vectors):
            out = out @ np.asarray(v, dtype=float)
        return out


def wedge(a: FormValue, b: FormValue) -> FormValue:
    if a.n != b.n or a.basis != b.basis:
        raise ValueError("wedge needs forms in the same dimension and basis")
    p, q, n = a.degree, b.degree, a.n
    if p + q > n:
        lead = np.broadcast_shapes(a.lead, b.lead)
        sp = space(a.comps.dim, min(a.comps.order, b.comps.order))
        return FormValue.zero(p + q, n, sp, a.basis, lead)
    ii, jj, mat = _wedge_table(n, p, q)
    prod = a.comps[..., ii] * b.comps[..., jj]
    data = np.einsum("...ts,tk->...ks", prod.data, mat)
    return FormValue(p + q, n, Jet(prod.space, data), a.basis)


def ext_d(form: FormValue) -> FormValue:
    """Coordinate-basis exterior derivative; consumes one jet order."""
    if form.basis != COORDINATE:
        raise ValueError("ext_d acts on coordinate-basis components; use change_basis first")
    if form.comps.order < 1:
        raise OrderBudgetError("exterior derivative needs jets of order >= 1")
    k, n = form.degree, form.n
    if k + 1 > n:
        return FormValue.zero(k + 1, n, form.comps.space.lower(), COORDINATE, form.lead)
    grads = form.comps.grad()
    out = np.zeros(form.lead + (comb(n, k + 1), grads.space.size))
    for t, s, var, sign in _d_table(n, k):
        out[..., t, :] += sign * grads.data[..., s, var, :]
    return FormValue(k + 1, n, Jet(grads.space, out), COORDINATE)


def d_scalar(f: Jet) -> FormValue:
    """Coordinate differential of a scalar jet (array)."""
    return FormValue(1, f.dim, f.grad(), COORDINATE)


@dataclass
class CoframeSample:
    """Coframe at a point: row ``a`` of ``e`` holds the coordinate components of theta^a."""

    e: Jet
    g: np.ndarray
    point: np.ndarray = field(default_factory=lambda: np.zeros(0))
    condition_bound: float = CONDITION_BOUND

    def __post_init__(self):
        n = self.e.shape[0]
        if self.e.shape != (n, n):
            raise ValueError(f"coframe matrix must be square, got {self.e.shape}")
        self.g = np.asarray(self.g, dtype=float)
        cond = condition_number(self.e)
        if not np.isfinite(cond) or cond > self.condition_bound:
            raise IllConditionedCoframeError(f"coframe matrix condition number {cond:.3g} exceeds {self.condition_bound:.3g}")
        self._einv = None

    @property
    def n(self) -> int:
        return self.e.shape[0]

    @property
    def order(self) -> int:
        return self.e.order

    @property
    def einv(self) -> Jet:
        """``einv[mu, a]`` is the mu-th coordinate component of the frame vector E_a."""
        if self._einv is None:
            self._einv = inverse_matrix(self.e)
        return self._einv

    def form(self, a: int) -> FormValue:
        return FormValue.one_form(self.e[a], COORDINATE)

    def frame_derivative(self, f: Jet) -> Jet:
        """``E_a(f)`` stacked on a new trailing axis (one order consumed)."""
        grad = f.grad()
        lead = "".join("pqrstuvw"[: len(f.shape)])
        return jeinsum(f"{lead}m,ma->{lead}a", grad, self.einv)


def change_basis(omega: FormValue, cof: CoframeSample, to: str = COFRAME) -> FormValue:
    """Re-express ``omega`` between coordinate and coframe bases."""
    if omega.basis == to:
        return omega
    k = omega.degree
    mat = cof.einv if to == COFRAME else cof.e
    full = omega.full()
    nlead = len(omega.lead)
    lead = "".join("pqrstu"[:nlead])
    letters = "abcdefgh"[:k]
    new = "ijklmnop"[:k]
    for slot in range(k):
        src = lead + new[:slot] + letters[slot:]
        dst = lead + new[: slot + 1] + letters[slot + 1:]
        full = jeinsum(f"{src},{letters[slot]}{new[slot]}->{dst}", full, mat)
    return FormValue.from_full(full, k, to)


# -- split-signature null coframe in dimension 4 -------------------------------------

NULL_METRIC = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)

# basis 2-forms as antisymmetric 4x4 value arrays; (a, b) stands for theta^a ^ theta^b
def _two_form(*terms) -> np.ndarray:
    out = np.zeros((4, 4))
    for c, a, b in terms:
        out[a, b] += c
        out[b, a] -= c
    return out


SIGMA_PLUS = (
    _two_form((1, 0, 1)),
    _two_form((1, 2, 3)),
    _two_form((1, 0, 2), (1, 1, 3)),
)
SIGMA_MINUS = (
    _two_form((1, 0, 3)),
    _two_form((1, 2, 1)),
    _two_form((1, 0, 2), (-1, 1, 3)),
)
RHO = _two_form((1, 0, 2), (1, 1, 3))


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4,) * 4)
    for p in itertools.permutations(range(4)):
        eps[p] = _perm_sign(p)
    return eps


@lru_cache(maxsize=None)
def hodge_matrix() -> np.ndarray:
    """Linear map on antisymmetric frame components: (*w)_{cd} = H[c,d,a,b] w_{ab}.

    Built from *w(X, Y) vol = w ^ X^flat ^ Y^flat with vol = theta^1^theta^2^theta^3^theta^4.
    """
    eps = _levi_civita4()
    g = NULL_METRIC
    # w ^ X ^ Y has top component sum over (a<b) w_ab X_c Y_d eps_abcd with X_c = g_ce X^e
    return 0.5 * np.einsum("abef,ec,fd->cdab", eps, g, g)


def hodge(omega: FormValue) -> FormValue:
    """Hodge star of coframe-basis 2-forms in the null coframe (dimension 4)."""
    if omega.basis != COFRAME or omega.degree != 2 or omega.n != 4:
        raise ValueError("hodge expects coframe-basis 2-forms in dimension 4")
    full = omega.full()
    data = np.einsum("cdab,...abs->...cds", hodge_matrix(), full.data)
    return FormValue.from_full(Jet(full.space, data), 2, COFRAME)


def constant_two_form(arr: np.ndarray, sp) -> FormValue:
    return FormValue.from_full(Jet.constant(sp, arr), 2, COFRAME)


def sigma_basis(sp) -> dict[str, FormValue]:
    out = {}
    for i in range(3):
        out[f"sigma{i + 1}+"] = constant_two_form(SIGMA_PLUS[i], sp)
        out[f"sigma{i + 1}-"] = constant_two_form(SIGMA_MINUS[i], sp)
    return out


def sigma_gram() -> np.ndarray:
    """6x6 matrix of components of (sigma1+, sigma2+, sigma3+, sigma1-, sigma2-, sigma3-)."""
    rows = [s[np.triu_indices(4, 1)] for s in SIGMA_PLUS + SIGMA_MINUS]
    return np.array(rows)


def sigma_coordinates(two_form_full: np.ndarray) -> np.ndarray:
    """Coefficients of an antisymmetric 4x4 array (or stack) in the sigma basis."""
    iu = np.triu_indices(4, 1)
    comps = np.asarray(two_form_full)[(..., *iu)]
    return np.einsum("ij,...j->...i", np.linalg.inv(sigma_gram().T), comps)


def interior(vector: np.ndarray, omega: FormValue) -> FormValue:
    """Contraction of a constant vector (in the form's basis) into the first slot."""
    full = omega.full()
    data = np.tensordot(np.asarray(vector, dtype=float), np.moveaxis(full.data, len(omega.lead), 0), axes=(0, 0))
    if omega.degree == 1:
        return Jet(full.space, data)
    return FormValue.from_full(Jet(full.space, data), omega.degree - 1, omega.basis)
