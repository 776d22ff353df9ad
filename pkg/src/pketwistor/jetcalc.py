"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` holds an array of jets: ``data`` has shape ``shape + (size,)``
where the trailing axis indexes Taylor coefficients ``c_alpha = d^alpha f / alpha!``
in graded-lexicographic order of the multi-indices ``alpha``.  Leading axes
behave like numpy axes (broadcasting, indexing, stacking), so tensors whose
entries are jets are just jets with a nontrivial ``shape``.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from . import _kernels

MAX_ORDER = 6
MAX_DIM = 5
DIVISION_MARGIN = 1e-10


class ConfigurationError(ValueError):
    pass


class SingularEvaluationError(ArithmeticError):
    """Raised when a division, log or power argument sits inside the margin."""

    def __init__(self, op: str, value: float, point=None):
        self.op = op
        self.value = value
        self.point = point
        super().__init__(self._message())

    def _message(self) -> str:
        where = "" if self.point is None else f" at point {list(self.point)}"
        return f"singular {self.op}: argument value {self.value!r}{where}"

    def at(self, point) -> "SingularEvaluationError":
        self.point = tuple(float(x) for x in point)
        self.args = (self._message(),)
        return self


class OrderBudgetError(ValueError):
    pass


def _graded_lex(dim: int, order: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(order + 1):
        # lexicographically descending exponent of the first variable
        level = [a for a in itertools.product(range(deg, -1, -1), repeat=dim) if sum(a) == deg]
        out.extend(level)
    return out


class JetSpace:
    """Multi-index bookkeeping for jets in ``dim`` variables up to ``order``."""

    def __init__(self, dim: int, order: int):
        if not 1 <= dim <= MAX_DIM:
            raise ConfigurationError(f"jet dimension {dim} outside 1..{MAX_DIM}")
        if not 0 <= order <= MAX_ORDER:
            raise ConfigurationError(f"jet order {order} outside 0..{MAX_ORDER}")
        self.dim = dim
        self.order = order
        self.multi = _graded_lex(dim, order)
        self.size = len(self.multi)
        self.index = {a: i for i, a in enumerate(self.multi)}
        self.degree = np.array([sum(a) for a in self.multi])
        self.factorial = np.array([math.prod(math.factorial(x) for x in a) for a in self.multi], dtype=float)

        pi, pj, pk = [], [], []
        for i, a in enumerate(self.multi):
            for j, b in enumerate(self.multi):
                c = tuple(x + y for x, y in zip(a, b))
                k = self.index.get(c)
                if k is not None:
                    pi.append(i)
                    pj.append(j)
                    pk.append(k)
        order_k = np.argsort(pk, kind="stable")
        self.pair_i = np.asarray(pi, dtype=np.intc)[order_k]
        self.pair_j = np.asarray(pj, dtype=np.intc)[order_k]
        self.pair_k = np.asarray(pk, dtype=np.intc)[order_k]
        self.scatter = np.zeros((len(pk), self.size))
        self.scatter[np.arange(len(pk)), self.pair_k] = 1.0

    def __repr__(self) -> str:
        return f"JetSpace(dim={self.dim}, order={self.order})"

    def lower(self) -> "JetSpace":
        if self.order == 0:
            raise OrderBudgetError("cannot differentiate an order-0 jet")
        return space(self.dim, self.order - 1)

    @lru_cache(maxsize=None)
    def derivative_map(self, var: int) -> tuple[np.ndarray, np.ndarray]:
        """Source slots and factors so that ``d/dx_var`` lands in ``lower()``."""
        low = self.lower()
        src = np.empty(low.size, dtype=np.intp)
        fac = np.empty(low.size)
        for t, a in enumerate(low.multi):
            b = list(a)
            b[var] += 1
            src[t] = self.index[tuple(b)]
            fac[t] = b[var]
        return src, fac

    @lru_cache(maxsize=None)
    def embedding_map(self, dim: int) -> np.ndarray:
        """Slots of this space's monomials inside ``space(dim, order)``."""
        big = space(dim, self.order)
        pad = (0,) * (dim - self.dim)
        return np.array([big.index[a + pad] for a in self.multi], dtype=np.intp)


@lru_cache(maxsize=None)
def space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


def _mul_data(sp: JetSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    a2 = np.ascontiguousarray(a.reshape(-1, sp.size), dtype=float)
    b2 = np.ascontiguousarray(b.reshape(-1, sp.size), dtype=float)
    return _kernels.mul_flat(a2, b2, sp).reshape(shape)


class Jet:
    __slots__ = ("space", "data")
    __array_priority__ = 100

    def __init__(self, sp: JetSpace, data):
        data = np.asarray(data, dtype=float)
        if data.shape[-1:] != (sp.size,):
            raise ValueError(f"trailing axis {data.shape[-1:]} does not match {sp}")
        self.space = sp
        self.data = data

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, sp: JetSpace, value, shape=None) -> "Jet":
        value = np.asarray(value, dtype=float)
        if shape is not None:
            value = np.broadcast_to(value, shape)
        data = np.zeros(value.shape + (sp.size,))
        data[..., 0] = value
        return cls(sp, data)

    @classmethod
    def zeros(cls, sp: JetSpace, shape=()) -> "Jet":
        return cls(sp, np.zeros(tuple(shape) + (sp.size,)))

    @classmethod
    def stack(cls, jets, axis: int = 0) -> "Jet":
        jets = list(jets)
        order = min(j.space.order for j in jets)
        jets = [j.truncate(order) for j in jets]
        if axis < 0:
            axis -= 1
        return cls(jets[0].space, np.stack([j.data for j in jets], axis=axis))

    # numpy-ish surface --------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape[:-1]

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def value(self):
        v = self.data[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __len__(self) -> int:
        return self.shape[0]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        tail = (slice(None),) if any(k is Ellipsis for k in key) else (Ellipsis,)
        return Jet(self.space, self.data[key + tail])

    def __setitem__(self, key, val):
        val = self._coerce(val)
        if val.space.order != self.space.order:
            val = val.truncate(self.space.order)
        if not isinstance(key, tuple):
            key = (key,)
        tail = (slice(None),) if any(k is Ellipsis for k in key) else (Ellipsis,)
        self.data[key + tail] = val.data

    def __iter__(self):
        for i in range(self.shape[0]):
            yield self[i]

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.space, self.data.reshape(tuple(shape) + (self.space.size,)))

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(len(self.shape))))
        elif len(axes) == 1 and isinstance(axes[0], tuple):
            axes = axes[0]
        return Jet(self.space, self.data.transpose(tuple(axes) + (len(self.shape),)))

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def swapaxes(self, a: int, b: int) -> "Jet":
        n = len(self.shape)
        return Jet(self.space, np.swapaxes(self.data, a % n, b % n))

    def sum(self, axis=None) -> "Jet":
        n = len(self.shape)
        if axis is None:
            axis = tuple(range(n))
        elif isinstance(axis, int):
            axis = (axis % n,)
        else:
            axis = tuple(a % n for a in axis)
        return Jet(self.space, self.data.sum(axis=axis))

    def copy(self) -> "Jet":
        return Jet(self.space, self.data.copy())

    def __repr__(self) -> str:
        return f"Jet({self.space}, shape={self.shape}, value={self.data[..., 0]!r})"

    # order handling -----------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order == self.space.order:
            return self
        if order > self.space.order:
            raise OrderBudgetError(f"cannot raise jet order {self.space.order} to {order}")
        sp = space(self.space.dim, order)
        return Jet(sp, self.data[..., : sp.size])

    def embed(self, dim: int) -> "Jet":
        """View as a jet in ``dim`` variables, constant in the extra ones."""
        if dim == self.space.dim:
            return self
        big = space(dim, self.space.order)
        data = np.zeros(self.shape + (big.size,))
        data[..., self.space.embedding_map(dim)] = self.data
        return Jet(big, data)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.space.dim != self.space.dim:
                raise ValueError(f"jet dimension mismatch {other.space.dim} vs {self.space.dim}")
            return other
        return Jet.constant(self.space, other, np.shape(other))

    def _aligned(self, other) -> tuple["Jet", "Jet"]:
        other = self._coerce(other)
        order = min(self.space.order, other.space.order)
        return self.truncate(order), other.truncate(order)

    # arithmetic ---------------------------------------------------------
    def __neg__(self) -> "Jet":
        return Jet(self.space, -self.data)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            data = self.data.copy() if np.ndim(other) == 0 else np.broadcast_to(
                self.data, np.broadcast_shapes(self.shape, np.shape(other)) + (self.space.size,)).copy()
            data[..., 0] += other
            return Jet(self.space, data)
        a, b = self._aligned(other)
        return Jet(a.space, a.data + b.data)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.space, self.data * np.asarray(other, dtype=float)[..., None])
        a, b = self._aligned(other)
        return Jet(a.space, _mul_data(a.space, a.data, b.data))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise SingularEvaluationError("division", 0.0)
            return Jet(self.space, self.data / other[..., None])
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, q) -> "Jet":
        return power(self, q)

    # series -------------------------------------------------------------
    def _split(self) -> tuple[np.ndarray, "Jet"]:
        v = self.data[..., 0].copy()
        nil = self.data.copy()
        nil[..., 0] = 0.0
        return v, Jet(self.space, nil)

    def _check_margin(self, op: str, positive: bool = False):
        v = self.data[..., 0]
        scale = np.maximum(np.abs(self.data).max(axis=-1), np.finfo(float).tiny)
        bad = (np.abs(v) <= DIVISION_MARGIN * scale) | (v == 0)
        if positive:
            bad |= v <= 0
        if np.any(bad):
            idx = np.flatnonzero(np.broadcast_to(bad, v.shape))[0]
            raise SingularEvaluationError(op, float(np.ravel(v)[idx]))

    def _series(self, u: "Jet", coeffs) -> "Jet":
        """sum_m coeffs[m] * u**m with u nilpotent (zero constant term)."""
        acc = Jet.constant(self.space, coeffs[0], u.shape)
        term = None
        for m in range(1, self.space.order + 1):
            term = u if term is None else term * u
            acc = acc + term * coeffs[m]
        return acc

    def reciprocal(self) -> "Jet":
        self._check_margin("division")
        v, nil = self._split()
        u = Jet(self.space, nil.data / v[..., None])
        coeffs = [(-1.0) ** m for m in range(self.space.order + 1)]
        return self._series(u, coeffs) * (1.0 / v)

    def log(self) -> "Jet":
        self._check_margin("log", positive=True)
        v, nil = self._split()
        u = Jet(self.space, nil.data / v[..., None])
        coeffs = [0.0] + [(-1.0) ** (m + 1) / m for m in range(1, self.space.order + 1)]
        return self._series(u, coeffs) + np.log(v)

    def exp(self) -> "Jet":
        v, nil = self._split()
        coeffs = [1.0 / math.factorial(m) for m in range(self.space.order + 1)]
        return self._series(nil, coeffs) * np.exp(v)

    def real_power(self, q: float) -> "Jet":
        """``self**q`` for a non-integer exponent, positive base required."""
        self._check_margin("power", positive=True)
        v, nil = self._split()
        u = Jet(self.space, nil.data / v[..., None])
        coeffs = [1.0]
        for m in range(1, self.space.order + 1):
            coeffs.append(coeffs[-1] * (q - m + 1) / m)
        return self._series(u, coeffs) * (v ** q)

    # calculus -----------------------------------------------------------
    def deriv(self, var: int) -> "Jet":
        src, fac = self.space.derivative_map(var)
        return Jet(self.space.lower(), self.data[..., src] * fac)

    def grad(self) -> "Jet":
        """Partial derivatives stacked on a new trailing axis."""
        return Jet.stack([self.deriv(v) for v in range(self.space.dim)], axis=-1)

    def partial(self, alpha) -> float | np.ndarray:
        """Value of ``d^alpha f`` at the base point."""
        k = self.space.index[tuple(alpha)]
        return self.data[..., k] * self.space.factorial[k]

    def coefficient(self, alpha):
        return self.data[..., self.space.index[tuple(alpha)]]


def power(a: Jet, q) -> Jet:
    """Integer exponents by repeated multiplication, others via exp(q log a)."""
    qf = float(q)
    if qf.is_integer() and abs(qf) <= 64:
        n = int(qf)
        if n < 0:
            return power(a.reciprocal(), -n)
        result = Jet.constant(a.space, 1.0, a.shape)
        base = a
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    return a.real_power(qf)


def log(a: Jet) -> Jet:
    return a.log()


def exp(a: Jet) -> Jet:
    return a.exp()


def seed(point, var_index: int, order: int = 3) -> Jet:
    """Jet of the coordinate function ``X^var_index`` at ``point``."""
    point = np.asarray(point, dtype=float)
    if order > MAX_ORDER:
        raise ConfigurationError(f"jet order {order} exceeds the configured maximum {MAX_ORDER}")
    dim = point.shape[0]
    if not 0 <= var_index < dim:
        raise IndexError(f"variable index {var_index} out of range for dimension {dim}")
    sp = space(dim, order)
    data = np.zeros(sp.size)
    data[0] = point[var_index]
    if order >= 1:
        e = [0] * dim
        e[var_index] = 1
        data[sp.index[tuple(e)]] = 1.0
    return Jet(sp, data)


def coordinates(point, order: int = 3) -> list[Jet]:
    return [seed(point, i, order) for i in range(len(point))]


def jeinsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Two-operand einsum whose scalar product is the truncated jet product."""
    a, b = a._aligned(b)
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    letters = []
    for c in sa + sb:
        if c not in letters:
            letters.append(c)
    sizes = {}
    for s, arr in ((sa, a), (sb, b)):
        if len(s) != len(arr.shape):
            raise ValueError(f"subscript {s!r} does not match shape {arr.shape}")
        for c, n in zip(s, arr.shape):
            if sizes.setdefault(c, n) != n:
                raise ValueError(f"inconsistent size for index {c!r}")

    def spread(s, arr):
        perm = [s.index(c) for c in letters if c in s]
        data = arr.data.transpose(perm + [len(s)])
        shape = [sizes[c] if c in s else 1 for c in letters] + [arr.space.size]
        return data.reshape(shape)

    prod = _mul_data(a.space, spread(sa, a), spread(sb, b))
    summed = tuple(i for i, c in enumerate(letters) if c not in out)
    prod = prod.sum(axis=summed) if summed else prod
    kept = [c for c in letters if c in out]
    perm = [kept.index(c) for c in out] + [len(kept)]
    return Jet(a.space, prod.transpose(perm))


def matmul(a: Jet, b: Jet) -> Jet:
    return jeinsum("ij,jk->ik", a, b)


def inverse_matrix(m: Jet) -> Jet:
    """Inverse of a square matrix of jets via the nilpotent Neumann series."""
    v = m.data[..., 0]
    vinv = np.linalg.inv(v)
    n = v.shape[0]
    nil = m.data.copy()
    nil[..., 0] = 0.0
    # m = v (I + v^-1 N)  =>  m^-1 = sum_k (-v^-1 N)^k v^-1
    step = -jeinsum("ij,jk->ik", Jet.constant(m.space, vinv), Jet(m.space, nil))
    acc = Jet.constant(m.space, np.eye(n))
    term = acc
    for _ in range(m.space.order):
        term = matmul(term, step)
        acc = acc + term
    return matmul(acc, Jet.constant(m.space, vinv))


def condition_number(m: Jet) -> float:
    return float(np.linalg.cond(m.data[..., 0]))


def backend() -> str:
    return _kernels.BACKEND

