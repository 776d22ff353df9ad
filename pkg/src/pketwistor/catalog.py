"""Explicit para-Kähler-Einstein coframes as jet-evaluated factories.

Every family is a table of expression strings: auxiliary quantities evaluated in
order, then a 4x4 matrix whose row ``a`` holds the coordinate components of
``theta^a``.  Free functions are bound as expressions in their own arguments and
enter the tables through automatically generated partial derivatives such as
``U_y1y1`` or ``f2_b``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .expr import Expr, parse
from .forms import NULL_METRIC, CoframeSample, IllConditionedCoframeError
from .jetcalc import ConfigurationError, Jet, SingularEvaluationError, coordinates

DEFAULT_ORDER = 3
GUARD_MARGIN = 1e-3


class SpecError(ValueError):
    """Malformed or inconsistent metric specification."""


class SamplingExhaustedError(RuntimeError):
    pass


@dataclass(frozen=True)
class FreeFunction:
    args: tuple[str, ...]
    default: str
    max_derivative: int = 2


@dataclass(frozen=True)
class Family:
    name: str
    coords: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    params: Mapping[str, float]
    functions: Mapping[str, FreeFunction] = field(default_factory=dict)
    aux: tuple[tuple[str, str], ...] = ()
    guards: tuple[str, ...] = ()
    box: tuple[tuple[float, float], ...] = ((-0.5, 0.5),) * 4
    expected_type: str | None = None
    swap: bool = False
    description: str = ""


def _potential_rows():
    return (("1", "0", "0", "0"), ("0", "1", "0", "0"), ("0", "0", "V_ax", "V_ay"), ("0", "0", "V_bx", "V_by"))


V1 = "-(1/Psi2p)*log(b + a*x - y)"
V2 = "-(2/(3*Psi2p))*log((1 - 1.5*Psi2p*a*x)*(1 - 1.5*Psi2p*b*y))"

_BRANCH2 = Family(
    name="typeD-branch2",
    coords=("y1", "y2", "y3", "y4"),
    aux=(("C", "k1*y4^3 + 2*k2*y4 + 2*Psi2p"),),
    rows=(
        ("1", "0", "k2*y1^2*y4", "y1/y4"),
        ("0", "1/y4", "y1", "0"),
        ("0", "0", "1", "0"),
        ("0", "-C/(2*y4)", "-(C/2)*y1", "1/y4"),
    ),
    params={"Psi2p": 1.0, "k1": 0.7, "k2": 0.4},
    guards=("y4",),
    box=((-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5), (0.6, 1.4)),
    expected_type="Dr",
    description="type D with J4 = 0 and J2 nonvanishing",
)

FAMILIES: dict[str, Family] = {}


def _register(f: Family) -> Family:
    FAMILIES[f.name] = f
    return f


_register(Family(
    name="potential",
    coords=("a", "b", "x", "y"),
    rows=_potential_rows(),
    params={"Psi2p": 1.0},
    functions={"V": FreeFunction(("a", "b", "x", "y"), V2)},
    guards=("V_ax*V_by - V_ay*V_bx",),
    box=((-0.5, 0.5),) * 4,
    expected_type=None,
    description="coframe da, db, V_ax dx + V_ay dy, V_bx dx + V_by dy of a potential V",
))

_register(Family(
    name="dancing",
    coords=("a", "b", "x", "y"),
    rows=_potential_rows(),
    params={"Psi2p": 1.0},
    functions={"V": FreeFunction(("a", "b", "x", "y"), V1)},
    guards=("b + a*x - y",),
    box=((-0.5, 0.5), (1.0, 2.0), (-0.5, 0.5), (-0.5, 0.5)),
    expected_type="O",
    description="homogeneous self-dual model from the logarithmic potential",
))

_register(Family(
    name="homogeneous-D",
    coords=("y1", "y2", "y3", "y4"),
    aux=(("d13", "1 - 1.5*Psi2p*y1*y3"), ("d24", "1 - 1.5*Psi2p*y2*y4")),
    rows=(
        ("1/d13", "0", "0", "0"),
        ("0", "1/d24", "0", "0"),
        ("0", "0", "1/d13", "0"),
        ("0", "0", "0", "1/d24"),
    ),
    params={"Psi2p": 1.0},
    guards=("d13", "d24"),
    box=((-0.6, 0.6),) * 4,
    expected_type="Dr",
    description="homogeneous model with type D anti-self-dual Weyl curvature",
))

_register(Family(
    name="typeD-generic",
    coords=("y1", "y2", "y3", "y4"),
    aux=(
        ("A", "-Psi2p*y3^3 + k1*y3^2/y4 - k2*y3/y4^2 - (k3 + 0.5*k4)/y4^3"),
        ("B", "Psi2p*(y3 - 1)^3 - k1*(y3 - 1)^2/y4 + k2*(y3 - 1)/y4^2 + k3/y4^3"),
    ),
    rows=(
        ("y4^2*(1 - y3)", "-y4", "0", "0"),
        ("y4^2*y3", "y4", "0", "0"),
        ("A*y4^2*(1 - y3)", "-A*y4", "-1", "-y3/y4"),
        ("B*y4^2*y3", "B*y4", "1", "(y3 - 1)/y4"),
    ),
    params={"Psi2p": 1.0, "k1": 0.3, "k2": -0.2, "k3": 0.25, "k4": 0.5},
    guards=("y4",),
    box=((-1.0, 1.0), (-1.0, 1.0), (-0.5, 1.5), (0.6, 1.4)),
    expected_type="Dr",
    description="type D with J2 and J4 nonvanishing (five constants)",
))

_register(_BRANCH2)

_register(Family(
    name="typeD-branch3",
    coords=_BRANCH2.coords,
    aux=_BRANCH2.aux,
    rows=_BRANCH2.rows,
    params=dict(_BRANCH2.params),
    guards=_BRANCH2.guards,
    box=_BRANCH2.box,
    expected_type="Dr",
    swap=True,
    description="type D with J2 = 0: branch-2 coframe with theta1<->theta2, theta3<->theta4",
))

_register(Family(
    name="typeII-YM",
    coords=("a", "b", "x", "y"),
    rows=(
        ("-1.5*Psi2p*(x^2 + x*f1 + f2)", "0", "1", "0"),
        ("0", "1", "0", "0"),
        ("1", "0", "0", "0"),
        ("0", "-1.5*Psi2p*(y^2 + y*f3 + f4)", "0", "1"),
    ),
    params={"Psi2p": 1.0},
    functions={
        "f1": FreeFunction(("a",), "0.3*a + 0.1"),
        "f2": FreeFunction(("b",), "b + 0.3*b^2"),
        "f3": FreeFunction(("b",), "0.5*b - 0.2"),
        "f4": FreeFunction(("a",), "a - 0.25*a^2 + 0.1*a^3"),
    },
    guards=("f2_b", "f4_a"),
    box=((-0.5, 0.5),) * 4,
    expected_type="II",
    description="type II examples satisfying the Yang-Mills condition for the reduced connection",
))

_TYPE3_T1_DY1 = ("-0.25*(3*E*Psi2p*y1 + y2*E*Psi2p + 6*Psi2p^2*y1 + 2*y2*E^2 - 2*E*W_y3 - Psi2p*W_y3"
                 " + E^2 - U_y1 + U_y1y1)*exp(-2*y4)")
_TYPE3_T1_DY3 = ("-0.25*(6*Psi2p^2*y1*y2*E - 9*y2*E^2*Psi2p*y1 + E^2*Psi2p*y2^2 + 9*Psi2p*y1*W_y3*E"
                 " - 2*W_y3*Psi2p*y2*E - 6*Psi2p^2*y1*W_y3 + 4*y2*E^2*W_y3 - 2*W_y3^2*E - U_y1*y2*E"
                 " + U_y1y1*y2*E + W_y3^2*Psi2p - 2*y2^2*E^3 - E^2*W_y3 - 4*U*E + 4*W_y3y3*E + U_y1*W_y3"
                 " - W_y3*U_y1y1 + y2*E^3)*exp(-2*y4)")
_TYPE3_T4_DY3 = ("1.5*Psi2p^2*y1/E + 0.75*W_y3*Psi2p/E - 0.25*U_y1/E + 0.25*U_y1/E - 0.5*y2*E"
                 " + 0.75*Psi2p*y1 - 0.75*Psi2p*y2 - 0.75*E + 0.5*W_y3")

_register(Family(
    name="typeIII",
    coords=("y1", "y2", "y3", "y4"),
    aux=(("E", "exp(y4/2)"),),
    rows=(
        (_TYPE3_T1_DY1, "E^2", _TYPE3_T1_DY3, "0.5*exp(-1.5*y4)*(y2*E - 2*W_y3y4)"),
        ("1/E", "0", "(y2 - W_y3)/E", "0"),
        ("0", "0", "E^2", "0"),
        ("-Psi2p/E - 1", "0", _TYPE3_T4_DY3, "0.5"),
    ),
    params={"Psi2p": 1.0},
    functions={
        "U": FreeFunction(("y1", "y3"), "0.3*y1^2*y3 + 0.1*y3 - 0.2*y1"),
        "W": FreeFunction(("y3", "y4"), "0.2*y3^2*y4 + 0.1*y3*y4^2"),
    },
    box=((-0.5, 0.5),) * 4,
    expected_type="III",
    description="type III examples with two free functions U(y1, y3), W(y3, y4)",
))

_register(Family(
    name="typeN",
    coords=("y1", "y2", "y3", "y4"),
    rows=(
        ("2*exp(-3*y4)", "(-16*y3^2 + F1 + y3*F2)*exp(-3*y4)", "0", "0"),
        ("0", "-8*exp(-2*y4)*y1", "8*exp(-2*y4)", "0"),
        ("0", "exp(y4)", "0", "0"),
        ("0", "0.5*Psi2p*exp(-2*y4)*y1", "-0.5*Psi2p*exp(-2*y4)", "-0.5"),
    ),
    params={"Psi2p": 1.0},
    functions={
        "F1": FreeFunction(("y2",), "0.5*y2^2 + 0.1"),
        "F2": FreeFunction(("y2",), "0.3*y2 - 0.2*y2^3"),
    },
    box=((-0.5, 0.5),) * 4,
    expected_type="N",
    description="type N examples with two free functions F1(y2), F2(y2)",
))

_register(Family(
    name="typeO",
    coords=("y1", "y2", "y3", "y4"),
    aux=(("D", "y2 + y1*y3 - y4"),),
    rows=(
        # Psi2p scales theta^1, theta^2 only, so the metric scales by 1/Psi2p
        ("1/(Psi2p*D)", "0", "0", "0"),
        ("0", "1/(Psi2p*D)", "0", "0"),
        ("0", "0", "(y4 - y2)/D", "-y3/D"),
        ("0", "0", "y1/D", "-1/D"),
    ),
    params={"Psi2p": 1.0},
    guards=("y2 + y1*y3 - y4",),
    box=((-0.3, 0.3), (0.6, 1.4), (-0.3, 0.3), (-0.3, 0.3)),
    expected_type="O",
    description="homogeneous model with vanishing anti-self-dual Weyl curvature",
))


@dataclass
class MetricSpec:
    """A family together with parameter values, free functions and a sample box."""

    family: str
    params: dict[str, float] = field(default_factory=dict)
    functions: dict[str, str] = field(default_factory=dict)
    box: list[tuple[float, float]] | None = None
    margin: float = GUARD_MARGIN

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}; known: {sorted(FAMILIES)}")
        fam = FAMILIES[self.family]
        unknown = set(self.params) - set(fam.params)
        if unknown:
            raise SpecError(f"unknown parameters {sorted(unknown)} for family {self.family!r}")
        self.params = {**fam.params, **{k: float(v) for k, v in self.params.items()}}
        unknown = set(self.functions) - set(fam.functions)
        if unknown:
            raise SpecError(f"unknown free functions {sorted(unknown)} for family {self.family!r}")
        self.functions = {k: self.functions.get(k, f.default) for k, f in fam.functions.items()}
        for name, text in self.functions.items():
            try:
                e = parse(text)
            except ValueError as exc:
                raise SpecError(f"function {name}: {exc}") from exc
            stray = e.free_names() - set(fam.functions[name].args) - set(self.params)
            if stray:
                raise SpecError(f"function {name} may depend only on {fam.functions[name].args}; found {sorted(stray)}")
        self.box = [tuple(map(float, b)) for b in (self.box or fam.box)]
        if len(self.box) != 4 or any(lo >= hi for lo, hi in self.box):
            raise SpecError("box needs four increasing (lo, hi) intervals")
        if self.psi2p == 0:
            raise SpecError("Psi2p must be nonzero")

    @property
    def definition(self) -> Family:
        return FAMILIES[self.family]

    @property
    def psi2p(self) -> float:
        return self.params["Psi2p"]

    @property
    def expected_type(self) -> str | None:
        return self.definition.expected_type

    def with_params(self, **params) -> "MetricSpec":
        return MetricSpec(self.family, {**self.params, **params}, dict(self.functions), list(self.box), self.margin)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "functions": dict(self.functions),
                "box": [list(b) for b in self.box], "margin": self.margin}

    @classmethod
    def from_dict(cls, d: Mapping) -> "MetricSpec":
        if not isinstance(d, Mapping) or "family" not in d:
            raise SpecError("spec must be an object with a 'family' field")
        try:
            return cls(d["family"], dict(d.get("params", {})), dict(d.get("functions", {})),
                       d.get("box"), float(d.get("margin", GUARD_MARGIN)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(str(exc)) from exc


def _derivative_names(name: str, args: Sequence[str], max_derivative: int):
    for k in range(1, max_derivative + 1):
        for combo in itertools.combinations_with_replacement(args, k):
            yield name + "_" + "".join(combo), combo


def _compiled(family: Family):
    return ([(n, parse(t)) for n, t in family.aux], [[parse(t) for t in row] for row in family.rows],
            [parse(g) for g in family.guards])


_COMPILED: dict[str, tuple] = {}


def _tables(family: Family):
    if family.name not in _COMPILED:
        _COMPILED[family.name] = _compiled(family)
    return _COMPILED[family.name]


def environment(spec: MetricSpec, point, order: int = DEFAULT_ORDER) -> dict[str, Jet]:
    """Coordinate jets, free functions with their partials, and auxiliaries at ``point``.

    Free functions are evaluated two orders higher so that their second partials
    still carry ``order`` jet coefficients.
    """
    fam = spec.definition
    point = np.asarray(point, dtype=float)
    extra = max((f.max_derivative for f in fam.functions.values()), default=0)
    xs = coordinates(point, order + extra)
    env: dict[str, Jet] = dict(zip(fam.coords, xs))
    idx = {c: i for i, c in enumerate(fam.coords)}
    for name, ff in fam.functions.items():
        val = _as_jet(parse(spec.functions[name]).evaluate(env, spec.params), xs[0])
        env[name] = val
        for dname, combo in _derivative_names(name, ff.args, ff.max_derivative):
            j = val
            for c in combo:
                j = j.deriv(idx[c])
            env[dname] = j
    env = {k: v.truncate(order) for k, v in env.items()}
    aux, _, _ = _tables(fam)
    for name, e in aux:
        env[name] = _as_jet(e.evaluate(env, spec.params), env[fam.coords[0]])
    return env


def _as_jet(v, like: Jet) -> Jet:
    return v if isinstance(v, Jet) else Jet.constant(like.space, v)


def check_guards(spec: MetricSpec, env: Mapping[str, Jet], point=None):
    _, _, guards = _tables(spec.definition)
    for g in guards:
        v = g.evaluate(env, spec.params)
        v = float(v.value) if isinstance(v, Jet) else float(v)
        if not np.isfinite(v) or abs(v) < spec.margin:
            raise SingularEvaluationError(f"guard {g.text}", v, point)


def build_coframe(spec: MetricSpec, point, order: int = DEFAULT_ORDER) -> CoframeSample:
    """The family's null coframe at ``point`` with jets of the given order."""
    point = np.asarray(point, dtype=float)
    if point.shape != (4,):
        raise ValueError("catalog metrics live on a 4-dimensional chart")
    try:
        env = environment(spec, point, order)
        check_guards(spec, env, point)
        _, rows, _ = _tables(spec.definition)
        like = env[spec.definition.coords[0]]
        e = Jet.stack([Jet.stack([_as_jet(c.evaluate(env, spec.params), like) for c in row]) for row in rows])
    except SingularEvaluationError as exc:
        raise exc.at(point) from None
    if spec.definition.swap:
        e = e[[1, 0, 3, 2]]
    return CoframeSample(e, NULL_METRIC.copy(), point)


def build_from_potential(V: str | Expr, point, psi2p: float = 1.0, order: int = DEFAULT_ORDER) -> CoframeSample:
    """Coframe {da, db, V_ax dx + V_ay dy, V_bx dx + V_by dy} on coordinates (a, b, x, y)."""
    spec = MetricSpec("potential", {"Psi2p": psi2p}, {"V": parse(V).text})
    return build_coframe(spec, point, order)


def sample_points(spec: MetricSpec, rng: np.random.Generator, count: int):
    lo = np.array([b[0] for b in spec.box])
    hi = np.array([b[1] for b in spec.box])
    return lo + (hi - lo) * rng.random((count, 4))


def accepted_samples(spec: MetricSpec, n: int, seed: int = 0, order: int = DEFAULT_ORDER,
                     max_attempts: int | None = None):
    """``n`` (point, coframe) pairs drawn uniformly from the box, skipping rejected draws."""
    rng = np.random.default_rng(seed)
    max_attempts = max_attempts or 20 * n + 20
    out, attempts = [], 0
    while len(out) < n:
        if attempts >= max_attempts:
            raise SamplingExhaustedError(f"{spec.family}: only {len(out)} of {n} points accepted after {attempts} draws")
        p = sample_points(spec, rng, 1)[0]
        attempts += 1
        try:
            out.append((p, build_coframe(spec, p, order)))
        except (SingularEvaluationError, IllConditionedCoframeError):
            continue
    return out


# -- closed-form checks ----------------------------------------------------------


@dataclass
class ResidualReport:
    points: np.ndarray
    residuals: np.ndarray

    @property
    def max(self) -> float:
        return float(np.abs(self.residuals).max(initial=0.0))

    def passed(self, tol: float) -> bool:
        return self.max < tol


def check_einstein_pde(V: str | Expr, lam: float, c1: str | Expr, c2: str | Expr, points,
                       params: Mapping[str, float] | None = None) -> ResidualReport:
    """Residual of det(V_ax, V_ay; V_bx, V_by) - c1(a, b) c2(x, y) exp(-lam V)."""
    V, c1, c2 = parse(V), parse(c1), parse(c2)
    params = dict(params or {})
    for e, allowed in ((c1, {"a", "b"}), (c2, {"x", "y"})):
        stray = e.free_names() - allowed - set(params)
        if stray:
            raise SpecError(f"{e.text!r} may depend only on {sorted(allowed)}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    res = []
    for p in points:
        env = dict(zip("abxy", coordinates(p, 2)))
        try:
            v = _as_jet(V.evaluate(env, params), env["a"])
            h = v.grad().grad().value
            det = h[0, 2] * h[1, 3] - h[0, 3] * h[1, 2]
            cc = float(_value(c1.evaluate(env, params))) * float(_value(c2.evaluate(env, params)))
        except SingularEvaluationError as exc:
            raise exc.at(p) from None
        res.append(det - cc * np.exp(-lam * float(v.value)))
    return ResidualReport(points, np.array(res))


def _value(v):
    return v.value if isinstance(v, Jet) else v


def liouville_solution(p: Jet, q: Jet, psi2p: float) -> Jet:
    """F2 = log(2 p' q' / (-3 Psi2p (p - q)^2)) on the (y1, y3) plane."""
    dp, dq = p.deriv(0), q.deriv(1)
    diff = (p - q).truncate(dp.order)
    if abs(float(diff.value)) < GUARD_MARGIN:
        raise SingularEvaluationError("liouville p - q", float(diff.value))
    arg = dp * dq * 2.0 / (diff * diff * (-3.0 * psi2p))
    return arg.log()


def check_liouville(p: str | Expr, q: str | Expr, psi2p: float, points) -> ResidualReport:
    """Residual of d^2 F2 / dy1 dy3 - 3 Psi2p exp(F2) with F2 built from p(y1), q(y3)."""
    p, q = parse(p), parse(q)
    if p.free_names() - {"y1", "Psi2p"} or q.free_names() - {"y3", "Psi2p"}:
        raise SpecError("p must depend on y1 only and q on y3 only")
    params = {"Psi2p": psi2p}
    points = np.atleast_2d(np.asarray(points, dtype=float))
    res = []
    for pt in points:
        y1, y3 = coordinates(pt, 4)
        env = {"y1": y1, "y3": y3}
        try:
            F = liouville_solution(_as_jet(p.evaluate(env, params), y1), _as_jet(q.evaluate(env, params), y1), psi2p)
        except SingularEvaluationError as exc:
            raise exc.at(pt) from None
        res.append(F.partial((1, 1)) - 3.0 * psi2p * np.exp(F.value))
    return ResidualReport(points, np.array(res))


def spec_for(family: str, **params) -> MetricSpec:
    return MetricSpec(family, params)


def all_specs(psi2p: float = 1.0) -> list[MetricSpec]:
    return [MetricSpec(name, {"Psi2p": psi2p}) for name in FAMILIES]


__all__ = [
    "FAMILIES", "MetricSpec", "SpecError", "SamplingExhaustedError", "ConfigurationError", "V1", "V2",
    "build_coframe", "build_from_potential", "accepted_samples", "check_einstein_pde", "check_liouville",
    "environment", "liouville_solution", "all_specs", "spec_for",
]
