"""Cached catalog samples shared across test modules."""

from functools import lru_cache

import numpy as np

from pketwistor.catalog import FAMILIES, MetricSpec, accepted_samples
from pketwistor.jetcalc import Jet, space

PKE_FAMILIES = tuple(name for name in FAMILIES if name != "typeIII")


@lru_cache(maxsize=None)
def samples(family: str, n: int, seed: int = 0, order: int = 3, psi2p: float | None = None):
    spec = MetricSpec(family, {} if psi2p is None else {"Psi2p": psi2p})
    return tuple(accepted_samples(spec, n, seed=seed, order=order))


def random_jet(rng, dim=3, order=3, shape=(), value_offset=0.0, scale=1.0):
    sp = space(dim, order)
    data = scale * rng.standard_normal(tuple(shape) + (sp.size,))
    data[..., 0] += value_offset
    return Jet(sp, data)


def close(a, b, tol):
    a = a.data if isinstance(a, Jet) else np.asarray(a)
    b = b.data if isinstance(b, Jet) else np.asarray(b)
    return float(np.abs(a - b).max(initial=0.0)) < tol


def random_coframe(rng, n=4, order=3, g=None, scale=0.3):
    """A coframe whose components are random Taylor jets near the identity."""
    from pketwistor.forms import NULL_METRIC, CoframeSample

    point = rng.uniform(-0.5, 0.5, n)
    while True:
        e = random_jet(rng, dim=n, order=order, shape=(n, n), scale=scale) + np.eye(n)
        if np.linalg.cond(e.value) < 4.0:
            break
    if g is None:
        g = NULL_METRIC if n == 4 else np.diag([1.0] * (n // 2) + [-1.0] * (n - n // 2))
    return CoframeSample(e, g, point)


def random_form(rng, degree, n=4, order=3, lead=()):
    from math import comb

    from pketwistor.forms import FormValue

    return FormValue(degree, n, random_jet(rng, dim=n, order=order, shape=tuple(lead) + (comb(n, degree),)))


def coefficient_scale(cof):
    """Size of the jet coefficients of a coframe and its inverse; bounds roundoff growth."""
    return float(np.abs(cof.e.data).max() * np.abs(cof.einv.data).max())


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])
