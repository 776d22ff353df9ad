"""Independent sympy reference: coordinate metric, Christoffel symbols, curvature.

Nothing here touches the jet machinery.  Catalog formulas are re-parsed by sympy,
free functions are differentiated symbolically, and the curvature is built from
the coordinate metric g = 2 th1 th3 + 2 th2 th4 with the textbook formulas.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from pketwistor.catalog import FAMILIES, MetricSpec

_TRANSFORMS = standard_transformations + (convert_xor,)
NULL = sp.Matrix([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])


def _parse(text, local):
    return parse_expr(text, local_dict=local, transformations=_TRANSFORMS)


def symbolic_coframe(spec: MetricSpec):
    """Rows of the coframe as sympy expressions in the family coordinates."""
    fam = spec.definition
    xs = sp.symbols(fam.coords)
    local = dict(zip(fam.coords, xs))
    local.update({k: sp.Float(v, 30) for k, v in spec.params.items()})
    for name, ff in fam.functions.items():
        f = _parse(spec.functions[name], dict(local))
        local[name] = f
        for k in range(1, ff.max_derivative + 1):
            for combo in itertools.combinations_with_replacement(ff.args, k):
                local[name + "_" + "".join(combo)] = sp.diff(f, *[local[c] for c in combo])
    for name, text in fam.aux:
        local[name] = _parse(text, dict(local))
    rows = sp.Matrix([[_parse(t, dict(local)) for t in row] for row in fam.rows])
    if fam.swap:
        rows = rows.extract([1, 0, 3, 2], [0, 1, 2, 3])
    return xs, rows


@lru_cache(maxsize=None)
def _compiled_metric(spec_key):
    spec = MetricSpec.from_dict(dict(spec_key_dict(spec_key)))
    xs, e = symbolic_coframe(spec)
    g = e.T * NULL * e
    dg = [[[sp.diff(g[i, j], x) for x in xs] for j in range(4)] for i in range(4)]
    ddg = [[[[sp.diff(dg[i][j][k], x) for x in xs] for k in range(4)] for j in range(4)] for i in range(4)]
    f = sp.lambdify([xs], [e, g, dg, ddg], "mpmath")
    return f


def spec_key(spec: MetricSpec):
    d = spec.to_dict()
    return (d["family"], tuple(sorted(d["params"].items())), tuple(sorted(d["functions"].items())))


def spec_key_dict(key):
    return {"family": key[0], "params": dict(key[1]), "functions": dict(key[2])}


def coordinate_riemann(spec: MetricSpec, point):
    """(e, g, R^a_bcd) at ``point`` in coordinates, from the sympy metric."""
    import mpmath

    mpmath.mp.dps = 30
    e, g, dg, ddg = _compiled_metric(spec_key(spec))(list(map(mpmath.mpf, point)))
    e = np.array(e.tolist(), dtype=float) if hasattr(e, "tolist") else np.array(e, dtype=float)
    g = np.array(g.tolist(), dtype=float) if hasattr(g, "tolist") else np.array(g, dtype=float)
    dg = np.array(dg, dtype=float)
    ddg = np.array(ddg, dtype=float)
    gi = np.linalg.inv(g)
    # Gamma_{k i j} = 1/2 (g_ki,j + g_kj,i - g_ij,k), first kind
    G1 = 0.5 * (dg + np.einsum("kji->kij", dg) - np.einsum("ijk->kij", dg))
    G = np.einsum("lk,kij->lij", gi, G1)
    # d_m Gamma_{k i j}
    dG1 = 0.5 * (ddg + np.einsum("kjim->kijm", ddg) - np.einsum("ijkm->kijm", ddg))
    dgi = -np.einsum("ab,bcm,cd->adm", gi, dg, gi)
    dG = np.einsum("lkm,kij->lijm", dgi, G1) + np.einsum("lk,kijm->lijm", gi, dG1)
    # R^l_{i m j} = d_m G^l_ij - d_j G^l_im + G^l_mk G^k_ij - G^l_jk G^k_im
    R = (np.einsum("lijm->limj", dG) - np.einsum("limj->limj", dG)
         + np.einsum("lmk,kij->limj", G, G) - np.einsum("ljk,kim->limj", G, G))
    return e, g, R


def frame_curvature(spec: MetricSpec, point):
    """Lowered Riemann tensor R_abcd in the null coframe, with the scalar curvature."""
    e, g, R = coordinate_riemann(spec, point)
    Rlow = np.einsum("la,abcd->lbcd", g, R)
    einv = np.linalg.inv(e)
    Rf = np.einsum("ijkl,ia,jb,kc,ld->abcd", Rlow, einv, einv, einv, einv)
    gi = np.linalg.inv(g)
    scalar = float(np.einsum("ij,kl,kilj->", gi, gi, Rlow))
    return Rf, scalar


def weyl4(Rf, g=np.array(NULL.tolist(), dtype=float)):
    gi = np.linalg.inv(g)
    ric = np.einsum("ac,abcd->bd", gi, Rf)
    R = float(np.einsum("bd,bd->", gi, ric))
    P = 0.5 * (ric - R / 6.0 * g)
    gP = (np.einsum("ac,bd->abcd", g, P) + np.einsum("bd,ac->abcd", g, P)
          - np.einsum("ad,bc->abcd", g, P) - np.einsum("bc,ad->abcd", g, P))
    return Rf - gP, ric, R


def psi_values(spec: MetricSpec, point):
    """(Psi0..Psi4, Psi'2, scalar curvature, trace-free Ricci) from the coordinate route."""
    Rf, _ = frame_curvature(spec, point)
    C, ric, R = weyl4(Rf)
    c = lambda a, b, cc, d: C[a - 1, b - 1, cc - 1, d - 1]
    psi = np.array([c(1, 4, 1, 4), c(2, 4, 1, 4), -c(1, 4, 2, 3), c(1, 3, 2, 3), c(2, 3, 2, 3)])
    psi2p = c(1, 2, 3, 4)
    g = np.array(NULL.tolist(), dtype=float)
    tf = ric - R / 4.0 * g
    return psi, psi2p, R, tf


__all__ = ["symbolic_coframe", "coordinate_riemann", "frame_curvature", "psi_values"]
