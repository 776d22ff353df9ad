"""Levi-Civita connection and curvature of a constant-coefficient coframe.

Index conventions (all components with respect to the coframe):

* ``D[a, b, c] = d theta^a (E_b, E_c)`` are the structure functions.
* ``gamma[a, b, c]`` is the connection form Gamma^a_b evaluated on E_c, so
  ``Gamma^a_b = gamma[a, b, c] theta^c`` and ``d theta^a = -Gamma^a_b ^ theta^b``.
* ``riem[a, b, c, d] = R^a_{bcd}`` with ``dGamma + Gamma ^ Gamma = 1/2 R^a_{bcd} theta^c ^ theta^d``.
* Ricci ``R_bd = R^a_{bad}``; all lowering goes through the constant metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forms import NULL_METRIC, SIGMA_MINUS, SIGMA_PLUS, CoframeSample, sigma_gram
from .jetcalc import Jet, jeinsum


class ConventionError(AssertionError):
    """Two independent extractions of the same curvature quantity disagree."""


@dataclass
class ConnectionSample:
    gamma: Jet
    cof: CoframeSample
    structure: Jet

    @property
    def n(self) -> int:
        return self.cof.n

    def form(self, a: int, b: int) -> Jet:
        """Coframe components of Gamma^a_b."""
        return self.gamma[a, b]

    def independent(self) -> dict[str, Jet]:
        """The six independent forms in dimension 4 (upper/lower 1-based labels)."""
        if self.n != 4:
            raise ValueError("independent() is defined for the 4d null coframe")
        g = self.gamma
        return {"G11": g[0, 0], "G12": g[0, 1], "G21": g[1, 0], "G22": g[1, 1], "G14": g[0, 3], "G41": g[3, 0]}

    def lowered(self) -> Jet:
        g = Jet.constant(self.gamma.space, self.cof.g)
        return jeinsum("ae,ebc->abc", g, self.gamma)

    def metricity_residual(self) -> float:
        low = self.lowered().value
        return float(np.abs(low + low.transpose(1, 0, 2)).max())

    def torsion_residual(self) -> float:
        # d theta^a (E_c, E_d) + (Gamma^a_b ^ theta^b)(E_c, E_d) = D^a_cd + gamma^a_dc - gamma^a_cd
        D = self.structure.value
        G = self.gamma.value
        return float(np.abs(D + G.transpose(0, 2, 1) - G).max())


def structure_functions(cof: CoframeSample) -> Jet:
    """``D[a, b, c] = d theta^a (E_b, E_c)``; consumes one jet order."""
    grad = cof.e.grad()  # grad[a, nu, mu] = d_mu e^a_nu
    dcoord = grad.transpose(0, 2, 1) - grad  # (d theta^a)_{mu nu} = d_mu e^a_nu - d_nu e^a_mu
    E = cof.einv.truncate(grad.order)
    tmp = jeinsum("amn,mb->abn", dcoord, E)
    return jeinsum("abn,nc->abc", tmp, E)


def solve_levi_civita(cof: CoframeSample, method: str = "cyclic") -> ConnectionSample:
    """Torsion-free metric connection of the coframe metric ``g_ab theta^a theta^b``."""
    D = structure_functions(cof)
    g = cof.g
    ginv = np.linalg.inv(g)
    low = jeinsum("ae,ebc->abc", Jet.constant(D.space, g), D)  # D_acd = Gamma_acd - Gamma_adc
    if method == "cyclic":
        # Gamma_abc = -1/2 (D_acb - D_cba + D_bac)
        gl = (low.transpose(0, 2, 1) - low.transpose(2, 1, 0) + low.transpose(1, 0, 2)) * (-0.5)
    elif method == "linear":
        gl = _linear_solve(low)
    else:
        raise ValueError(f"unknown method {method!r}")
    gamma = jeinsum("ae,ebc->abc", Jet.constant(D.space, ginv), gl)
    return ConnectionSample(gamma, cof, D)


def _linear_solve(low: Jet) -> Jet:
    """Brute-force oracle: solve Gamma_acd - Gamma_adc = D_acd with Gamma_abc = -Gamma_bac."""
    n = low.shape[0]
    unknowns = [(a, b, c) for a in range(n) for b in range(a + 1, n) for c in range(n)]
    col = {u: i for i, u in enumerate(unknowns)}

    def coeff(a, b, c):
        if a == b:
            return None, 0
        return (col[(a, b, c)], 1) if a < b else (col[(b, a, c)], -1)

    rows, rhs_idx = [], []
    for a in range(n):
        for c in range(n):
            for d in range(c + 1, n):
                row = np.zeros(len(unknowns))
                for (x, y, z), s in (((a, c, d), 1), ((a, d, c), -1)):
                    i, sign = coeff(x, y, z)
                    if i is not None:
                        row[i] += s * sign
                rows.append(row)
                rhs_idx.append((a, c, d))
    M = np.array(rows)
    rhs = np.stack([low.data[a, c, d] for a, c, d in rhs_idx])
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    out = np.zeros(low.data.shape)
    for (a, b, c), i in col.items():
        out[a, b, c] = sol[i]
        out[b, a, c] = -sol[i]
    return Jet(low.space, out)


def frame_d_one_forms(A: Jet, cof: CoframeSample, D: Jet) -> Jet:
    """dA(E_d, E_e) for frame components ``A[..., c]``; consumes one order."""
    EA = cof.frame_derivative(A)  # EA[..., e, d] = E_d(A_e)
    D = D.truncate(EA.order)
    lead = "pqrst"[: len(A.shape) - 1]
    return EA.swapaxes(-1, -2) - EA + jeinsum(f"{lead}c,cde->{lead}de", A.truncate(EA.order), D)


def frame_d_two_forms(B: Jet, cof: CoframeSample, D: Jet) -> Jet:
    """dB(E_0, E_1, E_2) for antisymmetric frame components ``B[..., a, b]``."""
    EB = cof.frame_derivative(B)  # EB[..., a, b, c] = E_c(B_ab)
    D = D.truncate(EB.order)
    B = B.truncate(EB.order)
    lead = "pqrst"[: len(B.shape) - 2]
    nd = len(B.shape)
    # E0 B12 - E1 B02 + E2 B01, as an array over (0, 1, 2)
    t1 = EB.transpose(*range(nd - 2), nd, nd - 2, nd - 1)  # [.., i, j, k] = E_i(B_jk)
    ext = t1 - t1.transpose(*range(nd - 2), nd - 1, nd - 2, nd) + t1.transpose(*range(nd - 2), nd - 1, nd, nd - 2)
    # + D^c_01 B_c2 - D^c_02 B_c1 + D^c_12 B_c0
    DB = jeinsum(f"cij,{lead}ck->{lead}ijk", D, B)
    brk = DB - DB.transpose(*range(nd - 2), nd - 2, nd, nd - 1) + DB.transpose(*range(nd - 2), nd, nd - 2, nd - 1)
    return ext + brk


def wedge_matrices(A: Jet, B: Jet, degA: int = 1, degB: int = 1) -> Jet:
    """(A ^ B)^i_j = A^i_k ^ B^k_j for matrices of 1-forms given by frame components."""
    if (degA, degB) == (1, 1):
        prod = jeinsum("ikc,kjd->ijcd", A, B)
        return prod - prod.transpose(0, 1, 3, 2)
    if (degA, degB) == (1, 2):
        # (a ^ b)(X0, X1, X2) = a0 b12 - a1 b02 + a2 b01
        prod = jeinsum("ika,kjbc->ijabc", A, B)
        return prod - prod.transpose(0, 1, 3, 2, 4) + prod.transpose(0, 1, 3, 4, 2)
    if (degA, degB) == (2, 1):
        # (b ^ a)(X0, X1, X2) = b01 a2 - b02 a1 + b12 a0
        prod = jeinsum("ikab,kjc->ijabc", A, B)
        return prod - prod.transpose(0, 1, 2, 4, 3) + prod.transpose(0, 1, 4, 2, 3)
    raise ValueError("unsupported degrees")


@dataclass
class RiemannSample:
    riem: Jet
    cof: CoframeSample
    conn: ConnectionSample

    @property
    def n(self) -> int:
        return self.cof.n

    def lowered(self) -> Jet:
        return jeinsum("ae,ebcd->abcd", Jet.constant(self.riem.space, self.cof.g), self.riem)

    def ricci(self) -> Jet:
        return Jet(self.riem.space, np.einsum("abads->bds", self.riem.data))

    def scalar(self) -> Jet:
        ginv = np.linalg.inv(self.cof.g)
        return Jet(self.riem.space, np.einsum("bd,bds->s", ginv, self.ricci().data))

    def schouten(self) -> Jet:
        n = self.n
        g = self.cof.g
        R = self.scalar()
        ric = self.ricci()
        return (ric - _outer_const(g, R) * (1.0 / (2 * (n - 1)))) * (1.0 / (n - 2))

    def weyl(self) -> Jet:
        """Lowered Weyl tensor C_abcd = R_abcd + g_ad P_cb - g_ac P_db + g_bc P_da - g_bd P_ca."""
        g = Jet.constant(self.riem.space, self.cof.g)
        P = self.schouten()
        gP = jeinsum("ab,cd->abcd", g, P)  # gP[a, b, c, d] = g_ab P_cd
        # g_ad P_cb -> gP[a,d,c,b]; g_ac P_db -> gP[a,c,d,b]; g_bc P_da -> gP[b,c,d,a]; g_bd P_ca -> gP[b,d,c,a]
        t1 = gP.transpose(0, 3, 2, 1)
        t2 = gP.transpose(0, 3, 1, 2)
        t3 = gP.transpose(3, 0, 1, 2)
        t4 = gP.transpose(3, 0, 2, 1)
        return self.lowered() + t1 - t2 + t3 - t4

    def symmetry_residuals(self) -> dict[str, float]:
        low = self.lowered().value
        return {
            "antisym_cd": float(np.abs(low + low.transpose(0, 1, 3, 2)).max()),
            "antisym_ab": float(np.abs(low + low.transpose(1, 0, 2, 3)).max()),
            "pair_symmetry": float(np.abs(low - low.transpose(2, 3, 0, 1)).max()),
            "first_bianchi": float(np.abs(low + low.transpose(0, 2, 3, 1) + low.transpose(0, 3, 1, 2)).max()),
        }


def _outer_const(g: np.ndarray, s: Jet) -> Jet:
    """The jet array g_ab * s for a constant matrix g and scalar jet s."""
    return Jet(s.space, np.einsum("ab,s->abs", g, s.data))


def riemann(conn: ConnectionSample) -> RiemannSample:
    cof, D = conn.cof, conn.structure
    G = conn.gamma
    dG = frame_d_one_forms(G, cof, D)  # [a, b, d, e]
    GG = wedge_matrices(G, G)
    return RiemannSample(dG + GG, cof, conn)


def curvature_forms(conn: ConnectionSample) -> Jet:
    """Omega^a_b(E_c, E_d); identical to ``riemann(conn).riem``."""
    return riemann(conn).riem


@dataclass
class CurvatureDecomp:
    psi: np.ndarray
    psi_prime: np.ndarray
    schouten: np.ndarray
    scalar: float
    weyl: np.ndarray = field(repr=False)
    operator: np.ndarray = field(repr=False)
    psi_jet: Jet | None = field(default=None, repr=False)
    psi_prime_jet: Jet | None = field(default=None, repr=False)
    scalar_jet: Jet | None = field(default=None, repr=False)
    schouten_jet: Jet | None = field(default=None, repr=False)

    def P(self, a: int, b: int) -> float:
        """Schouten component with 1-based indices."""
        return float(self.schouten[a - 1, b - 1])


# (index tuple, sign) of C_abcd for Psi_0..Psi_4 and Psi'_0..Psi'_4, 1-based
PSI_COMPONENTS = (((1, 4, 1, 4), 1), ((2, 4, 1, 4), 1), ((1, 4, 2, 3), -1), ((1, 3, 2, 3), 1), ((2, 3, 2, 3), 1))
PSI_PRIME_COMPONENTS = (((3, 4, 3, 4), 1), ((1, 3, 3, 4), 1), ((1, 2, 3, 4), 1), ((1, 2, 1, 3), 1), ((1, 2, 1, 2), 1))


def _read(weyl: Jet, table) -> Jet:
    comps = [weyl[tuple(i - 1 for i in idx)] * s for idx, s in table]
    return Jet.stack(comps)


# ordering of the 6x6 operator matrix: (sigma1+, sigma3+, sigma2+, sigma1-, sigma3-, sigma2-)
OPERATOR_ORDER = (0, 2, 1, 3, 5, 4)


def operator_matrix(riem: RiemannSample) -> np.ndarray:
    """Curvature operator on 2-forms in the ordered sigma basis.

    A 2-form ``w`` (antisymmetric frame components ``w_ab``) is sent to
    ``1/2 w_ab Omega^{ab}`` with ``Omega^{ab} = g^{bc} Omega^a_c``; the result
    is expanded in the sigma basis, column ``j`` being the image of basis form ``j``.
    """
    ginv = np.linalg.inv(riem.cof.g)
    R = riem.riem.value  # R^a_{c, d e}
    Rup = np.einsum("acde,bc->abde", R, ginv)  # Omega^{ab}(E_d, E_e)
    basis = [(SIGMA_PLUS + SIGMA_MINUS)[i] for i in OPERATOR_ORDER]
    images = np.array([0.5 * np.einsum("ab,abde->de", w, Rup) for w in basis])
    iu = np.triu_indices(4, 1)
    coords = np.linalg.solve(sigma_gram().T, images[:, iu[0], iu[1]].T).T  # rows = images in sigma coords
    coords = coords[:, list(OPERATOR_ORDER)]
    return coords.T


def printed_operator(psi, psi_prime, P, R) -> np.ndarray:
    """The 6x6 layout in (sigma1+, sigma3+, sigma2+ | sigma1-, sigma3-, sigma2-) order."""
    p0, p1, p2, p3, p4 = psi
    q0, q1, q2, q3, q4 = psi_prime
    P = np.asarray(P)

    def p(a, b):
        return P[a - 1, b - 1]

    M = np.array([
        [q2, -2 * q3, q4, p(2, 2), 2 * p(1, 2), p(1, 1)],
        [q1, -2 * q2, q3, p(2, 3), p(1, 3) - p(2, 4), -p(1, 4)],
        [q0, -2 * q1, q2, p(3, 3), -2 * p(3, 4), p(4, 4)],
        [p(4, 4), 2 * p(1, 4), p(1, 1), p2, 2 * p1, p0],
        [p(3, 4), p(1, 3) - p(2, 4), -p(1, 2), -p3, -2 * p2, -p1],
        [p(3, 3), -2 * p(2, 3), p(2, 2), p4, 2 * p3, p2],
    ])
    return R / 12.0 * np.eye(6) + M


def decompose(riem: RiemannSample, check: bool = True, tol: float = 1e-9) -> CurvatureDecomp:
    if riem.n != 4:
        raise ValueError("decompose is defined for the 4d null coframe")
    W = riem.weyl()
    psi = _read(W, PSI_COMPONENTS)
    psip = _read(W, PSI_PRIME_COMPONENTS)
    P = riem.schouten()
    R = riem.scalar()
    op = operator_matrix(riem)
    out = CurvatureDecomp(psi.value, psip.value, P.value, R.value, W.value, op, psi, psip, R, P)
    if check:
        scale = 1.0 + np.abs(op).max()
        err = operator_mismatch(out)
        if err > tol * scale:
            raise ConventionError(f"operator-matrix extraction disagrees with Weyl components by {err:.3e}")
    return out


def operator_mismatch(dec: CurvatureDecomp) -> float:
    return float(np.abs(dec.operator - printed_operator(dec.psi, dec.psi_prime, dec.schouten, dec.scalar)).max())


def psi_from_operator(op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Read Psi_i and Psi'_i back from the operator matrix (second extraction path)."""
    R12 = np.trace(op) / 6.0
    M = op - R12 * np.eye(6)
    psi = np.array([M[3, 5], M[3, 4] / 2, M[3, 3], -M[4, 3], M[5, 3]])
    psip = np.array([M[2, 0], M[1, 0], M[0, 0], M[0, 1] / -2, M[0, 2]])
    return psi, psip


def reconstruct_riemann(dec: CurvatureDecomp, g: np.ndarray = NULL_METRIC) -> np.ndarray:
    """R_abcd rebuilt from the Weyl tensor and Schouten tensor."""
    P = dec.schouten
    gP = np.einsum("ab,cd->abcd", g, P)
    return dec.weyl - (gP.transpose(0, 3, 2, 1) - gP.transpose(0, 3, 1, 2) + gP.transpose(3, 0, 1, 2) - gP.transpose(3, 0, 2, 1))


# -- dimension-independent helpers used for the 5d metric ---------------------------

@dataclass
class Curvature5:
    conn: ConnectionSample
    riem: RiemannSample
    ricci: Jet
    scalar: Jet
    schouten: Jet
    weyl: Jet


def solve_levi_civita_5d(cof: CoframeSample) -> Curvature5:
    conn = solve_levi_civita(cof)
    riem = riemann(conn)
    return Curvature5(conn, riem, riem.ricci(), riem.scalar(), riem.schouten(), riem.weyl())
