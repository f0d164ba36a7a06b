"""Where does the Lambda term in Psi2 go?

For an Einstein space with R_mn = Lambda g_mn the Weyl square is
C_abcd C^abcd = K - 8 Lambda^2 / 3, and with Psi2 the only (real) nonzero
scalar, C_abcd C^abcd = 48 Psi2^2.  Both sides are computed here without
the tetrad on one side, which fixes |Psi2| = m / (2 a^3) independently of
any contraction convention.  The demo then shows that the form
-Lambda/9 + m/(6 a^3) is what one gets by contracting the full Riemann
tensor instead of the Weyl tensor.

    python3 demos/psi2_invariants.py
"""

from __future__ import annotations

import numpy as np

from lambdavac.ansatz import builtin
from lambdavac.curvature import compute_curvature
from lambdavac.newmanpenrose import canonical_tetrad, psi2_closed_forms, weyl_scalars
from lambdavac.symcore import Num, evaluate


def _num(e, pt):
    return float(e.value) if isinstance(e, Num) else evaluate(e, {k: pt[k] for k in e.free_symbols})


def _array(arr, pt):
    out = np.empty(arr.shape)
    for idx, e in np.ndenumerate(arr):
        out[idx] = _num(e, pt)
    return out


def main():
    sol = builtin("space_periodic", 1, 1)
    b = compute_curvature(sol.metric)
    tet = canonical_tetrad(sol.metric, a=sol.a)
    psi2 = weyl_scalars(b, tet)[2][0]
    forms = psi2_closed_forms(sol.a, 1, 1)

    print("x       a      48 Psi2^2     C.C          K - 8/3      Psi2        -m/(2a^3)   -1/9+m/(6a^3)  -R(l,m,mb,n)/3")
    for xv in (0.3, 0.9, 1.4, 2.1, 2.8):
        pt = {"t": 0.5, "x": xv, "y": 0.0, "z": 0.0}
        gi = np.linalg.inv(sol.metric.numeric(pt))
        C = _array(b.weyl, pt)
        cc = float(np.sum(np.einsum("ai,bj,ck,dl,ijkl->abcd", gi, gi, gi, gi, C) * C))
        p2 = _num(psi2, pt)
        R = _array(b.riemann, pt)
        vec = lambda v: np.array([_num(e, pt) for e in v])  # noqa: E731
        mm = vec(tet.m_re) + 1j * vec(tet.m_im)
        r_lmmn = np.einsum("abcd,a,b,c,d->", R, vec(tet.l), mm, np.conj(mm), vec(tet.n)).real
        print(
            f"{xv:4.1f}  {_num(sol.a, pt):6.3f}  {48 * p2**2:11.6f}  {cc:11.6f}  {_num(b.kretschmann, pt) - 8 / 3:11.6f}"
            f"  {p2:10.6f}  {_num(forms['computed'], pt):10.6f}  {_num(forms['lambda_ninth'], pt):12.6f}  {-r_lmmn / 3:12.6f}"
        )
    print()
    print("48 Psi2^2 = C.C = K - 8 Lambda^2/3 in every row, so |Psi2| = m/(2 a^3).")
    print("The -Lambda/9 + m/(6 a^3) column coincides with -R(l, m, mbar, n)/3 of the full Riemann tensor.")


if __name__ == "__main__":
    main()
