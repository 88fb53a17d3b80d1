"""McCormick relaxation of bilinear products of affinely-enclosed factors.

Given two quantities A (shape (J, P)) and B (shape (P, K)), each bracketed by
affine bounds in a shared reference variable y plus interval bounds over the
region, this module produces affine bounds on the matrix product A @ B. The
classic McCormick inequalities for each scalar product are blended with a
convex-combination weight eta, the frozen interval coefficients are
sign-split against the affine bounds of the other factor, and the result is
summed over the contracted index.
"""

from __future__ import annotations

import numpy as np

from .affine import AffineEnclosure, IntervalMatrix, pos_neg_split


def mccormick_product(
    a_enc: AffineEnclosure,
    a_iv: IntervalMatrix,
    b_enc: AffineEnclosure,
    b_iv: IntervalMatrix,
    eta: float,
) -> AffineEnclosure:
    """Affine bounds on ``sum_p A[j, p] * B[p, k]`` in the shared variable.

    ``a_enc``/``b_enc`` must have index shapes ``(J, P)`` and ``(P, K)`` with
    a common ``var_dim``; the interval bounds must be valid over the same
    region that validates the enclosures. ``eta`` in [0, 1] weights the pair
    of McCormick inequalities (eta = 1 keeps only the lower-corner pair,
    eta = 0 only the upper-corner pair); any fixed eta is sound.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if len(a_enc.shape) != 2 or len(b_enc.shape) != 2:
        raise ValueError("mccormick_product expects matrix-shaped enclosures")
    if a_enc.shape[1] != b_enc.shape[0]:
        raise ValueError(
            f"contracted dimensions differ: {a_enc.shape} vs {b_enc.shape}"
        )
    if a_enc.var_dim != b_enc.var_dim:
        raise ValueError("factors must share the reference variable")

    ca = eta * a_iv.lo + (1.0 - eta) * a_iv.hi          # (J, P)
    cb_low = eta * b_iv.lo + (1.0 - eta) * b_iv.hi      # (P, K)
    cb_up = eta * b_iv.hi + (1.0 - eta) * b_iv.lo
    cap, can = pos_neg_split(ca)
    cblp, cbln = pos_neg_split(cb_low)
    cbup, cbun = pos_neg_split(cb_up)

    lower_coeffs = (
        np.einsum("jp,pkm->jkm", cap, b_enc.lower_coeffs)
        + np.einsum("jp,pkm->jkm", can, b_enc.upper_coeffs)
        + np.einsum("jpm,pk->jkm", a_enc.lower_coeffs, cblp)
        + np.einsum("jpm,pk->jkm", a_enc.upper_coeffs, cbln)
    )
    lower_offset = (
        np.einsum("jp,pk->jk", cap, b_enc.lower_offset)
        + np.einsum("jp,pk->jk", can, b_enc.upper_offset)
        + np.einsum("jp,pk->jk", a_enc.lower_offset, cblp)
        + np.einsum("jp,pk->jk", a_enc.upper_offset, cbln)
        - eta * np.einsum("jp,pk->jk", a_iv.lo, b_iv.lo)
        - (1.0 - eta) * np.einsum("jp,pk->jk", a_iv.hi, b_iv.hi)
    )
    upper_coeffs = (
        np.einsum("jp,pkm->jkm", cap, b_enc.upper_coeffs)
        + np.einsum("jp,pkm->jkm", can, b_enc.lower_coeffs)
        + np.einsum("jpm,pk->jkm", a_enc.upper_coeffs, cbup)
        + np.einsum("jpm,pk->jkm", a_enc.lower_coeffs, cbun)
    )
    upper_offset = (
        np.einsum("jp,pk->jk", cap, b_enc.upper_offset)
        + np.einsum("jp,pk->jk", can, b_enc.lower_offset)
        + np.einsum("jp,pk->jk", a_enc.upper_offset, cbup)
        + np.einsum("jp,pk->jk", a_enc.lower_offset, cbun)
        - eta * np.einsum("jp,pk->jk", a_iv.lo, b_iv.hi)
        - (1.0 - eta) * np.einsum("jp,pk->jk", a_iv.hi, b_iv.lo)
    )
    return AffineEnclosure(lower_coeffs, lower_offset, upper_coeffs, upper_offset,
                           a_enc.region_id or b_enc.region_id)
