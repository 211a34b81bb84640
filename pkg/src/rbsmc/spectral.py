"""Roots of the delayed characteristic equation via a companion linearization.

For ``x(k+1) = A_bar x(k) + A_dbar x(k - tau)`` the stacked state
``(x(k), x(k-1), ..., x(k-tau))`` evolves by the block companion matrix

    F = [[A_bar, 0, ..., 0, A_dbar],
         [I,     0, ...,        0],
         ...
         [0, ..., I,            0]]

and ``det(zI - F) = det(z^(tau+1) I - z^tau A_bar - A_dbar)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import as_matrix, det, eigenvalues

STABILITY_MARGIN = 1e-9


@dataclass(frozen=True, eq=False)
class CompanionForm:
    f: np.ndarray
    n: int
    tau: int
    a_bar: np.ndarray
    a_dbar: np.ndarray


def build_companion(a_bar, a_dbar, tau: int) -> CompanionForm:
    a = as_matrix(a_bar, "a_bar")
    ad = as_matrix(a_dbar, "a_dbar")
    n = a.shape[0]
    if a.shape != (n, n) or ad.shape != (n, n):
        raise DimensionMismatch(f"a_bar and a_dbar must both be {n}x{n}")
    if isinstance(tau, bool) or int(tau) != tau or tau < 1:
        raise ValueError("tau must be a positive integer")
    tau = int(tau)
    size = n * (tau + 1)
    dtype = np.result_type(a, ad)
    f = np.zeros((size, size), dtype=dtype)
    f[:n, :n] = a
    f[:n, n * tau:] = ad
    f[n:, :n * tau] = np.eye(n * tau)
    return CompanionForm(f, n, tau, a, ad)


def delayed_spectrum(form: CompanionForm) -> np.ndarray:
    """All ``n (tau + 1)`` roots of the delayed characteristic polynomial."""
    return eigenvalues(form.f)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    max_modulus: float


def is_schur_stable(form: CompanionForm, roots=None) -> StabilityReport:
    if roots is None:
        roots = delayed_spectrum(form)
    mod = float(np.max(np.abs(roots)))
    return StabilityReport(mod < 1.0 - STABILITY_MARGIN, mod)


def char_poly_matrix(form: CompanionForm, z) -> np.ndarray:
    z = complex(z)
    n = form.n
    return (z ** (form.tau + 1)) * np.eye(n) - (z ** form.tau) * form.a_bar - form.a_dbar


def char_poly_residual(form: CompanionForm, z) -> float:
    """``|det(z^(tau+1) I - z^tau A_bar - A_dbar)|`` by LU."""
    return abs(det(char_poly_matrix(form, z)))


def spectrum_report(form: CompanionForm) -> dict:
    roots = delayed_spectrum(form)
    stab = is_schur_stable(form, roots)
    order = np.argsort(-np.abs(roots), kind="stable")
    return {
        "n": form.n,
        "tau": form.tau,
        "roots": [{"re": float(roots[i].real), "im": float(roots[i].imag),
                   "modulus": float(abs(roots[i]))} for i in order],
        "max_modulus": stab.max_modulus,
        "stable": stab.stable,
    }
