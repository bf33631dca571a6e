"""Riemannian geometry of alpha and the covariant derivative suite of beta.

Everything here is evaluated at a single point x from order-2 jets of a_ij and
b_i. Tensor index conventions:

- ``da[k, i, j] = d_k a_ij`` (derivative index first)
- ``christoffel[i, j, k] = Gamma^i_jk``
- ``riemann[i, j, k, l] = R^i_jkl`` and ``ricci[j, l] = R^i_jil``
- ``cov_b[i, j] = b_{i;j}`` and ``cov2_b[i, j, k] = b_{i;j;k}``

Indices are raised and lowered with a_ij. The 0 subscript used elsewhere means
contraction with y.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import jets
from .const import JetBudget
from .exceptions import NotPositiveDefinite, NotStronglyConvex
from .jets import Jet, derivative_arrays
from .metric import MetricSpec

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RiemannEval:
    x: np.ndarray
    a: np.ndarray
    a_inv: np.ndarray
    da: np.ndarray
    dda: np.ndarray
    christoffel: np.ndarray
    dchristoffel: np.ndarray  # [m, i, j, k] = d_m Gamma^i_jk
    riemann: np.ndarray
    ricci: np.ndarray
    sqrt_det: float

    def alpha(self, y: np.ndarray) -> float:
        return float(np.sqrt(y @ self.a @ y))


@dataclass(frozen=True)
class BetaEval:
    """The r/s/q/t/rho tensor suite of beta at one point."""

    b: np.ndarray  # b_i
    b_up: np.ndarray  # b^i
    norm: float  # alpha-norm of beta
    db: np.ndarray  # [k, i] = d_k b_i
    cov_b: np.ndarray
    cov2_b: np.ndarray
    r: np.ndarray  # r_ij
    s: np.ndarray  # s_ij
    s_up: np.ndarray  # s^i_j
    r_vec: np.ndarray  # r_j = b^i r_ij
    s_vec: np.ndarray  # s_j = b^i s_ij
    r_scalar: float  # r = b^i b^j r_ij
    q: np.ndarray  # q_ij = r_im s^m_j
    t: np.ndarray  # t_ij = s_im s^m_j
    q_vec: np.ndarray
    t_vec: np.ndarray
    t_trace: float  # t^m_m
    rho: float  # ln sqrt(1 - b^2)
    rho_grad: np.ndarray  # rho_i
    rho_hessian: np.ndarray  # rho_{i;j}
    s_covariant: np.ndarray  # [i, j, k] = s_{ij;k}
    divergence_s: np.ndarray  # s^m_{j;m}


def _christoffel(a_inv: np.ndarray, da: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Gamma_ljk = 1/2 (d_j a_lk + d_k a_lj - d_l a_jk)
    lower = 0.5 * (
        np.einsum("jlk->ljk", da) + np.einsum("klj->ljk", da) - da
    )
    return np.einsum("il,ljk->ijk", a_inv, lower), lower


def _evaluate(
    spec: MetricSpec, x: Sequence[float]
) -> tuple[RiemannEval, list[list[Jet]], list[Jet]]:
    n = spec.dimension
    x = np.asarray(x, dtype=float)
    a_jets, b_jets = spec.coefficient_jets(x, JetBudget.RIEMANN_ORDER)

    values, gradients, hessians = derivative_arrays(
        [a_jets[i][j] for i in range(n) for j in range(n)]
    )
    a = values.reshape(n, n)
    # [i, j, k] -> [k, i, j]
    da = np.moveaxis(gradients.reshape(n, n, n), 2, 0)
    dda = np.moveaxis(hessians.reshape(n, n, n, n), (2, 3), (0, 1))

    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"a_ij is not positive definite at x={x.tolist()}")

    a_inv = np.linalg.inv(a)
    christoffel, lower = _christoffel(a_inv, da)

    # d_m a^il = -a^ip d_m a_pq a^ql
    da_inv = -np.einsum("ip,mpq,ql->mil", a_inv, da, a_inv)
    dlower = 0.5 * (
        np.einsum("mjlk->mljk", dda) + np.einsum("mklj->mljk", dda) - dda
    )
    dchristoffel = np.einsum("mil,ljk->mijk", da_inv, lower) + np.einsum(
        "il,mljk->mijk", a_inv, dlower
    )

    riemann = (
        np.einsum("kijl->ijkl", dchristoffel)
        - np.einsum("lijk->ijkl", dchristoffel)
        + np.einsum("ikm,mjl->ijkl", christoffel, christoffel)
        - np.einsum("ilm,mjk->ijkl", christoffel, christoffel)
    )
    ricci = np.einsum("ijil->jl", riemann)

    result = RiemannEval(
        x=x,
        a=a,
        a_inv=a_inv,
        da=da,
        dda=dda,
        christoffel=christoffel,
        dchristoffel=dchristoffel,
        riemann=riemann,
        ricci=ricci,
        sqrt_det=float(np.sqrt(np.linalg.det(a))),
    )
    return result, a_jets, b_jets


def riemann_eval(spec: MetricSpec, x: Sequence[float]) -> RiemannEval:
    result, _, _ = _evaluate(spec, x)
    return result


def christoffel(spec: MetricSpec, x: Sequence[float]) -> np.ndarray:
    """Gamma^i_jk of a at x, indexed [i, j, k]."""
    return riemann_eval(spec, x).christoffel


def alpha_ricci(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> float:
    """Ricci curvature of alpha contracted twice with y."""
    y = np.asarray(y, dtype=float)
    return float(y @ riemann_eval(spec, x).ricci @ y)


def _beta_suite(
    point: RiemannEval, a_jets: list[list[Jet]], b_jets: list[Jet]
) -> BetaEval:
    b, grad_b, hess_b = derivative_arrays(b_jets)
    db = grad_b.T  # [k, i] = d_k b_i
    ddb = np.moveaxis(hess_b, 0, 2)  # [k, l, i]
    gamma, dgamma, a_inv = point.christoffel, point.dchristoffel, point.a_inv

    b_up = a_inv @ b
    norm_sq = float(b @ b_up)
    if norm_sq >= 1:
        raise NotStronglyConvex(
            f"b = {np.sqrt(norm_sq)!r} >= 1 at x={point.x.tolist()}", float(np.sqrt(norm_sq))
        )

    # b_{i;j} = d_j b_i - Gamma^m_ij b_m
    cov_b = db.T - np.einsum("mij,m->ij", gamma, b)
    # d_k b_{i;j}
    dcov = (
        np.einsum("kji->ijk", ddb)
        - np.einsum("kmij,m->ijk", dgamma, b)
        - np.einsum("mij,km->ijk", gamma, db)
    )
    cov2_b = (
        dcov
        - np.einsum("mik,mj->ijk", gamma, cov_b)
        - np.einsum("mjk,im->ijk", gamma, cov_b)
    )

    r = 0.5 * (cov_b + cov_b.T)
    s = 0.5 * (cov_b - cov_b.T)
    s_up = a_inv @ s
    q = r @ s_up
    t = s @ s_up

    # rho = ln sqrt(1 - b^2) carried as a jet for its first and second derivatives
    rho_jet = 0.5 * jets.ln(1.0 - jets.inverse_quadratic_form(a_jets, b_jets))
    rho_values, rho_grads, rho_hessians = derivative_arrays([rho_jet])
    rho_grad, rho_dd = rho_grads[0], rho_hessians[0]
    rho_hessian = rho_dd - np.einsum("mij,m->ij", gamma, rho_grad)

    s_covariant = 0.5 * (cov2_b - np.einsum("jik->ijk", cov2_b))
    divergence_s = np.einsum("mi,ijm->j", a_inv, s_covariant)

    return BetaEval(
        b=b,
        b_up=b_up,
        norm=float(np.sqrt(norm_sq)),
        db=db,
        cov_b=cov_b,
        cov2_b=cov2_b,
        r=r,
        s=s,
        s_up=s_up,
        r_vec=b_up @ r,
        s_vec=b_up @ s,
        r_scalar=float(b_up @ r @ b_up),
        q=q,
        t=t,
        q_vec=b_up @ q,
        t_vec=b_up @ t,
        t_trace=float(np.einsum("ij,ij->", a_inv, t)),
        rho=float(rho_values[0]),
        rho_grad=rho_grad,
        rho_hessian=rho_hessian,
        s_covariant=s_covariant,
        divergence_s=divergence_s,
    )


def evaluate_point(spec: MetricSpec, x: Sequence[float]) -> tuple[RiemannEval, BetaEval]:
    """Riemannian data of alpha and the beta suite at x from one set of jets."""
    point, a_jets, b_jets = _evaluate(spec, x)
    return point, _beta_suite(point, a_jets, b_jets)


def beta_suite(spec: MetricSpec, x: Sequence[float]) -> BetaEval:
    _, suite = evaluate_point(spec, x)
    return suite


def covariant_divergence_s(spec: MetricSpec, x: Sequence[float]) -> np.ndarray:
    """The covector s^m_{j;m}."""
    return beta_suite(spec, x).divergence_s


def rho_hessian(spec: MetricSpec, x: Sequence[float]) -> np.ndarray:
    """rho_{i;j}, symmetric."""
    return beta_suite(spec, x).rho_hessian
