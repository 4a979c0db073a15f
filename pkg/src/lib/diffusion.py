"""Diffusion weights m(x) and the per-observation score-matching summaries"""

from typing import Tuple

import numpy as np

from lib.exp_family import POSITIVE, NaturalExpFamilyModel
from models.diffusion_spec import ROBUST, ROBUST_BOUNDARY, DiffusionMatrixSpec, LossSummary
from models.suff_stat_derivatives import SuffStatDerivatives


def _weights(
    spec: DiffusionMatrixSpec, model: NaturalExpFamilyModel, x: np.ndarray, deriv: SuffStatDerivatives
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (m_ii^2, d(m_ii^2)/dx_i) for every data coordinate."""
    d = model.data_dim
    if not spec.is_anchored:
        return np.ones(d), np.zeros(d)

    # u_i = (grad r(x) theta*)_i and its derivative along x_i
    u = deriv.jacobian @ spec.anchor
    du = deriv.second_diag @ spec.anchor
    denom = 1.0 + u ** 2
    m2 = 1.0 / denom
    dm2 = -2.0 * u * du / denom ** 2

    if spec.kind == ROBUST_BOUNDARY:
        for i, tag in enumerate(model.coordinate_supports):
            if tag != POSITIVE:
                continue
            xi = x[i]
            core = 1.0 + xi ** 2 * u[i] ** 2
            m2[i] = xi ** 2 / core
            dm2[i] = (2.0 * xi - 2.0 * xi ** 4 * u[i] * du[i]) / core ** 2
    return m2, dm2


def m_diag(spec: DiffusionMatrixSpec, model: NaturalExpFamilyModel, x) -> np.ndarray:
    """Diagonal of m(x); all ones for the identity weight"""
    x = model.check_support(x)
    m2, _ = _weights(spec, model, x, model._derivatives(x))
    return np.sqrt(m2)


def loss_summary(spec: DiffusionMatrixSpec, model: NaturalExpFamilyModel, x) -> LossSummary:
    """Lambda(x) = grad r^T diag(m^2) grad r and the divergence-expanded nu(x).

    nu_j = sum_i m_ii^2 dr_j/dx_i db/dx_i + sum_i d/dx_i [m_ii^2 dr_j/dx_i]
    """
    x = model.check_support(x)
    deriv = model._derivatives(x)
    m2, dm2 = _weights(spec, model, x, deriv)
    jac = deriv.jacobian
    factor = np.sqrt(m2)[:, None] * jac
    lam = factor.T @ factor
    nu = jac.T @ (m2 * deriv.base_grad) + jac.T @ dm2 + deriv.second_diag.T @ m2
    return LossSummary(lambda_matrix=0.5 * (lam + lam.T), nu=nu, factor=factor)


def pointwise_loss(spec: DiffusionMatrixSpec, model: NaturalExpFamilyModel, theta, x) -> float:
    """theta-dependent part of d_m(theta, x): theta^T Lambda theta + 2 theta^T nu.

    The theta-free remainder c(x) is dropped; it does not affect the posterior.
    """
    theta = np.asarray(theta, dtype=float)
    summary = loss_summary(spec, model, x)
    return float(theta @ summary.lambda_matrix @ theta + 2.0 * theta @ summary.nu)


def loss_bound(spec: DiffusionMatrixSpec, model: NaturalExpFamilyModel, theta) -> float:
    """gamma(theta) bounding |d_m(theta, x)| over x for the robust weight.

    With q = ||theta||^2 / ||theta*||^2 the squared-score part is at most
    d p q and the divergence part at most d C (1 + 2 d q), where C bounds
    |diag(grad^2 r) theta| and |diag(grad^2 r) theta*|. The loss counts the
    divergence part twice. Needs grad b = 0 and grad^2 r constant in x.
    """
    if spec.kind != ROBUST:
        raise ValueError(f"loss_bound applies to the '{ROBUST}' weight, got '{spec.kind}'")
    theta = np.asarray(theta, dtype=float)
    points = [model.check_support(np.full(model.data_dim, v)) for v in (0.5, 1.0, 4.0)]
    derivs = [model._derivatives(x) for x in points]
    if any(np.any(dv.base_grad != 0.0) for dv in derivs):
        raise ValueError(f"{model.name}: loss_bound needs a base measure with zero gradient")
    if any(not np.array_equal(dv.second_diag, derivs[0].second_diag) for dv in derivs[1:]):
        raise ValueError(f"{model.name}: loss_bound needs second derivatives of r constant in x")

    second = derivs[0].second_diag
    d, p = model.data_dim, model.param_dim
    curvature = float(max(np.abs(second @ theta).max(), np.abs(second @ spec.anchor).max()))
    ratio = float(theta @ theta) / float(spec.anchor @ spec.anchor)
    squared_score = d * p * ratio
    divergence = d * curvature * (1.0 + 2.0 * d * ratio)
    return squared_score + 2.0 * divergence
