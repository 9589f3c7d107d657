"""Accessibility-weighted FAR assignment and construction diagnostics.

FAR is linear in the tier-weighted accessibility score: the slope and
intercept are closed-form so that (a) total built floor area hits the
construction target exactly and (b) the least accessible lot lands near
the anchor FAR. Heights follow from FAR via a uniform footprint ratio and
storey height. By default the line is fitted within each land use against
that use's construction-share target.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .allocator import USES

__all__ = [
    "IntensityConfig",
    "IntensityResult",
    "Lot",
    "weighted_accessibility",
    "fit_far_line",
    "assign_far",
    "construction_diagnostics",
    "compute_intensity",
]

logger = logging.getLogger(__name__)

# Below this, the accessibility spread is treated as degenerate and the
# FAR line collapses to the uniform fallback.
_DEGENERATE_SPREAD = 1e-12


@dataclass
class IntensityConfig:
    b_total: float  # target total built floor area, m^2
    gamma: dict[str, float]  # construction-share targets, sums to 1
    rho: list[float]  # tier weights for the accessibility blend, sums to 1
    f_bar: float = 0.8  # anchor FAR at the least accessible lot
    footprint_ratio: float = 0.5
    storey_height: float = 3.6  # meters per floor
    per_use_fit: bool = True
    footprint_overrides: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.b_total <= 0:
            raise ValueError("b_total must be positive")
        if self.f_bar <= 0:
            raise ValueError("f_bar must be positive")
        if not 0 < self.footprint_ratio <= 1:
            raise ValueError("footprint_ratio must lie in (0, 1]")
        if self.storey_height <= 0:
            raise ValueError("storey_height must be positive")
        if any(v < 0 for v in self.gamma.values()):
            raise ValueError("construction shares must be nonnegative")


@dataclass
class Lot:
    """One FAR-bearing lot: a block, or a use-slice of a split block."""

    block: int
    use: str
    area: float
    access: float  # tier-weighted accessibility of the parent block


@dataclass
class IntensityResult:
    lots: list[Lot]
    far: list[float]
    heights: list[float]
    fitted: dict[str, tuple[float, float]]  # use (or "*") -> (alpha, beta)
    b_hat: dict[str, float]
    gamma_hat: dict[str, float]
    d_b: float
    d_cs: float


def weighted_accessibility(tensor: np.ndarray, rho: list[float]) -> np.ndarray:
    """Blend the per-tier accessibility columns with the rho weights."""
    rho_arr = np.asarray(rho, dtype=float)
    if rho_arr.size != tensor.shape[1]:
        raise ValueError("rho dimension must equal tier count")
    if rho_arr.min() < 0:
        raise ValueError("rho weights must be nonnegative")
    total = rho_arr.sum()
    if total <= 0:
        raise ValueError("rho weights must not all be zero")
    if not math.isclose(total, 1.0, rel_tol=1e-9):
        logger.warning("rho sums to %.6f; renormalizing", total)
        rho_arr = rho_arr / total
    return tensor @ rho_arr


def fit_far_line(areas: np.ndarray, access: np.ndarray, b_total: float,
                 f_bar: float) -> tuple[float, float]:
    """Closed-form slope/intercept for the linear FAR model.

    The slope is clamped at zero (accessibility never lowers FAR); when
    the accessibility spread degenerates the line collapses to the uniform
    FAR implied by the target.
    """
    total_area = float(areas.sum())
    if total_area <= 0:
        raise ValueError("zero total lot area")
    base = b_total / total_area
    mean_access = float((access * areas).sum()) / total_area
    denom = float(access.min()) - mean_access
    if abs(denom) <= _DEGENERATE_SPREAD:
        alpha = 0.0
    else:
        alpha = max((f_bar - base) / denom, 0.0)
    beta = base - mean_access * alpha
    return alpha, beta


def assign_far(areas: np.ndarray, access: np.ndarray, alpha: float, beta: float,
               b_total: float) -> np.ndarray:
    """Evaluate the FAR line, flooring negatives and restoring the target.

    Negative values can only appear when beta < 0 after clamping; they are
    floored to zero and the remaining FARs rescaled proportionally so the
    built-area total is preserved.
    """
    far = alpha * access + beta
    if (far < 0).any():
        logger.warning("negative FAR floored on %d lots; rescaling", int((far < 0).sum()))
        far = np.maximum(far, 0.0)
        built = float((far * areas).sum())
        if built > 0:
            far = far * (b_total / built)
    return far


def heights_from_far(far: np.ndarray, footprint_ratio: float,
                     storey_height: float) -> np.ndarray:
    if footprint_ratio <= 0:
        raise ValueError("footprint_ratio must be positive")
    return far / footprint_ratio * storey_height


def construction_diagnostics(lots: list[Lot], far: list[float],
                             gamma: dict[str, float],
                             b_total: float) -> tuple[dict, dict, float, float]:
    """Per-use built areas, achieved shares, and squared deviations."""
    b_hat = {u: 0.0 for u in USES}
    for lot, f in zip(lots, far):
        b_hat[lot.use] += f * lot.area
    built = sum(b_hat.values())
    if built <= 0:
        raise ValueError("zero total built area; construction shares undefined")
    gamma_hat = {u: b_hat[u] / built for u in USES}
    d_b = (b_total - built) ** 2
    d_cs = sum((gamma_hat[u] - gamma.get(u, 0.0)) ** 2 for u in USES)
    return b_hat, gamma_hat, d_b, d_cs


def compute_intensity(lots: list[Lot], config: IntensityConfig) -> IntensityResult:
    """Assign FAR and heights to every lot, then report diagnostics.

    Per-use fit (default): each use's lots get their own line against
    B_u = gamma_u * b_total. Joint fit: one line over all lots against
    b_total. Uses with a positive share but no lots leave their target
    unbuilt, which surfaces in D_B.
    """
    config.validate()
    if not lots:
        raise ValueError("no lots to assign")
    far = np.zeros(len(lots))
    fitted: dict[str, tuple[float, float]] = {}
    if config.per_use_fit:
        by_use: dict[str, list[int]] = {}
        for i, lot in enumerate(lots):
            by_use.setdefault(lot.use, []).append(i)
        for use, idx in sorted(by_use.items()):
            areas = np.array([lots[i].area for i in idx])
            access = np.array([lots[i].access for i in idx])
            b_u = config.gamma.get(use, 0.0) * config.b_total
            if b_u <= 0:
                fitted[use] = (0.0, 0.0)
                continue
            alpha, beta = fit_far_line(areas, access, b_u, config.f_bar)
            fitted[use] = (alpha, beta)
            far[idx] = assign_far(areas, access, alpha, beta, b_u)
    else:
        areas = np.array([lot.area for lot in lots])
        access = np.array([lot.access for lot in lots])
        alpha, beta = fit_far_line(areas, access, config.b_total, config.f_bar)
        fitted["*"] = (alpha, beta)
        far[:] = assign_far(areas, access, alpha, beta, config.b_total)

    heights = [
        f / config.footprint_overrides.get(lot.use, config.footprint_ratio)
        * config.storey_height
        for lot, f in zip(lots, far)
    ]
    b_hat, gamma_hat, d_b, d_cs = construction_diagnostics(
        lots, list(far), config.gamma, config.b_total)
    return IntensityResult(lots=lots, far=[float(f) for f in far],
                           heights=[float(h) for h in heights], fitted=fitted,
                           b_hat=b_hat, gamma_hat=gamma_hat, d_b=d_b, d_cs=d_cs)
