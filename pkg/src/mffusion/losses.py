"""Training losses with analytic gradients.

Three components: L1 on the predicted matte, L2 on the initial fusion, and
a boundary-weighted L2 on the final fusion whose per-pixel weight peaks at
1 on the focused/defocused band and falls to 1/k far from it. Gradients
are returned as images and are validated against central finite
differences in the test suite. Reductions are plain sequential numpy sums,
so values are bit-reproducible.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .image import broadcast_mask, ensure_image, same_shape


@dataclass(frozen=True)
class LossConfig:
    lambda1: float = 0.2
    lambda2: float = 0.2
    k: float = 5.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambdas must be >= 0")


@dataclass
class LossBreakdown:
    matte: float
    ini: float
    weighted: float
    total: float
    grad_matte: Optional[np.ndarray] = None
    grad_fusion_ini: Optional[np.ndarray] = None
    grad_fusion_fin: Optional[np.ndarray] = None


def loss_matte(matte_pred, matte_gt):
    """Mean absolute difference; subgradient 0 at zero residual."""
    pred = ensure_image(matte_pred, "matte_pred")
    gt = ensure_image(matte_gt, "matte_gt")
    if pred.ndim != 2 or gt.ndim != 2:
        raise ValueError("mattes must be single channel")
    same_shape(pred, gt, "matte_pred", "matte_gt")
    diff = pred - gt
    value = float(np.abs(diff).mean())
    grad = np.sign(diff) / diff.size
    return value, grad


def loss_ini(fusion_pred, fusion_gt):
    """Mean squared difference."""
    pred = ensure_image(fusion_pred, "fusion_pred")
    gt = ensure_image(fusion_gt, "fusion_gt")
    same_shape(pred, gt, "fusion_pred", "fusion_gt")
    if pred.shape != gt.shape:
        raise ValueError("fusion images must share channel count")
    diff = pred - gt
    value = float((diff * diff).mean())
    grad = 2.0 * diff / diff.size
    return value, grad


def weight_map(matte, k):
    """W = (1 + (k-1)*(1 - |2*matte - 1|)) / k; 1 at 0.5, 1/k at 0 or 1."""
    m = ensure_image(matte, "matte")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m.min() < 0 or m.max() > 1:
        raise ValueError("matte values must lie in [0, 1]")
    return (1.0 + (k - 1.0) * (1.0 - np.abs(2.0 * m - 1.0))) / k


def weight_map_grad(matte, k):
    """d W / d matte, with subgradient 0 at the matte = 0.5 kink."""
    m = ensure_image(matte, "matte")
    return -2.0 * (k - 1.0) / k * np.sign(2.0 * m - 1.0)


def loss_weighted(fusion_pred, fusion_gt, weights):
    """Mean of the per-pixel weighted squared error.

    weights is single channel and broadcasts over color channels; the mean
    runs over all pixels and channels.
    """
    pred = ensure_image(fusion_pred, "fusion_pred")
    gt = ensure_image(fusion_gt, "fusion_gt")
    w = ensure_image(weights, "weights")
    same_shape(pred, gt, "fusion_pred", "fusion_gt")
    same_shape(pred, w, "fusion_pred", "weights")
    if w.ndim != 2:
        raise ValueError("weights must be single channel")
    diff = pred - gt
    wb = broadcast_mask(w, diff)
    value = float((wb * diff * diff).mean())
    grad = 2.0 * wb * diff / diff.size
    return value, grad


def loss_total(
    matte_pred,
    matte_gt,
    fusion_ini_pred,
    fusion_fin_pred,
    fusion_gt,
    cfg: LossConfig = LossConfig(),
    weight_from_gt_matte=False,
):
    """Combined loss with gradients w.r.t. the three predicted images.

    The weight map is built from the predicted matte (the default), so the
    matte gradient includes the weight path; weight_from_gt_matte switches
    to the ground-truth matte for ablation, removing that path.
    """
    l_matte, g_matte = loss_matte(matte_pred, matte_gt)
    l_ini, g_ini = loss_ini(fusion_ini_pred, fusion_gt)
    w_source = matte_gt if weight_from_gt_matte else matte_pred
    w = weight_map(w_source, cfg.k)
    l_w, g_fin = loss_weighted(fusion_fin_pred, fusion_gt, w)
    total = cfg.lambda1 * l_matte + cfg.lambda2 * l_ini + l_w

    grad_matte = cfg.lambda1 * g_matte
    if not weight_from_gt_matte:
        diff = ensure_image(fusion_fin_pred) - ensure_image(fusion_gt)
        sq = diff * diff
        if sq.ndim == 3:
            sq = sq.sum(axis=2)
        grad_matte = grad_matte + sq / diff.size * weight_map_grad(
            matte_pred, cfg.k
        )
    return LossBreakdown(
        matte=l_matte,
        ini=l_ini,
        weighted=l_w,
        total=total,
        grad_matte=grad_matte,
        grad_fusion_ini=cfg.lambda2 * g_ini,
        grad_fusion_fin=g_fin,
    )
