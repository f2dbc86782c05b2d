"""No-reference fusion-quality metrics: AG, LIF, MSD, GLD.

All four operate on grayscale images; RGB inputs are reduced by unweighted
channel mean. The batch harness produces per-image values, per-method
means, and per-metric win counts when several methods are compared on the
same image ids.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .image import ensure_image, to_grayscale

METRIC_NAMES = ("AG", "LIF", "MSD", "GLD")
# LIF: smaller is better; the rest: larger is better.
HIGHER_IS_BETTER = {"AG": True, "LIF": False, "MSD": True, "GLD": True}


def _as_gray(img):
    arr = ensure_image(img)
    return to_grayscale(arr)


def metric_lif(img, i_max=None):
    """Linear index of fuzziness; returns (value, warned_all_zero).

    i_max defaults to the image maximum; pass an explicit reference
    intensity to evaluate the formula against a fixed scale instead.
    """
    gray = _as_gray(img)
    if i_max is None:
        i_max = gray.max()
    if i_max <= 0:
        return 0.0, True
    p = np.sin((math.pi / 2.0) * (1.0 - gray / i_max))
    m, n = gray.shape
    value = (2.0 / (m * n)) * np.minimum(p, 1.0 - p).sum()
    return float(value), False


def metric_ag(img):
    """Average gradient from forward differences over the interior grid."""
    gray = _as_gray(img)
    m, n = gray.shape
    if m < 2 or n < 2:
        raise ValueError(f"image too small for AG: {gray.shape}")
    dm = gray[1:, :-1] - gray[:-1, :-1]
    dn = gray[:-1, 1:] - gray[:-1, :-1]
    mag = 0.25 * np.sqrt(dm * dm + dn * dn)
    return float(mag.sum() / ((m - 1) * (n - 1)))


def metric_msd(img):
    """Root of summed squared deviation from the mean, per interior pixel."""
    gray = _as_gray(img)
    m, n = gray.shape
    if m < 2 or n < 2:
        raise ValueError(f"image too small for MSD: {gray.shape}")
    if gray.max() == gray.min():
        return 0.0  # zero deviation by definition; avoids mean round-off
    mean = gray.mean()
    dev = gray[: m - 1, : n - 1] - mean
    return float(np.sqrt((dev * dev).sum()) / ((m - 1) * (n - 1)))


def metric_gld(img):
    """Gray-level difference: mean L1 forward-difference magnitude."""
    gray = _as_gray(img)
    m, n = gray.shape
    if m < 2 or n < 2:
        raise ValueError(f"image too small for GLD: {gray.shape}")
    dm = np.abs(gray[: m - 1, : n - 1] - gray[1:m, : n - 1])
    dn = np.abs(gray[: m - 1, : n - 1] - gray[: m - 1, 1:n])
    return float((dm + dn).sum() / ((m - 1) * (n - 1)))


def compute_metrics(img):
    """All four metrics for one image; includes the LIF all-zero warning."""
    lif, warned = metric_lif(img)
    return {
        "AG": metric_ag(img),
        "LIF": lif,
        "MSD": metric_msd(img),
        "GLD": metric_gld(img),
        "lif_all_zero": warned,
    }


@dataclass
class MetricsReport:
    per_image: dict = field(default_factory=dict)  # method -> [(id, metrics)]
    aggregate: dict = field(default_factory=dict)  # method -> {metric: mean}
    wins: dict = field(default_factory=dict)  # method -> {metric: count}
    errors: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.errors

    def to_dict(self):
        return {
            "per_image": {
                m: [{"id": i, **vals} for i, vals in rows]
                for m, rows in self.per_image.items()
            },
            "aggregate": self.aggregate,
            "wins": self.wins,
            "errors": self.errors,
        }

    def to_json(self, **kwargs):
        kwargs.setdefault("indent", 2)
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs) + "\n"

    def format_table(self):
        lines = []
        methods = list(self.aggregate)
        header = "metric  " + "".join(f"{m:>18}" for m in methods)
        lines.append(header)
        for name in METRIC_NAMES:
            row = f"{name:<8}"
            for m in methods:
                mean = self.aggregate[m].get(name, float("nan"))
                win = self.wins.get(m, {}).get(name)
                cell = f"{mean:.6f}"
                if win is not None and len(methods) > 1:
                    cell += f" ({win})"
                row += f"{cell:>18}"
            lines.append(row)
        if self.errors:
            lines.append(f"errors: {len(self.errors)}")
        return "\n".join(lines)


def evaluate_batch(inputs):
    """Evaluate {method_label: [(image_id, image_or_loader)]} inputs.

    An entry's second element may be an image array or a zero-argument
    callable returning one (so decode errors can be recorded and skipped).
    Win counts are computed per metric over image ids present for every
    method; a method wins an image when it strictly beats all others in
    the metric's preferred direction.
    """
    report = MetricsReport()
    for method, entries in inputs.items():
        rows = []
        for image_id, item in entries:
            try:
                img = item() if callable(item) else item
                rows.append((image_id, compute_metrics(img)))
            except (OSError, ValueError) as exc:
                report.errors.append(
                    {"method": method, "id": image_id, "error": str(exc)}
                )
        report.per_image[method] = rows
        if rows:
            report.aggregate[method] = {
                name: float(np.mean([vals[name] for _, vals in rows]))
                for name in METRIC_NAMES
            }
        else:
            report.aggregate[method] = {}

    methods = list(report.per_image)
    report.wins = {m: {name: 0 for name in METRIC_NAMES} for m in methods}
    if len(methods) > 1:
        by_id = {
            m: {i: vals for i, vals in report.per_image[m]} for m in methods
        }
        common = set.intersection(*(set(d) for d in by_id.values()))
        for image_id in sorted(common):
            for name in METRIC_NAMES:
                values = {m: by_id[m][image_id][name] for m in methods}
                for m in methods:
                    others = [v for mm, v in values.items() if mm != m]
                    if HIGHER_IS_BETTER[name]:
                        beat = all(values[m] > v for v in others)
                    else:
                        beat = all(values[m] < v for v in others)
                    if beat:
                        report.wins[m][name] += 1
    return report
