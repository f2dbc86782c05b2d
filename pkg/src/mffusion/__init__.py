"""Multi-focus image fusion toolkit.

Layered defocus simulation, synthetic training-pair generation,
guidance-map fusion with boundary refinement, training losses with
analytic gradients, and no-reference fusion-quality metrics.
"""

from .datasetgen import (
    AssetCatalog,
    FusionPair,
    GenConfig,
    generate_dataset,
    generate_pair,
    predicted_pair_count,
)
from .defocus import (
    BoundaryLineScene,
    Layer,
    Scene,
    compose_two_surface,
    make_fig7_scene,
    render_all_in_focus,
    render_alpha_matte,
    render_one_param,
    render_two_param,
)
from .fusion import CorrectionSource, boundary_map, final_fusion, initial_fusion
from .guidance import estimate_guidance, load_guidance, make_guidance, validate_guidance
from .image import (
    gaussian_blur,
    gaussian_kernel,
    load_png,
    resize_bilinear,
    save_png,
    to_grayscale,
)
from .losses import LossBreakdown, LossConfig, loss_ini, loss_matte, loss_total, loss_weighted, weight_map
from .metrics import MetricsReport, compute_metrics, evaluate_batch, metric_ag, metric_gld, metric_lif, metric_msd

__version__ = "0.1.0"
