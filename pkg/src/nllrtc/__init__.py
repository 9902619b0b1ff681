"""Non-local low-rank tensor completion for multitemporal remote sensing images."""
from .cloud import (DegradationSpec, DetectConfig, detect_clouds, knn_refine, threshold_scan,
                    simulate_degradation, threshold_detect)
from .exceptions import (CongruenceError, DegenerateGroupError, DetectionUndefinedError,
                         EmptyObservationError, FormatError, InvalidModeError, NLLRTCError,
                         NumericError, ShapeError, UncompletedRegionError)
from .metrics import (QualityReport, avg_gradient, metric_q, psnr, quality_report,
                      scatter_data, ssim)
from .pipeline import PipelineConfig, PipelineReport, halrtc_inpaint, inpaint
from .rearrange import ImageStack, WorkingTensor, rearrange_forward, rearrange_inverse
from .similarity import PatchGroup, PatchRef, SearchConfig, group_patches, ncc, search_similar
from .solver import (SolverConfig, SolverTrace, admm_complete, halrtc_complete,
                     logdet_weights, weighted_svt)
from .tensor import count_fibers, fold, mode_ranks, numerical_rank, unfold

__version__ = "0.1.0"
