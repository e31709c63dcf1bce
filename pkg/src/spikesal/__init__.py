"""Bottom-up saliency from a spiking model of primate V1, V4 and MT."""

from .config import PipelineConfig, load_config
from .pipeline import SaliencyResult, compute_saliency

__all__ = ["PipelineConfig", "SaliencyResult", "compute_saliency", "load_config"]
__version__ = "0.1.0"
