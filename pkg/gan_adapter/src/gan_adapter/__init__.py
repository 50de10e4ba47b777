"""Style-based generator adapter: projection and synthesis over line-JSON."""

__version__ = "0.1.0"

from .generator import StyleGenerator, load_checkpoint, save_checkpoint
from .projector import multi_scale_loss, project_latent, w_mean
from .server import AdapterConfig, build_generator, main, serve

__all__ = [
    "__version__",
    "StyleGenerator",
    "load_checkpoint",
    "save_checkpoint",
    "multi_scale_loss",
    "project_latent",
    "w_mean",
    "AdapterConfig",
    "build_generator",
    "main",
    "serve",
]
