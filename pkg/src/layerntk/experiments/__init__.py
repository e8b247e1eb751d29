from .concentration import ConcentrationReport, ZonalTarget, decrement_ratio_mc
from .config import ExperimentConfig
from .mnist import load_mnist, read_idx, write_idx
from .sweep import contribution_sweep, summarize
from .training import TrainingTrace, train_layerwise
