"""Stacked sparse-autoencoder image classifier.

Two sigmoid autoencoders are pretrained greedily, their encoders are
stacked under a softmax head, and the whole stack is fine-tuned with
backpropagation.  See the README for the CLI walkthrough.
"""

from .autoencoder import (
    AutoencoderParams,
    LayerGradients,
    SparsityConfig,
    ae_gradients,
    ae_loss,
    decode,
    encode,
    finite_diff_gradient,
    sigmoid,
)
from .config import RunConfig, resolve_config
from .data import (
    Dataset,
    PreprocessConfig,
    load_directory,
    load_image,
    split,
    synth_blobs,
)
from .errors import (
    ConfigError,
    DataError,
    ModelFormatError,
    NumericError,
    NutsortError,
    ParameterError,
    ShapeError,
)
from .evaluation import (
    ConfusionCounts,
    Metrics,
    confusion,
    emit_trace_csv,
    metrics,
    visualize_weights,
)
from .gradcheck import run_suite
from .model_io import deserialize, load_model, save_model, serialize
from .network import StackedNetwork, build_network, encode_stack, predict
from .softmax import SoftmaxParams, sm_gradients, sm_loss, softmax
from .training import (
    PhaseSpec,
    TracePoint,
    TrainConfig,
    TrainingTrace,
    fine_tune,
    gd_train,
    pretrain,
    train_autoencoder,
    train_softmax,
)

__version__ = "0.1.0"

__all__ = [
    "AutoencoderParams",
    "LayerGradients",
    "SparsityConfig",
    "ae_gradients",
    "ae_loss",
    "decode",
    "encode",
    "finite_diff_gradient",
    "sigmoid",
    "RunConfig",
    "resolve_config",
    "Dataset",
    "PreprocessConfig",
    "load_directory",
    "load_image",
    "split",
    "synth_blobs",
    "NutsortError",
    "ShapeError",
    "ParameterError",
    "ConfigError",
    "DataError",
    "ModelFormatError",
    "NumericError",
    "ConfusionCounts",
    "Metrics",
    "confusion",
    "metrics",
    "emit_trace_csv",
    "visualize_weights",
    "run_suite",
    "serialize",
    "deserialize",
    "save_model",
    "load_model",
    "StackedNetwork",
    "build_network",
    "encode_stack",
    "predict",
    "SoftmaxParams",
    "softmax",
    "sm_loss",
    "sm_gradients",
    "PhaseSpec",
    "TracePoint",
    "TrainConfig",
    "TrainingTrace",
    "gd_train",
    "pretrain",
    "fine_tune",
    "train_autoencoder",
    "train_softmax",
    "__version__",
]
