from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import torch
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from PIL import Image

from ... import Context
from ...util.utility import ValidationError

__all__ = ['Magnitude', 'ErrorMap', 'quantize', 'export_png',
           'write_comparison']


@dataclass(frozen=True)
class Magnitude:
    """Min-max normalized gray levels."""


@dataclass(frozen=True)
class ErrorMap:
    """|image - reference| * scale clipped to [0, 1]."""
    scale: float = 1.0


def _as_array(img) -> np.ndarray:
    if isinstance(img, torch.Tensor):
        img = Context.convert_to_ndarray(img)
    array = np.abs(np.asarray(img)) if np.iscomplexobj(img) \
        else np.asarray(img, dtype=np.float64)
    if array.ndim != 2:
        raise ValidationError(f"images are 2D, got shape {array.shape}")
    if not np.isfinite(array).all():
        raise ValidationError("image contains non-finite values")
    return array.astype(np.float64)


def quantize(img, mode: Union[Magnitude, ErrorMap] = Magnitude(),
             reference=None) -> np.ndarray:
    """Gray levels 0..255 exactly as export_png stores them."""
    array = _as_array(img)
    if isinstance(mode, ErrorMap):
        if reference is not None:
            ref = _as_array(reference)
            if ref.shape != array.shape:
                raise ValidationError(f"shapes differ: {array.shape} vs "
                                      f"{ref.shape}")
            array = array - ref
        scaled = np.clip(np.abs(array) * mode.scale, 0.0, 1.0)
    else:
        lo, hi = array.min(), array.max()
        if hi == lo:
            return np.full(array.shape, 128, dtype=np.uint8)
        scaled = (array - lo) / (hi - lo)
    return np.rint(scaled * 255).astype(np.uint8)


def export_png(img, path, mode: Union[Magnitude, ErrorMap] = Magnitude(),
               reference=None):
    """Single-channel 8-bit PNG of the quantized gray levels."""
    Image.fromarray(quantize(img, mode, reference)).save(Path(path))


def write_comparison(filename, panels: Dict[str, object],
                     title: Optional[str] = None):
    """Side-by-side gray panels (e.g. truth, zero-filled, recon, error).

    Draws on a standalone Figure, so it may run from worker threads.
    """
    fig = Figure(figsize=(3 * len(panels), 3.4))
    FigureCanvasAgg(fig)
    axes = fig.subplots(1, len(panels), squeeze=False)
    for ax, (name, img) in zip(axes[0], panels.items()):
        ax.imshow(_as_array(img), cmap='gray')
        ax.set_title(name)
        ax.get_xaxis().set_visible(False)
        ax.get_yaxis().set_visible(False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(filename)
