"""IDX (MNIST) reader and writer."""
import gzip
import struct

import numpy as np

from ..errors import IDXFormatError

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


def _open(path, mode):
    return gzip.open(path, mode) if str(path).endswith(".gz") else open(path, mode)


def read_idx(path):
    """Return the uint8 array stored in an IDX file (images or labels)."""
    with _open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise IDXFormatError(f"{path}: truncated header")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic == IMAGE_MAGIC:
        ndim = 3
    elif magic == LABEL_MAGIC:
        ndim = 1
    else:
        raise IDXFormatError(f"{path}: bad magic number {magic}")
    head = 4 + 4 * ndim
    if len(raw) < head:
        raise IDXFormatError(f"{path}: truncated header")
    dims = struct.unpack(f">{ndim}I", raw[4:head])
    size = int(np.prod(dims))
    if len(raw) - head < size:
        raise IDXFormatError(f"{path}: truncated payload ({len(raw) - head} of {size} bytes)")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=head).reshape(dims)


def write_idx(path, array):
    array = np.ascontiguousarray(array, dtype=np.uint8)
    if array.ndim == 3:
        magic = IMAGE_MAGIC
    elif array.ndim == 1:
        magic = LABEL_MAGIC
    else:
        raise ValueError("IDX images are 3-d, labels 1-d")
    with _open(path, "wb") as fh:
        fh.write(struct.pack(f">I{array.ndim}I", magic, *array.shape))
        fh.write(array.tobytes())


def subsample_indices(total, n_subsample, seed):
    if n_subsample > total:
        raise ValueError(f"requested {n_subsample} images but only {total} available")
    return np.sort(np.random.default_rng(seed).choice(total, n_subsample, replace=False))


def load_mnist(path, n_subsample=1000, seed=0, pixel_scale=255.0):
    """Seeded subsample of flattened images with pixels divided by ``pixel_scale``."""
    images = read_idx(path)
    if images.ndim != 3:
        raise IDXFormatError(f"{path}: not an image file")
    idx = subsample_indices(images.shape[0], n_subsample, seed)
    return images[idx].reshape(len(idx), -1).astype(np.float64) / pixel_scale
