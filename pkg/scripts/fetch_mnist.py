"""Write an IDX copy of the 5000-digit MNIST subset bundled with mlxtend.

Usage: python scripts/fetch_mnist.py [outdir]   (default: data/)

Any genuine MNIST IDX file works in its place; point [data] path or
$LAYERNTK_MNIST at it.
"""
import os
import sys

import numpy as np
from mlxtend.data import mnist_data

from layerntk.experiments.mnist import write_idx


def main(outdir="data"):
    X, y = mnist_data()
    os.makedirs(outdir, exist_ok=True)
    images = os.path.join(outdir, "train-images-idx3-ubyte.gz")
    labels = os.path.join(outdir, "train-labels-idx1-ubyte.gz")
    write_idx(images, np.asarray(X, dtype=np.uint8).reshape(-1, 28, 28))
    write_idx(labels, np.asarray(y, dtype=np.uint8))
    print(images)
    print(labels)


if __name__ == "__main__":
    main(*sys.argv[1:])
