"""Sample encoder plugin for tests."""

import numpy as np

from edgewatch.appearance import Encoder


class MeanColorEncoder(Encoder):
    name = "mean-color"

    def encode_patch(self, patch):
        means = patch.reshape(-1, patch.shape[2])[:, :3].mean(axis=0) + 1.0
        return np.resize(means, 128)


ENCODERS = {
    "mean-color": MeanColorEncoder,
}
