#!/usr/bin/env python3
"""Reference forward pass for the MLP regression fixture.

Builds the layer stack [affine 6->5, batchnorm, relu, affine 5->4] with
formula-defined weights, runs two fingerprint-like rows through it in
inference mode, and writes the expected outputs to data/mlp_golden.tsv.
The C++ test constructs the identical network and compares.
"""
import math
import os

import numpy as np

IN, HID, OUT = 6, 5, 4
EPS = 1e-5


def affine_w(out_d, in_d, layer):
    return np.array([[math.sin(0.7 * o + 0.3 * i + layer) / 3.0 for i in range(in_d)]
                     for o in range(out_d)])


def affine_b(out_d, layer):
    return np.array([math.cos(1.3 * o + layer) / 5.0 for o in range(out_d)])


def main():
    w1, b1 = affine_w(HID, IN, 0), affine_b(HID, 0)
    gamma = np.array([1.0 + 0.05 * i for i in range(HID)])
    beta = np.array([0.1 * i - 0.2 for i in range(HID)])
    rmean = np.array([0.05 * i - 0.1 for i in range(HID)])
    rvar = np.array([1.0 + 0.02 * i for i in range(HID)])
    w2, b2 = affine_w(OUT, HID, 3), affine_b(OUT, 3)

    x = np.array([[1.0 if (i + 2 * r) % 3 == 0 else 0.0 for i in range(IN)] for r in range(2)])

    h = x @ w1.T + b1
    h = (h - rmean) / np.sqrt(rvar + EPS) * gamma + beta
    h = np.maximum(h, 0.0)
    y = h @ w2.T + b2

    out = os.path.join(os.path.dirname(__file__), "..", "data", "mlp_golden.tsv")
    with open(out, "w") as f:
        for r in range(y.shape[0]):
            f.write("\t".join("%.17g" % v for v in y[r]) + "\n")
    print("wrote", out)
    print(y)


if __name__ == "__main__":
    main()
