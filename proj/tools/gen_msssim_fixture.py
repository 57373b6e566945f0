# Copyright 2026 The pdtd Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Reference MS-SSIM values for the committed fixture images.

Float64 NumPy implementation of the canonical 5-scale MS-SSIM (Wang et al.,
window 11 / sigma 1.5 / valid statistics / weights 0.0448...). When
TensorFlow is importable the values are cross-checked against
tf.image.ssim_multiscale (which runs in float32, hence the loose tolerance).

Usage: python3 tools/gen_msssim_fixture.py [tests/data]
"""

import json
import os
import sys

import numpy as np

WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
WINDOW = 11
SIGMA = 1.5
K1, K2 = 0.01, 0.03


def read_ppm(path):
    with open(path, "rb") as f:
        assert f.readline().strip() == b"P6"
        dims = f.readline().split()
        w, h = int(dims[0]), int(dims[1])
        assert f.readline().strip() == b"255"
        data = np.frombuffer(f.read(w * h * 3), dtype=np.uint8)
    return data.reshape(h, w, 3).astype(np.float64) / 255.0


def gaussian_window():
    d = np.arange(WINDOW) - (WINDOW - 1) / 2.0
    g = np.exp(-(d ** 2) / (2.0 * SIGMA ** 2))
    return g / g.sum()


def conv_valid(plane, win):
    # separable: rows then columns
    out = np.zeros((plane.shape[0], plane.shape[1] - WINDOW + 1))
    for k in range(WINDOW):
        out += win[k] * plane[:, k:k + out.shape[1]]
    out2 = np.zeros((plane.shape[0] - WINDOW + 1, out.shape[1]))
    for k in range(WINDOW):
        out2 += win[k] * out[k:k + out2.shape[0], :]
    return out2


def ssim_terms(a, b, win):
    c1, c2 = K1 ** 2, K2 ** 2
    mu1, mu2 = conv_valid(a, win), conv_valid(b, win)
    s11 = conv_valid(a * a, win) - mu1 * mu1
    s22 = conv_valid(b * b, win) - mu2 * mu2
    s12 = conv_valid(a * b, win) - mu1 * mu2
    lum = (2 * mu1 * mu2 + c1) / (mu1 ** 2 + mu2 ** 2 + c1)
    cs = (2 * s12 + c2) / (s11 + s22 + c2)
    return lum.mean(), cs.mean()


def downsample(p):
    h, w = p.shape
    if h % 2:
        p = np.concatenate([p, p[-1:, :]], axis=0)
    if w % 2:
        p = np.concatenate([p, p[:, -1:]], axis=1)
    return 0.25 * (p[0::2, 0::2] + p[0::2, 1::2] + p[1::2, 0::2] + p[1::2, 1::2])


def ms_ssim(img1, img2):
    win = gaussian_window()
    scores = []
    for c in range(3):
        a, b = img1[:, :, c], img2[:, :, c]
        score = 1.0
        for scale in range(5):
            if scale > 0:
                a, b = downsample(a), downsample(b)
            lum, cs = ssim_terms(a, b, win)
            if scale < 4:
                score *= max(cs, 0.0) ** WEIGHTS[scale]
            else:
                score *= max(lum * cs, 0.0) ** WEIGHTS[scale]
        scores.append(score)
    return float(np.mean(scores))


def main():
    data_dir = sys.argv[1] if len(sys.argv) > 1 else "tests/data"
    imgs = {k: read_ppm(os.path.join(data_dir, f"msssim_{k}.ppm"))
            for k in "abc"}
    values = {
        "a_b": ms_ssim(imgs["a"], imgs["b"]),
        "a_c": ms_ssim(imgs["a"], imgs["c"]),
        "b_c": ms_ssim(imgs["b"], imgs["c"]),
    }

    try:
        import tensorflow as tf  # cross-check only

        for key, val in values.items():
            x, y = key.split("_")
            tf_val = float(tf.image.ssim_multiscale(
                tf.constant(imgs[x][None]), tf.constant(imgs[y][None]),
                max_val=1.0)[0])
            diff = abs(tf_val - val)
            print(f"{key}: ref={val:.9f} tf={tf_val:.9f} diff={diff:.2e}")
            assert diff < 5e-4, f"disagrees with tf.image.ssim_multiscale: {key}"
    except ImportError:
        print("tensorflow unavailable; skipping cross-check")

    out = os.path.join(data_dir, "msssim_golden.json")
    with open(out, "w") as f:
        json.dump(values, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"wrote {out}: {values}")


if __name__ == "__main__":
    main()
