# SSIM reference on an LCG-generated image pair, computed with scikit-image.
# The same generator lives in test_metrics.cpp.
# Run: python3 tests/oracles/ssim_golden.py
import numpy as np
from skimage.metrics import structural_similarity

M64 = (1 << 64) - 1


def lcg(seed, count):
    s = seed
    out = []
    for _ in range(count):
        s = (s * 6364136223846793005 + 1442695040888963407) & M64
        out.append((s >> 11) / float(1 << 53))
    return np.array(out)


nx, ny = 25, 31
a = lcg(1, nx * ny).reshape(nx, ny)
b = np.clip(a + 0.2 * (lcg(2, nx * ny).reshape(nx, ny) - 0.5), 0, 1)
v = structural_similarity(a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.0)
print(repr(v))
