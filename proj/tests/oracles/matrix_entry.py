# Reference values of single observation-matrix entries at 50 digits.
# Run: python3 tests/oracles/matrix_entry.py
import mpmath as mp

mp.mp.dps = 50
C = mp.mpf(299792458)


def entry(tx, rx, vox, f_hz):
    k = 2 * mp.pi * mp.mpf(f_hz) / C
    dt = mp.sqrt(sum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(tx, vox)))
    dr = mp.sqrt(sum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(rx, vox)))
    return mp.exp(-1j * k * (dt + dr)) / (4 * mp.pi * dt * dr)


cases = [
    ((0.15, 0, 0), (0, 0.15, 0), (0, 0, 0.5), 4e9),
    ((-0.15, 0, 0), (0, -0.15, 0), (0.0125, -0.025, 0.45), 16e9),
    ((0.0, 0, 0), (0, 0.1, 0), (-0.1, 0.1, 0.35), 10e9),
]
for tx, rx, vox, f in cases:
    v = entry(tx, rx, vox, f)
    print(tx, rx, vox, f, mp.nstr(v.real, 20), mp.nstr(v.imag, 20))
