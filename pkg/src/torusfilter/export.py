"""CSV and PGM writers. Floats use ``%.17g`` so reruns are byte-identical."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .spectral import SpectralField, to_grid

__all__ = [
    "write_pgm",
    "read_pgm",
    "write_coefficients",
    "write_state",
    "write_observations",
    "write_curve",
    "write_chain",
    "write_rows",
]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def write_pgm(path, values: np.ndarray | SpectralField) -> Path:
    """8-bit binary PGM (P5), min-max scaled.

    Columns run along x1 and rows along x2 with x2 increasing upwards. A constant
    field maps to all zeros.
    """
    grid = to_grid(values) if isinstance(values, SpectralField) else np.asarray(values, dtype=float)
    if grid.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {grid.shape}")
    lo, hi = float(grid.min()), float(grid.max())
    span = hi - lo
    scaled = np.zeros(grid.shape) if span == 0 else (grid - lo) / span * 255.0
    img = np.flipud(np.rint(scaled).astype(np.uint8).T)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = img.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    """Inverse of the layout used by :func:`write_pgm` (values stay 0..255)."""
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    img = np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)
    return np.flipud(img).T.copy()


def write_coefficients(path, field: SpectralField) -> Path:
    lat = field.lattice
    rows = (
        (int(a), int(b), c.real, c.imag)
        for a, b, c in zip(lat.k1.ravel(), lat.k2.ravel(), field.coeff.ravel())
    )
    return write_rows(path, ["k1", "k2", "re", "im"], rows)


def write_state(path, mean: SpectralField, variance: np.ndarray) -> Path:
    lat = mean.lattice
    rows = (
        (int(a), int(b), v, c.real, c.imag)
        for a, b, v, c in zip(lat.k1.ravel(), lat.k2.ravel(), np.ravel(variance), mean.coeff.ravel())
    )
    return write_rows(path, ["k1", "k2", "variance_n", "mean_re", "mean_im"], rows)


def write_observations(path, observations) -> Path:
    def rows():
        for l, y in enumerate(observations, start=1):
            lat = y.lattice
            for a, b, c in zip(lat.k1.ravel(), lat.k2.ravel(), y.coeff.ravel()):
                yield l, int(a), int(b), c.real, c.imag

    return write_rows(path, ["l", "k1", "k2", "re", "im"], rows())


def write_curve(path, fit) -> Path:
    """Curve rows followed by one ``# fit`` summary line."""
    path = write_rows(
        path,
        ["n", "error_mean", "error_stderr"],
        zip(fit.checkpoints, fit.errors, fit.stderr),
    )
    with path.open("a") as fh:
        fh.write(f"# fit slope={_fmt(fit.slope)} intercept={_fmt(fit.intercept)} r2={_fmt(fit.r2)}\n")
    return path


def write_chain(path, c_samples, phi, accepted) -> Path:
    c = np.asarray(c_samples, dtype=float)
    rows = ((i, c[i, 0], c[i, 1], phi[i], bool(accepted[i])) for i in range(len(c)))
    return write_rows(path, ["iter", "c1", "c2", "phi", "accepted"], rows)
