"""Low-bit quantizer arithmetic: clip/scale/round activation and weight
quantizers, the straight-through gradient mask, the integer-reordering
identity for quantized matmuls, and back-of-envelope memory / energy /
throughput estimators.

With b bits there are l = 2**b representable levels. Activations quantize on
[0, alpha_a] with step alpha_a / (l - 1); weights map through [-1, 1] onto
symmetric levels in [-alpha_w, alpha_w] with step 2 * alpha_w / (l - 1).
Rounding breaks ties away from zero so that level assignment is bit-exact
and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import IntegerOverflowError, ValidationError


@dataclass(frozen=True)
class QuantSpec:
    bits: int
    alpha_a: float = 1.0
    alpha_w: float = 1.0

    def __post_init__(self):
        if self.bits < 1 or self.bits > 32:
            raise ValidationError(f"bits must be in 1..32, got {self.bits}")
        for name, a in (("alpha_a", self.alpha_a), ("alpha_w", self.alpha_w)):
            if not (np.isfinite(a) and a > 0.0):
                raise ValidationError(f"{name} must be a positive finite real, got {a}")

    @property
    def levels(self) -> int:
        return 2**self.bits


# Per-operation energy in picojoules for a 45nm process.
ENERGY_PJ: Mapping[str, float] = {
    "32-bit Fixed-point ADD": 0.1,
    "32-bit floating-point ADD": 0.9,
    "32-bit Fixed-point MULT": 3.1,
    "32-bit floating-point MULT": 3.7,
    "32-bit 32KB SRAM": 5.0,
    "32-bit DRAM": 640.0,
}

# Ops per cycle per SM on a Turing-class GPU, by input precision.
OPS_PER_CYCLE: Mapping[int, int] = {16: 1024, 8: 2048, 4: 4096, 1: 16384}


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Nearest-integer rounding with halves going away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quant_act(x, spec: QuantSpec) -> tuple[np.ndarray, np.ndarray]:
    """Activation quantizer.

    Clips to [0, alpha_a], maps linearly to integer levels 0..l-1, and scales
    back. Returns (q, z) where q = z * alpha_a / (l - 1).
    """
    x = np.asarray(x, dtype=float)
    l = spec.levels
    y = np.minimum(np.maximum(x, 0.0), spec.alpha_a)
    z = round_half_away(y / spec.alpha_a * (l - 1)).astype(np.int64)
    # (z / (l-1)) * alpha keeps the top level exactly at alpha.
    q = z / (l - 1) * spec.alpha_a
    return q, z


def quant_weight(x, spec: QuantSpec) -> tuple[np.ndarray, np.ndarray]:
    """Weight quantizer with the symmetric shift onto [0, l-1].

    z = round((clip(x / alpha_w, -1, 1) + 1) / 2 * (l - 1)) and
    q = (2z - (l - 1)) * alpha_w / (l - 1), so q lies in [-alpha_w, alpha_w];
    for 1-bit the two levels are exactly -alpha_w and +alpha_w.
    """
    x = np.asarray(x, dtype=float)
    l = spec.levels
    ratio = np.minimum(np.maximum(x / spec.alpha_w, -1.0), 1.0)
    z = round_half_away((ratio + 1.0) / 2.0 * (l - 1)).astype(np.int64)
    q = (2 * z - (l - 1)) / (l - 1) * spec.alpha_w
    return q, z


def ste_grad_act(x, spec: QuantSpec):
    """Straight-through gradient of quant_act: the round step passes gradient
    1, so the mask is 1 inside the clip range and 0 outside. The clip
    boundaries themselves count as inside."""
    arr = np.asarray(x, dtype=float)
    grad = ((arr >= 0.0) & (arr <= spec.alpha_a)).astype(float)
    return float(grad) if np.isscalar(x) else grad


def int_matmul_check(xa, xw, spec: QuantSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """Quantized matmul computed two ways: through the dequantized floats and
    entirely in integer levels with one final rescale.

    int path: (Za @ (2 Zw - (l-1))) * alpha_a * alpha_w / (l-1)^2. The two
    results agree to 64-bit accumulation tolerance; the integer accumulation
    is checked against the int64 range before running.
    Returns (float_path, int_path, max_abs_diff).
    """
    xa = np.asarray(xa, dtype=float)
    xw = np.asarray(xw, dtype=float)
    if xa.ndim != 2 or xw.ndim != 2 or xa.shape[1] != xw.shape[0]:
        raise ValidationError(f"inner dimensions do not match: {xa.shape} @ {xw.shape}")
    l = spec.levels
    k = xa.shape[1]
    if k * l * l >= 2**62:
        raise IntegerOverflowError(
            f"accumulator bound {k} * {l}^2 would overflow 64-bit integers"
        )
    qa, za = quant_act(xa, spec)
    qw, zw = quant_weight(xw, spec)
    float_path = qa @ qw
    int_acc = za @ (2 * zw - (l - 1))
    int_path = int_acc * (spec.alpha_a * spec.alpha_w / (l - 1) ** 2)
    return float_path, int_path, float(np.abs(float_path - int_path).max())


def memory_saving(bits: int) -> float:
    """Storage ratio of 32-bit tensors to b-bit tensors: 32 / b."""
    if not (1 <= bits <= 32):
        raise ValidationError(f"bits must be in 1..32, got {bits}")
    return 32.0 / bits


def energy_estimate(op_counts: Mapping[str, float],
                    table: Mapping[str, float] = ENERGY_PJ) -> float:
    """Total picojoules for the given operation counts."""
    total = 0.0
    for name, count in op_counts.items():
        if name not in table:
            raise ValidationError(f"unknown operation {name!r}; known: {sorted(table)}")
        total += count * table[name]
    return total


def speedup_estimate(bits: int) -> float:
    """Throughput ratio of b-bit integer math to the 16-bit float baseline."""
    if bits not in OPS_PER_CYCLE:
        raise ValidationError(f"bits must be one of {sorted(OPS_PER_CYCLE)}, got {bits}")
    return OPS_PER_CYCLE[bits] / OPS_PER_CYCLE[16]


def load_energy_table(obj) -> dict[str, float]:
    """Validate a JSON override of the embedded per-op energy constants.

    The override must define exactly the same six operations; only the
    picojoule figures may change (e.g. for a different process node)."""
    if not isinstance(obj, dict) or set(obj) != set(ENERGY_PJ):
        raise ValidationError(
            f"energy table must define exactly these operations: {sorted(ENERGY_PJ)}"
        )
    out = {}
    for name, pj in obj.items():
        if not isinstance(pj, (int, float)) or pj < 0 or not np.isfinite(pj):
            raise ValidationError(f"energy for {name!r} must be a non-negative number")
        out[name] = float(pj)
    return out


def progressive_schedule(start_bits: int, end_bits: int) -> list[int]:
    """Halving bit-width schedule from start to end inclusive, e.g. 4 -> 2 -> 1."""
    for name, b in (("start_bits", start_bits), ("end_bits", end_bits)):
        if b < 1 or b & (b - 1) != 0:
            raise ValidationError(f"{name} must be a positive power of two, got {b}")
    if start_bits < end_bits:
        raise ValidationError(f"start_bits {start_bits} below end_bits {end_bits}")
    out = []
    b = start_bits
    while b >= end_bits:
        out.append(b)
        b //= 2
    return out


def discretization_error(x, spec: QuantSpec, weights: bool = False) -> float:
    """Sum of squared quantization errors, the objective a good clip value
    minimizes."""
    x = np.asarray(x, dtype=float)
    q, _ = (quant_weight if weights else quant_act)(x, spec)
    return float(((q - x) ** 2).sum())


def search_alpha(x, bits: int, alphas, weights: bool = False) -> tuple[float, np.ndarray]:
    """Grid-search stand-in for a learned clip value: evaluates the
    discretization error at each candidate and returns (best_alpha, errors)."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or len(alphas) < 1:
        raise ValidationError("alphas must be a non-empty 1-D grid")
    errors = np.empty(len(alphas))
    for i, a in enumerate(alphas):
        spec = QuantSpec(bits, alpha_a=a, alpha_w=a)
        errors[i] = discretization_error(x, spec, weights=weights)
    return float(alphas[int(np.argmin(errors))]), errors
