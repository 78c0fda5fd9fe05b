"""Synthetic noise plus the two mitigation passes used by the experiments.

Noise is intentionally crude: a per-CNOT two-qubit depolarizing channel,
realized in sampling as stochastic Pauli insertion (trajectory method, no
density matrices), and independent asymmetric per-qubit readout flips. The
defaults below are arbitrary benchmark rates, not calibrated to any device.
Mitigation is (a) readout correction through an empirically calibrated
confusion matrix and (b) CNOT folding with quadratic extrapolation to the
zero-noise limit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate
from .simulator import (
    MAX_UNITARY_QUBITS,
    GoodStateFlags,
    NumericalError,
    _apply_gate,
)

_LOWERED_KINDS = ("H", "X", "Y", "Z", "RY", "RZ", "CX")
_COND_LIMIT = 1e8


@dataclass(frozen=True)
class NoiseModel:
    cnot_error: float = 0.01  # probability of a random two-qubit Pauli after each CNOT
    flip_0_to_1: float = 0.02  # readout P(read 1 | qubit is 0)
    flip_1_to_0: float = 0.04  # readout P(read 0 | qubit is 1)

    def __post_init__(self):
        for name in ("cnot_error", "flip_0_to_1", "flip_1_to_0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5], got {v}")


@dataclass(frozen=True)
class ReadoutCalibration:
    confusion: np.ndarray  # (2^n, 2^n), entry (m, s) = P(measure m | prepared s)

    def __post_init__(self):
        c = np.asarray(self.confusion, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] & (c.shape[0] - 1):
            raise ValueError("confusion matrix must be square with power-of-two size")
        if np.any(c < -1e-12) or np.any(c > 1 + 1e-12):
            raise ValueError("confusion entries must lie in [0, 1]")
        if np.max(np.abs(c.sum(axis=0) - 1.0)) > 1e-9:
            raise ValueError("confusion columns must sum to 1")
        object.__setattr__(self, "confusion", c)

    @property
    def num_qubits(self) -> int:
        return self.confusion.shape[0].bit_length() - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        for row in self.confusion:
            buf.write(",".join(format(v, ".15g") for v in row) + "\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "ReadoutCalibration":
        rows = [[float(v) for v in line.split(",")] for line in text.strip().splitlines()]
        return ReadoutCalibration(np.array(rows))


@dataclass(frozen=True)
class FoldedRun:
    fold_factors: tuple[int, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.fold_factors) != 3 or len(self.probabilities) != 3:
            raise ValueError("quadratic extrapolation needs exactly three folded points")
        if any(f % 2 == 0 or f < 1 for f in self.fold_factors):
            raise ValueError("fold factors must be odd positive integers")
        if len(set(self.fold_factors)) != 3:
            raise ValueError("fold factors must be distinct")


def fold_cnots(c: Circuit, factor: int) -> Circuit:
    """Replace every CNOT by `factor` copies; noiseless behaviour is unchanged."""
    if factor % 2 == 0 or factor < 1:
        raise ValueError(f"fold factor must be odd and positive, got {factor}")
    gates: list[Gate] = []
    for g in c.gates:
        gates.extend([g] * factor if g.kind == "CX" else [g])
    return Circuit(c.num_qubits, tuple(gates))


def richardson_zero_noise(points, clip: bool = True) -> float:
    """Value at c=0 of the unique quadratic through three (c, p) points."""
    pts = list(points)
    if len(pts) != 3:
        raise ValueError("exactly three points are required")
    cs = [float(c) for c, _ in pts]
    if len(set(cs)) != 3:
        raise ValueError("fold factors must be distinct")
    total = 0.0
    for i, (ci, pi) in enumerate(pts):
        w = 1.0
        for j, (cj, _) in enumerate(pts):
            if j != i:
                w *= (0.0 - cj) / (ci - cj)
        total += w * float(pi)
    if clip:
        total = min(1.0, max(0.0, total))
    return total


def readout_confusion_exact(n: int, noise: NoiseModel) -> np.ndarray:
    """Closed-form confusion matrix for independent per-qubit flips."""
    single = np.array(
        [[1.0 - noise.flip_0_to_1, noise.flip_1_to_0],
         [noise.flip_0_to_1, 1.0 - noise.flip_1_to_0]]
    )
    m = np.array([[1.0]])
    for _ in range(n):
        m = np.kron(single, m)  # qubit 0 is the least significant index bit
    return m


def calibrate_readout(n: int, noise: NoiseModel, shots: int, seed: int) -> ReadoutCalibration:
    """Prepare each basis state with X gates, read it out under the flip model."""
    if n > 6:
        raise ValueError("calibration is limited to 6 qubits (2^n preparation circuits)")
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    dim = 1 << n
    weights = 1 << np.arange(n)
    confusion = np.zeros((dim, dim))
    for s in range(dim):
        bits = (s >> np.arange(n)) & 1
        flip_p = np.where(bits == 0, noise.flip_0_to_1, noise.flip_1_to_0)
        flips = rng.random((shots, n)) < flip_p
        measured = ((bits ^ flips) * weights).sum(axis=1)
        confusion[:, s] = np.bincount(measured, minlength=dim) / shots
    return ReadoutCalibration(confusion)


def correct_readout(measured: np.ndarray, cal: ReadoutCalibration) -> np.ndarray:
    """Invert the confusion matrix onto the probability simplex."""
    c = cal.confusion
    v = np.asarray(measured, dtype=float)
    if v.shape != (c.shape[0],):
        raise ValueError("distribution length does not match the calibration")
    cond = np.linalg.cond(c)
    if cond > _COND_LIMIT:
        raise NumericalError(f"readout calibration is ill-conditioned (cond = {cond:.3e})")
    raw = np.linalg.solve(c, v)
    if raw.min() < -1e-10:
        from scipy.optimize import minimize

        start = np.clip(raw, 0.0, None)
        start /= start.sum() if start.sum() > 0 else 1.0
        res = minimize(
            lambda p: float(np.sum((c @ p - v) ** 2)),
            start,
            jac=lambda p: 2.0 * (c.T @ (c @ p - v)),
            method="SLSQP",
            bounds=[(0.0, 1.0)] * len(v),
            constraints={"type": "eq", "fun": lambda p: p.sum() - 1.0},
        )
        raw = res.x
    out = np.clip(raw, 0.0, None)
    s = out.sum()
    if s <= 0:
        raise NumericalError("readout correction produced an empty distribution")
    return out / s


_PAULI_KINDS = (None, "X", "Y", "Z")


class _NoisyRunner:
    """Pattern-grouped trajectory sampler for one lowered circuit.

    States and cumulative unitaries are cached at every CNOT so a shot with
    errors at CNOTs j1 < j2 < ... costs a handful of small mat-vecs instead
    of a full re-simulation; shots sharing an error pattern are simulated
    once and drawn from a single multinomial.
    """

    def __init__(self, c: Circuit, noise: NoiseModel):
        for g in c.gates:
            if g.kind not in _LOWERED_KINDS:
                raise ValueError(f"noisy sampling expects a lowered circuit, found {g.kind}")
        if c.num_qubits > MAX_UNITARY_QUBITS:
            raise ValueError("noisy sampling caches unitaries; circuit is too wide")
        self.n = c.num_qubits
        self.noise = noise
        self.confusion = readout_confusion_exact(self.n, noise)
        dim = 1 << self.n
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        u = np.eye(dim, dtype=complex)
        self.cx_qubits: list[tuple[int, int]] = []
        self.states: list[np.ndarray] = []
        self.prefix: list[np.ndarray] = []
        for g in c.gates:
            _apply_gate(psi, g, self.n)
            _apply_gate(u, g, self.n)
            if g.kind == "CX":
                self.cx_qubits.append((g.controls[0], g.targets[0]))
                self.states.append(psi.copy())
                self.prefix.append(u.copy())
        self.final_state = psi
        self.final_u = u
        self.clean_dist = self.confusion @ np.abs(psi) ** 2

    def _pattern_dist(self, pattern) -> np.ndarray:
        j0, p0 = pattern[0]
        v = self.states[j0].copy()
        self._insert_pauli(v, j0, p0)
        prev = j0
        for j, p in pattern[1:]:
            v = self.prefix[j] @ (self.prefix[prev].conj().T @ v)
            self._insert_pauli(v, j, p)
            prev = j
        v = self.final_u @ (self.prefix[prev].conj().T @ v)
        return self.confusion @ np.abs(v) ** 2

    def _insert_pauli(self, v: np.ndarray, j: int, pauli: int) -> None:
        qa, qb = self.cx_qubits[j]
        ka, kb = _PAULI_KINDS[pauli >> 2], _PAULI_KINDS[pauli & 3]
        if ka is not None:
            _apply_gate(v, Gate(ka, (qa,)), self.n)
        if kb is not None:
            _apply_gate(v, Gate(kb, (qb,)), self.n)

    def sample(self, shots: int, rng: np.random.Generator) -> np.ndarray:
        dim = 1 << self.n
        counts = np.zeros(dim, dtype=np.int64)
        m = len(self.cx_qubits)
        if m == 0 or self.noise.cnot_error == 0.0:
            return rng.multinomial(shots, self.clean_dist)
        n_err = rng.binomial(m, self.noise.cnot_error, size=shots)
        clean = int(np.sum(n_err == 0))
        if clean:
            counts += rng.multinomial(clean, self.clean_dist)
        singles = int(np.sum(n_err == 1))
        if singles:
            pos = rng.integers(0, m, size=singles)
            pauli = rng.integers(1, 16, size=singles)
            keys, reps = np.unique(pos * 15 + pauli - 1, return_counts=True)
            for key, rep in zip(keys, reps):
                j, p = divmod(int(key), 15)
                counts += rng.multinomial(int(rep), self._pattern_dist(((j, p + 1),)))
        groups: dict[tuple, int] = {}
        for e in np.nonzero(n_err >= 2)[0]:
            pos = np.sort(rng.choice(m, size=int(n_err[e]), replace=False))
            pauli = rng.integers(1, 16, size=int(n_err[e]))
            key = tuple(zip(pos.tolist(), pauli.tolist()))
            groups[key] = groups.get(key, 0) + 1
        for pattern, rep in groups.items():
            counts += rng.multinomial(rep, self._pattern_dist(pattern))
        return counts


def sample_noisy(c: Circuit, shots: int, noise: NoiseModel, seed: int) -> np.ndarray:
    """Measured basis-state counts under CNOT depolarizing + readout flips."""
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    return _NoisyRunner(c, noise).sample(shots, rng)


def good_fraction(counts: np.ndarray, flags: GoodStateFlags) -> float:
    mask = 0
    for q in flags:
        mask |= 1 << q
    idx = np.arange(len(counts))
    total = counts.sum()
    return float(counts[(idx & mask) == mask].sum() / total)


@dataclass(frozen=True)
class MitigationResult:
    raw: float  # unfolded, uncorrected good fraction
    folded: FoldedRun  # readout-corrected good fractions per fold factor
    mitigated: float  # zero-noise extrapolation of the folded points
    calibration_shots: int
    shots: int
    seed: int | np.random.SeedSequence


def mitigated_good_probability(
    c: Circuit,
    flags: GoodStateFlags,
    noise: NoiseModel,
    shots: int,
    seed: int | np.random.SeedSequence,
    fold_factors: tuple[int, ...] = (1, 3, 5),
    calibration_shots: int | None = None,
) -> MitigationResult:
    """Full pipeline: calibrate, fold, sample, correct, extrapolate."""
    cal_shots = shots if calibration_shots is None else calibration_shots
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(len(fold_factors) + 1)
    cal = calibrate_readout(c.num_qubits, noise, cal_shots, children[0])
    raw = None
    corrected: list[float] = []
    for factor, child in zip(fold_factors, children[1:]):
        folded = fold_cnots(c, factor)
        counts = _NoisyRunner(folded, noise).sample(shots, np.random.default_rng(child))
        if factor == 1:
            raw = good_fraction(counts, flags)
        dist = correct_readout(counts / counts.sum(), cal)
        corrected.append(good_fraction(dist, flags))
    if raw is None:
        raise ValueError("fold factors must include 1 for the raw baseline")
    run = FoldedRun(tuple(fold_factors), tuple(corrected))
    return MitigationResult(
        raw=raw,
        folded=run,
        mitigated=richardson_zero_noise(zip(run.fold_factors, run.probabilities)),
        calibration_shots=cal_shots,
        shots=shots,
        seed=seed,
    )
