"""Phenomenological-noise Monte Carlo simulation of state preparation.

Shot schedule: data noise lands once after block initialization, the
projective stabilizer round is measured (deterministic outcomes only for
the pattern's fixed stabilizers, random gauge for the rest, measurement
flips with probability pm), then ``rounds`` noisy repetition rounds (data
noise then flipped measurement each), and a final perfect round for
adjudication.  Detector events are XORs of consecutive outcomes; the first
round compares against the fixed expectation.

With pm = 0 the repetition rounds carry no information for this
experiment's failure statistics and callers run rounds = 0 (the repetition
rounds exist to protect against measurement errors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import CodeLayout, PauliFrame, logical_commutes, syndrome_of
from .prep import InitPattern, PLUS_L


@dataclass(frozen=True)
class NoiseParams:
    """Total data error rate p, bias eta = p_z/(p_x+p_y), measurement rate pm."""

    p: float
    eta: float  # may be math.inf
    pm: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0 or not 0.0 <= self.pm <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if not self.eta > 0:
            raise ValueError("bias must be positive (use math.inf for pure dephasing)")

    @property
    def p_z(self) -> float:
        if np.isinf(self.eta):
            return self.p
        return self.p * self.eta / (1.0 + self.eta)

    @property
    def p_x(self) -> float:
        if np.isinf(self.eta):
            return 0.0
        return self.p / (2.0 * (1.0 + self.eta))

    @property
    def p_y(self) -> float:
        return self.p_x


@dataclass
class DetectorSet:
    """Space-time detection events; round index is 1-based."""

    rounds: int  # total syndrome rounds incl. projective and final perfect
    events: set[tuple[int, int]]  # (stabilizer_id, round_index)
    fixed_mask: np.ndarray  # uint8 per stabilizer


@dataclass
class ShotRecord:
    detector_set: DetectorSet
    true_frame: PauliFrame
    rng_seed: int
    gauge: np.ndarray = field(repr=False)  # round-1 gauge bits (unfixed only)


class InvalidCorrectionError(RuntimeError):
    """The decoder's correction does not reproduce the observed syndrome."""


def sample_data_noise(noise: NoiseParams, layout: CodeLayout, rng: np.random.Generator) -> PauliFrame:
    """One round of independent X/Y/Z errors on every data qubit."""
    u = rng.random(layout.n)
    frame = PauliFrame.identity(layout.n)
    pz, px, py = noise.p_z, noise.p_x, noise.p_y
    is_z = u < pz
    is_x = (u >= pz) & (u < pz + px)
    is_y = (u >= pz + px) & (u < pz + px + py)
    frame.z[is_z] = 1
    frame.x[is_x] = 1
    frame.x[is_y] = 1
    frame.z[is_y] = 1
    return frame


def shot_rng(master_seed: int, shot_index: int) -> np.random.Generator:
    """Counter-derived per-shot generator: identical regardless of batching."""
    return np.random.Generator(np.random.Philox(key=np.uint64(master_seed), counter=[0, 0, 0, np.uint64(shot_index)]))


def run_shot(
    layout: CodeLayout,
    pattern: InitPattern,
    noise: NoiseParams,
    rounds: int,
    seed: int,
) -> ShotRecord:
    """Simulate one preparation shot and collect its detector events.

    ``rounds`` is the number of noisy repetition rounds after the projective
    round; a final perfect round is always appended.
    """
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    n_stab = layout.num_stabilizers
    fixed_mask = np.zeros(n_stab, dtype=np.uint8)
    for sid in pattern.fixed_stabilizers:
        fixed_mask[sid] = 1

    # projection randomness of the unfixed stabilizers
    gauge = (rng.random(n_stab) < 0.5).astype(np.uint8)
    gauge[fixed_mask == 1] = 0

    events: set[tuple[int, int]] = set()
    frame = sample_data_noise(noise, layout, rng)
    syn = syndrome_of(layout, frame)

    def measure(with_flips: bool) -> np.ndarray:
        flips = np.zeros(n_stab, dtype=np.uint8)
        if with_flips and noise.pm > 0:
            flips = (rng.random(n_stab) < noise.pm).astype(np.uint8)
        return (gauge ^ syn ^ flips).astype(np.uint8)

    outcome = measure(with_flips=True)
    total_rounds = rounds + 2
    for sid in np.nonzero((outcome == 1) & (fixed_mask == 1))[0]:
        events.add((int(sid), 1))
    prev = outcome
    for r in range(2, rounds + 2):
        frame = frame.compose(sample_data_noise(noise, layout, rng))
        syn = syndrome_of(layout, frame)
        outcome = measure(with_flips=True)
        for sid in np.nonzero(outcome ^ prev)[0]:
            events.add((int(sid), r))
        prev = outcome
    # final perfect round
    outcome = measure(with_flips=False)
    for sid in np.nonzero(outcome ^ prev)[0]:
        events.add((int(sid), total_rounds))

    det = DetectorSet(rounds=total_rounds, events=events, fixed_mask=fixed_mask)
    return ShotRecord(detector_set=det, true_frame=frame, rng_seed=seed, gauge=gauge)


def adjudicate(
    record: ShotRecord,
    correction: PauliFrame,
    layout: CodeLayout,
    pattern: InitPattern,
) -> int:
    """1 iff the residual error flips the prepared logical state.

    The residual must commute with every fixed stabilizer (anything else
    means the correction is inconsistent with the observed syndrome);
    residual anticommutation with unfixed stabilizers is a gauge move and
    carries no logical content, as do the GHZ block operators.
    """
    residual = record.true_frame.compose(correction)
    syn = syndrome_of(layout, residual)
    bad = [sid for sid in np.nonzero(syn)[0] if int(sid) in pattern.fixed_stabilizers]
    if bad:
        raise InvalidCorrectionError(f"residual violates fixed stabilizers {bad[:4]}")
    which = "X_L" if pattern.target == PLUS_L else "Y_L"
    return logical_commutes(layout, residual, which)
