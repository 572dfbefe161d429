"""Experiment harness: shot batches, confidence intervals, threshold fits.

Results stream to CSV incrementally (crash-safe, resumable); all sampling
is reproducible from the master seed regardless of worker count, because
per-shot seeds derive from (master_seed, row key) before the shots are
split across processes.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .decoder import DecoderConfig, build_graphs
from .engine import FastEngine
from .framesim import NoiseParams
from .lattice import build_code
from .prep import InitPattern, NEW, PLUS_L, PLUS_I_L, STANDARD, init_pattern

MEMORY = "memory"

CSV_COLUMNS = [
    "protocol", "target", "d", "p", "eta", "pm_mode", "rounds", "shots",
    "failures", "p_l", "ci_low", "ci_high", "master_seed", "decoder_flags",
]


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str  # standard | new | memory
    d_list: tuple[int, ...]
    p_list: tuple[float, ...]
    eta: float  # math.inf for pure dephasing
    pm_mode: str  # "zero" | "equal_p"
    shots: int
    master_seed: int
    target: str = PLUS_L
    decoder_flags: str = ""

    def __post_init__(self):
        if self.pm_mode not in ("zero", "equal_p"):
            raise ValueError("pm_mode must be 'zero' or 'equal_p'")
        if any(not 0 < p <= 0.5 for p in self.p_list):
            raise ValueError("error rates must lie in (0, 0.5]")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.protocol not in (STANDARD, NEW, MEMORY):
            raise ValueError(f"unknown protocol {self.protocol!r}")


@dataclass
class ResultRow:
    protocol: str
    target: str
    d: int
    p: float
    eta: float
    pm_mode: str
    rounds: int
    shots: int
    failures: int
    master_seed: int
    decoder_flags: str = ""

    @property
    def p_l(self) -> float:
        return self.failures / self.shots

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.shots)

    def to_csv_dict(self) -> dict:
        lo, hi = self.wilson
        return {
            "protocol": self.protocol,
            "target": self.target,
            "d": self.d,
            "p": repr(self.p),
            "eta": format_eta(self.eta),
            "pm_mode": self.pm_mode,
            "rounds": self.rounds,
            "shots": self.shots,
            "failures": self.failures,
            "p_l": repr(self.p_l),
            "ci_low": repr(lo),
            "ci_high": repr(hi),
            "master_seed": self.master_seed,
            "decoder_flags": self.decoder_flags,
        }


@dataclass
class FitResult:
    kind: str  # threshold | subthreshold | lambda
    params: dict
    stderr: dict
    rows_used: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    phat = k / n
    denom = 1 + z * z / n
    centre = phat + z * z / (2 * n)
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return max(0.0, (centre - half) / denom), min(1.0, (centre + half) / denom)


def format_eta(eta: float) -> str:
    return "inf" if math.isinf(eta) else repr(float(eta))


def parse_eta(text: str) -> float:
    return math.inf if text.strip().lower() == "inf" else float(text)


def pattern_for(layout, protocol: str, target: str) -> InitPattern:
    """Pattern lookup including the all-fixed memory baseline."""
    if protocol == MEMORY:
        # perfect preparation by fiat: every stabilizer outcome deterministic
        return InitPattern(
            protocol=MEMORY,
            target=target,
            d=layout.d,
            ghz4_blocks=(),
            ghz2_blocks=(),
            singles=tuple(range(layout.n)),
            fixed_stabilizers=frozenset(
                s.plaquette_id for s in layout.stabilizers
            ),
        )
    return init_pattern(layout, protocol, target)


def _decoder_config(cfg: ExperimentConfig, d: int, p: float) -> DecoderConfig:
    layout = build_code(d)
    pattern = pattern_for(layout, cfg.protocol, cfg.target)
    pm = p if cfg.pm_mode == "equal_p" else 0.0
    rounds = d if pm > 0 else 0
    return DecoderConfig(
        layout=layout,
        pattern=pattern,
        noise=NoiseParams(p=p, eta=cfg.eta, pm=pm),
        rounds=rounds,
    )


def row_shot_seeds(cfg: ExperimentConfig, d: int, p: float, shots: int) -> np.ndarray:
    """Deterministic per-shot seeds for one (d, p) row."""
    key = (
        cfg.master_seed,
        d,
        int(round(p * 10**12)),
        0 if math.isinf(cfg.eta) else int(round(cfg.eta * 10**6)),
        1 if cfg.pm_mode == "equal_p" else 0,
        {STANDARD: 1, NEW: 2, MEMORY: 3}[cfg.protocol],
    )
    ss = np.random.SeedSequence(key)
    rng = np.random.Generator(np.random.PCG64(ss))
    return rng.integers(0, 2**62, size=shots, dtype=np.uint64)


# per-process engine cache for worker reuse
_ENGINE_CACHE: dict = {}


def _engine_for(cfg: ExperimentConfig, d: int, p: float) -> FastEngine:
    key = (cfg.protocol, cfg.target, d, p, format_eta(cfg.eta), cfg.pm_mode)
    eng = _ENGINE_CACHE.get(key)
    if eng is None:
        eng = FastEngine(build_graphs(_decoder_config(cfg, d, p)))
        _ENGINE_CACHE.clear()  # keep one graph set per process
        _ENGINE_CACHE[key] = eng
    return eng


def _run_chunk(args) -> tuple[int, int]:
    cfg, d, p, seeds = args
    eng = _engine_for(cfg, d, p)
    return eng.run_batch(seeds)


def run_experiment(
    cfg: ExperimentConfig,
    out_path: str | None = None,
    workers: int | None = None,
    progress=None,
) -> list[ResultRow]:
    """Run all (d, p) points; append rows to out_path incrementally.

    Existing rows in out_path with matching keys are reused (resume
    support), which together with seed determinism makes reruns
    byte-identical.
    """
    done = {}
    if out_path and os.path.exists(out_path):
        for row in read_rows(out_path):
            done[(row.protocol, row.target, row.d, row.p, format_eta(row.eta), row.pm_mode, row.shots, row.master_seed)] = row

    rows: list[ResultRow] = []
    pool = None
    if workers and workers > 1:
        import multiprocessing as mp

        pool = mp.get_context("spawn").Pool(workers)
    try:
        for d in cfg.d_list:
            for p in cfg.p_list:
                pm = p if cfg.pm_mode == "equal_p" else 0.0
                rounds = d if pm > 0 else 0
                key = (cfg.protocol, cfg.target, d, p, format_eta(cfg.eta), cfg.pm_mode, cfg.shots, cfg.master_seed)
                if key in done:
                    rows.append(done[key])
                    continue
                seeds = row_shot_seeds(cfg, d, p, cfg.shots)
                if pool is not None:
                    nchunk = max(1, min(64, cfg.shots // 2000))
                    chunks = np.array_split(seeds, nchunk)
                    parts = pool.map(_run_chunk, [(cfg, d, p, c) for c in chunks])
                    fails = sum(f for f, _ in parts)
                    invalid = sum(i for _, i in parts)
                else:
                    fails, invalid = _run_chunk((cfg, d, p, seeds))
                if invalid:
                    raise RuntimeError(
                        f"decoder produced {invalid} syndrome-invalid corrections at d={d}, p={p}"
                    )
                row = ResultRow(
                    protocol=cfg.protocol, target=cfg.target, d=d, p=p,
                    eta=cfg.eta, pm_mode=cfg.pm_mode, rounds=rounds,
                    shots=cfg.shots, failures=fails,
                    master_seed=cfg.master_seed, decoder_flags=cfg.decoder_flags,
                )
                rows.append(row)
                if out_path:
                    append_row(out_path, row)
                if progress:
                    progress(row)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return rows


def append_row(path: str, row: ResultRow) -> None:
    new_file = not os.path.exists(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if new_file:
            writer.writeheader()
        writer.writerow(row.to_csv_dict())
        fh.flush()
        os.fsync(fh.fileno())


def read_rows(path: str) -> list[ResultRow]:
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(
                ResultRow(
                    protocol=rec["protocol"], target=rec["target"],
                    d=int(rec["d"]), p=float(rec["p"]), eta=parse_eta(rec["eta"]),
                    pm_mode=rec["pm_mode"], rounds=int(rec["rounds"]),
                    shots=int(rec["shots"]), failures=int(rec["failures"]),
                    master_seed=int(rec["master_seed"]),
                    decoder_flags=rec.get("decoder_flags", ""),
                )
            )
    return out


class NoCrossingError(RuntimeError):
    """The p_L(d) curves do not cross inside the sampled range."""


def estimate_threshold(rows: list[ResultRow], d_list=None, n_boot: int = 120, seed: int = 0) -> FitResult:
    """Finite-size crossing fit: p_L = A + B x + C x^2, x = (p - p_th) d^{1/nu}."""
    from scipy.optimize import least_squares

    if d_list:
        rows = [r for r in rows if r.d in d_list]
    ds = sorted({r.d for r in rows})
    if len(ds) < 2:
        raise ValueError("need at least two distances for a crossing fit")
    by_d = {d: sorted((r for r in rows if r.d == d), key=lambda r: r.p) for d in ds}

    # coarse crossing: where the smallest-d and largest-d curves intersect
    lo_d, hi_d = ds[0], ds[-1]
    ps = sorted({r.p for r in rows})
    diffs = []
    for p in ps:
        a = next((r for r in by_d[lo_d] if r.p == p), None)
        b = next((r for r in by_d[hi_d] if r.p == p), None)
        if a and b:
            diffs.append((p, a.p_l - b.p_l))
    crossing = None
    for (p1, v1), (p2, v2) in zip(diffs, diffs[1:]):
        if v1 == 0:
            crossing = p1
        if v1 * v2 < 0:
            crossing = p1 + (p2 - p1) * v1 / (v1 - v2)
            break
    if crossing is None:
        # accept an endpoint crossing (curves ordered one way everywhere
        # except touching at the edge) before giving up
        raise NoCrossingError("no crossing of the extreme-distance curves in the sampled range")

    window = [r for r in rows if abs(r.p - crossing) <= 0.15 * crossing]
    if len(window) < 5:
        window = rows

    def model(theta, rr):
        pth, inv_nu, a, b, c = theta
        out = []
        for r in rr:
            x = (r.p - pth) * r.d ** inv_nu
            out.append(a + b * x + c * x * x)
        return np.array(out)

    def resid(theta, rr, pl):
        sig = np.array([max(1e-9, (r.wilson[1] - r.wilson[0]) / 2) for r in rr])
        return (model(theta, rr) - pl) / sig

    pl_obs = np.array([r.p_l for r in window])
    theta0 = np.array([crossing, 1.0, float(np.mean(pl_obs)), 1.0, 0.0])
    sol = least_squares(resid, theta0, args=(window, pl_obs), method="lm", max_nfev=20000)
    pth_hat, inv_nu = float(sol.x[0]), float(sol.x[1])

    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        pl_b = np.array([rng.binomial(r.shots, r.p_l) / r.shots for r in window])
        try:
            sb = least_squares(resid, sol.x, args=(window, pl_b), method="lm", max_nfev=20000)
            boots.append(float(sb.x[0]))
        except Exception:
            continue
    stderr = float(np.std(boots)) if boots else float("nan")
    return FitResult(
        kind="threshold",
        params={"p_th": pth_hat, "nu": 1.0 / inv_nu if inv_nu else float("nan")},
        stderr={"p_th": stderr},
        rows_used=window,
    )


def fit_subthreshold(rows: list[ResultRow], min_failures: int = 5) -> FitResult:
    """Weighted least squares for log p_L = (a d + b) log p + (c d + e)."""
    usable = [r for r in rows if r.failures >= min_failures]
    ds = {r.d for r in usable}
    ps = {r.p for r in usable}
    if len(ds) < 3 or len(ps) < 3:
        raise ValueError("need at least three distances and three error rates with enough failures")
    A = []
    y = []
    w = []
    for r in usable:
        lp = math.log(r.p)
        A.append([r.d * lp, lp, r.d, 1.0])
        y.append(math.log(r.p_l))
        lo, hi = r.wilson
        sigma = (math.log(hi) - math.log(max(lo, 1e-300))) / 2 if lo > 0 else 1.0
        w.append(1.0 / max(sigma, 1e-3))
    A = np.array(A)
    y = np.array(y)
    w = np.array(w)
    Aw = A * w[:, None]
    yw = y * w
    sol, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
    resid = A @ sol - y
    dof = max(1, len(y) - 4)
    cov = np.linalg.inv(Aw.T @ Aw) * float(np.sum((resid * w) ** 2) / dof)
    names = ["alpha", "beta", "gamma", "delta"]
    return FitResult(
        kind="subthreshold",
        params=dict(zip(names, map(float, sol))),
        stderr={n: float(math.sqrt(max(cov[i, i], 0.0))) for i, n in enumerate(names)},
        rows_used=usable,
        warnings=[f"dropped {len(rows) - len(usable)} rows with < {min_failures} failures"]
        if len(usable) < len(rows) else [],
    )


def lambda_factor(rows: list[ResultRow], p: float, min_failures: int = 1) -> FitResult:
    """Error-suppression factor from the slope of log p_L against d at fixed p."""
    pts = sorted(
        (r for r in rows if abs(r.p - p) < 1e-12 and r.failures >= min_failures),
        key=lambda r: r.d,
    )
    if len(pts) < 3:
        raise ValueError("need at least three distances at the requested p")
    warnings = []
    pls = [r.p_l for r in pts]
    if any(b > a for a, b in zip(pls, pls[1:])):
        warnings.append("p_l is not monotone in d; fit returned anyway")
    x = np.array([r.d for r in pts], dtype=float)
    y = np.array([math.log(r.p_l) for r in pts])
    w = np.array([
        1.0 / max((math.log(r.wilson[1]) - math.log(max(r.wilson[0], 1e-300))) / 2, 1e-3)
        if r.wilson[0] > 0 else 1.0
        for r in pts
    ])
    xm = np.average(x, weights=w)
    ym = np.average(y, weights=w)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / np.sum(w * (x - xm) ** 2))
    var = 1.0 / float(np.sum(w * (x - xm) ** 2))
    lam = math.exp(-slope)
    return FitResult(
        kind="lambda",
        params={"lambda": lam, "p": p},
        stderr={"lambda": lam * math.sqrt(var)},
        rows_used=pts,
        warnings=warnings,
    )
