"""Monte Carlo driver: configuration, per-trial seeding, parallel sweeps, and
the validation tables for the position estimator and the inversion estimate.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ebn0_to_sigma, llr, transmit
from .decoders import FineTunedDecoder, OrbDecoder, SgrandDecoder
from .finetune import (FlipProbTable, delta_table, estimate_reverse_pairs, eta, select_positions,
                       subset_labels, subset_reverse_pairs)
from .gf2_codes import LinearCode, parse_code_spec
from .metrics import SweepSummary, TrialRecord, accumulate, merge_cells
from .partition_estimator import (ORB_ESTIMATOR, default_m_grid, fitted_estimator, o_exact, o_exact_orb_table,
                                  o_tilde)
from .pattern_gen import build_basis, gamma_cdf, gamma_orbgrand, rank_llrs

VARIANTS = ("orb", "cdf", "sgrand", "ft-cdf", "ft-orb")
# stable ids for seeding; never reorder
_VARIANT_IDS = {"orb": 1, "cdf": 2, "sgrand": 3, "ft-cdf": 4, "ft-orb": 5}


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass
class SimConfig:
    code: str = "bch:127:113"
    variants: tuple = ("orb", "cdf", "sgrand", "ft-cdf")
    ebn0: tuple = (4.0, 5.0, 6.0, 7.0)
    frames: int = 1000
    t_max: int = 10_000
    d: int = 1
    window: int | None = 16
    seed: int = 0
    eta_every: int = 30
    crn: bool = False
    timing: bool = False
    exact_ci: bool = False
    chunk: int = 500
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    variant_opts: dict = field(default_factory=dict)

    def validate(self) -> "SimConfig":
        if self.frames < 1:
            raise ConfigError("frames", "must be >= 1")
        if self.t_max < 1:
            raise ConfigError("t_max", "must be >= 1")
        if self.d not in (1, 2):
            raise ConfigError("d", "only 1 or 2 selected positions are supported")
        if self.window is not None and self.window < self.d:
            raise ConfigError("window", "must be at least d")
        if self.eta_every < 0:
            raise ConfigError("eta_every", "must be >= 0 (0 disables eta sampling)")
        if self.chunk < 1:
            raise ConfigError("chunk", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError("format", "must be csv or jsonl")
        if not self.variants:
            raise ConfigError("variants", "empty")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError("variants", f"unknown variant {v!r}")
        if not self.ebn0:
            raise ConfigError("ebn0", "empty")
        if self.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        try:
            parse_code_spec(self.code)
        except (OSError, ValueError) as exc:
            raise ConfigError("code", str(exc)) from exc
        return self

    def opts(self, variant: str) -> tuple[int, int | None]:
        o = self.variant_opts.get(variant, {})
        return int(o.get("d", self.d)), o.get("window", self.window)


def _split_list(text: str, conv=str) -> tuple:
    return tuple(conv(x.strip()) for x in str(text).split(",") if x.strip())


def _window(v) -> int | None:
    if v is None or str(v).lower() in ("all", "none", "0"):
        return None
    return int(v)


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


_CONVERTERS = {
    "variants": lambda v: _split_list(v),
    "ebn0": lambda v: _split_list(v, float),
    "frames": int, "t_max": int, "d": int, "seed": int, "eta_every": int, "chunk": int, "workers": int,
    "window": _window, "crn": _bool, "timing": _bool, "exact_ci": _bool,
}


def read_config_file(path: str, section: str) -> dict:
    """Flat key = value options from ``[common]`` and ``[section]``.

    Sections ``[variant:<name>]`` hold per-variant overrides of d and window.
    """
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError("config", f"cannot read {path}")
    out: dict = {}
    for sec in ("common", section):
        if cp.has_section(sec):
            out.update({k.replace("-", "_"): v for k, v in cp.items(sec)})
    vopts = {}
    for sec in cp.sections():
        if sec.startswith("variant:"):
            name = sec.split(":", 1)[1]
            o = {}
            for k, v in cp.items(sec):
                if k == "d":
                    o["d"] = int(v)
                elif k == "window":
                    o["window"] = _window(v)
                else:
                    raise ConfigError(f"{sec}.{k}", "unknown per-variant option")
            vopts[name] = o
    if vopts:
        out["variant_opts"] = vopts
    return out


def make_config(file_opts: dict | None = None, **overrides) -> SimConfig:
    """Defaults, then file options, then non-None overrides."""
    names = {f.name for f in dataclasses.fields(SimConfig)}
    merged: dict = {}
    for src in (file_opts or {}, {k: v for k, v in overrides.items() if v is not None}):
        for k, v in src.items():
            if k not in names:
                raise ConfigError(k, "unknown option")
            conv = _CONVERTERS.get(k)
            try:
                merged[k] = conv(v) if conv is not None and isinstance(v, str) else v
            except ValueError as exc:
                raise ConfigError(k, str(exc)) from exc
    if "ebn0" in merged:
        merged["ebn0"] = tuple(float(x) for x in merged["ebn0"])
    if "variants" in merged:
        merged["variants"] = tuple(merged["variants"])
    return SimConfig(**merged).validate()


# ---------------------------------------------------------------------------
# per-process decoder context
# ---------------------------------------------------------------------------

_CACHE: dict = {}


def _cached(key, build):
    if key not in _CACHE:
        _CACHE[key] = build()
    return _CACHE[key]


def get_code(spec: str) -> LinearCode:
    return _cached(("code", spec), lambda: parse_code_spec(spec))


def orb_basis(N: int, T: int):
    return _cached(("orb", N, T), lambda: build_basis(gamma_orbgrand(N), T))


def cdf_basis(N: int, sigma: float, T: int):
    return _cached(("cdf", N, sigma, T), lambda: build_basis(gamma_cdf(N, sigma), T))


def _ft_parts(basis, fitted: bool):
    key = ("ft", id(basis))
    return _cached(key, lambda: (fitted_estimator(basis, strict=False) if fitted else ORB_ESTIMATOR,
                                 FlipProbTable(basis)))


def make_decoder(variant: str, code: LinearCode, sigma: float, T: int, D: int = 1, window: int | None = 16):
    N = code.n
    if variant == "orb":
        return OrbDecoder(code, orb_basis(N, T), T)
    if variant == "cdf":
        return OrbDecoder(code, cdf_basis(N, sigma, T), T)
    if variant == "sgrand":
        return SgrandDecoder(code, T)
    if variant in ("ft-cdf", "ft-orb"):
        basis = cdf_basis(N, sigma, T) if variant == "ft-cdf" else orb_basis(N, T)
        est, table = _ft_parts(basis, variant == "ft-cdf")
        return FineTunedDecoder(code, basis, est, D, T, window, table)
    raise ValueError(f"unknown variant {variant!r}")


def trial_seed(seed: int, variant: str, ebn0_db: float, frame: int, crn: bool = False) -> np.random.SeedSequence:
    """Counter-based per-trial seed; CRN drops the variant so all variants share noise."""
    vid = 0 if crn else _VARIANT_IDS[variant]
    eb_key = int(round(ebn0_db * 1000)) + 1_000_000
    return np.random.SeedSequence([seed, vid, eb_key, frame])


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def run_trials(cfg: SimConfig, variant: str, ebn0_db: float, start: int, stop: int) -> list[TrialRecord]:
    code = get_code(cfg.code)
    sigma = ebn0_to_sigma(ebn0_db, code.rate)
    D, window = cfg.opts(variant)
    dec = make_decoder(variant, code, sigma, cfg.t_max, D, window)
    out = []
    for f in range(start, stop):
        rng = np.random.default_rng(trial_seed(cfg.seed, variant, ebn0_db, f, cfg.crn))
        msg = rng.integers(0, 2, code.k, dtype=np.uint8)
        cw = code.encode(msg)
        L = llr(transmit(cw, sigma, rng), sigma)
        t0 = time.perf_counter() if cfg.timing else 0.0
        res = dec.decode(L)
        elapsed = (time.perf_counter() - t0) * 1e6 if cfg.timing else None
        err = not res.decoded or not np.array_equal(res.codeword, cw)
        eta_s = None
        if cfg.eta_every and f % cfg.eta_every == 0:
            eta_s = eta(dec.order_zetas(L))
        out.append(TrialRecord(ebn0_db, variant, res.status, res.tests_used, err, eta_s,
                               tuple(res.positions) if res.positions is not None else (),
                               elapsed, int(res.counters.get("adjust_loop_iterations", 0))))
    return out


def _run_chunk(args):
    cfg, variant, ebn0_db, start, stop = args
    return accumulate(run_trials(cfg, variant, ebn0_db, start, stop))


def sweep_tasks(cfg: SimConfig) -> list:
    tasks = []
    for variant in sorted(cfg.variants):
        for eb in sorted(cfg.ebn0):
            for a in range(0, cfg.frames, cfg.chunk):
                tasks.append((cfg, variant, float(eb), a, min(cfg.frames, a + cfg.chunk)))
    return tasks


def run_sweep(cfg: SimConfig) -> SweepSummary:
    """Run every (variant, ebn0) cell. Chunks are fixed by ``cfg.chunk`` and
    merged in task order, so the worker count never changes the output."""
    cfg.validate()
    tasks = sweep_tasks(cfg)
    if cfg.workers == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(_run_chunk, tasks))
    cells: dict = {}
    for p in parts:
        cells = merge_cells(cells, p)
    return SweepSummary(cells, cfg.exact_ci)


# ---------------------------------------------------------------------------
# validation tables
# ---------------------------------------------------------------------------

PARTITION_COLUMNS = ["m", "o_exact", "o_tilde", "rel_error"]
INVERSION_COLUMNS = ["ebn0", "mean_I_exact", "mean_I_estimate", "rel_error"]


def run_partition_validation(n_max: int = 2000, gamma: str = "orb", ebn0_db: float = 5.0, N: int = 127,
                             T: int = 10_000, rate: float = 113 / 127, points: int = 200) -> list[dict]:
    """Exact position count vs the estimator.

    orb: every integer m in 1..n_max against the erfi closed form. cdf: basis
    weights at geometric count levels (complete classes only, m <= n_max)
    against the fitted estimator.
    """
    rows = []
    if gamma == "orb":
        exact = o_exact_orb_table(n_max, N)
        for m in range(1, n_max + 1):
            ot = float(o_tilde(m))
            rows.append({"m": m, "o_exact": exact[m], "o_tilde": ot,
                         "rel_error": abs(ot - exact[m]) / exact[m]})
    elif gamma == "cdf":
        basis = cdf_basis(N, ebn0_to_sigma(ebn0_db, rate), T)
        est = fitted_estimator(basis)
        for m in default_m_grid(basis, points=points, min_count=2):
            if m > n_max:
                break
            ex = o_exact(float(m), basis)
            ot = float(est.value(float(m)))
            rows.append({"m": float(m), "o_exact": ex, "o_tilde": ot, "rel_error": abs(ot - ex) / ex})
    else:
        raise ValueError(f"unknown gamma {gamma!r}")
    return rows


def inversion_samples(ebn0_db: float, samples: int, D: int = 1, seed: int = 0, N: int = 127, T: int = 10_000,
                      rate: float = 113 / 127, window: int | None = 16):
    """Per-draw (exact I, estimated I) for the CDF weights at the selected positions."""
    sigma = ebn0_to_sigma(ebn0_db, rate)
    basis = cdf_basis(N, sigma, T)
    est, table = _ft_parts(basis, True)
    exact = np.empty(samples)
    approx = np.empty(samples)
    eb_key = int(round(ebn0_db * 1000)) + 1_000_000
    zero = np.zeros(N, dtype=np.uint8)
    for s in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 99, eb_key, s]))
        L = llr(transmit(zero, sigma, rng), sigma)
        ranking = rank_llrs(L.magnitudes)
        pos = select_positions(D, L.magnitudes, ranking, basis.gamma, table, T, window).positions
        coords = [int(ranking.ranks[d]) - 1 for d in pos]
        delta = delta_table(pos, L.magnitudes, ranking, basis.gamma)
        exact[s] = subset_reverse_pairs(basis.weights, subset_labels(basis, coords), delta).sum()
        approx[s] = estimate_reverse_pairs(pos, L.magnitudes, ranking, basis.gamma, est, table, T)
    return exact, approx


def run_inversion_validation(ebn0_list, samples: int, D: int = 1, seed: int = 0, **kw) -> list[dict]:
    rows = []
    for eb in ebn0_list:
        ex, ap = inversion_samples(float(eb), samples, D, seed, **kw)
        mi, me = float(ex.mean()), float(ap.mean())
        rows.append({"ebn0": float(eb), "mean_I_exact": mi, "mean_I_estimate": me,
                     "rel_error": abs(me - mi) / mi if mi else math.nan})
    return rows
