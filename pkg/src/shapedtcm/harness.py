"""System wiring and Monte Carlo FER measurement.

A SystemConfig describes one complete transmit chain: distribution matcher,
CRC, tail-biting trellis code, and decoder settings. build_system resolves
it into ready-to-use objects and checks the chain dimensions. simulate_fer
runs seeded frames through transmit -> AWGN -> list decode and aggregates
outcomes into FerRecords.

Seeding: frame i draws its message and unit noise from
SeedSequence([master_seed, i]), and sigma scales the noise afterwards.
Results are therefore bit-identical for any worker count, and different
SNR points (or different CRC candidates) see common random numbers.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np
import yaml

from .bits import bits_to_int, pack_frames
from .codes import standard_code
from .crc import CrcSpec, crc_encode, enumerate_generators
from .decoder import DecoderConfig, slvd_decode
from .modulation import (
    Constellation,
    map_labels,
    position_priors,
    shaped_8am,
)
from .shaping import (
    AmplitudeDistribution,
    CcdmMapper,
    ShellMapper,
    binary_convert,
)
from .tbcc import ConvCodeSpec, StateSpace, Trellis, build_trellis, frame_count_supported, tb_encode


@dataclass(frozen=True)
class SystemConfig:
    dm_type: str                      # "smdm" or "ccdm"
    n: int                            # shaped amplitudes per frame
    pmf: tuple[float, ...]
    crc: CrcSpec
    code: ConvCodeSpec
    k: int | None = None              # smdm: required; ccdm: derived
    weight_scale: int = 1 << 16
    list_size: int = 16
    max_expansions: int = 1_000_000
    snr_grid: tuple[float, ...] = ()
    min_errors: int = 100
    max_frames: int = 1_000_000
    master_seed: int = 0


@dataclass(frozen=True, eq=False)
class System:
    cfg: SystemConfig
    mapper: ShellMapper | CcdmMapper
    trellis: Trellis
    state_space: StateSpace
    constellation: Constellation
    prior_rows: np.ndarray
    n_frames: int

    @property
    def k(self) -> int:
        return self.mapper.k

    @property
    def rate(self) -> float:
        """Transmission rate in information bits per channel symbol."""
        return self.mapper.k / self.n_frames


@dataclass(frozen=True)
class FerRecord:
    snr_db: float
    frames: int
    frame_errors: int
    undetected_errors: int
    list_exhausted: int
    not_in_codebook: int
    avg_list_rank: float
    fer: float
    stderr: float
    seed: int
    wallclock: float = field(compare=False, default=0.0)


def load_config(path: str) -> SystemConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    dm = raw["dm"]
    crc_raw = raw["crc"]
    coeffs = crc_raw["coeffs"]
    if isinstance(coeffs, str):
        crc = CrcSpec.from_hex(int(crc_raw["degree"]), coeffs)
    else:
        crc = CrcSpec(int(crc_raw["degree"]), int(coeffs))
    code_raw = raw["code"]
    if "polys" in code_raw:
        code = ConvCodeSpec.from_octal(int(code_raw.get("k0", 2)),
                                       int(code_raw["nu"]),
                                       tuple(code_raw["polys"]))
    else:
        code = standard_code(int(code_raw["nu"]))
    dec = raw.get("decoder", {})
    stop = raw.get("stopping", {})
    return SystemConfig(
        dm_type=str(dm["type"]),
        n=int(dm["n"]),
        pmf=tuple(float(p) for p in dm["pmf"]),
        crc=crc,
        code=code,
        k=None if dm.get("k") is None else int(dm["k"]),
        weight_scale=int(dm.get("weight_scale", 1 << 16)),
        list_size=int(dec.get("list_size", 16)),
        max_expansions=int(dec.get("max_expansions", 1_000_000)),
        snr_grid=tuple(float(s) for s in raw.get("snr_grid", ())),
        min_errors=int(stop.get("min_errors", 100)),
        max_frames=int(stop.get("max_frames", 1_000_000)),
        master_seed=int(raw.get("master_seed", 0)),
    )


def build_system(cfg: SystemConfig) -> System:
    dist = AmplitudeDistribution(cfg.pmf)
    if dist.bits_per_symbol != cfg.code.k0:
        raise ValueError("amplitude bits per symbol must equal the code input width")
    if cfg.dm_type == "smdm":
        if cfg.k is None:
            raise ValueError("smdm needs an explicit k")
        mapper = ShellMapper(dist, cfg.n, cfg.k, weight_scale=cfg.weight_scale)
    elif cfg.dm_type == "ccdm":
        mapper = CcdmMapper(dist, cfg.n)
        if cfg.k is not None and cfg.k != mapper.k:
            raise ValueError(f"ccdm on this composition carries k={mapper.k}")
    else:
        raise ValueError(f"unknown dm type {cfg.dm_type!r}")

    total_bits = cfg.n * dist.bits_per_symbol + cfg.crc.degree
    if total_bits % cfg.code.k0:
        raise ValueError("shaped bits plus CRC parity must fill whole frames")
    n_frames = total_bits // cfg.code.k0
    trellis, ss = build_trellis(cfg.code)
    if not frame_count_supported(ss, n_frames):
        raise ValueError(f"frame count {n_frames} unsupported by this code")

    constellation = shaped_8am(dist)
    rows = position_priors(dist, cfg.n, n_frames - cfg.n)
    return System(cfg, mapper, trellis, ss, constellation, rows, n_frames)


def transmit(msg_bits: np.ndarray, system: System) -> np.ndarray:
    """Uniform message bits to a length-T sequence of channel symbols."""
    msg_bits = np.asarray(msg_bits, dtype=np.int64)
    if msg_bits.shape != (system.k,):
        raise ValueError(f"message must be {system.k} bits")
    amps = system.mapper.encode(bits_to_int(msg_bits))
    shaped = binary_convert(amps, system.mapper.dist.bits_per_symbol)
    frames = pack_frames(crc_encode(shaped, system.cfg.crc), system.cfg.code.k0)
    labels, _ = tb_encode(frames, system.trellis, system.state_space)
    return map_labels(labels, system.constellation)


def _decoder_config(system: System, sigma: float) -> DecoderConfig:
    return DecoderConfig(
        list_size=system.cfg.list_size,
        sigma=sigma,
        prior_mode="per-position",
        shaped_frames=system.cfg.n,
        max_expansions=system.cfg.max_expansions,
    )


def noise_sigma(system: System, snr_db: float) -> float:
    """SNR is mean transmitted symbol energy over noise variance."""
    es = float(np.mean(system.prior_rows @ system.constellation.points**2))
    return float(np.sqrt(es / 10 ** (snr_db / 10)))


_OK, _UNDETECTED, _EXHAUSTED, _NOT_IN_CODEBOOK = range(4)


def _run_frames(system: System, sigma: float, master_seed: int,
                start: int, stop: int) -> list[tuple[int, int]]:
    """(outcome, rank) per frame; rank 0 when the list never passed CRC."""
    dcfg = _decoder_config(system, sigma)
    out = []
    for idx in range(start, stop):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, idx]))
        msg = rng.integers(0, 2, size=system.k)
        noise = rng.standard_normal(system.n_frames)
        y = transmit(msg, system) + sigma * noise
        res = slvd_decode(y, system.trellis, system.constellation,
                          system.cfg.crc, system.mapper, dcfg)
        if res.status == "ok":
            outcome = _OK if np.array_equal(res.message, msg) else _UNDETECTED
        elif res.status == "not_in_codebook":
            outcome = _NOT_IN_CODEBOOK
        else:
            outcome = _EXHAUSTED
        out.append((outcome, res.rank or 0))
    return out


def _run_frames_star(args) -> list[tuple[int, int]]:
    return _run_frames(*args)


def simulate_fer(system: System, snr_db: float, workers: int = 1,
                 chunk: int = 512) -> FerRecord:
    """Frames run in index order until min_errors or max_frames is hit."""
    cfg = system.cfg
    sigma = noise_sigma(system, snr_db)
    t0 = time.perf_counter()

    starts = range(0, cfg.max_frames, chunk)
    tasks = ((system, sigma, cfg.master_seed, s, min(s + chunk, cfg.max_frames))
             for s in starts)
    frames = errors = 0
    counts = [0, 0, 0, 0]
    rank_sum = ranked = 0

    def scan(block) -> bool:
        nonlocal frames, errors, rank_sum, ranked
        for outcome, rank in block:
            frames += 1
            counts[outcome] += 1
            if outcome != _OK:
                errors += 1
            if rank:
                rank_sum += rank
                ranked += 1
            if errors >= cfg.min_errors:
                return True
        return False

    if workers <= 1:
        for args in tasks:
            if scan(_run_frames(*args)):
                break
    else:
        with ProcessPoolExecutor(max_workers=workers,
                                 mp_context=get_context("fork")) as pool:
            for block in pool.map(_run_frames_star, tasks):
                if scan(block):
                    break

    fer = errors / frames
    stderr = float(np.sqrt(fer * (1 - fer) / frames))
    return FerRecord(
        snr_db=snr_db,
        frames=frames,
        frame_errors=errors,
        undetected_errors=counts[_UNDETECTED],
        list_exhausted=counts[_EXHAUSTED],
        not_in_codebook=counts[_NOT_IN_CODEBOOK],
        avg_list_rank=rank_sum / ranked if ranked else 0.0,
        fer=fer,
        stderr=stderr,
        seed=cfg.master_seed,
        wallclock=time.perf_counter() - t0,
    )


def run_sweep(system: System, workers: int = 1) -> list[FerRecord]:
    return [simulate_fer(system, snr, workers=workers) for snr in system.cfg.snr_grid]


def crc_search(system: System, snr_db: float, budget_frames: int,
               workers: int = 1) -> list[tuple[CrcSpec, FerRecord]]:
    """Rank every monic degree-m generator by FER at a fixed frame budget.

    All candidates see the same frames (common random numbers), so the
    ranking compares like with like even at modest budgets.
    """
    results = []
    for spec in enumerate_generators(system.cfg.crc.degree):
        cfg = replace(system.cfg, crc=spec, max_frames=budget_frames,
                      min_errors=budget_frames + 1)
        variant = System(cfg, system.mapper, system.trellis, system.state_space,
                         system.constellation, system.prior_rows, system.n_frames)
        results.append((spec, simulate_fer(variant, snr_db, workers=workers)))
    results.sort(key=lambda sr: (sr[1].fer, sr[0].coeffs))
    return results


def config_dict(cfg: SystemConfig) -> dict:
    return {
        "dm": {"type": cfg.dm_type, "k": cfg.k, "n": cfg.n,
               "pmf": list(cfg.pmf), "weight_scale": cfg.weight_scale},
        "crc": {"degree": cfg.crc.degree, "coeffs": hex(cfg.crc.coeffs)},
        "code": {"k0": cfg.code.k0, "nu": cfg.code.nu,
                 "polys": [oct(p)[2:] for p in cfg.code.parity_polys]},
        "decoder": {"list_size": cfg.list_size,
                    "max_expansions": cfg.max_expansions},
        "snr_grid": list(cfg.snr_grid),
        "stopping": {"min_errors": cfg.min_errors, "max_frames": cfg.max_frames},
        "master_seed": cfg.master_seed,
    }


def write_records_csv(path: str, records: list[FerRecord]) -> None:
    names = [f.name for f in FerRecord.__dataclass_fields__.values()]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for r in records:
            writer.writerow([getattr(r, name) for name in names])


def write_metadata_json(path: str, system: System, notes: dict | None = None) -> None:
    cfg = config_dict(system.cfg)
    blob = json.dumps(cfg, sort_keys=True).encode()
    meta = {
        "config": cfg,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "rate_bits_per_symbol": system.rate,
        "frame_count": system.n_frames,
        "snr_definition": "snr_db = 10*log10(mean symbol energy / sigma^2), real AWGN",
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    if notes:
        meta["notes"] = notes
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
