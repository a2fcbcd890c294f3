"""Command line front end over the library.

Subcommands operate on a YAML system config (see configs/) so scripts and
tests drive the exact same objects as library callers.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .analysis import (
    build_transition_matrices,
    crc_bit_pmf_from_symbols,
    evolve_state_pmf,
    output_label_pmf,
    second_eigenvalue_magnitude,
)
from .bits import int_to_bits
from .bounds import RcuConfig, rcu_curve
from .decoder import slvd_decode
from .harness import (
    System,
    build_system,
    crc_search,
    load_config,
    noise_sigma,
    run_sweep,
    simulate_fer,
    transmit,
    write_metadata_json,
    write_records_csv,
)
from .harness import _decoder_config
from .shaping import normalized_kl


def _system(args) -> System:
    return build_system(load_config(args.config))


def _message_bits(args, system: System) -> np.ndarray:
    if args.message is not None:
        value = int(args.message, 16)
        if value >> system.k:
            raise SystemExit(f"message exceeds {system.k} bits")
        return int_to_bits(value, system.k)
    rng = np.random.default_rng(args.seed)
    return rng.integers(0, 2, size=system.k)


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_encode(args) -> int:
    system = _system(args)
    bits = _message_bits(args, system)
    x = transmit(bits, system)
    value = int("".join(map(str, bits)), 2) if system.k else 0
    print(f"# message 0x{value:x} ({system.k} bits), {system.n_frames} symbols",
          file=sys.stderr)
    _write_lines(args.out, [f"{v:+.0f}" for v in x])
    return 0


def cmd_decode(args) -> int:
    system = _system(args)
    y = np.loadtxt(args.signals, ndmin=1)
    if y.shape != (system.n_frames,):
        raise SystemExit(f"expected {system.n_frames} signal values")
    sigma = noise_sigma(system, args.snr_db)
    res = slvd_decode(y, system.trellis, system.constellation, system.cfg.crc,
                      system.mapper, _decoder_config(system, sigma))
    out = {"status": res.status, "rank": res.rank, "metric": res.metric,
           "crc_failures": res.crc_failures}
    if res.message is not None:
        out["message"] = f"0x{int(''.join(map(str, res.message)), 2):x}"
    print(json.dumps(out))
    return 0 if res.status == "ok" else 1


def cmd_simulate(args) -> int:
    system = _system(args)
    records = run_sweep(system, workers=args.workers)
    for r in records:
        print(f"snr={r.snr_db:g} fer={r.fer:.6g} stderr={r.stderr:.3g} "
              f"frames={r.frames} errors={r.frame_errors} "
              f"(undetected={r.undetected_errors} exhausted={r.list_exhausted} "
              f"out_of_codebook={r.not_in_codebook}) "
              f"avg_rank={r.avg_list_rank:.3g} wallclock={r.wallclock:.1f}s")
    if args.csv:
        write_records_csv(args.csv, records)
    if args.meta:
        write_metadata_json(args.meta, system)
    return 0


def cmd_analyze(args) -> int:
    system = _system(args)
    pmf = np.array(system.mapper.dist.pmf)
    tm = build_transition_matrices(system.trellis, pmf)
    steps = args.steps if args.steps is not None else system.cfg.n
    e0 = np.zeros(system.trellis.n_states)
    e0[0] = 1.0
    p = evolve_state_pmf(e0, tm, steps)
    uniform = np.full_like(p, 1.0 / len(p))
    print(f"second_eigenvalue_magnitude {second_eigenvalue_magnitude(tm):.6f}")
    print(f"state_pmf_deviation_after_{steps}_frames {np.abs(p - uniform).max():.3e}")
    q = output_label_pmf(uniform, tm)
    ideal = 0.5 * pmf[np.arange(system.trellis.n_labels) >> 1]
    print(f"stationary_label_deviation {np.abs(q - ideal).max():.3e}")
    prob0, j_even, j_odd = crc_bit_pmf_from_symbols(
        system.cfg.crc, pmf, system.cfg.n, system.mapper.dist.bits_per_symbol)
    bias = np.abs(prob0 - 0.5)
    print(f"max_parity_bias {bias.max():.3e}")
    for i, (p0, je, jo) in enumerate(zip(prob0, j_even, j_odd)):
        print(f"parity_bit {i} prob0={p0:.9f} j_even={je} j_odd={jo}")
    return 0


def cmd_rcu(args) -> int:
    system = _system(args)
    cfg = RcuConfig(
        n=system.n_frames,
        k=system.k,
        constellation=system.constellation,
        snr_grid=system.cfg.snr_grid,
        outer_samples=args.samples,
        min_samples=min(args.min_samples, args.samples),
        rel_stderr=args.rel_stderr,
        density_grid=(-700.0, 25.0, args.bins),
        position_priors=system.prior_rows,
    )
    rows = []
    for pt in rcu_curve(cfg, seed=args.seed):
        print(f"snr={pt.snr_db:g} rcu={pt.value:.6g} stderr={pt.stderr:.3g} "
              f"samples={pt.samples}")
        rows.append(f"{pt.snr_db},{pt.value},{pt.stderr},{pt.samples}")
    if args.csv:
        _write_lines(args.csv, ["snr_db,rcu,stderr,samples"] + rows)
    return 0


def cmd_dm_stats(args) -> int:
    system = _system(args)
    m = system.mapper
    print(f"type {system.cfg.dm_type}")
    print(f"symbols {m.n}")
    print(f"input_bits {m.k}")
    print(f"codebook_size 2^{m.k}")
    print(f"rate_bits_per_symbol {system.rate:.6f}")
    print(f"normalized_kl_bits {normalized_kl(m):.6f}")
    print(f"target_entropy_bits {m.dist.entropy():.6f}")
    if hasattr(m, "composition"):
        print(f"composition {','.join(map(str, m.composition))}")
    return 0


def cmd_crc_search(args) -> int:
    system = _system(args)
    ranked = crc_search(system, args.snr_db, args.budget, workers=args.workers)
    for spec, r in ranked:
        print(f"0x{spec.coeffs:x} fer={r.fer:.6g} stderr={r.stderr:.3g} "
              f"undetected={r.undetected_errors} exhausted={r.list_exhausted} "
              f"out_of_codebook={r.not_in_codebook}")
    return 0


def cmd_trellis_dump(args) -> int:
    system = _system(args)
    t = system.trellis
    lines = ["section,state,input,next_state,label"]
    for v in range(t.n_states):
        for u in range(t.n_inputs):
            lines.append(f"edge,{v},{u},{t.next_state[v, u]},{t.label[v, u]}")
    lines.append("section,label,point,prior")
    for l in range(t.n_labels):
        lines.append(f"label,{l},{system.constellation.points[l]:+.0f},"
                     f"{system.constellation.prior[l]:.6f}")
    _write_lines(args.out, lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapedtcm")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="YAML system config")
        p.set_defaults(func=fn)
        return p

    p = add("encode", cmd_encode, "encode one message to channel symbols")
    p.add_argument("--message", help="message as hex")
    p.add_argument("--seed", type=int, default=0, help="random message seed")
    p.add_argument("--out", help="write symbols here instead of stdout")

    p = add("decode", cmd_decode, "list-decode a file of received values")
    p.add_argument("--signals", required=True, help="one value per line")
    p.add_argument("--snr-db", type=float, required=True)

    p = add("simulate", cmd_simulate, "Monte Carlo FER over the config SNR grid")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write one record per row")
    p.add_argument("--meta", help="write run metadata JSON")

    p = add("analyze", cmd_analyze, "trellis state/label statistics and CRC bias")
    p.add_argument("--steps", type=int, default=None,
                   help="state evolution steps (default: shaped frame count)")

    p = add("rcu", cmd_rcu, "random-coding union bound over the SNR grid")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--min-samples", type=int, default=2_000)
    p.add_argument("--rel-stderr", type=float, default=0.05)
    p.add_argument("--bins", type=int, default=1 << 22)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write snr,rcu,stderr,samples rows")

    add("dm-stats", cmd_dm_stats, "distribution matcher rate and divergence")

    p = add("crc-search", cmd_crc_search, "rank all generators of the config degree")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--budget", type=int, default=4000, help="frames per candidate")
    p.add_argument("--workers", type=int, default=1)

    p = add("trellis-dump", cmd_trellis_dump, "edge list and label table as CSV")
    p.add_argument("--out", help="write CSV here instead of stdout")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
