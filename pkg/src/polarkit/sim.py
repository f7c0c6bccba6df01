"""Monte Carlo sweeps over a BPSK/AWGN channel.

Frames are numbered 0, 1, 2, ...; frame k draws its payload and noise
from a generator seeded by (master seed, k) only, so a frame's channel
realization is identical across Eb/N0 points, decoders, and worker
counts.  Frames are counted in fixed-size batches in index order and
the stop rule is evaluated on whole batches, which makes every counter
independent of scheduling.

Frame errors compare re-encoded payload bits only; appended CRC bits do
not count.  Latency counters average over all simulated frames.
"""

from __future__ import annotations

import csv
import json
import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .codes import CodeSpec, channel_llr, encode
from .gaussian import TaConfig, build_ta_config, compute_means, min_c
from .sc import decode_sc
from .srfsc import decode_srfsc
from .ta import decode_multistage, decode_ta_srfsc
from .tree import identify_sr_cover

__all__ = [
    "DECODERS",
    "StopRule",
    "SweepPoint",
    "PointResult",
    "ebno_to_sigma",
    "awgn_channel",
    "resolve_workers",
    "run_point",
    "run_sweep",
    "emit_report",
    "CSV_FIELDS",
]

DECODERS = ("sc", "srfsc", "ta", "multistage")

CSV_FIELDS = (
    "ebno_db",
    "frames",
    "frame_errors",
    "bler",
    "avg_steps",
    "avg_cycles",
    "p_redecode",
    "avg_comparisons",
    "seed",
)


@dataclass(frozen=True)
class StopRule:
    min_errors: int = 100
    max_frames: int = 10**6

    def __post_init__(self):
        if self.min_errors < 1 or self.max_frames < 1:
            raise ValueError("stop rule bounds must be positive")


@dataclass(frozen=True)
class SweepPoint:
    ebno_db: float
    sigma: float
    frames: int
    frame_errors: int
    bler: float
    avg_steps: float
    avg_cycles: float
    p_redecode: float
    avg_comparisons: float
    seed: int


@dataclass(frozen=True)
class PointResult:
    point: SweepPoint
    error_frames: tuple[int, ...] = ()


def ebno_to_sigma(ebno_db: float, rate: float) -> float:
    """Noise deviation for a given energy-per-bit ratio; CRC bits count
    toward the rate."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0)))


def awgn_channel(x: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Channel LLRs of a codeword sent as (-1)^x through noise of
    deviation sigma."""
    x = np.asarray(x)
    y = (1.0 - 2.0 * x.astype(np.float64)) + sigma * rng.standard_normal(x.size)
    return channel_llr(y, sigma)


@dataclass(frozen=True)
class _PointTask:
    spec: CodeSpec
    decoder: str
    sigma: float
    seed: int
    mode: str
    pe: int
    overhead: int
    cover: tuple = ()
    ta: TaConfig | None = None
    record_errors: bool = False


def _simulate_batch(task: _PointTask, start: int, count: int):
    spec = task.spec
    info_len = spec.info_length
    cover = {d.owner: d for d in task.cover} if task.cover else {}
    errors = steps = cycles = comps = redecodes = 0
    err_frames: list[int] = []
    for idx in range(start, start + count):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=task.seed, spawn_key=(idx,))
        )
        payload = rng.integers(0, 2, size=info_len, dtype=np.uint8)
        frame = encode(spec, payload)
        llr = awgn_channel(frame.x, task.sigma, rng)
        if task.decoder == "sc":
            u_hat, rep = decode_sc(spec, llr, mode=task.mode, pe=task.pe)
            steps += rep.time_steps
            cycles += rep.cycles
        elif task.decoder == "srfsc":
            u_hat, rep = decode_srfsc(
                spec, cover, llr, mode=task.mode, pe=task.pe, overhead=task.overhead
            )
            steps += rep.time_steps
            cycles += rep.cycles
        elif task.decoder == "ta":
            out = decode_ta_srfsc(
                spec, cover, task.ta, llr, mode=task.mode, pe=task.pe, overhead=task.overhead
            )
            u_hat = out.u_hat
            steps += out.time_steps
            cycles += out.cycles
            comps += out.comparisons
        else:
            out = decode_multistage(
                spec, cover, task.ta, llr, mode=task.mode, pe=task.pe, overhead=task.overhead
            )
            u_hat = out.u_hat
            steps += out.time_steps
            cycles += out.cycles
            comps += out.first.comparisons
            redecodes += int(out.attempts == 2)
        if not np.array_equal(u_hat[spec.info_positions][:info_len], payload):
            errors += 1
            if task.record_errors:
                err_frames.append(idx)
    return count, errors, steps, cycles, comps, redecodes, tuple(err_frames)


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("POLARKIT_WORKERS", "")
    if env:
        return max(1, int(env))
    return 1


def _prepare_task(
    spec: CodeSpec,
    decoder: str,
    sigma: float,
    seed: int,
    mode: str,
    pe: int,
    overhead: int,
    epsilon: float | None,
    c: float | None,
    record_errors: bool,
) -> _PointTask:
    if decoder not in DECODERS:
        raise ValueError(f"unknown decoder {decoder!r}")
    needs_eps = decoder in ("ta", "multistage")
    if needs_eps and epsilon is None:
        raise ValueError(f"decoder {decoder!r} requires epsilon")
    if not needs_eps and epsilon is not None:
        raise ValueError(f"decoder {decoder!r} does not accept epsilon")
    if decoder == "multistage" and spec.crc is None:
        raise ValueError("multistage decoding requires a CRC-bearing spec")
    cover: tuple = ()
    ta_cfg = None
    if decoder != "sc":
        cover = tuple(identify_sr_cover(spec))
    if needs_eps:
        table = compute_means(spec.n, sigma)
        ta_cfg = build_ta_config(table, epsilon, c if c is not None else min_c(epsilon, spec.n))
    return _PointTask(
        spec=spec,
        decoder=decoder,
        sigma=sigma,
        seed=seed,
        mode=mode,
        pe=pe,
        overhead=overhead,
        cover=cover,
        ta=ta_cfg,
        record_errors=record_errors,
    )


def run_point(
    spec: CodeSpec,
    decoder: str,
    ebno_db: float,
    stop: StopRule | None = None,
    seed: int = 0,
    mode: str = "minsum",
    pe: int = 64,
    overhead: int = 0,
    epsilon: float | None = None,
    c: float | None = None,
    workers: int | None = None,
    batch: int = 256,
    record_errors: bool = False,
) -> PointResult:
    """Simulate one Eb/N0 point until the stop rule fires on a batch
    boundary."""
    if batch < 1:
        raise ValueError("batch must be positive")
    stop = stop or StopRule()
    sigma = ebno_to_sigma(ebno_db, spec.rate)
    task = _prepare_task(
        spec, decoder, sigma, seed, mode, pe, overhead, epsilon, c, record_errors
    )
    nworkers = resolve_workers(workers)

    frames = errors = steps = cycles = comps = redecodes = 0
    err_frames: list[int] = []

    def consume(result) -> bool:
        nonlocal frames, errors, steps, cycles, comps, redecodes
        frames += result[0]
        errors += result[1]
        steps += result[2]
        cycles += result[3]
        comps += result[4]
        redecodes += result[5]
        err_frames.extend(result[6])
        return errors >= stop.min_errors or frames >= stop.max_frames

    if nworkers == 1:
        start = 0
        while True:
            count = min(batch, stop.max_frames - start)
            if consume(_simulate_batch(task, start, count)):
                break
            start += count
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            pending: deque = deque()
            scheduled = 0
            done = False
            while not done:
                while len(pending) < nworkers and scheduled < stop.max_frames:
                    count = min(batch, stop.max_frames - scheduled)
                    pending.append(pool.submit(_simulate_batch, task, scheduled, count))
                    scheduled += count
                if not pending:
                    break
                if consume(pending.popleft().result()):
                    done = True
            for fut in pending:
                fut.cancel()

    point = SweepPoint(
        ebno_db=ebno_db,
        sigma=sigma,
        frames=frames,
        frame_errors=errors,
        bler=errors / frames,
        avg_steps=steps / frames,
        avg_cycles=cycles / frames,
        p_redecode=redecodes / frames,
        avg_comparisons=comps / frames,
        seed=seed,
    )
    return PointResult(point=point, error_frames=tuple(err_frames))


def run_sweep(
    spec: CodeSpec,
    decoder: str,
    ebno_list,
    stop: StopRule | None = None,
    seed: int = 0,
    **kwargs,
) -> list[SweepPoint]:
    """One SweepPoint per Eb/N0 value, simulated independently."""
    ebno_list = list(ebno_list)
    if not ebno_list:
        raise ValueError("ebno_list must be nonempty")
    return [
        run_point(spec, decoder, ebno, stop=stop, seed=seed, **kwargs).point
        for ebno in ebno_list
    ]


def _sigfig(value: float) -> float:
    return float(f"{value:.6g}")


def emit_report(points: list[SweepPoint], path: str, format: str = "csv") -> None:
    """Write a sweep as CSV or JSON; the file appears atomically."""
    if not points:
        raise ValueError("no points to report")
    if format not in ("csv", "json"):
        raise ValueError(f"unknown report format {format!r}")
    tmp = f"{path}.tmp"
    if format == "csv":
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_FIELDS)
            for p in points:
                writer.writerow(
                    [
                        _sigfig(p.ebno_db),
                        p.frames,
                        p.frame_errors,
                        _sigfig(p.bler),
                        _sigfig(p.avg_steps),
                        _sigfig(p.avg_cycles),
                        _sigfig(p.p_redecode),
                        _sigfig(p.avg_comparisons),
                        p.seed,
                    ]
                )
    else:
        payload = []
        for p in points:
            record = {name: getattr(p, name) for name in CSV_FIELDS}
            record["sigma"] = p.sigma
            for key, value in record.items():
                if isinstance(value, float):
                    record[key] = _sigfig(value)
            payload.append(record)
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    os.replace(tmp, path)
