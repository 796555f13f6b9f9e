"""Command-line front end.

Exit codes: 0 success, 1 operational error, 2 bound violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import operators as ops
from .channels import (
    family_cnot_ab_alpha,
    family_cnotab_alpha_swap,
    family_cnotba_cnotab,
    family_swap_alpha,
    marginal_channels,
)
from .cups import (
    MIXED_ANCILLA,
    PURE_ANCILLA,
    CupSample,
    Family,
    Variant,
    band_limits,
    cup_from_unitary,
    fit_depolarizing,
    generate_cupset,
    parameter_grid,
)
from .errors import CupsetError, FitError
from .sim.circuit import NoiseModel
from .sim.protocols import (
    estimate_cup_direct_choi,
    estimate_cup_direct_complementarity,
    marginal_channel_circuit,
    run_efficient_urb,
    run_extremal_set,
    run_interleaved_urb,
)
from .unitarity import spectral_variational

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2

FAMILY_NAMES = {
    "swap-alpha": Family.SWAP_ALPHA,
    "cnot-alpha": Family.CNOT_ALPHA,
    "cnotba-cnotab": Family.CNOT_BA_CNOT_AB,
    "cnot-rev": Family.CNOT_ALPHA_REV,
    "fig3-grid": Family.FIG3_GRID,
    "fig8-grid": Family.FIG8_GRID,
    "haar": Family.HAAR_RANDOM,
    "pauli-hiding": Family.PAULI_HIDING,
}
VARIANT_NAMES = {
    "isometric": Variant.ISOMETRIC,
    "reversible": Variant.REVERSIBLE,
    "full": Variant.FULL,
    "classical-isometric": Variant.ISOMETRIC,
    "classical-reversible": Variant.REVERSIBLE,
    "classical-full": Variant.FULL,
}
PIPELINES = ("swap-complementarity", "swap-choi", "irb", "irb-efficient", "spectral")
BOUNDARY_UNITARIES: dict[str, Callable[[float], np.ndarray]] = {
    "swap-alpha": family_swap_alpha,
    "cnot-alpha": family_cnot_ab_alpha,
    "cnotba-cnotab": family_cnotba_cnotab,
    "cnot-rev": family_cnotab_alpha_swap,
}

CUPSET_HEADER = [
    "family", "variant", "p1", "p2", "p3", "d_x", "d_a", "d_b",
    "u", "ubar", "band_lower", "band_upper", "in_band",
]
PROTOCOL_HEADER = [
    "family", "variant", "pipeline", "alpha", "u_est", "ubar_est", "u_stderr", "ubar_stderr",
    "u_ideal", "ubar_ideal", "status",
]
FIT_HEADER = ["family", "variant", "rows", "p_A", "p_B", "residual"]


@dataclass
class RunConfig:
    command: str = "cupset"
    dims: tuple = (2, 2, 2)
    family: str = "swap-alpha"
    variant: str = "isometric"
    points: int = 50
    pipeline: str = "irb-efficient"
    lengths: tuple = tuple(range(1, 11))
    sequences: int = 10
    settings: int = 100
    noise: NoiseModel = field(default_factory=NoiseModel)
    out: str | None = None
    format: str = "csv"
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["lengths"] = list(self.lengths)
        d["noise"] = self.noise.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "noise" in data:
            data["noise"] = NoiseModel.from_dict(data["noise"])
        for key in ("dims", "lengths"):
            if key in data:
                data[key] = tuple(int(v) for v in data[key])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


# -- formatting -------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(f"{float(value):.12g}")
        return v if np.isfinite(v) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def render(rows: Sequence[dict], header: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        records = [{k: _json_value(r.get(k)) for k in header} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_fmt(r.get(k)) for k in header])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CUPSET_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- cupset -------------------------------------------------------------------------


def _cupset_rows(cfg: RunConfig) -> list[dict]:
    classical = cfg.variant.startswith("classical")
    variant = VARIANT_NAMES[cfg.variant]
    family = Family.CLASSICAL_ENUM if classical else FAMILY_NAMES[cfg.family]
    samples = generate_cupset(variant, family, cfg.points, cfg.dims, ops.make_rng(cfg.seed))
    rows = []
    for s in samples:
        if classical:
            lo, hi = 0.0, 2.0
        elif s.variant is Variant.ISOMETRIC:
            lo, hi = band_limits(s.dims)
        else:
            lo, hi = 0.0, 1.0
        total = s.u + s.ubar
        params = list(s.params) + [None] * (3 - len(s.params))
        rows.append(
            {
                "family": "classical" if classical else cfg.family,
                "variant": s.variant.value,
                "p1": params[0], "p2": params[1], "p3": params[2],
                "d_x": s.dims[0], "d_a": s.dims[1], "d_b": s.dims[2],
                "u": s.u, "ubar": s.ubar,
                "band_lower": lo, "band_upper": hi,
                "in_band": bool(lo - 1e-9 <= total <= hi + 1e-9),
            }
        )
    return rows


def cmd_cupset(cfg: RunConfig) -> int:
    rows = _cupset_rows(cfg)
    _emit(render(rows, CUPSET_HEADER, cfg.format), cfg.out)
    return EXIT_VIOLATION if any(not r["in_band"] for r in rows) else EXIT_OK


# -- protocol -----------------------------------------------------------------------


def _protocol_point(cfg: RunConfig, alpha: float, seed: np.random.SeedSequence) -> dict:
    u_ab = BOUNDARY_UNITARIES[cfg.family](alpha)
    variant = VARIANT_NAMES[cfg.variant]
    ancilla = "pure" if variant is Variant.ISOMETRIC else "mixed"
    anc_state = PURE_ANCILLA if ancilla == "pure" else MIXED_ANCILLA
    ideal = cup_from_unitary(u_ab, anc_state)
    rng = ops.make_rng(seed)
    noise = cfg.noise
    row = {
        "family": cfg.family, "variant": variant.value, "pipeline": cfg.pipeline, "alpha": alpha,
        "u_ideal": ideal[0], "ubar_ideal": ideal[1], "status": "ok",
    }
    try:
        if cfg.pipeline == "swap-complementarity":
            if ancilla != "pure":
                raise ValueError("the complementarity pipeline needs a pure ancilla")
            s = estimate_cup_direct_complementarity(u_ab, noise, rng)
            est = (s.u, s.ubar, s.u_stderr, s.ubar_stderr)
        elif cfg.pipeline == "swap-choi":
            s = estimate_cup_direct_choi(u_ab, ancilla, noise, rng)
            est = (s.u, s.ubar, s.u_stderr, s.ubar_stderr)
        elif cfg.pipeline in ("irb", "irb-efficient"):
            fits = []
            for target in ("E", "Ebar"):
                if cfg.pipeline == "irb":
                    fits.append(
                        run_interleaved_urb(u_ab, target, cfg.lengths, cfg.sequences, noise, ancilla=ancilla, rng=rng)
                    )
                else:
                    circ = marginal_channel_circuit(u_ab, target, ancilla)
                    fits.append(run_efficient_urb(circ, cfg.lengths, cfg.sequences, noise, rng=rng))
            est = (fits[0].s, fits[1].s, fits[0].s_stderr, fits[1].s_stderr)
        elif cfg.pipeline == "spectral":
            e, ebar = marginal_channels(u_ab, 2, 2, anc_state)
            a = spectral_variational(e, cfg.settings, rng)
            b = spectral_variational(ebar, cfg.settings, rng)
            est = (a.value, b.value, 0.0, 0.0)
        else:
            raise ValueError(f"unknown pipeline {cfg.pipeline!r}")
    except FitError as exc:
        row.update(u_est=float("nan"), ubar_est=float("nan"), u_stderr=float("nan"), ubar_stderr=float("nan"))
        row["status"] = f"fit_error: {exc}"
        return row
    row.update(u_est=est[0], ubar_est=est[1], u_stderr=est[2], ubar_stderr=est[3])
    return row


def protocol_rows(cfg: RunConfig) -> list[dict]:
    if cfg.family not in BOUNDARY_UNITARIES:
        raise ValueError(f"protocol runs need a boundary family, one of {sorted(BOUNDARY_UNITARIES)}")
    if cfg.pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {cfg.pipeline!r}")
    alphas = parameter_grid(cfg.points)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(alphas))
    return _parallel_map(lambda job: _protocol_point(cfg, *job), list(zip(alphas, seeds)))


def cmd_protocol(cfg: RunConfig) -> int:
    rows = protocol_rows(cfg)
    _emit(render(rows, PROTOCOL_HEADER, cfg.format), cfg.out)
    return EXIT_ERROR if rows and all(r["status"] != "ok" for r in rows) else EXIT_OK


def extremal_rows(cfg: RunConfig) -> list[dict]:
    method = cfg.pipeline if cfg.pipeline in ("irb", "irb-efficient") else "irb-efficient"
    runs = run_extremal_set(method, cfg.lengths, cfg.sequences, cfg.noise, ops.make_rng(cfg.seed))
    return [
        {"unitary": r.name, "target": r.target, "ideal": r.ideal, "s": r.fit.s, "s_stderr": r.fit.s_stderr}
        for r in runs
    ]


def cmd_extremal(cfg: RunConfig) -> int:
    rows = extremal_rows(cfg)
    _emit(render(rows, ["unitary", "target", "ideal", "s", "s_stderr"], cfg.format), cfg.out)
    return EXIT_OK


# -- fit ----------------------------------------------------------------------------


def _read_table(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        if path.endswith(".json"):
            return json.load(fh)
        return list(csv.DictReader(fh))


def _pick(row: dict, *names) -> float:
    for name in names:
        if name in row and row[name] not in ("", None):
            return float(row[name])
    raise KeyError(f"none of the columns {names} present")


def _surface_key(row: dict) -> tuple:
    return (row.get("family", ""), row.get("variant", ""))


def _param_key(row: dict) -> tuple:
    return tuple(str(row.get(k, "")) for k in ("alpha", "p1", "p2", "p3"))


def fit_rows(noisy_path: str, ideal_path: str | None) -> list[dict]:
    noisy = _read_table(noisy_path)
    ideal = _read_table(ideal_path) if ideal_path else noisy
    if len(noisy) != len(ideal) or not noisy:
        raise ValueError("noisy and ideal tables are not aligned")
    groups: dict[tuple, tuple[list, list]] = {}
    for rn, ri in zip(noisy, ideal):
        if ideal_path and (_param_key(rn) != _param_key(ri) or _surface_key(rn) != _surface_key(ri)):
            raise ValueError("noisy and ideal rows are not aligned")
        try:
            sn = CupSample(_pick(rn, "u_est", "u"), _pick(rn, "ubar_est", "ubar"))
            if ideal_path:
                si = CupSample(_pick(ri, "u_ideal", "u"), _pick(ri, "ubar_ideal", "ubar"))
            else:
                si = CupSample(_pick(ri, "u_ideal"), _pick(ri, "ubar_ideal"))
        except ValueError:
            continue  # rows with failed estimates carry NaN-free blanks
        if not (np.isfinite(sn.u) and np.isfinite(sn.ubar)):
            continue
        g = groups.setdefault(_surface_key(rn), ([], []))
        g[0].append(sn)
        g[1].append(si)
    out = []
    for (fam, var), (ns, ids) in groups.items():
        fit = fit_depolarizing(ns, ids)
        out.append({"family": fam, "variant": var, "rows": len(ns), "p_A": fit.p_A, "p_B": fit.p_B, "residual": fit.residual})
    return out


def cmd_fit(cfg: RunConfig, noisy_csv: str, ideal_csv: str | None) -> int:
    rows = fit_rows(noisy_csv, ideal_csv)
    text = render(rows, FIT_HEADER, cfg.format)
    if cfg.out is not None:
        _emit(text, cfg.out)
    sys.stdout.write(text if cfg.out is None else render(rows, FIT_HEADER, "csv"))
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def _parse_dims(text: str) -> tuple:
    dims = tuple(int(v) for v in text.replace("x", ",").split(","))
    if len(dims) != 3:
        raise argparse.ArgumentTypeError("dims are d_X,d_A,d_B")
    return dims


def _parse_lengths(text: str) -> tuple:
    if "-" in text and "," not in text:
        lo, hi = (int(v) for v in text.split("-"))
        return tuple(range(lo, hi + 1))
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cupsets", description="Compatible unitarity pair toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, family_default, points_default):
        p.add_argument("--config", help="JSON RunConfig; explicit flags override it")
        p.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
        p.add_argument("--variant", choices=sorted(VARIANT_NAMES))
        p.add_argument("--family", choices=sorted(FAMILY_NAMES))
        p.add_argument("--points", type=int)
        p.add_argument("--dims", type=_parse_dims)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.set_defaults(family_default=family_default, points_default=points_default)

    def sim_flags(p):
        p.add_argument("--noise", help="NoiseModel JSON file or inline JSON")
        p.add_argument("--shots", type=int)
        p.add_argument("--sequences", type=int)
        p.add_argument("--lengths", type=_parse_lengths, help="e.g. 1-10 or 1,2,4,8")

    p_cup = sub.add_parser("cupset", help="generate CUP-set samples and check bounds")
    common(p_cup, "swap-alpha", 50)

    p_proto = sub.add_parser("protocol", help="simulate an estimation pipeline on a boundary family")
    common(p_proto, "swap-alpha", 9)
    sim_flags(p_proto)
    p_proto.add_argument("--pipeline", choices=PIPELINES)
    p_proto.add_argument("--settings", type=int, help="random settings for the spectral pipeline")

    p_ext = sub.add_parser("extremal", help="the six experiments at (1,0), (0,1) and (1/3,1/3)")
    common(p_ext, "swap-alpha", 0)
    sim_flags(p_ext)
    p_ext.add_argument("--pipeline", choices=("irb", "irb-efficient"))

    p_fit = sub.add_parser("fit", help="fit local depolarizing strengths to noisy CUP data")
    common(p_fit, "swap-alpha", 0)
    p_fit.add_argument("noisy", help="CSV/JSON with u,ubar or u_est,ubar_est columns")
    p_fit.add_argument("ideal", nargs="?", help="aligned ideal table; defaults to the *_ideal columns")
    return parser


def _load_noise(text: str) -> NoiseModel:
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    return NoiseModel.from_json(text)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = RunConfig.from_json(fh.read())
    else:
        cfg = RunConfig(family=args.family_default, points=args.points_default)
    cfg.command = args.command
    for key in ("variant", "family", "points", "dims", "seed", "out", "format", "pipeline", "sequences",
                "lengths", "settings"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "noise", None):
        cfg.noise = _load_noise(args.noise)
    if getattr(args, "shots", None):
        cfg.noise = cfg.noise.with_(shots=args.shots)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            sys.stdout.write(cfg.to_json() + "\n")
            return EXIT_OK
        if cfg.command == "cupset":
            return cmd_cupset(cfg)
        if cfg.command == "protocol":
            return cmd_protocol(cfg)
        if cfg.command == "extremal":
            return cmd_extremal(cfg)
        return cmd_fit(cfg, args.noisy, args.ideal)
    except (CupsetError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
