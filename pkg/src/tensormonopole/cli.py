"""Command line front end.

    tensormonopole invariant {qt|qt-metric|euler|euler-polar|nodal-ring|dipole|dipole-planes}
    tensormonopole protocol {extract|qt}
    tensormonopole bands scan
    tensormonopole symmetry check

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command line flags.  Results are printed as JSON
(or written to ``--output PREFIX`` as PREFIX.json plus PREFIX.csv).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from importlib import metadata

import numpy as np

from . import invariants as inv
from . import protocol as proto
from .errors import ConfigError, NumericalFailure
from .model import Family, ModelSpec, build_hamiltonian, certify_symmetries

SPEC_VERSION = 1
WORKERS_ENV = "TENSORMONOPOLE_WORKERS"

INVARIANT_KINDS = ("qt", "qt-metric", "euler", "euler-polar", "nodal-ring", "dipole", "dipole-planes")


@dataclass(frozen=True)
class RunConfig:
    family: str = "continuum4d"
    delta: float = 0.0
    offset: float = 0.0
    lambda_sweep: str = ""
    band: str = "1"
    resolution: int = 48
    radius: float = 1.0
    center: str = ""
    extent: float = 12.0
    order: int = 8
    kpar_list: str = "0,0.5,0.8,1.2,1.5,2"
    omega_max_list: str = "6,6,4,4,6,10"
    kz_list: str = "0,2"
    hemisphere: str = "full"
    convention: str = "plane-center"
    velocities: str = "0.5,0.75,1.0,1.25"
    duration: float = 0.1
    gain: float = 0.5
    steps: int = 16
    noise_floor: str = "0"
    points: int = 20
    seed: int = 0
    output: str = ""

    # ---------------------------------------------------------------- parsing helpers
    @staticmethod
    def _floats(name, text):
        try:
            values = [float(x) for x in str(text).split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from exc
        if not all(math.isfinite(v) for v in values):
            raise ConfigError(f"{name}: values must be finite")
        return values

    def validate(self) -> "RunConfig":
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError(f"{f.name}: must be finite, got {value!r}")
        try:
            Family(self.family)
        except ValueError as exc:
            raise ConfigError(f"family: unknown family {self.family!r}; expected one of "
                              f"{[m.value for m in Family]}") from exc
        self.bands()
        if self.resolution < 8:
            raise ConfigError(f"resolution: must be >= 8, got {self.resolution}")
        if self.order < 2 or self.steps < 1 or self.points < 1:
            raise ConfigError("order must be >= 2, steps and points >= 1")
        if self.radius <= 0 or self.extent <= 0 or self.duration <= 0:
            raise ConfigError("radius, extent and duration must be positive")
        if self.hemisphere not in ("full", "upper", "lower"):
            raise ConfigError(f"hemisphere: expected full, upper or lower, got {self.hemisphere!r}")
        if self.convention not in ("plane-center", "continuous"):
            raise ConfigError(f"convention: expected plane-center or continuous, got {self.convention!r}")
        velocities = self.velocity_values()
        if any(v <= 0 for v in velocities):
            raise ConfigError("velocities: every ramp velocity must be positive (a zero velocity is no ramp)")
        if len(velocities) < 3:
            raise ConfigError("velocities: need at least three values for the v² fit")
        if any(not 0 <= f < 0.5 for f in self.noise_floors()):
            raise ConfigError("noise_floor: values must lie in [0, 0.5)")
        self.offsets()
        self.center_values()
        self._floats("kpar_list", self.kpar_list)
        self._floats("omega_max_list", self.omega_max_list)
        self._floats("kz_list", self.kz_list)
        return self

    def spec(self, offset=None) -> ModelSpec:
        return ModelSpec(self.family, self.delta, self.offset if offset is None else offset)

    def bands(self) -> list[int]:
        text = str(self.band).strip()
        if text == "all":
            return [-1, 0, 1]
        try:
            values = [int(x) for x in text.split(",")]
        except ValueError as exc:
            raise ConfigError(f"band: expected -1, 0, 1, a comma list or 'all', got {self.band!r}") from exc
        bad = [b for b in values if b not in (-1, 0, 1)]
        if bad:
            raise ConfigError(f"band: invalid band index {bad[0]}; expected -1, 0 or 1")
        return values

    def offsets(self) -> list[float]:
        if not self.lambda_sweep:
            return [self.offset]
        parts = self.lambda_sweep.split(":")
        if len(parts) != 3:
            raise ConfigError(f"lambda_sweep: expected start:stop:step, got {self.lambda_sweep!r}")
        start, stop, step = self._floats("lambda_sweep", ",".join(parts))
        if step <= 0 or stop < start:
            raise ConfigError("lambda_sweep: need step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]

    def center_values(self) -> list[float] | None:
        if not self.center:
            return None
        return self._floats("center", self.center)

    def velocity_values(self) -> list[float]:
        return self._floats("velocities", self.velocities)

    def noise_floors(self) -> list[float]:
        return self._floats("noise_floor", self.noise_floor)

    def recorded(self) -> dict:
        """Settings that determine the results (the output location does not)."""
        values = asdict(self)
        values.pop("output")
        return values

    def digest(self) -> str:
        canonical = json.dumps(self.recorded(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name, value, where=""):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except ValueError as exc:
        raise ConfigError(f"{where}{name}: cannot parse {value!r} as {kind}") from exc


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; '#' starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        values[key] = _coerce(key, value, f"{path}:{number}: ")
    return values


# --------------------------------------------------------------------------- parallel map


def _workers() -> int:
    text = os.environ.get(WORKERS_ENV, "1")
    try:
        count = int(text)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {text!r}") from exc
    if count < 1:
        raise ConfigError(f"{WORKERS_ENV}: must be >= 1")
    return count


def _map(func, items):
    """Ordered map, in worker processes when requested; results do not depend on scheduling."""
    items = list(items)
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --------------------------------------------------------------------------- commands


def _report_row(report, **extra):
    row = dict(extra)
    row.update({"name": report.name, "band": report.band, "value": report.value, "error": report.error})
    return row


def _qt_task(args):
    cfg, lam, band = args
    spec = ModelSpec(cfg.family, cfg.delta, cfg.offset)
    center = cfg.center_values() or [0.0, 0.0, 0.0, 0.0]
    if len(center) != 4:
        raise ConfigError("center: Q_T needs four components")
    center = list(center)
    center[3] += lam
    return inv.qt_cartesian(spec, cfg.radius, tuple(center), band, cfg.resolution)


def _qt_metric_task(args):
    cfg, lam, band = args
    return inv.qt_metric_route(cfg.spec(), cfg.radius, lam, band, max(cfg.resolution, 8))


def _euler_task(args):
    cfg, kpar, band = args
    return inv.euler_plane(cfg.spec(), kpar, band, cfg.extent, cfg.order, cfg.convention)


def _polar_task(args):
    cfg, kpar, omax, band = args
    return inv.euler_polar_route(cfg.spec(), kpar, omax, band, cfg.order, 16, cfg.convention)


def cmd_invariant(cfg: RunConfig, kind: str):
    bands = cfg.bands()
    rows, reports = [], []
    if kind in ("qt", "qt-metric"):
        if kind == "qt" and Family(cfg.family) is Family.CONTINUUM_3D:
            raise ConfigError("family: Q_T needs a four-dimensional family")
        task = _qt_task if kind == "qt" else _qt_metric_task
        jobs = [(cfg, lam, b) for lam in cfg.offsets() for b in bands]
        for (c, lam, b), rep in zip(jobs, _map(task, jobs)):
            reports.append(rep)
            rows.append(_report_row(rep, offset=lam))
    elif kind == "euler":
        scale = abs(cfg.delta) if cfg.delta else 1.0
        jobs = [(cfg, k * scale, b) for k in cfg._floats("kpar_list", cfg.kpar_list) for b in bands]
        for (c, k, b), rep in zip(jobs, _map(_euler_task, jobs)):
            reports.append(rep)
            rows.append(_report_row(rep, kpar=k, tail=rep.details["tail"]))
    elif kind == "euler-polar":
        kpars = cfg._floats("kpar_list", cfg.kpar_list)
        omax = cfg._floats("omega_max_list", cfg.omega_max_list)
        if len(omax) == 1:
            omax = omax * len(kpars)
        if len(omax) != len(kpars):
            raise ConfigError("omega_max_list: needs one entry per k∥ value (or a single value)")
        omax = [o * abs(cfg.delta) if cfg.delta else o for o in omax]
        kpars_scaled = [k * abs(cfg.delta) if cfg.delta else k for k in kpars]
        jobs = [(cfg, k, o, b) for k, o in zip(kpars_scaled, omax) for b in bands]
        for (c, k, o, b), rep in zip(jobs, _map(_polar_task, jobs)):
            reports.append(rep)
            rows.append(_report_row(rep, kpar=k, omega_max=o, tail=rep.details["tail"]))
    elif kind == "nodal-ring":
        for b in bands:
            rep = inv.nodal_ring_invariant(cfg.spec(), b, extent=cfg.extent, order=cfg.order, convention=cfg.convention)
            reports.append(rep)
            rows.append(_report_row(rep, chi_inside=rep.details["chi_inside"], chi_outside=rep.details["chi_outside"]))
    elif kind == "dipole":
        spec = ModelSpec(Family.CONTINUUM_3D, cfg.delta)
        center = cfg.center_values() or [0.0, 0.0, 0.0]
        if len(center) != 3:
            raise ConfigError("center: dipole spheres need three components")
        for b in bands:
            rep = inv.dipole_sphere(spec, tuple(center), cfg.radius, b, cfg.hemisphere, cfg.resolution)
            reports.append(rep)
            rows.append(_report_row(rep, hemisphere=cfg.hemisphere))
    elif kind == "dipole-planes":
        spec = ModelSpec(Family.CONTINUUM_3D, cfg.delta)
        for kz in cfg._floats("kz_list", cfg.kz_list):
            for b in bands:
                rep = inv.dipole_planes(spec, kz, b, extent=cfg.extent, order=cfg.order, convention=cfg.convention)
                reports.append(rep)
                rows.append(_report_row(rep, kz=kz))
    else:
        raise ConfigError(f"unknown invariant kind {kind!r}")
    return reports, rows


def _ramp_kwargs(cfg):
    return {"velocities": tuple(cfg.velocity_values()), "duration": cfg.duration, "gain": cfg.gain, "steps": cfg.steps}


def cmd_protocol(cfg: RunConfig, kind: str):
    spec = cfg.spec()
    if Family(cfg.family) is not Family.CONTINUUM_4D:
        raise ConfigError("family: the protocol runs on the four-dimensional continuum model")
    bands = cfg.bands()
    if len(bands) != 1 or bands[0] == 0:
        raise ConfigError("band: the protocol needs a single dispersive band (-1 or 1)")
    band = bands[0]
    ramp = _ramp_kwargs(cfg)
    constant = proto.calibrate(spec, band=band, **ramp)
    rows, reports = [], []
    if kind == "extract":
        rng = np.random.default_rng(cfg.seed)
        n = cfg.points
        pts = np.stack([np.full(n, cfg.radius), rng.uniform(0.05, np.pi / 2 - 0.05, n),
                        rng.uniform(0, 2 * np.pi, n), rng.uniform(0, 2 * np.pi, n), np.full(n, cfg.offset)], axis=1)
        noise = proto.ReadoutNoise(cfg.noise_floors()[0], seed=cfg.seed) if cfg.noise_floors()[0] else None
        measured = proto.extract_metric_tensor(spec, pts, constant, band=band, noise=noise, **ramp)
        direct = proto.direct_trace_metric(spec, pts, band)[:, 1:, 1:]
        worst = 0.0
        labels = ("gamma", "theta", "phi")
        for p, m, d in zip(pts, measured, direct):
            scale = np.abs(d).max()
            dev = float(np.abs(m - d).max() / scale)
            worst = max(worst, dev)
            for i in range(3):
                for j in range(i, 3):
                    rows.append({"omega": p[0], "gamma": p[1], "theta": p[2], "phi": p[3],
                                 "pair": f"{labels[i]},{labels[j]}", "protocol": m[i, j], "direct": d[i, j],
                                 "relative_deviation": abs(m[i, j] - d[i, j]) / scale})
        summary = {"calibration": constant, "max_relative_deviation": worst, "points": n}
        return [], rows, summary
    if kind == "qt":
        for floor in cfg.noise_floors():
            noise = proto.ReadoutNoise(floor, seed=cfg.seed) if floor else None
            for lam in cfg.offsets():
                rep = proto.protocol_qt(spec, cfg.radius, lam, band, max(8, min(cfg.resolution, 16)), noise,
                                        constant, **ramp)
                reports.append(rep)
                rows.append(_report_row(rep, offset=lam, noise_floor=floor))
        return reports, rows, {"calibration": constant}
    raise ConfigError(f"unknown protocol kind {kind!r}")


def cmd_bands(cfg: RunConfig):
    if Family(cfg.family) is not Family.TIGHT_BINDING:
        raise ConfigError("family: 'bands scan' needs family = tight-binding")
    offsets = cfg.offsets()
    scans = inv.tb_node_scan(cfg.spec(), offsets, grid=max(cfg.resolution, 8))
    n = cfg.resolution
    axis = -np.pi + 2 * np.pi * np.arange(n) / n
    kz, kw = np.meshgrid(axis, axis, indexing="ij")
    rows = []
    for lam in offsets:
        k = np.stack(np.broadcast_arrays(0.0, 0.0, kz, kw), axis=-1)
        energies = np.linalg.eigvalsh(build_hamiltonian(cfg.spec(lam), k))
        for i in range(n):
            for j in range(n):
                row = {"offset": lam, "kz": kz[i, j], "kw": kw[i, j]}
                row.update({f"E{b}": energies[i, j, b] for b in range(6)})
                rows.append(row)
    summary = [{"offset": s.offset, "nodes": [list(p) for p in s.nodes], "min_gap": s.min_gap} for s in scans]
    return rows, {"node_scan": summary}


def cmd_symmetry(cfg: RunConfig):
    out = []
    for family in Family:
        report = certify_symmetries(ModelSpec(family, cfg.delta, cfg.offset), samples=1000, seed=cfg.seed)
        item = asdict(report)
        item["family"] = family.value
        item["passed"] = report.passed
        out.append(item)
    return out


# --------------------------------------------------------------------------- output


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _format(value):
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def rows_to_csv(rows) -> str:
    if not rows:
        return ""
    buffer = io.StringIO(newline="")
    columns = list(rows[0])
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row.get(c, "")) for c in columns])
    return buffer.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def build_record(cfg: RunConfig, command: list[str], results, summary=None, elapsed=None) -> dict:
    record = {
        "spec_version": SPEC_VERSION,
        "library_version": _version(),
        "command": command,
        "config": cfg.recorded(),
        "config_digest": cfg.digest(),
        "results": results,
    }
    if summary is not None:
        record["summary"] = summary
    if elapsed is not None:
        record["timestamps"] = {"finished_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                                "wall_time_s": elapsed}
    return _jsonable(record)


REQUIRED_KEYS = {"spec_version": int, "library_version": str, "command": list, "config": dict,
                 "config_digest": str, "results": list}


def validate_record(record: dict) -> None:
    """Check the structure of a parsed result record; raises ConfigError if it does not conform."""
    for key, kind in REQUIRED_KEYS.items():
        if not isinstance(record.get(key), kind):
            raise ConfigError(f"record: field {key!r} missing or not a {kind.__name__}")
    if record["spec_version"] != SPEC_VERSION:
        raise ConfigError(f"record: unsupported spec_version {record['spec_version']}")
    cfg = RunConfig(**record["config"]).validate()
    if cfg.digest() != record["config_digest"]:
        raise ConfigError("record: config digest does not match the embedded config")


def _write(record, rows, output):
    text = json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if not output:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(output)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output + ".json", "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    with open(output + ".csv", "w", encoding="utf-8", newline="\n") as handle:
        handle.write(rows_to_csv(rows))


# --------------------------------------------------------------------------- argument parsing


_FLAG_HELP = {
    "family": "continuum4d, continuum3d or tight-binding",
    "delta": "perturbation strength δ",
    "offset": "offset Λ (tight-binding bias, or kw-shift of the integration sphere)",
    "lambda_sweep": "sweep Λ as start:stop:step",
    "band": "band index -1, 0, 1, a comma list, or 'all'",
    "resolution": "mesh points per axis",
    "radius": "sphere radius (Ω for the metric route)",
    "center": "comma-separated sphere centre",
    "extent": "half-width of planar meshes",
    "order": "Gauss–Legendre order per panel for planes",
    "kpar_list": "comma list of k∥ values in units of |δ| (absolute when δ = 0)",
    "omega_max_list": "comma list of disk radii (units of δ) for euler-polar",
    "kz_list": "comma list of plane heights for dipole-planes",
    "hemisphere": "full, upper or lower",
    "convention": "dispersive-band orientation on planes: plane-center or continuous",
    "velocities": "comma list of ramp velocities",
    "duration": "ramp duration T",
    "gain": "counterdiabatic gain λ",
    "steps": "Trotter steps per ramp",
    "noise_floor": "comma list of readout noise floors",
    "points": "number of random sample points",
    "seed": "random seed",
    "output": "write PREFIX.json and PREFIX.csv instead of printing JSON",
}


def _add_common(parser):
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--record-time", action="store_true", help="add timestamps and wall time to the record")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, help=_FLAG_HELP.get(f.name))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensormonopole", description="Tensor-monopole geometry and topology.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("invariant", help="compute a topological invariant")
    p.add_argument("kind", choices=INVARIANT_KINDS)
    _add_common(p)
    p = sub.add_parser("protocol", help="simulate the adiabatic metric measurement")
    p.add_argument("kind", choices=("extract", "qt"))
    _add_common(p)
    p = sub.add_parser("bands", help="tight-binding band grids and node scan")
    p.add_argument("kind", choices=("scan",))
    _add_common(p)
    p = sub.add_parser("symmetry", help="symmetry certificates for every model family")
    p.add_argument("kind", choices=("check",))
    _add_common(p)
    return parser


_COMMAND_DEFAULTS = {
    ("invariant", "euler"): {"delta": 1.0, "band": "0"},
    ("invariant", "euler-polar"): {"delta": 1.0, "band": "0"},
    ("invariant", "nodal-ring"): {"delta": 1.0, "band": "0"},
    ("invariant", "dipole"): {"band": "0"},
    ("invariant", "dipole-planes"): {"delta": 1.0, "band": "0"},
    ("bands", "scan"): {"family": "tight-binding", "resolution": 64},
}


def make_config(args) -> RunConfig:
    values = dict(_COMMAND_DEFAULTS.get((args.command, args.kind), {}))
    if args.config:
        values.update(read_config(args.config))
    for f in fields(RunConfig):
        flag = getattr(args, f.name)
        if flag is not None:
            values[f.name] = _coerce(f.name, flag, "--")
    return RunConfig(**values).validate()


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = make_config(args)
        summary = None
        if args.command == "invariant":
            reports, rows = cmd_invariant(cfg, args.kind)
            results = [r.to_dict(args.record_time) for r in reports]
        elif args.command == "protocol":
            reports, rows, summary = cmd_protocol(cfg, args.kind)
            results = [r.to_dict(args.record_time) for r in reports] if reports else rows
        elif args.command == "bands":
            rows, summary = cmd_bands(cfg)
            results = summary.pop("node_scan")
        else:
            results = cmd_symmetry(cfg)
            rows = results
        elapsed = time.perf_counter() - start if args.record_time else None
        record = build_record(cfg, [args.command, args.kind], results, summary, elapsed)
        _write(record, rows, cfg.output)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
