"""Command-line interface: ``pencil {check,critical,fiber,monodromy,verify,report} SPEC``.

Every command prints one deterministic JSON document
``{schema_version, spec_hash, seed, tolerances, conventions, stages}``;
wall-clock timings go to a sidecar file (``--out PATH`` writes
``PATH.timings.json``) or to stderr.  Expensive stages are cached under a
content-addressed key.

Exit codes: 0 pass, 1 fail, 2 usage or parse error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import Inconclusive, PencilError, SpecError
from .genericity import PencilSpec, check_genericity
from .monodromy import INF, choose_base_value, compute_monodromy, STEP_FRACTION, INTEGRALITY
from .fiber import build_fiber
from .numsolve import TrackerConfig
from .theorems import CHECK_NAMES, DEFAULT_MAX_STATES, DEFAULT_MAX_WORD, FAIL, PASS, verify_payload

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on older interpreters
    import tomli as tomllib

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

CONVENTIONS = {
    "matrix_action": "matrices act on column coordinate vectors in the base fiber basis",
    "loop_composition": "loop g1 followed by g2 has matrix M(g2) M(g1)",
    "loop_order": "counterclockwise by initial direction from the base value; product M_n ... M_1 = I",
    "infinity_loop": "clockwise large circle reached along the outward ray through the base value",
    "basis": "symplectic pairs (a_k, b_k) with <a_k, b_k> = +1, then puncture classes",
    "intersection_sign": "complex orientation of the fiber",
    "vanishing_cycle_sign": "primitive, first nonzero entry positive",
    "picard_lefschetz_sign": -1,
    "matrix_layout": "row-major integer arrays",
}


class UsageError(Exception):
    """Bad input file or flags (exit code 2)."""


def load_spec(path: str | os.PathLike) -> PencilSpec:
    """Read a pencil from a JSON or TOML file (chosen by extension, JSON otherwise)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            cfg = tomllib.loads(text)
        else:
            cfg = json.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("configuration must be a mapping")
    try:
        return PencilSpec.from_config(cfg)
    except (SpecError, ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid pencil: {exc}") from exc


@dataclass
class RunConfig:
    spec_path: str
    seed: int = 0
    precision: str = "double"
    tol_scale: float = 1.0
    checks: tuple = CHECK_NAMES
    force: bool = False
    cache_dir: str | None = None
    svg_out: str | None = None
    out: str | None = None
    max_states: int = DEFAULT_MAX_STATES
    max_word: int = DEFAULT_MAX_WORD
    spec: PencilSpec | None = field(default=None, repr=False)

    @property
    def tracker(self) -> TrackerConfig:
        return TrackerConfig().scaled(self.tol_scale)

    def tolerances(self) -> dict:
        t = self.tracker
        return {
            "tol_scale": self.tol_scale,
            "precision": self.precision,
            "tracker": {"initial_step": t.initial_step, "min_step": t.min_step, "newton_tol": t.newton_tol,
                        "safety": t.safety, "max_iter": t.max_iter},
            "transport_step_fraction": STEP_FRACTION,
            "integrality_gap": INTEGRALITY,
            "orbit_budget": {"max_states": self.max_states, "max_word": self.max_word},
        }


def spec_hash(spec: PencilSpec) -> str:
    return hashlib.sha256(spec.canonical().encode()).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


class Cache:
    """Content-addressed store of stage payloads with atomic writes."""

    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None

    def key(self, cfg: RunConfig, stage: str) -> str:
        material = json.dumps({"spec": cfg.spec.canonical(), "seed": cfg.seed, "tolerances": cfg.tolerances(),
                               "stage": stage, "schema": SCHEMA_VERSION, "version": __version__},
                              sort_keys=True)
        return hashlib.sha256(material.encode()).hexdigest()

    def get(self, key: str):
        if self.dir is None:
            return None
        path = self.dir / f"{key}.json"
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
        except json.JSONDecodeError:
            return None
        if not isinstance(entry, dict) or entry.get("schema_version") != SCHEMA_VERSION:
            return None
        return entry.get("payload")

    def put(self, key: str, stage: str, payload) -> None:
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        entry = {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "stage": stage, "payload": payload}
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(dumps(entry))
        os.replace(tmp, self.dir / f"{key}.json")


class Pipeline:
    """Lazily computed, cached stages for one run configuration."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.cache = Cache(cfg.cache_dir)
        self.timings: dict[str, float] = {}
        self.cache_hits: dict[str, bool] = {}
        self._payloads: dict[str, object] = {}
        self._crit = None

    def _stage(self, name: str, compute):
        if name in self._payloads:
            return self._payloads[name]
        t0 = time.perf_counter()
        key = self.cache.key(self.cfg, name)
        payload = self.cache.get(key)
        self.cache_hits[name] = payload is not None
        if payload is None:
            payload = json.loads(json.dumps(compute()))
            self.cache.put(key, name, payload)
        self.timings[name] = time.perf_counter() - t0
        self._payloads[name] = payload
        return payload

    def _genericity_objects(self):
        if self._crit is None:
            report, crit = check_genericity(self.cfg.spec, self.cfg.seed, self.cfg.precision)
            self._crit = (report, crit)
        return self._crit

    def has_critical(self) -> bool:
        """Whether critical-point data exists (it does not when genericity fails early)."""
        if "critical" in self._payloads or self.cache.get(self.cache.key(self.cfg, "critical")) is not None:
            return True
        return self._genericity_objects()[1] is not None

    def genericity(self):
        return self._stage("genericity", lambda: self._genericity_objects()[0].to_json())

    def critical(self):
        return self._stage("critical", lambda: self._genericity_objects()[1].to_json())

    def _targets(self):
        crit = self._genericity_objects()[1]
        return list(crit.values) + ([0.0] if 0 in crit.A else [])

    def fiber(self):
        def compute():
            crit = self._genericity_objects()[1]
            b = choose_base_value(self._targets(), seed=self.cfg.seed)
            model = build_fiber(self.cfg.spec, b, seed=self.cfg.seed * 7919, base_points=list(crit.base_points),
                                cfg=self.cfg.tracker)
            return model.summary()

        return self._stage("fiber", compute)

    def monodromy(self):
        def compute():
            crit = self._genericity_objects()[1]
            rep = compute_monodromy(self.cfg.spec, crit, seed=self.cfg.seed, cfg=self.cfg.tracker)
            out = rep.to_json()
            out["paths"] = {
                "targets": [t if t == INF else [complex(t).real, complex(t).imag] for t in rep.pathsys.targets],
                "loops": [[[complex(z).real, complex(z).imag] for z in loop] for loop in rep.pathsys.loops],
            }
            out["transport"] = {k: v for k, v in rep.stats.items() if k != "seconds"}
            return out

        return self._stage("monodromy", compute)

    def verify(self):
        mono = self.monodromy()
        t0 = time.perf_counter()
        rep = verify_payload(mono, self.cfg.spec.p, self.cfg.checks, self.cfg.max_states, self.cfg.max_word)
        self.timings["verify"] = time.perf_counter() - t0
        return rep.to_json()


def document(cfg: RunConfig, stages: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "spec_hash": spec_hash(cfg.spec),
        "seed": cfg.seed,
        "tolerances": cfg.tolerances(),
        "conventions": CONVENTIONS,
        "stages": stages,
    }


# ---------------------------------------------------------------------------
# SVG


def render_svg(mono: dict, size: int = 640) -> str:
    """SVG 1.1 drawing of the targets (one marker each) and their loops (one path each)."""
    targets = mono["paths"]["targets"]
    loops = mono["paths"]["loops"]
    pts = [tuple(z) for loop in loops for z in loop]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9) * 1.1
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2

    def tr(x, y):
        return (size / 2 + (x - cx) / span * size, size / 2 - (y - cy) / span * size)

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    for loop in loops:
        d = " ".join(("M" if k == 0 else "L") + "{:.2f},{:.2f}".format(*tr(*z)) for k, z in enumerate(loop))
        lines.append(f'<path class="loop" d="{d}" fill="none" stroke="steelblue" stroke-width="1"/>')
    bx, by = tr(*mono["b"])
    lines.append(f'<rect class="base" x="{bx - 3:.2f}" y="{by - 3:.2f}" width="6" height="6" fill="black"/>')
    for t, loop in zip(targets, loops):
        if t == INF:
            # marked where the outward ray meets the large circle
            k = max(range(len(loop)), key=lambda i: abs(complex(*loop[i])))
            mx, my = tr(*loop[k])
            lines.append(f'<circle class="target" cx="{mx:.2f}" cy="{my:.2f}" r="4" fill="darkorange"/>')
            lines.append(f'<text x="{mx + 6:.2f}" y="{my:.2f}" font-size="12">inf</text>')
        else:
            mx, my = tr(*t)
            lines.append(f'<circle class="target" cx="{mx:.2f}" cy="{my:.2f}" r="4" fill="crimson"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _status_exit(status: str) -> int:
    return {PASS: EXIT_PASS, FAIL: EXIT_FAIL}.get(status, EXIT_INCONCLUSIVE)


def run(cfg: RunConfig, command: str) -> tuple[dict, dict, int]:
    """Execute one command; returns ``(document, timings, exit_code)``."""
    pipe = Pipeline(cfg)
    stages: dict = {}
    code = EXIT_PASS
    gen = pipe.genericity()
    stages["genericity"] = gen
    if command in ("check", "critical"):
        if pipe.has_critical():
            stages["critical"] = pipe.critical()
        code = EXIT_PASS if gen["passed"] else EXIT_FAIL
    else:
        if not gen["passed"] and not cfg.force:
            code = EXIT_FAIL
        elif command == "fiber":
            stages["fiber"] = pipe.fiber()
        elif command == "monodromy":
            stages["critical"] = pipe.critical()
            stages["monodromy"] = pipe.monodromy()
            if cfg.svg_out:
                Path(cfg.svg_out).write_text(render_svg(stages["monodromy"]))
        elif command == "verify":
            stages["verify"] = pipe.verify()
            code = _status_exit(stages["verify"]["status"])
        elif command == "report":
            stages["critical"] = pipe.critical()
            stages["fiber"] = pipe.fiber()
            stages["monodromy"] = pipe.monodromy()
            stages["verify"] = pipe.verify()
            if cfg.svg_out:
                Path(cfg.svg_out).write_text(render_svg(stages["monodromy"]))
            code = _status_exit(stages["verify"]["status"])
    timings = {"seconds": pipe.timings, "cache_hits": pipe.cache_hits}
    return document(cfg, stages), timings, code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencil", description="Monodromy of pencils F^p - b G^q = 0 in P^2.")
    ap.add_argument("command", choices=["check", "critical", "fiber", "monodromy", "verify", "report"])
    ap.add_argument("spec", help="pencil description (.json or .toml)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--precision", choices=["double", "double-double"], default="double")
    ap.add_argument("--tol-scale", type=float, default=1.0, help="factor applied to tracking tolerances")
    ap.add_argument("--check", default=None, help="comma-separated subset of: " + ",".join(CHECK_NAMES))
    ap.add_argument("--force", action="store_true", help="continue past a failed genericity check")
    ap.add_argument("--cache-dir", default=None, help="cache directory (default: $PENCIL_CACHE_DIR)")
    ap.add_argument("--svg-out", default=None, help="write the path system as SVG")
    ap.add_argument("--out", default=None, help="write the JSON document here (timings to OUT.timings.json)")
    ap.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    ap.add_argument("--max-word", type=int, default=DEFAULT_MAX_WORD)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        if not (0 <= args.seed < 2**64):
            raise UsageError("seed must be a 64-bit unsigned integer")
        if not args.tol_scale > 0:
            raise UsageError("--tol-scale must be positive")
        checks = CHECK_NAMES
        if args.check:
            checks = tuple(c.strip() for c in args.check.split(",") if c.strip())
            bad = set(checks) - set(CHECK_NAMES)
            if bad:
                raise UsageError(f"unknown checks: {sorted(bad)}")
        cfg = RunConfig(args.spec, args.seed, args.precision, args.tol_scale, checks, args.force,
                        args.cache_dir or os.environ.get("PENCIL_CACHE_DIR"), args.svg_out, args.out,
                        args.max_states, args.max_word)
        cfg.spec = load_spec(args.spec)
    except UsageError as exc:
        print(f"pencil: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        doc, timings, code = run(cfg, args.command)
    except Inconclusive as exc:
        print(f"pencil: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except PencilError as exc:
        print(f"pencil: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = dumps(doc) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        Path(args.out + ".timings.json").write_text(dumps(timings) + "\n")
    else:
        sys.stdout.write(text)
        print(json.dumps({"timings": timings}, sort_keys=True), file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
