# locscale/cli/main.py

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from locscale.beta.dyadic import beta_report, polyline_length
from locscale.beta.planes import Normalization, beta_p
from locscale.common import config, io
from locscale.common.errors import ContractError, InputFormatError, LocscaleError
from locscale.common.logger import get_logger
from locscale.diffusion.param import ParamComponents, diffuse_curve, parametric_scale_stack
from locscale.geometry.measure import MeasureMode, QuadratureMeasure, as_measure, gram_weights
from locscale.geometry.surface import ParamSurface
from locscale.kernel.heat import KernelParams
from locscale.scalespace.detection import (
    DilationKind,
    check_dilation_consistency,
    classify_scales,
    expected_dilation_shift,
    nontangential_scales,
    nontangential_stack,
)
from locscale.scalespace.grid import ScaleGrid, ScaleStack
from locscale.signal.field import BoundaryPolicy, SampledField
from locscale.signal.omega import omega_sets
from locscale.signal.transform import scale_transform_field
from locscale.surface_scales.probes import derivative_bound_probe, psi_tk_probe
from locscale.surface_scales.run import gamma_sets, square_function_report, surface_scale_run
from locscale.synth.fixtures import FixtureKind, FixtureSpec, generate

log = get_logger("locscale_cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_CONTRACT = 3

SCALES_HEADER = ["point_id", "tau", "t", "S", "d2S", "visible", "separated"]


@dataclass
class RunConfig:
    """Numeric settings shared by every subcommand."""
    a: float = config.DEFAULT_BASE
    tau_min: Optional[float] = None
    tau_max: Optional[float] = None
    tau_steps: Optional[int] = None
    per_octave: int = 8
    eps_trunc: float = config.DEFAULT_EPS_TRUNC
    beta: Optional[float] = None
    delta: float = 0.01
    Nmax: int = 8
    measure_mode: str = "surface"
    boundary: str = config.DEFAULT_BOUNDARY
    output_dir: Path = Path("out")
    eval_stride: int = 1
    threads: Optional[int] = None

    @classmethod
    def layered(cls, config_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """Environment defaults, then the JSON file, then explicit overrides (None means unset)."""
        values: Dict[str, Any] = {}
        if config_path is not None:
            raw = io.read_json(config_path)
            if not isinstance(raw, dict):
                raise InputFormatError(f"{config_path}: config must be a JSON object")
            known = {f.name for f in fields(cls)}
            unknown = sorted(set(raw) - known)
            if unknown:
                raise InputFormatError(f"{config_path}: unknown config keys {', '.join(unknown)}")
            values.update(raw)
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        if "output_dir" in values:
            values["output_dir"] = Path(values["output_dir"])
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        KernelParams(d=1, a=self.a, eps_trunc=self.eps_trunc)
        if (self.tau_min is None) != (self.tau_max is None):
            raise ContractError("tau_min and tau_max must be given together")
        if self.tau_min is not None:
            ScaleGrid(a=self.a, tau_min=self.tau_min, tau_max=self.tau_max, steps=self.tau_steps or 3)
        if self.tau_steps is not None and self.tau_steps < 3:
            raise ContractError(f"tau_steps must be at least 3, got {self.tau_steps}")
        if self.per_octave < 1:
            raise ContractError(f"per_octave must be positive, got {self.per_octave}")
        if self.Nmax < 1:
            raise ContractError(f"Nmax must be at least 1, got {self.Nmax}")
        if self.delta < 0 or (self.beta is not None and self.beta < 0):
            raise ContractError("beta and delta must be nonnegative")
        if self.eval_stride < 1:
            raise ContractError(f"eval_stride must be positive, got {self.eval_stride}")
        MeasureMode.parse(self.measure_mode)
        BoundaryPolicy.parse(self.boundary)

    def grid(self, t_min: float, t_max: float) -> ScaleGrid:
        """The configured tau-lattice, or one spanning [t_min, t_max] when none is configured."""
        if self.tau_min is not None:
            steps = self.tau_steps or max(3, int(math.ceil((self.tau_max - self.tau_min)
                                                           * math.log2(self.a) * self.per_octave)) + 1)
            return ScaleGrid(a=self.a, tau_min=self.tau_min, tau_max=self.tau_max, steps=steps)
        if not t_min < t_max:
            raise ContractError(f"Data resolution leaves no scale window: t in [{t_min}, {t_max}]")
        return ScaleGrid.from_t_range(self.a, t_min, t_max, per_octave=self.per_octave, steps=self.tau_steps)

    def params(self, d: int) -> KernelParams:
        return KernelParams(d=d, a=self.a, eps_trunc=self.eps_trunc)

    def echo(self) -> Dict[str, Any]:
        out = asdict(self)
        out["output_dir"] = str(self.output_dir)
        return out


@dataclass
class Summary:
    command: str
    payload: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        body = dict(self.payload)
        body["command"] = self.command
        body["warnings"] = sorted(set(self.warnings))
        return io.write_json(out_dir / "summary.json", body)


# --- input helpers -----------------------------------------------------------

def _header(path: Path) -> List[str]:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return []
    try:
        with path.open(encoding="utf-8") as handle:
            return [h.strip() for h in handle.readline().split(",")]
    except FileNotFoundError:
        raise InputFormatError(f"{path}: file not found") from None


def _load_field(path: Path, cfg: RunConfig) -> SampledField:
    if Path(path).suffix.lower() == ".pgm":
        return io.read_pgm(path, boundary=cfg.boundary)
    return io.read_field_csv(path, boundary=cfg.boundary)


def _is_field(path: Path) -> bool:
    return Path(path).suffix.lower() == ".pgm" or _header(path) == ["x", "value"]


def _load_measure(path: Path, cfg: RunConfig):
    """Surface CSV -> (surface, measure). Explicit mode uses the file's `w` column."""
    data = io.read_surface_csv(path)
    mode = MeasureMode.parse(cfg.measure_mode)
    if data.weights is not None and mode is MeasureMode.EXPLICIT:
        return data.surface, as_measure(data.surface, mode, weights=data.weights)
    if mode is MeasureMode.EXPLICIT:
        raise ContractError(f"{path}: explicit measure mode needs a `w` column")
    return data.surface, as_measure(data.surface, mode)


def _field_window(fld: SampledField):
    extent = fld.h * max(fld.shape)
    return (4.0 * fld.h) ** 2, extent ** 2


def _surface_window(surface: ParamSurface, measure: QuadratureMeasure):
    pts = measure.points
    spacing = float(np.median(cKDTree(pts).query(pts, k=2)[0][:, 1]))
    diameter = float(np.linalg.norm(np.max(pts, axis=0) - np.min(pts, axis=0)))
    t_min = (4.0 * spacing) ** 2
    t_max = (8.0 * diameter) ** 2 if surface.closed else (diameter / 4.0) ** 2
    return t_min, t_max


def _eval_points(count: int, cfg: RunConfig) -> List[int]:
    return list(range(0, count, cfg.eval_stride))


def _scale_rows(stack: ScaleStack, cfg: RunConfig, label=lambda p: p, skip_flagged: bool = True):
    rows = []
    for row, point in enumerate(stack.points):
        if skip_flagged and stack.flags[row]:
            continue
        scales = classify_scales(stack, point, beta=cfg.beta or 0.0, delta=cfg.delta)
        for e in scales.entries:
            rows.append((label(point), e.tau, e.t, e.value, e.curvature, e.visible, e.separated))
    return rows


# --- subcommands -------------------------------------------------------------

def cmd_synth(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    raw = io.read_json(opts.spec) if opts.spec else {}
    for name in FixtureSpec.__dataclass_fields__:
        value = getattr(opts, f"fx_{name}", None)
        if value is not None:
            raw[name] = value
    if "kind" not in raw:
        raise ContractError("synth needs a fixture kind (--kind or a spec file)")
    fixture = generate(FixtureSpec.from_dict(raw))
    out = cfg.output_dir
    stem = opts.name or fixture.spec.kind.value
    data = fixture.data
    if isinstance(data, SampledField):
        path = io.write_field_csv(out / f"{stem}.csv", data) if data.dims == 1 else io.write_pgm(out / f"{stem}.pgm", data)
    elif isinstance(data, ParamSurface):
        path = io.write_surface_csv(out / f"{stem}.csv", data)
    else:
        path = io.write_points_csv(out / f"{stem}.csv", data)
    summary = Summary("synth", {"fixture": fixture.spec.as_dict(), "truth": fixture.truth, "output": path.name})
    return [path, summary.write(out)]


def cmd_scales_fn(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    fld = _load_field(inputs[0], cfg)
    grid = cfg.grid(*_field_window(fld))
    stack = scale_transform_field(fld, grid, jmax=2, params=cfg.params(fld.dims), threads=cfg.threads)
    report = omega_sets(stack, fld.cell_volume, cfg.delta, beta=cfg.beta, Nmax=cfg.Nmax)

    out = cfg.output_dir
    paths = [io.write_csv(out / "scales.csv", SCALES_HEADER, _scale_rows(stack, cfg)),
             io.write_csv(out / "decay.csv", ["N", "measure"], report.measures)]
    summary = Summary("scales-fn", {
        "grid": grid.echo(),
        "config": cfg.echo(),
        "fit": report.fit.as_dict() if report.fit else None,
        "points": len(stack),
        "sup_norm": fld.sup_norm,
    }, warnings=list(stack.warnings))
    if report.fit is None:
        summary.warnings.append("decay fit undefined: fewer than two positive measures")
    paths.append(summary.write(out))
    return paths


def cmd_scales_curve(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    surface, measure = _load_measure(inputs[0], cfg)
    grid = cfg.grid(*_surface_window(surface, measure))
    run = surface_scale_run(measure, grid, eval_points=_eval_points(len(measure), cfg),
                            params=cfg.params(measure.d), threads=cfg.threads)
    gamma = gamma_sets(run, cfg.delta, beta=cfg.beta, Nmax=cfg.Nmax)
    square = square_function_report(run, cfg.delta)

    out = cfg.output_dir
    rows = _scale_rows(run.stack, cfg, label=lambda p: measure.ids[p])
    paths = [io.write_csv(out / "scales.csv", SCALES_HEADER, rows),
             io.write_csv(out / "decay.csv", ["N", "measure"], gamma.mu_measures)]
    summary = Summary("scales-curve", {
        "grid": grid.echo(),
        "config": cfg.echo(),
        "fit": gamma.fit.as_dict() if gamma.fit else None,
        "gamma_star": gram_weights(surface).gamma_star,
        "total_mass": measure.total_mass,
        "flagged_points": gamma.excluded,
        "square_function": {"mean": square.mean, "oscillation": square.oscillation,
                            "bracket_holds": square.bracket_holds},
    }, warnings=list(run.stack.warnings))
    paths.append(summary.write(out))
    return paths


def cmd_nontangential(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    if _is_field(inputs[0]):
        fld = _load_field(inputs[0], cfg)
        grid = cfg.grid(*_field_window(fld))
        stack = scale_transform_field(fld, grid, jmax=2, params=cfg.params(fld.dims), threads=cfg.threads)
        positions = fld.positions()
        label = lambda p: p
    else:
        surface, measure = _load_measure(inputs[0], cfg)
        grid = cfg.grid(*_surface_window(surface, measure))
        run = surface_scale_run(measure, grid, eval_points=_eval_points(len(measure), cfg),
                                params=cfg.params(measure.d), threads=cfg.threads)
        stack = run.stack
        positions = {p: measure.points[p] for p in stack.points}
        label = lambda p: measure.ids[p]

    star = nontangential_stack(stack, positions, threads=cfg.threads)
    rows = []
    for row, point in enumerate(star.points):
        if star.flags[row]:
            continue
        for e in nontangential_scales(star, point, beta=cfg.beta or 0.0).entries:
            rows.append((label(point), e.tau, e.t, e.value, e.visible))
    out = cfg.output_dir
    paths = [io.write_csv(out / "nontangential.csv", ["point_id", "tau", "t", "S_star", "visible"], rows)]
    summary = Summary("nontangential", {"grid": grid.echo(), "config": cfg.echo(), "scales": len(rows)},
                      warnings=list(star.warnings))
    paths.append(summary.write(out))
    return paths


def _parse_p(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise ContractError(f"p must be 1, 2 or inf, got '{text}'") from None
    if value not in (1.0, 2.0):
        raise ContractError(f"p must be 1, 2 or inf, got '{text}'")
    return value


def cmd_beta(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    out = cfg.output_dir
    if opts.dyadic:
        points = io.read_points_csv(inputs[0])
        report = beta_report(points, opts.level_min, opts.level_max)
        length = polyline_length(points)
        paths = [io.write_csv(out / "beta.csv", ["level", "j", "k", "beta"], report.rows())]
        payload = {
            "tsp_sum": report.total,
            "levels": {str(lv): report.level_sum(lv) for lv in range(opts.level_min, opts.level_max + 1)},
            "polyline_length": length,
            "tsp_ratio": report.total / length if length > 0 else None,
        }
        paths.append(Summary("beta", payload).write(out))
        return paths

    if _header(inputs[0])[:1] == ["r1"]:
        _, measure = _load_measure(inputs[0], cfg)
    else:
        points = io.read_points_csv(inputs[0])
        if points.shape[1] < 2:
            raise InputFormatError(f"{inputs[0]}: beta needs points in R^n with n >= 2")
        measure = QuadratureMeasure(points=points, weights=np.ones(points.shape[0]), d=opts.d)
    p_values = [_parse_p(p) for p in opts.p]
    normalization = Normalization(opts.normalization)
    rows, undefined = [], 0
    for i in _eval_points(len(measure), cfg):
        for t in opts.t:
            for p in p_values:
                value = beta_p(measure, measure.points[i], t, p, d=measure.d, normalization=normalization)
                undefined += value is None
                rows.append((measure.ids[i], *measure.points[i], t, "inf" if math.isinf(p) else int(p), value))
    coords = [f"x{c + 1}" for c in range(measure.points.shape[1])]
    paths = [io.write_csv(out / "beta.csv", ["point_id", *coords, "t", "p", "beta"], rows)]
    summary = Summary("beta", {"normalization": normalization.value, "rows": len(rows)})
    if undefined:
        summary.warnings.append(f"{undefined} beta values undefined: too few points in the ball")
    paths.append(summary.write(out))
    return paths


def cmd_diffuse(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    surface = io.read_surface_csv(inputs[0]).surface
    components = ParamComponents.from_surface(surface)
    out = cfg.output_dir
    rows = []
    for t in opts.t:
        diffused = diffuse_curve(components, t, threads=cfg.threads)
        for pid, z in enumerate(diffused.flat_points()):
            rows.append((t, pid) + tuple(z))
    header = ["t_param", "point_id"] + [f"x{i + 1}" for i in range(components.n)]
    paths = [io.write_csv(out / "curve.csv", header, rows)]

    extent = surface.h_r * max(surface.lattice_shape)
    grid = cfg.grid((4.0 * surface.h_r) ** 2, extent ** 2)
    stack = parametric_scale_stack(components, grid, threads=cfg.threads)
    paths.append(io.write_csv(out / "scales.csv", SCALES_HEADER, _scale_rows(stack, cfg)))
    summary = Summary("diffuse", {"grid": grid.echo(), "config": cfg.echo(), "t_param": list(opts.t),
                                  "scale_units": "t_param"})
    paths.append(summary.write(out))
    return paths


def cmd_probe_bounds(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    data = io.read_surface_csv(inputs[0])
    surface = data.surface
    surface_measure = as_measure(surface, MeasureMode.SURFACE)
    haus_measure = as_measure(surface, MeasureMode.HAUSDORFF_PARAM)
    eval_points = [i for i in surface.interior_ids(cfg.params(surface.d).r_max(max(opts.t)))
                   if i % cfg.eval_stride == 0]
    if not eval_points:
        raise ContractError("No evaluation point is far enough from the boundary for the largest t")
    # Surface-mode indices shift when degenerate nodes are dropped.
    surf_index = {lattice: i for i, lattice in enumerate(surface_measure.ids)}

    rows, payload = [], {"gamma_star": gram_weights(surface).gamma_star, "k": {}}
    for k in opts.k:
        haus = derivative_bound_probe(haus_measure, eval_points, k, opts.t, params=cfg.params(surface.d),
                                      threads=cfg.threads)
        surf = derivative_bound_probe(surface_measure, [surf_index[i] for i in eval_points if i in surf_index],
                                      k, opts.t, params=cfg.params(surface.d), threads=cfg.threads)
        for (t, hv), (_, sv) in zip(haus.per_t, surf.per_t):
            rows.append((k, t, "hausdorff_param", hv))
            rows.append((k, t, "surface", sv))
        psi = psi_tk_probe(surface, eval_points, k, opts.t, params=cfg.params(surface.d))
        payload["k"][str(k)] = {
            "hausdorff_sup": haus.sup_value,
            "surface_sup": surf.sup_value,
            "ratio": surf.sup_value / haus.sup_value if haus.sup_value > 0 else None,
            "psi_tk_sup": psi.sup_value,
            "psi_tk_graph_bound": psi.graph_bound,
        }
    out = cfg.output_dir
    paths = [io.write_csv(out / "bounds.csv", ["k", "t", "mode", "sup"], rows)]
    paths.append(Summary("probe-bounds", payload, warnings=list(surface_measure.warnings)).write(out))
    return paths


def _paired_points(kind: DilationKind, base: ScaleStack, dilated: ScaleStack, delta: float) -> List[tuple]:
    """Set dilation pairs node i with node i; function dilation pairs g at x_j with f at delta * x_j."""
    if kind is DilationKind.SET:
        shared = set(dilated.points)
        return [(p, p) for p in base.points if p in shared]
    count = len(base)
    pairs = []
    for j in dilated.points:
        i = delta * j
        if abs(i - round(i)) < 1e-9:
            pairs.append((int(round(i)) % count, j))
    return pairs


def cmd_check_consistency(cfg: RunConfig, inputs: Sequence[Path], opts: argparse.Namespace) -> List[Path]:
    if len(inputs) != 2:
        raise ContractError("check-consistency takes a base input and a dilated input")
    kind = DilationKind(opts.kind)
    delta = opts.dilation

    def stacks_for(path: Path, shift: float, base_grid: Optional[ScaleGrid]):
        if _is_field(path):
            fld = _load_field(path, cfg)
            grid = base_grid or cfg.grid(*_field_window(fld))
            grid = ScaleGrid(grid.a, grid.tau_min + shift, grid.tau_max + shift, grid.steps)
            return grid, scale_transform_field(fld, grid, jmax=2, params=cfg.params(fld.dims), threads=cfg.threads)
        surface, measure = _load_measure(path, cfg)
        grid = base_grid or cfg.grid(*_surface_window(surface, measure))
        grid = ScaleGrid(grid.a, grid.tau_min + shift, grid.tau_max + shift, grid.steps)
        run = surface_scale_run(measure, grid, eval_points=_eval_points(len(measure), cfg),
                                params=cfg.params(measure.d), threads=cfg.threads)
        return grid, run.stack

    base_grid, base = stacks_for(inputs[0], 0.0, None)
    shift = expected_dilation_shift(delta, base_grid.a, kind)
    dil_grid, dilated = stacks_for(inputs[1], shift, base_grid)

    pairs = _paired_points(kind, base, dilated, delta)
    if _is_field(inputs[0]):
        pairs = pairs[::cfg.eval_stride]
    checked, failed, rows = 0, 0, []
    for i, j in pairs:
        if base.flags[base.row(i)] or dilated.flags[dilated.row(j)]:
            continue
        s0 = classify_scales(base, i, beta=cfg.beta or 0.0, delta=cfg.delta)
        s1 = classify_scales(dilated, j, beta=cfg.beta or 0.0, delta=cfg.delta)
        report = check_dilation_consistency(s0, s1, delta, base_grid, kind=kind, grid_dilated=dil_grid)
        checked += 1
        failed += not report.passed
        rows.append((i, j, len(s0), len(s1), report.shift_measured, report.shift_expected, report.passed))

    out = cfg.output_dir
    paths = [io.write_csv(out / "consistency.csv",
                          ["base_id", "dilated_id", "count_base", "count_dilated", "shift_measured",
                           "shift_expected", "pass"], rows)]
    summary = Summary("check-consistency", {
        "pass": checked > 0 and failed == 0,
        "checked": checked,
        "failed": failed,
        "kind": kind.value,
        "dilation": delta,
        "shift_expected": shift,
        "grid": base_grid.echo(),
        "grid_dilated": dil_grid.echo(),
    }, warnings=list(base.warnings) + list(dilated.warnings))
    paths.append(summary.write(out))
    return paths


COMMANDS: Dict[str, Callable[[RunConfig, Sequence[Path], argparse.Namespace], List[Path]]] = {
    "scales-fn": cmd_scales_fn,
    "scales-curve": cmd_scales_curve,
    "nontangential": cmd_nontangential,
    "beta": cmd_beta,
    "diffuse": cmd_diffuse,
    "probe-bounds": cmd_probe_bounds,
    "synth": cmd_synth,
    "check-consistency": cmd_check_consistency,
}


def run(subcommand: str, cfg: RunConfig, inputs: Sequence[Path], opts: Optional[argparse.Namespace] = None) -> int:
    """Runs one subcommand and maps its failure modes onto exit codes."""
    handler = COMMANDS.get(subcommand)
    if handler is None:
        log.error(f"Unknown subcommand '{subcommand}'")
        return EXIT_USAGE
    log.info(f"Starting {subcommand} on {[str(p) for p in inputs]}")
    try:
        written = handler(cfg, [Path(p) for p in inputs], opts or argparse.Namespace())
        log.info(f"{subcommand} wrote {', '.join(p.name for p in written)} to {cfg.output_dir}")
        return EXIT_OK
    except InputFormatError as e:
        log.error(f"Input format error: {e}")
        return EXIT_INPUT
    except ContractError as e:
        log.error(f"Contract violation: {e}")
        return EXIT_CONTRACT
    finally:
        log.info(f"{subcommand} finished.")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with RunConfig fields")
    common.add_argument("--out", dest="output_dir", type=Path, help="Output directory")
    common.add_argument("--a", type=float, help="Logarithmic base of tau = log_a(t)")
    common.add_argument("--tau-min", type=float)
    common.add_argument("--tau-max", type=float)
    common.add_argument("--tau-steps", type=int)
    common.add_argument("--per-octave", type=int)
    common.add_argument("--eps-trunc", type=float)
    common.add_argument("--beta", type=float, help="Visibility threshold")
    common.add_argument("--delta", type=float, help="Separation threshold")
    common.add_argument("--nmax", dest="Nmax", type=int)
    common.add_argument("--measure", dest="measure_mode", choices=[m.value for m in MeasureMode])
    common.add_argument("--boundary", choices=[b.value for b in BoundaryPolicy])
    common.add_argument("--eval-stride", type=int)
    common.add_argument("--threads", type=int)

    parser = _Parser(prog="locscale", description="Local scales of sampled functions and surfaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("scales-fn", "scales-curve", "nontangential"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("input", type=Path)

    p = sub.add_parser("beta", parents=[common])
    p.add_argument("input", type=Path)
    p.add_argument("--dyadic", action="store_true", help="Dyadic beta(Q) and the tsp sum instead of beta_p")
    p.add_argument("--level-min", type=int, default=0)
    p.add_argument("--level-max", type=int, default=6)
    p.add_argument("--t", type=_float_list, default=[0.25])
    p.add_argument("--p", type=lambda s: [v for v in s.split(",") if v], default=["2"])
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--normalization", choices=[n.value for n in Normalization], default="scale")

    p = sub.add_parser("diffuse", parents=[common])
    p.add_argument("input", type=Path)
    p.add_argument("--t", type=_float_list, required=True, help="Diffusion times in parameter units")

    p = sub.add_parser("probe-bounds", parents=[common])
    p.add_argument("input", type=Path)
    p.add_argument("--k", type=_int_list, default=[0, 1, 2])
    p.add_argument("--t", type=_float_list, required=True)

    p = sub.add_parser("synth", parents=[common])
    p.add_argument("--spec", type=Path, help="JSON fixture spec")
    p.add_argument("--name", help="Output file stem")
    p.add_argument("--kind", dest="fx_kind", choices=[k.value for k in FixtureKind])
    for name, kind in (("m", int), ("m2", int), ("amplitude", float), ("slope", float), ("teeth", int),
                       ("radius", float), ("samples", int), ("extent", float), ("tilt", float), ("d", int),
                       ("dims", int), ("level", int), ("h", float), ("seed", int)):
        p.add_argument(f"--{name}", dest=f"fx_{name}", type=kind)

    p = sub.add_parser("check-consistency", parents=[common])
    p.add_argument("base", type=Path)
    p.add_argument("dilated", type=Path)
    p.add_argument("--dilation", type=float, default=2.0)
    p.add_argument("--kind", choices=[k.value for k in DilationKind], default="set")
    return parser


CONFIG_FLAGS = ("output_dir", "a", "tau_min", "tau_max", "tau_steps", "per_octave", "eps_trunc", "beta",
                "delta", "Nmax", "measure_mode", "boundary", "eval_stride", "threads")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    opts = parser.parse_args(argv)
    inputs = [opts.base, opts.dilated] if opts.command == "check-consistency" else (
        [] if opts.command == "synth" else [opts.input])
    try:
        cfg = RunConfig.layered(opts.config, {k: getattr(opts, k, None) for k in CONFIG_FLAGS})
        return run(opts.command, cfg, inputs, opts)
    except InputFormatError as e:
        log.error(f"Input format error: {e}")
        return EXIT_INPUT
    except ContractError as e:
        log.error(f"Contract violation: {e}")
        return EXIT_CONTRACT
    except LocscaleError as e:
        log.error(f"locscale error: {e}")
        return EXIT_USAGE
    except Exception as e:
        log.critical(f"locscale crashed: {e}", exc_info=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
