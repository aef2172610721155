"""
Command-line interface

    fit        fit concentric ellipses to an x,y,ring CSV
    simulate   Monte Carlo benchmark of a preset scene over a sigma grid
    bias-scan  theoretical bias norms over a scenario sweep
"""

from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO
import argparse
import json
import logging
import sys

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config import settings
from config.logging import setup_logging
from concentric_fit.error_analysis import TrueScene, bias_scan, leading_variance
from concentric_fit.estimators import FitResult, Method, fit_all, resolve_methods
from concentric_fit.exceptions import ConcentricFitError, NumericalFailure
from concentric_fit.parsers.point_csv import PointCSVParser
from concentric_fit.simulation import Scenario, ScenarioFamily, experiment_presets, monte_carlo

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class RunConfig(BaseModel):
    """Flat run parameters; loaded from --config JSON and overridden by flags"""
    model_config = ConfigDict(extra='forbid')

    methods: Optional[List[str]] = None
    f0: Optional[float] = Field(default=None, gt=0)
    seed: int = settings.SEED
    runs: int = Field(default=settings.RUNS, ge=1)
    sigma: List[float] = Field(default_factory=list)
    preset: str = 'exp1'
    family: str = 'scenario1'
    workers: int = Field(default=settings.WORKERS, ge=1)
    output: Optional[str] = None
    format: str = 'json'
    omit_timing: bool = False

    @field_validator('sigma')
    @classmethod
    def _non_negative(cls, v: List[float]) -> List[float]:
        if any(s < 0 for s in v):
            raise ValueError('sigma values must be non-negative')
        return v

    @field_validator('methods')
    @classmethod
    def _known_methods(cls, v: Optional[List[str]]) -> Optional[List[str]]:
        if v is not None:
            resolve_methods(v)
        return v

    @field_validator('format')
    @classmethod
    def _known_format(cls, v: str) -> str:
        if v not in ('json', 'table'):
            raise ValueError("format must be 'json' or 'table'")
        return v


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional --config document with explicitly given flags"""
    document: Dict = {}
    if args.config:
        try:
            document = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ValueError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(document, dict):
            raise ValueError("config must be a JSON object")

    for key in RunConfig.model_fields:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            document[key] = value
    return RunConfig.model_validate(document)


def _open_output(path: Optional[str]) -> TextIO:
    if path is None:
        return sys.stdout
    return open(path, 'w', newline='')


def write_csv(frame: pd.DataFrame, path: Optional[str]) -> None:
    out = _open_output(path)
    try:
        frame.to_csv(out, index=False, float_format=settings.CSV_FLOAT_FORMAT)
    finally:
        if out is not sys.stdout:
            out.close()
            logger.info(f"Wrote {len(frame)} rows to {path}")


def format_table(results: Dict[Method, FitResult]) -> str:
    """Human-readable summary, one block per method"""
    lines = []
    for method, r in results.items():
        if not r.ok:
            lines.append(f"{method.value:<11} FAILED  {r.error}")
            continue
        lines.append(f"{method.value:<11} valid={r.valid}  lambda={r.eigenvalue:.6g}  time={r.elapsed * 1e3:.3f} ms")
        lines.append(f"{'':<11} theta=[{', '.join(f'{v:.6g}' for v in r.theta.theta)}]")
        if r.geometry is not None:
            g = r.geometry
            rings = ', '.join(f'({a:.6g}, {b:.6g})' for a, b in g.rings)
            lines.append(f"{'':<11} center=({g.x_c:.6g}, {g.y_c:.6g})  psi={g.psi:.6g}  rings={rings}")
    return '\n'.join(lines) + '\n'


def cmd_fit(args: argparse.Namespace) -> int:
    config = load_config(args)
    f0 = config.f0 if config.f0 is not None else settings.F0
    data = PointCSVParser().parse(args.input, f0)
    results = fit_all(data, config.methods)

    if config.format == 'table':
        text = format_table(results)
    else:
        text = json.dumps({m.value: r.to_dict() for m, r in results.items()}, indent=2) + '\n'
    out = _open_output(config.output)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()

    if not any(r.ok for r in results.values()):
        logger.error("every method failed")
        return EXIT_NUMERICAL
    return EXIT_OK


def _preset_scenario(name: str) -> Scenario:
    presets = experiment_presets()
    preset = presets.get(name)
    if not isinstance(preset, Scenario):
        scenes = [k for k, v in presets.items() if isinstance(v, Scenario)]
        raise ValueError(f"unknown preset {name!r}; choose from {scenes}")
    return preset


def simulate(config: RunConfig) -> pd.DataFrame:
    """One row per (sigma, method), with the theoretical variance trace for reference"""
    scenario = _preset_scenario(config.preset)
    scenario = replace(
        scenario,
        runs=config.runs,
        noise=replace(scenario.noise, seed=config.seed),
        f0=config.f0 if config.f0 is not None else scenario.f0,
    )
    sigmas = config.sigma or [scenario.noise.sigma]
    variance_trace = float(np.trace(leading_variance(TrueScene.from_scenario(scenario))))

    records = []
    for sigma in sigmas:
        report = monte_carlo(scenario.with_sigma(sigma), config.methods, config.workers)
        for record in report.to_records():
            record['leading_variance_trace'] = variance_trace
            records.append(record)

    columns = ['sigma', 'method', 'nmse', 'nb', 'art_seconds', 'convergence_rate_pct',
               'runs_used', 'runs', 'normalized', 'leading_variance_trace', 'error']
    frame = pd.DataFrame(records, columns=columns)
    if config.omit_timing:
        frame = frame.drop(columns=['art_seconds'])
    return frame


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args)
    frame = simulate(config)
    write_csv(frame, config.output)
    if frame['error'].notna().all():
        logger.error("no method produced a valid fit")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_bias_scan(args: argparse.Namespace) -> int:
    config = load_config(args)
    family = experiment_presets().get(config.family)
    if not isinstance(family, ScenarioFamily):
        families = [k for k, v in experiment_presets().items() if isinstance(v, ScenarioFamily)]
        raise ValueError(f"unknown family {config.family!r}; choose from {families}")
    write_csv(bias_scan(family, config.methods), config.output)
    return EXIT_OK


def _method_list(value: str) -> List[str]:
    return [m.strip() for m in value.split(',') if m.strip()]


def build_argparser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='concentric-fit', description='Algebraic fitting of concentric ellipses')
    p.add_argument('--log-level', default=None, help=f'Logging level (default: {settings.LOG_LEVEL})')
    sub = p.add_subparsers(dest='command', required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument('--config', default=None, help='JSON file with run parameters')
        sp.add_argument('--methods', type=_method_list, default=None,
                        help='Comma list of ls,oleary,taubin,semi_hyper,hyper (default: all)')
        sp.add_argument('--f0', type=float, default=None, help='Carrier scale factor')
        sp.add_argument('-o', '--output', default=None, help='Output path (default: stdout)')

    fit = sub.add_parser('fit', help='Fit an x,y,ring point file')
    fit.add_argument('input', help='CSV file with header x,y,ring')
    fit.add_argument('--format', choices=['json', 'table'], default=None, help='Output format (default: json)')
    common(fit)
    fit.set_defaults(handler=cmd_fit)

    sim = sub.add_parser('simulate', help='Monte Carlo benchmark of a preset scene')
    sim.add_argument('--preset', default=None, help='exp1 (long arcs) or exp2 (short arcs)')
    sim.add_argument('--sigma', type=float, action='append', default=None,
                     help='Noise level; repeat for a grid (default: preset sigma)')
    sim.add_argument('--runs', type=int, default=None, help=f'Runs per sigma (default: {settings.RUNS})')
    sim.add_argument('--seed', type=int, default=None, help=f'Base seed (default: {settings.SEED})')
    sim.add_argument('--workers', type=int, default=None, help='Worker threads')
    sim.add_argument('--omit-timing', action='store_true', help='Drop the art_seconds column')
    common(sim)
    sim.set_defaults(handler=cmd_simulate)

    scan = sub.add_parser('bias-scan', help='Theoretical bias over a scenario sweep')
    scan.add_argument('--family', default=None,
                      help='scenario1, scenario2, scenario3_high or scenario3_low')
    common(scan)
    scan.set_defaults(handler=cmd_bias_scan)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_argparser().parse_args(argv)
    level = getattr(logging, args.log_level.upper(), None) if args.log_level else None
    setup_logging('concentric-fit', level)

    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error(f"invalid configuration: {e}")
        return EXIT_INPUT
    except ValueError as e:
        logger.error(str(e))
        return EXIT_INPUT
    except ConcentricFitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except np.linalg.LinAlgError as e:
        logger.error(f"linear algebra failure: {e}")
        return NumericalFailure.exit_code
    except OSError as e:
        logger.error(f"file error: {e}")
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
