"""
Subcommand implementations for the pauli-gaussian CLI.

Each cmd_* takes a RunConfig and returns a process exit code. Results go to
stdout or --output; logs go to stderr.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import pandas as pd

from .amplitude import batch_amplitudes, resolve_path
from .basis import PauliBasisSpec, parse_basis, parse_configuration
from .config import RunConfig, set_config
from .errors import UsageError
from .models import TfimSpec, load_r_matrix, tfim_r_matrix
from .postmeasure import (
    GeometryTemplate,
    decay_scan,
    extrapolate_exponent,
    fit_decay_exponent,
    fit_exponential_decay,
    get_pattern,
    read_scan_csv,
    write_scan_csv,
)
from .probentropy import (
    PROBABILITY_PATHS,
    ProbabilityTable,
    SubregionOutcome,
    entropy_of_distribution,
    marginal_probability,
    max_probability_search,
    probability,
    probability_table,
    write_probability_csv,
)
from .state import GaussianPureState, random_state, save_state, state_to_dict
from .validation import load_suite, run_suite

log = logging.getLogger(__name__)


# Helpers


def build_state(cfg: RunConfig) -> GaussianPureState:
    """The state named by the run's single state source."""
    cfg.require_state_source()
    if cfg.state_file is not None:
        return load_r_matrix(cfg.state_file)
    if cfg.size is None:
        raise UsageError("--L is required with --model and --random")
    if cfg.model is not None:
        if cfg.model != "tfim":
            raise UsageError(f"Unknown model {cfg.model!r}; only 'tfim' is available")
        spec = TfimSpec(cfg.size, cfg.coupling, cfg.transverse_field)
        return tfim_r_matrix(spec, cfg.model_route)
    log.info(f"Drawing random L={cfg.size} state (seed {cfg.random_seed}, scale {cfg.scale})")
    return random_state(cfg.size, seed=cfg.random_seed, scale=cfg.scale)


def build_basis(cfg: RunConfig, size: int) -> PauliBasisSpec:
    if cfg.basis is None:
        raise UsageError("--basis is required (z, x, y, uniform:phi,theta[,alpha] or JSON)")
    return parse_basis(cfg.basis, size, cfg.degrees)


def _parse_list(text: Optional[str], kind: Callable = float) -> list:
    if text is None:
        return []
    try:
        return [kind(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Cannot parse list {text!r}")


def _parse_window(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"Window must look like 4:16, got {text!r}")
    return lo, hi


def write_json(payload: Any, output: Optional[Path]) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)
        log.info(f"Wrote {output}")


def write_frame(frame: pd.DataFrame, output: Optional[Path]) -> None:
    target = sys.stdout if output is None else output
    frame.to_csv(target, index=False, float_format="%.17g", lineterminator="\n")
    if output is not None:
        log.info(f"Wrote {output}")


# Subcommands


def cmd_state(cfg: RunConfig) -> int:
    """Write the state as a JSON state spec."""
    state = build_state(cfg)
    if cfg.output is None:
        write_json(state_to_dict(state), None)
    else:
        save_state(state, cfg.output)
    return 0


def cmd_amplitude(cfg: RunConfig) -> int:
    """Complex amplitudes of the listed configurations."""
    if not cfg.configs:
        raise UsageError("At least one --config is required")
    state = build_state(cfg)
    basis = build_basis(cfg, state.size)
    configs = [parse_configuration(text, state.size) for text in cfg.configs]
    path = resolve_path(cfg.path)
    values = batch_amplitudes(state, basis, configs, path, cfg.workers)

    records = [
        {
            "config": str(config),
            "re": float(value.real),
            "im": float(value.imag),
            "modulus": float(abs(value)),
            "phase": float(np.angle(value)),
            "path": path,
        }
        for config, value in zip(configs, values)
    ]
    if cfg.format_or("json") == "csv":
        write_frame(pd.DataFrame(records), cfg.output)
    else:
        write_json(records, cfg.output)
    return 0


def cmd_probability(cfg: RunConfig) -> int:
    """Outcome probabilities: listed configurations, a marginal, or the full table."""
    method = cfg.options.get("method") or "amplitude_squared"
    if method not in PROBABILITY_PATHS:
        raise UsageError(f"--method must be one of {PROBABILITY_PATHS}")
    state = build_state(cfg)
    basis = build_basis(cfg, state.size)

    sites = cfg.options.get("sites")
    if sites is not None:
        outcome_text = cfg.options.get("outcome")
        if outcome_text is None:
            raise UsageError("--sites needs --outcome")
        site_list = _parse_list(sites, int)
        outcome = SubregionOutcome(
            tuple(site_list), parse_configuration(outcome_text, len(site_list))
        )
        value = marginal_probability(state, basis, outcome, method)
        write_json(
            {"sites": site_list, "outcome": outcome_text, "probability": value, "path": method},
            cfg.output,
        )
        return 0

    if cfg.options.get("enumerate"):
        table = probability_table(state, basis, method, cfg.workers)
        log.info(f"Total probability: {table.total:.15g}")
    elif cfg.configs:
        configs = [parse_configuration(text, state.size) for text in cfg.configs]
        values = np.array([probability(state, basis, c, method) for c in configs])
        table = ProbabilityTable(configs, values, method, state.size)
    else:
        raise UsageError("Give --config strings, --enumerate, or --sites with --outcome")

    if cfg.format_or("csv") == "json":
        records = table.to_frame().to_dict(orient="records")
        write_json({"rows": records, "total": table.total}, cfg.output)
    elif cfg.output is None:
        write_probability_csv(table, sys.stdout)
    else:
        write_probability_csv(table, cfg.output)
        log.info(f"Wrote {cfg.output}")
    return 0


def cmd_entropy(cfg: RunConfig) -> int:
    """Shannon-Renyi entropies of the full outcome distribution."""
    alphas = _parse_list(cfg.options.get("alphas") or "1")
    method = cfg.options.get("method") or "amplitude_squared"
    state = build_state(cfg)
    basis = build_basis(cfg, state.size)
    table = probability_table(state, basis, method, cfg.workers)
    payload = {
        "L": state.size,
        "log": "natural",
        "path": method,
        "entropies": [
            {"alpha": alpha, "entropy": entropy_of_distribution(table.probabilities, alpha)}
            for alpha in alphas
        ],
    }
    write_json(payload, cfg.output)
    return 0


def cmd_search(cfg: RunConfig) -> int:
    """Heuristic most-likely product outcome and global entanglement."""
    state = build_state(cfg)
    result = max_probability_search(
        state,
        grid_resolution=cfg.options.get("grid") or 5,
        restarts=cfg.options.get("restarts") or 4,
        seed=cfg.seed,
    )
    payload = {
        "L": state.size,
        "probability": result.probability,
        "global_entanglement": result.global_entanglement,
        "config": str(result.config),
        "basis": result.basis.to_dict(),
        "seeds_tried": result.seeds_tried,
    }
    write_json(payload, cfg.output)
    return 0


def cmd_postmeasure(cfg: RunConfig) -> int:
    """Entropy of A1 against the A1-A2 separation for a crystal outcome on B."""
    pattern = get_pattern(cfg.options.get("pattern") or "x-all-plus")
    alphas = _parse_list(cfg.options.get("alphas") or "1")
    state = build_state(cfg)
    template = GeometryTemplate(
        state.size, cfg.options.get("a1") or 2, cfg.options.get("a2") or 2
    )
    dmin = cfg.options.get("dmin")
    dmax = cfg.options.get("dmax")
    dstep = cfg.options.get("dstep") or pattern.distance_step
    dmin = pattern.distance_step if dmin is None else dmin
    dmax = state.size - template.a1_size - template.a2_size if dmax is None else dmax
    basis = None if cfg.basis is None else build_basis(cfg, state.size)

    log.info(f"Scanning {pattern.name} on L={state.size}: d = {dmin}..{dmax} step {dstep}")
    table = decay_scan(
        state,
        basis,
        pattern,
        alphas,
        list(range(dmin, dmax + 1, dstep)),
        template,
        resolve_path(cfg.path),
        cfg.workers,
    )
    if cfg.format_or("csv") == "json":
        write_json(table.to_dict(orient="records"), cfg.output)
    else:
        write_scan_csv(table, sys.stdout if cfg.output is None else cfg.output)
    return 0


def cmd_fit(cfg: RunConfig) -> int:
    """Power-law (or exponential) fits of decay scans; 1/L extrapolation for several sizes."""
    inputs = cfg.options.get("input") or []
    if not inputs:
        raise UsageError("--input is required")
    alpha = cfg.options.get("alpha")
    alpha = 1.0 if alpha is None else alpha
    window = _parse_window(cfg.options.get("window"))
    form = cfg.options.get("form") or "power"

    table = pd.concat([read_scan_csv(Path(p)) for p in inputs], ignore_index=True)
    fits = []
    for size in sorted(table["L"].unique()):
        rows = table[table["L"] == size]
        if form == "exponential":
            fit = fit_exponential_decay(rows, alpha, window).to_dict()
        else:
            fit = fit_decay_exponent(rows, alpha, window).to_dict()
        fit["L"] = int(size)
        fits.append(fit)

    payload: dict[str, Any] = {"form": form, "alpha": alpha, "fits": fits}
    if form == "power" and len(fits) >= 2:
        eta, slope, residual = extrapolate_exponent(
            [f["L"] for f in fits], [f["eta"] for f in fits]
        )
        payload["extrapolation"] = {"eta": eta, "slope": slope, "residual": residual}
    if len(fits) == 1:
        payload.update(fits[0])
    write_json(payload, cfg.output)
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    """Run the invariant suite; exit 1 on any failure."""
    suite = cfg.options.get("suite")
    checks = load_suite(Path(suite) if suite else None, cfg.options.get("trials"))
    seeds = cfg.options.get("seeds") or [cfg.seed]
    reports = []
    failed = False
    for seed in seeds:
        report = run_suite(checks, seed)
        reports.append(report.to_dict())
        for result in report.failures:
            failed = True
            log.error(
                f"Check {result.name} failed at L={result.size} (seed {seed}): "
                f"residual {result.max_residual:.3e} > {result.tolerance:.0e}"
            )
    write_json(reports if len(reports) > 1 else reports[0], cfg.output)
    return 1 if failed else 0


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "state": cmd_state,
    "amplitude": cmd_amplitude,
    "probability": cmd_probability,
    "entropy": cmd_entropy,
    "search": cmd_search,
    "postmeasure": cmd_postmeasure,
    "fit": cmd_fit,
    "validate": cmd_validate,
}


def run(cfg: RunConfig) -> int:
    """Apply the run's engine overrides and dispatch."""
    engine = cfg.engine_config()
    issues = engine.validate()
    if issues:
        raise UsageError("; ".join(issues))
    set_config(engine)
    return COMMANDS[cfg.subcommand](cfg)
