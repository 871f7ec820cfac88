"""Command-line front end: every analysis as a reproducible, serializable run.

Each subcommand emits a single JSON or CSV document embedding the schema
version, tool version, full configuration echo, seed, and wall-clock
runtime, so runs can be archived and compared byte for byte. Wall-clock
runtime is rounded down to whole seconds; it is the only field that can
differ between two runs of a slow command with identical configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from .devices import InterferometerSpec, mz_unitary, quarter_mz, tritter_mz
from .fisher import (
    ProbeSpec,
    cfi_from_table,
    cfi_photon_counting,
    fourier_table,
    qfi_coherent,
    qfi_fock,
)
from .fock import CoherentState, FockState, enumerate_basis
from .fringes import (
    closed_form_check,
    fringe_probabilities,
    outcome_classes,
    reference_classical_bounds,
    tabulated_outcomes,
    visibility_survey,
)
from .multiparam import bounds, qfim_coherent, qfim_pure, sld_pure, weak_commutativity
from .protocol import (
    ProtocolConfig,
    _trial_rng,
    acceptance_phases,
    monte_carlo,
    nonadaptive_protocol,
)

SCHEMA = 1
RESIDUAL_GATE = 1e-10
CLOSED_FORM_GATE = 1e-9


class CliError(Exception):
    """User-facing failure; printed as a message, not a traceback."""

    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


# ---------------------------------------------------------------------------
# argument parsing helpers


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"grid must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CliError(f"bad grid {text!r}: {exc}") from None
    if count < 1:
        raise CliError("grid count must be at least 1")
    return np.linspace(start, stop, count, endpoint=False)


def _parse_occupations(text: str) -> FockState:
    try:
        return FockState([int(x) for x in text.split(",")])
    except ValueError as exc:
        raise CliError(f"bad occupation list {text!r}: {exc}") from None


def _parse_alphas(text: str, spec: InterferometerSpec) -> tuple[complex, ...]:
    if text == "auto":
        # all the light into port 1, mean photon number matched to the
        # device's standard N-photon Fock probe
        alphas = [0j] * spec.mode_count
        alphas[0] = complex(math.sqrt(spec.mode_count))
        return tuple(alphas)
    try:
        alphas = tuple(complex(x) for x in text.split(","))
    except ValueError as exc:
        raise CliError(f"bad amplitude list {text!r}: {exc}") from None
    if len(alphas) != spec.mode_count:
        raise CliError(
            f"expected {spec.mode_count} coherent amplitudes, got {len(alphas)}"
        )
    return alphas


def _spec_for(device: str) -> InterferometerSpec:
    if device == "tritter":
        return tritter_mz()
    if device == "quarter":
        return quarter_mz()
    raise CliError(f"unknown device {device!r}")


def _sig(state: FockState) -> str:
    return ",".join(str(n) for n in state.occupations)


# ---------------------------------------------------------------------------
# output rendering


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def table(columns: Sequence[str], rows) -> dict:
    return {"columns": list(columns), "rows": [_jsonable(list(r)) for r in rows]}


def _payload(command: str, config: dict, seed, results: dict, runtime: float) -> dict:
    return {
        "schema": SCHEMA,
        "tool": "triquart",
        "version": __version__,
        "command": command,
        "config": {k: _jsonable(config[k]) for k in sorted(config)},
        "seed": seed,
        "runtime_seconds": int(runtime),
        "results": _jsonable(results),
    }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "none"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def _csv_cell(value) -> str:
    text = _fmt(value)
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _csv_results(results: dict, out: list[str], prefix: str) -> None:
    scalars = {k: v for k, v in results.items() if not isinstance(v, dict)}
    for key in sorted(scalars):
        out.append(f"# {prefix}.{key}: {_fmt(scalars[key])}")
    for key in sorted(k for k, v in results.items() if isinstance(v, dict)):
        value = results[key]
        if set(value) == {"columns", "rows"}:
            out.append(f"# table: {prefix}.{key}")
            out.append(",".join(_csv_cell(c) for c in value["columns"]))
            for row in value["rows"]:
                out.append(",".join(_csv_cell(cell) for cell in row))
        else:
            _csv_results(value, out, f"{prefix}.{key}")


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    lines = [
        f"# schema: {payload['schema']}",
        f"# tool: {payload['tool']}",
        f"# version: {payload['version']}",
        f"# command: {payload['command']}",
    ]
    for key in sorted(payload["config"]):
        lines.append(f"# config.{key}: {_fmt(payload['config'][key])}")
    lines.append(f"# seed: {_fmt(payload['seed'])}")
    lines.append(f"# runtime_seconds: {payload['runtime_seconds']}")
    _csv_results(payload["results"], lines, "results")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands: each returns (config echo, seed, results, exit code)


def cmd_devices_check(args) -> tuple[dict, object, dict, int]:
    devices = {}
    worst = 0.0
    for spec in (tritter_mz(), quarter_mz()):
        m = spec.mode_count
        U = spec.splitter().matrix.copy()
        if args.inject_fault:
            U[0, 0] += 1e-6
        eye = np.eye(m)
        report = {
            "unitarity_residual": float(np.abs(U.conj().T @ U - eye).max()),
            "entry_magnitude_residual": float(np.abs(np.abs(U) - m**-0.5).max()),
        }
        if spec.splitter_kind == "quarter":
            report["involution_residual"] = float(np.abs(U @ U - eye).max())
        mz_res = 0.0
        for phi, psi in ((0.0, 0.0), (0.7, 0.3), (2.3, 1.9), (math.pi, 0.5)):
            W = mz_unitary(spec, phi, psi).matrix
            mz_res = max(mz_res, float(np.abs(W.conj().T @ W - eye).max()))
        report["interferometer_unitarity_residual"] = mz_res
        if spec.splitter_kind == "tritter":
            report["entries"] = table(
                ("row", "col", "real", "imag"),
                [
                    (j + 1, k + 1, U[j, k].real, U[j, k].imag)
                    for j in range(m)
                    for k in range(m)
                ],
            )
        worst = max(
            worst, *(v for k, v in report.items() if k.endswith("residual"))
        )
        devices[spec.splitter_kind] = report
    results = {
        "devices": devices,
        "max_residual": worst,
        "passed": worst <= RESIDUAL_GATE,
    }
    return {"inject_fault": bool(args.inject_fault)}, None, results, 0 if results["passed"] else 1


def cmd_fringes(args) -> tuple[dict, object, dict, int]:
    spec = _spec_for(args.device)
    input_state = _parse_occupations(args.input)
    phis = _parse_grid(args.grid)
    if args.outcome == "all":
        outcomes = list(enumerate_basis(spec.mode_count, input_state.total))
    else:
        outcomes = [_parse_occupations(args.outcome)]
    try:
        probs = [fringe_probabilities(spec, input_state, out, phis) for out in outcomes]
    except ValueError as exc:
        raise CliError(str(exc)) from None
    columns = ["phi"] + [f"p_{_sig(out)}" for out in outcomes]
    rows = np.column_stack([phis] + probs)
    results: dict = {"fringes": table(columns, rows)}

    code = 0
    if args.check_closed_form:
        if input_state.occupations != (1,) * spec.mode_count:
            raise CliError("--check-closed-form requires the one-photon-per-port input")
        known = tabulated_outcomes(spec.splitter_kind)
        checks = {}
        for out in outcomes if args.outcome != "all" else [
            FockState(sig) for sig in known
        ]:
            sig = tuple(sorted(out.occupations, reverse=True))
            if sig not in known:
                raise CliError(f"no tabulated formula for outcome {_sig(out)}")
            checks[_sig(FockState(sig))] = closed_form_check(FockState(sig), spec)
        results["closed_form_max_deviation"] = checks
        if max(checks.values()) > CLOSED_FORM_GATE:
            code = 1
    config = {
        "device": args.device,
        "input": args.input,
        "outcome": args.outcome,
        "grid": args.grid,
        "check_closed_form": bool(args.check_closed_form),
    }
    return config, None, results, code


def cmd_visibility(args) -> tuple[dict, object, dict, int]:
    spec = _spec_for(args.device)
    input_state = (
        FockState([1] * spec.mode_count)
        if args.input == "auto"
        else _parse_occupations(args.input)
    )
    precomputed = None if args.recompute_bounds else reference_classical_bounds(spec.splitter_kind)
    try:
        reports = visibility_survey(spec, input_state, bounds=precomputed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    mults = dict(
        (tuple(rep.occupations), mult)
        for rep, mult in outcome_classes(spec.mode_count, input_state.total)
    )
    rows = [
        (
            _sig(r.outcome),
            mults[tuple(r.outcome.occupations)],
            r.n_fold_visibility,
            r.classical_bound,
            r.nonclassical,
        )
        for r in reports
    ]
    results = {
        "visibility": table(
            ("outcome", "multiplicity", "visibility", "classical_bound", "nonclassical"),
            rows,
        ),
        "bounds_source": "recomputed" if args.recompute_bounds else "stored",
    }
    config = {
        "device": args.device,
        "input": args.input,
        "recompute_bounds": bool(args.recompute_bounds),
    }
    return config, None, results, 0


def cmd_fisher(args) -> tuple[dict, object, dict, int]:
    spec = _spec_for(args.device)
    phis = _parse_grid(args.grid)
    results: dict
    if args.probe == "fock":
        input_state = (
            FockState([1] * spec.mode_count)
            if args.input == "auto"
            else _parse_occupations(args.input)
        )
        probe = ProbeSpec("fock", input_state, spec)
        H = qfi_fock(spec, input_state)
        try:
            info = cfi_photon_counting(spec, input_state, phis)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        results = {
            "fisher": table(
                ("phi", "classical_information", "quantum_information"),
                np.column_stack([phis, info, np.full_like(phis, H)]),
            ),
            "normalization": probe.normalization(),
        }
    else:
        alphas = _parse_alphas(args.input, spec)
        state = CoherentState(alphas)
        with_ref = qfi_coherent(spec, state, reference=True)
        averaged = qfi_coherent(spec, state, reference=False)
        results = {
            "fisher": table(
                ("phi", "quantum_information_with_reference", "quantum_information_phase_averaged"),
                np.column_stack(
                    [phis, np.full_like(phis, with_ref), np.full_like(phis, averaged)]
                ),
            ),
            "normalization": ProbeSpec(
                "coherent_with_reference", state, spec
            ).normalization(),
        }
    config = {
        "device": args.device,
        "probe": args.probe,
        "input": args.input,
        "grid": args.grid,
    }
    return config, None, results, 0


def _nonadaptive_ensemble(config: ProtocolConfig, phis: np.ndarray, trials: int):
    rms = np.empty(len(phis))
    bias = np.empty(len(phis))
    bias_se = np.empty(len(phis))
    for ip, phi in enumerate(phis):
        errs = np.array(
            [
                nonadaptive_protocol(config, phi, _trial_rng(config.rng_seed, ip, t, 1)).estimate
                - phi
                for t in range(trials)
            ]
        )
        rms[ip] = np.sqrt(np.mean(errs**2))
        bias[ip] = errs.mean()
        bias_se[ip] = errs.std(ddof=1) / math.sqrt(trials)
    return rms, bias, bias_se


def cmd_protocol(args) -> tuple[dict, object, dict, int]:
    try:
        config = ProtocolConfig(M=args.M, rng_seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    phis = acceptance_phases() if args.phis == "auto" else _parse_grid(args.phis)
    try:
        if args.mode == "nonadaptive":
            rms_n, bias, bias_se = _nonadaptive_ensemble(config, phis, args.trials)
            cr = 1.0 / np.sqrt(
                config.M
                * cfi_from_table(fourier_table(tritter_mz(), FockState([1, 1, 1])), phis)
            )
            columns = ("phi", "rms_nonadaptive", "bias", "bias_se", "cr_bound")
            rows = np.column_stack([phis, rms_n, bias, bias_se, cr])
            scalars = {
                "sql": 1.0 / math.sqrt(3.0 * config.M),
                "qcr_bound": 1.0 / math.sqrt(config.M * qfi_fock(tritter_mz(), FockState([1, 1, 1]))),
            }
        else:
            mc = monte_carlo(
                config, phis, trials=args.trials, include_nonadaptive=args.mode == "both"
            )
            columns = ["phi", "rms_adaptive"]
            cols = [mc.phis, mc.rms_adaptive]
            if mc.rms_nonadaptive is not None:
                columns.append("rms_nonadaptive")
                cols.append(mc.rms_nonadaptive)
            columns += ["bias", "bias_se", "cr_bound"]
            cols += [mc.bias, mc.bias_se, mc.cr_bound]
            rows = np.column_stack(cols)
            scalars = {
                "sql": mc.sql,
                "qcr_bound": mc.qcr_bound,
                "pooled_bias": mc.pooled_bias,
                "pooled_bias_se": mc.pooled_bias_se,
            }
    except ValueError as exc:
        raise CliError(str(exc)) from None
    results = {"protocol": table(columns, rows), **scalars, "trials": args.trials, "M": args.M}
    echo = {
        "M": args.M,
        "trials": args.trials,
        "phis": args.phis,
        "mode": args.mode,
    }
    return echo, args.seed, results, 0


def _matrix_entry(H) -> dict:
    return {
        "matrix": table(
            ("row", "col", "value"),
            [
                (i + 1, j + 1, H.entries[i, j].real if np.iscomplexobj(H.entries) else H.entries[i, j])
                for i in range(H.entries.shape[0])
                for j in range(H.entries.shape[1])
            ],
        ),
        "phase_modes": list(H.phase_modes),
        "probe": H.probe,
        "symmetry_residual": H.symmetry_residual(),
        "min_eigenvalue": H.min_eigenvalue(),
    }


def cmd_multiparam(args) -> tuple[dict, object, dict, int]:
    spec = _spec_for(args.device)
    m = spec.mode_count
    if args.modes == "auto":
        modes = (m - 1, m)
    else:
        try:
            modes = tuple(int(x) for x in args.modes.split(","))
        except ValueError as exc:
            raise CliError(f"bad mode list {args.modes!r}: {exc}") from None
    input_state = (
        FockState([1] * m) if args.input == "auto" else _parse_occupations(args.input)
    )
    try:
        H_fock = qfim_pure(spec, input_state, modes)
        wc = weak_commutativity(spec, input_state, modes)
        slds = [sld_pure(spec, input_state, mode) for mode in modes]
        fock_bounds = bounds(H_fock, args.M)
        alphas = _parse_alphas("auto", spec)
        state = CoherentState(alphas)
        H_ref = qfim_coherent(spec, state, modes, reference=True)
        H_avg = qfim_coherent(spec, state, modes, reference=False)
        coherent_bounds = bounds(H_avg, args.M)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    results = {
        "qfim_fock": _matrix_entry(H_fock),
        "qfim_coherent_reference": _matrix_entry(H_ref),
        "qfim_coherent_phase_averaged": _matrix_entry(H_avg),
        "weak_commutativity_residual": abs(wc),
        "sld_hermiticity_residual": max(s.hermiticity_residual() for s in slds),
        "bounds_fock": {
            "per_parameter": list(fock_bounds.per_parameter),
            "total_variance": fock_bounds.total_variance,
            "effective_qfi": list(fock_bounds.effective_qfi),
            "M": fock_bounds.M,
        },
        "bounds_coherent_phase_averaged": {
            "per_parameter": list(coherent_bounds.per_parameter),
            "total_variance": coherent_bounds.total_variance,
            "effective_qfi": list(coherent_bounds.effective_qfi),
            "M": coherent_bounds.M,
        },
        "fock_vs_coherent": {
            "fock_effective_qfi": fock_bounds.effective_qfi[0],
            "coherent_phase_averaged_effective_qfi": coherent_bounds.effective_qfi[0],
            "fock_advantage": fock_bounds.effective_qfi[0] > coherent_bounds.effective_qfi[0],
        },
    }
    config = {
        "device": args.device,
        "input": args.input,
        "modes": args.modes,
        "M": args.M,
    }
    return config, None, results, 0


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="triquart",
        description="Multiphoton interference and phase estimation in 3- and 4-port interferometers",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("devices-check", parents=[common], help="verify device matrices")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_devices_check)

    default_grid = f"0:{2 * math.pi}:720"
    p = sub.add_parser("fringes", parents=[common], help="output-probability fringes")
    p.add_argument("--device", choices=("tritter", "quarter"), default="tritter")
    p.add_argument("--input", default="1,1,1", help="comma-separated occupations")
    p.add_argument("--outcome", default="all", help="comma-separated occupations or 'all'")
    p.add_argument("--grid", default=default_grid, help="phase grid start:stop:count")
    p.add_argument("--check-closed-form", action="store_true")
    p.set_defaults(func=cmd_fringes)

    p = sub.add_parser("visibility", parents=[common], help="N-fold visibilities vs classical bounds")
    p.add_argument("--device", choices=("tritter", "quarter"), default="tritter")
    p.add_argument("--input", default="auto", help="comma-separated occupations")
    p.add_argument(
        "--recompute-bounds",
        action="store_true",
        help="re-optimize the classical bounds instead of using stored values",
    )
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("fisher", parents=[common], help="Fisher information vs phase")
    p.add_argument("--device", choices=("tritter", "quarter"), default="tritter")
    p.add_argument("--probe", choices=("fock", "coherent"), default="fock")
    p.add_argument(
        "--input",
        default="auto",
        help="occupations (fock) or complex amplitudes (coherent); 'auto' matches the standard probe",
    )
    p.add_argument("--grid", default=default_grid, help="phase grid start:stop:count")
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("protocol", parents=[common], help="three-step adaptive estimation ensemble")
    p.add_argument("--M", type=int, default=10_000, help="photons per trial")
    p.add_argument("--trials", type=int, default=200, help="trials per phase")
    p.add_argument("--seed", type=int, default=5)
    p.add_argument("--phis", default="auto", help="true-phase grid start:stop:count")
    p.add_argument("--mode", choices=("adaptive", "nonadaptive", "both"), default="both")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("multiparam", parents=[common], help="two-phase estimation bounds")
    p.add_argument("--device", choices=("tritter", "quarter"), default="tritter")
    p.add_argument("--input", default="auto", help="comma-separated occupations")
    p.add_argument("--modes", default="auto", help="comma-separated phase modes (1-based)")
    p.add_argument("--M", type=int, default=10_000, help="repetitions for the error bounds")
    p.set_defaults(func=cmd_multiparam)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        config, seed, results, code = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    config["format"] = args.format
    config["out"] = args.out
    payload = _payload(args.command, config, seed, results, time.perf_counter() - start)
    text = render(payload, args.format)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
