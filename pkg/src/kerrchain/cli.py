"""Command-line entry point: config ingestion, run orchestration, file output.

Runs are described by an INI-style config with sections [chain],
[integrator], [sweep], [oracle], [output]; every key except chain.n,
chain.delta and chain.epsilon has a default, and any key can be overridden
on the command line with ``--set section.key=value``.  Each run directory
receives a ``manifest.json`` with the fully resolved configuration, enough
to reproduce every output bit for bit.

CSV conventions: comma separator, '.' decimal point, header row, LF line
endings.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    Outcome,
    SolverOptions,
    find_steady_state,
    integrate,
    report_from_trajectory,
)
from .errors import ConfigError, KerrChainError
from .model import (
    ChainParams,
    Gauge,
    Profile,
    build_profiles,
    effective_quadratic,
)
from .oracle import FockConfig, compare_ansatz_error
from .sweep import (
    critical_drive_scan,
    cpu_workers,
    finite_size_scaling,
    phase_diagram,
)
from .topology import (
    NU_UNKNOWN,
    build_nambu,
    extended_hermitian_check,
    greens_function,
    local_winding_profile,
    normalized_correlations,
    svd_analysis,
)

_CHAIN_DEFAULTS = {
    "j": "1.0",
    "phi": "0.0",
    "u": "0.0",
    "kappa": "1.0",
    "n0": "",
    "profile": "tanh_border",
    "gauge": "hopping_phase",
}
_INTEGRATOR_DEFAULTS = {
    "dt_init": "",
    "rel_tol": "1e-9",
    "abs_tol": "1e-11",
    "t_max": "200.0",
    "tol_ss": "1e-6",
    "ss_window": "1.0",
    "sample_dt": "",
    "max_density": "1e12",
    "osc_band": "1e-4",
    "tail_fraction": "0.25",
}
_SWEEP_DEFAULTS = {
    "delta_min": "0.0",
    "delta_max": "1.0",
    "delta_count": "6",
    "epsilon_min": "5.0",
    "epsilon_max": "95.0",
    "epsilon_count": "10",
    "workers": "0",
    "scan_step": "0.5",
    "fine_step": "0.02",
    "sizes": "30,40,50,60",
    "scan_min": "",
    "scan_max": "",
}
_ORACLE_DEFAULTS = {
    "fock_dim": "40",
    "tail_tol": "1e-8",
    "u_grid": "0.0,-1e-3,-1e-2,-2e-2",
}
_OUTPUT_DEFAULTS = {
    "directory": "kerrchain_run",
    "matrix_format": "json",
}


@dataclasses.dataclass
class RunConfig:
    chain: ChainParams
    integrator: SolverOptions
    sweep: dict
    oracle: dict
    output: dict
    resolved: dict  # full section->key->string map for the manifest


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}={raw!r} is not a number") from exc


def _parse_optional_float(section: str, key: str, raw: str) -> float | None:
    return None if raw.strip() == "" else _parse_float(section, key, raw)


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}={raw!r} is not an integer") from exc


def parse_config(path: str | Path, overrides: list[str] | None = None) -> RunConfig:
    """Read, override and validate a run configuration."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc

    for section, defaults in (
        ("chain", _CHAIN_DEFAULTS),
        ("integrator", _INTEGRATOR_DEFAULTS),
        ("sweep", _SWEEP_DEFAULTS),
        ("oracle", _ORACLE_DEFAULTS),
        ("output", _OUTPUT_DEFAULTS),
    ):
        if not cp.has_section(section):
            cp.add_section(section)
        for key, value in defaults.items():
            if not cp.has_option(section, key):
                cp.set(section, key, value)

    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        if not cp.has_section(section):
            raise ConfigError(f"override names unknown section [{section}]")
        cp.set(section.strip(), key.strip(), value.strip())

    for key in ("n", "delta", "epsilon"):
        if not cp.has_option("chain", key):
            raise ConfigError(f"[chain] missing required key {key!r}")

    ch = cp["chain"]
    try:
        profile = Profile(ch.get("profile"))
    except ValueError:
        raise ConfigError(
            f"[chain] profile={ch.get('profile')!r}; choose from "
            f"{[p.value for p in Profile]}"
        ) from None
    try:
        gauge = Gauge(ch.get("gauge"))
    except ValueError:
        raise ConfigError(
            f"[chain] gauge={ch.get('gauge')!r}; choose from {[g.value for g in Gauge]}"
        ) from None
    n0_raw = ch.get("n0").strip()
    chain = ChainParams(
        N=_parse_int("chain", "n", ch.get("n")),
        delta_base=_parse_float("chain", "delta", ch.get("delta")),
        epsilon_base=_parse_float("chain", "epsilon", ch.get("epsilon")),
        J=_parse_float("chain", "j", ch.get("j")),
        phi=_parse_float("chain", "phi", ch.get("phi")),
        U=_parse_float("chain", "u", ch.get("u")),
        kappa=_parse_float("chain", "kappa", ch.get("kappa")),
        N0=_parse_int("chain", "n0", n0_raw) if n0_raw else None,
        profile=profile,
        gauge=gauge,
    )

    ig = cp["integrator"]
    integrator = SolverOptions(
        dt_init=_parse_optional_float("integrator", "dt_init", ig.get("dt_init")),
        rel_tol=_parse_float("integrator", "rel_tol", ig.get("rel_tol")),
        abs_tol=_parse_float("integrator", "abs_tol", ig.get("abs_tol")),
        t_max=_parse_float("integrator", "t_max", ig.get("t_max")),
        tol_ss=_parse_float("integrator", "tol_ss", ig.get("tol_ss")),
        ss_window=_parse_float("integrator", "ss_window", ig.get("ss_window")),
        sample_dt=_parse_optional_float("integrator", "sample_dt", ig.get("sample_dt")),
        max_density=_parse_float("integrator", "max_density", ig.get("max_density")),
        osc_band=_parse_float("integrator", "osc_band", ig.get("osc_band")),
        tail_fraction=_parse_float("integrator", "tail_fraction", ig.get("tail_fraction")),
    )
    for name in ("rel_tol", "abs_tol", "t_max", "tol_ss", "ss_window"):
        if getattr(integrator, name) <= 0:
            raise ConfigError(f"[integrator] {name} must be positive")

    sw = cp["sweep"]
    sweep_cfg = {
        "delta_min": _parse_float("sweep", "delta_min", sw.get("delta_min")),
        "delta_max": _parse_float("sweep", "delta_max", sw.get("delta_max")),
        "delta_count": _parse_int("sweep", "delta_count", sw.get("delta_count")),
        "epsilon_min": _parse_float("sweep", "epsilon_min", sw.get("epsilon_min")),
        "epsilon_max": _parse_float("sweep", "epsilon_max", sw.get("epsilon_max")),
        "epsilon_count": _parse_int("sweep", "epsilon_count", sw.get("epsilon_count")),
        "workers": _parse_int("sweep", "workers", sw.get("workers")),
        "scan_step": _parse_float("sweep", "scan_step", sw.get("scan_step")),
        "fine_step": _parse_float("sweep", "fine_step", sw.get("fine_step")),
        "sizes": [
            _parse_int("sweep", "sizes", s)
            for s in sw.get("sizes").split(",")
            if s.strip()
        ],
        "scan_min": _parse_optional_float("sweep", "scan_min", sw.get("scan_min")),
        "scan_max": _parse_optional_float("sweep", "scan_max", sw.get("scan_max")),
    }
    if sweep_cfg["delta_max"] < sweep_cfg["delta_min"]:
        raise ConfigError("[sweep] delta range must be ordered")
    if sweep_cfg["epsilon_max"] < sweep_cfg["epsilon_min"]:
        raise ConfigError("[sweep] epsilon range must be ordered")

    oc = cp["oracle"]
    oracle_cfg = {
        "fock_dim": _parse_int("oracle", "fock_dim", oc.get("fock_dim")),
        "tail_tol": _parse_float("oracle", "tail_tol", oc.get("tail_tol")),
        "u_grid": [
            _parse_float("oracle", "u_grid", s)
            for s in oc.get("u_grid").split(",")
            if s.strip()
        ],
    }

    out = cp["output"]
    fmt = out.get("matrix_format")
    if fmt not in ("json", "npz"):
        raise ConfigError(f"[output] matrix_format={fmt!r}; choose json or npz")
    output_cfg = {"directory": out.get("directory"), "matrix_format": fmt}

    resolved = {s: dict(cp[s]) for s in cp.sections()}
    return RunConfig(chain, integrator, sweep_cfg, oracle_cfg, output_cfg, resolved)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _nu_field(v: int) -> str:
    return "" if v == NU_UNKNOWN else str(int(v))


def write_manifest(outdir: Path, command: str, config: RunConfig, extra=None) -> None:
    payload = {
        "package": "kerrchain",
        "version": __version__,
        "command": command,
        "config": config.resolved,
    }
    if extra:
        payload.update(extra)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_matrices(outdir: Path, fmt: str, **matrices) -> Path:
    if fmt == "npz":
        path = outdir / "final_state.npz"
        np.savez_compressed(path, **matrices)
        return path
    path = outdir / "final_state.json"
    payload = {
        name: {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}
        for name, m in matrices.items()
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(config: RunConfig, outdir: Path) -> int:
    params, opts = config.chain, config.integrator
    profiles = build_profiles(params)
    traj = integrate(None, params, profiles, opts, stop_at_steady=True)
    report = report_from_trajectory(traj, params, profiles, opts)

    rows = []
    for state in traj.samples:
        g_diag = np.real(np.diagonal(state.G))
        for j in range(params.N):
            rows.append(
                (
                    state.t,
                    j + 1,
                    float(np.real(state.alpha[j])),
                    float(np.imag(state.alpha[j])),
                    float(g_diag[j]),
                )
            )
    write_csv(outdir / "trajectory.csv", ["t", "j", "re_alpha", "im_alpha", "g_jj"], rows)
    write_csv(
        outdir / "profiles.csv",
        ["j", "epsilon_j", "delta_j", "psi_j"],
        [
            (j + 1, profiles.epsilon[j], profiles.delta[j], profiles.psi[j])
            for j in range(params.N)
        ],
    )

    final = report.state
    _dump_matrices(outdir, config.output["matrix_format"], G=final.G, F=final.F,
                   alpha=final.alpha.reshape(1, -1))
    with open(outdir / "report.json", "w") as fh:
        json.dump(
            {
                "outcome": report.outcome.value,
                "residual": report.residual,
                "t_converged": report.t_converged,
                "envelope": list(report.envelope),
                "mean_density": float(np.mean(np.abs(final.alpha) ** 2)),
                "max_fluct": float(np.max(np.real(np.diagonal(final.G)))),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    write_manifest(outdir, "simulate", config)
    return 0


def cmd_sweep(config: RunConfig, outdir: Path) -> int:
    sw = config.sweep
    deltas = np.linspace(sw["delta_min"], sw["delta_max"], sw["delta_count"])
    epsilons = np.linspace(sw["epsilon_min"], sw["epsilon_max"], sw["epsilon_count"])
    workers = sw["workers"] if sw["workers"] > 0 else None
    diagram = phase_diagram(deltas, epsilons, config.chain, workers, config.integrator)

    rows = [
        (
            pt.delta,
            pt.epsilon,
            pt.phase,
            pt.mean_density,
            pt.max_fluct,
            pt.outcome.value,
        )
        for pt in diagram.flat()
    ]
    write_csv(
        outdir / "phase_diagram.csv",
        ["delta", "epsilon", "phase", "mean_density", "max_fluct", "outcome"],
        rows,
    )
    nu_rows = [
        (pt.delta, pt.epsilon, j + 1, _nu_field(pt.nu_profile[j]))
        for pt in diagram.flat()
        for j in range(config.chain.N)
    ]
    write_csv(
        outdir / "winding_profiles.csv", ["delta", "epsilon", "j", "nu_j"], nu_rows
    )
    write_manifest(
        outdir,
        "sweep",
        config,
        {"workers_used": cpu_workers(workers), "n_points": len(rows)},
    )
    return 0


def _converged_effective(config: RunConfig):
    params, opts = config.chain, config.integrator
    report = find_steady_state(params, opts=opts)
    if report.outcome is not Outcome.CONVERGED:
        raise KerrChainError(
            f"steady state not reached ({report.outcome.value}); "
            "topology diagnostics need a converged state"
        )
    return report, effective_quadratic(params, report.state.alpha)


def cmd_winding(config: RunConfig, outdir: Path) -> int:
    report, effq = _converged_effective(config)
    nu = local_winding_profile(effq, config.chain)
    write_csv(
        outdir / "winding_profile.csv",
        ["j", "nu_j"],
        [(j + 1, _nu_field(nu[j])) for j in range(config.chain.N)],
    )
    write_manifest(outdir, "winding", config, {"outcome": report.outcome.value})
    return 0


def cmd_green(config: RunConfig, outdir: Path, omega: float = 0.0) -> int:
    report, effq = _converged_effective(config)
    nambu = build_nambu(effq, config.chain)
    g = greens_function(nambu, omega)
    rows = [
        (i + 1, j + 1, float(np.real(g[i, j])), float(np.imag(g[i, j])))
        for i in range(g.shape[0])
        for j in range(g.shape[1])
    ]
    write_csv(outdir / "greens_function.csv", ["row", "col", "re", "im"], rows)
    gbar = normalized_correlations(report.state.G)
    write_csv(
        outdir / "normalized_correlations.csv",
        ["row", "col", "re", "im"],
        [
            (i + 1, j + 1, float(np.real(gbar[i, j])), float(np.imag(gbar[i, j])))
            for i in range(config.chain.N)
            for j in range(config.chain.N)
        ],
    )
    sv = svd_analysis(nambu)
    pairing = extended_hermitian_check(nambu)
    with open(outdir / "svd.json", "w") as fh:
        json.dump(
            {
                "omega": omega,
                "s_min": sv.s_min,
                "gap_ratio": sv.gap_ratio,
                "frobenius_G": sv.frobenius_G,
                "max_pairing_defect": pairing["max_pairing_defect"],
                "singular_values": sv.singular_values.tolist(),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    write_manifest(outdir, "green", config, {"outcome": report.outcome.value})
    return 0


def cmd_oracle(config: RunConfig, outdir: Path) -> int:
    oc = config.oracle
    fock = FockConfig(dim=oc["fock_dim"], tail_tol=oc["tail_tol"])
    params = config.chain
    rows = []
    for u in oc["u_grid"]:
        errs = compare_ansatz_error(
            params.epsilon_base, params.delta_base, params.kappa, u, fock
        )
        rows.append((u, errs["err_gaussian"], errs["err_meanfield"]))
    write_csv(
        outdir / "oracle_errors.csv", ["u", "err_gaussian", "err_meanfield"], rows
    )
    write_manifest(outdir, "oracle", config)
    return 0


def cmd_scaling(config: RunConfig, outdir: Path) -> int:
    sw = config.sweep
    workers = sw["workers"] if sw["workers"] > 0 else None
    scan_lo = sw["scan_min"] if sw["scan_min"] is not None else sw["epsilon_min"]
    scan_hi = sw["scan_max"] if sw["scan_max"] is not None else sw["epsilon_max"]
    fit = finite_size_scaling(
        sw["sizes"],
        config.chain.delta_base,
        config.chain,
        (scan_lo, scan_hi),
        config.integrator,
        workers=workers,
    )
    logn = np.log(fit.sizes.astype(float))
    coeffs = np.polyfit(logn, np.log(fit.derivatives), 1)
    fitted = np.exp(np.polyval(coeffs, logn))
    rows = [
        (int(n), fit.eps_critical[i], fit.derivatives[i], float(fitted[i]))
        for i, n in enumerate(fit.sizes)
    ]
    write_csv(
        outdir / "scaling.csv", ["n_sites", "eps_critical", "derivative", "fit"], rows
    )
    write_manifest(
        outdir,
        "scaling",
        config,
        {"exponent_a": fit.exponent_a, "exponent_err": fit.exponent_err},
    )
    return 0


def cmd_critical(config: RunConfig, outdir: Path) -> int:
    sw = config.sweep
    workers = sw["workers"] if sw["workers"] > 0 else None
    scan_lo = sw["scan_min"] if sw["scan_min"] is not None else sw["epsilon_min"]
    scan_hi = sw["scan_max"] if sw["scan_max"] is not None else sw["epsilon_max"]
    scan = critical_drive_scan(
        config.chain.delta_base,
        (scan_lo, scan_hi),
        sw["scan_step"],
        config.chain,
        config.integrator,
        fine_step=sw["fine_step"],
        workers=workers,
    )
    write_csv(
        outdir / "critical_scan.csv",
        ["j", "eps_c_j"],
        [
            (j + 1, scan.eps_c_per_site[j])
            for j in range(config.chain.N)
            if not math.isnan(scan.eps_c_per_site[j])
        ],
    )
    write_csv(
        outdir / "scan_profiles.csv",
        ["epsilon", "j", "alpha_abs"],
        [
            (float(scan.epsilons[i]), j + 1, float(scan.alpha_abs[i, j]))
            for i in range(len(scan.epsilons))
            for j in range(config.chain.N)
        ],
    )
    write_manifest(
        outdir,
        "critical",
        config,
        {"eps_c1": scan.eps_c1, "eps_c2": scan.eps_c2},
    )
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "winding": cmd_winding,
    "green": cmd_green,
    "oracle": cmd_oracle,
    "scaling": cmd_scaling,
    "critical": cmd_critical,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kerrchain",
        description="Driven-dissipative Kerr-chain steady states, sweeps and topology",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="INI run configuration")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--output", help="override output.directory")
    parser.add_argument(
        "--omega", type=float, default=0.0, help="green: response frequency"
    )
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config, args.overrides)
        if args.output:
            config.output["directory"] = args.output
            config.resolved["output"]["directory"] = args.output
        outdir = Path(config.output["directory"])
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command == "green":
            return cmd_green(config, outdir, args.omega)
        return _COMMANDS[args.command](config, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KerrChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
