"""Configuration-driven command line running the toolkit's experiments.

Usage:
    qtherm <experiment> --config <path> [--threads K] [--output DIR]
    qtherm validate --config <path>

Configs are flat ``key = value`` text files (``#`` comments allowed); unknown
keys are rejected.  Every run writes CSV artifacts (one ``#`` schema-version
line, a header row, data rows with 17-significant-digit floats, sorted by key
so threading never changes bytes) plus a JSON manifest with checksums, written
last.  A single master seed drives all randomness; per-task streams are
derived by hashing (seed, task-id).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from qtherm import __version__
from qtherm.chains import (
    ChainModel,
    ResourceGuardError,
    check_dense_guard,
    check_purification_guard,
    DENSE_EIG_MAX_L,
    PURIFICATION_MAX_L,
)
from qtherm.channel import (
    GROUND,
    EXCITED,
    ThermalQubitChannel,
    BlochVector,
    discrimination_distance,
    discrimination_with_ancilla,
)
from qtherm.lqts import lqts_scaling, lqts_sweep
from qtherm.protocols import (
    SEQUENTIAL_MAX_STEPS,
    MeasurementModel,
    ToyModelConfig,
    fisher_iid,
    fisher_sequential,
    fisher_input_extremes,
    heisenberg_toy,
    optimal_gap_oracle,
    optimal_probe_spectrum,
)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for malformed configs; the message names the offending key."""


# --- config parsing ----------------------------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    kind: str            # "int" | "float" | "str" | "bool" | "int_list" | "str_list"
    default: object = None
    required: bool = False


COMMON_SPEC = {
    "experiment": ParamSpec("str", required=True),
    "seed": ParamSpec("int", default=0),
    "output_path": ParamSpec("str", default=None),
}

EXPERIMENT_SPECS: dict[str, dict[str, ParamSpec]] = {
    "lqts-sweep": {
        "model": ParamSpec("str", default="ising"),
        "n_sites": ParamSpec("int", default=6),
        "beta": ParamSpec("float", required=True),
        "param_min": ParamSpec("float", required=True),
        "param_max": ParamSpec("float", required=True),
        "param_step": ParamSpec("float", default=0.1),
        "n_a_values": ParamSpec("int_list", default=None),
    },
    "lqts-scaling": {
        "model": ParamSpec("str", default="ising"),
        "l_values": ParamSpec("int_list", required=True),
        "beta_factor": ParamSpec("float", default=0.75),
    },
    "discriminate": {
        "t_hot": ParamSpec("float", required=True),
        "t_cold": ParamSpec("float", required=True),
        "omega": ParamSpec("float", default=1.0),
        "gamma": ParamSpec("float", default=1.0),
        "t_max_gamma": ParamSpec("float", default=6.0),
        "n_times": ParamSpec("int", default=120),
    },
    "fisher-compare": {
        "n_steps": ParamSpec("int", default=7),
        "tau_gamma": ParamSpec("float", default=4.0),
        "omega": ParamSpec("float", default=1.0),
        "gamma": ParamSpec("float", default=1.0),
        "n_th_min": ParamSpec("float", default=0.05),
        "n_th_max": ParamSpec("float", default=2.0),
        "n_temperatures": ParamSpec("int", default=40),
        "n_samples": ParamSpec("int", default=200),
    },
    "optimal-probe": {
        "m_levels": ParamSpec("int_list", default=(2, 3, 4, 5)),
        "temperature": ParamSpec("float", default=1.0),
    },
    "heisenberg-toy": {
        "n_probe_values": ParamSpec("int_list", default=(2, 4, 8, 16)),
        "modes": ParamSpec("str_list", default=("product", "noon")),
        "m_bath": ParamSpec("int", default=20),
        "temperature": ParamSpec("float", default=1.0),
        "epsilon": ParamSpec("float", default=1.0),
        "alpha": ParamSpec("float", default=0.004),
        "tau": ParamSpec("float", default=1.0),
        "n_shots": ParamSpec("int", default=10_000),
        "sample_bath": ParamSpec("bool", default=False),
    },
}


def _convert(key: str, raw: str, kind: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "int_list":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if kind == "str_list":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {kind}") from exc


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int
    output_path: str | None

    @property
    def stem(self) -> str:
        return self.output_path or self.experiment


def parse_config(path: str) -> ExperimentConfig:
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value

    experiment = raw.get("experiment")
    if experiment is None:
        raise ConfigError("missing required key 'experiment'")
    if experiment not in EXPERIMENT_SPECS:
        raise ConfigError(
            f"key 'experiment': unknown experiment {experiment!r}; "
            f"choose from {sorted(EXPERIMENT_SPECS)}"
        )
    spec = {**COMMON_SPEC, **EXPERIMENT_SPECS[experiment]}
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r} for experiment {experiment!r}")

    values: dict[str, object] = {}
    for key, ps in spec.items():
        if key in raw:
            values[key] = _convert(key, raw[key], ps.kind)
        elif ps.required:
            raise ConfigError(f"missing required key {key!r} for experiment {experiment!r}")
        else:
            values[key] = ps.default
    return ExperimentConfig(
        experiment=experiment,
        parameters={k: v for k, v in values.items() if k not in COMMON_SPEC},
        seed=values["seed"],
        output_path=values["output_path"],
    )


def derive_seed(master_seed: int, task_id: str) -> int:
    """Stable 63-bit per-task seed from the master seed and a task label."""
    digest = hashlib.blake2s(f"{master_seed}:{task_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


# --- CSV / manifest writing --------------------------------------------------

def format_float(x: float) -> str:
    if isinstance(x, float):
        return f"{x:.16e}"
    return str(x)


def write_csv(path: str, schema_name: str, header: list[str], rows: list[tuple]) -> None:
    text_rows = sorted(",".join(format_float(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema={schema_name} version={SCHEMA_VERSION}\n")
        fh.write(",".join(header) + "\n")
        for row in text_rows:
            fh.write(row + "\n")


def read_csv(path: str) -> tuple[str, list[str], list[list[str]]]:
    """Round-trip parser for the dialect written by write_csv."""
    with open(path, encoding="utf-8") as fh:
        schema_line = fh.readline().rstrip("\n")
        if not schema_line.startswith("# schema="):
            raise ValueError(f"{path}: missing schema-version line")
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{path}: row width {len(row)} != header width {len(header)}")
    return schema_line, header, rows


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path: str, config: ExperimentConfig, outputs: list[str], duration: float) -> None:
    manifest = {
        "toolkit_version": __version__,
        "experiment": config.experiment,
        "seed": config.seed,
        "parameters": {k: (list(v) if isinstance(v, tuple) else v) for k, v in config.parameters.items()},
        "duration_seconds": duration,
        "outputs": {os.path.basename(p): sha256_file(p) for p in outputs},
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


# --- experiment runners ------------------------------------------------------

def _n_th_grid(p: dict) -> np.ndarray:
    return np.geomspace(p["n_th_min"], p["n_th_max"], p["n_temperatures"])


def run_lqts_sweep(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    p = config.parameters
    check_dense_guard(p["n_sites"])
    check_purification_guard(p["n_sites"])
    n_a = p["n_a_values"] or tuple(range(1, p["n_sites"] + 1))
    grid = np.arange(p["param_min"], p["param_max"] + 1e-12, p["param_step"])
    models = [ChainModel(kind=p["model"], n_sites=p["n_sites"], coupling_param=float(g)) for g in grid]

    def one(model: ChainModel):
        return lqts_sweep([model], p["beta"], n_a)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(one, models))
    else:
        tables = [one(m) for m in models]
    rows = [
        (r.model, r.n_sites, r.param, r.beta, r.n_A, r.s_A, r.variance_H, r.s_a, r.q_A_over_q)
        for table in tables
        for r in table
    ]
    out = os.path.join(out_dir, config.stem + ".csv")
    write_csv(out, "lqts-sweep",
              ["model", "L", "param", "beta", "n_A", "s_A", "variance_H", "s_a", "q_A_over_q"],
              rows)
    return [out]


def run_lqts_scaling(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    p = config.parameters
    for l in p["l_values"]:
        check_purification_guard(l)
    result = lqts_scaling(p["model"], p["l_values"], beta_factor=p["beta_factor"])
    rows = [(p["model"], pt.n_sites, pt.n_A, pt.param_at_extremum, pt.s_A_at_extremum)
            for pt in result.points]
    out = os.path.join(out_dir, config.stem + ".csv")
    write_csv(out, "lqts-scaling",
              ["model", "L", "n_A", "param_at_extremum", "s_A_at_extremum"], rows)
    summary = os.path.join(out_dir, config.stem + "_summary.json")
    with open(summary, "w", encoding="utf-8") as fh:
        json.dump({"model": p["model"], "exponent": result.exponent,
                   "intercept": result.intercept}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [out, summary]


def run_discriminate(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    p = config.parameters
    times = np.linspace(0.0, p["t_max_gamma"] / p["gamma"], p["n_times"] + 1)[1:]
    inputs = {"ground": GROUND, "excited": EXCITED, "equator": BlochVector((1.0, 0.0, 0.0))}
    rows = []
    for t in times:
        for label, r0 in inputs.items():
            d = discrimination_distance(p["t_hot"], p["t_cold"], r0, float(t), p["omega"], p["gamma"])
            rows.append((float(t) * p["gamma"], label, d))
        rows.append((
            float(t) * p["gamma"], "ancilla",
            discrimination_with_ancilla(p["t_hot"], p["t_cold"], float(t), p["omega"], p["gamma"]),
        ))
    out = os.path.join(out_dir, config.stem + ".csv")
    write_csv(out, "discrimination", ["t_gamma", "r0_class", "distance"], rows)
    return [out]


def run_fisher_compare(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    p = config.parameters
    if p["n_steps"] > SEQUENTIAL_MAX_STEPS:
        raise ResourceGuardError(
            f"n_steps={p['n_steps']} exceeds the sequential branch guard "
            f"(max {SEQUENTIAL_MAX_STEPS})"
        )
    povm = MeasurementModel.sigma_z_projectors()
    tau = p["tau_gamma"] / p["gamma"]
    n = p["n_steps"]

    def one(n_th: float):
        temperature = p["omega"] / math.log1p(1.0 / n_th)
        ch = ThermalQubitChannel(omega=p["omega"], gamma=p["gamma"], n_th=float(n_th))
        out_rows = []
        for protocol, fi in (("iid", fisher_iid), ("sequential", fisher_sequential)):
            for label, r0 in (("ground", GROUND), ("excited", EXCITED)):
                val = fi(r0.to_density(), ch, tau, povm, n).value
                out_rows.append((protocol, n, p["tau_gamma"], temperature, float(n_th), val, label))
            ex = fisher_input_extremes(
                ch, tau, povm, n, protocol,
                n_samples=p["n_samples"],
                seed=derive_seed(config.seed, f"fisher-compare:{protocol}:{n_th:.12e}"),
            )
            out_rows.append((protocol, n, p["tau_gamma"], temperature, float(n_th), ex.mean, "mean"))
        return out_rows

    grid = _n_th_grid(p)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, grid))
    else:
        chunks = [one(g) for g in grid]
    rows = [row for chunk in chunks for row in chunk]
    out = os.path.join(out_dir, config.stem + ".csv")
    write_csv(out, "fisher-compare",
              ["protocol", "N", "tau_gamma", "T", "n_th", "fisher_value", "input_class"], rows)
    return [out]


def run_optimal_probe(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    p = config.parameters
    rows = []
    for m in p["m_levels"]:
        sp = optimal_probe_spectrum(
            m, p["temperature"], seed=derive_seed(config.seed, f"optimal-probe:{m}")
        )
        oracle = optimal_gap_oracle(m, p["temperature"])
        rows.append((m, p["temperature"], sp.gap, oracle, sp.variance,
                     sp.excited_degeneracy_spread()))
    out = os.path.join(out_dir, config.stem + ".csv")
    write_csv(out, "optimal-probe",
              ["m_levels", "T", "gap", "oracle_gap", "variance", "degeneracy_spread"], rows)
    return [out]


def run_heisenberg_toy(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    p = config.parameters
    rows = []
    for mode in p["modes"]:
        for n in p["n_probe_values"]:
            cfg = ToyModelConfig(
                m_bath=p["m_bath"], n_probe=int(n), temperature=p["temperature"],
                epsilon=p["epsilon"], alpha=p["alpha"], tau=p["tau"],
                n_shots=p["n_shots"], mode=mode, sample_bath=p["sample_bath"],
                seed=derive_seed(config.seed, f"heisenberg-toy:{mode}:{n}"),
            )
            res = heisenberg_toy(cfg)
            rows.append((int(n), mode, res.phase_rmse, res.temperature_rmse))
    out = os.path.join(out_dir, config.stem + ".csv")
    write_csv(out, "heisenberg-toy",
              ["n_probe", "mode", "phase_rmse", "temperature_rmse"], rows)
    return [out]


RUNNERS = {
    "lqts-sweep": run_lqts_sweep,
    "lqts-scaling": run_lqts_scaling,
    "discriminate": run_discriminate,
    "fisher-compare": run_fisher_compare,
    "optimal-probe": run_optimal_probe,
    "heisenberg-toy": run_heisenberg_toy,
}


# --- validate ----------------------------------------------------------------

def validate_report(config: ExperimentConfig) -> list[str]:
    """Dry-run resource estimates; returns the list of violations (empty if OK)."""
    p = config.parameters
    violations: list[str] = []
    if config.experiment in ("lqts-sweep", "lqts-scaling"):
        ls = [p["n_sites"]] if config.experiment == "lqts-sweep" else list(p["l_values"])
        for l in ls:
            dim = 2**l
            mem = 16 * (2 ** (2 * l))
            print(f"L={l}: matrix dim {dim}, purification vector dim 2**{2 * l}, "
                  f"~{mem / 2**20:.1f} MiB per vector")
            if l > DENSE_EIG_MAX_L:
                violations.append(f"L={l} exceeds the dense-diagonalization guard L <= {DENSE_EIG_MAX_L}")
            if l > PURIFICATION_MAX_L:
                violations.append(f"L={l} exceeds the purification guard L <= {PURIFICATION_MAX_L}")
    elif config.experiment == "fisher-compare":
        n = p["n_steps"]
        print(f"sequential branches: 2**{n} = {2**n}")
        if n > SEQUENTIAL_MAX_STEPS:
            violations.append(
                f"n_steps={n}: 2**{n} branches exceeds the guard (max {SEQUENTIAL_MAX_STEPS} steps)"
            )
    elif config.experiment == "heisenberg-toy":
        guard = max(p["n_probe_values"]) * p["alpha"] * p["m_bath"] * p["tau"]
        print(f"max phase N*alpha*M*tau = {guard:.4f} (must stay below pi)")
        if guard >= math.pi:
            violations.append(f"identifiability guard: N*alpha*M*tau = {guard:.4f} >= pi")
    else:
        print(f"experiment {config.experiment!r}: no resource guards apply")
    return violations


# --- entry point -------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qtherm",
        description="Quantum-thermometry experiments (hbar = k_B = 1, beta = 1/T).",
    )
    parser.add_argument("command", help="experiment name or 'validate'")
    parser.add_argument("--config", required=True, help="flat key=value config file")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for grid sweeps (default: QTHERM_THREADS or 1)")
    parser.add_argument("--output", default=".", help="output directory")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("QTHERM_THREADS", "1"))
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2

    try:
        config = parse_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        violations = validate_report(config)
        if violations:
            for v in violations:
                print(f"violation: {v}")
        else:
            print("ok: no violations")
        return 0

    if args.command != config.experiment:
        print(
            f"error: command {args.command!r} does not match config experiment "
            f"{config.experiment!r}", file=sys.stderr,
        )
        return 2

    os.makedirs(args.output, exist_ok=True)
    start = time.monotonic()
    try:
        outputs = RUNNERS[config.experiment](config, args.output, threads)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    duration = time.monotonic() - start
    manifest_path = os.path.join(args.output, config.stem + ".manifest.json")
    write_manifest(manifest_path, config, outputs, duration)
    for path in outputs + [manifest_path]:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
