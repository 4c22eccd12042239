"""Config-driven experiment runner.

A run is described by one JSON file with nested sections mirroring the module
names; see README for an annotated example per experiment kind.  Outputs land
in one directory per run: ``manifest.json`` (config hash, seeds, versions,
timestamp), CSV data files, and ``summary.json``.  Given identical config and
seeds the data files are byte-identical across runs; timestamps are isolated
in the manifest.

Exit codes: 0 success, 1 validation error, 2 runtime/resource error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analytics, obs, protocols, spectral
from . import circuits as cc
from . import noise as nz
from .qstate import SpinPattern

EXPERIMENT_KINDS = ("ghz-verify", "mqc", "parity", "interferometry",
                    "dtc-spectrum", "ea-scan", "mbl-scan", "rabi-decay",
                    "lightcone", "analytics")


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


class RunConfig:
    """Validated experiment description.

    Required: ``experiment``; most kinds need ``n``.  Optional sections:
    ``pattern`` (bit string), ``floquet`` {lambda1, lambda2, phi1, phi2, j, t,
    x_flags}, ``noise`` {ep_1q, ep_2q, t1, t2se, ep_cycle, n_traj},
    ``sampling`` {grid, m, cycles, gammas, lambdas, sizes, n_samples, shots,
    layout}, ``seeds`` (list of ints), ``output`` (directory).
    """

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(raw) - {"experiment", "n", "pattern", "floquet", "noise",
                              "sampling", "seeds", "output", "workers"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        self.raw = raw
        self.experiment = raw.get("experiment")
        if self.experiment not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"experiment must be one of {EXPERIMENT_KINDS}, got {self.experiment!r}")
        self.n = raw.get("n")
        if self.experiment != "analytics":
            if not isinstance(self.n, int) or self.n < 2:
                raise ConfigError("n must be an integer >= 2")
        pattern = raw.get("pattern")
        if pattern is not None:
            if not isinstance(pattern, str) or set(pattern) - {"0", "1"}:
                raise ConfigError("pattern must be a bit string")
            if self.n is not None and len(pattern) != self.n:
                raise ConfigError("pattern length must equal n")
            self.pattern = SpinPattern.from_string(pattern)
        else:
            self.pattern = SpinPattern.antiferromagnetic(self.n) if self.n else None
        self.floquet = dict(raw.get("floquet", {}))
        self.noise = dict(raw.get("noise", {}))
        self.sampling = dict(raw.get("sampling", {}))
        self.seeds = list(raw.get("seeds", [0, 1, 2, 3, 4]))
        if not all(isinstance(s, int) for s in self.seeds):
            raise ConfigError("seeds must be integers")
        self.workers = raw.get("workers")
        self.output = raw.get("output", "runs")
        self._validate_caps()

    def _validate_caps(self):
        dense_kinds = {"dtc-spectrum", "ea-scan", "mbl-scan"}
        cap = int(self.sampling.get("cap", spectral.DENSE_CAP_DEFAULT))
        if self.experiment in dense_kinds and self.n and self.n > cap:
            raise ConfigError(
                f"n={self.n} exceeds the dense diagonalization cap {cap}")
        sizes = self.sampling.get("sizes")
        if sizes and max(sizes) > cap:
            raise ConfigError(f"sizes {sizes} exceed the dense cap {cap}")
        if self.experiment in ("lightcone", "interferometry", "mqc", "parity",
                               "ghz-verify"):
            if self.n and self.n > 24 and self.experiment != "ghz-verify":
                raise ConfigError(f"n={self.n} exceeds the statevector cap 24")

    def floquet_spec(self) -> cc.FloquetSpec:
        kw = dict(self.floquet)
        x_flags = kw.pop("x_flags", None)
        if x_flags is not None:
            kw["x_flags"] = tuple(x_flags)
        j_couplings = kw.pop("j_couplings", None)
        if j_couplings is not None:
            kw["j_couplings"] = tuple(j_couplings)
        defaults = dict(lambda1=0.05, lambda2=0.05,
                        phi1=-np.pi / 2, phi2=np.pi / 2 - 0.6, j=1.0, t=1.0)
        defaults.update(kw)
        try:
            return cc.FloquetSpec(n=self.n, **defaults)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid floquet section: {exc}") from None

    def noise_model(self) -> nz.NoiseModel | None:
        if not self.noise:
            return None
        kw = dict(self.noise)
        kw.pop("n_traj", None)
        try:
            return nz.NoiseModel(seed=self.seeds[0], **kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid noise section: {exc}") from None

    @property
    def n_traj(self) -> int:
        return int(self.noise.get("n_traj", 1))

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode()).hexdigest()


def _grid_layout(cfg: RunConfig):
    shape = cfg.sampling.get("layout")
    if shape is None:
        shape = [1, cfg.n]
    rows, cols = int(shape[0]), int(shape[1])
    if rows * cols != cfg.n:
        raise ConfigError(f"layout {rows}x{cols} does not cover n={cfg.n} qubits")
    lay = cc.Layout2D.grid(rows, cols)
    return lay, sorted(lay.active)


def _prep_circuit(cfg: RunConfig):
    lay, targets = _grid_layout(cfg)
    return cc.compile_circuit(cc.generate_ghz_circuit(lay, targets, cfg.pattern))


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _write_summary(outdir: Path, summary: dict) -> None:
    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


# --------------------------------------------------------------------------
# experiment implementations
# --------------------------------------------------------------------------

def _run_ghz_verify(cfg: RunConfig, outdir: Path) -> dict:
    lay, targets = _grid_layout(cfg)
    raw = cc.generate_ghz_circuit(lay, targets, cfg.pattern)
    compiled = cc.compile_circuit(raw)
    fidelity = cc.ghz_state_fidelity(compiled, cfg.pattern)
    (outdir / "circuit.txt").write_text(cc.circuit_to_text(compiled))
    return {"fidelity": fidelity, "cnot_layers": raw.n_layers - 1,
            "compiled_layers": compiled.n_layers}


def _run_mqc(cfg: RunConfig, outdir: Path) -> dict:
    prep = _prep_circuit(cfg)
    grid = cfg.sampling.get("grid", "sparse")
    trace = protocols.mqc_run(prep, cfg.pattern, grid)
    spectrum = protocols.mqc_fourier(trace)
    protocols.write_trace_csv(outdir / "trace.csv", trace, cfg.seeds[0])
    protocols.write_spectrum_csv(outdir / "spectrum.csv", spectrum, cfg.n,
                                 grid, cfg.seeds[0])
    state = cc.run(prep)
    p_s = float(abs(state.amplitudes[cfg.pattern.basis_index()]) ** 2)
    p_sb = float(abs(state.amplitudes[cfg.pattern.complement().basis_index()]) ** 2)
    report = protocols.ghz_fidelity((p_s, p_sb), spectrum, cfg.n)
    return {"kf_n": spectrum.peak(cfg.n), "kf_0": spectrum.peak(0),
            "p_s": report.p_s, "p_sbar": report.p_sbar,
            "offdiag": report.offdiag, "fidelity": report.fidelity}


def _run_parity(cfg: RunConfig, outdir: Path) -> dict:
    prep = _prep_circuit(cfg)
    state = cc.run(prep)
    gammas = protocols.parity_gamma_grid(cfg.n, cfg.sampling.get("m"))
    values = protocols.parity_scan(state, cfg.pattern, gammas)
    amp, phase = protocols.fit_parity_amplitude(gammas, values, cfg.n)
    with open(outdir / "parity.csv", "w") as fh:
        fh.write(f"# N={cfg.n} seed={cfg.seeds[0]}\ngamma,P\n")
        for g, v in zip(gammas, values):
            fh.write(f"{g:.12g},{v:.12g}\n")
    return {"amplitude": amp, "phase": phase, "offdiag": amp / 2}


def _run_interferometry(cfg: RunConfig, outdir: Path) -> dict:
    prep = _prep_circuit(cfg)
    spec = cfg.floquet_spec()
    cycles = int(cfg.sampling.get("cycles", 30))
    m = cfg.sampling.get("m")
    trace = protocols.cat_interferometry(
        prep, cfg.pattern, spec, cycles, m=m, noise=cfg.noise_model(),
        n_traj=cfg.n_traj, seed=cfg.seeds[0])
    protocols.write_interferometry_csv(outdir / "interferometry.csv", trace,
                                       cfg.seeds[0])
    even = trace.fourier[::2]
    return {"kf2n_t0": float(trace.fourier[0]),
            "even_cycle_min_ratio": float((even / trace.fourier[0]).min()),
            "odd_cycle_max": float(trace.fourier[1::2].max()) if cycles else 0.0}


def _run_dtc_spectrum(cfg: RunConfig, outdir: Path) -> dict:
    spec = cfg.floquet_spec()
    report = spectral.diagonalize(spectral.build_floquet_matrix(spec), cfg.pattern)
    pair = spectral.scar_pair(report, cfg.pattern)
    idx = report.scar_index()
    with open(outdir / "spectrum.csv", "w") as fh:
        fh.write(f"# N={cfg.n} seed={cfg.seeds[0]}\n")
        fh.write("lambda,N,sample,ipr_target,chi,gap\n")
        fh.write(f"{spec.lambda1:.12g},{cfg.n},0,{report.ipr[idx]:.12g},"
                 f"{report.ea[idx]:.12g},{pair.gap:.12g}\n")
    return {"scar_ipr": float(report.ipr[idx]), "scar_chi": float(report.ea[idx]),
            "pair_gap": pair.gap, "max_residual": report.max_residual}


def _run_ea_scan(cfg: RunConfig, outdir: Path, workers: int | None) -> dict:
    lambdas = cfg.sampling.get("lambdas", [0.2, 0.3, 0.4, 0.5])
    sizes = cfg.sampling.get("sizes", [6, 8])
    n_samples = int(cfg.sampling.get("n_samples", 20))
    kind = cfg.sampling.get("kind", "scar")
    result = spectral.ea_crossing_scan(kind, lambdas, sizes, n_samples,
                                       seed=cfg.seeds[0], n_workers=workers)
    with open(outdir / "ea_scan.csv", "w") as fh:
        fh.write(f"# kind={kind} seed={cfg.seeds[0]}\nlambda,N,chi\n")
        for i, n in enumerate(sizes):
            for j, lam in enumerate(lambdas):
                fh.write(f"{lam:.12g},{n},{result['chi'][i, j]:.12g}\n")
    summary = {"kind": kind, "chi": result["chi"].tolist(),
               "lambdas": lambdas, "sizes": sizes}
    try:
        summary["crossing"] = spectral.crossing_point(
            lambdas, result["chi"][0], result["chi"][-1])
    except ValueError:
        summary["crossing"] = None
    return summary


def _run_mbl_scan(cfg: RunConfig, outdir: Path) -> dict:
    lambdas = cfg.sampling.get("lambdas", [0.02, 0.05, 0.1])
    n_samples = int(cfg.sampling.get("n_samples", 20))
    ens = spectral.DisorderEnsemble(n_samples=n_samples, seed=cfg.seeds[0])
    result = spectral.mbl_ensemble_scan(ens, cfg.pattern, lambdas, cfg.n)
    with open(outdir / "mbl_scan.csv", "w") as fh:
        fh.write(f"# N={cfg.n} seed={cfg.seeds[0]}\nlambda,N,sample,ipr_target\n")
        for i, lam in enumerate(lambdas):
            for s in range(n_samples):
                fh.write(f"{lam:.12g},{cfg.n},{s},{result['ipr'][i, s]:.12g}\n")
    return {"lambdas": lambdas, "mean": result["mean"].tolist(),
            "top_decile_mean": result["top_decile_mean"].tolist(),
            "bottom_decile_mean": result["bottom_decile_mean"].tolist(),
            "seeds": [str(s) for s in result["seeds"]]}


def _run_rabi_decay(cfg: RunConfig, outdir: Path) -> dict:
    fl = cfg.floquet_spec()
    det = analytics.rabi_detuning(fl.lambda1, fl.phi1, fl.phi2)
    cycles = int(cfg.sampling.get("cycles", 30))
    rows = []
    for t in range(0, cycles + 1, 2):
        exact, approx = analytics.rabi_subspace_probability(det, cfg.n, t)
        rows.append((t, exact, approx))
    with open(outdir / "rabi.csv", "w") as fh:
        fh.write(f"# N={cfg.n} seed={cfg.seeds[0]}\nt,P_exact,P_approx\n")
        for t, e, a in rows:
            fh.write(f"{t},{e:.12g},{a:.12g}\n")
    return {"alpha": det.alpha, "n_z": det.n_z, "lambda_eff": det.lambda_eff,
            "p_final_exact": rows[-1][1]}


def _run_lightcone(cfg: RunConfig, outdir: Path) -> dict:
    spec = cfg.floquet_spec()
    cycles = int(cfg.sampling.get("cycles", 20))
    center = cfg.sampling.get("center")
    report = obs.lightcone_scan(cfg.pattern, spec, cycles,
                                noise=cfg.noise_model(), n_traj=cfg.n_traj,
                                seed=cfg.seeds[0],
                                center=tuple(center) if center else None)
    obs.write_lightcone_csv(outdir / "lightcone.csv", report, cfg.seeds[0])
    return {"center": list(report.center), "velocity": report.velocity,
            "final_radius": float(report.radius[-1])}


def _run_analytics(cfg: RunConfig, outdir: Path) -> dict:
    fl = cfg.floquet
    lam1 = fl.get("lambda1", 0.05)
    lam2 = fl.get("lambda2", 0.05)
    phi1 = fl.get("phi1", -np.pi / 2)
    phi2 = fl.get("phi2", np.pi / 2 - 0.6)
    j = fl.get("j", 1.0)
    det = analytics.rabi_detuning(lam1, phi1, phi2)
    vb = analytics.butterfly_velocity(lam1, lam2, phi1, phi2, j)
    out = {
        "inputs": {"lambda1": lam1, "lambda2": lam2, "phi1": phi1,
                   "phi2": phi2, "j": j},
        "rabi": {"alpha": det.alpha, "n_z": det.n_z,
                 "lambda_eff": det.lambda_eff},
        "butterfly": {"vb1": vb.vb1, "vb2": vb.vb2, "vb": vb.vb},
    }
    fit = cfg.sampling.get("ipr_fit")
    if fit:
        model = analytics.fit_vbar2(fit["lambda"], fit["n"], fit["ipr"])
        val, err = analytics.analytic_ipr(model, fit.get("at_lambda", fit["lambda"]),
                                          fit.get("at_n", fit["n"]))
        out["ipr"] = {"vbar2": model.vbar2, "value": val, "error_bound": err}
    return out


def run(config: RunConfig, outdir: str | Path | None = None,
        workers: int | None = None, dry_run: bool = False) -> dict:
    """Execute one experiment; returns the summary dict."""
    outdir = Path(outdir if outdir is not None else config.output)
    if dry_run:
        return {"experiment": config.experiment, "validated": True,
                "config_hash": config.config_hash()}
    outdir.mkdir(parents=True, exist_ok=True)
    dispatch = {
        "ghz-verify": lambda: _run_ghz_verify(config, outdir),
        "mqc": lambda: _run_mqc(config, outdir),
        "parity": lambda: _run_parity(config, outdir),
        "interferometry": lambda: _run_interferometry(config, outdir),
        "dtc-spectrum": lambda: _run_dtc_spectrum(config, outdir),
        "ea-scan": lambda: _run_ea_scan(config, outdir, workers or config.workers),
        "mbl-scan": lambda: _run_mbl_scan(config, outdir),
        "rabi-decay": lambda: _run_rabi_decay(config, outdir),
        "lightcone": lambda: _run_lightcone(config, outdir),
        "analytics": lambda: _run_analytics(config, outdir),
    }
    summary = dispatch[config.experiment]()
    summary = {"experiment": config.experiment, **summary}
    _write_summary(outdir, summary)
    manifest = {
        "config_hash": config.config_hash(),
        "seeds": config.seeds,
        "versions": {"catscar": __version__, "numpy": np.__version__},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def load_config(path: str | Path, seed_override: int | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    if seed_override is not None:
        raw["seeds"] = [seed_override + k for k in range(5)]
    return RunConfig(raw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="catscar",
        description="GHZ generation, coherence protocols, and driven-ring spectra")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute an experiment config")
    runp.add_argument("-c", "--config", required=True, help="JSON config path")
    runp.add_argument("-w", "--workers", type=int, default=None)
    runp.add_argument("-s", "--seed", type=int, default=None,
                      help="override the seed list with seed..seed+4")
    runp.add_argument("-o", "--out", default=None, help="output directory")
    runp.add_argument("--dry-run", action="store_true",
                      help="validate the config and exit")

    anp = sub.add_parser("analytics",
                         help="print closed-form predictions as JSON")
    anp.add_argument("--lambda1", type=float, default=0.05)
    anp.add_argument("--lambda2", type=float, default=0.05)
    anp.add_argument("--phi1", type=float, default=-np.pi / 2)
    anp.add_argument("--phi2", type=float, default=np.pi / 2 - 0.6)
    anp.add_argument("--j", type=float, default=1.0)

    args = parser.parse_args(argv)
    if args.command == "analytics":
        cfg = RunConfig({"experiment": "analytics",
                         "floquet": {"lambda1": args.lambda1,
                                     "lambda2": args.lambda2,
                                     "phi1": args.phi1, "phi2": args.phi2,
                                     "j": args.j}})
        print(json.dumps(_run_analytics(cfg, Path(".")), indent=2,
                         sort_keys=True, default=_json_default))
        return 0
    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        summary = run(cfg, outdir=args.out, workers=args.workers,
                      dry_run=args.dry_run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (MemoryError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True, default=_json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
