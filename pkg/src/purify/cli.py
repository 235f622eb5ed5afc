"""
Experiment driver.

Three experiments are available:

``tridiag``
    Random symmetric tridiagonal matrix (uniform diagonal in [-1, 1], unit
    off-diagonal), eigenvalues by implicit QL, stabilized purification for
    each requested target, optionally the naive periodic baseline.
``su2``
    ``L^2`` of N spins in an ``L_z`` sector with its exact spectrum, and a
    basis of one degenerate eigenspace.
``lyapunov``
    Two-trajectory Lyapunov estimate of the naive periodic iteration on a
    random tridiagonal matrix.

Every experiment writes its inputs, CSV traces and a ``summary.json`` into
the output directory. The exit status is 0 when every run converged.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import fileio
from .diagnostics import (
    convergence_ratios, lyapunov_estimate, periodic_shifts)
from .eigen import ql_eigenvalues, spectrum_stats
from .errors import PurifyError
from .linalg import EPS, HermitianOperator
from .richardson import (
    RunConfig, naive_permutation, random_unit_vector, run_naive, run_stabilized)
from .rng import XorShift64Star
from .su2 import SpinSystem, build_l2_operator, exact_spectrum, extract_degenerate_basis, target_index

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_STAGE_FAILED = 2


def generate_random_tridiagonal(n, seed):
    """Diagonal i.i.d. uniform on [-1, 1] from ``XorShift64Star(seed)``; off-diagonal all 1."""
    if n < 2:
        raise ValueError("N must be at least 2")
    d = XorShift64Star(seed).uniform(-1.0, 1.0, n)
    return HermitianOperator.tridiagonal(d, np.ones(n - 1))


@dataclass
class ExperimentManifest:
    experiment: str
    out: str
    seed: int = 1
    n: int = 512
    targets: List[int] = field(default_factory=lambda: [0])
    run_seed: int = 0
    delta_bar: float = 1e-10
    sigma_target: float = 1e-10
    max_iters: Optional[int] = None
    refresh_threshold: float = 1e-5
    refresh_period: int = 0
    baseline: bool = False
    ratio_delta: Optional[float] = None
    spins: int = 4
    spin_magnitude: str = "1/2"
    mz: str = "0"
    target_l: str = "0"
    orthonormalize: bool = False
    steps: int = 5000
    offset: float = 1e-12
    renorm_interval: int = 10

    def __post_init__(self):
        if self.experiment not in ("tridiag", "su2", "lyapunov"):
            raise ValueError(f"unknown experiment {self.experiment!r}")

    def run_config(self):
        return RunConfig(
            delta_bar=self.delta_bar,
            sigma_bar_target=self.sigma_target,
            max_iterations=self.max_iters,
            refresh_threshold=self.refresh_threshold,
            refresh_period=self.refresh_period,
            rng_seed=self.run_seed,
        )


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (PurifyError, ValueError, OSError) as exc:
        raise StageError(name, exc) from exc


def _threads():
    try:
        return max(1, int(os.environ.get("PURIFY_THREADS", "1")))
    except ValueError:
        return 1


def _run_summary(result, log10_r):
    finite = log10_r[np.isfinite(log10_r)]
    return {
        "target": result.target_index,
        "converged": bool(result.converged),
        "iterations": result.iterations_used,
        "final_sigma_bar": result.final_sigma_bar,
        "best_sigma_bar": result.best_sigma_bar,
        "restarts": result.restarts,
        "max_log10_r": float(finite.max()) if finite.size else None,
    }


def _ratio_delta(manifest, spectrum):
    # eigen-equation accuracy: machine precision on the scale of the spectrum
    if manifest.ratio_delta is not None:
        return manifest.ratio_delta
    return EPS * max(1.0, float(np.max(np.abs(spectrum.distinct))))


def _tridiag(manifest, out, summary):
    H = _stage("generate", generate_random_tridiagonal, manifest.n, manifest.seed)
    _stage("write matrix", fileio.write_matrix, out / "matrix.txt", H)
    eigs = _stage("eigensolve", ql_eigenvalues, *H.bands)
    _stage("write eigenvalues", fileio.write_eigs, out / "eigs.txt", eigs)
    spectrum = _stage("spectrum", spectrum_stats, eigs)
    summary.update(delta=spectrum.delta, band_width=spectrum.band_width)
    config = _stage("config", manifest.run_config)
    delta = _ratio_delta(manifest, spectrum)
    summary["ratio_delta"] = delta

    def one(k):
        res = _stage(f"stabilized k={k}", run_stabilized, H, spectrum, k, config)
        fileio.write_trace_csv(out / f"trace_k{k}.csv", res.trace)
        log_r = _stage(f"ratios k={k}", convergence_ratios, spectrum, k, res.counts, delta)
        fileio.write_ratios_csv(out / f"ratios_k{k}.csv", log_r, res.counts)
        entry = _run_summary(res, log_r)
        if manifest.baseline:
            naive = _stage(f"naive k={k}", run_naive, H, spectrum, k, None, config)
            fileio.write_trace_csv(out / f"trace_naive_k{k}.csv", naive.trace)
            entry["naive"] = {
                "converged": bool(naive.converged),
                "iterations": naive.iterations_used,
                "best_sigma_bar": naive.best_sigma_bar,
            }
        return entry

    with ThreadPoolExecutor(max_workers=min(_threads(), len(manifest.targets))) as pool:
        runs = list(pool.map(one, manifest.targets))
    summary["runs"] = runs
    return all(r["converged"] for r in runs)


def _su2(manifest, out, summary):
    system = _stage("spin system", SpinSystem, manifest.spins,
                    Fraction(manifest.spin_magnitude), Fraction(manifest.mz))
    H = _stage("build operator", build_l2_operator, system)
    spectrum = _stage("spectrum", exact_spectrum, system)
    _stage("write matrix", fileio.write_matrix, out / "matrix.txt", H)
    _stage("write eigenvalues", fileio.write_eigs, out / "eigs.txt", spectrum.eigenvalues)
    k = _stage("target", target_index, spectrum, Fraction(manifest.target_l))
    d_l = int(spectrum.multiplicities[k])
    summary.update(sector_dimension=H.dim, n_distinct=spectrum.n_distinct,
                   target_l=str(Fraction(manifest.target_l)), multiplicity=d_l)
    config = _stage("config", manifest.run_config)
    basis = _stage("extract basis", extract_degenerate_basis, H, spectrum,
                   Fraction(manifest.target_l), d_l, config, manifest.orthonormalize)
    fileio.write_trace_csv(out / "trace.csv", basis.master.trace)
    log_r = convergence_ratios(spectrum, k, basis.master.counts, _ratio_delta(manifest, spectrum))
    fileio.write_ratios_csv(out / "ratios.csv", log_r, basis.master.counts)
    for i in range(d_l):
        fileio.write_vector(out / f"basis_{i}.vec", basis.vectors[:, i])
    summary["runs"] = [_run_summary(basis.master, log_r)]
    summary.update(basis_vectors=d_l, gram_min_eigenvalue=basis.gram_min_eigenvalue,
                   max_basis_sigma_bar=max(basis.sigma_bars))
    return True


def _lyapunov(manifest, out, summary):
    H = _stage("generate", generate_random_tridiagonal, manifest.n, manifest.seed)
    _stage("write matrix", fileio.write_matrix, out / "matrix.txt", H)
    eigs = _stage("eigensolve", ql_eigenvalues, *H.bands)
    _stage("write eigenvalues", fileio.write_eigs, out / "eigs.txt", eigs)
    spectrum = _stage("spectrum", spectrum_stats, eigs)
    k = manifest.targets[0]
    perm = naive_permutation(spectrum, k, manifest.run_seed)
    v0 = random_unit_vector(XorShift64Star(manifest.run_seed), H.dim)
    trace = _stage("lyapunov", lyapunov_estimate, H, periodic_shifts(spectrum.distinct, perm),
                   v0, manifest.offset, manifest.steps, manifest.renorm_interval,
                   None, manifest.run_seed + 1)
    fileio.write_lyapunov_csv(out / "lyapunov.csv", trace)
    summary.update(delta=spectrum.delta, band_width=spectrum.band_width,
                   lyapunov_exponent=trace.exponent, steps=manifest.steps)
    return True


_EXPERIMENTS = {"tridiag": _tridiag, "su2": _su2, "lyapunov": _lyapunov}


def run_experiment(manifest):
    """Run one experiment, write its artifacts and return the exit code."""
    out = Path(manifest.out)
    summary = {"manifest": asdict(manifest)}
    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        ok = _EXPERIMENTS[manifest.experiment](manifest, out, summary)
        code = EXIT_OK if ok else EXIT_NOT_CONVERGED
        if not ok:
            print("not converged: see summary.json", file=sys.stderr)
    except StageError as exc:
        print(f"error in stage {exc}", file=sys.stderr)
        summary["error"] = str(exc)
        code = EXIT_STAGE_FAILED
    summary["exit_code"] = code
    summary["wall_time_s"] = time.perf_counter() - start
    try:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error in stage write summary: {exc}", file=sys.stderr)
        return EXIT_STAGE_FAILED
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="purify", description=__doc__.split("\n\n")[0])
    p.add_argument("--experiment", choices=sorted(_EXPERIMENTS), required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, default=512, help="matrix dimension (tridiag, lyapunov)")
    p.add_argument("--seed", type=int, default=1, help="matrix seed")
    p.add_argument("--run-seed", type=int, default=0,
                   help="seed for initial vectors, weights and permutations")
    p.add_argument("--target-k", type=int, nargs="+", default=[0], dest="targets",
                   help="target eigenvalue index; several run in parallel")
    p.add_argument("--delta-bar", type=float, default=1e-10)
    p.add_argument("--sigma-target", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=None,
                   help="iteration budget (default 50 per distinct eigenvalue)")
    p.add_argument("--refresh-threshold", type=float, default=1e-5)
    p.add_argument("--refresh-period", type=int, default=0,
                   help="refresh weights every this many iterations once below the threshold; 0 disables")
    p.add_argument("--baseline", action="store_true", help="also run the naive periodic product")
    p.add_argument("--ratio-delta", type=float, default=None,
                   help="eigen-equation accuracy used in the ratio bound")
    su2 = p.add_argument_group("su2")
    su2.add_argument("--spins", type=int, default=4)
    su2.add_argument("--spin-magnitude", default="1/2")
    su2.add_argument("--mz", default="0")
    su2.add_argument("--target-l", default="0")
    su2.add_argument("--orthonormalize", action="store_true")
    ly = p.add_argument_group("lyapunov")
    ly.add_argument("--steps", type=int, default=5000)
    ly.add_argument("--offset", type=float, default=1e-12)
    ly.add_argument("--renorm-interval", type=int, default=10)
    return p


def main(argv=None):
    args = vars(build_parser().parse_args(argv))
    return run_experiment(ExperimentManifest(**args))


if __name__ == "__main__":
    sys.exit(main())
