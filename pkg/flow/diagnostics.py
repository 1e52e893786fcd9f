# flow/diagnostics.py - v0.1.0
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from config import settings
from flow.solver import FlowError, FlowTrajectory
from lie.algebra import bracket

logger = logging.getLogger(__name__)


def eigenvalues(a: np.ndarray) -> np.ndarray:
    """Spectrum of a balanced, Hessenberg-reduced copy."""
    balanced, _ = scipy.linalg.matrix_balance(a, permute=True, separate=False)
    return scipy.linalg.eigvals(scipy.linalg.hessenberg(balanced))


def spectrum_distance(first: np.ndarray, second: np.ndarray) -> float:
    """Largest gap in the optimal matching of two eigenvalue multisets."""
    cost = np.abs(first[:, None] - second[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if len(rows) else 0.0


def _map(function, items):
    if settings.THREADS > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=settings.THREADS) as pool:
            return list(pool.map(function, items))
    return [function(item) for item in items]


def spectral_drift(traj: FlowTrajectory) -> list[float]:
    """Per-sample distance between the spectrum of a(t_i) and that of a0; NaN where the eigensolver fails."""
    reference = eigenvalues(traj.problem.a0.entries)

    def drift(sample):
        try:
            return spectrum_distance(eigenvalues(sample.a.entries), reference)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.error(f"Eigenvalue computation failed at t={sample.t:.6g}: {e}")
            return float("nan")
    return _map(drift, list(traj.samples))


def lax_defect(traj: FlowTrajectory) -> list[float]:
    """Central-difference residual of da/dt = [a, pi_+ a]; NaN at the two endpoints."""
    if len(traj) < 3:
        raise FlowError(f"The Lax defect needs at least 3 samples, got {len(traj)}.")
    spec = traj.problem.spec
    samples = traj.samples
    out = [float("nan")]
    for prev, current, nxt in zip(samples, samples[1:], samples[2:]):
        derivative = (nxt.a - prev.a) * (1.0 / (nxt.t - prev.t))
        out.append((derivative - bracket(current.a, spec.plus(current.a))).frobenius_norm())
    out.append(float("nan"))
    return out


def symmetry_defect(traj: FlowTrajectory) -> list[float]:
    return [(s.a - s.a.transpose()).frobenius_norm() for s in traj.samples]


def conjugation_defect(traj: FlowTrajectory) -> list[float]:
    """||a(t_i) - g_i^{-1} a0 g_i||_F."""
    a0 = traj.problem.a0
    return [(s.a - s.transporter.conjugate(a0)).frobenius_norm() for s in traj.samples]


def finite_max(values) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return max(finite) if finite else 0.0


def summarize(traj: FlowTrajectory) -> dict:
    drift = spectral_drift(traj)
    defect = lax_defect(traj) if len(traj) >= 3 else [float("nan")] * len(traj)
    return {
        "method": traj.method,
        "samples": len(traj),
        "max_drift": finite_max(drift),
        "failed_drifts": int(sum(1 for v in drift if np.isnan(v))),
        "max_lax_defect": finite_max(defect),
        "max_symmetry_defect": finite_max(symmetry_defect(traj)),
        "max_conjugation_defect": finite_max(conjugation_defect(traj)),
        "drift": drift,
        "lax_defect": defect,
        **traj.metadata,
    }


def within_bounds(summary: dict, drift_bound: float | None = None, defect_bound: float | None = None) -> bool:
    drift_bound = settings.DRIFT_BOUND if drift_bound is None else drift_bound
    defect_bound = settings.DEFECT_BOUND if defect_bound is None else defect_bound
    if summary.get("failed_drifts", 0):
        return False
    return summary["max_drift"] <= drift_bound and summary["max_lax_defect"] <= defect_bound


def trajectory_frame(traj: FlowTrajectory, summary: dict | None = None) -> pd.DataFrame:
    """One row per sample: t, a_ij in row-major order, drift, defect."""
    summary = summary or summarize(traj)
    n = traj.problem.a0.dim
    rows = np.array([s.a.entries.flatten() for s in traj.samples])
    frame = pd.DataFrame(rows, columns=[f"a_{i + 1}{j + 1}" for i in range(n) for j in range(n)])
    frame.insert(0, "t", traj.times)
    frame["drift"] = summary["drift"]
    frame["defect"] = summary["lax_defect"]
    return frame
