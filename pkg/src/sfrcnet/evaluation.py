"""Error metrics and virtual-sample test campaigns.

MeRE is the RMS stress error and MaRE the maximum absolute stress error,
both per component and normalized by the matrix yield stress.  Campaigns
drive the mean-field oracle through representative load programs and score
a predictor on the oracle's strain series.

A predictor is any callable (strain_plain, orientation_components, vf) ->
stress_plain operating on plain-component series.
"""
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .homogenization import HomogenizerOptions, MeanField, LoadProgram, \
    cycle_program, cycle_series
from .materials import MatrixParams
from .orientation import Microstructure, from_components
from .surrogate import forward as _net_forward


@dataclass(frozen=True)
class ErrorReport:
    """Per-component MeRE/MaRE of one comparison."""
    mere: np.ndarray
    mare: np.ndarray
    n_rows: int
    meta: dict = field(default_factory=dict)

    @property
    def mere_avg(self):
        return float(np.mean(self.mere))

    @property
    def mare_avg(self):
        return float(np.mean(self.mare))


def mere_mare(pred, truth, sigma_y, meta=None):
    """Compute the error report of a predicted stress series."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("series length/shape mismatch")
    if sigma_y <= 0.0:
        raise ValueError("sigma_y must be positive")
    err = pred - truth
    mere = np.sqrt(np.mean(err ** 2, axis=0)) / sigma_y
    mare = np.abs(err).max(axis=0) / sigma_y
    return ErrorReport(mere=mere, mare=mare, n_rows=pred.shape[0],
                       meta=dict(meta or {}))


def resample_series(series, factor):
    """Linear reinterpolation to round(factor * n_steps) steps over t in [0, 1]."""
    if factor <= 0.0:
        raise ValueError("factor must be positive")
    series = np.asarray(series, dtype=float)
    n_steps = series.shape[0] - 1
    new_steps = max(int(round(factor * n_steps)), 1)
    t_old = np.linspace(0.0, 1.0, n_steps + 1)
    t_new = np.linspace(0.0, 1.0, new_steps + 1)
    return np.column_stack([np.interp(t_new, t_old, series[:, j])
                            for j in range(series.shape[1])])


# ---------------------------------------------------------------------------
# Virtual samples (orientation tensor components a11..a23 and vf).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirtualSample:
    label: str
    components: tuple
    vf: float

    def microstructure(self, fiber=None):
        a = from_components(self.components)
        kwargs = {} if fiber is None else {"fiber": fiber}
        return Microstructure(a=a, vf=self.vf, **kwargs)


VIRTUAL_SAMPLES = (
    VirtualSample("1", (0.477, 0.188, 0.335, -0.080, -0.071, -0.183), 0.130),
    VirtualSample("2", (0.094, 0.692, 0.214, -0.103, 0.012, -0.255), 0.144),
    VirtualSample("3", (0.649, 0.139, 0.212, 0.011, -0.117, -0.154), 0.131),
    VirtualSample("4", (0.392, 0.225, 0.382, -0.142, 0.080, 0.152), 0.139),
    VirtualSample("5", (0.000, 0.919, 0.081, 0.015, 0.005, 0.273), 0.109),
    VirtualSample("1D", (1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.120),
    VirtualSample("2D", (0.5, 0.5, 0.0, 0.0, 0.0, 0.0), 0.120),
    VirtualSample("3D", (1 / 3, 1 / 3, 1 / 3, 0.0, 0.0, 0.0), 0.120),
)


def surrogate_predictor(model):
    """Wrap a trained network as a campaign predictor."""
    def predict(strain_plain, orientation, vf):
        n_rows = strain_plain.shape[0]
        feats = np.empty((n_rows, 13))
        feats[:, :6] = orientation
        feats[:, 6] = vf
        feats[:, 7:] = strain_plain
        return _net_forward(model, feats, training=False)
    return predict


def oracle_predictor(matrix=None, fiber=None, options=None):
    """Predictor that re-integrates strains through the mean-field oracle."""
    def predict(strain_plain, orientation, vf):
        micro = Microstructure(a=from_components(orientation), vf=vf,
                               **({} if fiber is None else {"fiber": fiber}))
        mf = MeanField(micro, matrix=matrix, options=options)
        return mf.run_path(strain_plain)
    return predict


#: (name, controlled component indices, fully strain-controlled flag)
ONE_CYCLE_CASES = (
    ("uniaxial_s11", (0,), False),
    ("shear_s12", (5,), False),
    ("biaxial_s11_s22", (0, 1), False),
    ("biaxial_s11_s23", (0, 3), False),
    ("plane_strain_e11_e22", (0, 1), True),
)


def _case_program(components, eps_c, n_steps, cycles, fully_controlled):
    prog = cycle_program(components, eps_c=eps_c, n_steps=n_steps,
                         cycles=cycles)
    if fully_controlled:
        zeros = np.zeros(prog.n_rows)
        imposed = dict(prog.imposed)
        for idx in range(6):
            imposed.setdefault(idx, zeros.copy())
        prog = LoadProgram(imposed=imposed, n_rows=prog.n_rows).validate()
    return prog


def run_case(predict, sample, components, eps_c, n_steps, cycles=1,
             fully_controlled=False, matrix=None, fiber=None, options=None,
             meta=None):
    """Run one load case: oracle truth plus predictor comparison."""
    matrix = matrix if matrix is not None else MatrixParams()
    micro = sample.microstructure(fiber=fiber)
    mf = MeanField(micro, matrix=matrix, options=options)
    prog = _case_program(components, eps_c, n_steps, cycles, fully_controlled)
    t, eps, sig = mf.run_program(prog)
    orientation = np.asarray(sample.components, dtype=float)
    pred = predict(eps, orientation, sample.vf)
    info = {"sample": sample.label, "eps_c": eps_c, "cycles": cycles,
            "vf": sample.vf}
    info.update(meta or {})
    report = mere_mare(pred, sig, matrix.sigma_y, meta=info)
    return report, (t, eps, sig, pred)


def one_cycle_campaign(predict, samples=None, eps_c=0.035, n_steps=200,
                       matrix=None, fiber=None, options=None):
    """The five one-cycle load cases on the given samples (default 1-5)."""
    if samples is None:
        samples = VIRTUAL_SAMPLES[:5]
    results = []
    for sample in samples:
        for name, comps, full in ONE_CYCLE_CASES:
            report, series = run_case(
                predict, sample, comps, eps_c, n_steps, matrix=matrix,
                fiber=fiber, options=options, fully_controlled=full,
                meta={"case": name, "campaign": "one_cycle"})
            results.append((report, series))
    return results


def cyclic_campaign(predict, samples=None, cycles=range(1, 6), eps_c=0.04,
                    n_steps=200, matrix=None, fiber=None, options=None):
    """Repeated uniaxial stress cycles on the 1D/2D/3D samples."""
    if samples is None:
        samples = VIRTUAL_SAMPLES[5:]
    results = []
    for sample in samples:
        for n_cycles in cycles:
            report, series = run_case(
                predict, sample, (0,), eps_c, n_steps, cycles=n_cycles,
                matrix=matrix, fiber=fiber, options=options,
                meta={"case": "uniaxial_s11", "campaign": "cyclic"})
            results.append((report, series))
    return results


EXTRAPOLATION_VF = (0.001, 0.025, 0.05, 0.075, 0.10, 0.125, 0.15, 0.175, 0.20)
EXTRAPOLATION_EPS = (0.05, 0.075, 0.10)


def extrapolation_campaign(predict, vf_grid=EXTRAPOLATION_VF,
                           eps_grid=EXTRAPOLATION_EPS, n_steps=200,
                           matrix=None, fiber=None, options=None):
    """Uniaxial cycles on a random-3D sample over a vf x eps_c grid."""
    results = []
    for vf in vf_grid:
        sample = VirtualSample("3D", (1 / 3, 1 / 3, 1 / 3, 0, 0, 0), vf)
        for eps_c in eps_grid:
            report, series = run_case(
                predict, sample, (0,), eps_c, n_steps, matrix=matrix,
                fiber=fiber, options=options,
                meta={"case": "uniaxial_s11", "campaign": "extrapolation"})
            results.append((report, series))
    return results


def elastic_slope(eps_series, sig_series, component=0, n_fit=3):
    """Initial loading slope from the first ``n_fit`` nonzero steps."""
    x = eps_series[1:1 + n_fit, component]
    y = sig_series[1:1 + n_fit, component]
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# Report output.
# ---------------------------------------------------------------------------

_COMPONENTS = ("11", "22", "33", "23", "13", "12")


def write_report_csv(path, reports):
    """One row per report: metadata then per-component MeRE/MaRE."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta_keys = sorted({k for r in reports for k in r.meta})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(meta_keys)
                        + [f"mere_{c}" for c in _COMPONENTS]
                        + [f"mare_{c}" for c in _COMPONENTS]
                        + ["mere_avg", "mare_avg"])
        for rep in reports:
            writer.writerow([rep.meta.get(k, "") for k in meta_keys]
                            + [f"{v:.6g}" for v in rep.mere]
                            + [f"{v:.6g}" for v in rep.mare]
                            + [f"{rep.mere_avg:.6g}", f"{rep.mare_avg:.6g}"])
    return path


def write_summary(path, sections):
    """Plain-text summary; ``sections`` maps titles to lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for title, lines in sections.items():
            fh.write(title + "\n" + "-" * len(title) + "\n")
            for line in lines:
                fh.write(line + "\n")
            fh.write("\n")
    return path
