"""End-to-end orchestration: dataset generation, training and evaluation."""
import multiprocessing
import sys
import time

import numpy as np

from . import _kernels
from .config import RunConfig, config_snapshot
from .dataset import Dataset, read_dataset, split_indices, write_dataset, \
    write_series_csv
from .evaluation import VIRTUAL_SAMPLES, cyclic_campaign, \
    extrapolation_campaign, mere_mare, one_cycle_campaign, \
    surrogate_predictor, write_report_csv, write_summary
from .homogenization import LoadProgram, MeanField, cycle_program, \
    ramp_program
from .materials import MatrixState
from .orientation import Microstructure, from_components
from .pathgen import SampleRecord, assemble_record
from .surrogate import GruModel, TrainConfig, build_features, forward, \
    load_checkpoint, save_checkpoint, train, write_history_csv
from ._kernels import KernelError

_WORKER_CONFIG = None


def _init_worker(config):
    global _WORKER_CONFIG
    _WORKER_CONFIG = config


def simulate_record(config, index):
    """Assemble record ``index`` and fill its stress series via the oracle.

    Oracle faults mark the record failed instead of aborting the batch.
    """
    rec = assemble_record(config.generation, index)
    try:
        micro = Microstructure(a=from_components(rec.orientation), vf=rec.vf,
                               fiber=config.fiber)
        mf = MeanField(micro, matrix=config.matrix, options=config.homogenizer)
        rec.stress = mf.run_path(rec.strain)
        rec.status = 0
    except (KernelError, ValueError, FloatingPointError) as exc:
        rec.stress = np.zeros_like(rec.strain)
        rec.status = 1
        print(f"record {index} failed: {exc}", file=sys.stderr)
    return rec


def _worker(index):
    return index, simulate_record(_WORKER_CONFIG, index)


def generate_dataset(config, out_path, count=None, jobs=1, progress=False):
    """Generate, simulate and persist a dataset; returns the Dataset.

    Records are deterministic in (master_seed, index) regardless of the
    worker count; the writer serializes them in index order.
    """
    count = count if count is not None else config.generation.sample_count
    tic = time.perf_counter()
    records = [None] * count
    if jobs and jobs > 1:
        with multiprocessing.Pool(jobs, initializer=_init_worker,
                                  initargs=(config,)) as pool:
            for index, rec in pool.imap_unordered(_worker, range(count),
                                                  chunksize=8):
                records[index] = rec
                if progress and (index + 1) % 100 == 0:
                    print(f"  {sum(r is not None for r in records)}/{count}",
                          file=sys.stderr)
    else:
        for index in range(count):
            records[index] = simulate_record(config, index)
            if progress and (index + 1) % 100 == 0:
                print(f"  {index + 1}/{count}", file=sys.stderr)
    ok = [i for i, r in enumerate(records) if r.status == 0]
    split = split_indices(len(ok), config.training.split,
                          config.training.seed, indices=np.asarray(ok))
    manifest = {
        "config": config_snapshot(config),
        "master_seed": config.generation.master_seed,
        "record_count": count,
        "kernel_backend": _kernels.BACKEND,
        "split": split,
        "generation_seconds": round(time.perf_counter() - tic, 3),
    }
    write_dataset(out_path, records, manifest)
    return read_dataset(out_path)


def stack_split(dataset, which):
    """Stack a split's features/targets into (n, T, 13)/(n, T, 6) arrays."""
    split = dataset.manifest.get("split")
    if split is None:
        ok = dataset.ok_indices()
        split = split_indices(len(ok), (0.80, 0.1975, 0.0025), 0,
                              indices=np.asarray(ok))
    idx = split[which]
    records = [dataset.records[i] for i in idx]
    if not records:
        n_rows = dataset.records[0].n_rows if dataset.records else 0
        return np.zeros((0, n_rows, 13)), np.zeros((0, n_rows, 6))
    n_rows = {r.n_rows for r in records}
    if len(n_rows) != 1:
        raise ValueError("training requires records of equal length")
    inputs = np.stack([build_features(r) for r in records])
    targets = np.stack([r.stress for r in records])
    return inputs, targets


def train_pipeline(config, dataset_path, checkpoint_path, history_path=None,
                   epochs=None):
    """Train a surrogate on a generated dataset; writes checkpoint/history."""
    dataset = read_dataset(dataset_path)
    train_x, train_y = stack_split(dataset, "train")
    val_x, val_y = stack_split(dataset, "val")
    if train_x.shape[0] == 0:
        raise ValueError("empty training split")
    tcfg = config.training
    if epochs is not None:
        from dataclasses import replace
        tcfg = replace(tcfg, epochs=epochs)
    rng = np.random.default_rng(config.network.seed)
    model = GruModel.create(config.network.hidden, rng,
                            dropout=config.network.dropout)
    model, history = train(model, train_x, train_y, val_x, val_y, tcfg)
    save_checkpoint(model, checkpoint_path)
    if history_path is not None:
        write_history_csv(history_path, history)
    return model, history


def test_split_reports(config, dataset, model):
    """Per-record error reports on the held-out test split."""
    test_x, test_y = stack_split(dataset, "test")
    reports = []
    for i in range(test_x.shape[0]):
        pred = forward(model, test_x[i], training=False)
        reports.append(mere_mare(pred, test_y[i], config.matrix.sigma_y,
                                 meta={"campaign": "test_split", "index": i}))
    return reports


def eval_pipeline(config, checkpoint_path, out_dir, dataset_path=None,
                  quick=False):
    """Evaluate a checkpoint: test split plus virtual-sample campaigns."""
    out_dir = config.path("out_dir", out_dir) if out_dir is None else out_dir
    from pathlib import Path
    out_dir = Path(out_dir)
    model = load_checkpoint(checkpoint_path)
    predict = surrogate_predictor(model)
    kwargs = dict(matrix=config.matrix, fiber=config.fiber,
                  options=config.homogenizer)
    n_steps = config.generation.n_steps

    summary = {}
    reports = []
    if dataset_path is not None:
        dataset = read_dataset(dataset_path)
        test_reports = test_split_reports(config, dataset, model)
        reports.extend(test_reports)
        if test_reports:
            mere = np.mean([r.mere for r in test_reports], axis=0)
            mare = np.mean([r.mare for r in test_reports], axis=0)
            summary["Test split (averages over records)"] = [
                "component: " + " ".join(f"{c:>9s}" for c in
                                         ("s11", "s22", "s33", "s23", "s13", "s12")),
                "MeRE:      " + " ".join(f"{v:9.4f}" for v in mere),
                "MaRE:      " + " ".join(f"{v:9.4f}" for v in mare),
            ]

    one = one_cycle_campaign(predict, n_steps=n_steps, **kwargs)
    reports.extend(rep for rep, _ in one)
    summary["One-cycle campaign (samples 1-5, eps_c=0.035)"] = [
        f"{r.meta['case']:>22s} sample {r.meta['sample']}: "
        f"MeRE_avg={r.mere_avg:.4f} MaRE_avg={r.mare_avg:.4f}"
        for r, _ in one]

    cycles = range(1, 3) if quick else range(1, 6)
    cyc = cyclic_campaign(predict, cycles=cycles, n_steps=n_steps, **kwargs)
    reports.extend(rep for rep, _ in cyc)
    summary["Cyclic campaign (1D/2D/3D, eps_c=0.04)"] = [
        f"sample {r.meta['sample']} cycles={r.meta['cycles']}: "
        f"MeRE_avg={r.mere_avg:.4f} MaRE_avg={r.mare_avg:.4f}"
        for r, _ in cyc]

    vf_grid = (0.001, 0.125, 0.20) if quick else None
    ext = extrapolation_campaign(
        predict, n_steps=n_steps,
        **({} if vf_grid is None else {"vf_grid": vf_grid}), **kwargs)
    reports.extend(rep for rep, _ in ext)
    summary["Extrapolation campaign (3D, vf x eps_c grid)"] = [
        f"vf={r.meta['vf']:.3f} eps_c={r.meta['eps_c']:.3f}: "
        f"MeRE_s11={r.mere[0]:.4f} MaRE_s11={r.mare[0]:.4f}"
        for r, _ in ext]

    write_report_csv(out_dir / "reports.csv", reports)
    for i, (rep, series) in enumerate(one):
        t, eps, sig, pred = series
        write_series_csv(
            out_dir / f"one_cycle_{rep.meta['case']}_{rep.meta['sample']}.csv",
            t, eps, sig)
    write_summary(out_dir / "summary.txt", summary)
    return reports, summary


def build_load_program(spec, n_steps=200):
    """Build a LoadProgram from a config [simulate][loadcase] table."""
    kind = spec.get("type", "cycle")
    comp_names = list(LoadProgram.COMPONENTS)
    if kind == "cycle":
        comps = [comp_names.index(c) for c in spec["control"]]
        return cycle_program(comps, eps_c=float(spec.get("eps_c", 0.035)),
                             n_steps=int(spec.get("steps", n_steps)),
                             cycles=int(spec.get("cycles", 1)))
    if kind == "ramp":
        targets = {comp_names.index(c): float(v)
                   for c, v in spec["targets"].items()}
        return ramp_program(targets, n_steps=int(spec.get("steps", n_steps)))
    if kind == "path":
        imposed = {comp_names.index(c): np.asarray(v, dtype=float)
                   for c, v in spec["imposed"].items()}
        n_rows = len(next(iter(imposed.values())))
        return LoadProgram(imposed=imposed, n_rows=n_rows).validate()
    raise ValueError(f"unknown load case type {kind!r}")


def simulate_pipeline(config, csv_path, container_path=None):
    """Run the [simulate] section: load program -> CSV plus container."""
    sim = config.simulate
    if not sim:
        raise ValueError("config has no [simulate] section")
    micro_spec = sim["microstructure"]
    micro = Microstructure(a=from_components(micro_spec["a"]),
                           vf=float(micro_spec["vf"]), fiber=config.fiber)
    program = build_load_program(sim.get("loadcase", {}),
                                 n_steps=config.generation.n_steps)
    mf = MeanField(micro, matrix=config.matrix, options=config.homogenizer)
    t, eps, sig = mf.run_program(program)
    write_series_csv(csv_path, t, eps, sig)
    if container_path is not None:
        rec = SampleRecord(seed=0, strain=eps,
                           orientation=np.asarray(micro_spec["a"], dtype=float),
                           vf=float(micro_spec["vf"]), stress=sig, status=0)
        write_dataset(container_path, [rec],
                      {"config": config_snapshot(config), "kind": "simulate"})
    return t, eps, sig
